//! Global distinguishability `D(chi, Delta)`: the mean relative entropy (bits)
//! between the counting distributions at every pair of phases in the prior
//! window `[chi - Delta/2, chi + Delta/2]`, and its small-window expansion.
//!
//! The double integral is discretised with a tensor-product rule built from
//! a one-dimensional node set `{theta_i, w_i}`. Its pair sum separates:
//!
//! ```text
//! sum_ik w_i w_k S(i||k) = W * sum_i w_i sum_m p_im log2 p_im - sum_m A_m B_m
//! A_m = sum_i w_i p_im,  B_m = sum_i w_i log2 max(p_im, floor),  W = sum_i w_i
//! ```
//!
//! so the `K^2` divergences cost `O(K d)` instead of `O(K^2 d)`. Subtracting a
//! fixed reference `log2 p_m(chi)` from every log leaves the identity exact and
//! removes the cancellation between the two terms for narrow windows.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::fisher_prob_derivative;
use crate::info::{kl_bits, PROBABILITY_FLOOR, ZERO_PROBABILITY};
use crate::quadrature::{gauss_legendre, trapezoid, KronrodPanel};
use crate::rotation::RotationEngine;
use crate::spin::{ProbeFamily, SpinJ, SpinProjection, SpinState};
use crate::wigner::{wigner_d_column, wigner_d_element};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadratureRule {
    /// Tensor Gauss-Legendre with `nodes_per_axis` nodes.
    GaussLegendre,
    /// Tensor trapezoid with `nodes_per_axis` nodes including both ends.
    Trapezoid,
    /// Composite 15-point Gauss-Kronrod applied to each outcome's integrals
    /// separately, starting from `ceil(nodes_per_axis / 15)` panels and
    /// bisecting the panels with the largest error contribution until the
    /// estimated error on `D` is below the configured relative tolerance.
    /// Clamp diagnostics use a shared `nodes_per_axis` Gauss-Legendre grid.
    #[default]
    AdaptiveKronrod,
}

pub const ADAPTIVE_TOLERANCE: f64 = 1e-10;
const ADAPTIVE_ABSOLUTE: f64 = 1e-15;
const MAX_PANELS: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    nodes_per_axis: usize,
    rule: QuadratureRule,
    tolerance: f64,
}

impl QuadratureSpec {
    pub const MIN_NODES: usize = 8;

    pub fn new(nodes_per_axis: usize, rule: QuadratureRule) -> Result<Self> {
        if nodes_per_axis < Self::MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "nodes_per_axis = {nodes_per_axis} is below the minimum {}",
                Self::MIN_NODES
            )));
        }
        Ok(Self {
            nodes_per_axis,
            rule,
            tolerance: ADAPTIVE_TOLERANCE,
        })
    }

    /// `max(48, ceil(12 n Delta / pi))`: twelve nodes per `pi/j` oscillation period.
    pub fn default_nodes(photons: u32, delta: f64) -> usize {
        let scaled = (12.0 * f64::from(photons) * delta / PI).ceil();
        if scaled.is_finite() && scaled > 48.0 {
            scaled as usize
        } else {
            48
        }
    }

    /// Default rule and resolution for a window of width `delta`.
    pub fn for_window(j: SpinJ, delta: f64) -> Self {
        Self {
            nodes_per_axis: Self::default_nodes(j.photons(), delta),
            rule: QuadratureRule::default(),
            tolerance: ADAPTIVE_TOLERANCE,
        }
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// Relative error target of the adaptive rule.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_tolerance(self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {tolerance} must be positive"
            )));
        }
        Ok(Self { tolerance, ..self })
    }

    pub fn doubled(&self) -> Self {
        Self {
            nodes_per_axis: 2 * self.nodes_per_axis,
            ..*self
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistinguishabilityQuery {
    pub probe: SpinState,
    pub chi: f64,
    pub delta: f64,
    pub quadrature: QuadratureSpec,
}

impl DistinguishabilityQuery {
    /// Query with the default quadrature for this probe and window.
    pub fn new(probe: SpinState, chi: f64, delta: f64) -> Self {
        let quadrature = QuadratureSpec::for_window(probe.spin(), delta);
        Self {
            probe,
            chi,
            delta,
            quadrature,
        }
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureSpec) -> Self {
        self.quadrature = quadrature;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityResult {
    /// `D(chi, Delta)` in bits.
    pub value: f64,
    /// Fraction of node pairs `(i, k)` of the shared grid where some outcome
    /// possible at `theta_i` was clamped at `theta_k`.
    pub clamped_fraction: f64,
    /// Nodes per axis: of the tensor rule for the fixed rules, of the finest
    /// per-outcome node set for the adaptive rule.
    pub nodes_used: usize,
    /// Estimated absolute quadrature error (adaptive rule only).
    pub error_estimate: Option<f64>,
}

/// Counting probabilities along the trajectory of one probe.
enum Sampler {
    /// At most two nonzero `J_z` amplitudes: exact Wigner-d elements keep full
    /// relative accuracy in probabilities far below machine epsilon.
    Sparse {
        j: SpinJ,
        terms: Vec<(SpinProjection, Complex64)>,
    },
    /// `psi_m(theta) = sum_k u_mk exp(i mu_k theta)`, `u_mk = V_mk c_k` in the
    /// `J_y` eigenbasis, `mu_k = -j + k`. Rows of `u` are stored contiguously.
    Spectral {
        rows: Vec<Vec<Complex64>>,
        mu_lowest: f64,
    },
}

impl Sampler {
    fn new(engine: Option<&RotationEngine>, probe: &SpinState) -> Result<Self> {
        let j = probe.spin();
        if !Self::needs_engine(probe) {
            let terms = probe
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(k, a)| (j.projection_at(k), *a))
                .collect();
            return Ok(Self::Sparse { j, terms });
        }
        let engine = engine
            .ok_or_else(|| Error::InvalidArgument("dense probe needs a rotation engine".into()))?;
        crate::spin::check_dim(engine.dim(), probe.dim())?;
        let coeffs = engine.y_coefficients(probe.amplitudes());
        let v = engine.y_vectors();
        let rows = (0..j.dim())
            .map(|m| (0..j.dim()).map(|k| v[(m, k)] * coeffs[k]).collect())
            .collect();
        Ok(Self::Spectral {
            rows,
            mu_lowest: -j.j(),
        })
    }

    fn needs_engine(probe: &SpinState) -> bool {
        probe.support_size() > 2
    }

    /// `p_m(theta)` for the outcome with index `m`.
    fn prob(&self, m: usize, theta: f64) -> f64 {
        match self {
            Self::Sparse { j, terms } => {
                let row = j.projection_at(m);
                match terms.as_slice() {
                    [(c, a)] => {
                        let d = wigner_d_element(*j, row, *c, theta);
                        a.norm_sqr() * d * d
                    }
                    [(c1, a1), (c2, a2)] => {
                        let d1 = wigner_d_element(*j, row, *c1, theta);
                        let d2 = wigner_d_element(*j, row, *c2, theta);
                        (a1 * d1 + a2 * d2).norm_sqr()
                    }
                    _ => unreachable!("sparse sampler holds one or two terms"),
                }
            }
            Self::Spectral { rows, mu_lowest } => {
                let step = Complex64::cis(theta);
                let mut phase = Complex64::cis(mu_lowest * theta);
                let mut acc = Complex64::new(0.0, 0.0);
                for u in &rows[m] {
                    acc += u * phase;
                    phase *= step;
                }
                acc.norm_sqr()
            }
        }
    }

    fn probs(&self, theta: f64) -> Vec<f64> {
        match self {
            Self::Sparse { j, terms } => match terms.as_slice() {
                [(c, a)] => {
                    let w = a.norm_sqr();
                    wigner_d_column(*j, *c, theta)
                        .into_iter()
                        .map(|d| w * d * d)
                        .collect()
                }
                [(c1, a1), (c2, a2)] => {
                    let d1 = wigner_d_column(*j, *c1, theta);
                    let d2 = wigner_d_column(*j, *c2, theta);
                    d1.iter()
                        .zip(&d2)
                        .map(|(x, y)| (a1 * x + a2 * y).norm_sqr())
                        .collect()
                }
                _ => unreachable!("sparse sampler holds one or two terms"),
            },
            Self::Spectral { rows, mu_lowest } => {
                let d = rows.len();
                let step = Complex64::cis(theta);
                let mut phases = Vec::with_capacity(d);
                let mut phase = Complex64::cis(mu_lowest * theta);
                for _ in 0..d {
                    phases.push(phase);
                    phase *= step;
                }
                rows.iter()
                    .map(|row| {
                        row.iter()
                            .zip(&phases)
                            .map(|(u, e)| u * e)
                            .sum::<Complex64>()
                            .norm_sqr()
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn from_predicate(p: &[f64], pred: impl Fn(f64) -> bool) -> Self {
        let mut words = vec![0u64; p.len().div_ceil(64)];
        for (k, &x) in p.iter().enumerate() {
            if pred(x) {
                words[k / 64] |= 1 << (k % 64);
            }
        }
        Self(words)
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    fn intersects(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}

/// Support and clamp masks of one node distribution.
#[derive(Clone, Debug)]
struct NodeMasks {
    support: Bits,
    clamp: Bits,
}

impl NodeMasks {
    fn new(p: &[f64]) -> Self {
        Self {
            support: Bits::from_predicate(p, |x| x > ZERO_PROBABILITY),
            clamp: Bits::from_predicate(p, |x| x < PROBABILITY_FLOOR),
        }
    }
}

/// Per-node integrands `(p 1{p > eps}, l, p l 1{p > eps})` with
/// `l = log2 max(p, floor) - reference`.
fn integrands(p: f64, reference: f64) -> (f64, f64, f64) {
    let ell = p.max(PROBABILITY_FLOOR).log2() - reference;
    if p > ZERO_PROBABILITY {
        (p, ell, p * ell)
    } else {
        (0.0, ell, 0.0)
    }
}

/// Weighted sums `A_m`, `B_m`, `C_m` and the weight total `W_m` per outcome.
#[derive(Clone, Debug)]
struct Moments {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    w: Vec<f64>,
}

impl Moments {
    fn zeros(d: usize) -> Self {
        Self {
            a: vec![0.0; d],
            b: vec![0.0; d],
            c: vec![0.0; d],
            w: vec![0.0; d],
        }
    }

    fn add_node(&mut self, weight: f64, p: &[f64], reference: &[f64]) {
        for (m, &x) in p.iter().enumerate() {
            let (a, b, c) = integrands(x, reference[m]);
            self.a[m] += weight * a;
            self.b[m] += weight * b;
            self.c[m] += weight * c;
            self.w[m] += weight;
        }
    }

    /// Mean relative entropy over a square of side `delta`.
    fn value(&self, delta: f64) -> f64 {
        let mut total = 0.0;
        for m in 0..self.a.len() {
            total += self.w[m] * self.c[m] - self.a[m] * self.b[m];
        }
        total / (delta * delta)
    }
}

fn check_interval(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 2.0 * PI) {
        return Err(Error::InvalidInterval { delta });
    }
    Ok(())
}

fn clamped_fraction(masks: &[NodeMasks]) -> f64 {
    if masks.iter().all(|n| n.clamp.is_empty()) {
        return 0.0;
    }
    let mut supports: HashMap<&Bits, usize> = HashMap::new();
    let mut clamps: HashMap<&Bits, usize> = HashMap::new();
    for n in masks {
        *supports.entry(&n.support).or_default() += 1;
        if !n.clamp.is_empty() {
            *clamps.entry(&n.clamp).or_default() += 1;
        }
    }
    let mut hits = 0u128;
    for (s, ns) in &supports {
        for (c, nc) in &clamps {
            if s.intersects(c) {
                hits += (*ns as u128) * (*nc as u128);
            }
        }
    }
    let k = masks.len() as f64;
    hits as f64 / (k * k)
}

#[derive(Clone, Copy, Debug, Default)]
struct Sums {
    a: f64,
    b: f64,
    c: f64,
    w: f64,
}

/// Kronrod sums of the integrand magnitudes, `|l| + 1` in place of `l`: the
/// scale of the roundoff in a panel's sums.
#[derive(Clone, Copy, Debug, Default)]
struct Magnitude {
    b: f64,
    c: f64,
}

/// One Gauss-Kronrod panel of one outcome's integrals.
struct Panel {
    m: usize,
    lo: f64,
    hi: f64,
    kronrod: Sums,
    gauss: Sums,
    magnitude: Magnitude,
}

impl Panel {
    fn new(sampler: &Sampler, m: usize, reference: f64, lo: f64, hi: f64) -> Self {
        let rule = KronrodPanel::new(lo, hi);
        let mut kronrod = Sums::default();
        let mut gauss = Sums::default();
        let mut magnitude = Magnitude::default();
        for i in 0..15 {
            let (a, b, c) = integrands(sampler.prob(m, rule.nodes[i]), reference);
            let wk = rule.kronrod[i];
            kronrod.a += wk * a;
            kronrod.b += wk * b;
            kronrod.c += wk * c;
            kronrod.w += wk;
            magnitude.b += wk * (b.abs() + 1.0);
            magnitude.c += wk * a * (b.abs() + 1.0);
            let wg = rule.gauss[i];
            if wg != 0.0 {
                gauss.a += wg * a;
                gauss.b += wg * b;
                gauss.c += wg * c;
                gauss.w += wg;
            }
        }
        Self {
            m,
            lo,
            hi,
            kronrod,
            gauss,
            magnitude,
        }
    }

    /// Error contribution of this panel to `D` (the Kronrod-Gauss discrepancy
    /// of each panel sum, propagated to first order) and the part of it that
    /// exceeds the roundoff level of the panel sums.
    fn error(&self, total: &Moments, delta: f64) -> (f64, f64) {
        let (k, g, m) = (&self.kronrod, &self.gauss, self.m);
        let scale = delta * delta;
        let raw = (total.w[m] * (k.c - g.c).abs()
            + total.a[m].abs() * (k.b - g.b).abs()
            + (k.a - g.a).abs() * total.b[m].abs())
            / scale;
        let noise = 64.0
            * f64::EPSILON
            * (total.w[m] * self.magnitude.c
                + total.a[m].abs() * self.magnitude.b
                + k.a * total.b[m].abs())
            / scale;
        (raw, (raw - noise).max(0.0))
    }
}

struct Adapted {
    moments: Moments,
    error_estimate: f64,
    max_nodes: usize,
}

/// Each outcome's integrals are refined on their own panel set; panels of all
/// outcomes compete for bisection by their error contribution to `D`.
fn adaptive(
    sampler: &Sampler,
    reference: &[f64],
    (lo, hi): (f64, f64),
    initial: usize,
    tolerance: f64,
) -> Adapted {
    let d = reference.len();
    let delta = hi - lo;
    let edge = |i: usize| {
        if i == initial {
            hi
        } else {
            lo + delta * i as f64 / initial as f64
        }
    };
    let mut panels: Vec<Panel> = (0..d)
        .flat_map(|m| (0..initial).map(move |i| (m, i)))
        .map(|(m, i)| Panel::new(sampler, m, reference[m], edge(i), edge(i + 1)))
        .collect();
    loop {
        let mut total = Moments::zeros(d);
        for p in &panels {
            total.a[p.m] += p.kronrod.a;
            total.b[p.m] += p.kronrod.b;
            total.c[p.m] += p.kronrod.c;
            total.w[p.m] += p.kronrod.w;
        }
        let value = total.value(delta);
        let assessed: Vec<(f64, f64)> = panels.iter().map(|p| p.error(&total, delta)).collect();
        let estimate: f64 = assessed.iter().map(|e| e.0).sum();
        let resolvable: f64 = assessed.iter().map(|e| e.1).sum();
        let errors: Vec<f64> = assessed.iter().map(|e| e.1).collect();
        let converged = resolvable <= (tolerance * value.abs()).max(ADAPTIVE_ABSOLUTE);
        if converged || panels.len() >= MAX_PANELS {
            let mut per_outcome = vec![0usize; d];
            for p in &panels {
                per_outcome[p.m] += 15;
            }
            let max_nodes = per_outcome.into_iter().max().unwrap_or(0);
            return Adapted {
                moments: total,
                error_estimate: estimate,
                max_nodes,
            };
        }
        let mut order: Vec<usize> = (0..panels.len()).collect();
        order.sort_by(|&x, &y| errors[y].total_cmp(&errors[x]).then(x.cmp(&y)));
        let count = (panels.len() / 10).max(1).min(MAX_PANELS - panels.len());
        let mut split = vec![false; panels.len()];
        for &i in &order[..count] {
            split[i] = true;
        }
        let mut refined = Vec::with_capacity(panels.len() + count);
        for (i, p) in panels.into_iter().enumerate() {
            if split[i] {
                let mid = 0.5 * (p.lo + p.hi);
                refined.push(Panel::new(sampler, p.m, reference[p.m], p.lo, mid));
                refined.push(Panel::new(sampler, p.m, reference[p.m], mid, p.hi));
            } else {
                refined.push(p);
            }
        }
        panels = refined;
    }
}

struct Prepared {
    sampler: Sampler,
    reference: Vec<f64>,
    lo: f64,
    hi: f64,
}

fn prepare(engine: Option<&RotationEngine>, q: &DistinguishabilityQuery) -> Result<Prepared> {
    check_interval(q.delta)?;
    if !q.chi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "chi = {} is not finite",
            q.chi
        )));
    }
    let sampler = match engine {
        Some(e) => Sampler::new(Some(e), &q.probe)?,
        None if Sampler::needs_engine(&q.probe) => {
            Sampler::new(Some(&RotationEngine::new(q.probe.spin())), &q.probe)?
        }
        None => Sampler::new(None, &q.probe)?,
    };
    let reference = sampler
        .probs(q.chi)
        .into_iter()
        .map(|x| x.max(PROBABILITY_FLOOR).log2())
        .collect();
    Ok(Prepared {
        sampler,
        reference,
        lo: q.chi - q.delta / 2.0,
        hi: q.chi + q.delta / 2.0,
    })
}

/// Shared one-dimensional node set of the fixed rules.
fn fixed_nodes(q: &DistinguishabilityQuery, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let n = q.quadrature.nodes_per_axis;
    match q.quadrature.rule {
        QuadratureRule::Trapezoid => trapezoid(n, lo, hi),
        QuadratureRule::GaussLegendre | QuadratureRule::AdaptiveKronrod => {
            gauss_legendre(n, lo, hi)
        }
    }
}

/// `D(chi, Delta)` for the query, building a rotation engine if the probe needs one.
pub fn disting(q: &DistinguishabilityQuery) -> Result<DistinguishabilityResult> {
    disting_impl(None, q)
}

/// [`disting`] reusing a prebuilt engine for the probe's spin.
pub fn disting_with_engine(
    engine: &RotationEngine,
    q: &DistinguishabilityQuery,
) -> Result<DistinguishabilityResult> {
    disting_impl(Some(engine), q)
}

fn disting_impl(
    engine: Option<&RotationEngine>,
    q: &DistinguishabilityQuery,
) -> Result<DistinguishabilityResult> {
    let prep = prepare(engine, q)?;
    let d = prep.reference.len();
    // Clamp diagnostics always come from the shared base grid.
    let (nodes, weights) = fixed_nodes(q, prep.lo, prep.hi);
    let mut base = Moments::zeros(d);
    let mut masks = Vec::with_capacity(nodes.len());
    for (&t, &w) in nodes.iter().zip(&weights) {
        let p = prep.sampler.probs(t);
        base.add_node(w, &p, &prep.reference);
        masks.push(NodeMasks::new(&p));
    }
    let clamped_fraction = clamped_fraction(&masks);
    let (value, nodes_used, error_estimate) = match q.quadrature.rule {
        QuadratureRule::AdaptiveKronrod => {
            let initial = q.quadrature.nodes_per_axis.div_ceil(15);
            let ad = adaptive(
                &prep.sampler,
                &prep.reference,
                (prep.lo, prep.hi),
                initial,
                q.quadrature.tolerance,
            );
            (
                ad.moments.value(q.delta),
                ad.max_nodes,
                Some(ad.error_estimate),
            )
        }
        _ => (base.value(q.delta), nodes.len(), None),
    };
    Ok(DistinguishabilityResult {
        value: value.max(0.0),
        clamped_fraction,
        nodes_used,
        error_estimate,
    })
}

/// One-dimensional nodes and weights of the shared grid: the tensor rule
/// itself for the fixed rules, the clamp-diagnostic Gauss-Legendre grid for
/// the adaptive rule.
pub fn quadrature_nodes(q: &DistinguishabilityQuery) -> Result<(Vec<f64>, Vec<f64>)> {
    check_interval(q.delta)?;
    Ok(fixed_nodes(q, q.chi - q.delta / 2.0, q.chi + q.delta / 2.0))
}

/// Direct `O(K^2)` evaluation of the tensor rule on the shared grid of
/// [`quadrature_nodes`], each pair's divergence computed explicitly.
pub fn disting_pairwise(q: &DistinguishabilityQuery) -> Result<DistinguishabilityResult> {
    let prep = prepare(None, q)?;
    let (nodes, weights) = fixed_nodes(q, prep.lo, prep.hi);
    let dists: Vec<Vec<f64>> = nodes.iter().map(|&t| prep.sampler.probs(t)).collect();
    let mut total = 0.0;
    let mut clamped = 0usize;
    for (pi, wi) in dists.iter().zip(&weights) {
        let mut row = 0.0;
        for (pk, wk) in dists.iter().zip(&weights) {
            let s = kl_bits(pi, pk);
            clamped += usize::from(s.clamped);
            row += wk * s.bits;
        }
        total += wi * row;
    }
    let k = dists.len() as f64;
    Ok(DistinguishabilityResult {
        value: total / (q.delta * q.delta),
        clamped_fraction: clamped as f64 / (k * k),
        nodes_used: dists.len(),
        error_estimate: None,
    })
}

/// Small-window expansion `Delta^2 / (8 ln 2) * (J(chi - Delta/2) + J(chi + Delta/2))`.
pub fn local_approx(probe: &SpinState, chi: f64, delta: f64) -> Result<f64> {
    local_approx_with_engine(&RotationEngine::new(probe.spin()), probe, chi, delta)
}

pub fn local_approx_with_engine(
    engine: &RotationEngine,
    probe: &SpinState,
    chi: f64,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInterval { delta });
    }
    let lower = fisher_prob_derivative(engine, probe, chi - delta / 2.0)?.value;
    let upper = fisher_prob_derivative(engine, probe, chi + delta / 2.0)?.value;
    Ok(delta * delta / (8.0 * std::f64::consts::LN_2) * (lower + upper))
}

/// Quadrature settings shared by every cell of a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOverride {
    /// Fixed resolution; `None` uses [`QuadratureSpec::default_nodes`] per cell.
    pub nodes_per_axis: Option<usize>,
    pub rule: QuadratureRule,
    /// Adaptive error target; `None` uses [`ADAPTIVE_TOLERANCE`].
    pub tolerance: Option<f64>,
}

impl QuadratureOverride {
    pub fn spec_for(&self, j: SpinJ, delta: f64) -> Result<QuadratureSpec> {
        let nodes = self
            .nodes_per_axis
            .unwrap_or_else(|| QuadratureSpec::default_nodes(j.photons(), delta));
        let spec = QuadratureSpec::new(nodes, self.rule)?;
        match self.tolerance {
            Some(t) => spec.with_tolerance(t),
            None => Ok(spec),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub family: ProbeFamily,
    pub photons: u32,
    pub chi: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub outcome: Result<DistinguishabilityResult>,
}

/// Evaluates one cell with its own probe and quadrature.
pub fn disting_cell(
    cell: &SweepCell,
    quadrature: &QuadratureOverride,
) -> Result<DistinguishabilityResult> {
    let j = SpinJ::from_photons(cell.photons)?;
    let probe = cell.family.build(j)?;
    let spec = quadrature.spec_for(j, cell.delta)?;
    disting(&DistinguishabilityQuery {
        probe,
        chi: cell.chi,
        delta: cell.delta,
        quadrature: spec,
    })
}

/// Cartesian product ordered by family, then `n`, then `chi`, then `Delta`.
/// Cells run in parallel; a failing cell becomes a row carrying its error.
pub fn sweep(
    families: &[ProbeFamily],
    photons: &[u32],
    chis: &[f64],
    deltas: &[f64],
    quadrature: &QuadratureOverride,
) -> Vec<SweepRow> {
    let mut cells = Vec::with_capacity(families.len() * photons.len() * chis.len() * deltas.len());
    for &family in families {
        for &n in photons {
            for &chi in chis {
                for &delta in deltas {
                    cells.push(SweepCell {
                        family,
                        photons: n,
                        chi,
                        delta,
                    });
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|cell| SweepRow {
            outcome: disting_cell(&cell, quadrature),
            cell,
        })
        .collect()
}

/// Single-family sweep.
pub fn disting_sweep(
    family: ProbeFamily,
    photons: &[u32],
    chis: &[f64],
    deltas: &[f64],
    quadrature: &QuadratureOverride,
) -> Vec<SweepRow> {
    sweep(&[family], photons, chis, deltas, quadrature)
}

/// Parameter grid of the local-versus-global scatter comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Grid {
    pub families: Vec<ProbeFamily>,
    pub photons: Vec<u32>,
    pub chis: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl Default for Fig2Grid {
    fn default() -> Self {
        Self {
            families: vec![
                ProbeFamily::Noon { zeta: 0.0 },
                ProbeFamily::FockZ(crate::spin::FockLevel::Fixed(SpinProjection::ZERO)),
                ProbeFamily::FockZ(crate::spin::FockLevel::Highest),
                ProbeFamily::PhaseState { gamma: PI / 2.0 },
            ],
            photons: (5..=50).collect(),
            chis: vec![PI / 2.0, 3.0 * PI / 4.0, PI],
            deltas: vec![1e-3, PI],
        }
    }
}

impl Fig2Grid {
    pub fn run(&self, quadrature: &QuadratureOverride) -> Vec<SweepRow> {
        sweep(
            &self.families,
            &self.photons,
            &self.chis,
            &self.deltas,
            quadrature,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::Trajectory;
    use crate::spin::{make_fock_z, make_noon, make_phase_state, y_eigenbasis, FockLevel};
    use nalgebra::DVector;

    fn spin(two_j: u32) -> SpinJ {
        SpinJ::new(two_j).unwrap()
    }

    fn query(probe: SpinState, chi: f64, delta: f64) -> DistinguishabilityQuery {
        DistinguishabilityQuery::new(probe, chi, delta)
    }

    #[test]
    fn interval_validation() {
        let p = make_noon(spin(4), 0.0).unwrap();
        for bad in [0.0, -1.0, 2.0 * PI, 7.0, f64::NAN] {
            assert!(matches!(
                disting(&query(p.clone(), 1.0, bad)),
                Err(Error::InvalidInterval { .. })
            ));
        }
        assert!(QuadratureSpec::new(7, QuadratureRule::GaussLegendre).is_err());
        assert!(matches!(
            local_approx(&p, 0.0, 0.0),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn default_nodes_formula() {
        assert_eq!(QuadratureSpec::default_nodes(5, 1e-3), 48);
        assert_eq!(QuadratureSpec::default_nodes(10, PI), 120);
        assert_eq!(QuadratureSpec::default_nodes(50, PI), 600);
    }

    #[test]
    fn jy_eigenstate_is_indistinguishable() {
        let j = spin(6);
        let top = y_eigenbasis(j).entries().column(6).into_owned();
        let probe = SpinState::new(j, top).unwrap();
        for rule in [
            QuadratureRule::AdaptiveKronrod,
            QuadratureRule::GaussLegendre,
        ] {
            let q = query(probe.clone(), 0.4, 2.0)
                .with_quadrature(QuadratureSpec::new(48, rule).unwrap());
            assert!(disting(&q).unwrap().value < 1e-12);
        }
    }

    #[test]
    fn separable_matches_pairwise() {
        let cases = [
            (make_noon(spin(5), 0.0).unwrap(), PI, PI),
            (make_phase_state(spin(6), PI / 2.0).unwrap(), PI / 2.0, 1.0),
            (make_fock_z(spin(8), spin(8).highest()).unwrap(), PI, PI),
            (
                make_fock_z(spin(8), SpinProjection::ZERO).unwrap(),
                0.75 * PI,
                0.3,
            ),
        ];
        for (probe, chi, delta) in cases {
            for rule in [QuadratureRule::GaussLegendre, QuadratureRule::Trapezoid] {
                let q = query(probe.clone(), chi, delta)
                    .with_quadrature(QuadratureSpec::new(20, rule).unwrap());
                let a = disting(&q).unwrap();
                let b = disting_pairwise(&q).unwrap();
                assert!(
                    (a.value - b.value).abs() < 1e-10 * b.value.max(1e-3),
                    "{rule:?}: {} vs {}",
                    a.value,
                    b.value
                );
                assert!((a.clamped_fraction - b.clamped_fraction).abs() < 1e-15);
                assert_eq!(a.nodes_used, b.nodes_used);
            }
        }
    }

    #[test]
    fn noon_saturates_at_inverse_ln2() {
        // Over a full period every pair of NOON distributions averages to 1/ln 2 bits.
        for n in [4, 6, 10] {
            let r = disting(&query(make_noon(spin(n), 0.0).unwrap(), PI, PI)).unwrap();
            assert!(
                (r.value - 1.0 / std::f64::consts::LN_2).abs() < 1e-8,
                "n={n} {}",
                r.value
            );
        }
    }

    #[test]
    fn noon_translation_by_pi_over_j() {
        let j = spin(8);
        let probe = make_noon(j, 0.0).unwrap();
        let a = disting(&query(probe.clone(), 0.7, 0.5)).unwrap().value;
        let b = disting(&query(probe, 0.7 + PI / j.j(), 0.5)).unwrap().value;
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn swap_symmetry_of_pair_sum() {
        let probe = make_phase_state(spin(5), 0.3).unwrap();
        let q = query(probe.clone(), 1.1, 1.5)
            .with_quadrature(QuadratureSpec::new(24, QuadratureRule::Trapezoid).unwrap());
        let (x, w) = quadrature_nodes(&q).unwrap();
        let e = RotationEngine::new(probe.spin());
        let t = Trajectory::new(&e, &probe).unwrap();
        let dists: Vec<Vec<f64>> = x
            .iter()
            .map(|&th| t.amplitudes(th).iter().map(|a| a.norm_sqr()).collect())
            .collect();
        let mut forward = 0.0;
        let mut swapped = 0.0;
        for i in 0..x.len() {
            for k in 0..x.len() {
                forward += w[i] * w[k] * kl_bits(&dists[i], &dists[k]).bits;
                swapped += w[k] * w[i] * kl_bits(&dists[k], &dists[i]).bits;
            }
        }
        let r = disting(&q).unwrap().value;
        assert!((forward - swapped).abs() < 1e-13 * forward);
        assert!((r - swapped / (1.5 * 1.5)).abs() < 1e-10 * r);
    }

    #[test]
    fn doubling_nodes_converges() {
        let probe = make_fock_z(spin(12), spin(12).highest()).unwrap();
        let q = query(probe, PI, PI);
        let a = disting(&q).unwrap();
        let b = disting(&q.clone().with_quadrature(q.quadrature.doubled())).unwrap();
        assert!((a.value - b.value).abs() < 1e-6 * a.value);
        assert!(a.error_estimate.unwrap() < 1e-9 * a.value);
    }

    #[test]
    fn local_approx_closed_form_for_noon() {
        let j = spin(50);
        let v = local_approx(&make_noon(j, 0.0).unwrap(), 0.3, 1e-3).unwrap();
        let expected = 1e-6 * 625.0 / std::f64::consts::LN_2;
        assert!((v - expected).abs() < 1e-9 * expected);
        assert!((expected - 9.017e-4).abs() < 1e-7);
    }

    /// Limit of `disting / local_approx` as the window closes around `chi`.
    ///
    /// A smooth outcome contributes `J_m (theta1 - theta2)^2 / (2 ln 2)` to the
    /// divergence and the mean of `(theta1 - theta2)^2` over the square is
    /// `Delta^2 / 6`, giving 1/3 of the expansion. An outcome with a double
    /// zero at `chi`, `p_m = c t^2`, contributes `c Delta^2 / (9 ln 2)` against
    /// `c Delta^2 / ln 2` in the expansion, giving 1/9.
    fn narrow_limit(probe: &SpinState, chi: f64) -> f64 {
        let e = RotationEngine::new(probe.spin());
        let (psi, dpsi) = Trajectory::new(&e, probe)
            .unwrap()
            .amplitudes_and_derivative(chi);
        let (mut regular, mut zero) = (0.0, 0.0);
        for (a, da) in psi.iter().zip(dpsi.iter()) {
            if a.norm_sqr() < 1e-14 {
                zero += 4.0 * da.norm_sqr();
            } else {
                regular += 4.0 * (a.conj() * da).re.powi(2) / a.norm_sqr();
            }
        }
        (regular / 3.0 + zero / 9.0) / (regular + zero)
    }

    #[test]
    fn narrow_window_ratio_limit() {
        let j = spin(10);
        let probes = [
            make_noon(j, 0.0).unwrap(),
            make_phase_state(j, PI / 2.0).unwrap(),
            make_fock_z(j, SpinProjection::ZERO).unwrap(),
            make_fock_z(j, j.highest()).unwrap(),
        ];
        let limits: Vec<f64> = probes.iter().map(|p| narrow_limit(p, PI / 2.0)).collect();
        assert!((limits[0] - 1.0 / 9.0).abs() < 1e-12);
        assert!((limits[1] - 1.0 / 3.0).abs() < 1e-12);
        for (probe, limit) in probes.iter().zip(&limits) {
            let mut gaps = Vec::new();
            for delta in [1e-2, 1e-3, 1e-4] {
                let d = disting(&query(probe.clone(), PI / 2.0, delta))
                    .unwrap()
                    .value;
                let l = local_approx(probe, PI / 2.0, delta).unwrap();
                gaps.push((d / l - limit).abs());
            }
            assert!(gaps[2] < 1e-6, "limit {limit}: {gaps:?}");
        }
    }

    #[test]
    fn fock_probe_clamping_is_reported() {
        // |j,+j> at theta = pi collapses onto m = -j, so pairs near pi clamp.
        let j = spin(40);
        let r = disting(&query(make_fock_z(j, j.highest()).unwrap(), PI, PI)).unwrap();
        assert!(r.clamped_fraction >= 0.0 && r.clamped_fraction <= 1.0);
        let mid = disting(&query(make_fock_z(j, j.highest()).unwrap(), PI / 2.0, 0.2)).unwrap();
        assert_eq!(mid.clamped_fraction, 0.0);
    }

    #[test]
    fn sweep_flags_and_order() {
        let q = QuadratureOverride::default();
        let rows = sweep(
            &[
                ProbeFamily::FockZ(FockLevel::Fixed(SpinProjection::ZERO)),
                ProbeFamily::Noon { zeta: 0.0 },
            ],
            &[5, 6],
            &[PI / 2.0, PI],
            &[0.5],
            &q,
        );
        assert_eq!(rows.len(), 8);
        assert!(matches!(rows[0].outcome, Err(Error::InvalidM { .. })));
        assert!(matches!(rows[1].outcome, Err(Error::InvalidM { .. })));
        assert!(rows[2].outcome.is_ok());
        assert_eq!(rows[4].cell.family, ProbeFamily::Noon { zeta: 0.0 });
        assert_eq!((rows[7].cell.photons, rows[7].cell.chi), (6, PI));
        let direct = disting(&DistinguishabilityQuery::new(
            make_noon(spin(6), 0.0).unwrap(),
            PI,
            0.5,
        ))
        .unwrap();
        assert_eq!(rows[7].outcome.as_ref().unwrap(), &direct);
    }

    #[test]
    fn fig2_grid_shape() {
        let g = Fig2Grid::default();
        assert_eq!(
            g.families.len() * g.photons.len() * g.chis.len() * g.deltas.len(),
            4 * 46 * 6
        );
    }

    #[test]
    fn samplers_match_trajectory() {
        let j = spin(4);
        let mut v = DVector::zeros(5);
        v[0] = Complex64::new(0.6, 0.0);
        v[3] = Complex64::new(0.0, 0.8);
        let e = RotationEngine::new(j);
        let probes = [
            SpinState::new(j, v).unwrap(),
            make_phase_state(j, 0.4).unwrap(),
            make_fock_z(j, j.lowest()).unwrap(),
        ];
        for probe in probes {
            let sampler = Sampler::new(Some(&e), &probe).unwrap();
            let t = Trajectory::new(&e, &probe).unwrap();
            for theta in [0.2, 1.9, 3.0, -4.0] {
                let full = sampler.probs(theta);
                let b: Vec<f64> = t.amplitudes(theta).iter().map(|x| x.norm_sqr()).collect();
                for m in 0..5 {
                    assert!((full[m] - b[m]).abs() < 1e-13);
                    assert!((sampler.prob(m, theta) - b[m]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn adaptive_agrees_with_fine_fixed_rule() {
        // Every p_m stays above 1e-3 on this window, so the fixed rule converges
        // exponentially there.
        for probe in [
            make_phase_state(spin(9), 0.2).unwrap(),
            make_fock_z(spin(9), spin(9).highest()).unwrap(),
        ] {
            let q = query(probe, 0.83, 0.06);
            let fine =
                disting(&q.clone().with_quadrature(
                    QuadratureSpec::new(64, QuadratureRule::GaussLegendre).unwrap(),
                ));
            let a = disting(&q).unwrap();
            let fine = fine.unwrap().value;
            assert!(
                (a.value - fine).abs() < 1e-10 * fine,
                "{} {}",
                a.value,
                fine
            );
        }
    }

    #[test]
    fn fock_m0_full_period_is_chi_independent() {
        // p_m(theta) of |j,0> depends on cos(theta) only, so a width-pi window covers a full period.
        let j = spin(16);
        let probe = make_fock_z(j, SpinProjection::ZERO).unwrap();
        let vals: Vec<f64> = [PI / 2.0, 0.75 * PI, PI]
            .iter()
            .map(|&chi| disting(&query(probe.clone(), chi, PI)).unwrap().value)
            .collect();
        assert!(
            (vals[0] - vals[1]).abs() < 1e-9 * vals[0]
                && (vals[0] - vals[2]).abs() < 1e-9 * vals[0],
            "{vals:?}"
        );
    }
}
