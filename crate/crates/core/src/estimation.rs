//! Seeded Monte Carlo experiments: photon-counting samples, grid maximum
//! likelihood, empirical mean-squared error against the Cramer-Rao bound,
//! and empirical misidentification rates against the type-class bounds.
//!
//! Every random stream is a ChaCha8 generator seeded from a `u64`; trial `t`
//! of an experiment uses stream `t` of that seed, so results do not depend on
//! how trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{cramer_rao_bound, fisher_prob_derivative};
use crate::info::{
    distribution, kl_bits, type_bounds, MeasurementDistribution, TypeBounds, PROBABILITY_FLOOR,
};
use crate::numerics::ln_binomial;
use crate::rotation::RotationEngine;
use crate::spin::{SpinJ, SpinProjection, SpinState};

/// Log-likelihoods within this relative distance of the maximum are ties.
const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Prior window `[center - width/2, center + width/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseWindow {
    pub center: f64,
    pub width: f64,
}

impl PhaseWindow {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !(width > 0.0 && width <= 2.0 * std::f64::consts::PI) {
            return Err(Error::InvalidArgument(format!(
                "window ({center}, {width}) needs a width in (0, 2pi]"
            )));
        }
        Ok(Self { center, width })
    }

    pub fn lower(&self) -> f64 {
        self.center - self.width / 2.0
    }

    pub fn upper(&self) -> f64 {
        self.center + self.width / 2.0
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lower() && theta <= self.upper()
    }

    /// `points` equally spaced phases including both ends.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let lo = self.lower();
        let step = self.width / (points - 1) as f64;
        (0..points)
            .map(|i| {
                if i == points - 1 {
                    self.upper()
                } else {
                    lo + step * i as f64
                }
            })
            .collect()
    }
}

/// `k` photon-counting outcomes drawn at `theta_true`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub spin: SpinJ,
    pub theta_true: f64,
    pub outcomes: Vec<SpinProjection>,
    pub seed: u64,
}

impl SampleRecord {
    pub fn k(&self) -> usize {
        self.outcomes.len()
    }

    /// Occurrences of each outcome, ordered `m = -j..=j`.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0; self.spin.dim()];
        for m in &self.outcomes {
            let idx = self
                .spin
                .index_of(*m)
                .expect("outcomes are projections of the record's spin");
            counts[idx] += 1;
        }
        counts
    }
}

/// Inverse-CDF sampler over outcome indices.
struct OutcomeSampler {
    cumulative: Vec<f64>,
}

impl OutcomeSampler {
    fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty distribution");
        let u = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|c| *c <= u)
            .min(self.cumulative.len() - 1)
    }

    fn counts(&self, k: u64, rng: &mut impl Rng) -> Vec<u64> {
        let mut counts = vec![0; self.cumulative.len()];
        for _ in 0..k {
            counts[self.draw(rng)] += 1;
        }
        counts
    }
}

/// Draws `k` independent outcomes of `J_z` after the interferometer at `theta`.
pub fn sample_outcomes(probe: &SpinState, theta: f64, k: usize, seed: u64) -> Result<SampleRecord> {
    sample_outcomes_with_engine(&RotationEngine::new(probe.spin()), probe, theta, k, seed)
}

pub fn sample_outcomes_with_engine(
    engine: &RotationEngine,
    probe: &SpinState,
    theta: f64,
    k: usize,
    seed: u64,
) -> Result<SampleRecord> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "sample size k must be at least 1".into(),
        ));
    }
    let j = probe.spin();
    let dist = distribution(&engine.evolve(probe, theta)?);
    let sampler = OutcomeSampler::new(dist.probs());
    let mut rng = rng_for(seed, 0);
    let outcomes = (0..k)
        .map(|_| j.projection_at(sampler.draw(&mut rng)))
        .collect();
    Ok(SampleRecord {
        spin: j,
        theta_true: theta,
        outcomes,
        seed,
    })
}

/// `log p_m(theta)` tabulated on a window grid, with `p` clamped at the floor.
#[derive(Clone, Debug)]
pub struct LikelihoodGrid {
    window: PhaseWindow,
    thetas: Vec<f64>,
    log_probs: Vec<Vec<f64>>,
}

impl LikelihoodGrid {
    pub fn new(
        engine: &RotationEngine,
        probe: &SpinState,
        window: PhaseWindow,
        grid_points: usize,
    ) -> Result<Self> {
        if grid_points < 3 {
            return Err(Error::InvalidArgument(format!(
                "grid_points = {grid_points} must be at least 3"
            )));
        }
        let thetas = window.grid(grid_points);
        let log_probs = thetas
            .iter()
            .map(|&t| {
                let dist = distribution(&engine.evolve(probe, t)?);
                Ok(dist
                    .probs()
                    .iter()
                    .map(|p| p.max(PROBABILITY_FLOOR).ln())
                    .collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Self {
            window,
            thetas,
            log_probs,
        })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Grid phase maximising `sum_m counts_m log p_m(theta)`. Near-equal maxima
    /// resolve to the point nearest the window centre, then to the lower phase.
    pub fn argmax(&self, counts: &[u64]) -> Result<f64> {
        let ll: Vec<f64> = self
            .log_probs
            .iter()
            .map(|row| {
                row.iter()
                    .zip(counts)
                    .filter(|(_, c)| **c > 0)
                    .map(|(l, c)| *c as f64 * l)
                    .sum()
            })
            .collect();
        let best = ll
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            return Err(Error::DegenerateLikelihood);
        }
        let slack = TIE_TOLERANCE * best.abs().max(1.0);
        let centre = self.window.center;
        let mut chosen: Option<usize> = None;
        for (i, v) in ll.iter().enumerate() {
            if !(v.is_finite() && *v >= best - slack) {
                continue;
            }
            chosen = match chosen {
                Some(c) if (self.thetas[c] - centre).abs() <= (self.thetas[i] - centre).abs() => {
                    Some(c)
                }
                _ => Some(i),
            };
        }
        Ok(self.thetas[chosen.expect("best is attained")])
    }
}

/// Maximum-likelihood phase on a `grid_points` grid over `window`.
pub fn mle_grid(
    record: &SampleRecord,
    probe: &SpinState,
    window: PhaseWindow,
    grid_points: usize,
) -> Result<f64> {
    crate::spin::check_dim(probe.dim(), record.spin.dim())?;
    let grid = LikelihoodGrid::new(
        &RotationEngine::new(probe.spin()),
        probe,
        window,
        grid_points,
    )?;
    grid.argmax(&record.counts())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationRun {
    pub window: PhaseWindow,
    pub grid_points: usize,
    pub theta_true: f64,
    pub k: u64,
    pub trials: usize,
    pub seed: u64,
    pub estimates: Vec<f64>,
    /// Mean of `(phi_e - theta_true)^2`.
    pub empirical_mse: f64,
    /// Standard error of `empirical_mse` over trials.
    pub mse_standard_error: f64,
    /// Fisher information at `theta_true`.
    pub fisher: f64,
    /// `1 / (k J(theta_true))`.
    pub crb: f64,
}

impl EstimationRun {
    pub fn ratio(&self) -> f64 {
        self.empirical_mse / self.crb
    }
}

/// Runs `trials` independent sample-then-estimate pipelines at `theta_true`.
pub fn mse_experiment(
    probe: &SpinState,
    theta_true: f64,
    window: PhaseWindow,
    k: u64,
    trials: usize,
    seed: u64,
    grid_points: usize,
) -> Result<EstimationRun> {
    if !window.contains(theta_true) {
        return Err(Error::InvalidArgument(format!(
            "theta_true = {theta_true} lies outside the window [{}, {}]",
            window.lower(),
            window.upper()
        )));
    }
    if k == 0 || trials == 0 {
        return Err(Error::InvalidArgument(
            "k and trials must be at least 1".into(),
        ));
    }
    let engine = RotationEngine::new(probe.spin());
    let fisher = fisher_prob_derivative(&engine, probe, theta_true)?;
    let crb = cramer_rao_bound(&fisher, k)?;
    let grid = LikelihoodGrid::new(&engine, probe, window, grid_points)?;
    let sampler = OutcomeSampler::new(distribution(&engine.evolve(probe, theta_true)?).probs());
    let estimates = (0..trials as u64)
        .into_par_iter()
        .map(|t| grid.argmax(&sampler.counts(k, &mut rng_for(seed, t))))
        .collect::<Result<Vec<f64>>>()?;
    let squared: Vec<f64> = estimates.iter().map(|e| (e - theta_true).powi(2)).collect();
    let n = squared.len() as f64;
    let empirical_mse = squared.iter().sum::<f64>() / n;
    let variance = if squared.len() > 1 {
        squared
            .iter()
            .map(|s| (s - empirical_mse).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    Ok(EstimationRun {
        window,
        grid_points,
        theta_true,
        k,
        trials,
        seed,
        estimates,
        empirical_mse,
        mse_standard_error: (variance / n).sqrt(),
        fisher: fisher.value,
        crb,
    })
}

/// How a dataset drawn from `P2` is judged "typical of `P1`".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypicalityRule {
    /// The empirical counts equal the largest-remainder rounding of `k P1`,
    /// i.e. the dataset lies in the type class of `P1`.
    #[default]
    TypeClass,
    /// `S[Q || P1] < S[Q || P2]` for the empirical type `Q` (strict).
    NearestNeighbor,
}

/// Integer counts summing to `k` closest to `k p`: floors, then the leftover
/// units to the largest fractional parts (lower index first on ties).
pub fn largest_remainder_counts(p: &[f64], k: u64) -> Vec<u64> {
    let scaled: Vec<f64> = p.iter().map(|x| x * k as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(k.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

struct Classifier<'a> {
    rule: TypicalityRule,
    p1: &'a [f64],
    p2: &'a [f64],
    target: Vec<u64>,
}

impl<'a> Classifier<'a> {
    fn new(rule: TypicalityRule, p1: &'a [f64], p2: &'a [f64], k: u64) -> Self {
        Self {
            rule,
            p1,
            p2,
            target: largest_remainder_counts(p1, k),
        }
    }

    fn typical_of_p1(&self, counts: &[u64]) -> bool {
        match self.rule {
            TypicalityRule::TypeClass => counts == self.target.as_slice(),
            TypicalityRule::NearestNeighbor => {
                let k: u64 = counts.iter().sum();
                let q: Vec<f64> = counts.iter().map(|c| *c as f64 / k as f64).collect();
                kl_bits(&q, self.p1).bits < kl_bits(&q, self.p2).bits
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MisidResult {
    pub rule: TypicalityRule,
    pub k: u64,
    pub trials: u64,
    /// Datasets classified as typical of `P1`.
    pub hits: u64,
    pub p_empirical: f64,
    /// Binomial standard error `sqrt(p (1 - p) / trials)` of `p_empirical`.
    pub standard_error: f64,
    pub bounds: TypeBounds,
}

/// Fraction of `trials` size-`k` datasets drawn from `P2` that look typical of `P1`.
pub fn misid_experiment(
    p1: &MeasurementDistribution,
    p2: &MeasurementDistribution,
    k: u64,
    trials: u64,
    seed: u64,
    rule: TypicalityRule,
) -> Result<MisidResult> {
    let bounds = type_bounds(p1, p2, k)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let classifier = Classifier::new(rule, p1.probs(), p2.probs(), k);
    let sampler = OutcomeSampler::new(p2.probs());
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| classifier.typical_of_p1(&sampler.counts(k, &mut rng_for(seed, t))))
        .count() as u64;
    let p = hits as f64 / trials as f64;
    Ok(MisidResult {
        rule,
        k,
        trials,
        hits,
        p_empirical: p,
        standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
        bounds,
    })
}

pub const EXACT_MISID_MAX_K: u64 = 10_000;

/// Exact probability that `k` draws from a two-outcome `P2` are classified as
/// typical of `P1`, summed over counts in log space.
pub fn exact_binary_misid(
    p1: &MeasurementDistribution,
    p2: &MeasurementDistribution,
    k: u64,
    rule: TypicalityRule,
) -> Result<f64> {
    for p in [p1, p2] {
        if p.len() != 2 {
            return Err(Error::UnsupportedDimension {
                expected: 2,
                found: p.len(),
            });
        }
    }
    if k == 0 || k > EXACT_MISID_MAX_K {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={EXACT_MISID_MAX_K}"
        )));
    }
    let classifier = Classifier::new(rule, p1.probs(), p2.probs(), k);
    let (q0, q1) = (p2.probs()[0], p2.probs()[1]);
    let mut total = 0.0;
    for c in 0..=k {
        let counts = [k - c, c];
        if !classifier.typical_of_p1(&counts) {
            continue;
        }
        total += binomial_pmf(k, c, q0, q1);
    }
    Ok(total.min(1.0))
}

/// `C(k, c) q1^c q0^(k-c)`, with `0^0 = 1`.
fn binomial_pmf(k: u64, c: u64, q0: f64, q1: f64) -> f64 {
    let term = |count: u64, q: f64| {
        if count == 0 {
            Some(0.0)
        } else if q > 0.0 {
            Some(count as f64 * q.ln())
        } else {
            None
        }
    };
    match (term(c, q1), term(k - c, q0)) {
        (Some(a), Some(b)) => (ln_binomial(k, c) + a + b).exp(),
        _ => 0.0,
    }
}
