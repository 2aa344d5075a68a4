//! Photon-counting distributions, relative entropy and type-class bounds.
//!
//! Relative entropies are in bits. Two conventions keep them finite:
//! outcomes with `p1 <= ZERO_PROBABILITY` contribute nothing, and `p2` is
//! clamped from below at [`PROBABILITY_FLOOR`], with the clamp reported.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, ln_binomial};
use crate::rotation::RotationEngine;
use crate::spin::{check_dim, make_noon, SpinJ, SpinState};

/// Probabilities at or below this are structural zeros in the first argument
/// of a relative entropy.
pub const ZERO_PROBABILITY: f64 = 1e-15;

/// Lower clamp applied to the second argument of a relative entropy.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

const SUM_TOLERANCE: f64 = 1e-12;

/// `{p_m}` over the `2j+1` outcomes, ordered `m = -j..=j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDistribution {
    j: SpinJ,
    probs: Vec<f64>,
}

impl MeasurementDistribution {
    pub fn new(j: SpinJ, probs: Vec<f64>) -> Result<Self> {
        check_dim(j.dim(), probs.len())?;
        if let Some(&bad) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "probability {bad} is not a finite non-negative number"
            )));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { j, probs })
    }

    /// Infers `j` from the number of outcomes.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        let j = SpinJ::with_limit(probs.len() as u32 - 1, u32::MAX)?;
        Self::new(j, probs)
    }

    /// Skips the sum check; used for distributions computed from unit vectors.
    pub(crate) fn from_raw(j: SpinJ, probs: Vec<f64>) -> Self {
        Self { j, probs }
    }

    pub fn spin(&self) -> SpinJ {
        self.j
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `p_m = |psi_m|^2`.
pub fn distribution(state: &SpinState) -> MeasurementDistribution {
    MeasurementDistribution::from_raw(state.spin(), state.probabilities())
}

/// Closed-form output distribution of the NOON probe:
/// `p_m = C(2j, j+m) (1 + (-1)^{j+m} cos(2j(theta + pi/2) - zeta)) / 4^j`.
pub fn noon_distribution_analytic(
    j: SpinJ,
    zeta: f64,
    theta: f64,
) -> Result<MeasurementDistribution> {
    if j.two_j() < 1 {
        return Err(Error::InvalidArgument(
            "NOON distribution needs at least one photon".into(),
        ));
    }
    let n = u64::from(j.two_j());
    let fringe = (f64::from(j.two_j()) * (theta + FRAC_PI_2) - zeta).cos();
    let probs = (0..=n)
        .map(|up| {
            // up = j + m
            let weight = (ln_binomial(n, up) - n as f64 * std::f64::consts::LN_2).exp();
            let sign = if up % 2 == 0 { 1.0 } else { -1.0 };
            weight * (1.0 + sign * fringe)
        })
        .collect();
    Ok(MeasurementDistribution::from_raw(j, probs))
}

/// The NOON distribution computed by running the optical elements in order:
/// the probe is taken through the first beamsplitter `exp(-i pi/2 J_x)`,
/// then the phase shift `exp(i theta J_z)` and the second beamsplitter
/// `exp(i pi/2 J_x)` are applied before photon counting.
pub fn noon_distribution_pipeline(
    engine: &RotationEngine,
    zeta: f64,
    theta: f64,
) -> Result<MeasurementDistribution> {
    let j = engine.spin();
    let probe = make_noon(j, zeta)?;
    let inside = engine.x_rotation(-FRAC_PI_2) * probe.amplitudes();
    let shifted = DVector::from_fn(j.dim(), |k, _| {
        inside[k] * Complex64::cis(j.m_at(k) * theta)
    });
    let out = engine.x_rotation(FRAC_PI_2) * shifted;
    Ok(MeasurementDistribution::from_raw(
        j,
        out.iter().map(|a| a.norm_sqr()).collect(),
    ))
}

/// Relative entropy in bits, with a flag telling whether the floor clamp on
/// the second distribution was used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub bits: f64,
    pub clamped: bool,
}

/// `S[P1 || P2] = sum_m p1 log2(p1 / p2)`.
pub fn kl_divergence(
    p1: &MeasurementDistribution,
    p2: &MeasurementDistribution,
) -> Result<Divergence> {
    check_dim(p1.len(), p2.len())?;
    Ok(kl_bits(&p1.probs, &p2.probs))
}

pub(crate) fn kl_bits(p1: &[f64], p2: &[f64]) -> Divergence {
    let mut clamped = false;
    let terms = p1
        .iter()
        .zip(p2)
        .filter(|(a, _)| **a > ZERO_PROBABILITY)
        .map(|(&a, &b)| {
            if b < PROBABILITY_FLOOR {
                clamped = true;
            }
            a * (a / b.max(PROBABILITY_FLOOR)).log2()
        });
    let bits = compensated_sum(terms.collect::<Vec<_>>());
    Divergence {
        bits: bits.max(0.0),
        clamped,
    }
}

/// Bounds on the probability that `k` draws from `P2` produce the type of
/// `P1`: `upper = 2^{-k S}`, `lower = upper / (k+1)^{2j+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeBounds {
    pub k: u64,
    pub exponent: f64,
    pub upper: f64,
    pub lower: f64,
    pub log2_upper: f64,
    pub log2_lower: f64,
    pub clamped: bool,
}

pub fn type_bounds(
    p1: &MeasurementDistribution,
    p2: &MeasurementDistribution,
    k: u64,
) -> Result<TypeBounds> {
    if k == 0 {
        return Err(Error::InvalidArgument("type bounds need k >= 1".into()));
    }
    let div = kl_divergence(p1, p2)?;
    let log2_upper = -(k as f64) * div.bits;
    let log2_lower = log2_upper - p1.len() as f64 * ((k + 1) as f64).log2();
    Ok(TypeBounds {
        k,
        exponent: div.bits,
        upper: log2_upper.exp2(),
        lower: log2_lower.exp2(),
        log2_upper,
        log2_lower,
        clamped: div.clamped,
    })
}

/// `-sum p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy(p: &MeasurementDistribution) -> f64 {
    let h = -compensated_sum(
        p.probs
            .iter()
            .filter(|x| **x > 0.0)
            .map(|&x| x * x.log2())
            .collect::<Vec<_>>(),
    );
    h.max(0.0)
}
