//! Classical Fisher information of the photon-counting distribution.
//!
//! Two routes are implemented and cross-checked:
//!
//! * [`fisher_prob_derivative`] sums `(dp_m/dtheta)^2 / p_m` directly;
//! * [`fisher_energy_discrepancy`] evaluates `4(<J_y^2> - sum_m r_m^2 phidot_m^2)`,
//!   the gap between the rotational energy of the state and that of the
//!   classical point masses `r_m^2` moving with angular velocities
//!   `phidot_m = d arg(psi_m) / dtheta`.
//!
//! Fisher information uses natural logarithms (units rad^-2) while relative
//! entropies elsewhere in the crate are in bits, hence the `1/ln 2` that
//! appears when the two are compared.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotation::{RotationEngine, Trajectory};
use crate::spin::{ProbeFamily, SpinJ, SpinState};

/// Outcomes with `p_m` below this are handled by the zero-probability limit.
pub const DEGENERATE_PROBABILITY: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FisherMethod {
    ProbDerivative,
    EnergyDiscrepancy,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    /// Fisher information in rad^-2.
    pub value: f64,
    pub method: FisherMethod,
    pub theta: f64,
    /// Outcomes with `p_m < DEGENERATE_PROBABILITY` at `theta`.
    pub degenerate_terms: usize,
}

/// `J(theta) = sum_m pdot_m^2 / p_m`.
///
/// `pdot_m = 2 Re(conj(psi_m) psidot_m)`, so each term is evaluated as
/// `4 Re(conj(psi_m) psidot_m)^2 / |psi_m|^2`. Where `p_m` vanishes,
/// `p_m(theta + h) ~ |psidot_m|^2 h^2` and the term tends to `4 |psidot_m|^2`;
/// that limit is used whenever `p_m < DEGENERATE_PROBABILITY`.
pub fn fisher_prob_derivative(
    engine: &RotationEngine,
    probe: &SpinState,
    theta: f64,
) -> Result<FisherResult> {
    let traj = Trajectory::new(engine, probe)?;
    let (psi, dpsi) = traj.amplitudes_and_derivative(theta);
    let mut degenerate_terms = 0;
    let mut value = 0.0;
    for (a, da) in psi.iter().zip(dpsi.iter()) {
        let p = a.norm_sqr();
        if p < DEGENERATE_PROBABILITY {
            degenerate_terms += 1;
            value += 4.0 * da.norm_sqr();
        } else {
            let half_pdot = (a.conj() * da).re;
            value += 4.0 * half_pdot * half_pdot / p;
        }
    }
    Ok(FisherResult {
        value,
        method: FisherMethod::ProbDerivative,
        theta,
        degenerate_terms,
    })
}

/// `J(theta) = 4 (<J_y^2> - sum_m r_m^2 phidot_m^2)`.
///
/// `r_m^2 phidot_m = Im(conj(psi_m) psidot_m)`. Outcomes with
/// `r_m^2 < DEGENERATE_PROBABILITY` have no defined phase velocity; they are
/// left out of the classical sum and counted in `degenerate_terms`.
pub fn fisher_energy_discrepancy(
    engine: &RotationEngine,
    probe: &SpinState,
    theta: f64,
) -> Result<FisherResult> {
    let traj = Trajectory::new(engine, probe)?;
    let (psi, dpsi) = traj.amplitudes_and_derivative(theta);
    // <psidot|psidot> = <psi| J_y^2 |psi>
    let quantum = dpsi.norm_squared();
    let mut classical = 0.0;
    let mut degenerate_terms = 0;
    for (a, da) in psi.iter().zip(dpsi.iter()) {
        let p = a.norm_sqr();
        if p < DEGENERATE_PROBABILITY {
            degenerate_terms += 1;
            continue;
        }
        let flux = (a.conj() * da).im;
        classical += flux * flux / p;
    }
    let value = (4.0 * (quantum - classical)).max(0.0);
    Ok(FisherResult {
        value,
        method: FisherMethod::EnergyDiscrepancy,
        theta,
        degenerate_terms,
    })
}

/// Closed forms: NOON `4j^2 = n^2`; `|j, m>_z` gives `2(j(j+1) - m^2)`;
/// phase states `(4/3) j(j+1)`. All are independent of `theta`.
pub fn closed_form_fisher(family: &ProbeFamily, j: SpinJ) -> Result<FisherResult> {
    let value = match *family {
        ProbeFamily::Noon { .. } => {
            if j.two_j() == 0 {
                return Err(Error::UnsupportedFamily(
                    "NOON probe needs at least one photon".into(),
                ));
            }
            4.0 * j.j() * j.j()
        }
        ProbeFamily::FockZ(level) => {
            let m = level.resolve(j);
            if j.index_of(m).is_none() {
                return Err(Error::InvalidM {
                    j: j.to_string(),
                    m: m.to_string(),
                });
            }
            2.0 * (j.casimir() - m.value() * m.value())
        }
        ProbeFamily::PhaseState { .. } => 4.0 / 3.0 * j.casimir(),
    };
    Ok(FisherResult {
        value,
        method: FisherMethod::ClosedForm,
        theta: f64::NAN,
        degenerate_terms: 0,
    })
}

/// Mean-squared-error floor `1 / (k J)` for `k` independent measurements.
pub fn cramer_rao_bound(f: &FisherResult, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "Cramer-Rao bound needs k >= 1".into(),
        ));
    }
    if !(f.value > 1e-300) {
        return Err(Error::ZeroInformation { value: f.value });
    }
    Ok(1.0 / (k as f64 * f.value))
}
