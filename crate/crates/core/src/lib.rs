//! Spin-j model of an ideal Mach-Zehnder interferometer.
//!
//! A probe of `n` photons is a spin `j = n/2`; the interferometer rotates it
//! by `exp(i theta J_y)` and photon counting measures `J_z`. On top of that
//! model the crate computes the Fisher information of the counting
//! distribution (two independent routes plus closed forms), relative-entropy
//! distinguishability averaged over a prior phase window, and seeded Monte
//! Carlo estimation and misidentification experiments.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod disting;
pub mod error;
pub mod estimation;
pub mod fisher;
pub mod info;
mod numerics;
pub mod quadrature;
pub mod rotation;
pub mod spin;
pub mod wigner;

pub use disting::{
    disting, disting_cell, disting_pairwise, disting_sweep, disting_with_engine, local_approx,
    local_approx_with_engine, quadrature_nodes, sweep, DistinguishabilityQuery,
    DistinguishabilityResult, Fig2Grid, QuadratureOverride, QuadratureRule, QuadratureSpec,
    SweepCell, SweepRow,
};
pub use error::{Error, Result};
pub use estimation::{
    exact_binary_misid, largest_remainder_counts, misid_experiment, mle_grid, mse_experiment,
    sample_outcomes, sample_outcomes_with_engine, EstimationRun, LikelihoodGrid, MisidResult,
    PhaseWindow, SampleRecord, TypicalityRule,
};
pub use fisher::{
    closed_form_fisher, cramer_rao_bound, fisher_energy_discrepancy, fisher_prob_derivative,
    FisherMethod, FisherResult,
};
pub use info::{
    distribution, kl_divergence, noon_distribution_analytic, noon_distribution_pipeline,
    shannon_entropy, type_bounds, Divergence, MeasurementDistribution, TypeBounds,
};
pub use rotation::{RotationEngine, Trajectory};
pub use spin::{
    expectation, make_fock_z, make_generators, make_noon, make_phase_state, y_eigenbasis,
    FockLevel, Generators, OperatorMatrix, ProbeFamily, SpinJ, SpinProjection, SpinState,
};
pub use wigner::{wigner_d, wigner_d_column, wigner_d_element};
