//! Table builders for each subcommand.

use mzdist_core::{
    closed_form_fisher, disting_cell, distribution, exact_binary_misid, fisher_energy_discrepancy,
    fisher_prob_derivative, local_approx, misid_experiment, mse_experiment, type_bounds, Error,
    Fig2Grid, MeasurementDistribution, PhaseWindow, ProbeFamily, QuadratureOverride,
    RotationEngine, SpinJ, SweepCell, TypicalityRule,
};

use crate::table::{format_real, Cell, Table};
use crate::CliError;

/// Stable table label, e.g. `noon(zeta=0)`, `fockz(m=+j)`, `phase(gamma=1.57079632679)`.
pub fn family_label(f: &ProbeFamily) -> String {
    match f {
        ProbeFamily::Noon { zeta } => format!("noon(zeta={})", format_real(*zeta)),
        ProbeFamily::FockZ(level) => format!("fockz(m={level})"),
        ProbeFamily::PhaseState { gamma } => format!("phase(gamma={})", format_real(*gamma)),
    }
}

/// Variant name of a core error, used in `flag` columns.
fn flag(e: &Error) -> String {
    let text = e.to_string();
    text.split(':').next().unwrap_or(&text).to_string()
}

pub fn fisher(family: ProbeFamily, photons: u32, thetas: &[f64]) -> Result<Table, CliError> {
    let j = SpinJ::from_photons(photons)?;
    let probe = family.build(j)?;
    let engine = RotationEngine::new(j);
    let closed = closed_form_fisher(&family, j)?.value;
    let mut t = Table::new(vec![
        "family",
        "n",
        "theta",
        "fisher_prob_derivative",
        "fisher_energy",
        "fisher_closed_form",
        "max_rel_disagreement",
    ]);
    for &theta in thetas {
        let a = fisher_prob_derivative(&engine, &probe, theta)?.value;
        let b = fisher_energy_discrepancy(&engine, &probe, theta)?.value;
        let scale = closed.abs().max(f64::MIN_POSITIVE);
        let disagreement = [(a - closed).abs(), (b - closed).abs(), (a - b).abs()]
            .into_iter()
            .fold(0.0, f64::max)
            / scale;
        t.push(vec![
            Cell::text(family_label(&family)),
            photons.into(),
            theta.into(),
            a.into(),
            b.into(),
            closed.into(),
            disagreement.into(),
        ]);
    }
    Ok(t)
}

pub fn disting(
    family: ProbeFamily,
    photons: u32,
    chi: f64,
    delta: f64,
    quadrature: &QuadratureOverride,
) -> Result<Table, CliError> {
    let cell = SweepCell {
        family,
        photons,
        chi,
        delta,
    };
    let result = disting_cell(&cell, quadrature)?;
    let probe = family.build(SpinJ::from_photons(photons)?)?;
    let local = local_approx(&probe, chi, delta)?;
    let mut t = Table::new(vec![
        "family",
        "n",
        "chi",
        "delta",
        "value",
        "local_approx",
        "clamped_fraction",
        "nodes_used",
        "error_estimate",
        "flag",
    ]);
    t.push(vec![
        Cell::text(family_label(&family)),
        photons.into(),
        chi.into(),
        delta.into(),
        result.value.into(),
        local.into(),
        result.clamped_fraction.into(),
        result.nodes_used.into(),
        Cell::opt_real(result.error_estimate),
        Cell::Empty,
    ]);
    Ok(t)
}

/// Every cell of the grid in family, n, chi, Delta order; failing cells keep
/// their row with an empty value and the error name in `flag`.
pub fn fig2(grid: &Fig2Grid, quadrature: &QuadratureOverride) -> Table {
    let mut t = Table::new(vec![
        "family",
        "n",
        "chi",
        "delta",
        "value",
        "clamped_fraction",
        "nodes_used",
        "flag",
    ]);
    for row in grid.run(quadrature) {
        let c = row.cell;
        let mut cells = vec![
            Cell::text(family_label(&c.family)),
            c.photons.into(),
            c.chi.into(),
            c.delta.into(),
        ];
        match &row.outcome {
            Ok(r) => cells.extend([
                r.value.into(),
                r.clamped_fraction.into(),
                r.nodes_used.into(),
                Cell::Empty,
            ]),
            Err(e) => cells.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::text(flag(e))]),
        }
        t.push(cells);
    }
    t
}

pub struct EstimateSpec {
    pub family: ProbeFamily,
    pub photons: u32,
    pub theta_true: f64,
    pub center: f64,
    pub width: f64,
    pub k: u64,
    pub trials: usize,
    pub seed: u64,
    pub grid_points: usize,
}

pub fn estimate(s: &EstimateSpec) -> Result<Table, CliError> {
    let probe = s.family.build(SpinJ::from_photons(s.photons)?)?;
    let window = PhaseWindow::new(s.center, s.width)?;
    let run = mse_experiment(
        &probe,
        s.theta_true,
        window,
        s.k,
        s.trials,
        s.seed,
        s.grid_points,
    )?;
    let mut t = Table::new(vec![
        "family",
        "n",
        "theta_true",
        "window_center",
        "window_width",
        "grid_points",
        "k",
        "empirical_mse",
        "mse_standard_error",
        "crb",
        "ratio",
        "trials",
        "seed",
    ]);
    t.push(vec![
        Cell::text(family_label(&s.family)),
        s.photons.into(),
        s.theta_true.into(),
        s.center.into(),
        s.width.into(),
        s.grid_points.into(),
        s.k.into(),
        run.empirical_mse.into(),
        run.mse_standard_error.into(),
        run.crb.into(),
        run.ratio().into(),
        s.trials.into(),
        s.seed.into(),
    ]);
    Ok(t)
}

/// Counting distributions of `family` at two phases.
pub fn distribution_pair(
    family: ProbeFamily,
    photons: u32,
    theta1: f64,
    theta2: f64,
) -> Result<(MeasurementDistribution, MeasurementDistribution), Error> {
    let j = SpinJ::from_photons(photons)?;
    let probe = family.build(j)?;
    let engine = RotationEngine::new(j);
    Ok((
        distribution(&engine.evolve(&probe, theta1)?),
        distribution(&engine.evolve(&probe, theta2)?),
    ))
}

pub fn misid(
    p1: &MeasurementDistribution,
    p2: &MeasurementDistribution,
    ks: &[u64],
    trials: u64,
    seed: u64,
    rule: TypicalityRule,
) -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "k",
        "rule",
        "trials",
        "seed",
        "hits",
        "p_empirical",
        "standard_error",
        "p_exact",
        "divergence_bits",
        "log2_lower",
        "log2_upper",
    ]);
    for &k in ks {
        let r = misid_experiment(p1, p2, k, trials, seed, rule)?;
        let exact = if p1.len() == 2 {
            Some(exact_binary_misid(p1, p2, k, rule)?)
        } else {
            None
        };
        t.push(vec![
            k.into(),
            Cell::text(rule_label(rule)),
            trials.into(),
            seed.into(),
            r.hits.into(),
            r.p_empirical.into(),
            r.standard_error.into(),
            Cell::opt_real(exact),
            r.bounds.exponent.into(),
            r.bounds.log2_lower.into(),
            r.bounds.log2_upper.into(),
        ]);
    }
    Ok(t)
}

fn rule_label(rule: TypicalityRule) -> &'static str {
    match rule {
        TypicalityRule::TypeClass => "type-class",
        TypicalityRule::NearestNeighbor => "nearest-neighbor",
    }
}

pub fn bounds(
    p1: &MeasurementDistribution,
    p2: &MeasurementDistribution,
    ks: &[u64],
) -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "k",
        "divergence_bits",
        "log2_lower",
        "log2_upper",
        "lower",
        "upper",
        "clamped",
    ]);
    for &k in ks {
        let b = type_bounds(p1, p2, k)?;
        t.push(vec![
            k.into(),
            b.exponent.into(),
            b.log2_lower.into(),
            b.log2_upper.into(),
            b.lower.into(),
            b.upper.into(),
            Cell::text(b.clamped.to_string()),
        ]);
    }
    Ok(t)
}
