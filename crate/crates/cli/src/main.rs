//! `mzdist`: Fisher information, distinguishability sweeps and estimation
//! experiments for an n-photon Mach-Zehnder interferometer.

mod commands;
mod parse;
mod table;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mzdist_core::{QuadratureRule, TypicalityRule};

use parse::{FamilyDefaults, FamilyToken};
use table::{Format, Table};

pub const OUT_DIR_ENV: &str = "MZDIST_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "mzdist",
    version,
    about = "Phase-estimation numerics for an n-photon Mach-Zehnder interferometer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output file; overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Directory receiving `<command>.<format>` when --out is absent. Without
    /// either, the table goes to stdout.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fisher information by both routes and the closed form.
    Fisher {
        #[command(flatten)]
        probe: ProbeArgs,
        /// Photon number.
        #[arg(long)]
        n: u32,
        /// Comma-separated phases.
        #[arg(long, value_parser = parse::angle, value_delimiter = ',', default_value = "0")]
        theta: Vec<f64>,
    },
    /// Distinguishability of one window, with its local approximation.
    Disting {
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long)]
        n: u32,
        /// Window centre.
        #[arg(long, value_parser = parse::angle)]
        chi: f64,
        /// Window width, in (0, 2pi).
        #[arg(long, value_parser = parse::angle)]
        delta: f64,
        #[command(flatten)]
        quadrature: QuadratureArgs,
    },
    /// Scatter table over families, photon numbers, centres and widths.
    Fig2 {
        /// Repeatable; `noon[:zeta]`, `fockz[:m]`, `phase[:gamma]`.
        #[arg(long = "family", value_parser = parse::family_token,
              default_values = ["noon:0", "fockz:0", "fockz:+j", "phase:0.5pi"])]
        families: Vec<FamilyToken>,
        #[arg(long, value_parser = parse::angle)]
        zeta: Option<f64>,
        #[arg(long, value_parser = parse::angle)]
        gamma: Option<f64>,
        #[arg(long)]
        m: Option<String>,
        /// Photon numbers: `5..50`, `10` or `6,8,10`.
        #[arg(long = "n", value_parser = parse::photons, default_value = "5..50")]
        photons: parse::Photons,
        #[arg(long, value_parser = parse::angle, value_delimiter = ',', default_value = "0.5pi,0.75pi,pi")]
        chi: Vec<f64>,
        #[arg(long, value_parser = parse::angle, value_delimiter = ',', default_value = "1e-3,pi")]
        delta: Vec<f64>,
        #[command(flatten)]
        quadrature: QuadratureArgs,
    },
    /// Monte Carlo mean-squared error of grid maximum likelihood against the Cramer-Rao bound.
    Estimate {
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long, default_value_t = 10)]
        n: u32,
        /// True phase.
        #[arg(long, value_parser = parse::angle, default_value = "1.0")]
        theta: f64,
        /// Prior window `CENTER,WIDTH`; defaults to width 0.6 centred on --theta.
        #[arg(long, value_parser = parse::window)]
        window: Option<(f64, f64)>,
        #[arg(long, default_value_t = 100)]
        k: u64,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1201)]
        grid_points: usize,
    },
    /// Misidentification rate of data from P(theta2) as typical of P(theta1).
    Misid {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TypicalityArg::TypeClass)]
        rule: TypicalityArg,
    },
    /// Type-class bounds 2^{-kS} and 2^{-kS}/(k+1)^{2j+1}.
    Bounds {
        #[command(flatten)]
        pair: PairArgs,
    },
}

#[derive(Args, Debug)]
struct ProbeArgs {
    /// `noon`, `fockz` or `phase`, optionally with an inline parameter (`fockz:0`).
    #[arg(long, value_parser = parse::family_token, default_value = "noon")]
    family: FamilyToken,
    /// Fock level: a projection (`0`, `1/2`, `-3`) or `+j` / `-j`.
    #[arg(long)]
    m: Option<String>,
    #[arg(long, value_parser = parse::angle)]
    zeta: Option<f64>,
    #[arg(long, value_parser = parse::angle)]
    gamma: Option<f64>,
}

impl ProbeArgs {
    fn family(&self) -> Result<mzdist_core::ProbeFamily, CliError> {
        let defaults = FamilyDefaults {
            m: self.m.clone(),
            zeta: self.zeta,
            gamma: self.gamma,
        };
        self.family.resolve(&defaults).map_err(CliError::Argument)
    }
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long, value_parser = parse::family_token, default_value = "fockz:+j")]
    family: FamilyToken,
    #[arg(long)]
    m: Option<String>,
    #[arg(long, value_parser = parse::angle)]
    zeta: Option<f64>,
    #[arg(long, value_parser = parse::angle)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// `THETA1,THETA2`: P1 = P(theta1), P2 = P(theta2).
    #[arg(long, value_parser = parse::angle, value_delimiter = ',', default_value = "0.5pi,pi/3")]
    theta: Vec<f64>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "10,20,40,100,200,400")]
    k: Vec<u64>,
}

#[derive(Args, Debug)]
struct QuadratureArgs {
    /// Base nodes per axis (default max(48, ceil(12 n Delta / pi))).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, value_enum, default_value_t = QuadratureArg::Adaptive)]
    rule: QuadratureArg,
    /// Relative error target of the adaptive rule.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QuadratureArg {
    Adaptive,
    GaussLegendre,
    Trapezoid,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TypicalityArg {
    TypeClass,
    NearestNeighbor,
}

impl From<TypicalityArg> for TypicalityRule {
    fn from(r: TypicalityArg) -> Self {
        match r {
            TypicalityArg::TypeClass => TypicalityRule::TypeClass,
            TypicalityArg::NearestNeighbor => TypicalityRule::NearestNeighbor,
        }
    }
}

impl From<QuadratureArg> for QuadratureRule {
    fn from(r: QuadratureArg) -> Self {
        match r {
            QuadratureArg::Adaptive => QuadratureRule::AdaptiveKronrod,
            QuadratureArg::GaussLegendre => QuadratureRule::GaussLegendre,
            QuadratureArg::Trapezoid => QuadratureRule::Trapezoid,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Argument(String),
    Io(String),
}

impl From<mzdist_core::Error> for CliError {
    fn from(e: mzdist_core::Error) -> Self {
        CliError::Argument(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Argument(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

fn build(command: &Command) -> Result<(&'static str, Table), CliError> {
    Ok(match command {
        Command::Fisher { probe, n, theta } => {
            ("fisher", commands::fisher(probe.family()?, *n, theta)?)
        }
        Command::Disting {
            probe,
            n,
            chi,
            delta,
            quadrature,
        } => (
            "disting",
            commands::disting(probe.family()?, *n, *chi, *delta, &quadrature.to_override())?,
        ),
        Command::Fig2 {
            families,
            zeta,
            gamma,
            m,
            photons,
            chi,
            delta,
            quadrature,
        } => {
            let defaults = FamilyDefaults {
                m: m.clone(),
                zeta: *zeta,
                gamma: *gamma,
            };
            let families = families
                .iter()
                .map(|f| f.resolve(&defaults))
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::Argument)?;
            let grid = mzdist_core::Fig2Grid {
                families,
                photons: photons.0.clone(),
                chis: chi.clone(),
                deltas: delta.clone(),
            };
            ("fig2", commands::fig2(&grid, &quadrature.to_override()))
        }
        Command::Estimate {
            probe,
            n,
            theta,
            window,
            k,
            trials,
            seed,
            grid_points,
        } => {
            let (center, width) = window.unwrap_or((*theta, 0.6));
            let spec = commands::EstimateSpec {
                family: probe.family()?,
                photons: *n,
                theta_true: *theta,
                center,
                width,
                k: *k,
                trials: *trials,
                seed: *seed,
                grid_points: *grid_points,
            };
            ("estimate", commands::estimate(&spec)?)
        }
        Command::Misid {
            pair,
            trials,
            seed,
            rule,
        } => {
            let (p1, p2) = pair.distributions()?;
            (
                "misid",
                commands::misid(&p1, &p2, &pair.k, *trials, *seed, (*rule).into())?,
            )
        }
        Command::Bounds { pair } => {
            let (p1, p2) = pair.distributions()?;
            ("bounds", commands::bounds(&p1, &p2, &pair.k)?)
        }
    })
}

impl QuadratureArgs {
    fn to_override(&self) -> mzdist_core::QuadratureOverride {
        mzdist_core::QuadratureOverride {
            nodes_per_axis: self.nodes,
            rule: self.rule.into(),
            tolerance: self.tolerance,
        }
    }
}

impl PairArgs {
    fn distributions(
        &self,
    ) -> Result<
        (
            mzdist_core::MeasurementDistribution,
            mzdist_core::MeasurementDistribution,
        ),
        CliError,
    > {
        let [t1, t2] = self.theta[..] else {
            return Err(CliError::Argument(format!(
                "--theta needs exactly two phases, got {}",
                self.theta.len()
            )));
        };
        let defaults = FamilyDefaults {
            m: self.m.clone(),
            zeta: self.zeta,
            gamma: self.gamma,
        };
        let family = self.family.resolve(&defaults).map_err(CliError::Argument)?;
        Ok(commands::distribution_pair(family, self.n, t1, t2)?)
    }
}

fn emit(cli: &Cli, name: &str, table: &Table) -> Result<(), CliError> {
    let io_err = |path: &PathBuf, e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let path = match (&cli.out, &cli.out_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            Some(dir.join(format!("{name}.{}", cli.format.extension())))
        }
        (None, None) => None,
    };
    match path {
        Some(p) => {
            let file = File::create(&p).map_err(|e| io_err(&p, e))?;
            let mut w = BufWriter::new(file);
            table.write(cli.format, &mut w).map_err(|e| io_err(&p, e))?;
            w.flush().map_err(|e| io_err(&p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table
                .write(cli.format, &mut lock)
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = build(&cli.command).and_then(|(name, table)| emit(&cli, name, &table));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Argument(msg) | CliError::Io(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
