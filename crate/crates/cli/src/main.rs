//! `acs`: run the numerical experiments and write their reports.
//!
//! Exit codes: 0 success, 1 an invariant was violated, 2 bad configuration,
//! 3 a numerical module failed.

mod config;
mod experiments;

use clap::{Args, Parser, Subcommand};
use config::{parse_schedule, parse_signs, ConfigError, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

// Aliases keep clap from treating a parsed list as a repeated argument.
type Schedule = Vec<f64>;
type Signs = Vec<i8>;

#[derive(Parser)]
#[command(name = "acs", version, about = "Almost complex structures: reductions, energies and Nijenhuis tensors")]
struct Cli {
    /// Print the available experiments and exit.
    #[arg(long)]
    list: bool,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML file with experiment parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated lambda values.
    #[arg(long, global = true, value_parser = parse_schedule)]
    lambda_schedule: Option<Schedule>,
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    coupling: Option<f64>,
    /// Directory for reports (default `reports`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fiber Fourier modes of e^z + e^v on the Hopf bundle and their collapse.
    HopfReduce,
    /// Decay of an SU(3) coefficient as the fiber shrinks.
    DecayScan {
        /// Irrep label such as `su3:1,0`.
        #[arg(long)]
        irrep: Option<String>,
    },
    /// Horizontal vacuum integrand on G2 under the squashed metric.
    G2Check {
        /// Six root signs, e.g. `-1,-1,-1,-1,-1,-1`.
        #[arg(long, value_parser = parse_signs, allow_hyphen_values = true)]
        signs: Option<Signs>,
    },
    /// Spectrum and fiber-volume scaling of the squashed metric.
    SquashedSpectrum,
    /// Weak-energy descent on a flat torus.
    Minimize {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        max_iterations: Option<usize>,
    },
    /// Nijenhuis tensor of a Samelson structure or of the Cayley structure.
    Nijenhuis {
        /// `cayley` or a Lie algebra name (su2, su3, g2, ...).
        #[arg(long)]
        target: Option<String>,
        #[arg(long, value_parser = parse_signs, allow_hyphen_values = true)]
        signs: Option<Signs>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::HopfReduce => "hopf-reduce",
            Command::DecayScan { .. } => "decay-scan",
            Command::G2Check { .. } => "g2-check",
            Command::SquashedSpectrum => "squashed-spectrum",
            Command::Minimize { .. } => "minimize",
            Command::Nijenhuis { .. } => "nijenhuis",
        }
    }
}

fn flags(common: &Common, cmd: &Command) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        experiment: Some(cmd.name().into()),
        lambda_schedule: common.lambda_schedule.clone(),
        resolution: common.resolution,
        tolerance: common.tolerance,
        coupling: common.coupling,
        seed: common.seed,
        output_dir: common.out.clone(),
        ..Default::default()
    };
    match cmd {
        Command::DecayScan { irrep } => c.irreps = irrep.clone().map(|s| vec![s]),
        Command::G2Check { signs } => c.signs = signs.clone(),
        Command::Minimize { dim, max_iterations } => {
            c.dim = *dim;
            c.max_iterations = *max_iterations;
        }
        Command::Nijenhuis { target, signs } => {
            c.algebra = target.clone();
            c.signs = signs.clone();
        }
        Command::HopfReduce | Command::SquashedSpectrum => {}
    }
    c
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.list {
        for (name, what) in experiments::EXPERIMENTS {
            println!("{name:<18} {what}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let Some(cmd) = cli.command else {
        eprintln!("no experiment given; use --list to see them");
        return Ok(ExitCode::from(2));
    };
    let file = match &cli.common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = &file.experiment {
        if name != cmd.name() {
            return Err(ConfigError::Invalid(format!("config is for `{name}`, not `{}`", cmd.name())).into());
        }
    }
    let cfg = file.merged(flags(&cli.common, &cmd));
    let outcome = match cmd {
        Command::HopfReduce => experiments::hopf_reduce(&cfg)?,
        Command::DecayScan { .. } => experiments::decay(&cfg)?,
        Command::G2Check { .. } => experiments::g2_check(&cfg)?,
        Command::SquashedSpectrum => experiments::squashed_spectrum(&cfg)?,
        Command::Minimize { .. } => experiments::minimize(&cfg)?,
        Command::Nijenhuis { .. } => experiments::nijenhuis(&cfg)?,
    };
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    if outcome.violations.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for v in &outcome.violations {
        eprintln!("violated: {v}");
    }
    Ok(ExitCode::from(1))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.downcast_ref::<ConfigError>().is_some()) || is_coupling_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

/// The energy module rejects e = 0 itself; that is still a configuration error.
fn is_coupling_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| matches!(c.downcast_ref::<acs_core::energy_theory::EnergyError>(), Some(acs_core::energy_theory::EnergyError::ZeroCoupling)))
}
