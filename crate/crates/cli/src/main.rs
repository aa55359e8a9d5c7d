//! `stdmap`: breakdown thresholds of invariant circles of the standard map.
//!
//! Exit codes: 0 success, 1 domain error (machine-readable JSON on
//! stderr), 2 argument/parse error (clap's default).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stdmap::jobs::{self, Command as Job, FitModelSpec, JobSpec};
use stdmap::scaling::ValueKind;

#[derive(Parser)]
#[command(
    name = "stdmap",
    about = "Critical function, Lindstedt radius and Bryuno-function scaling for the standard map",
    long_about = "Computes breakdown thresholds of invariant circles of the standard map: \
                  the critical function eps_c(omega) via Greene's residue criterion, the \
                  Lindstedt-series radius of convergence via Pade approximants and a heuristic \
                  resonance formula, Bryuno function values, running slopes and scaling fits.\n\n\
                  Rotation numbers use bracket notation with a parenthesized periodic tail: \
                  \"[(1)]\" is the golden mean, \"[2,500,(1)]\" is 1/(2+1/(500+golden)); the \
                  alias \"1^inf\" for \"(1)\" is accepted. Family descriptors replace one \
                  partial quotient with `n`, e.g. \"[n,(1)]\"."
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,

    /// Write the primary output to this path (directory for `reproduce`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Cache directory for orbits, residues and resumable bisections
    /// (overridden by KAM_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Worker threads for independent rows/jobs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct OmegaArg {
    /// Rotation number in bracket notation, e.g. "[(1)]" or "[2,500,(1)]".
    #[arg(long)]
    omega: String,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Bryuno function B(omega).
    Bryuno {
        #[command(flatten)]
        omega: OmegaArg,
        /// Working precision in decimal digits.
        #[arg(long, default_value_t = 40)]
        digits: u32,
    },
    /// Periodic orbit of rotation number p/q at the given eps.
    Orbit {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 38)]
        digits: u32,
    },
    /// Greene residue of the p/q orbit, precision escalated automatically.
    Residue {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        epsilon: String,
        /// Highest precision tier allowed.
        #[arg(long, default_value_t = 600)]
        max_digits: u32,
    },
    /// Critical function eps_c(omega) by residue-criterion bisection.
    Critical {
        #[command(flatten)]
        omega: OmegaArg,
        /// Decimal digits of the reported value (bracket width 10^-target).
        #[arg(long, default_value_t = 4)]
        target_digits: u32,
        /// Convergents used per classification (escalated when undecided).
        #[arg(long, default_value_t = 12)]
        k_max: usize,
        /// Skip orbits with denominators above this.
        #[arg(long)]
        max_q: Option<u64>,
        #[arg(long, default_value_t = 600)]
        max_digits: u32,
        /// Upper end of the initial bisection bracket (default 2).
        #[arg(long)]
        eps_hi: Option<String>,
    },
    /// Lindstedt series coefficients (CSV of k, nu, s_nu).
    Lindstedt {
        #[command(flatten)]
        omega: OmegaArg,
        /// Highest order K of the expansion.
        #[arg(long, default_value_t = 40)]
        order: usize,
        #[arg(long, default_value_t = 60)]
        digits: u32,
    },
    /// Pade poles of the Lindstedt series and the radius estimate rho_P.
    Pade {
        #[command(flatten)]
        omega: OmegaArg,
        /// Diagonal order N of the [N/N] approximant.
        #[arg(long, default_value_t = 80)]
        order: usize,
        #[arg(long, default_value_t = 150)]
        digits: u32,
        /// Evaluation angle of the series.
        #[arg(long, default_value = "1")]
        alpha: String,
        /// Keep only poles within this angle (radians) of --direction.
        #[arg(long)]
        direction: Option<f64>,
        #[arg(long, default_value_t = 0.3)]
        direction_tol: f64,
        /// Cross-check the radius against order N+10 and warn above 1%.
        #[arg(long)]
        check_stability: bool,
    },
    /// Heuristic near-resonance radius rho_1(omega).
    Rho1 {
        #[command(flatten)]
        omega: OmegaArg,
        #[arg(long, default_value_t = 50)]
        digits: u32,
    },
    /// Running slopes A_k from a dataset CSV (omega_bracket,value).
    Slopes {
        #[arg(long)]
        input: PathBuf,
        /// Interpret values as eps_c or rho.
        #[arg(long, default_value = "eps-c")]
        kind: String,
    },
    /// Fit -log(value) against B(omega) with the chosen model.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "eps-c")]
        kind: String,
        /// linear | exp-correction | b-plus-cb
        #[arg(long, default_value = "exp-correction")]
        model: String,
        /// Fix the correction exponent instead of searching.
        #[arg(long)]
        exponent: Option<f64>,
        /// Resonance denominator for the b-plus-cb correction.
        #[arg(long, default_value_t = 3)]
        resonance_q: u32,
    },
    /// Recompute a published table or figure at a budget tier.
    Reproduce {
        /// T1..T13, F1..F3.
        #[arg(long)]
        table: String,
        /// desk | lab | paper.
        #[arg(long, default_value = "desk")]
        tier: String,
    },
}

fn parse_kind(s: &str) -> Result<ValueKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "eps-c" | "eps_c" | "epsc" => Ok(ValueKind::EpsC),
        "rho" => Ok(ValueKind::Rho),
        other => Err(format!("unknown value kind `{other}` (expected eps-c or rho)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match build_job(&cli.command) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    let cache_dir = std::env::var_os("KAM_CACHE_DIR")
        .map(PathBuf::from)
        .or(cli.cache_dir);
    let spec = JobSpec { command, output: cli.output, cache_dir, workers: cli.jobs };
    match jobs::run(&spec) {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(1)
        }
    }
}

fn build_job(cmd: &CliCommand) -> Result<Job, String> {
    Ok(match cmd {
        CliCommand::Bryuno { omega, digits } => {
            Job::Bryuno { omega: omega.omega.clone(), digits: *digits }
        }
        CliCommand::Orbit { p, q, epsilon, digits } => {
            Job::Orbit { p: *p, q: *q, epsilon: epsilon.clone(), digits: *digits }
        }
        CliCommand::Residue { p, q, epsilon, max_digits } => {
            Job::Residue { p: *p, q: *q, epsilon: epsilon.clone(), max_digits: *max_digits }
        }
        CliCommand::Critical { omega, target_digits, k_max, max_q, max_digits, eps_hi } => {
            Job::Critical {
                omega: omega.omega.clone(),
                target_digits: *target_digits,
                k_max: *k_max,
                max_q: *max_q,
                max_digits: *max_digits,
                eps_hi: eps_hi.clone(),
            }
        }
        CliCommand::Lindstedt { omega, order, digits } => {
            Job::Lindstedt { omega: omega.omega.clone(), order: *order, digits: *digits }
        }
        CliCommand::Pade {
            omega,
            order,
            digits,
            alpha,
            direction,
            direction_tol,
            check_stability,
        } => Job::Pade {
            omega: omega.omega.clone(),
            order: *order,
            digits: *digits,
            alpha: alpha.clone(),
            direction: direction.map(|angle| (angle, *direction_tol)),
            check_stability: *check_stability,
        },
        CliCommand::Rho1 { omega, digits } => {
            Job::Rho1 { omega: omega.omega.clone(), digits: *digits }
        }
        CliCommand::Slopes { input, kind } => {
            Job::Slopes { input: input.clone(), kind: parse_kind(kind)? }
        }
        CliCommand::Fit { input, kind, model, exponent, resonance_q } => {
            let model = match model.to_ascii_lowercase().as_str() {
                "linear" => FitModelSpec::Linear,
                "exp-correction" | "exp" => FitModelSpec::ExpCorrection { exponent: *exponent },
                "b-plus-cb" | "bpluscb" => FitModelSpec::BPlusCb { q: *resonance_q },
                other => return Err(format!("unknown model `{other}`")),
            };
            Job::Fit { input: input.clone(), kind: parse_kind(kind)?, model }
        }
        CliCommand::Reproduce { table, tier } => {
            Job::Reproduce { target: table.clone(), tier: tier.clone() }
        }
    })
}
