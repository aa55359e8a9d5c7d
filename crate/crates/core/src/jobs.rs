//! Job layer behind the CLI: one entry point that dispatches a parsed job
//! to the owning module, writes output files, and makes long bisections
//! resumable through the cache.

use std::fs;
use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::cache::{CacheKey, DiskCache};
use crate::greene::{
    BisectionStep, Classification, CriticalEstimate, GreeneEngine, GreeneError,
};
use crate::lindstedt::{self, LindstedtError};
use crate::numerics::{NumericsError, PrecisionContext};
use crate::orbits::{self, OrbitError, PrecisionSchedule};
use crate::pade::{self, DirectionFilter, PadeError};
use crate::reproduce::{ReproduceError, Reproducer, Target, Tier};
use crate::rotation::{ContinuedFraction, RotationError};
use crate::scaling::{self, FitModel, ScalingDataset, ValueKind};

#[derive(Debug, Error)]
pub enum JobError {
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Greene(#[from] GreeneError),
    #[error(transparent)]
    Lindstedt(#[from] LindstedtError),
    #[error(transparent)]
    Pade(#[from] PadeError),
    #[error(transparent)]
    Scaling(#[from] scaling::ScalingError),
    #[error(transparent)]
    Reproduce(#[from] ReproduceError),
    #[error("io failure on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("invalid job: {0}")]
    Invalid(String),
}

impl JobError {
    /// Stable machine-readable code for the error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            JobError::Rotation(_) => "rotation",
            JobError::Numerics(_) => "numerics",
            JobError::Orbit(OrbitError::BudgetExhausted { .. }) => "budget_exhausted",
            JobError::Orbit(_) => "orbit",
            JobError::Greene(GreeneError::Inconclusive { .. }) => "inconclusive",
            JobError::Greene(_) => "greene",
            JobError::Lindstedt(_) => "lindstedt",
            JobError::Pade(_) => "pade",
            JobError::Scaling(_) => "scaling",
            JobError::Reproduce(ReproduceError::BudgetExceeded { .. }) => "budget_exceeded",
            JobError::Reproduce(_) => "reproduce",
            JobError::Io { .. } => "io",
            JobError::Invalid(_) => "invalid_job",
        }
    }

    /// The `{code, message, context}` JSON emitted on failure paths.
    pub fn to_json(&self) -> serde_json::Value {
        let context = match self {
            JobError::Reproduce(ReproduceError::BudgetExceeded { skipped, .. }) => {
                json!({ "skipped": skipped })
            }
            _ => json!({}),
        };
        json!({ "code": self.code(), "message": self.to_string(), "context": context })
    }
}

/// Fully parsed job, ready to run.
#[derive(Debug, Clone)]
pub struct JobSpec {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub enum Command {
    Bryuno { omega: String, digits: u32 },
    Orbit { p: u64, q: u64, epsilon: String, digits: u32 },
    Residue { p: u64, q: u64, epsilon: String, max_digits: u32 },
    Critical {
        omega: String,
        target_digits: u32,
        k_max: usize,
        max_q: Option<u64>,
        max_digits: u32,
        eps_hi: Option<String>,
    },
    Lindstedt { omega: String, order: usize, digits: u32 },
    Pade {
        omega: String,
        order: usize,
        digits: u32,
        alpha: String,
        direction: Option<(f64, f64)>,
        check_stability: bool,
    },
    Rho1 { omega: String, digits: u32 },
    Slopes { input: PathBuf, kind: ValueKind },
    Fit { input: PathBuf, kind: ValueKind, model: FitModelSpec },
    Reproduce { target: String, tier: String },
}

/// Model selection as it arrives from the command line.
#[derive(Debug, Clone)]
pub enum FitModelSpec {
    Linear,
    ExpCorrection { exponent: Option<f64> },
    BPlusCb { q: u32 },
}

impl FitModelSpec {
    fn to_model(&self) -> FitModel {
        match self {
            FitModelSpec::Linear => FitModel::Linear,
            FitModelSpec::ExpCorrection { exponent } => {
                FitModel::ExpCorrection { exponent: *exponent }
            }
            FitModelSpec::BPlusCb { q } => FitModel::BPlusCbCorrection { q: *q },
        }
    }
}

/// What a job produced: a one-line summary (stdout) and files written.
#[derive(Debug)]
pub struct JobOutput {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn write_output(
    path: &Option<PathBuf>,
    default_name: &str,
    contents: &str,
    files: &mut Vec<PathBuf>,
) -> Result<(), JobError> {
    let target = path.clone().unwrap_or_else(|| PathBuf::from(default_name));
    if let Some(parent) = target.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|source| JobError::Io { path: target.display().to_string(), source })?;
        }
    }
    fs::write(&target, contents)
        .map_err(|source| JobError::Io { path: target.display().to_string(), source })?;
    files.push(target);
    Ok(())
}

fn parse_omega(s: &str) -> Result<ContinuedFraction, JobError> {
    Ok(ContinuedFraction::parse(s)?)
}

fn read_input(path: &PathBuf) -> Result<String, JobError> {
    fs::read_to_string(path)
        .map_err(|source| JobError::Io { path: path.display().to_string(), source })
}

/// Serialized bisection state, persisted after every classification.
#[derive(Debug, Serialize, Deserialize)]
struct BisectionState {
    omega: String,
    target_digits: u32,
    lo: String,
    hi: String,
    k_max: usize,
    history: Vec<BisectionStep>,
}

impl BisectionState {
    fn from_estimate(est: &CriticalEstimate, target_digits: u32) -> Self {
        Self {
            omega: est.omega.to_bracket(),
            target_digits,
            lo: est.lo.to_significant(25),
            hi: est.hi.to_significant(25),
            k_max: est.k_max,
            history: est.history.clone(),
        }
    }

    fn to_estimate(&self, omega: &ContinuedFraction) -> Option<CriticalEstimate> {
        let ctx = PrecisionContext::new(38).ok()?;
        Some(CriticalEstimate {
            omega: omega.clone(),
            lo: ctx.parse(&self.lo).ok()?,
            hi: ctx.parse(&self.hi).ok()?,
            k_max: self.k_max,
            history: self.history.clone(),
        })
    }
}

/// Run a job to completion.
pub fn run(spec: &JobSpec) -> Result<JobOutput, JobError> {
    let mut files = Vec::new();
    match &spec.command {
        Command::Bryuno { omega, digits } => {
            let omega = parse_omega(omega)?;
            let ctx = PrecisionContext::new(*digits)?;
            let b = omega.bryuno(&ctx)?;
            let text = format!(
                "omega,B,digits_valid\n\"{}\",{},{}\n",
                omega.to_bracket(),
                b.value.to_significant(*digits as usize),
                b.digits_valid
            );
            write_output(&spec.output, "bryuno.csv", &text, &mut files)?;
            Ok(JobOutput {
                summary: format!(
                    "B({}) = {}",
                    omega.to_bracket(),
                    b.value.to_significant((*digits).min(20) as usize)
                ),
                files,
            })
        }
        Command::Orbit { p, q, epsilon, digits } => {
            let ctx = PrecisionContext::new(*digits)?;
            let eps = ctx
                .parse(epsilon)
                .map_err(|_| JobError::Invalid(format!("bad epsilon `{epsilon}`")))?;
            let orbit = orbits::find_orbit(*p, *q, &eps, &ctx, None)?;
            write_output(&spec.output, "orbit.txt", &orbit.serialize(), &mut files)?;
            Ok(JobOutput {
                summary: format!(
                    "orbit {p}/{q} at eps={epsilon}: closure error {}",
                    orbit.closure_error.to_significant(3)
                ),
                files,
            })
        }
        Command::Residue { p, q, epsilon, max_digits } => {
            let ctx = PrecisionContext::new(38)?;
            let eps = ctx
                .parse(epsilon)
                .map_err(|_| JobError::Invalid(format!("bad epsilon `{epsilon}`")))?;
            let schedule = PrecisionSchedule::capped(*max_digits);
            let (orbit, res) = orbits::residue_at(*p, *q, &eps, &schedule, None)?;
            let text = format!(
                "p,q,eps,residue,trace,cancellation_digits,digits\n{},{},{},{},{},{},{}\n",
                p,
                q,
                epsilon,
                res.value.to_significant(20),
                res.trace.to_significant(20),
                res.cancellation_digits,
                orbit.digits
            );
            write_output(&spec.output, "residue.csv", &text, &mut files)?;
            Ok(JobOutput {
                summary: format!(
                    "R({p}/{q}, eps={epsilon}) = {} at {} digits",
                    res.value.to_significant(10),
                    orbit.digits
                ),
                files,
            })
        }
        Command::Critical { omega, target_digits, k_max, max_q, max_digits, eps_hi } => {
            let omega = parse_omega(omega)?;
            let mut options = crate::greene::GreeneOptions {
                schedule: PrecisionSchedule::capped(*max_digits),
                max_q: *max_q,
                ..Default::default()
            };
            options.k_escalation_limit = 16;
            let cache = spec
                .cache_dir
                .as_ref()
                .and_then(|dir| DiskCache::new(dir).ok());
            let state_key = CacheKey::Bisection {
                omega: omega.to_bracket(),
                target_digits: *target_digits,
            };
            let mut resume = cache.as_ref().and_then(|c| c.get(&state_key)).and_then(|payload| {
                serde_json::from_str::<BisectionState>(&payload)
                    .ok()
                    .and_then(|s| s.to_estimate(&omega))
            });
            if resume.is_none() {
                if let Some(hi) = eps_hi {
                    let ctx = PrecisionContext::new(38)?;
                    let hi = ctx
                        .parse(hi)
                        .map_err(|_| JobError::Invalid(format!("bad eps_hi `{hi}`")))?;
                    resume = Some(CriticalEstimate {
                        omega: omega.clone(),
                        lo: ctx.zero(),
                        hi,
                        k_max: *k_max,
                        history: Vec::new(),
                    });
                }
            }
            let mut engine = match cache {
                Some(c) => GreeneEngine::with_cache(options, c),
                None => GreeneEngine::new(options),
            };
            // persist state after every classification step
            let state_cache = spec
                .cache_dir
                .as_ref()
                .and_then(|dir| DiskCache::new(dir).ok());
            let target = *target_digits;
            let est = engine.critical_function(&omega, target, *k_max, resume, |est| {
                if let Some(c) = state_cache.as_ref() {
                    let state = BisectionState::from_estimate(est, target);
                    let _ = c.put_state(
                        &CacheKey::Bisection {
                            omega: est.omega.to_bracket(),
                            target_digits: target,
                        },
                        &serde_json::to_string_pretty(&state).unwrap(),
                    );
                }
            })?;
            let value = est.value();
            let err = est.error();
            let decimals = *target_digits as usize;
            let csv = format!(
                "omega,eps_c,error,k_max,steps\n\"{}\",{},{},{},{}\n",
                omega.to_bracket(),
                value.to_decimal(decimals),
                err.to_decimal(decimals + 2),
                est.k_max,
                est.history.len()
            );
            write_output(&spec.output, "critical.csv", &csv, &mut files)?;
            // history as JSON next to the main output
            let history_path = files[0].with_extension("history.json");
            let state = BisectionState::from_estimate(&est, target);
            fs::write(&history_path, serde_json::to_string_pretty(&state).unwrap())
                .map_err(|source| JobError::Io { path: history_path.display().to_string(), source })?;
            files.push(history_path);
            Ok(JobOutput {
                summary: format!(
                    "eps_c({}) = {} +- {}",
                    omega.to_bracket(),
                    value.to_decimal(decimals),
                    err.to_decimal(decimals + 2)
                ),
                files,
            })
        }
        Command::Lindstedt { omega, order, digits } => {
            let omega = parse_omega(omega)?;
            let ctx = PrecisionContext::new(*digits)?;
            let series = lindstedt::coefficients(&omega, *order, &ctx)?;
            write_output(&spec.output, "lindstedt.csv", &series.to_csv(), &mut files)?;
            Ok(JobOutput {
                summary: format!(
                    "Lindstedt series of {} to order {order} at {digits} digits",
                    omega.to_bracket()
                ),
                files,
            })
        }
        Command::Pade { omega, order, digits, alpha, direction, check_stability } => {
            let omega = parse_omega(omega)?;
            let ctx = PrecisionContext::new(*digits)?;
            let alpha0 = ctx
                .parse(alpha)
                .map_err(|_| JobError::Invalid(format!("bad alpha `{alpha}`")))?;
            let filter = direction.map(|(angle, tolerance)| DirectionFilter { angle, tolerance });
            let series = lindstedt::coefficients(&omega, 2 * order, &ctx)?;
            let estimate = pade::rho_pade_from_series(&series, &alpha0, *order, &ctx, filter)?;
            let mut cloud = String::new();
            if let pade::RadiusDetails::Poles { kept, direction, .. } = &estimate.details {
                cloud = pade::poles_to_csv(kept);
                cloud.push_str(&format!(
                    "# rho_P = {}, direction = {}\n",
                    estimate.rho.to_significant(10),
                    direction.to_significant(6)
                ));
            }
            write_output(&spec.output, "pade_poles.csv", &cloud, &mut files)?;
            let mut summary = format!(
                "rho_P({}) = {} at order [{order}/{order}], {digits} digits",
                omega.to_bracket(),
                estimate.rho.to_significant(8)
            );
            if *check_stability {
                let (_, deeper, rel) =
                    pade::rho_pade_stability(&omega, &alpha0, *order, &ctx)?;
                summary.push_str(&format!(
                    "; order [{0}/{0}] gives {1} (spread {rel:.2e}{2})",
                    order + 10,
                    deeper.rho.to_significant(8),
                    if rel > 0.01 { ", UNSTABLE" } else { "" }
                ));
            }
            Ok(JobOutput { summary, files })
        }
        Command::Rho1 { omega, digits } => {
            let omega = parse_omega(omega)?;
            let ctx = PrecisionContext::new(*digits)?;
            let est = pade::rho1(&omega, &ctx)?;
            let (resonance, eta) = match &est.details {
                pade::RadiusDetails::Formula { resonance, eta, .. } => {
                    (format!("{}/{}", resonance.0, resonance.1), eta.to_significant(10))
                }
                _ => (String::new(), String::new()),
            };
            let csv = format!(
                "omega,rho1,resonance,eta\n\"{}\",{},{},{}\n",
                omega.to_bracket(),
                est.rho.to_significant(12),
                resonance,
                eta
            );
            write_output(&spec.output, "rho1.csv", &csv, &mut files)?;
            Ok(JobOutput {
                summary: format!(
                    "rho1({}) = {}",
                    omega.to_bracket(),
                    est.rho.to_significant(9)
                ),
                files,
            })
        }
        Command::Slopes { input, kind } => {
            let text = read_input(input)?;
            let ctx = PrecisionContext::new(40)?;
            let ds = ScalingDataset::from_csv(&text, *kind, (0, 1), &ctx)?;
            let slopes = scaling::running_slopes(&ds)?;
            let mut csv = String::from("k,omega,A,uncertainty\n");
            for s in &slopes {
                let row = &ds.rows[s.k - 1];
                csv.push_str(&format!(
                    "{},\"{}\",{},{}\n",
                    s.k,
                    row.omega.to_bracket(),
                    s.value.to_significant(8),
                    s.uncertainty
                        .as_ref()
                        .map(|u| u.to_significant(2))
                        .unwrap_or_default()
                ));
            }
            write_output(&spec.output, "slopes.csv", &csv, &mut files)?;
            Ok(JobOutput {
                summary: format!("{} running slopes from {}", slopes.len(), input.display()),
                files,
            })
        }
        Command::Fit { input, kind, model } => {
            let text = read_input(input)?;
            let ctx = PrecisionContext::new(40)?;
            let ds = ScalingDataset::from_csv(&text, *kind, (0, 1), &ctx)?;
            let result = scaling::fit(&ds, model.to_model(), &ctx)?;
            let mut csv = String::from("param,value\n");
            for (name, value) in &result.params {
                csv.push_str(&format!("{},{}\n", name, value.to_significant(12)));
            }
            csv.push_str(&format!(
                "mean_square_distance,{}\n",
                result.mean_square_distance.to_significant(6)
            ));
            if let Some((rel, flagged)) = &result.route_disagreement {
                csv.push_str(&format!(
                    "route_disagreement,{}{}\n",
                    rel.to_significant(3),
                    if *flagged { " (exceeds 1%)" } else { "" }
                ));
            }
            write_output(&spec.output, "fit.csv", &csv, &mut files)?;
            Ok(JobOutput {
                summary: format!(
                    "beta = {} (msd {})",
                    result.beta().to_significant(8),
                    result.mean_square_distance.to_significant(4)
                ),
                files,
            })
        }
        Command::Reproduce { target, tier } => {
            let target = Target::parse(target)?;
            let tier = Tier::parse(tier)
                .ok_or_else(|| JobError::Invalid(format!("unknown tier `{tier}`")))?;
            let out_dir = spec
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("reproduce_{}", target.name())));
            let repro = Reproducer {
                tier,
                out_dir,
                cache_dir: spec.cache_dir.clone(),
                workers: spec.workers,
            };
            let report = repro.run(target)?;
            let mut summary_file = report.summary.clone();
            summary_file.push('\n');
            if !report.skipped.is_empty() {
                summary_file.push_str("skipped:\n");
                for s in &report.skipped {
                    summary_file.push_str(&format!("  {s}\n"));
                }
            }
            let path = report.dir.join("summary.txt");
            fs::write(&path, &summary_file)
                .map_err(|source| JobError::Io { path: path.display().to_string(), source })?;
            let mut all_files = report.files.clone();
            all_files.push(path);
            if !report.skipped.is_empty() {
                return Err(JobError::Reproduce(ReproduceError::BudgetExceeded {
                    target: target.name(),
                    tier: tier.name().into(),
                    skipped: report.skipped,
                }));
            }
            Ok(JobOutput { summary: report.summary, files: all_files })
        }
    }
}

/// Scan classification monotonicity over an eps grid (diagnostic used by
/// tests and the property suite): every supercritical eps must dominate
/// every subcritical one.
pub fn verify_monotone_classification(
    engine: &mut GreeneEngine,
    omega: &ContinuedFraction,
    eps_values: &[f64],
    k_max: usize,
) -> Result<(), GreeneError> {
    let ctx = PrecisionContext::new(38)?;
    let mut last_super: Option<f64> = None;
    let mut verdicts = Vec::new();
    for &e in eps_values {
        let (verdict, _) = engine.classify(omega, &ctx.from_f64(e), k_max)?;
        verdicts.push((e, verdict));
        if verdict == Classification::Supercritical {
            last_super = Some(match last_super {
                Some(prev) => prev.min(e),
                None => e,
            });
        }
    }
    for (e, verdict) in verdicts {
        if verdict == Classification::Subcritical {
            if let Some(s) = last_super {
                if e > s {
                    return Err(GreeneError::NonMonotone {
                        lower: format!("{s}"),
                        higher: format!("{e}"),
                    });
                }
            }
        }
    }
    Ok(())
}
