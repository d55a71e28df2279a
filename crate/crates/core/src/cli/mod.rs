//! Manifest-driven command-line front end.
//!
//! ```text
//! parageo integrate <manifest>
//! parageo tensors <manifest>
//! parageo transport <manifest>
//! parageo check [name ...] <manifest>
//! parageo builtins
//! ```
//!
//! Exit status: 0 success, 1 a check failed, 2 input error, 3 numerical
//! abort. `PARAGEO_STEP_OVERRIDE` replaces every job's step.

mod manifest;
mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use manifest::{
    builtin_metric, load_manifest, parse_manifest, CheckJob, CurveSpec, IntegrateJob, Job, Manifest, ManifestError,
    OutputFormat, SystemKind, TensorsJob, TractorSpec, TransportJob, BUILTINS,
};
pub use output::{format_real, tensors_json, trajectory_csv, trajectory_json, transport_csv, transport_json};

use crate::curves::{
    integrate_with, ConformalCoupled, ConformalOde3, Geodesic, IntegrateOptions, ProjectiveCoupled, Trajectory,
};
use crate::geometry::MetricField;
use crate::tractor::{parallel_transport, CurveSamples, Tractor};
use crate::verify::{run_suite, SuiteConfig};
use crate::Error;

pub const STEP_OVERRIDE_VAR: &str = "PARAGEO_STEP_OVERRIDE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Success = 0,
    CheckFailed = 1,
    InputError = 2,
    NumericalAbort = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(name = "parageo", version, about = "Conformal and projective distinguished curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Integrate curves and write trajectories.
    Integrate { manifest: PathBuf },
    /// Dump g, Γ, Ric, Scal, S and P at the requested points.
    Tensors { manifest: PathBuf },
    /// Transport tractors along integrated curves.
    Transport { manifest: PathBuf },
    /// Run the verification suite, or the named checks.
    Check {
        /// Check names followed by the manifest path.
        #[arg(required = true, num_args = 1.., value_name = "NAME... MANIFEST")]
        args: Vec<String>,
    },
    /// List builtin metrics.
    Builtins,
}

/// Failure of one job.
#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl JobError {
    pub fn status(&self) -> ExitStatus {
        match self {
            JobError::Compute(e) if is_numerical(e) => ExitStatus::NumericalAbort,
            _ => ExitStatus::InputError,
        }
    }
}

fn is_numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::Integration { .. } | Error::NonFinite { .. } | Error::StepTooCoarse { .. }
    )
}

/// Read the step override from the environment.
pub fn step_override() -> Result<Option<f64>, ManifestError> {
    match std::env::var(STEP_OVERRIDE_VAR) {
        Err(_) => Ok(None),
        Ok(text) => match text.trim().parse::<f64>() {
            Ok(h) if h > 0.0 && h.is_finite() => Ok(Some(h)),
            _ => Err(ManifestError::Validation {
                field: STEP_OVERRIDE_VAR.into(),
                message: format!("`{text}` is not a positive number"),
            }),
        },
    }
}

/// Integrate one curve on `metric`.
pub fn integrate_curve(metric: &MetricField, curve: &CurveSpec, stride: usize, step: f64) -> Result<Trajectory, Error> {
    let y0 = curve.initial_state();
    let opts = IntegrateOptions {
        stride,
        ..Default::default()
    };
    match curve.system {
        SystemKind::ConformalCoupled => {
            integrate_with(&ConformalCoupled { metric }, &y0, curve.t0, curve.t1, step, &opts)
        }
        SystemKind::ConformalOde3 => integrate_with(&ConformalOde3 { metric }, &y0, curve.t0, curve.t1, step, &opts),
        SystemKind::ProjectiveCoupled => {
            integrate_with(&ProjectiveCoupled { metric }, &y0, curve.t0, curve.t1, step, &opts)
        }
        SystemKind::Geodesic => integrate_with(&Geodesic { metric }, &y0, curve.t0, curve.t1, step, &opts),
    }
}

fn emit(manifest: &Manifest, output: &Option<String>, text: &str, stdout: &mut dyn Write) -> Result<(), JobError> {
    match output {
        Some(rel) => {
            let path = manifest.resolve(rel);
            std::fs::write(&path, text).map_err(|source| JobError::Write { path, source })
        }
        None => stdout.write_all(text.as_bytes()).map_err(|source| JobError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

/// Run one job. `names` replaces the check list of check jobs when non-empty.
pub fn run_job(
    manifest: &Manifest,
    job: &Job,
    step: Option<f64>,
    names: &[String],
    stdout: &mut dyn Write,
) -> Result<ExitStatus, JobError> {
    let metric = &manifest.metric;
    match job {
        Job::Integrate(j) => {
            let curve = j.curve();
            let tr = integrate_curve(metric, &curve, j.stride, step.unwrap_or(curve.step))?;
            let text = match j.format {
                OutputFormat::Csv => trajectory_csv(&tr),
                OutputFormat::Json => trajectory_json(curve.system.name(), &tr),
            };
            emit(manifest, &j.output, &text, stdout)?;
            Ok(ExitStatus::Success)
        }
        Job::Tensors(j) => {
            let text = tensors_json(metric, &j.points)?;
            emit(manifest, &j.output, &text, stdout)?;
            Ok(ExitStatus::Success)
        }
        Job::Transport(j) => {
            let n = manifest.dimension;
            let tr = integrate_curve(metric, &j.curve, 1, step.unwrap_or(j.curve.step))?;
            let curve = CurveSamples::from_trajectory(&tr, n)?;
            let u0 = Tractor::new(j.tractor0.lambda, j.tractor0.alpha.clone(), j.tractor0.mu);
            let path = parallel_transport(metric, &curve, &u0, None)?;
            let text = match j.format {
                OutputFormat::Csv => transport_csv(&curve, &path, j.stride),
                OutputFormat::Json => transport_json(&curve, &path, j.stride),
            };
            emit(manifest, &j.output, &text, stdout)?;
            Ok(ExitStatus::Success)
        }
        Job::Check(j) => {
            let defaults = SuiteConfig::default();
            let cfg = SuiteConfig {
                seed: j.seed.unwrap_or(defaults.seed),
                cases: j.cases.unwrap_or(defaults.cases),
                t1: j.t1.unwrap_or(defaults.t1),
                step: step.or(j.step).unwrap_or(defaults.step),
            };
            let selected = if names.is_empty() { &j.checks } else { names };
            let reports = run_suite(selected, &cfg)?;
            emit(manifest, &j.output, &output::reports_json(&reports), stdout)?;
            Ok(if reports.iter().all(|r| r.passed) {
                ExitStatus::Success
            } else {
                ExitStatus::CheckFailed
            })
        }
    }
}

/// Run every job of kind `kind`. A `check` run with no check jobs in the
/// manifest runs one default check job.
pub fn run(
    manifest: &Manifest,
    kind: &str,
    names: &[String],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> ExitStatus {
    let step = match step_override() {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return ExitStatus::InputError;
        }
    };
    let default_check = Job::Check(CheckJob {
        checks: Vec::new(),
        seed: None,
        cases: None,
        t1: None,
        step: None,
        output: None,
    });
    let mut jobs: Vec<&Job> = manifest.jobs.iter().filter(|j| j.kind() == kind).collect();
    if jobs.is_empty() {
        if kind == "check" {
            jobs.push(&default_check);
        } else {
            let _ = writeln!(stderr, "error: manifest has no `{kind}` jobs");
            return ExitStatus::InputError;
        }
    }
    let mut worst = ExitStatus::Success;
    for (i, job) in jobs.into_iter().enumerate() {
        let status = match run_job(manifest, job, step, names, stdout) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(stderr, "error: {kind} job {i}: {e}");
                let mut source = std::error::Error::source(&e);
                while let Some(s) = source {
                    let _ = writeln!(stderr, "  caused by: {s}");
                    source = s.source();
                }
                e.status()
            }
        };
        if status == ExitStatus::CheckFailed {
            let _ = writeln!(stderr, "{kind} job {i}: some checks failed");
        }
        worst = worst.max(status);
    }
    worst
}

/// Execute parsed command-line arguments.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus {
    let (kind, path, names): (&str, PathBuf, Vec<String>) = match &cli.command {
        Command::Builtins => {
            for (name, about) in BUILTINS {
                let _ = writeln!(stdout, "{name:<22}{about}");
            }
            return ExitStatus::Success;
        }
        Command::Integrate { manifest } => ("integrate", manifest.clone(), Vec::new()),
        Command::Tensors { manifest } => ("tensors", manifest.clone(), Vec::new()),
        Command::Transport { manifest } => ("transport", manifest.clone(), Vec::new()),
        Command::Check { args } => {
            let (last, names) = args.split_last().expect("clap requires one argument");
            for name in names {
                if !crate::verify::CHECK_NAMES.contains(&name.as_str()) {
                    let _ = writeln!(
                        stderr,
                        "error: unknown check `{name}`; known checks: {}",
                        crate::verify::CHECK_NAMES.join(", ")
                    );
                    return ExitStatus::InputError;
                }
            }
            ("check", PathBuf::from(last), names.to_vec())
        }
    };
    match load_manifest(&path) {
        Ok(m) => run(&m, kind, &names, stdout, stderr),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            ExitStatus::InputError
        }
    }
}
