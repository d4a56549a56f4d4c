//! Command-line front end: `weights`, `matrix` and `run`.
//!
//! Exit status: 0 success, 1 bad input (including CR > 0.10 in `weights`),
//! 2 numerical failure, 3 when solves ran but some were divergent.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::ahp::{weight_report, PairwiseMatrix};
use crate::bvp::{ModeKind, ModeReport, SolveReport, Tolerances, DEFAULT_STEP_DAYS};
use crate::config::{Manifest, ManifestRun, ModelConfig, TargetChoice};
use crate::dynamics::{second_partials, SecondPartials, SystemMatrix};
use crate::error::{Error, Result};
use crate::scenario::{
    default_plan, initial_checks, restrategize, run_case, terminal_checks, ActionKind, ActionPoint,
    CaseResult, ModelInputs, RestrategizePlan, RunOptions, Vco2Behaviour, VCO2,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;

/// Name of the environment variable holding the log filter.
pub const LOG_ENV: &str = "SCN_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "scn",
    version,
    about = "Supply-chain cost model: AHP weights, system matrices and case-study runs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Priority weights and consistency report of a pairwise-comparison matrix.
    Weights {
        /// Whitespace-separated matrix, one row per line; fractions like 1/3 allowed.
        matrix_file: PathBuf,
    },
    /// Assembled M and K matrices, their modes and the second partials as JSON.
    Matrix {
        /// Model configuration (bundled default when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        unconstrained_m44_zero: bool,
    },
    /// Solve every manifest run and write trajectory CSVs plus summary.json.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value = "scn-output")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STEP_DAYS)]
        step: f64,
        #[arg(long, default_value_t = 1e-8)]
        boundary_tol: f64,
        #[arg(long, default_value_t = 1e12)]
        divergence_tol: f64,
        #[arg(long)]
        unconstrained_m44_zero: bool,
    },
}

/// Parsed form of the `run` arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model_config_path: Option<PathBuf>,
    pub scenario_manifest_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub step_days: f64,
    pub tolerances: Tolerances,
    pub unconstrained_m44_zero: bool,
}

impl RunConfig {
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            model_config_path: None,
            scenario_manifest_path: None,
            output_dir: output_dir.into(),
            step_days: DEFAULT_STEP_DAYS,
            tolerances: Tolerances::default(),
            unconstrained_m44_zero: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_days.is_finite() && self.step_days > 0.0) {
            return Err(Error::validation("step must be positive"));
        }
        let t = &self.tolerances;
        if !(t.boundary > 0.0 && t.divergence > 0.0) {
            return Err(Error::validation("tolerances must be positive"));
        }
        Ok(())
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status. Output goes to `out`, diagnostics to `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Weights { matrix_file } => cmd_weights(&matrix_file, out),
        Command::Matrix {
            config,
            unconstrained_m44_zero,
        } => cmd_matrix(config.as_deref(), unconstrained_m44_zero, out).map(|_| EXIT_OK),
        Command::Run {
            config,
            manifest,
            out: output_dir,
            step,
            boundary_tol,
            divergence_tol,
            unconstrained_m44_zero,
        } => {
            let rc = RunConfig {
                model_config_path: config,
                scenario_manifest_path: manifest,
                output_dir,
                step_days: step,
                tolerances: Tolerances {
                    boundary: boundary_tol,
                    divergence: divergence_tol,
                },
                unconstrained_m44_zero,
            };
            cmd_run(&rc).map(|summary| {
                let _ = writeln!(
                    out,
                    "{} runs written to {}{}",
                    summary.runs.len(),
                    rc.output_dir.display(),
                    if summary.any_divergent {
                        " (some divergent)"
                    } else {
                        ""
                    }
                );
                if summary.any_divergent {
                    EXIT_DIVERGENT
                } else {
                    EXIT_OK
                }
            })
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, Serialize)]
struct WeightsOutput {
    weights: Vec<f64>,
    lambda_max: f64,
    ci: f64,
    ri: f64,
    cr: f64,
    acceptable: bool,
}

/// Prints weights and the consistency report. Returns exit status 1 when
/// CR exceeds 0.10 so the judgments get reviewed.
pub fn cmd_weights(matrix_file: &Path, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(matrix_file).map_err(|e| Error::io(matrix_file, e))?;
    let m = PairwiseMatrix::parse(&text)?;
    let (report, consistency) = weight_report(&m)?;
    let output = WeightsOutput {
        weights: report.weights.into_inner(),
        lambda_max: report.lambda_max,
        ci: report.ci,
        ri: consistency.ri,
        cr: report.cr,
        acceptable: consistency.acceptable,
    };
    write_json(out, &output)?;
    if consistency.acceptable {
        Ok(EXIT_OK)
    } else {
        log::warn!("CR = {} exceeds 0.10; review the judgments", consistency.cr);
        Ok(EXIT_INPUT)
    }
}

#[derive(Debug, Serialize)]
pub struct MatrixOutput {
    pub unconstrained: SystemMatrix,
    pub constrained: SystemMatrix,
    /// Modes of diag(1/ξ)·M and diag(1/ψ)·K.
    pub unconstrained_modes: ModeReport,
    pub constrained_modes: ModeReport,
    pub second_partials: SecondPartials,
}

pub fn matrix_output(inputs: &ModelInputs) -> Result<MatrixOutput> {
    let unconstrained = inputs.matrix(false)?;
    let constrained = inputs.matrix(true)?;
    Ok(MatrixOutput {
        unconstrained,
        constrained,
        unconstrained_modes: crate::bvp::classify_modes(&unconstrained.scaled(&inputs.xi))?,
        constrained_modes: crate::bvp::classify_modes(&constrained.scaled(&inputs.psi))?,
        second_partials: second_partials(
            &inputs.weights,
            &inputs.coefficients,
            &inputs.params,
            &inputs.state,
        )?,
    })
}

fn load_config(path: Option<&Path>) -> Result<ModelConfig> {
    match path {
        Some(p) => ModelConfig::load(p),
        None => Ok(ModelConfig::bundled()),
    }
}

pub fn cmd_matrix(config: Option<&Path>, m44_zero: bool, out: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(config)?;
    cfg.options.unconstrained_m44_zero |= m44_zero;
    let inputs = cfg.inputs()?;
    write_json(out, &matrix_output(&inputs)?)
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub step_days: f64,
    pub tolerances: Tolerances,
    pub any_divergent: bool,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub name: String,
    pub case: u8,
    pub horizon_years: u32,
    pub constrained: bool,
    pub csv: String,
    /// diag(1/ξ)·M or diag(1/ψ)·K, the operator the trajectory solves.
    pub operator: SystemMatrix,
    pub solve: SolveReport,
    pub endpoint_error: f64,
    pub vco2_behaviour: Vco2Behaviour,
    pub vco2_mode: Option<ModeKind>,
    pub vco2_interior_minimum: Option<f64>,
    pub vco2_interior_maximum: Option<f64>,
    pub action_points: Vec<ActionPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restrategize: Option<RevisionRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RevisionRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<RestrategizePlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_terminal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub revised_terminal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splice_gap: Option<f64>,
    pub vco2_reduction_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

const REVISED_DIR: &str = "revised";
pub const SUMMARY_FILE: &str = "summary.json";

/// Fails early when `dir` cannot be created or written to.
fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".scn-write-probe");
    std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Plan for a manifest run: defaults with the manifest's overrides applied.
pub fn plan_for(run: &ManifestRun, result: &CaseResult) -> Result<RestrategizePlan> {
    let spec = run.restrategize.unwrap_or_default();
    let d = &result.definition;
    let mut plan = match spec.revision_time {
        Some(t) => RestrategizePlan {
            revision_time: t,
            revised_vco2_target: terminal_checks(d.case_id)?.for_horizon(d.horizon_years)?,
            advance_vco2_target: Some(initial_checks(d.case_id)?.for_horizon(d.horizon_years)?),
        },
        None => default_plan(result)?,
    };
    match spec.target {
        Some(TargetChoice::InitialRow) => {
            plan.revised_vco2_target = plan.advance_vco2_target.unwrap_or(plan.revised_vco2_target);
            plan.advance_vco2_target = None;
        }
        Some(TargetChoice::TerminalRow) | None => {}
    }
    if let Some(v) = spec.revised_vco2_target {
        plan.revised_vco2_target = v;
    }
    if spec.advance_plan == Some(false) {
        plan.advance_vco2_target = None;
    }
    Ok(plan)
}

fn first_extremum(points: &[ActionPoint], kind: ActionKind) -> Option<f64> {
    points
        .iter()
        .find(|p| p.component == VCO2 && p.kind == kind)
        .map(|p| p.time)
}

/// Solves every manifest run and writes `<name>.csv`, `revised/<name>.csv`
/// and `summary.json` into the output directory, overwriting earlier files.
pub fn cmd_run(rc: &RunConfig) -> Result<RunSummary> {
    rc.validate()?;
    let mut cfg = load_config(rc.model_config_path.as_deref())?;
    cfg.options.unconstrained_m44_zero |= rc.unconstrained_m44_zero;
    let inputs = cfg.inputs()?;
    let manifest = match &rc.scenario_manifest_path {
        Some(p) => Manifest::load(p)?,
        None => Manifest::bundled(),
    };
    let definitions = manifest
        .runs
        .iter()
        .map(ManifestRun::definition)
        .collect::<Result<Vec<_>>>()?;

    ensure_writable(&rc.output_dir)?;
    let revised_dir = rc.output_dir.join(REVISED_DIR);
    if manifest.runs.iter().any(|r| r.restrategize.is_some()) {
        ensure_writable(&revised_dir)?;
    }

    let opts = RunOptions {
        step_days: rc.step_days,
        tolerances: rc.tolerances,
    };
    let mut records = Vec::with_capacity(definitions.len());
    let mut any_divergent = false;
    for (run, defn) in manifest.runs.iter().zip(&definitions) {
        let result = run_case(defn, &inputs, &opts)?;
        let name = defn.name();
        let csv = format!("{name}.csv");
        result.base.save_csv(&rc.output_dir.join(&csv))?;
        any_divergent |= result.report.divergent;

        let restrategize_record = match run.restrategize {
            None => None,
            Some(_) if result.report.divergent => Some(RevisionRecord {
                plan: None,
                csv: None,
                solve: None,
                baseline_terminal: None,
                revised_terminal: None,
                splice_gap: None,
                vco2_reduction_pct: None,
                error: Some("base run is divergent".into()),
            }),
            Some(_) => Some(revise(
                run,
                &result,
                &inputs,
                &opts,
                &revised_dir,
                &csv,
                &mut any_divergent,
            )?),
        };

        records.push(RunRecord {
            name,
            case: defn.case_id,
            horizon_years: defn.horizon_years,
            constrained: defn.constrained,
            csv,
            operator: inputs.operator(defn.constrained)?,
            solve: result.report.clone(),
            endpoint_error: result.endpoint_error,
            vco2_behaviour: result.vco2_behaviour,
            vco2_mode: result.modes.kind_of_state(VCO2),
            vco2_interior_minimum: first_extremum(&result.action_points, ActionKind::Minimum),
            vco2_interior_maximum: first_extremum(&result.action_points, ActionKind::Maximum),
            action_points: result.action_points,
            restrategize: restrategize_record,
        });
    }

    let summary = RunSummary {
        step_days: rc.step_days,
        tolerances: rc.tolerances,
        any_divergent,
        runs: records,
    };
    let path = rc.output_dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

fn revise(
    run: &ManifestRun,
    result: &CaseResult,
    inputs: &ModelInputs,
    opts: &RunOptions,
    revised_dir: &Path,
    csv: &str,
    any_divergent: &mut bool,
) -> Result<RevisionRecord> {
    let plan = match plan_for(run, result) {
        Ok(p) => p,
        Err(e @ (Error::NotFound(_) | Error::Validation(_))) => {
            log::warn!("{}: no revision ({e})", result.definition.name());
            return Ok(RevisionRecord {
                plan: None,
                csv: None,
                solve: None,
                baseline_terminal: None,
                revised_terminal: None,
                splice_gap: None,
                vco2_reduction_pct: None,
                error: Some(e.to_string()),
            });
        }
        Err(e) => return Err(e),
    };
    let revised = restrategize(result, &plan, inputs, opts)?;
    let rev = revised.revised.expect("restrategize sets the revision");
    *any_divergent |= rev.report.divergent;
    let rel = format!("{REVISED_DIR}/{csv}");
    rev.trajectory.save_csv(&revised_dir.join(csv))?;
    Ok(RevisionRecord {
        plan: Some(plan),
        csv: Some(rel),
        solve: Some(rev.report),
        baseline_terminal: Some(rev.baseline_terminal),
        revised_terminal: Some(rev.revised_terminal),
        splice_gap: Some(rev.splice_gap),
        vco2_reduction_pct: revised.vco2_reduction_pct,
        error: None,
    })
}
