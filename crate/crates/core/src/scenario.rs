//! The two case studies: boundary data, constrained and unconstrained
//! runs over 3- and 5-year horizons, action-point detection and the
//! re-strategize subroutine.

use serde::{Deserialize, Serialize};

use crate::bvp::{
    boundary_residual, classify_modes, solve_with, BoundarySpec, ModeKind, ModeReport, SolveReport,
    Terminal, Tolerances, Trajectory, DEFAULT_STEP_DAYS,
};
use crate::dynamics::{
    assemble_constrained, assemble_unconstrained, AssemblyOptions, MassScales, SystemMatrix,
};
use crate::error::{Error, Result};
use crate::model::{
    ConstraintLevels, InterdepCoefficients, ModelParameters, StatePoint, UncertaintyWeights,
};

/// Working days per year.
pub const DAYS_PER_YEAR: f64 = 300.0;

/// Index of δV_CO₂ in the state vector.
pub const VCO2: usize = 3;

/// Initial values shared by both cases: δN₄, δN₅, δN₇, δV_CO₂.
pub const INITIAL_ROW: [f64; 4] = [0.3, 76.0, 2.0, 2.86];

/// Evaluation targets for the 3- and 5-year horizons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckValues {
    pub three_year: f64,
    pub five_year: f64,
}

impl CheckValues {
    pub fn for_horizon(&self, years: u32) -> Result<f64> {
        match years {
            3 => Ok(self.three_year),
            5 => Ok(self.five_year),
            _ => Err(Error::validation(format!(
                "no check value for a {years}-year horizon"
            ))),
        }
    }
}

/// Check values attached to the initial-condition row, per case.
pub fn initial_checks(case_id: u8) -> Result<CheckValues> {
    match case_id {
        1 => Ok(CheckValues {
            three_year: 3.0,
            five_year: 2.3,
        }),
        2 => Ok(CheckValues {
            three_year: 2.19,
            five_year: 1.46,
        }),
        _ => Err(invalid_case(case_id)),
    }
}

/// Check values attached to the terminal-condition row, per case.
pub fn terminal_checks(case_id: u8) -> Result<CheckValues> {
    match case_id {
        1 => Ok(CheckValues {
            three_year: 2.4,
            five_year: 2.0,
        }),
        2 => Ok(CheckValues {
            three_year: 1.72,
            five_year: 1.0,
        }),
        _ => Err(invalid_case(case_id)),
    }
}

/// Terminal row of a case. Case 2 holds δN₇ stationary at the horizon.
pub fn terminal_row(case_id: u8) -> Result<[Terminal; 4]> {
    use Terminal::*;
    match case_id {
        1 => Ok([
            Dirichlet(0.6),
            Dirichlet(80.0),
            Dirichlet(5.0),
            Dirichlet(5.2),
        ]),
        2 => Ok([Dirichlet(0.5), Dirichlet(82.0), NeumannZero, Dirichlet(2.0)]),
        _ => Err(invalid_case(case_id)),
    }
}

fn invalid_case(case_id: u8) -> Error {
    Error::validation(format!("case_id must be 1 or 2, got {case_id}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseDefinition {
    pub case_id: u8,
    pub horizon_years: u32,
    pub constrained: bool,
    pub boundary: BoundarySpec,
}

impl CaseDefinition {
    /// Case with its standard boundary rows.
    pub fn standard(case_id: u8, horizon_years: u32, constrained: bool) -> Result<Self> {
        let d = Self {
            case_id,
            horizon_years,
            constrained,
            boundary: BoundarySpec {
                initial: INITIAL_ROW,
                terminal: terminal_row(case_id)?,
            },
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.case_id, 1 | 2) {
            return Err(invalid_case(self.case_id));
        }
        if !matches!(self.horizon_years, 3 | 5) {
            return Err(Error::validation(format!(
                "horizon_years must be 3 or 5, got {}",
                self.horizon_years
            )));
        }
        self.boundary.validate()
    }

    pub fn horizon_days(&self) -> f64 {
        f64::from(self.horizon_years) * DAYS_PER_YEAR
    }

    pub fn mode_label(&self) -> &'static str {
        if self.constrained {
            "constrained"
        } else {
            "unconstrained"
        }
    }

    /// File stem used for outputs, e.g. `case1_constrained_3y`.
    pub fn name(&self) -> String {
        format!(
            "case{}_{}_{}y",
            self.case_id,
            self.mode_label(),
            self.horizon_years
        )
    }
}

/// Everything the matrices depend on, on the daily scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInputs {
    pub params: ModelParameters,
    pub weights: UncertaintyWeights,
    pub coefficients: InterdepCoefficients,
    pub state: StatePoint,
    pub levels: ConstraintLevels,
    /// ξ, dividing the rows of M.
    pub xi: MassScales,
    /// ψ, dividing the rows of K.
    pub psi: MassScales,
    pub options: AssemblyOptions,
}

impl ModelInputs {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.weights.validate()?;
        self.coefficients.validate()?;
        self.state.validate()?;
        self.levels.validate()?;
        self.xi.validate()?;
        self.psi.validate()
    }

    /// M or K, unscaled.
    pub fn matrix(&self, constrained: bool) -> Result<SystemMatrix> {
        let (w, c, p, s) = (&self.weights, &self.coefficients, &self.params, &self.state);
        if constrained {
            assemble_constrained(w, c, p, s)
        } else {
            assemble_unconstrained(w, c, p, s, self.options)
        }
    }

    /// Right-hand side operator diag(1/ξ)·M or diag(1/ψ)·K.
    pub fn operator(&self, constrained: bool) -> Result<SystemMatrix> {
        let scales = if constrained { &self.psi } else { &self.xi };
        Ok(self.matrix(constrained)?.scaled(scales))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub step_days: f64,
    pub tolerances: Tolerances,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            step_days: DEFAULT_STEP_DAYS,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Minimum,
    Maximum,
    /// Sign change of the component ("break-even").
    ZeroCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionPoint {
    pub component: usize,
    pub time: f64,
    pub kind: ActionKind,
    pub value: f64,
}

/// How δV_CO₂ behaves in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vco2Behaviour {
    Divergent,
    Oscillatory,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrategizePlan {
    pub revision_time: f64,
    pub revised_vco2_target: f64,
    /// Terminal δV_CO₂ of an earlier plan made at t = 0. When present the
    /// reduction is measured against that plan instead of the base run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advance_vco2_target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Revision {
    pub plan: RestrategizePlan,
    /// Base trajectory up to the revision time, re-solved trajectory after it.
    pub trajectory: Trajectory,
    pub report: SolveReport,
    pub baseline_terminal: f64,
    pub revised_terminal: f64,
    /// Largest state jump at the splice.
    pub splice_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub definition: CaseDefinition,
    /// Unscaled M or K.
    pub matrix: SystemMatrix,
    pub base: Trajectory,
    pub report: SolveReport,
    pub modes: ModeReport,
    pub action_points: Vec<ActionPoint>,
    /// Largest endpoint mismatch against the boundary data.
    pub endpoint_error: f64,
    pub vco2_behaviour: Vco2Behaviour,
    pub revised: Option<Revision>,
    pub vco2_reduction_pct: Option<f64>,
}

impl CaseResult {
    pub fn divergent(&self) -> bool {
        self.report.divergent || self.revised.as_ref().is_some_and(|r| r.report.divergent)
    }
}

/// Assembles the matrix for the case, solves the BVP and extracts action points.
pub fn run_case(
    defn: &CaseDefinition,
    inputs: &ModelInputs,
    opts: &RunOptions,
) -> Result<CaseResult> {
    defn.validate()?;
    let matrix = inputs.matrix(defn.constrained)?;
    let scales = if defn.constrained {
        &inputs.psi
    } else {
        &inputs.xi
    };
    let operator = matrix.scaled(scales);
    let (base, report) = solve_with(
        &operator,
        &defn.boundary,
        defn.horizon_days(),
        opts.step_days,
        &opts.tolerances,
    )?;
    let modes = classify_modes(&operator)?;
    let action_points = if report.divergent {
        Vec::new()
    } else {
        action_points(&base)
    };
    let endpoint_error = boundary_residual(&base, &defn.boundary);
    let vco2_behaviour = if report.divergent {
        Vco2Behaviour::Divergent
    } else if modes.kind_of_state(VCO2) == Some(ModeKind::Oscillatory) {
        Vco2Behaviour::Oscillatory
    } else {
        Vco2Behaviour::Bounded
    };
    log::info!(
        "{}: divergent={} endpoint_error={:e} action_points={}",
        defn.name(),
        report.divergent,
        endpoint_error,
        action_points.len()
    );
    Ok(CaseResult {
        definition: *defn,
        matrix,
        base,
        report,
        modes,
        action_points,
        endpoint_error,
        vco2_behaviour,
        revised: None,
        vco2_reduction_pct: None,
    })
}

/// Interior extrema of `values` as (grid index, kind). A run of equal
/// samples counts once, at its first index.
pub fn interior_extrema(values: &[f64]) -> Vec<(usize, ExtremumKind)> {
    let mut out = Vec::new();
    let mut prev_sign = 0.0f64;
    let mut plateau_start = 0;
    for i in 1..values.len() {
        let d = values[i] - values[i - 1];
        if d == 0.0 {
            continue;
        }
        let sign = d.signum();
        if prev_sign != 0.0 && sign != prev_sign {
            let kind = if prev_sign < 0.0 {
                ExtremumKind::Minimum
            } else {
                ExtremumKind::Maximum
            };
            out.push((plateau_start, kind));
        }
        prev_sign = sign;
        plateau_start = i;
    }
    out
}

/// Sign changes of `values` as (time, index of the first sample past the
/// change). A crossing through exact zeros is timed at the first zero;
/// otherwise the time is interpolated linearly.
pub fn zero_crossings(times: &[f64], values: &[f64]) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        if let Some(j) = last {
            if values[j].signum() != v.signum() {
                let t = if j + 1 < i {
                    times[j + 1]
                } else {
                    let (x0, x1) = (values[j], v);
                    times[j] + (times[i] - times[j]) * x0 / (x0 - x1)
                };
                out.push((t, i));
            }
        }
        last = Some(i);
    }
    out
}

/// Extrema and zero crossings of every component, ordered by component then time.
pub fn action_points(traj: &Trajectory) -> Vec<ActionPoint> {
    let mut out = Vec::new();
    for k in 0..4 {
        let xs = traj.component(k);
        let mut points: Vec<ActionPoint> = interior_extrema(&xs)
            .into_iter()
            .map(|(i, kind)| ActionPoint {
                component: k,
                time: traj.times[i],
                kind: match kind {
                    ExtremumKind::Minimum => ActionKind::Minimum,
                    ExtremumKind::Maximum => ActionKind::Maximum,
                },
                value: xs[i],
            })
            .collect();
        points.extend(
            zero_crossings(&traj.times, &xs)
                .into_iter()
                .map(|(t, _)| ActionPoint {
                    component: k,
                    time: t,
                    kind: ActionKind::ZeroCrossing,
                    value: 0.0,
                }),
        );
        points.sort_by(|a, b| a.time.total_cmp(&b.time));
        out.extend(points);
    }
    out
}

/// Grid time of the first interior extremum of the requested kind.
pub fn detect_action_point(traj: &Trajectory, component: usize, kind: ExtremumKind) -> Result<f64> {
    if component >= 4 {
        return Err(Error::validation(format!(
            "component {component} out of range"
        )));
    }
    if !traj.is_finite() {
        return Err(Error::validation("trajectory is not finite"));
    }
    interior_extrema(&traj.component(component))
        .into_iter()
        .find(|(_, k)| *k == kind)
        .map(|(i, _)| traj.times[i])
        .ok_or_else(|| Error::NotFound(format!("no interior {kind:?} of component {component}")))
}

/// Default plan: case 1 revises at the detected δV_CO₂ minimum, case 2 at
/// the end of year 1 (3-year runs) or year 3 (5-year runs). The revision
/// targets the terminal-row check value; the initial-row check value is the
/// advance plan the reduction is measured against.
pub fn default_plan(result: &CaseResult) -> Result<RestrategizePlan> {
    let d = &result.definition;
    let revision_time = match (d.case_id, d.horizon_years) {
        (1, _) => detect_action_point(&result.base, VCO2, ExtremumKind::Minimum)?,
        (2, 3) => DAYS_PER_YEAR,
        (2, 5) => 3.0 * DAYS_PER_YEAR,
        _ => return Err(invalid_case(d.case_id)),
    };
    Ok(RestrategizePlan {
        revision_time,
        revised_vco2_target: terminal_checks(d.case_id)?.for_horizon(d.horizon_years)?,
        advance_vco2_target: Some(initial_checks(d.case_id)?.for_horizon(d.horizon_years)?),
    })
}

/// Re-solves on [revision_time, T] from the base state at the revision time
/// with the revised δV_CO₂ target, splices the result onto the base run and
/// reports the reduction in terminal δV_CO₂.
pub fn restrategize(
    result: &CaseResult,
    plan: &RestrategizePlan,
    inputs: &ModelInputs,
    opts: &RunOptions,
) -> Result<CaseResult> {
    if result.report.divergent || !result.base.is_finite() {
        return Err(Error::validation("cannot revise a divergent run"));
    }
    if !plan.revised_vco2_target.is_finite()
        || plan.advance_vco2_target.is_some_and(|v| !v.is_finite())
    {
        return Err(Error::validation("revision targets must be finite"));
    }
    let defn = &result.definition;
    let times = &result.base.times;
    let horizon = defn.horizon_days();
    let tol = 1e-9 * horizon.max(1.0);
    let k = times
        .iter()
        .position(|t| (t - plan.revision_time).abs() <= tol)
        .ok_or_else(|| {
            Error::validation(format!(
                "revision time {} is not on the grid",
                plan.revision_time
            ))
        })?;
    if k == 0 || k + 1 >= times.len() {
        return Err(Error::validation("revision time must be interior"));
    }

    let operator = inputs.operator(defn.constrained)?;
    let mut terminal = defn.boundary.terminal;
    terminal[VCO2] = Terminal::Dirichlet(plan.revised_vco2_target);
    let spec = BoundarySpec {
        initial: result.base.states[k],
        terminal,
    };
    let (tail, report) = solve_with(
        &operator,
        &spec,
        horizon - times[k],
        opts.step_days,
        &opts.tolerances,
    )?;

    let mut trajectory = Trajectory {
        times: times.clone(),
        states: result.base.states[..k].to_vec(),
        derivatives: result.base.derivatives[..k].to_vec(),
    };
    trajectory.states.extend_from_slice(&tail.states);
    trajectory.derivatives.extend_from_slice(&tail.derivatives);
    if trajectory.states.len() != times.len() {
        return Err(Error::Numeric(
            "revised grid does not match the base grid".into(),
        ));
    }
    let splice_gap = (0..4)
        .map(|c| (tail.states[0][c] - result.base.states[k][c]).abs())
        .fold(0.0, f64::max);

    let mut divergent = report.divergent;
    let baseline_terminal = match plan.advance_vco2_target {
        Some(target) => {
            let mut advance = defn.boundary;
            advance.terminal[VCO2] = Terminal::Dirichlet(target);
            let (adv, adv_report) = solve_with(
                &operator,
                &advance,
                horizon,
                opts.step_days,
                &opts.tolerances,
            )?;
            divergent |= adv_report.divergent;
            adv.last().map_or(f64::NAN, |x| x[VCO2])
        }
        None => result.base.last().map_or(f64::NAN, |x| x[VCO2]),
    };
    let revised_terminal = tail.last().map_or(f64::NAN, |x| x[VCO2]);
    let vco2_reduction_pct = if divergent || baseline_terminal == 0.0 {
        None
    } else {
        Some(100.0 * (baseline_terminal - revised_terminal) / baseline_terminal)
    };
    log::info!(
        "{} revised at t={}: baseline {} -> {} ({:?}%)",
        defn.name(),
        plan.revision_time,
        baseline_terminal,
        revised_terminal,
        vco2_reduction_pct
    );

    let mut out = result.clone();
    out.revised = Some(Revision {
        plan: plan.clone(),
        trajectory,
        report,
        baseline_terminal,
        revised_terminal,
        splice_gap,
    });
    out.vco2_reduction_pct = vco2_reduction_pct;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub constrained: CaseResult,
    pub unconstrained: CaseResult,
}

impl ModeComparison {
    /// True when the unconstrained δV_CO₂ diverges or oscillates.
    pub fn unconstrained_unstable(&self) -> bool {
        self.unconstrained.vco2_behaviour != Vco2Behaviour::Bounded
    }
}

/// Runs both modes of a case with identical boundary data.
pub fn compare_modes(
    case_id: u8,
    horizon_years: u32,
    inputs: &ModelInputs,
    opts: &RunOptions,
) -> Result<ModeComparison> {
    let c = CaseDefinition::standard(case_id, horizon_years, true)?;
    let u = CaseDefinition {
        constrained: false,
        ..c
    };
    compare_definitions(&c, &u, inputs, opts)
}

/// As [`compare_modes`] with explicit definitions.
pub fn compare_definitions(
    constrained: &CaseDefinition,
    unconstrained: &CaseDefinition,
    inputs: &ModelInputs,
    opts: &RunOptions,
) -> Result<ModeComparison> {
    if constrained.boundary != unconstrained.boundary {
        return Err(Error::validation("both modes need the same boundary data"));
    }
    let out = ModeComparison {
        constrained: run_case(constrained, inputs, opts)?,
        unconstrained: run_case(unconstrained, inputs, opts)?,
    };
    if out.unconstrained_unstable() {
        log::info!(
            "{}: unconstrained VCO2 is {:?}",
            unconstrained.name(),
            out.unconstrained.vco2_behaviour
        );
    }
    Ok(out)
}
