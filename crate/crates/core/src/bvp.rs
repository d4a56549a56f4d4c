//! Linear two-point boundary-value problems `x'' = A x` on [0, T] for the
//! four-component perturbation state, solved by shooting with superposition.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::dynamics::SystemMatrix;
use crate::error::{Error, Result};

/// Terminal condition of one state component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Dirichlet(f64),
    /// dx/dt = 0 at t = T.
    NeumannZero,
}

impl Terminal {
    pub fn value(self) -> Option<f64> {
        match self {
            Terminal::Dirichlet(v) => Some(v),
            Terminal::NeumannZero => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub initial: [f64; 4],
    pub terminal: [Terminal; 4],
}

impl BoundarySpec {
    pub fn dirichlet(initial: [f64; 4], terminal: [f64; 4]) -> Self {
        Self {
            initial,
            terminal: terminal.map(Terminal::Dirichlet),
        }
    }

    pub fn zero() -> Self {
        Self::dirichlet([0.0; 4], [0.0; 4])
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.initial.iter().all(|v| v.is_finite())
            && self
                .terminal
                .iter()
                .all(|t| t.value().is_none_or(f64::is_finite));
        if !finite {
            return Err(Error::validation("boundary values must be finite"));
        }
        Ok(())
    }

    /// Largest magnitude among the prescribed values.
    fn scale(&self) -> f64 {
        self.initial
            .iter()
            .copied()
            .chain(self.terminal.iter().filter_map(|t| t.value()))
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Uniformly sampled solution. `states[i]` and `derivatives[i]` belong to `times[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 4]>,
    pub derivatives: Vec<[f64; 4]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[k]).collect()
    }

    pub fn first(&self) -> Option<&[f64; 4]> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&[f64; 4]> {
        self.states.last()
    }

    pub fn is_finite(&self) -> bool {
        self.states
            .iter()
            .chain(&self.derivatives)
            .flatten()
            .all(|v| v.is_finite())
    }

    /// Same samples with every time shifted by `offset`.
    pub fn shifted(mut self, offset: f64) -> Self {
        for t in &mut self.times {
            *t += offset;
        }
        self
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for ((t, x), v) in self.times.iter().zip(&self.states).zip(&self.derivatives) {
            write!(out, "{t:?}")?;
            for value in x.iter().chain(v) {
                write!(out, ",{value:?}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim() == CSV_HEADER => {}
            Some((_, Ok(_))) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `{CSV_HEADER}`"),
                })
            }
            Some((_, Err(e))) => return Err(Error::Numeric(e.to_string())),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty trajectory file".into(),
                })
            }
        }
        let mut traj = Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            derivatives: Vec::new(),
        };
        for (i, line) in lines {
            let line = line.map_err(|e| Error::Numeric(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if values.len() != 9 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 9 fields, found {}", values.len()),
                });
            }
            traj.times.push(values[0]);
            traj.states
                .push([values[1], values[2], values[3], values[4]]);
            traj.derivatives
                .push([values[5], values[6], values[7], values[8]]);
        }
        Ok(traj)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

pub const CSV_HEADER: &str = "t,dN4,dN5,dN7,dVCO2,dN4dot,dN5dot,dN7dot,dVCO2dot";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub boundary_residual: f64,
    pub ode_residual: f64,
    pub divergent: bool,
    /// 1-norm condition number of the terminal-matching system.
    pub condition_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative endpoint tolerance, scaled by max(1, |boundary values|).
    pub boundary: f64,
    /// Limit on the condition estimate and on terminal basis magnitudes.
    pub divergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            boundary: 1e-8,
            divergence: 1e12,
        }
    }
}

pub const DEFAULT_STEP_DAYS: f64 = 0.25;

/// Solves with the default tolerances.
pub fn solve(
    a: &SystemMatrix,
    spec: &BoundarySpec,
    horizon_days: f64,
    step_days: f64,
) -> Result<(Trajectory, SolveReport)> {
    solve_with(a, spec, horizon_days, step_days, &Tolerances::default())
}

/// Number of steps on [0, horizon], rejecting steps that do not divide it.
pub fn grid_steps(horizon_days: f64, step_days: f64) -> Result<usize> {
    if !(horizon_days.is_finite() && horizon_days > 0.0) {
        return Err(Error::validation("horizon must be positive"));
    }
    if !(step_days.is_finite() && step_days > 0.0) {
        return Err(Error::validation("step must be positive"));
    }
    let n = (horizon_days / step_days).round();
    if n < 1.0 || (n * step_days - horizon_days).abs() > 1e-9 * horizon_days.max(1.0) {
        return Err(Error::validation(format!(
            "step {step_days} does not divide horizon {horizon_days}"
        )));
    }
    if n > 1e8 {
        return Err(Error::validation("grid too fine"));
    }
    Ok(n as usize)
}

type State8 = [f64; 8];

fn rhs(a: &Matrix4<f64>, y: &State8) -> State8 {
    let x = Vector4::new(y[0], y[1], y[2], y[3]);
    let ax = a * x;
    [y[4], y[5], y[6], y[7], ax[0], ax[1], ax[2], ax[3]]
}

fn axpy(y: &State8, h: f64, k: &State8) -> State8 {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// Classical RK4 on `y' = [v; A x]`, returning every grid point.
fn integrate(a: &Matrix4<f64>, y0: State8, h: f64, steps: usize) -> Vec<State8> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    for _ in 0..steps {
        let k1 = rhs(a, &y);
        let k2 = rhs(a, &axpy(&y, h / 2.0, &k1));
        let k3 = rhs(a, &axpy(&y, h / 2.0, &k2));
        let k4 = rhs(a, &axpy(&y, h, &k3));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        out.push(y);
    }
    out
}

/// Terminal value only, without storing the path.
fn integrate_terminal(a: &Matrix4<f64>, y0: State8, h: f64, steps: usize) -> State8 {
    let mut y = y0;
    for _ in 0..steps {
        let k1 = rhs(a, &y);
        let k2 = rhs(a, &axpy(&y, h / 2.0, &k1));
        let k3 = rhs(a, &axpy(&y, h / 2.0, &k2));
        let k4 = rhs(a, &axpy(&y, h, &k3));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    y
}

fn one_norm(m: &Matrix4<f64>) -> f64 {
    (0..4)
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn divergent_report(condition: f64, message: String) -> SolveReport {
    log::warn!("divergent solve: {message}");
    SolveReport {
        boundary_residual: f64::INFINITY,
        ode_residual: f64::INFINITY,
        divergent: true,
        condition_estimate: condition,
        diagnostic: Some(message),
    }
}

/// Shooting with superposition. A particular solution from (x₀, v = 0) and
/// four basis solutions from (0, eₖ) are integrated to T; the 4×4 system
/// matching the terminal conditions gives v₀, and the final trajectory is
/// integrated once more from (x₀, v₀).
///
/// Divergence (singular or ill-conditioned matching system, huge basis
/// solutions, non-finite values, endpoint mismatch) is reported in the
/// [`SolveReport`], not as an error.
pub fn solve_with(
    a: &SystemMatrix,
    spec: &BoundarySpec,
    horizon_days: f64,
    step_days: f64,
    tol: &Tolerances,
) -> Result<(Trajectory, SolveReport)> {
    if !a.is_finite() {
        return Err(Error::validation("system matrix must be finite"));
    }
    spec.validate()?;
    let n = grid_steps(horizon_days, step_days)?;
    let h = horizon_days / n as f64;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let am = a.to_matrix4();
    let empty = |times: Vec<f64>| Trajectory {
        states: vec![[f64::NAN; 4]; times.len()],
        derivatives: vec![[f64::NAN; 4]; times.len()],
        times,
    };

    let mut y0 = [0.0; 8];
    y0[..4].copy_from_slice(&spec.initial);
    let particular = integrate_terminal(&am, y0, h, n);
    let mut basis = [[0.0; 8]; 4];
    for (k, b) in basis.iter_mut().enumerate() {
        let mut e = [0.0; 8];
        e[4 + k] = 1.0;
        *b = integrate_terminal(&am, e, h, n);
    }

    let magnitude = basis
        .iter()
        .flatten()
        .chain(&particular)
        .fold(0.0f64, |m, v| {
            if v.is_nan() {
                f64::INFINITY
            } else {
                m.max(v.abs())
            }
        });
    if magnitude > tol.divergence {
        let msg = format!(
            "terminal basis magnitude {magnitude:e} exceeds {:e}",
            tol.divergence
        );
        return Ok((empty(times), divergent_report(f64::INFINITY, msg)));
    }

    let mut s = Matrix4::zeros();
    let mut r = Vector4::zeros();
    for (i, cond) in spec.terminal.iter().enumerate() {
        let (row, target) = match cond {
            Terminal::Dirichlet(v) => (i, *v),
            Terminal::NeumannZero => (4 + i, 0.0),
        };
        for k in 0..4 {
            s[(i, k)] = basis[k][row];
        }
        r[i] = target - particular[row];
    }

    let lu = s.lu();
    let Some(inv) = lu.try_inverse() else {
        return Ok((
            empty(times),
            divergent_report(f64::INFINITY, "terminal-matching system is singular".into()),
        ));
    };
    let condition = one_norm(&s) * one_norm(&inv);
    if !condition.is_finite() || condition > tol.divergence {
        let msg = format!(
            "terminal-matching condition {condition:e} exceeds {:e}",
            tol.divergence
        );
        return Ok((empty(times), divergent_report(condition, msg)));
    }
    let Some(v0) = lu.solve(&r) else {
        return Ok((
            empty(times),
            divergent_report(condition, "terminal-matching system is singular".into()),
        ));
    };

    y0[4..].copy_from_slice(v0.as_slice());
    let path = integrate(&am, y0, h, n);
    let traj = Trajectory {
        times,
        states: path.iter().map(|y| [y[0], y[1], y[2], y[3]]).collect(),
        derivatives: path.iter().map(|y| [y[4], y[5], y[6], y[7]]).collect(),
    };

    if !traj.is_finite() {
        return Ok((
            traj,
            divergent_report(condition, "trajectory is not finite".into()),
        ));
    }

    let boundary_residual = boundary_residual(&traj, spec);
    let ode_residual = residual_check(&traj, a);
    let limit = tol.boundary * spec.scale().max(1.0);
    let mut report = SolveReport {
        boundary_residual,
        ode_residual,
        divergent: false,
        condition_estimate: condition,
        diagnostic: None,
    };
    if boundary_residual > limit {
        report.divergent = true;
        report.diagnostic = Some(format!(
            "boundary residual {boundary_residual:e} exceeds tolerance {limit:e}"
        ));
        log::warn!("{}", report.diagnostic.as_deref().unwrap_or_default());
    }
    Ok((traj, report))
}

/// Largest endpoint mismatch: initial values, Dirichlet terminal values and
/// terminal slopes of NeumannZero components.
pub fn boundary_residual(traj: &Trajectory, spec: &BoundarySpec) -> f64 {
    let (Some(first), Some(last), Some(last_v)) =
        (traj.first(), traj.last(), traj.derivatives.last())
    else {
        return f64::INFINITY;
    };
    let mut worst = 0.0f64;
    for k in 0..4 {
        worst = worst.max((first[k] - spec.initial[k]).abs());
        let end = match spec.terminal[k] {
            Terminal::Dirichlet(v) => (last[k] - v).abs(),
            Terminal::NeumannZero => last_v[k].abs(),
        };
        worst = worst.max(end);
    }
    worst
}

/// Max over interior grid points of ‖(x₍ᵢ₊₁₎ − 2xᵢ + x₍ᵢ₋₁₎)/h² − A xᵢ‖∞,
/// with h taken from the grid extent. Fewer than three points give 0.
pub fn residual_check(traj: &Trajectory, a: &SystemMatrix) -> f64 {
    let n = traj.len();
    if n < 3 {
        return 0.0;
    }
    let h = (traj.times[n - 1] - traj.times[0]) / (n - 1) as f64;
    let h2 = h * h;
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let ax = a.apply(&traj.states[i]);
        for (k, axk) in ax.iter().enumerate() {
            let d2 = (traj.states[i + 1][k] - 2.0 * traj.states[i][k] + traj.states[i - 1][k]) / h2;
            let r = (d2 - axk).abs();
            worst = if r.is_nan() {
                f64::INFINITY
            } else {
                worst.max(r)
            };
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Oscillatory,
    Exponential,
    Neutral,
}

/// One eigen-mode of `x'' = A x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub eigenvalue_re: f64,
    pub eigenvalue_im: f64,
    pub kind: ModeKind,
    /// Angular frequency √(−λ) for oscillatory modes, rate √λ for
    /// exponential ones, 0 otherwise.
    pub rate: f64,
    /// State component with the largest share of the eigenvector.
    pub dominant_state: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub modes: Vec<Mode>,
}

impl ModeReport {
    /// Kind of the mode whose eigenvector is dominated by `state`, if any.
    pub fn kind_of_state(&self, state: usize) -> Option<ModeKind> {
        self.modes
            .iter()
            .find(|m| m.dominant_state == state)
            .map(|m| m.kind)
    }

    pub fn has_oscillatory(&self) -> bool {
        self.modes.iter().any(|m| m.kind == ModeKind::Oscillatory)
    }
}

const NEUTRAL_TOL: f64 = 1e-12;

/// Eigenvalues of A with a label per mode: real negative eigenvalues
/// oscillate, real positive ones grow or decay exponentially. Complex pairs
/// are labelled by the sign of their real part.
pub fn classify_modes(a: &SystemMatrix) -> Result<ModeReport> {
    if !a.is_finite() {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let am = a.to_matrix4();
    let schur = am
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::Convergence {
            what: "Schur decomposition",
            iterations: 10_000,
        })?;
    let eig = schur.complex_eigenvalues();
    let scale = am.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tiny = NEUTRAL_TOL * scale;
    let mut modes = Vec::with_capacity(4);
    for lam in eig.iter() {
        let (re, im) = (lam.re, lam.im);
        let kind = if re.abs() <= tiny && im.abs() <= tiny {
            ModeKind::Neutral
        } else if re < 0.0 {
            ModeKind::Oscillatory
        } else {
            ModeKind::Exponential
        };
        let rate = match kind {
            ModeKind::Neutral => 0.0,
            _ => lam.norm().sqrt(),
        };
        modes.push(Mode {
            eigenvalue_re: re,
            eigenvalue_im: im,
            kind,
            rate,
            dominant_state: dominant_component(&am, re),
        });
    }
    Ok(ModeReport { modes })
}

/// Largest-magnitude entry of the right singular vector of (A − λI) with
/// the smallest singular value.
fn dominant_component(a: &Matrix4<f64>, lambda: f64) -> usize {
    let shifted = a - Matrix4::identity() * lambda;
    let svd = shifted.svd(false, true);
    let Some(v_t) = svd.v_t else { return 0 };
    let k = svd.singular_values.imin();
    let row = v_t.row(k);
    (0..4).fold(0, |best, j| {
        if row[j].abs() > row[best].abs() {
            j
        } else {
            best
        }
    })
}
