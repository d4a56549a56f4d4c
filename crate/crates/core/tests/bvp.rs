mod common;

use std::f64::consts::PI;

use common::bundled_inputs;
use proptest::prelude::*;
use scn_core::bvp::{
    classify_modes, residual_check, solve, BoundarySpec, ModeKind, Terminal, Trajectory,
};
use scn_core::dynamics::{MatrixKind, SystemMatrix};

fn scalar(a: f64) -> SystemMatrix {
    SystemMatrix::diagonal(MatrixKind::Constrained, [a; 4])
}

fn max_err(traj: &Trajectory, exact: impl Fn(f64) -> f64) -> f64 {
    traj.times
        .iter()
        .zip(&traj.states)
        .flat_map(|(t, x)| {
            let e = exact(*t);
            x.iter().map(move |v| (v - e).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn growth_problem_matches_sinh() {
    let spec = BoundarySpec::dirichlet([0.0; 4], [1.0; 4]);
    let (traj, report) = solve(&scalar(1.0), &spec, 1.0, 1e-3).unwrap();
    assert!(!report.divergent);
    let err = max_err(&traj, |t| t.sinh() / 1f64.sinh());
    assert!(err <= 1e-6, "max error {err}");
    let mid = traj.states[500][0];
    assert!((mid - 0.443409).abs() < 1e-6, "{mid}");
}

#[test]
fn oscillator_problem_matches_sine() {
    let spec = BoundarySpec::dirichlet([0.0; 4], [1.0; 4]);
    let (traj, report) = solve(&scalar(-PI * PI), &spec, 0.5, 1e-3).unwrap();
    assert!(!report.divergent);
    let err = max_err(&traj, |t| (PI * t).sin());
    assert!(err <= 1e-6, "max error {err}");
}

#[test]
fn free_particle_is_a_straight_line() {
    let spec = BoundarySpec::dirichlet([0.0, 1.0, -2.0, 3.0], [1.0, 1.0, 2.0, -3.0]);
    let (traj, report) = solve(&scalar(0.0), &spec, 2.0, 0.01).unwrap();
    assert!(!report.divergent);
    let mid = traj.states[100];
    // Exact up to rounding accumulated over the RK4 steps.
    assert!((mid[0] - 0.5).abs() <= 1e-15, "{}", mid[0]);
    assert!((mid[2] - 0.0).abs() < 1e-12);
    assert!((mid[3] - 0.0).abs() < 1e-12);
}

#[test]
fn free_particle_with_flat_end_stays_put() {
    let spec = BoundarySpec {
        initial: [1.5, -2.0, 0.0, 7.0],
        terminal: [Terminal::NeumannZero; 4],
    };
    let (traj, report) = solve(&scalar(0.0), &spec, 10.0, 0.5).unwrap();
    assert!(!report.divergent);
    for x in &traj.states {
        for k in 0..4 {
            assert!((x[k] - spec.initial[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn mixed_terminal_conditions_are_met() {
    let a = bundled_inputs().operator(true).unwrap();
    let spec = BoundarySpec {
        initial: [0.3, 76.0, 2.0, 2.86],
        terminal: [
            Terminal::Dirichlet(5.0),
            Terminal::Dirichlet(84.0),
            Terminal::NeumannZero,
            Terminal::Dirichlet(2.0),
        ],
    };
    let (traj, report) = solve(&a, &spec, 900.0, 0.25).unwrap();
    assert!(!report.divergent, "{:?}", report.diagnostic);
    assert!(report.boundary_residual <= 1e-8 * 84.0);
    let v_end = traj.derivatives.last().unwrap()[2];
    assert!(v_end.abs() <= 1e-8 * 84.0, "{v_end}");
}

#[test]
fn zero_data_gives_zero_solution() {
    let a = bundled_inputs().operator(false).unwrap();
    let (traj, report) = solve(&a, &BoundarySpec::zero(), 900.0, 0.25).unwrap();
    assert!(!report.divergent);
    let worst = traj
        .states
        .iter()
        .chain(&traj.derivatives)
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn halving_the_step_quarters_the_residual() {
    let spec = BoundarySpec::dirichlet([0.0; 4], [1.0; 4]);
    let a = scalar(1.0);
    let (_, coarse) = solve(&a, &spec, 1.0, 0.02).unwrap();
    let (_, fine) = solve(&a, &spec, 1.0, 0.01).unwrap();
    let ratio = coarse.ode_residual / fine.ode_residual;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn invalid_grids_are_rejected() {
    let a = scalar(0.0);
    let spec = BoundarySpec::zero();
    assert!(solve(&a, &spec, 1.0, 0.3).is_err());
    assert!(solve(&a, &spec, 0.0, 0.1).is_err());
    assert!(solve(&a, &spec, 1.0, -0.1).is_err());
    let mut bad = a;
    bad.entries[0][0] = f64::NAN;
    assert!(solve(&bad, &spec, 1.0, 0.1).is_err());
}

#[test]
fn resonant_problem_is_flagged_not_raised() {
    // x'' = -π²x has a nontrivial solution vanishing at 0 and 1.
    let spec = BoundarySpec::dirichlet([0.0; 4], [1.0; 4]);
    let (_, report) = solve(&scalar(-PI * PI), &spec, 1.0, 1e-3).unwrap();
    assert!(report.divergent);
    assert!(report.diagnostic.is_some());
}

fn sampled(f: impl Fn(f64) -> f64, n: usize, t_end: f64) -> Trajectory {
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * t_end / n as f64).collect();
    Trajectory {
        states: times.iter().map(|t| [f(*t); 4]).collect(),
        derivatives: vec![[0.0; 4]; times.len()],
        times,
    }
}

#[test]
fn residual_of_exact_line_is_zero() {
    let traj = sampled(|t| 3.0 * t - 1.0, 100, 1.0);
    assert!(residual_check(&traj, &scalar(0.0)) <= 1e-10);
}

#[test]
fn residual_of_sampled_sinh_is_truncation_sized() {
    let traj = sampled(|t| t.sinh() / 1f64.sinh(), 1000, 1.0);
    let r = residual_check(&traj, &scalar(1.0));
    assert!(r <= 1e-5, "{r}");
}

#[test]
fn residual_exposes_a_corrupted_point() {
    let mut traj = sampled(|t| t.sinh() / 1f64.sinh(), 1000, 1.0);
    traj.states[400][2] += 1.0;
    let r = residual_check(&traj, &scalar(1.0));
    assert!(r > 1e3, "{r}");
}

#[test]
fn diagonal_oscillators_report_their_frequencies() {
    let a = SystemMatrix::diagonal(MatrixKind::Constrained, [-1.0, -4.0, -9.0, -16.0]);
    let report = classify_modes(&a).unwrap();
    let mut rates: Vec<(usize, f64)> = report
        .modes
        .iter()
        .map(|m| {
            assert_eq!(m.kind, ModeKind::Oscillatory);
            (m.dominant_state, m.rate)
        })
        .collect();
    rates.sort_by_key(|r| r.0);
    for (k, (state, rate)) in rates.into_iter().enumerate() {
        assert_eq!(state, k);
        assert!((rate - (k + 1) as f64).abs() < 1e-12, "{rate}");
    }
}

#[test]
fn identity_gives_unit_growth_modes() {
    let report = classify_modes(&scalar(1.0)).unwrap();
    assert_eq!(report.modes.len(), 4);
    for m in &report.modes {
        assert_eq!(m.kind, ModeKind::Exponential);
        assert!((m.rate - 1.0).abs() < 1e-12);
    }
}

/// Eigenvalues of a real 4×4 with real spectrum by shifted QR iteration with
/// Gram-Schmidt factorisation and deflation from the bottom.
fn qr_eigenvalues(a: [[f64; 4]; 4]) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
    let mut out = Vec::new();
    while !m.is_empty() {
        let n = m.len();
        if n == 1 {
            out.push(m[0][0]);
            break;
        }
        let mut converged = false;
        for _ in 0..20_000 {
            let off = m[n - 1][..n - 1]
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max);
            if off <= 1e-14 * m[n - 1][n - 1].abs().max(1e-300) {
                converged = true;
                break;
            }
            let mu = m[n - 1][n - 1];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] -= mu;
            }
            // Columns of Q by modified Gram-Schmidt, R upper triangular.
            let mut q = vec![vec![0.0; n]; n];
            let mut r = vec![vec![0.0; n]; n];
            for j in 0..n {
                let mut v: Vec<f64> = (0..n).map(|i| m[i][j]).collect();
                for k in 0..j {
                    let d: f64 = (0..n).map(|i| q[i][k] * v[i]).sum();
                    r[k][j] = d;
                    for i in 0..n {
                        v[i] -= d * q[i][k];
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                r[j][j] = norm;
                for i in 0..n {
                    q[i][j] = if norm > 0.0 {
                        v[i] / norm
                    } else if i == j {
                        1.0
                    } else {
                        0.0
                    };
                }
            }
            for i in 0..n {
                for j in 0..n {
                    m[i][j] = (0..n).map(|k| r[i][k] * q[k][j]).sum::<f64>()
                        + if i == j { mu } else { 0.0 };
                }
            }
        }
        assert!(converged, "QR oracle did not converge");
        out.push(m[n - 1][n - 1]);
        m.truncate(n - 1);
        for row in &mut m {
            row.truncate(n - 1);
        }
    }
    out
}

fn sign_pattern(values: impl IntoIterator<Item = f64>) -> (usize, usize) {
    values.into_iter().fold((0, 0), |(pos, neg), v| {
        if v > 0.0 {
            (pos + 1, neg)
        } else if v < 0.0 {
            (pos, neg + 1)
        } else {
            (pos, neg)
        }
    })
}

#[test]
fn assembled_modes_agree_with_qr_oracle() {
    let inp = bundled_inputs();
    for constrained in [false, true] {
        for a in [
            inp.matrix(constrained).unwrap(),
            inp.operator(constrained).unwrap(),
        ] {
            let oracle = qr_eigenvalues(a.entries);
            let report = classify_modes(&a).unwrap();
            for m in &report.modes {
                assert!(m.eigenvalue_im.abs() < 1e-12);
                let nearest = oracle
                    .iter()
                    .map(|e| (e - m.eigenvalue_re).abs())
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    nearest <= 1e-9 * m.eigenvalue_re.abs().max(1e-12),
                    "{} not in {oracle:?}",
                    m.eigenvalue_re
                );
            }
            let expected = sign_pattern(oracle.iter().copied());
            let exp_count = report
                .modes
                .iter()
                .filter(|m| m.kind == ModeKind::Exponential)
                .count();
            let osc_count = report
                .modes
                .iter()
                .filter(|m| m.kind == ModeKind::Oscillatory)
                .count();
            assert_eq!((exp_count, osc_count), expected);
        }
    }
}

fn small_matrix() -> impl Strategy<Value = SystemMatrix> {
    prop::collection::vec(-2.0f64..2.0, 16).prop_map(|v| {
        let mut m = SystemMatrix::zeros(MatrixKind::Constrained);
        for (i, x) in v.into_iter().enumerate() {
            m.entries[i / 4][i % 4] = x;
        }
        m
    })
}

fn boundary(neumann: [bool; 4]) -> impl Strategy<Value = BoundarySpec> {
    (
        prop::array::uniform4(-5.0f64..5.0),
        prop::array::uniform4(-5.0f64..5.0),
    )
        .prop_map(move |(initial, end)| BoundarySpec {
            initial,
            terminal: std::array::from_fn(|k| {
                if neumann[k] {
                    Terminal::NeumannZero
                } else {
                    Terminal::Dirichlet(end[k])
                }
            }),
        })
}

fn add(a: &BoundarySpec, b: &BoundarySpec) -> BoundarySpec {
    BoundarySpec {
        initial: std::array::from_fn(|k| a.initial[k] + b.initial[k]),
        terminal: std::array::from_fn(|k| match (a.terminal[k], b.terminal[k]) {
            (Terminal::Dirichlet(x), Terminal::Dirichlet(y)) => Terminal::Dirichlet(x + y),
            _ => Terminal::NeumannZero,
        }),
    }
}

fn scale(a: &BoundarySpec, s: f64) -> BoundarySpec {
    BoundarySpec {
        initial: a.initial.map(|v| v * s),
        terminal: a.terminal.map(|t| match t {
            Terminal::Dirichlet(x) => Terminal::Dirichlet(x * s),
            n => n,
        }),
    }
}

fn magnitude(t: &Trajectory) -> f64 {
    t.states
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solutions_superpose(
        a in small_matrix(),
        (s1, s2) in any::<[bool; 4]>().prop_flat_map(|n| (boundary(n), boundary(n))),
    ) {
        let (t1, r1) = solve(&a, &s1, 1.0, 0.01).unwrap();
        let (t2, r2) = solve(&a, &s2, 1.0, 0.01).unwrap();
        let (t12, r12) = solve(&a, &add(&s1, &s2), 1.0, 0.01).unwrap();
        prop_assume!(!r1.divergent && !r2.divergent && !r12.divergent);
        let tol = 1e-9 * magnitude(&t1).max(magnitude(&t2)).max(1.0);
        for i in 0..t12.len() {
            for k in 0..4 {
                let d = t12.states[i][k] - t1.states[i][k] - t2.states[i][k];
                prop_assert!(d.abs() <= tol, "point {} component {}: {}", i, k, d);
            }
        }
    }

    #[test]
    fn solutions_scale(
        a in small_matrix(),
        spec in any::<[bool; 4]>().prop_flat_map(boundary),
        s in -10.0f64..10.0,
    ) {
        let (t1, r1) = solve(&a, &spec, 1.0, 0.01).unwrap();
        let (ts, rs) = solve(&a, &scale(&spec, s), 1.0, 0.01).unwrap();
        prop_assume!(!r1.divergent && !rs.divergent);
        let tol = 1e-9 * (s.abs() * magnitude(&t1)).max(1.0);
        for i in 0..ts.len() {
            for k in 0..4 {
                prop_assert!((ts.states[i][k] - s * t1.states[i][k]).abs() <= tol);
            }
        }
    }

    #[test]
    fn dirichlet_endpoints_are_met(
        a in small_matrix(),
        spec in any::<[bool; 4]>().prop_flat_map(boundary),
    ) {
        let (t, r) = solve(&a, &spec, 1.0, 0.01).unwrap();
        prop_assume!(!r.divergent);
        let limit = 1e-8 * 5.0;
        let (first, last) = (t.first().unwrap(), t.last().unwrap());
        for k in 0..4 {
            prop_assert!((first[k] - spec.initial[k]).abs() <= limit);
            match spec.terminal[k] {
                Terminal::Dirichlet(v) => prop_assert!((last[k] - v).abs() <= limit),
                Terminal::NeumannZero => prop_assert!(t.derivatives.last().unwrap()[k].abs() <= limit),
            }
        }
    }
}
