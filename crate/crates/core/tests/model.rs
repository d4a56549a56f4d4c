mod common;

use common::{bundled_inputs, bundled_json, num};
use proptest::prelude::*;
use scn_core::model::{
    cost_components, eval_interdependencies, free_energy, gradient, lagrangian, ConstraintLevels,
    GradientComponent, InterdepCoefficients, ModelParameters, StatePoint, UncertaintyWeights,
};

fn eval_f(
    p: &ModelParameters,
    w: &UncertaintyWeights,
    c: &InterdepCoefficients,
    s: &StatePoint,
) -> f64 {
    free_energy(p, w, s, &eval_interdependencies(s, c))
}

/// Central difference with step relative to the magnitude of the variable.
fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    // F is at most quadratic in each state, so a wide central step is exact
    // and keeps cancellation against |F| ~ 1e8 small.
    let h = 0.5 * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn assert_fd(label: &str, analytic: f64, numeric: f64) {
    let tol = 1e-6 * analytic.abs().max(1.0);
    assert!(
        (analytic - numeric).abs() <= tol,
        "{label}: closed form {analytic} vs finite difference {numeric}"
    );
}

#[test]
fn gradient_matches_finite_differences_where_exact() {
    let inp = bundled_inputs();
    let (p, w, c, s) = (&inp.params, &inp.weights, &inp.coefficients, &inp.state);
    let g = gradient(p, w, c, s).unwrap();

    let d_n1 = fd(
        |x| {
            let mut q = p.clone();
            q.n[0] = x;
            eval_f(&q, w, c, s)
        },
        p.nk(1),
    );
    assert_fd("N1", g.get(GradientComponent::N1), d_n1);
    let d_n2 = fd(
        |x| {
            let mut q = p.clone();
            q.n[1] = x;
            eval_f(&q, w, c, s)
        },
        p.nk(2),
    );
    assert_fd("N2", g.get(GradientComponent::N2), d_n2);
    let d_n6 = fd(|x| eval_f(p, w, c, &StatePoint { n6: x, ..*s }), s.n6);
    assert_fd("N6", g.get(GradientComponent::N6), d_n6);
    let d_n7 = fd(|x| eval_f(p, w, c, &StatePoint { n7: x, ..*s }), s.n7);
    assert_fd("N7", g.get(GradientComponent::N7), d_n7);
    let d_n8 = fd(|x| eval_f(p, w, c, &StatePoint { n8: x, ..*s }), s.n8);
    assert_fd("N8", g.get(GradientComponent::N8), d_n8);
}

#[test]
fn gradient_n1_value() {
    // ε₂A₆f₄ with f₄ = 60000/3000.
    let inp = bundled_inputs();
    let g = gradient(&inp.params, &inp.weights, &inp.coefficients, &inp.state).unwrap();
    assert!((g.get(GradientComponent::N1) - 0.0648554).abs() < 1e-7);
    assert!((g.d_misc_cost - 0.08024 * 0.1906).abs() < 1e-15);
}

#[test]
fn polynomials_match_horner_evaluation() {
    let inp = bundled_inputs();
    let c = &inp.coefficients;
    let s = StatePoint {
        n4: 1.5,
        n5: 3.0,
        n7: 2.0,
        vco2: 4.0,
        l: 0.7,
        n6: 8.0,
        n8: 1.25,
    };
    let d = eval_interdependencies(&s, c);
    // V as a polynomial in L with coefficients in N5, N7.
    let v = (c.a1p * s.l + (c.a1 + c.a12 * s.n5 + c.a31 * s.n7)) * s.l
        + (c.a2p * s.n5 + c.a2 + c.a23 * s.n7) * s.n5
        + (c.a3p * s.n7 + c.a3) * s.n7;
    assert!((d.vco2 - v).abs() < 1e-12);
    let wp = c.wp0 + (c.b1 + c.b2 * s.n5) * s.n5;
    assert!((d.wp - wp).abs() < 1e-12);
    let hp = (c.c1 + c.c12 * s.n5 + c.c1p * s.l) * s.l + (c.c2 + c.c2p * s.n5) * s.n5;
    assert!((d.hp - hp).abs() < 1e-12);
    let n3 = (c.alpha1 + c.alpha12 * s.n6 + c.alpha1p * s.n4) * s.n4
        + (c.alpha2 + c.alpha2p * s.n6) * s.n6;
    assert!((d.n3 - n3).abs() < 1e-12);
    let n4 =
        (c.beta1 + c.beta12 * s.n8 + c.beta1p * s.n7) * s.n7 + (c.beta2 + c.beta2p * s.n8) * s.n8;
    assert!((d.n4 - n4).abs() < 1e-12);
    assert!((d.n7 - c.gamma * s.vco2).abs() < 1e-15);
}

#[test]
fn free_energy_matches_hand_sum() {
    let j = bundled_json();
    let u = 1.0 / 3000.0;
    let f = |k: usize| num(&j, "parameters", &format!("f{k}")) * u;
    let a = |k: usize| num(&j, "weights", &format!("a{k}"));
    let e = |k: usize| num(&j, "weights", &format!("eps{k}"));
    let n = |k: usize| num(&j, "parameters", &format!("n{k}"));

    let inp = bundled_inputs();
    let s = inp.state;
    let d = eval_interdependencies(&s, &inp.coefficients);
    let misc = num(&j, "parameters", "misc_cost") * u;
    let g = num(&j, "parameters", "disaster_fund") * u;
    let y = num(&j, "parameters", "y") * u;
    let env = a(1) * d.vco2 * f(1)
        + a(2) * d.hp * f(2)
        + a(3) * d.wp * f(3)
        + a(4) * d.ww * y
        + a(5) * s.l;
    let social = a(6) * n(1) * f(4) + a(7) * n(2) * f(5) + a(8) * d.n3 * f(6);
    let econ = a(9) * d.n4 * f(7) - a(10) * s.n5 * f(8) - a(11) * f(9) * g;
    let demand = a(13) * f(10) * s.n7 + a(14) * f(11) * s.n8 + a(15) * misc;
    let expected = e(1) * env + e(2) * social + e(3) * econ + e(4) * demand;
    let got = free_energy(&inp.params, &inp.weights, &s, &d);
    assert!((got - expected).abs() <= 1e-12 * expected.abs());
}

#[test]
fn site_count_scales_pillars() {
    let inp = bundled_inputs();
    let d = eval_interdependencies(&inp.state, &inp.coefficients);
    let one = cost_components(&inp.params, &inp.state, &d);
    let mut p3 = inp.params.clone();
    p3.site_count = 3;
    let three = cost_components(&p3, &inp.state, &d);
    assert!((three.total() - 3.0 * one.total()).abs() < 1e-9 * one.total().abs());
    let f1 = free_energy(&inp.params, &inp.weights, &inp.state, &d);
    let f3 = free_energy(&p3, &inp.weights, &inp.state, &d);
    assert!((f3 - 3.0 * f1).abs() < 1e-9 * f1.abs());
}

#[test]
fn lagrangian_vanishing_constraints() {
    let inp = bundled_inputs();
    let d = eval_interdependencies(&inp.state, &inp.coefficients);
    let f = free_energy(&inp.params, &inp.weights, &inp.state, &d);
    let levels = ConstraintLevels::at_operating_point(&inp.params, &d);
    let l = lagrangian(f, &inp.weights, &inp.params, &d, &levels);
    assert!((l - f).abs() < 1e-9 * f.abs());
}

#[test]
fn zero_denominator_is_reported() {
    let inp = bundled_inputs();
    let mut c = inp.coefficients.clone();
    c.alpha1 = 0.0;
    c.alpha12 = 0.0;
    c.alpha1p = 0.0;
    let err = gradient(&inp.params, &inp.weights, &c, &inp.state).unwrap_err();
    assert!(err.to_string().contains("α₁ + α₁₂N₆ + 2α'₁N₄"), "{err}");
}

proptest! {
    #[test]
    fn exact_components_hold_everywhere(
        n6 in 0.5f64..20.0, n7 in 0.5f64..10.0, n8 in 0.5f64..10.0,
        wscale in 0.1f64..1.0,
    ) {
        let inp = bundled_inputs();
        let mut w = inp.weights.clone();
        w.a8 *= wscale;
        w.a13 *= wscale;
        let s = StatePoint { n6, n7, n8, ..inp.state };
        let (p, c) = (&inp.params, &inp.coefficients);
        let g = gradient(p, &w, c, &s).unwrap();
        let d_n6 = fd(|x| eval_f(p, &w, c, &StatePoint { n6: x, ..s }), n6);
        let d_n7 = fd(|x| eval_f(p, &w, c, &StatePoint { n7: x, ..s }), n7);
        let d_n8 = fd(|x| eval_f(p, &w, c, &StatePoint { n8: x, ..s }), n8);
        prop_assert!((g.get(GradientComponent::N6) - d_n6).abs() <= 1e-5 * d_n6.abs().max(1.0));
        prop_assert!((g.get(GradientComponent::N7) - d_n7).abs() <= 1e-5 * d_n7.abs().max(1.0));
        prop_assert!((g.get(GradientComponent::N8) - d_n8).abs() <= 1e-5 * d_n8.abs().max(1.0));
    }

    #[test]
    fn free_energy_linear_in_pillar_weights(k in 0.0f64..3.0) {
        let inp = bundled_inputs();
        let d = eval_interdependencies(&inp.state, &inp.coefficients);
        let mut w = inp.weights.clone();
        for e in [&mut w.eps1, &mut w.eps2, &mut w.eps3, &mut w.eps4] {
            *e *= k;
        }
        let base = free_energy(&inp.params, &inp.weights, &inp.state, &d);
        let scaled = free_energy(&inp.params, &w, &inp.state, &d);
        prop_assert!((scaled - k * base).abs() <= 1e-9 * base.abs().max(1.0));
    }
}
