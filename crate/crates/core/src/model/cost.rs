use serde::{Deserialize, Serialize};

use super::{
    ConstraintLevels, InterdepCoefficients, ModelParameters, StatePoint, UncertaintyWeights,
};

/// Values of the interdependency polynomials at a state point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub vco2: f64,
    pub wp: f64,
    pub hp: f64,
    pub ww: f64,
    pub n3: f64,
    pub n4: f64,
    pub n7: f64,
}

/// Evaluates the quadratic interdependencies term by term as written.
pub fn eval_interdependencies(p: &StatePoint, c: &InterdepCoefficients) -> Derived {
    let (l, n4, n5, n6, n7, n8) = (p.l, p.n4, p.n5, p.n6, p.n7, p.n8);
    let vco2 = c.a1 * l
        + c.a2 * n5
        + c.a3 * n7
        + c.a12 * l * n5
        + c.a23 * n5 * n7
        + c.a31 * l * n7
        + c.a1p * l * l
        + c.a2p * n5 * n5
        + c.a3p * n7 * n7;
    let wp = c.wp0 + c.b1 * n5 + c.b2 * n5 * n5;
    let hp = c.c1 * l + c.c2 * n5 + c.c12 * l * n5 + c.c1p * l * l + c.c2p * n5 * n5;
    let ww = c.d1 * l + c.d2 * n5 + c.d12 * l * n5 + c.d1p * l * l + c.d2p * n5 * n5;
    let n3 = c.alpha1 * n4
        + c.alpha2 * n6
        + c.alpha12 * n4 * n6
        + c.alpha1p * n4 * n4
        + c.alpha2p * n6 * n6;
    let n4_poly =
        c.beta1 * n7 + c.beta2 * n8 + c.beta12 * n7 * n8 + c.beta1p * n7 * n7 + c.beta2p * n8 * n8;
    Derived {
        vco2,
        wp,
        hp,
        ww,
        n3,
        n4: n4_poly,
        n7: c.gamma * p.vco2,
    }
}

/// Unweighted pillar sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PillarCosts {
    pub environment: f64,
    pub social: f64,
    pub economic: f64,
    pub demand: f64,
}

impl PillarCosts {
    pub fn total(&self) -> f64 {
        self.environment + self.social + self.economic + self.demand
    }
}

/// The four pillar sums. V_CO₂, W_p, H_p, W_w, N₃ and N₄ come from the
/// interdependency polynomials; N₅..N₈ and L from the state point; N₁, N₂
/// from the parameters. Every Σᵢ runs over `site_count` identical sites.
pub fn cost_components(p: &ModelParameters, s: &StatePoint, d: &Derived) -> PillarCosts {
    let sites = f64::from(p.site_count);
    let environment = d.vco2 * p.fk(1) + d.hp * p.fk(2) + d.wp * p.fk(3) + d.ww * p.y + s.l;
    let social = p.nk(1) * p.fk(4) + p.nk(2) * p.fk(5) + d.n3 * p.fk(6);
    let economic =
        d.n4 * p.fk(7) - s.n5 * p.fk(8) - p.fk(9) * p.disaster_fund - p.tax_unit_cost * s.n6;
    let demand = p.fk(10) * s.n7 + p.fk(11) * s.n8 + p.misc_cost;
    PillarCosts {
        environment: sites * environment,
        social: sites * social,
        economic: sites * economic,
        demand: sites * demand,
    }
}

/// AHP-weighted free energy F (currency per day).
pub fn free_energy(
    p: &ModelParameters,
    w: &UncertaintyWeights,
    s: &StatePoint,
    d: &Derived,
) -> f64 {
    let env = w.a1 * d.vco2 * p.fk(1)
        + w.a2 * d.hp * p.fk(2)
        + w.a3 * d.wp * p.fk(3)
        + w.a4 * d.ww * p.y
        + w.a5 * s.l;
    let social = w.a6 * p.nk(1) * p.fk(4) + w.a7 * p.nk(2) * p.fk(5) + w.a8 * d.n3 * p.fk(6);
    let economic = w.a9 * d.n4 * p.fk(7)
        - w.a10 * s.n5 * p.fk(8)
        - w.a11 * p.fk(9) * p.disaster_fund
        - w.a12 * p.tax_unit_cost * s.n6;
    let demand = w.a13 * p.fk(10) * s.n7 + w.a14 * p.fk(11) * s.n8 + w.a15 * p.misc_cost;
    f64::from(p.site_count) * (w.eps1 * env + w.eps2 * social + w.eps3 * economic + w.eps4 * demand)
}

/// Lagrangian of the constrained problem:
/// `F − λ₁(N₁f₄ + N₂f₅ − C) − λ₂(N₄f₇ − E) − λ₃(V_CO₂f₁ − V) − λ₄(N₃f₆ − R)`.
pub fn lagrangian(
    f: f64,
    w: &UncertaintyWeights,
    p: &ModelParameters,
    d: &Derived,
    levels: &ConstraintLevels,
) -> f64 {
    f - w.lam1 * (p.nk(1) * p.fk(4) + p.nk(2) * p.fk(5) - levels.c_wages)
        - w.lam2 * (d.n4 * p.fk(7) - levels.e_earnings)
        - w.lam3 * (d.vco2 * p.fk(1) - levels.v_co2_cost)
        - w.lam4 * (d.n3 * p.fk(6) - levels.r_csr)
}
