//! Symbols of the weighted supply-chain cost ("free energy") model.
//!
//! Monetary inputs arrive as yearly figures and are converted to the daily
//! model scale exactly once, in [`ParameterInputs::to_daily`]. Counts are
//! instantaneous quantities and are never scaled.

mod cost;
mod gradient;

use serde::{Deserialize, Serialize};

use crate::ahp::{derive_compound, derive_squared};
use crate::error::{Error, Result};

pub use cost::{
    cost_components, eval_interdependencies, free_energy, lagrangian, Derived, PillarCosts,
};
pub use gradient::{gradient, Gradient, GradientComponent};

/// Working hours per year (10 h × 300 days); yearly money divided by this gives daily.
pub const DEFAULT_SCALE_U: f64 = 1.0 / 3000.0;

/// Yearly parameter figures as they appear in the configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterInputs {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f5: f64,
    pub f6: f64,
    pub f7: f64,
    pub f8: f64,
    pub f9: f64,
    pub f10: f64,
    pub f11: f64,
    pub y: f64,
    pub misc_cost: f64,
    pub legislative_cost: f64,
    #[serde(default)]
    pub tax_unit_cost: f64,
    pub disaster_fund: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
    pub n5: f64,
    pub n6: f64,
    pub n7: f64,
    pub n8: f64,
    #[serde(default = "default_site_count")]
    pub site_count: u32,
    #[serde(default = "default_scale_u")]
    pub scale_u: f64,
}

fn default_site_count() -> u32 {
    1
}

fn default_scale_u() -> f64 {
    DEFAULT_SCALE_U
}

impl ParameterInputs {
    /// Applies the daily scale to every monetary figure.
    pub fn to_daily(&self) -> Result<ModelParameters> {
        let u = self.scale_u;
        if !(u.is_finite() && u > 0.0) {
            return Err(Error::validation("scale_u must be positive"));
        }
        let p = ModelParameters {
            f: [
                self.f1 * u,
                self.f2 * u,
                self.f3 * u,
                self.f4 * u,
                self.f5 * u,
                self.f6 * u,
                self.f7 * u,
                self.f8 * u,
                self.f9 * u,
                self.f10 * u,
                self.f11 * u,
            ],
            y: self.y * u,
            misc_cost: self.misc_cost * u,
            legislative_cost: self.legislative_cost * u,
            tax_unit_cost: self.tax_unit_cost * u,
            disaster_fund: self.disaster_fund * u,
            n: [
                self.n1, self.n2, self.n3, self.n4, self.n5, self.n6, self.n7, self.n8,
            ],
            site_count: self.site_count,
            scale_u: u,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Model parameters on the daily scale.
///
/// `f[k]` holds f₍ₖ₊₁₎ and `n[k]` holds N₍ₖ₊₁₎, so `f[0]` is f₁ and `n[3]` is N₄.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub f: [f64; 11],
    pub y: f64,
    pub misc_cost: f64,
    pub legislative_cost: f64,
    pub tax_unit_cost: f64,
    pub disaster_fund: f64,
    pub n: [f64; 8],
    pub site_count: u32,
    pub scale_u: f64,
}

impl ModelParameters {
    /// All costs and counts zero, one site.
    pub fn zero() -> Self {
        Self {
            f: [0.0; 11],
            y: 0.0,
            misc_cost: 0.0,
            legislative_cost: 0.0,
            tax_unit_cost: 0.0,
            disaster_fund: 0.0,
            n: [0.0; 8],
            site_count: 1,
            scale_u: DEFAULT_SCALE_U,
        }
    }

    /// f₍ₖ₎ with the 1-based index used throughout the model.
    pub fn fk(&self, k: usize) -> f64 {
        self.f[k - 1]
    }

    /// N₍ₖ₎ with the 1-based index used throughout the model.
    pub fn nk(&self, k: usize) -> f64 {
        self.n[k - 1]
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.n.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::validation(format!(
                "count N{} must be non-negative",
                k + 1
            )));
        }
        if !(self.scale_u.is_finite() && self.scale_u > 0.0) {
            return Err(Error::validation("scale_u must be positive"));
        }
        if self.site_count == 0 {
            return Err(Error::validation("site_count must be at least 1"));
        }
        let money = self.f.iter().chain([
            &self.y,
            &self.misc_cost,
            &self.legislative_cost,
            &self.tax_unit_cost,
            &self.disaster_fund,
        ]);
        if money.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("monetary parameters must be finite"));
        }
        Ok(())
    }
}

/// AHP weights of the cost model: alternatives A₁..A₁₅, pillars ε₁..ε₄ and
/// the Lagrange multiplier weights λ₁..λ₄.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyWeights {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub a7: f64,
    pub a8: f64,
    pub a9: f64,
    pub a10: f64,
    pub a11: f64,
    pub a12: f64,
    pub a13: f64,
    pub a14: f64,
    pub a15: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub eps4: f64,
    pub lam1: f64,
    pub lam2: f64,
    pub lam3: f64,
    pub lam4: f64,
}

impl UncertaintyWeights {
    pub fn zero() -> Self {
        Self::uniform(0.0, 0.0, 0.0)
    }

    /// Every A set to `a`, every ε to `eps` and every λ to `lam`.
    pub fn uniform(a: f64, eps: f64, lam: f64) -> Self {
        Self {
            a1: a,
            a2: a,
            a3: a,
            a4: a,
            a5: a,
            a6: a,
            a7: a,
            a8: a,
            a9: a,
            a10: a,
            a11: a,
            a12: a,
            a13: a,
            a14: a,
            a15: a,
            eps1: eps,
            eps2: eps,
            eps3: eps,
            eps4: eps,
            lam1: lam,
            lam2: lam,
            lam3: lam,
            lam4: lam,
        }
    }

    pub fn alternatives(&self) -> [f64; 15] {
        [
            self.a1, self.a2, self.a3, self.a4, self.a5, self.a6, self.a7, self.a8, self.a9,
            self.a10, self.a11, self.a12, self.a13, self.a14, self.a15,
        ]
    }

    pub fn pillars(&self) -> [f64; 4] {
        [self.eps1, self.eps2, self.eps3, self.eps4]
    }

    pub fn multipliers(&self) -> [f64; 4] {
        [self.lam1, self.lam2, self.lam3, self.lam4]
    }

    /// Checks every weight lies in [0, 1]. The normalisation and λ = ε
    /// checks are separate ([`Self::check_ahp_normalisation`]) because
    /// zeroed or unit weights are legitimate inputs for analysis.
    pub fn validate(&self) -> Result<()> {
        let all = self
            .alternatives()
            .into_iter()
            .chain(self.pillars())
            .chain(self.multipliers());
        if all.into_iter().any(|w| !(0.0..=1.0).contains(&w)) {
            return Err(Error::validation("weights must lie in [0, 1]"));
        }
        Ok(())
    }

    /// ε sums to one within 1e-3 and λₖ = εₖ.
    pub fn check_ahp_normalisation(&self) -> Result<()> {
        let total: f64 = self.pillars().iter().sum();
        if (total - 1.0).abs() > 1e-3 {
            return Err(Error::validation(format!(
                "pillar weights sum to {total}, expected 1"
            )));
        }
        if self
            .pillars()
            .iter()
            .zip(self.multipliers())
            .any(|(e, l)| (e - l).abs() > 1e-12)
        {
            return Err(Error::validation(
                "multiplier weights must equal pillar weights",
            ));
        }
        Ok(())
    }
}

/// Coefficients of the quadratic interdependency polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterdepCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a12: f64,
    pub a23: f64,
    pub a31: f64,
    pub a1p: f64,
    pub a2p: f64,
    pub a3p: f64,
    #[serde(default)]
    pub wp0: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c12: f64,
    pub c1p: f64,
    pub c2p: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
    pub d1p: f64,
    pub d2p: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha12: f64,
    pub alpha1p: f64,
    pub alpha2p: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta12: f64,
    pub beta1p: f64,
    pub beta2p: f64,
    pub gamma: f64,
}

impl InterdepCoefficients {
    pub fn zero() -> Self {
        Self::from_bases(&InterdepBases::default()).expect("zero bases are valid")
    }

    /// Builds compound coefficients as products of their bases and quadratic
    /// coefficients as square roots of their bases.
    pub fn from_bases(b: &InterdepBases) -> Result<Self> {
        Ok(Self {
            a1: b.a1,
            a2: b.a2,
            a3: b.a3,
            a12: derive_compound(b.a1, b.a2),
            a23: derive_compound(b.a2, b.a3),
            a31: derive_compound(b.a3, b.a1),
            a1p: derive_squared(b.a1)?,
            a2p: derive_squared(b.a2)?,
            a3p: derive_squared(b.a3)?,
            wp0: b.wp0,
            b1: b.b1,
            b2: derive_squared(b.b1)?,
            c1: b.c1,
            c2: b.c2,
            c12: derive_compound(b.c1, b.c2),
            c1p: derive_squared(b.c1)?,
            c2p: derive_squared(b.c2)?,
            d1: b.d1,
            d2: b.d2,
            d12: derive_compound(b.d1, b.d2),
            d1p: derive_squared(b.d1)?,
            d2p: derive_squared(b.d2)?,
            alpha1: b.alpha1,
            alpha2: b.alpha2,
            alpha12: derive_compound(b.alpha1, b.alpha2),
            alpha1p: derive_squared(b.alpha1)?,
            alpha2p: derive_squared(b.alpha2)?,
            beta1: b.beta1,
            beta2: b.beta2,
            beta12: derive_compound(b.beta1, b.beta2),
            beta1p: derive_squared(b.beta1)?,
            beta2p: derive_squared(b.beta2)?,
            gamma: b.gamma,
        })
    }

    /// Names and values of the compound (product-rule) coefficients.
    pub fn compound_entries(&self) -> [(&'static str, f64); 7] {
        [
            ("a12", self.a12),
            ("a23", self.a23),
            ("a31", self.a31),
            ("c12", self.c12),
            ("d12", self.d12),
            ("alpha12", self.alpha12),
            ("beta12", self.beta12),
        ]
    }

    /// Names and values of the quadratic (square-root rule) coefficients.
    pub fn squared_entries(&self) -> [(&'static str, f64); 12] {
        [
            ("a1p", self.a1p),
            ("a2p", self.a2p),
            ("a3p", self.a3p),
            ("b2", self.b2),
            ("c1p", self.c1p),
            ("c2p", self.c2p),
            ("d1p", self.d1p),
            ("d2p", self.d2p),
            ("alpha1p", self.alpha1p),
            ("alpha2p", self.alpha2p),
            ("beta1p", self.beta1p),
            ("beta2p", self.beta2p),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let json = serde_json::to_value(self)?;
        let finite = json
            .as_object()
            .map(|o| o.values().all(|v| v.as_f64().is_some_and(f64::is_finite)))
            .unwrap_or(false);
        if !finite {
            return Err(Error::validation(
                "interdependency coefficients must be finite",
            ));
        }
        Ok(())
    }
}

/// Layered-AHP base weights from which [`InterdepCoefficients`] are derived.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterdepBases {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub wp0: f64,
    pub b1: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
}

/// Expansion point for derivative and matrix-element evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePoint {
    pub n4: f64,
    pub n5: f64,
    pub n7: f64,
    pub vco2: f64,
    pub l: f64,
    pub n6: f64,
    pub n8: f64,
}

impl StatePoint {
    pub fn zero() -> Self {
        Self {
            n4: 0.0,
            n5: 0.0,
            n7: 0.0,
            vco2: 0.0,
            l: 0.0,
            n6: 0.0,
            n8: 0.0,
        }
    }

    /// Operating point of an SME: its counts, its daily legislative cost and
    /// the emission volume implied by the V_CO₂ polynomial there.
    pub fn operating_point(p: &ModelParameters, c: &InterdepCoefficients) -> Self {
        let mut s = Self {
            n4: p.nk(4),
            n5: p.nk(5),
            n7: p.nk(7),
            vco2: 0.0,
            l: p.legislative_cost,
            n6: p.nk(6),
            n8: p.nk(8),
        };
        s.vco2 = eval_interdependencies(&s, c).vco2;
        s
    }

    pub fn validate(&self) -> Result<()> {
        let v = [
            self.n4, self.n5, self.n7, self.vco2, self.l, self.n6, self.n8,
        ];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("state point must be finite"));
        }
        Ok(())
    }
}

/// Right-hand sides of the four resource constraints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintLevels {
    /// Wage budget C.
    pub c_wages: f64,
    /// Expected earnings E.
    pub e_earnings: f64,
    /// CO₂ control cost V.
    pub v_co2_cost: f64,
    /// CSR budget R.
    pub r_csr: f64,
}

impl ConstraintLevels {
    /// Levels at which every constraint expression vanishes.
    pub fn at_operating_point(p: &ModelParameters, d: &Derived) -> Self {
        Self {
            c_wages: p.nk(1) * p.fk(4) + p.nk(2) * p.fk(5),
            e_earnings: d.n4 * p.fk(7),
            v_co2_cost: d.vco2 * p.fk(1),
            r_csr: d.n3 * p.fk(6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = [self.c_wages, self.e_earnings, self.v_co2_cost, self.r_csr];
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::validation("constraint levels must be non-negative"));
        }
        Ok(())
    }
}

/// Chain-rule factors of the interdependency polynomials at a state point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ChainFactors {
    /// ∂V_CO₂/∂L = a₁ + a₁₂N₅ + a₃₁N₇ + 2a'₁L
    pub dv_dl: f64,
    /// ∂V_CO₂/∂N₅ = a₂ + a₂₃N₇ + a₁₂L + 2a'₂N₅
    pub dv_dn5: f64,
    /// ∂V_CO₂/∂N₇ = a₃ + a₂₃N₅ + a₃₁L + 2a'₃N₇
    pub dv_dn7: f64,
    /// ∂N₃/∂N₄ = α₁ + α₁₂N₆ + 2α'₁N₄
    pub dn3_dn4: f64,
    /// ∂N₃/∂N₆ = α₂ + α₁₂N₄ + 2α'₂N₆
    pub dn3_dn6: f64,
    /// ∂N₄/∂N₇ = β₁ + β₁₂N₈ + 2β'₁N₇
    pub dn4_dn7: f64,
    /// ∂N₄/∂N₈ = β₂ + β₁₂N₇ + 2β'₂N₈
    pub dn4_dn8: f64,
}

pub(crate) const EXPR_DV_DL: &str = "a₁ + a₁₂N₅ + a₃₁N₇ + 2a'₁L";
pub(crate) const EXPR_DV_DN5: &str = "a₂ + a₂₃N₇ + a₁₂L + 2a'₂N₅";
pub(crate) const EXPR_DV_DN7: &str = "a₃ + a₂₃N₅ + a₃₁L + 2a'₃N₇";
pub(crate) const EXPR_DN3_DN4: &str = "α₁ + α₁₂N₆ + 2α'₁N₄";
pub(crate) const EXPR_DN3_DN6: &str = "α₂ + α₁₂N₄ + 2α'₂N₆";
pub(crate) const EXPR_DN4_DN7: &str = "β₁ + β₁₂N₈ + 2β'₁N₇";
pub(crate) const EXPR_DN4_DN8: &str = "β₂ + β₁₂N₇ + 2β'₂N₈";

impl ChainFactors {
    pub fn at(c: &InterdepCoefficients, s: &StatePoint) -> Self {
        Self {
            dv_dl: c.a1 + c.a12 * s.n5 + c.a31 * s.n7 + 2.0 * c.a1p * s.l,
            dv_dn5: c.a2 + c.a23 * s.n7 + c.a12 * s.l + 2.0 * c.a2p * s.n5,
            dv_dn7: c.a3 + c.a23 * s.n5 + c.a31 * s.l + 2.0 * c.a3p * s.n7,
            dn3_dn4: c.alpha1 + c.alpha12 * s.n6 + 2.0 * c.alpha1p * s.n4,
            dn3_dn6: c.alpha2 + c.alpha12 * s.n4 + 2.0 * c.alpha2p * s.n6,
            dn4_dn7: c.beta1 + c.beta12 * s.n8 + 2.0 * c.beta1p * s.n7,
            dn4_dn8: c.beta2 + c.beta12 * s.n7 + 2.0 * c.beta2p * s.n8,
        }
    }
}

/// Returns `value` unless it is zero (or non-finite), in which case the
/// offending expression is reported.
pub(crate) fn nonzero(value: f64, context: &'static str, expression: &'static str) -> Result<f64> {
    if value == 0.0 || !value.is_finite() {
        Err(Error::SingularPoint {
            context,
            expression,
        })
    } else {
        Ok(value)
    }
}

/// Weighted products that recur across the derivative and matrix forms.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WeightedTerms {
    /// ε₁A₁f₁
    pub e1a1f1: f64,
    /// γε₄A₁₃f₁₀
    pub g_e4a13f10: f64,
    /// ε₄A₁₃f₁₀
    pub e4a13f10: f64,
    /// ε₄A₁₄f₁₁
    pub e4a14f11: f64,
    /// ε₁A₂f₂
    pub e1a2f2: f64,
    /// ε₁A₄y
    pub e1a4y: f64,
    /// ε₁A₃f₃
    pub e1a3f3: f64,
    /// ε₂A₈f₆
    pub e2a8f6: f64,
    /// ε₃A₉f₇
    pub e3a9f7: f64,
    /// A₉f₇
    pub a9f7: f64,
    /// A₁₂T
    pub a12t: f64,
}

impl WeightedTerms {
    pub fn new(p: &ModelParameters, w: &UncertaintyWeights, c: &InterdepCoefficients) -> Self {
        Self {
            e1a1f1: w.eps1 * w.a1 * p.fk(1),
            g_e4a13f10: c.gamma * w.eps4 * w.a13 * p.fk(10),
            e4a13f10: w.eps4 * w.a13 * p.fk(10),
            e4a14f11: w.eps4 * w.a14 * p.fk(11),
            e1a2f2: w.eps1 * w.a2 * p.fk(2),
            e1a4y: w.eps1 * w.a4 * p.y,
            e1a3f3: w.eps1 * w.a3 * p.fk(3),
            e2a8f6: w.eps2 * w.a8 * p.fk(6),
            e3a9f7: w.eps3 * w.a9 * p.fk(7),
            a9f7: w.a9 * p.fk(7),
            a12t: w.a12 * p.tax_unit_cost,
        }
    }
}
