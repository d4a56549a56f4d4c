//! Closed-form first derivatives of F, transcribed term by term. Several of
//! them are not total derivatives of [`free_energy`](super::free_energy)
//! (missing f-factors in ∂F/∂L, missing W_p term in ∂F/∂N₅, inverse-function
//! quotients in ∂F/∂N₃ and ∂F/∂N₄); they are kept as written because the
//! matrix elements are built from the same forms.

use serde::Serialize;

use super::{
    nonzero, ChainFactors, InterdepCoefficients, ModelParameters, StatePoint, UncertaintyWeights,
    WeightedTerms, EXPR_DN3_DN4, EXPR_DN3_DN6, EXPR_DN4_DN7, EXPR_DN4_DN8,
};
use crate::error::Result;

/// Component order of [`Gradient::components`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GradientComponent {
    N4,
    N5,
    N3,
    N1,
    N2,
    N6,
    N7,
    N8,
    Vco2,
    L,
}

impl GradientComponent {
    pub const ALL: [GradientComponent; 10] = [
        Self::N4,
        Self::N5,
        Self::N3,
        Self::N1,
        Self::N2,
        Self::N6,
        Self::N7,
        Self::N8,
        Self::Vco2,
        Self::L,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::N4 => "dF/dN4",
            Self::N5 => "dF/dN5",
            Self::N3 => "dF/dN3",
            Self::N1 => "dF/dN1",
            Self::N2 => "dF/dN2",
            Self::N6 => "dF/dN6",
            Self::N7 => "dF/dN7",
            Self::N8 => "dF/dN8",
            Self::Vco2 => "dF/dVCO2",
            Self::L => "dF/dL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gradient {
    pub components: [f64; 10],
    /// ∂F/∂g = −ε₃A₁₁f₉
    pub d_disaster_fund: f64,
    /// ∂F/∂M = ε₄A₁₅
    pub d_misc_cost: f64,
}

impl Gradient {
    pub fn get(&self, c: GradientComponent) -> f64 {
        self.components[c.index()]
    }
}

const CTX: &str = "gradient";

pub fn gradient(
    p: &ModelParameters,
    w: &UncertaintyWeights,
    c: &InterdepCoefficients,
    s: &StatePoint,
) -> Result<Gradient> {
    let t = WeightedTerms::new(p, w, c);
    let k = ChainFactors::at(c, s);
    let dn3_dn4 = nonzero(k.dn3_dn4, CTX, EXPR_DN3_DN4)?;
    let dn3_dn6 = nonzero(k.dn3_dn6, CTX, EXPR_DN3_DN6)?;
    let dn4_dn7 = nonzero(k.dn4_dn7, CTX, EXPR_DN4_DN7)?;
    let dn4_dn8 = nonzero(k.dn4_dn8, CTX, EXPR_DN4_DN8)?;

    let (e1, e3, e4) = (w.eps1, w.eps3, w.eps4);
    let gamma = c.gamma;
    let f = |i| p.fk(i);

    let d_n4 = t.e3a9f7 + t.e2a8f6 * k.dn3_dn4 + (t.e4a13f10 / dn4_dn7 + t.e4a14f11 / dn4_dn8);

    let d_n5 = (t.e1a1f1 * c.a2 + t.g_e4a13f10 * c.a2 + t.e1a2f2 * c.c2 + t.e1a4y * c.d2
        - e3 * w.a10 * f(8))
        + 2.0
            * s.n5
            * (t.e1a1f1 * c.a2p + t.g_e4a13f10 * c.a2p + t.e1a2f2 * c.c2p + t.e1a4y * c.d2p)
        + (t.e1a1f1 * c.a23 + t.g_e4a13f10 * c.a23) * s.n7
        + (t.e1a1f1 * c.a12 + t.e1a2f2 * c.c12 + t.e1a4y * c.d12 + t.g_e4a13f10 * c.a12) * s.l;

    let d_n3 = t.e2a8f6 + e3 * (t.a9f7 / dn3_dn4 - t.a12t / dn3_dn6);

    let d_n1 = w.eps2 * w.a6 * f(4);
    let d_n2 = w.eps2 * w.a7 * f(5);
    let d_n6 = -e3 * t.a12t + t.e2a8f6 * k.dn3_dn6;
    let d_n7 = t.e1a1f1 * k.dv_dn7 + t.e3a9f7 * k.dn4_dn7 + t.e4a13f10;
    let d_n8 = t.e3a9f7 * k.dn4_dn8 + t.e4a14f11;
    let d_vco2 = t.e1a1f1 + t.g_e4a13f10;

    // As printed: the ε₁A₁ terms carry no f₁, and the ε₄γA₁₃ terms drop
    // their a-coefficients in places.
    let e1a1 = e1 * w.a1;
    let e4ga13 = e4 * gamma * w.a13;
    let d_l = (e1a1 * c.a1 + t.e1a2f2 * c.c1 + t.e1a4y * c.d1 + t.g_e4a13f10 * c.a1 + e1 * w.a5)
        + (e1a1 * c.a12 + t.g_e4a13f10 + t.e1a2f2 * c.c12 + t.e1a4y * c.d12) * s.n5
        + (e1a1 + e4ga13) * c.a31 * s.n7
        + 2.0 * (e1a1 + t.g_e4a13f10 + t.e1a2f2 * c.c1p + t.e1a4y * c.d1p) * s.l;

    Ok(Gradient {
        components: [d_n4, d_n5, d_n3, d_n1, d_n2, d_n6, d_n7, d_n8, d_vco2, d_l],
        d_disaster_fund: -e3 * w.a11 * f(9),
        d_misc_cost: e4 * w.a15,
    })
}
