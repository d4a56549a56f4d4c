//! Reduced 4×4 Euler-Lagrange perturbation systems over the state
//! (δN₄, δN₅, δN₇, δV_CO₂), assembled from closed-form matrix elements, and
//! the catalogue of second partial derivatives used to cross-check them.
//!
//! Second-derivative forms are transcribed as printed, with a small set of
//! symbol normalisations where the printed form names a coefficient that
//! does not exist: a₁₃ → a₃₁, a₃₂ → a₂₃, a₂₁ → a₁₂, a'₂₃ → a₂₃, and
//! `γε₁₃f₁₀` → γε₄A₁₃f₁₀. Chain-rule factors printed with a dropped prime or
//! a stray factor (`a₂ + a₂₃N₇ + a₁₂L + 2a₂N₅`, `a₂ + a₃₂N₇ + a₂₁LN₇ + 2a₂N₅`)
//! are read as the corresponding ∂V_CO₂ derivative, and every A₄y term
//! carries ε₁.

use std::fmt;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    nonzero, ChainFactors, InterdepCoefficients, ModelParameters, StatePoint, UncertaintyWeights,
    WeightedTerms, EXPR_DN3_DN4, EXPR_DN3_DN6, EXPR_DN4_DN7, EXPR_DN4_DN8, EXPR_DV_DL, EXPR_DV_DN5,
    EXPR_DV_DN7,
};

/// State ordering of the reduced system.
pub const STATE_LABELS: [&str; 4] = ["dN4", "dN5", "dN7", "dVCO2"];

/// Entries that are structurally zero in both M and K (0-based).
pub const STRUCTURAL_ZEROS: [(usize, usize); 8] = [
    (0, 1),
    (0, 3),
    (1, 0),
    (1, 3),
    (2, 0),
    (2, 3),
    (3, 0),
    (3, 2),
];

/// Nonzero pattern of the full 10×10 first-order system over
/// (N₄, N₅, N₃, N₁, N₂, N₆, N₇, N₈, V_CO₂, L), 1-based (row, column).
/// Rows 4 and 5 are empty. Reference data only; the reduced 4×4 system is
/// what gets assembled and solved.
pub const FULL_SYSTEM_PATTERN: [(u8, u8); 24] = [
    (1, 1),
    (1, 7),
    (1, 8),
    (2, 2),
    (2, 7),
    (2, 10),
    (3, 1),
    (3, 3),
    (3, 6),
    (6, 1),
    (6, 6),
    (7, 2),
    (7, 7),
    (7, 8),
    (7, 10),
    (8, 7),
    (8, 8),
    (9, 2),
    (9, 6),
    (9, 9),
    (9, 10),
    (10, 2),
    (10, 7),
    (10, 10),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Unconstrained,
    Constrained,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Unconstrained => "unconstrained",
            MatrixKind::Constrained => "constrained",
        })
    }
}

/// Dense 4×4 coefficient matrix, M (unconstrained) or K (constrained).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemMatrix {
    pub kind: MatrixKind,
    pub entries: [[f64; 4]; 4],
}

impl SystemMatrix {
    pub fn new(kind: MatrixKind, entries: [[f64; 4]; 4]) -> Self {
        Self { kind, entries }
    }

    pub fn zeros(kind: MatrixKind) -> Self {
        Self::new(kind, [[0.0; 4]; 4])
    }

    pub fn diagonal(kind: MatrixKind, diag: [f64; 4]) -> Self {
        let mut m = Self::zeros(kind);
        for (i, d) in diag.into_iter().enumerate() {
            m.entries[i][i] = d;
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    pub fn to_matrix4(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.entries[i][j])
    }

    /// Right-hand side operator of `d²x/dt² = diag(1/ξ)·M·x`.
    pub fn scaled(&self, scales: &MassScales) -> Self {
        let mut out = *self;
        for (row, xi) in out.entries.iter_mut().zip(scales.xi) {
            for v in row.iter_mut() {
                *v /= xi;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_finite())
    }

    pub fn apply(&self, x: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// Inertia factors ξ (unconstrained) or ψ (constrained), one per state row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MassScales {
    pub xi: [f64; 4],
}

impl Default for MassScales {
    fn default() -> Self {
        Self { xi: [1.0; 4] }
    }
}

impl MassScales {
    pub fn uniform(xi: f64) -> Result<Self> {
        Self::new([xi; 4])
    }

    pub fn new(xi: [f64; 4]) -> Result<Self> {
        let s = Self { xi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.xi.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::validation("mass scales must be strictly positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Zero M₄₄ instead of using the printed −λ₃f₁ in the unconstrained matrix.
    #[serde(default)]
    pub unconstrained_m44_zero: bool,
}

const EXPR_M13_SECOND: &str = "β₁ + β₁₂N₇ + 2β'₁N₈";

/// Elements shared by M and K.
fn common_elements(
    w: &UncertaintyWeights,
    c: &InterdepCoefficients,
    p: &ModelParameters,
    s: &StatePoint,
    context: &'static str,
) -> Result<[[f64; 4]; 4]> {
    let t = WeightedTerms::new(p, w, c);
    let k = ChainFactors::at(c, s);

    let m11 = 2.0 * w.eps2 * w.a8 * p.fk(6) * c.alpha1p;

    // N₇⁰ and N₈⁰ are the state-point values. The second denominator is
    // printed with β₁ and β'₁.
    let den1 = nonzero(k.dn4_dn7, context, EXPR_DN4_DN7)?;
    let den2 = nonzero(
        c.beta1 + c.beta12 * s.n7 + 2.0 * c.beta1p * s.n8,
        context,
        EXPR_M13_SECOND,
    )?;
    let m13 = -t.e4a13f10 * 2.0 * c.beta1p / (den1 * den1) - t.e4a14f11 * c.beta12 / (den2 * den2);

    let m22 = 2.0
        * (t.e1a1f1 * c.a2p
            + t.g_e4a13f10 * c.a2p
            + t.e1a2f2 * c.c2p
            + t.e1a4y * c.d2p
            + t.e1a3f3 * c.b2);
    let m23 = t.e1a1f1 * c.a23 + t.g_e4a13f10 * c.a23;
    let m32 = t.e1a1f1 * c.a23;
    let m33 = 2.0 * t.e1a1f1 * c.a3p + 2.0 * t.e3a9f7 * c.beta1p;

    let dv_dl = nonzero(k.dv_dl, context, EXPR_DV_DL)?;
    let bracket = (t.e1a1f1 * c.a12 + t.g_e4a13f10 + t.e1a2f2 * c.c12 + t.e1a4y * c.d12) * s.n5
        + (t.e1a1f1 * c.a31 + t.g_e4a13f10 * c.a31) * s.n7
        + 2.0
            * (t.e1a1f1 * c.a1p + t.g_e4a13f10 * c.a1p + t.e1a2f2 * c.c1p + t.e1a4y * c.d1p)
            * s.l;
    let m42 = -c.a12 / (dv_dl * dv_dl) * bracket + 1.0 / dv_dl;

    Ok([
        [m11, 0.0, m13, 0.0],
        [0.0, m22, m23, 0.0],
        [0.0, m32, m33, 0.0],
        [0.0, m42, 0.0, 0.0],
    ])
}

/// Unconstrained matrix M. M₄₄ is −λ₃f₁ as printed unless
/// `options.unconstrained_m44_zero` is set.
pub fn assemble_unconstrained(
    w: &UncertaintyWeights,
    c: &InterdepCoefficients,
    p: &ModelParameters,
    s: &StatePoint,
    options: AssemblyOptions,
) -> Result<SystemMatrix> {
    let mut entries = common_elements(w, c, p, s, "matrix M")?;
    entries[3][3] = if options.unconstrained_m44_zero {
        0.0
    } else {
        -w.lam3 * p.fk(1)
    };
    Ok(SystemMatrix::new(MatrixKind::Unconstrained, entries))
}

/// Constrained matrix K; equal to M except K₄₄ = −λ₃f₁.
pub fn assemble_constrained(
    w: &UncertaintyWeights,
    c: &InterdepCoefficients,
    p: &ModelParameters,
    s: &StatePoint,
) -> Result<SystemMatrix> {
    let mut entries = common_elements(w, c, p, s, "matrix K")?;
    entries[3][3] = -w.lam3 * p.fk(1);
    Ok(SystemMatrix::new(MatrixKind::Constrained, entries))
}

/// Labels of the catalogued second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SecondPartial {
    FVco2Vco2,
    FN3N3,
    FN4N4,
    FN5N5,
    FN7N7,
    FN3N7,
    FN3Vco2,
    FN4N7,
    FN4Vco2,
    FN5Vco2,
    FN7Vco2,
    FN5N7,
    LVco2Vco2,
    LVco2N5,
    LVco2N7,
    LN5N7,
    LN7N7,
    LN5N5,
    LN4N4,
    LN4Vco2,
    LN4N7,
}

impl SecondPartial {
    pub fn label(self) -> &'static str {
        use SecondPartial::*;
        match self {
            FVco2Vco2 => "d2F/dVCO2^2",
            FN3N3 => "d2F/dN3^2",
            FN4N4 => "d2F/dN4^2",
            FN5N5 => "d2F/dN5^2",
            FN7N7 => "d2F/dN7^2",
            FN3N7 => "d2F/dN3dN7",
            FN3Vco2 => "d2F/dN3dVCO2",
            FN4N7 => "d2F/dN4dN7",
            FN4Vco2 => "d2F/dN4dVCO2",
            FN5Vco2 => "d2F/dN5dVCO2",
            FN7Vco2 => "d2F/dN7dVCO2",
            FN5N7 => "d2F/dN5dN7",
            LVco2Vco2 => "d2L/dVCO2^2",
            LVco2N5 => "d2L/dVCO2dN5",
            LVco2N7 => "d2L/dVCO2dN7",
            LN5N7 => "d2L/dN5dN7",
            LN7N7 => "d2L/dN7^2",
            LN5N5 => "d2L/dN5^2",
            LN4N4 => "d2L/dN4^2",
            LN4Vco2 => "d2L/dN4dVCO2",
            LN4N7 => "d2L/dN4dN7",
        }
    }
}

/// Labelled second-derivative values at a state point.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondPartials {
    pub entries: Vec<(SecondPartial, f64)>,
}

impl SecondPartials {
    pub fn get(&self, which: SecondPartial) -> f64 {
        self.entries
            .iter()
            .find(|(k, _)| *k == which)
            .map(|(_, v)| *v)
            .expect("every label is populated")
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (k.label(), *v))
    }
}

impl Serialize for SecondPartials {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k.label(), v)?;
        }
        map.end()
    }
}

pub fn second_partials(
    w: &UncertaintyWeights,
    c: &InterdepCoefficients,
    p: &ModelParameters,
    s: &StatePoint,
) -> Result<SecondPartials> {
    use SecondPartial::*;
    const CTX: &str = "second partials";

    let t = WeightedTerms::new(p, w, c);
    let k = ChainFactors::at(c, s);
    let g = c.gamma;

    let dv_dl = nonzero(k.dv_dl, CTX, EXPR_DV_DL)?;
    let dv_dn5 = nonzero(k.dv_dn5, CTX, EXPR_DV_DN5)?;
    let dv_dn7 = nonzero(k.dv_dn7, CTX, EXPR_DV_DN7)?;
    let dn3_dn4 = nonzero(k.dn3_dn4, CTX, EXPR_DN3_DN4)?;
    let dn3_dn6 = nonzero(k.dn3_dn6, CTX, EXPR_DN3_DN6)?;
    let dn4_dn7 = nonzero(k.dn4_dn7, CTX, EXPR_DN4_DN7)?;
    let dn4_dn8 = nonzero(k.dn4_dn8, CTX, EXPR_DN4_DN8)?;
    let g_dv_dl = nonzero(g * dv_dl, CTX, "γ(a₁ + a₁₂N₅ + a₃₁N₇ + 2a'₁L)")?;
    let g_dv_dn5 = nonzero(g * dv_dn5, CTX, "γ(a₂ + a₂₃N₇ + a₁₂L + 2a'₂N₅)")?;

    let e1a1 = w.eps1 * w.a1;
    let e2a8f6 = t.e2a8f6;
    let e3 = w.eps3;

    // 2(ε₁A₁f₁a'₂ + γε₄A₁₃f₁₀a'₂ + ε₁A₂f₂c'₂ + ε₁A₄yd'₂)
    let quad_n5 =
        2.0 * (t.e1a1f1 * c.a2p + t.g_e4a13f10 * c.a2p + t.e1a2f2 * c.c2p + t.e1a4y * c.d2p);
    // γε₄A₁₃f₁₀a₂₃ + ε₁A₁f₁a₂₃
    let cross23 = t.g_e4a13f10 * c.a23 + t.e1a1f1 * c.a23;

    // ---- F ----
    let f_n5n7 = (2.0 * t.e1a1f1 * c.a2p
        + t.g_e4a13f10 * c.a2p
        + 2.0 * t.e1a2f2 * c.c2p
        + 2.0 * t.e1a4y * c.d2p)
        / g_dv_dl
        + (t.e1a1f1 * c.a23 + t.e4a13f10 * c.a23)
        + (t.e1a1f1 * c.a12 + t.e1a2f2 * c.c12 + t.e1a4y * c.d12 + t.e4a13f10 * c.a12) / g_dv_dl;

    let f_n5v = (1.0 / dv_dl)
        * ((e1a1 * c.a12 + t.g_e4a13f10 + t.e1a2f2 * c.c12 + t.e1a4y * c.d12)
            + g * c.a31 * (e1a1 + w.eps4 * w.a13 * g) * dv_dl)
        + (1.0 / dv_dn5) * (quad_n5 + g * dv_dn5 * cross23);

    let f_n7v = f_n5n7 / dv_dn5 + f_n5n7 / dv_dn7;
    let f_vv = f_n5v / dv_dn5 + f_n7v / dv_dl;

    let f_n3n3 = (1.0 / dn3_dn4)
        * (t.e3a9f7 + e2a8f6 * dn3_dn4 + (t.e4a13f10 / dn4_dn7 + t.e4a14f11 / dn4_dn8))
        + (1.0 / dn3_dn6) * (e3 * t.a12t + e2a8f6 * dn3_dn6);

    let f_n4n4 = dn3_dn4 * (e2a8f6 + e3 * (t.a9f7 / dn3_dn4 - t.a12t / dn3_dn6))
        + (1.0 / dn4_dn7) * (t.e1a1f1 * dv_dn7 + t.e3a9f7 * dn4_dn7 + t.e4a13f10)
        + (1.0 / dn4_dn8) * (t.e3a9f7 * dn4_dn8 + t.e4a14f11);

    let f_n5n5 = quad_n5 + g * dv_dn5 * cross23;
    let f_n7n7 = t.e1a1f1 * c.a23 / g_dv_dn5 + 2.0 * (t.e1a1f1 * c.a3p + t.e3a9f7 * c.beta1p);

    let f_n3n7 = -2.0 * c.alpha1p * t.e3a9f7 * dn4_dn7 / dn3_dn4
        + c.alpha12 * t.a12t * dn4_dn7 / (dn3_dn6 * dn3_dn6);
    let f_n3v = -g * 2.0 * c.alpha1p * t.e3a9f7 * dn4_dn7 / dn3_dn4
        + g * c.alpha12 * t.a12t * dn4_dn7 / (dn3_dn6 * dn3_dn6);

    let f_n4n7 = g
        * dv_dl
        * (2.0 * c.beta1p * t.e4a13f10 / (dn4_dn7 * dn4_dn7)
            - c.beta12 * t.e4a14f11 / (dn4_dn8 * dn4_dn8))
        + 2.0 * e2a8f6 * c.alpha1p * dn4_dn7;
    let f_n4v = f_n4n7 / dv_dn7;

    // ---- Lagrangian ----
    let l_n5n7 = (2.0 * t.e1a1f1 * c.a2p
        + 2.0 * t.g_e4a13f10 * c.a2p
        + 2.0 * t.e1a2f2 * c.c2p
        + 2.0 * t.e1a4y * c.d2p)
        / g_dv_dl
        + t.e1a1f1 * c.a31
        + t.e4a13f10 * c.a31
        + (t.e1a1f1 * c.a12 + t.e1a2f2 * c.c12 + t.e1a4y * c.d12 + t.g_e4a13f10) / g_dv_dl;

    let l_vn5 = (1.0 / dv_dl)
        * ((t.e1a1f1 * c.a12 + t.g_e4a13f10 + t.e1a2f2 * c.c12 + t.e1a4y * c.d12)
            + g * c.a31 * (t.e1a1f1 + t.g_e4a13f10) * dv_dl)
        + (1.0 / dv_dn5) * (quad_n5 + g * dv_dn5 * (cross23 + 2.0 * t.e1a1f1 * c.b2));

    let l_n7n7 = t.e1a1f1 * c.a23 / g_dv_dn5 + 2.0 * t.e1a1f1 * c.a3p + 2.0 * t.e3a9f7 * c.beta1p;
    let l_vn7 = l_n5n7 / dv_dn5 + l_n7n7 / dv_dn7;
    let l_vv = l_vn5 / dv_dn5 + l_vn7 / dv_dn7;

    let l_n5n5 = f_n5n5 + 2.0 * t.e1a3f3 * c.b2;

    let l_n4n4 = dn3_dn4 * (e2a8f6 + e3 * (t.a9f7 / dn3_dn4 - t.a12t / dn3_dn6))
        + (1.0 / dn4_dn7) * (t.e1a1f1 * dv_dn7 + t.e3a9f7 * dn4_dn7 + t.e4a13f10)
        + (1.0 / dn4_dn8) * (t.e3a9f7 * dn4_dn7 + t.e4a14f11);

    let l_n4n7 =
        g * dv_dl * (2.0 * c.beta1p * t.e4a13f10 / dn4_dn7 - c.beta12 * t.e4a14f11 / dn4_dn8)
            + 2.0 * e2a8f6 * c.alpha1p * dn4_dn7;
    let l_n4v = l_n4n7 / dv_dn5;

    Ok(SecondPartials {
        entries: vec![
            (FVco2Vco2, f_vv),
            (FN3N3, f_n3n3),
            (FN4N4, f_n4n4),
            (FN5N5, f_n5n5),
            (FN7N7, f_n7n7),
            (FN3N7, f_n3n7),
            (FN3Vco2, f_n3v),
            (FN4N7, f_n4n7),
            (FN4Vco2, f_n4v),
            (FN5Vco2, f_n5v),
            (FN7Vco2, f_n7v),
            (FN5N7, f_n5n7),
            (LVco2Vco2, l_vv),
            (LVco2N5, l_vn5),
            (LVco2N7, l_vn7),
            (LN5N7, l_n5n7),
            (LN7N7, l_n7n7),
            (LN5N5, l_n5n5),
            (LN4N4, l_n4n4),
            (LN4Vco2, l_n4v),
            (LN4N7, l_n4n7),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_inputs() -> (
        UncertaintyWeights,
        InterdepCoefficients,
        ModelParameters,
        StatePoint,
    ) {
        let w = UncertaintyWeights {
            a1: 0.0797,
            a2: 0.0178,
            a3: 0.0488,
            a4: 0.0586,
            a5: 0.0083,
            a6: 0.0115,
            a7: 0.0115,
            a8: 0.0573,
            a9: 0.1252,
            a10: 0.0963,
            a11: 0.0386,
            a12: 0.022,
            a13: 0.0773,
            a14: 0.1567,
            a15: 0.1906,
            eps1: 0.42458,
            eps2: 0.28198,
            eps3: 0.2132,
            eps4: 0.08024,
            lam1: 0.42458,
            lam2: 0.28198,
            lam3: 0.2132,
            lam4: 0.08024,
        };
        let c = InterdepCoefficients::from_bases(&crate::model::InterdepBases {
            a1: 0.10473,
            a2: 0.25828,
            a3: 0.63699,
            b1: 0.75,
            c1: 0.5,
            c2: 0.5,
            d1: 0.5,
            d2: 0.5,
            alpha1: 0.25,
            alpha2: 0.75,
            beta1: 0.5,
            beta2: 0.5,
            gamma: 0.1361,
            ..Default::default()
        })
        .unwrap();
        let mut p = ModelParameters::zero();
        p.f = [
            10000.0, 0.0, 72000.0, 60000.0, 108000.0, 200000.0, 160000.0, 4500.0, 0.0, 180000.0,
            0.0,
        ]
        .map(|v| v / 3000.0);
        p.legislative_cost = 17000.0 / 3000.0;
        p.n = [42.0, 9.0, 5.0, 15634.0, 76.0, 8.0, 2.0, 1.0];
        let s = StatePoint::operating_point(&p, &c);
        (w, c, p, s)
    }

    #[test]
    fn pattern_has_no_duplicates() {
        for (i, a) in FULL_SYSTEM_PATTERN.iter().enumerate() {
            assert!(!FULL_SYSTEM_PATTERN[i + 1..].contains(a));
            assert!(!(4..=5).contains(&a.0));
        }
    }

    #[test]
    fn structural_zeros_hold() {
        let (w, c, p, s) = table_inputs();
        let m = assemble_unconstrained(&w, &c, &p, &s, AssemblyOptions::default()).unwrap();
        for (i, j) in STRUCTURAL_ZEROS {
            assert_eq!(m.get(i, j), 0.0);
        }
        assert!((m.get(0, 0) - 1.077164).abs() < 1e-5);
        assert!((m.get(2, 2) - 2.193336).abs() < 1e-5);
    }

    #[test]
    fn k_differs_from_m_only_in_corner_when_zeroed() {
        let (w, c, p, s) = table_inputs();
        let opts = AssemblyOptions {
            unconstrained_m44_zero: true,
        };
        let m = assemble_unconstrained(&w, &c, &p, &s, opts).unwrap();
        let k = assemble_constrained(&w, &c, &p, &s).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if (i, j) == (3, 3) {
                    assert_eq!(m.get(i, j), 0.0);
                    assert!((k.get(i, j) + 0.710667).abs() < 1e-6);
                } else {
                    assert_eq!(m.get(i, j), k.get(i, j));
                }
            }
        }
    }

    #[test]
    fn scaling_divides_rows() {
        let m = SystemMatrix::diagonal(MatrixKind::Constrained, [2.0, 4.0, 6.0, 8.0]);
        let s = MassScales::new([2.0, 2.0, 3.0, 4.0]).unwrap();
        let a = m.scaled(&s);
        assert_eq!(a.entries[1][1], 2.0);
        assert_eq!(a.entries[3][3], 2.0);
        assert!(MassScales::new([1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn second_partial_lagrangian_offset() {
        let (w, c, p, s) = table_inputs();
        let sp = second_partials(&w, &c, &p, &s).unwrap();
        let diff = sp.get(SecondPartial::LN5N5) - sp.get(SecondPartial::FN5N5);
        let expected = 2.0 * w.eps1 * w.a3 * p.fk(3) * c.b2;
        assert!((diff - expected).abs() < 1e-12);
    }
}
