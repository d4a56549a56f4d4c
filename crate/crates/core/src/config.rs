//! JSON model configuration and scenario manifests, with bundled defaults
//! for the two case studies.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bvp::BoundarySpec;
use crate::dynamics::{AssemblyOptions, MassScales};
use crate::error::{Error, Result};
use crate::model::{
    ConstraintLevels, InterdepBases, InterdepCoefficients, ParameterInputs, StatePoint,
    UncertaintyWeights,
};
use crate::scenario::{CaseDefinition, ModelInputs};

pub const DEFAULT_CONFIG: &str = include_str!("../data/default_config.json");
pub const DEFAULT_MANIFEST: &str = include_str!("../data/default_manifest.json");

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassScaleConfig {
    #[serde(default)]
    pub xi: MassScales,
    #[serde(default)]
    pub psi: MassScales,
}

/// Model configuration document. Money is yearly; conversion to the daily
/// scale happens in [`ModelConfig::inputs`]. Interdependency coefficients
/// are given either in full or as bases from which the compound and
/// quadratic coefficients are derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub parameters: ParameterInputs,
    pub weights: UncertaintyWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<InterdepCoefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_bases: Option<InterdepBases>,
    /// Expansion point; defaults to the operating point of the parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_point: Option<StatePoint>,
    /// Constraint levels C, E, V, R; default 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<ConstraintLevels>,
    #[serde(default)]
    pub mass_scales: MassScaleConfig,
    #[serde(default)]
    pub options: AssemblyOptions,
}

impl ModelConfig {
    pub fn bundled() -> Self {
        serde_json::from_str(DEFAULT_CONFIG).expect("bundled config is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn coefficients(&self) -> Result<InterdepCoefficients> {
        match (&self.coefficients, &self.coefficient_bases) {
            (Some(c), None) => Ok(c.clone()),
            (None, Some(b)) => InterdepCoefficients::from_bases(b),
            _ => Err(Error::validation(
                "exactly one of `coefficients` and `coefficient_bases` is required",
            )),
        }
    }

    /// Validated model inputs on the daily scale.
    pub fn inputs(&self) -> Result<ModelInputs> {
        let params = self.parameters.to_daily()?;
        let coefficients = self.coefficients()?;
        let state = self
            .state_point
            .unwrap_or_else(|| StatePoint::operating_point(&params, &coefficients));
        let levels = self.levels.unwrap_or_default();
        let inputs = ModelInputs {
            params,
            weights: self.weights.clone(),
            coefficients,
            state,
            levels,
            xi: self.mass_scales.xi,
            psi: self.mass_scales.psi,
            options: self.options,
        };
        inputs.validate()?;
        Ok(inputs)
    }
}

/// Revision settings of a manifest run. Unset fields take the defaults of
/// [`crate::scenario::default_plan`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrategizeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revision_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetChoice>,
    /// Explicit revised δV_CO₂ target; overrides `target`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revised_vco2_target: Option<f64>,
    /// Measure against an advance plan at the initial-row check value
    /// (default true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advance_plan: Option<bool>,
}

/// Which check value a revision aims at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetChoice {
    InitialRow,
    TerminalRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRun {
    pub case: u8,
    pub horizon_years: u32,
    pub constrained: bool,
    /// Replaces the standard boundary rows of the case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrategize: Option<RestrategizeSpec>,
}

impl ManifestRun {
    pub fn definition(&self) -> Result<CaseDefinition> {
        let mut d = CaseDefinition::standard(self.case, self.horizon_years, self.constrained)?;
        if let Some(b) = self.boundary {
            d.boundary = b;
            d.validate()?;
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub runs: Vec<ManifestRun>,
}

impl Manifest {
    pub fn bundled() -> Self {
        serde_json::from_str(DEFAULT_MANIFEST).expect("bundled manifest is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Every run must be well formed and produce a distinct output name.
    pub fn validate(&self) -> Result<()> {
        let mut names = Vec::with_capacity(self.runs.len());
        for run in &self.runs {
            let name = run.definition()?.name();
            if names.contains(&name) {
                return Err(Error::validation(format!("duplicate run {name}")));
            }
            names.push(name);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_documents_parse() {
        let c = ModelConfig::bundled();
        let inputs = c.inputs().unwrap();
        assert!((inputs.params.fk(1) - 10000.0 / 3000.0).abs() < 1e-12);
        assert_eq!(inputs.state.n5, 76.0);
        inputs.weights.check_ahp_normalisation().unwrap();
        let m = Manifest::bundled();
        m.validate().unwrap();
        assert_eq!(m.runs.len(), 8);
    }

    #[test]
    fn coefficients_need_exactly_one_source() {
        let mut c = ModelConfig::bundled();
        c.coefficient_bases = Some(InterdepBases::default());
        assert!(c.inputs().is_err());
        c.coefficients = None;
        assert!(c.inputs().is_ok());
    }

    #[test]
    fn duplicate_runs_rejected() {
        let text = r#"{"runs":[{"case":1,"horizon_years":3,"constrained":true},
                                {"case":1,"horizon_years":3,"constrained":true}]}"#;
        assert!(Manifest::from_json(text).is_err());
        assert!(Manifest::from_json(
            r#"{"runs":[{"case":7,"horizon_years":3,"constrained":true}]}"#
        )
        .is_err());
    }
}
