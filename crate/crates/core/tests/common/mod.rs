#![allow(dead_code)]

use scn_core::config::ModelConfig;
use scn_core::scenario::ModelInputs;

pub fn bundled_inputs() -> ModelInputs {
    ModelConfig::bundled()
        .inputs()
        .expect("bundled config is valid")
}

/// Raw bundled configuration document, for oracles that read the tables
/// without going through the library types.
pub fn bundled_json() -> serde_json::Value {
    serde_json::from_str(scn_core::config::DEFAULT_CONFIG).unwrap()
}

pub fn num(v: &serde_json::Value, section: &str, key: &str) -> f64 {
    v[section][key]
        .as_f64()
        .unwrap_or_else(|| panic!("{section}.{key} missing"))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
