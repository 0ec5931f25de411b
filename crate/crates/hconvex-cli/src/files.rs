//! On-disk formats: solution files, curvature reports and mesh exports.
//!
//! Solution and report files are JSON with a fixed field layout; floats are
//! serialized in shortest round-trip form, so reloading reproduces the exact
//! bit pattern and identical runs produce byte-identical files. Mesh exports
//! (OBJ and CSV) carry 17 significant digits.

use serde::{Deserialize, Serialize};

use crate::config::Config;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub config: Config,
    /// The resolved (numeric) homotopy anchor.
    pub gamma: f64,
    pub phi: Vec<f64>,
    pub u: Vec<f64>,
    pub residual_norm: f64,
    #[serde(rename = "min_eig_A")]
    pub min_eig_a: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub newton_iters: usize,
    /// (t, iterations, residual) per accepted continuation step.
    pub step_history: Vec<(f64, usize, f64)>,
    pub phi_low: f64,
    pub phi_high: f64,
    pub max_eig_a: f64,
}

/// Partial state written when the continuation fails.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureFile {
    pub config: Config,
    pub failure: FailureInfo,
    pub t_last: f64,
    pub phi: Vec<f64>,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureInfo {
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub linf_rel_error: f64,
    pub l2_rel_error: f64,
    pub min_kappa_tilde: f64,
    /// Acceptance threshold from the solution's config.
    pub tol: f64,
    /// True iff all monitors pass and linf_rel_error <= tol.
    pub pass: bool,
    pub monitors: Vec<MonitorEntry>,
    pub h_tilde_k_measured: Vec<f64>,
    pub h_tilde_k_prescribed: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonitorEntry {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

/// 17-significant-digit decimal form used by the mesh exports.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    std::fs::write(path, text + "\n").map_err(|e| e.to_string())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}
