//! Problem configuration: TOML schema, defaults and evaluation of the
//! prescribed-curvature presets on a grid.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use hconvex::sphere::{ScalarField, SphereGrid};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    pub f_tilde: FTildeConfig,
    #[serde(default)]
    pub gamma: GammaConfig,
    #[serde(default)]
    pub continuation: ContinuationConfig,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    /// Colatitude rows; ignored for n = 1.
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    pub n_phi: usize,
}

fn default_n_theta() -> usize {
    1
}

/// Prescribed k-th shifted mean curvature, as a named preset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FTildeConfig {
    /// f_tilde = value everywhere.
    Constant { value: f64 },
    /// f_tilde = 1 / (alpha + beta (x . e_axis)^2); axis defaults to the
    /// last coordinate.
    EvenQuadratic {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        axis: Option<usize>,
    },
    /// Truncated even-harmonic expansion. For n = 2 the coefficients `c2`
    /// multiply [(3 z^2 - 1)/2, x^2 - y^2, 2 x y]; for n = 1 they multiply
    /// [cos(2 theta), sin(2 theta)]. Positivity is checked node-wise.
    HarmonicEven {
        c0: f64,
        #[serde(default)]
        c2: Vec<f64>,
    },
}

impl FTildeConfig {
    /// Samples the preset on the grid.
    pub fn evaluate(&self, grid: &Arc<SphereGrid>) -> Result<ScalarField, String> {
        let n = grid.dim();
        let field = match self {
            FTildeConfig::Constant { value } => ScalarField::constant(grid.clone(), *value),
            FTildeConfig::EvenQuadratic { alpha, beta, axis } => {
                let axis = axis.unwrap_or(n);
                if axis > n {
                    return Err(format!("even_quadratic axis {axis} out of 0..={n}"));
                }
                ScalarField::from_fn(grid, |p| 1.0 / (alpha + beta * p[axis] * p[axis]))
            }
            FTildeConfig::HarmonicEven { c0, c2 } => {
                let c = |i: usize| c2.get(i).copied().unwrap_or(0.0);
                let max_terms = if n == 1 { 2 } else { 3 };
                if c2.len() > max_terms {
                    return Err(format!(
                        "harmonic_even supports at most {max_terms} coefficients for n = {n}"
                    ));
                }
                if n == 1 {
                    ScalarField::from_fn(grid, |p| {
                        // cos(2t) = x^2 - y^2, sin(2t) = 2 x y on the circle.
                        c0 + c(0) * (p[0] * p[0] - p[1] * p[1]) + c(1) * 2.0 * p[0] * p[1]
                    })
                } else {
                    ScalarField::from_fn(grid, |p| {
                        c0 + c(0) * 0.5 * (3.0 * p[2] * p[2] - 1.0)
                            + c(1) * (p[0] * p[0] - p[1] * p[1])
                            + c(2) * 2.0 * p[0] * p[1]
                    })
                }
            }
        };
        if !field.values().iter().all(|v| v.is_finite()) {
            return Err("prescription evaluates to a non-finite value".into());
        }
        Ok(field)
    }
}

/// Homotopy anchor: "auto" picks the geometric mean of f = 1/f_tilde.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaConfig {
    Keyword(String),
    Value(f64),
}

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig::Keyword("auto".into())
    }
}

impl GammaConfig {
    /// None means automatic selection.
    pub fn resolve(&self) -> Result<Option<f64>, String> {
        match self {
            GammaConfig::Keyword(s) if s == "auto" => Ok(None),
            GammaConfig::Keyword(s) => Err(format!("gamma must be \"auto\" or a number, got {s:?}")),
            GammaConfig::Value(v) if *v > 0.0 => Ok(Some(*v)),
            GammaConfig::Value(v) => Err(format!("gamma must be positive, got {v}")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationConfig {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_min_dt")]
    pub min_dt: f64,
}

fn default_steps() -> usize {
    10
}

fn default_min_dt() -> f64 {
    1e-4
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            steps: default_steps(),
            min_dt: default_min_dt(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewtonConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    30
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Acceptance threshold on the L-infinity relative curvature error.
    #[serde(default = "default_verify_tol")]
    pub tol: f64,
}

fn default_verify_tol() -> f64 {
    2e-2
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tol: default_verify_tol(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, String> {
        let cfg: Config = toml::from_str(text).map_err(|e| e.to_string())?;
        if cfg.n != 1 && cfg.n != 2 {
            return Err(format!("n must be 1 or 2, got {}", cfg.n));
        }
        if cfg.k < 1 || cfg.k > cfg.n {
            return Err(format!("k must satisfy 1 <= k <= n, got {}", cfg.k));
        }
        cfg.gamma.resolve()?;
        Ok(cfg)
    }

    pub fn build_grid(&self) -> Result<Arc<SphereGrid>, String> {
        SphereGrid::build(self.n, self.grid.n_theta, self.grid.n_phi).map_err(|e| e.to_string())
    }
}
