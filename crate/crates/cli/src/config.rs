//! Job configuration: one JSON document drives any subcommand. Every field
//! has a default matching the acceptance tolerances, so `robin-iso <cmd>`
//! with no config runs the canonical experiment for that command.

use std::path::Path;

use robin_iso::DomainSpec;
use serde::Deserialize;

/// Pinned tolerances. Config may tighten or relax them; the defaults are the
/// ones the acceptance suite asserts.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Ball solver vs shooting oracle, relative.
    pub oracle_rel: f64,
    /// FEM eigenvalue agreement, relative.
    pub fem_rel: f64,
    /// Harmonic radius of the unit disk, absolute.
    pub radius_abs: f64,
    /// Capacity equality, relative.
    pub capacity_rel: f64,
    /// Shape derivative vs finite differences, relative.
    pub derivative_rel: f64,
    /// Closed-form boundary-flux minimizer on the disk, relative.
    pub energy_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle_rel: 1e-8,
            fem_rel: 1e-2,
            radius_abs: 1e-2,
            capacity_rel: 5e-2,
            derivative_rel: 1e-2,
            energy_rel: 1e-2,
        }
    }
}

/// Output file names, resolved relative to `--out`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputNames {
    pub ball_sweep_csv: String,
    pub level_set_csv: String,
}

impl Default for OutputNames {
    fn default() -> Self {
        OutputNames {
            ball_sweep_csv: "ball_sweep.csv".to_string(),
            level_set_csv: "level_sets.csv".to_string(),
        }
    }
}

fn default_domain() -> DomainSpec {
    DomainSpec::disk(1.0)
}

fn one() -> f64 {
    1.0
}

fn default_dim() -> u32 {
    2
}

fn default_h() -> f64 {
    0.05
}

fn default_mode() -> usize {
    0
}

fn default_fd_step() -> f64 {
    1e-2
}

/// The JSON job spec shared by all subcommands; each one reads the fields it
/// needs and ignores the rest.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default = "default_domain")]
    pub domain: DomainSpec,
    /// Space dimension for ball sweeps (the FEM path is planar).
    #[serde(default = "default_dim")]
    pub dim: u32,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Radius grid for `ball-eig`; default is 20 geometric points in
    /// [0.25, 16].
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    /// Level grid for `harmonic`; default is 20 log-spaced points in
    /// [0.005, 0.25].
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    /// Boundary-flux strength for `steklov`.
    #[serde(default = "one")]
    pub mu: f64,
    /// Sink coefficient for `steklov`.
    #[serde(default = "one")]
    pub c: f64,
    /// Perturbation for `shape-deriv`: 0 is the pure dilation field, k >= 1
    /// the cosine mode `cos(k theta)`. Beware flux-free modes on symmetric
    /// domains: their first-order derivative vanishes and the relative
    /// comparison degenerates.
    #[serde(default = "default_mode")]
    pub mode: usize,
    /// Perturbation amplitude for `shape-deriv`.
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Base step of the Richardson finite-difference oracle.
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputNames,
}

impl Default for JobConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl JobConfig {
    /// Load from a JSON file; any problem (missing file, bad JSON, unknown
    /// field, invalid domain) is a usage error.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: JobConfig = serde_json::from_str(&text)
            .map_err(|e| format!("malformed config {}: {e}", path.display()))?;
        cfg.domain
            .validate()
            .map_err(|e| format!("invalid domain in {}: {e}", path.display()))?;
        Ok(cfg)
    }

    pub fn radii_or_default(&self) -> Vec<f64> {
        self.radii.clone().unwrap_or_else(|| {
            let (a, b, n) = (0.25f64.ln(), 16.0f64.ln(), 20usize);
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        })
    }

    pub fn t_grid_or_default(&self) -> Vec<f64> {
        self.t_grid.clone().unwrap_or_else(|| {
            let (a, b, n) = (0.005f64.ln(), 0.25f64.ln(), 20usize);
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_canonical() {
        let cfg = JobConfig::default();
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.h, 0.05);
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.radii_or_default().len(), 20);
        assert_eq!(cfg.t_grid_or_default().len(), 20);
        assert_eq!(cfg.tolerances.oracle_rel, 1e-8);
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = serde_json::from_str::<JobConfig>(r#"{"alhpa": 2.0}"#);
        assert!(err.is_err());
    }

    #[test]
    fn domain_parses_pinned_schema() {
        let cfg: JobConfig = serde_json::from_str(
            r#"{"domain": {"kind": "star", "R": 1.0, "cos": [0.0, 0.0, 0.3]}, "alpha": 0.5}"#,
        )
        .unwrap();
        assert_eq!(cfg.alpha, 0.5);
        match cfg.domain {
            DomainSpec::Star { base_radius, .. } => assert_eq!(base_radius, 1.0),
            _ => panic!("expected star"),
        }
    }
}
