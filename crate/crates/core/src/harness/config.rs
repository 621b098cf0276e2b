use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::process::ProcessModel;
use crate::resample::Method;

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i + 1 == count {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

pub fn default_k1_grid() -> Vec<f64> {
    log_grid(0.05, 3.0, 31)
}

pub fn default_c2_grid() -> Vec<f64> {
    log_grid(0.2, 5.0, 25)
}

fn default_methods() -> Vec<Method> {
    vec![Method::Ebc, Method::Nbc, Method::Uns]
}

fn default_grid_bl() -> Vec<(usize, usize)> {
    vec![
        (1, 2),
        (1, 5),
        (1, 10),
        (5, 2),
        (5, 5),
        (5, 10),
        (10, 2),
        (10, 5),
        (10, 10),
    ]
}

fn default_n() -> usize {
    100
}
fn default_x0() -> f64 {
    1.0
}
fn default_y() -> f64 {
    0.15
}
fn default_h() -> f64 {
    0.625
}
fn default_c0() -> f64 {
    0.5
}
fn default_draws() -> usize {
    10_000
}
fn default_oracle_r() -> usize {
    200_000
}

/// One Monte Carlo experiment. Every field has a default except the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "ProcessModel::reference")]
    pub model: ProcessModel,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_x0")]
    pub x0: f64,
    #[serde(default = "default_y")]
    pub y: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_grid_bl")]
    pub grid_bl: Vec<(usize, usize)>,
    #[serde(default = "default_k1_grid")]
    pub k1_grid: Vec<f64>,
    #[serde(default = "default_c2_grid")]
    pub c2_grid: Vec<f64>,
    #[serde(default = "default_c0")]
    pub c0: f64,
    /// Bootstrap draws per replication.
    #[serde(rename = "B", default = "default_draws")]
    pub draws: usize,
    /// Replications.
    #[serde(rename = "R", default = "default_draws")]
    pub replications: usize,
    #[serde(default = "default_oracle_r", alias = "oracle_R")]
    pub oracle_r: usize,
    #[serde(default)]
    pub master_seed: Option<u64>,
    /// Skips the oracle and uses this value as the truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_p: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be >= 2, got {}", self.n)));
        }
        positive("h", self.h)?;
        if !self.x0.is_finite() || !self.y.is_finite() {
            return Err(Error::Config("x0 and y must be finite".into()));
        }
        if !(self.c0 > 0.0 && self.c0 < 1.0) {
            return Err(Error::Config(format!("c0 must lie in (0, 1), got {}", self.c0)));
        }
        if self.draws == 0 || self.replications == 0 || self.oracle_r == 0 {
            return Err(Error::Config("B, R and oracle_r must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must be nonempty".into()));
        }
        if let Some(m) = self.methods.iter().find(|m| **m == Method::Custom) {
            return Err(Error::Config(format!("method {m} cannot be benchmarked")));
        }
        if self.grid_bl.is_empty() {
            return Err(Error::Config("grid_bl must be nonempty".into()));
        }
        if let Some((b, l)) = self.grid_bl.iter().find(|(b, l)| *b == 0 || *l == 0) {
            return Err(Error::Config(format!("grid_bl entries must be >= 1, got ({b}, {l})")));
        }
        let needs_k1 = self.methods.iter().any(|m| matches!(m, Method::Ebc | Method::Uns));
        if needs_k1 && self.k1_grid.is_empty() {
            return Err(Error::Config("k1_grid must be nonempty for EBC and UNS".into()));
        }
        if self.methods.contains(&Method::Ebc) && self.c2_grid.is_empty() {
            return Err(Error::Config("c2_grid must be nonempty for EBC".into()));
        }
        for &k in self.k1_grid.iter().chain(&self.c2_grid) {
            positive("grid value", k)?;
        }
        if let Some(p) = self.oracle_p {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("oracle_p must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> Result<u64> {
        self.master_seed
            .ok_or_else(|| Error::Config("master_seed is required".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.k1_grid.len(), 31);
        assert_eq!(cfg.c2_grid.len(), 25);
        assert_eq!(cfg.k1_grid[0], 0.05);
        assert_eq!(cfg.k1_grid[30], 3.0);
        assert_eq!(cfg.c0, 0.5);
        assert_eq!(cfg.draws, 10_000);
        assert!(cfg.seed().is_err());
        cfg.validate().unwrap();
    }

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"n": 200, "h": 0.82, "B": 500, "R": 20, "grid_bl": [[50, 4]], "methods": ["uns"], "master_seed": 7}"#,
        )
        .unwrap();
        assert_eq!(cfg.grid_bl, vec![(50, 4)]);
        assert_eq!(cfg.seed().unwrap(), 7);
        let err = ExperimentConfig::from_json_str(r#"{"bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_json_str(r#"{"c0": 1.0}"#).is_err());
        assert!(ExperimentConfig::from_json_str(r#"{"B": 0}"#).is_err());
        assert!(ExperimentConfig::from_json_str(r#"{"methods": ["uns"], "k1_grid": []}"#).is_err());
        assert!(ExperimentConfig::from_json_str(r#"{"methods": ["nbc"], "k1_grid": []}"#).is_ok());
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig {
            master_seed: Some(3),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&text).unwrap(), cfg);
    }
}
