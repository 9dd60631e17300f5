//! Run configuration: a TOML file with one section per command.
//!
//! Flags override the file, the file overrides built-in defaults.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ising: Option<IsingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fs: Option<FsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyze: Option<AnalyzeSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Sweeps per replica after burn-in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burnin: Option<usize>,
    /// Retained configurations per replica.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    /// Sets `m*` in the tilt `2 λ m* / N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Bridges per replica.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Step-law CSV (`theta,zeta,weight`); the built-in law when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    /// Number of density grid intervals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<PathBuf>>,
    /// Overrides the χ estimated from the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_time: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resamples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_len: Option<f64>,
}

macro_rules! overlay {
    ($t:ident { $($f:ident),* }) => {
        impl $t {
            /// Fields set in `top` win over `self`.
            pub fn overlay(self, top: Self) -> Self {
                Self { $($f: top.$f.or(self.$f)),* }
            }
        }
    };
}

overlay!(IsingSection { beta, lambda, n, sweeps, burnin, samples, thin });
overlay!(WalkSection { beta, lambda, n, samples, law });
overlay!(FsSection { beta, lambda, chi, n, kernel_times, kernel_points });
overlay!(AnalyzeSection { inputs, chi, window, times, two_time, resamples, kappa, c_area, c_len });

fn join<T>(a: Option<T>, b: Option<T>, f: impl FnOnce(T, T) -> T) -> Option<T> {
    match (a, b) {
        (Some(a), Some(b)) => Some(f(a, b)),
        (a, b) => b.or(a),
    }
}

impl RunConfig {
    pub fn overlay(self, top: Self) -> Self {
        Self {
            format_version: top.format_version.or(self.format_version),
            seed: top.seed.or(self.seed),
            replicas: top.replicas.or(self.replicas),
            out: top.out.or(self.out),
            ising: join(self.ising, top.ising, IsingSection::overlay),
            walk: join(self.walk, top.walk, WalkSection::overlay),
            fs: join(self.fs, top.fs, FsSection::overlay),
            analyze: join(self.analyze, top.analyze, AnalyzeSection::overlay),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::validation("config", e.message()))?;
        if let Some(v) = cfg.format_version.filter(|&v| v != FORMAT_VERSION) {
            return Err(CliError::validation("config", format!("unsupported format_version {v}")));
        }
        Ok(cfg)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a TOML config, or the `config` block of a run manifest when the
    /// file ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: crate::manifest::RunManifest = serde_json::from_str(&text)
                .map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))?;
            return Ok(m.config);
        }
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip() {
        let cfg = RunConfig {
            format_version: Some(1),
            seed: Some(u64::MAX),
            replicas: Some(3),
            out: Some("runs/a".into()),
            ising: Some(IsingSection { beta: Some(1.0), lambda: Some(0.1 + 0.2), n: Some(64), ..Default::default() }),
            fs: Some(FsSection { kernel_times: Some(vec![0.5, 1.0]), ..Default::default() }),
            analyze: Some(AnalyzeSection { two_time: Some((-0.25, 0.25)), ..Default::default() }),
            ..Default::default()
        };
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("seed = 1\nsede = 2\n").is_err());
        assert!(RunConfig::from_toml("[ising]\nbeta = 1.0\ntemperature = 3\n").is_err());
        assert!(RunConfig::from_toml("format_version = 9\n").is_err());
    }

    #[test]
    fn top_layer_wins() {
        let file = RunConfig::from_toml("seed = 1\n[ising]\nbeta = 2.0\nn = 10\n").unwrap();
        let flags = RunConfig { ising: Some(IsingSection { n: Some(20), ..Default::default() }), ..Default::default() };
        let m = file.overlay(flags);
        let s = m.ising.unwrap();
        assert_eq!((m.seed, s.beta, s.n), (Some(1), Some(2.0), Some(20)));
    }
}
