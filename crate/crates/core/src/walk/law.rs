use crate::cone::Step;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const SUM_TOL: f64 = 1e-12;

/// Increment distribution of the effective walk, supported in the forward
/// cone `{θ >= 1, |ζ| <= θ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLaw {
    entries: Vec<(Step, f64)>,
}

impl StepLaw {
    /// Law with zero vertical mean. Zero-probability entries are dropped.
    pub fn new(entries: Vec<(Step, f64)>) -> Result<Self> {
        let law = Self::with_drift(entries)?;
        let mz = law.mean_zeta();
        if mz.abs() > SUM_TOL {
            return Err(Error::InvalidParameter(format!("step law has nonzero vertical mean {mz}")));
        }
        Ok(law)
    }

    /// Law without the zero-mean requirement (used for exact-DP checks).
    pub fn with_drift(entries: Vec<(Step, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<Step, f64> = BTreeMap::new();
        for (s, p) in entries {
            if !s.in_cone() {
                return Err(Error::InvalidParameter(format!("step ({}, {}) is outside the cone", s.theta, s.zeta)));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidParameter(format!("invalid probability {p}")));
            }
            *merged.entry(s).or_insert(0.0) += p;
        }
        let entries: Vec<(Step, f64)> = merged.into_iter().filter(|&(_, p)| p > 0.0).collect();
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty step law".into()));
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParameter(format!("step probabilities sum to {total}")));
        }
        Ok(Self { entries })
    }

    /// Normalizes nonnegative weights and symmetrizes them in `ζ`.
    pub fn from_weights(weights: impl IntoIterator<Item = (Step, f64)>) -> Result<Self> {
        let mut sym: BTreeMap<Step, f64> = BTreeMap::new();
        for (s, w) in weights {
            if !(w >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative weight {w}")));
            }
            *sym.entry(s).or_insert(0.0) += 0.5 * w;
            *sym.entry(Step::new(s.theta, -s.zeta)).or_insert(0.0) += 0.5 * w;
        }
        let total: f64 = sym.values().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("step weights have zero mass".into()));
        }
        let mut entries: Vec<(Step, f64)> = sym.into_iter().map(|(s, w)| (s, w / total)).collect();
        // absorb rounding so that the sum is 1 to machine precision
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        let last = entries.len() - 1;
        entries[last].1 += 1.0 - sum;
        Self::new(entries)
    }

    /// Empirical law from observed step counts, symmetrized in `ζ`.
    pub fn from_histogram(counts: &BTreeMap<Step, u64>) -> Result<Self> {
        Self::from_weights(counts.iter().map(|(&s, &c)| (s, c as f64)))
    }

    /// Support `{1 <= θ <= 3, |ζ| <= θ}` with `p ∝ exp(-θ - |ζ|)`.
    pub fn default_law() -> Self {
        let mut w = Vec::new();
        for theta in 1..=3i64 {
            for zeta in -theta..=theta {
                w.push((Step::new(theta, zeta), (-(theta + zeta.abs()) as f64).exp()));
            }
        }
        Self::from_weights(w).expect("default law is valid")
    }

    pub fn entries(&self) -> &[(Step, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prob(&self, s: Step) -> f64 {
        self.entries.iter().find(|e| e.0 == s).map_or(0.0, |e| e.1)
    }

    pub fn theta_max(&self) -> i64 {
        self.entries.iter().map(|e| e.0.theta).max().unwrap()
    }

    pub fn zeta_max(&self) -> i64 {
        self.entries.iter().map(|e| e.0.zeta.abs()).max().unwrap()
    }

    pub fn mean_theta(&self) -> f64 {
        self.entries.iter().map(|(s, p)| s.theta as f64 * p).sum()
    }

    pub fn mean_zeta(&self) -> f64 {
        self.entries.iter().map(|(s, p)| s.zeta as f64 * p).sum()
    }

    pub fn var_zeta(&self) -> f64 {
        let m = self.mean_zeta();
        self.entries.iter().map(|(s, p)| (s.zeta as f64 - m).powi(2) * p).sum()
    }

    /// `Var(ζ) / E(θ)`.
    pub fn chi(&self) -> f64 {
        self.var_zeta() / self.mean_theta()
    }
}

/// Area-tilt strength `c = 2 λ m* / n` and the height cap of the DP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltParams {
    pub lambda: f64,
    pub m_star: f64,
    pub n: f64,
    pub h_max: usize,
    /// Largest admissible mass fraction in the top tenth of the cap, or
    /// `None` to disable the check.
    pub leak_tolerance: Option<f64>,
}

pub const DEFAULT_LEAK_TOLERANCE: f64 = 1e-3;

impl TiltParams {
    pub fn new(lambda: f64, m_star: f64, n: usize) -> Result<Self> {
        if !(lambda >= 0.0) || !(m_star > 0.0 && m_star <= 1.0) || n < 1 {
            return Err(Error::InvalidParameter(format!(
                "invalid tilt parameters lambda={lambda}, m*={m_star}, n={n}"
            )));
        }
        Ok(Self {
            lambda,
            m_star,
            n: n as f64,
            h_max: default_height_cap(n),
            leak_tolerance: Some(DEFAULT_LEAK_TOLERANCE),
        })
    }

    pub fn from_model(params: &ModelParams) -> Result<Self> {
        Self::new(params.lambda, params.m_star()?, params.n)
    }

    /// Tilt given directly by its coefficient `c`.
    pub fn from_coefficient(c_tilt: f64, h_max: usize) -> Self {
        Self { lambda: c_tilt / 2.0, m_star: 1.0, n: 1.0, h_max, leak_tolerance: None }
    }

    pub fn with_cap(mut self, h_max: usize) -> Self {
        self.h_max = h_max;
        self
    }

    pub fn with_leak_tolerance(mut self, tol: Option<f64>) -> Self {
        self.leak_tolerance = tol;
        self
    }

    pub fn c_tilt(&self) -> f64 {
        2.0 * self.lambda * self.m_star / self.n
    }
}

/// `⌈12 n^{1/3}⌉ + 16`, comfortably above the `4 n^{1/3}` guard.
pub fn default_height_cap(n: usize) -> usize {
    (12.0 * (n as f64).cbrt()).ceil() as usize + 16
}
