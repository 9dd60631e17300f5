//! Path sampler for `dX = (φ0'/φ0)(X) dt + dW` on `(0, ∞)`.
//!
//! Near the origin the drift behaves like `1/X`, the drift of a Bessel(3)
//! process, so steps starting below `3√dt` use the exact Bessel(3)
//! transition `|X e1 + √dt G|` with `G` standard normal in three
//! dimensions. Other steps are Euler–Maruyama.

use super::spectral::{drift, FsParams};
use crate::error::{Error, Result};
use crate::rng::{domain, StreamKey};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const BESSEL_THRESHOLD: f64 = 3.0;
pub const MAX_VIOLATION_RATE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NearZeroRule {
    /// Exact Bessel(3) step when `X < 3√dt`.
    Bessel3,
    /// Plain Euler–Maruyama everywhere; non-positive proposals are counted
    /// and replaced by a Bessel(3) step.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsPath {
    pub dt: f64,
    /// `values[i]` is the position at time `i·dt`.
    pub values: Vec<f64>,
    pub rule: NearZeroRule,
    pub noise: bool,
    pub bessel_steps: usize,
    /// Euler proposals that left `(0, ∞)`.
    pub violations: usize,
}

impl FsPath {
    pub fn num_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.num_steps() as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.dt)
    }

    /// Value at time `t`, linearly interpolated.
    pub fn at(&self, t: f64) -> f64 {
        let s = (t / self.dt).clamp(0.0, self.num_steps() as f64);
        let i = (s.floor() as usize).min(self.num_steps().saturating_sub(1));
        let w = s - i as f64;
        if self.num_steps() == 0 {
            return self.values[0];
        }
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn violation_rate(&self) -> f64 {
        self.violations as f64 / self.num_steps().max(1) as f64
    }
}

fn bessel3_step<R: Rng + ?Sized>(x: f64, dt: f64, rng: &mut R) -> f64 {
    let s = dt.sqrt();
    let g: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
    ((x + s * g[0]).powi(2) + (s * g[1]).powi(2) + (s * g[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeScheme {
    pub dt: f64,
    pub rule: NearZeroRule,
    pub noise: bool,
}

impl SdeScheme {
    pub fn new(dt: f64) -> Self {
        Self { dt, rule: NearZeroRule::Bessel3, noise: true }
    }
}

fn validate(x0: f64, horizon: f64, dt: f64) -> Result<usize> {
    if !(x0 > 0.0) {
        return Err(Error::Domain(format!("start must be positive, got {x0}")));
    }
    if !(horizon > 0.0 && dt > 0.0) || dt > 1e-3 * horizon {
        return Err(Error::InvalidParameter(format!("need 0 < dt <= 1e-3 * horizon (dt = {dt}, horizon = {horizon})")));
    }
    Ok((horizon / dt).round() as usize)
}

fn check_rate(violations: usize, steps: usize) -> Result<()> {
    let rate = violations as f64 / steps.max(1) as f64;
    if rate > MAX_VIOLATION_RATE {
        return Err(Error::StepTooCoarse { rate });
    }
    Ok(())
}

pub fn sample_path_with<R: Rng + ?Sized>(
    params: &FsParams,
    x0: f64,
    horizon: f64,
    scheme: SdeScheme,
    rng: &mut R,
) -> Result<FsPath> {
    let path = run(params, x0, horizon, scheme, rng)?;
    check_rate(path.violations, path.num_steps())?;
    Ok(path)
}

fn run<R: Rng + ?Sized>(params: &FsParams, x0: f64, horizon: f64, scheme: SdeScheme, rng: &mut R) -> Result<FsPath> {
    let steps = validate(x0, horizon, scheme.dt)?;
    let dt = scheme.dt;
    let sq = dt.sqrt();
    let threshold = BESSEL_THRESHOLD * sq;
    let mut values = Vec::with_capacity(steps + 1);
    values.push(x0);
    let (mut x, mut bessel_steps, mut violations) = (x0, 0, 0);
    for _ in 0..steps {
        if !scheme.noise {
            // deterministic flow: clamp the step so it cannot cross the mode
            let b = drift(params, x)?;
            x = (x + b * dt).max(0.5 * x);
        } else if scheme.rule == NearZeroRule::Bessel3 && x < threshold {
            x = bessel3_step(x, dt, rng);
            bessel_steps += 1;
        } else {
            let g: f64 = rng.sample(StandardNormal);
            let next = x + drift(params, x)? * dt + sq * g;
            if next > 0.0 {
                x = next;
            } else {
                violations += 1;
                x = bessel3_step(x, dt, rng);
                bessel_steps += 1;
            }
        }
        values.push(x);
    }
    Ok(FsPath { dt, values, rule: scheme.rule, noise: scheme.noise, bessel_steps, violations })
}

pub fn sample_path<R: Rng + ?Sized>(params: &FsParams, x0: f64, horizon: f64, dt: f64, rng: &mut R) -> Result<FsPath> {
    sample_path_with(params, x0, horizon, SdeScheme::new(dt), rng)
}

/// Noise-free flow `dX = (φ0'/φ0)(X) dt`.
pub fn deterministic_flow(params: &FsParams, x0: f64, horizon: f64, dt: f64) -> Result<FsPath> {
    let scheme = SdeScheme { dt, rule: NearZeroRule::Bessel3, noise: false };
    sample_path_with(params, x0, horizon, scheme, &mut StreamKey::new(0, 0).stream(domain::FS_PATH, 0))
}

/// Independent paths, path `i` driven by stream `i` of `key`; `starts`
/// gives each path's initial value. The violation rate is pooled over the
/// ensemble.
pub fn sample_paths(
    params: &FsParams,
    starts: &[f64],
    horizon: f64,
    scheme: SdeScheme,
    key: StreamKey,
) -> Result<Vec<FsPath>> {
    let paths: Vec<FsPath> = starts
        .par_iter()
        .enumerate()
        .map(|(i, &x0)| {
            let mut rng = key.stream(domain::FS_PATH, i as u64);
            run(params, x0, horizon, scheme, &mut rng)
        })
        .collect::<Result<_>>()?;
    let violations = paths.iter().map(|p| p.violations).sum();
    check_rate(violations, paths.iter().map(FsPath::num_steps).sum())?;
    Ok(paths)
}
