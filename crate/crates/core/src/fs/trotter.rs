//! Trotter–Kurtz approximation of the Airy semigroup by the one-step
//! operator of the area-tilted walk,
//! `T f(x) = Σ p(θ, ζ) e^{-c θ x} f(x + ζ) 1{x + ζ >= 0}` on integer
//! heights, read on the grid `r = x · n^{-1/3} χ^{-1/2}`.

use super::quad;
use super::spectral::Spectrum;
use crate::error::{Error, Result};
use crate::walk::{StepLaw, TiltParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smooth bump `exp(-1 / (1 - u²))`, `u = (r - center) / radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
}

impl Bump {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || center - radius <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bump support ({}, {}) must lie in (0, ∞)",
                center - radius,
                center + radius
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let u = (r - self.center) / self.radius;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp()
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }
}

/// Fewest grid points across the support of the test function.
pub const MIN_POINTS_ACROSS_SUPPORT: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterKurtz {
    pub spacing: f64,
    /// `grid[x] = x · spacing`.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub iterations: usize,
}

/// `⌊t n^{2/3} / E θ⌋` applications of the one-step operator to `f`.
pub fn trotter_kurtz(law: &StepLaw, tilt: &TiltParams, f: &Bump, t: f64) -> Result<TrotterKurtz> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    let n = tilt.n;
    let spacing = 1.0 / (n.cbrt() * law.chi().sqrt());
    let (a, b) = f.support();
    if (b - a) / spacing < MIN_POINTS_ACROSS_SUPPORT {
        return Err(Error::GridResolution(format!(
            "spacing {spacing:.4} leaves fewer than {MIN_POINTS_ACROSS_SUPPORT} points across ({a}, {b})"
        )));
    }
    let r_max = b + 8.0 * t.sqrt() + 2.0;
    let h = (r_max / spacing).ceil() as usize;
    let grid: Vec<f64> = (0..=h).map(|x| x as f64 * spacing).collect();
    let mut values: Vec<f64> = grid.iter().map(|&r| f.eval(r)).collect();
    let iterations = (t * n.powf(2.0 / 3.0) / law.mean_theta()).floor() as usize;
    let c = tilt.c_tilt();
    let steps: Vec<(i64, f64)> = law.entries().iter().map(|(s, p)| (s.theta, *p)).collect();
    let zetas: Vec<i64> = law.entries().iter().map(|(s, _)| s.zeta).collect();
    let mut next = vec![0.0; h + 1];
    for _ in 0..iterations {
        for (x, out) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (&(theta, p), &zeta) in steps.iter().zip(&zetas) {
                let y = x as i64 + zeta;
                if y < 0 || y as usize > h {
                    continue;
                }
                acc += p * (-c * theta as f64 * x as f64).exp() * values[y as usize];
            }
            *out = acc;
        }
        std::mem::swap(&mut values, &mut next);
    }
    Ok(TrotterKurtz { spacing, grid, values, iterations })
}

/// `e^{tL} f` at the points `r` from the eigen-expansion, using every
/// stored mode.
pub fn airy_semigroup(spec: &Spectrum, f: &Bump, t: f64, r: &[f64]) -> Vec<f64> {
    let (a, b) = f.support();
    let coef: Vec<f64> = (0..spec.num_modes())
        .map(|k| {
            let w = (-spec.eigenvalue(k) * t).exp();
            w * quad::integrate(|y| spec.phi(k, y) * f.eval(y), a, b, 1e-13)
        })
        .collect();
    r.iter().map(|&x| coef.iter().enumerate().map(|(k, ck)| ck * spec.phi(k, x)).sum()).collect()
}

/// `e^{t ½Δ} f` with Dirichlet condition at 0, by the method of images.
pub fn dirichlet_heat(f: &Bump, t: f64, r: &[f64]) -> Vec<f64> {
    let (a, b) = f.support();
    if t == 0.0 {
        return r.iter().map(|&x| f.eval(x)).collect();
    }
    let g = |z: f64| (-z * z / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
    r.iter().map(|&x| quad::integrate(|y| (g(x - y) - g(x + y)) * f.eval(y), a, b, 1e-13)).collect()
}

/// `max_x |u_x - v_x|`.
pub fn sup_gap(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
