//! Exact transfer-matrix computations for area-tilted walks in the upper
//! half-plane `{z >= 0}`, truncated at the height cap `H_max`.
//!
//! A step `(θ, ζ)` leaving height `z` carries weight `p(θ, ζ) exp(-c θ z)`,
//! so the product over a walk is `∏ p · exp(-c A)` with `A = Σ θ_i Z_{i-1}`.

use super::law::{StepLaw, TiltParams};
use crate::error::{Error, Result};
use crate::path::Point;

/// Steps with their per-height tilted weights.
#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    pub steps: Vec<(i64, i64)>,
    /// `weights[s][z] = p_s exp(-c θ_s z)` for `z` in `0..=h`.
    pub weights: Vec<Vec<f64>>,
    pub h: usize,
}

impl Kernel {
    pub fn new(law: &StepLaw, c_tilt: f64, h: usize) -> Self {
        let steps: Vec<(i64, i64)> = law.entries().iter().map(|(s, _)| (s.theta, s.zeta)).collect();
        let weights = law
            .entries()
            .iter()
            .map(|(s, p)| (0..=h).map(|z| p * (-c_tilt * s.theta as f64 * z as f64).exp()).collect())
            .collect();
        Self { steps, weights, h }
    }
}

/// Column-indexed table of weights with one log scale per column.
#[derive(Debug, Clone)]
pub struct ColumnTable {
    /// Absolute horizontal coordinate of column 0.
    pub x0: i64,
    pub span: usize,
    pub h_max: usize,
    values: Vec<f64>,
    log_scale: Vec<f64>,
}

impl ColumnTable {
    fn zeros(x0: i64, span: usize, h_max: usize) -> Self {
        Self { x0, span, h_max, values: vec![0.0; (span + 1) * (h_max + 1)], log_scale: vec![0.0; span + 1] }
    }

    fn col(&self, dx: usize) -> &[f64] {
        let w = self.h_max + 1;
        &self.values[dx * w..(dx + 1) * w]
    }

    fn col_mut(&mut self, dx: usize) -> &mut [f64] {
        let w = self.h_max + 1;
        &mut self.values[dx * w..(dx + 1) * w]
    }

    /// Scaled column values and their common log factor.
    pub fn column(&self, dx: usize) -> (&[f64], f64) {
        (self.col(dx), self.log_scale[dx])
    }

    fn rel(&self, x: i64, z: i64) -> Option<(usize, usize)> {
        let dx = x - self.x0;
        if dx < 0 || dx > self.span as i64 || z < 0 || z > self.h_max as i64 {
            None
        } else {
            Some((dx as usize, z as usize))
        }
    }

    /// `ln W(x, z)` at absolute coordinates; `-inf` when unreachable.
    pub fn log_weight(&self, x: i64, z: i64) -> f64 {
        match self.rel(x, z) {
            Some((dx, z)) => {
                let v = self.col(dx)[z];
                if v > 0.0 {
                    v.ln() + self.log_scale[dx]
                } else {
                    f64::NEG_INFINITY
                }
            }
            None => f64::NEG_INFINITY,
        }
    }

    pub fn weight(&self, x: i64, z: i64) -> f64 {
        self.log_weight(x, z).exp()
    }

    fn normalize(&mut self, dx: usize, base: f64) {
        let col = self.col_mut(dx);
        let m = col.iter().cloned().fold(0.0, f64::max);
        if m > 0.0 {
            col.iter_mut().for_each(|v| *v /= m);
            self.log_scale[dx] = base + m.ln();
        } else {
            self.log_scale[dx] = base;
        }
    }
}

fn check_start(u: Point, h_max: usize) -> Result<()> {
    if u.y < 0 {
        return Err(Error::NegativeHeight { index: 0, height: u.y });
    }
    if u.y > h_max as i64 {
        return Err(Error::CapTooSmall { cap: h_max, fraction: 1.0 });
    }
    Ok(())
}

/// First height counted in the top tenth of the cap.
pub(crate) fn top_zone(h_max: usize) -> usize {
    h_max - h_max / 10
}

pub(crate) fn check_leak(tilt: &TiltParams, fraction: f64) -> Result<()> {
    match tilt.leak_tolerance {
        Some(tol) if fraction >= tol => Err(Error::CapTooSmall { cap: tilt.h_max, fraction }),
        _ => Ok(()),
    }
}

/// Forward weights `W(x, z)` of all walks from `u` with horizontal
/// coordinate in `u.x ..= u.x + span`, without the leak check.
pub(crate) fn forward_table(kernel: &Kernel, u: Point, span: usize) -> ColumnTable {
    let h = kernel.h;
    let mut t = ColumnTable::zeros(u.x, span, h);
    t.col_mut(0)[u.y as usize] = 1.0;
    let mut raw = vec![0.0; h + 1];
    for dx in 1..=span {
        raw.iter_mut().for_each(|v| *v = 0.0);
        let base = t.log_scale[dx - 1];
        for (s, &(theta, zeta)) in kernel.steps.iter().enumerate() {
            let theta = theta as usize;
            if theta > dx {
                continue;
            }
            let src = dx - theta;
            let factor = (t.log_scale[src] - base).exp();
            let w = &kernel.weights[s];
            let col = t.col(src);
            let (lo, hi) = shifted_range(zeta, h);
            for zp in lo..=hi {
                let v = col[zp];
                if v != 0.0 {
                    raw[(zp as i64 + zeta) as usize] += v * w[zp] * factor;
                }
            }
        }
        t.col_mut(dx).copy_from_slice(&raw);
        t.normalize(dx, base);
    }
    t
}

/// Backward weights `B(x, z)` of all walks from `(x, z)` to `v` whose
/// horizontal coordinate stays in `v.x - span ..= v.x`.
pub(crate) fn backward_table(kernel: &Kernel, v: Point, span: usize) -> ColumnTable {
    let h = kernel.h;
    let mut t = ColumnTable::zeros(v.x - span as i64, span, h);
    if v.y >= 0 && v.y <= h as i64 {
        t.col_mut(span)[v.y as usize] = 1.0;
    }
    let mut raw = vec![0.0; h + 1];
    for dx in (0..span).rev() {
        raw.iter_mut().for_each(|v| *v = 0.0);
        let base = t.log_scale[dx + 1];
        for (s, &(theta, zeta)) in kernel.steps.iter().enumerate() {
            let dst = dx + theta as usize;
            if dst > span {
                continue;
            }
            let factor = (t.log_scale[dst] - base).exp();
            let w = &kernel.weights[s];
            let col = t.col(dst);
            let (lo, hi) = shifted_range(zeta, h);
            for z in lo..=hi {
                let b = col[(z as i64 + zeta) as usize];
                if b != 0.0 {
                    raw[z] += w[z] * b * factor;
                }
            }
        }
        t.col_mut(dx).copy_from_slice(&raw);
        t.normalize(dx, base);
    }
    t
}

/// Source heights `z` for which `z + ζ` stays in `0..=h`.
#[inline]
fn shifted_range(zeta: i64, h: usize) -> (usize, usize) {
    let lo = (-zeta).max(0) as usize;
    let hi = (h as i64 - zeta.max(0)).max(-1);
    if hi < lo as i64 {
        (1, 0)
    } else {
        (lo, hi as usize)
    }
}

/// Tilted weights `W(x, z)` of walks from `u` staying in `0 <= z <= H_max`,
/// organized by horizontal coordinate.
///
/// Fails with `CapTooSmall` when the terminal column carries at least the
/// leak tolerance in the top tenth of the cap.
pub fn column_dp(law: &StepLaw, tilt: &TiltParams, u: Point, span: usize) -> Result<ColumnTable> {
    if span == 0 {
        return Err(Error::InvalidParameter("span must be at least 1".into()));
    }
    check_start(u, tilt.h_max)?;
    let kernel = Kernel::new(law, tilt.c_tilt(), tilt.h_max);
    let table = forward_table(&kernel, u, span);
    if tilt.leak_tolerance.is_some() {
        let (col, _) = table.column(span);
        let total: f64 = col.iter().sum();
        if total > 0.0 {
            let top: f64 = col[top_zone(tilt.h_max)..].iter().sum();
            check_leak(tilt, top / total)?;
        }
    }
    Ok(table)
}

/// Height-only DP over `n` steps: returns `ln Σ_z g_n(z) f(z)` pieces as the
/// final scaled vector and its log factor.
fn n_step_vector(kernel: &Kernel, z0: usize, n_steps: usize) -> (Vec<f64>, f64) {
    let h = kernel.h;
    let mut g = vec![0.0; h + 1];
    g[z0] = 1.0;
    let mut log_scale = 0.0;
    let mut next = vec![0.0; h + 1];
    for _ in 0..n_steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (s, &(_, zeta)) in kernel.steps.iter().enumerate() {
            let w = &kernel.weights[s];
            let (lo, hi) = shifted_range(zeta, h);
            for z in lo..=hi {
                if g[z] != 0.0 {
                    next[(z as i64 + zeta) as usize] += g[z] * w[z];
                }
            }
        }
        let m = next.iter().cloned().fold(0.0, f64::max);
        if m > 0.0 {
            next.iter_mut().for_each(|v| *v /= m);
            log_scale += m.ln();
        }
        std::mem::swap(&mut g, &mut next);
    }
    (g, log_scale)
}

/// `G^n[f](u) = E_u[exp(-c A(S[0,n])) f(Z_n); S[0,n] ⊂ H_+]`, with walks
/// above the cap excluded.
pub fn n_step_partition(
    law: &StepLaw,
    tilt: &TiltParams,
    u: Point,
    n_steps: usize,
    f: impl Fn(i64) -> f64,
) -> Result<f64> {
    check_start(u, tilt.h_max)?;
    let reach = u.y as usize + n_steps * law.zeta_max() as usize;
    let cap = tilt.h_max.min(reach);
    let kernel = Kernel::new(law, tilt.c_tilt(), cap);
    let (g, log_scale) = n_step_vector(&kernel, u.y as usize, n_steps);
    if cap == tilt.h_max && tilt.leak_tolerance.is_some() {
        let total: f64 = g.iter().sum();
        if total > 0.0 {
            let top: f64 = g[top_zone(cap)..].iter().sum();
            check_leak(tilt, top / total)?;
        }
    }
    let s: f64 = g.iter().enumerate().map(|(z, &v)| v * f(z as i64)).sum();
    Ok(s * log_scale.exp())
}

/// Pinned DP over step index and `(x - u.x, z)`, multiplying by `f_{n_i}`
/// after step `n_i`. Returns the scaled value and its log factor.
fn pinned_dp(kernel: &Kernel, u: Point, v: Point, n_steps: usize, marks: &[(usize, &dyn Fn(i64) -> f64)]) -> f64 {
    let span = (v.x - u.x) as usize;
    let h = kernel.h;
    let w = h + 1;
    let idx = |dx: usize, z: usize| dx * w + z;
    let mut g = vec![0.0; (span + 1) * w];
    g[idx(0, u.y as usize)] = 1.0;
    let mut next = vec![0.0; g.len()];
    let mut log_scale = 0.0;
    let mut mark = 0;
    for step in 1..=n_steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (s, &(theta, zeta)) in kernel.steps.iter().enumerate() {
            let theta = theta as usize;
            let wt = &kernel.weights[s];
            let (lo, hi) = shifted_range(zeta, h);
            for dx in 0..=span.saturating_sub(theta) {
                if dx + theta > span {
                    continue;
                }
                for z in lo..=hi {
                    let val = g[idx(dx, z)];
                    if val != 0.0 {
                        next[idx(dx + theta, (z as i64 + zeta) as usize)] += val * wt[z];
                    }
                }
            }
        }
        while mark < marks.len() && marks[mark].0 == step {
            let f = marks[mark].1;
            for dx in 0..=span {
                for z in 0..=h {
                    next[idx(dx, z)] *= f(z as i64);
                }
            }
            mark += 1;
        }
        let m = next.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if m > 0.0 {
            next.iter_mut().for_each(|v| *v /= m);
            log_scale += m.ln();
        }
        std::mem::swap(&mut g, &mut next);
    }
    if v.y < 0 || v.y > h as i64 {
        return 0.0;
    }
    g[idx(span, v.y as usize)] * log_scale.exp()
}

fn check_pinned(u: Point, v: Point, tilt: &TiltParams) -> Result<()> {
    check_start(u, tilt.h_max)?;
    if v.y < 0 {
        return Err(Error::NegativeHeight { index: 1, height: v.y });
    }
    if v.x < u.x {
        return Err(Error::InvalidParameter("endpoint lies to the left of the start".into()));
    }
    Ok(())
}

/// Fraction of the pinned weight carried by walks that enter the top tenth
/// of the cap, from the difference with a DP capped just below it.
fn pinned_leak(law: &StepLaw, tilt: &TiltParams, u: Point, v: Point, n_steps: usize, total: f64) -> Result<()> {
    if tilt.leak_tolerance.is_none() || total <= 0.0 {
        return Ok(());
    }
    let reach = u.y as usize + n_steps * law.zeta_max() as usize;
    if reach < tilt.h_max {
        return Ok(());
    }
    let low_cap = top_zone(tilt.h_max) - 1;
    if (u.y as usize) > low_cap || (v.y as usize) > low_cap {
        return check_leak(tilt, 1.0);
    }
    let kernel = Kernel::new(law, tilt.c_tilt(), low_cap);
    let restricted = pinned_dp(&kernel, u, v, n_steps, &[]);
    check_leak(tilt, (1.0 - restricted / total).max(0.0))
}

/// `G^{u,v;n}`: weight of `n`-step walks from `u` to `v` in `H_+`.
pub fn pinned_partition(law: &StepLaw, tilt: &TiltParams, u: Point, v: Point, n_steps: usize) -> Result<f64> {
    fdd_weights(law, tilt, u, v, n_steps, &[])
}

/// Chained product of pinned kernels with height functions `f_{n_i}`
/// evaluated at the walk's height after step `n_i`.
pub fn fdd_weights(
    law: &StepLaw,
    tilt: &TiltParams,
    u: Point,
    v: Point,
    n_steps: usize,
    marks: &[(usize, &dyn Fn(i64) -> f64)],
) -> Result<f64> {
    check_pinned(u, v, tilt)?;
    for w in marks.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::InvalidParameter("marked times must be strictly increasing".into()));
        }
    }
    if let (Some(first), Some(last)) = (marks.first(), marks.last()) {
        if first.0 < 1 || last.0 >= n_steps {
            return Err(Error::InvalidParameter("marked times must lie in 1..n".into()));
        }
    }
    let kernel = Kernel::new(law, tilt.c_tilt(), tilt.h_max);
    let plain = pinned_dp(&kernel, u, v, n_steps, &[]);
    pinned_leak(law, tilt, u, v, n_steps, plain)?;
    if marks.is_empty() {
        Ok(plain)
    } else {
        Ok(pinned_dp(&kernel, u, v, n_steps, marks))
    }
}

/// Total weight of bridges from `u` to `v` with any number of steps.
pub fn bridge_weight(law: &StepLaw, tilt: &TiltParams, u: Point, v: Point) -> Result<f64> {
    check_pinned(u, v, tilt)?;
    if v.x == u.x {
        return Ok(if u == v { 1.0 } else { 0.0 });
    }
    let kernel = Kernel::new(law, tilt.c_tilt(), tilt.h_max);
    let t = forward_table(&kernel, u, (v.x - u.x) as usize);
    Ok(t.weight(v.x, v.y))
}
