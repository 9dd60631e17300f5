//! Airy function `Ai` and its derivative on `[-100, 100]`, and the zeros of
//! `Ai` and `Ai'`.
//!
//! Three evaluation routes are used: the Maclaurin series on `[-6, 2]`,
//! Taylor stepping of `y'' = x y` from tabulated nodes on `[-12, -6)` and
//! `(2, 8]`, and the large-argument expansions elsewhere. The positive
//! nodes are stepped leftwards from the expansion at 8, the direction in
//! which `Ai` dominates.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

/// `Ai(0) = 3^{-2/3} / Γ(2/3)`.
pub const AI0: f64 = 0.355_028_053_887_817_2;
/// `-Ai'(0) = 3^{-1/3} / Γ(1/3)`.
pub const AIP0_NEG: f64 = 0.258_819_403_792_806_8;

const SERIES_LIMIT: f64 = 6.0;
const ODE_LIMIT: f64 = -12.0;
const POS_SERIES_LIMIT: f64 = 2.0;
const POS_ODE_LIMIT: f64 = 8.0;
const NODE_SPACING: f64 = 0.5;
pub const MAX_ARGUMENT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AiryMethod {
    Series,
    Asymptotic,
    OdeIntegrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryEval {
    pub ai: f64,
    pub aip: f64,
    pub method: AiryMethod,
}

pub fn airy(x: f64) -> Result<AiryEval> {
    if !(x.abs() <= MAX_ARGUMENT) {
        return Err(Error::AccuracyRange(x));
    }
    Ok(airy_unchecked(x))
}

pub(crate) fn airy_unchecked(x: f64) -> AiryEval {
    if (-SERIES_LIMIT..=POS_SERIES_LIMIT).contains(&x) {
        let (ai, aip) = series(x);
        AiryEval { ai, aip, method: AiryMethod::Series }
    } else if (ODE_LIMIT..-SERIES_LIMIT).contains(&x) || (x > POS_SERIES_LIMIT && x <= POS_ODE_LIMIT) {
        let (ai, aip) = ode(x);
        AiryEval { ai, aip, method: AiryMethod::OdeIntegrated }
    } else {
        let (ai, aip) = asymptotic(x);
        AiryEval { ai, aip, method: AiryMethod::Asymptotic }
    }
}

pub fn ai(x: f64) -> f64 {
    airy_unchecked(x).ai
}

pub fn aip(x: f64) -> f64 {
    airy_unchecked(x).aip
}

/// Maclaurin series `Ai = Ai(0) f - (-Ai'(0)) g`.
pub fn series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut g, mut fp, mut gp) = (1.0, x, 0.0, 1.0);
    let (mut tf, mut tg, mut tfp, mut tgp) = (1.0, x, x * x / 2.0, 1.0);
    fp += tfp;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tfp *= x3 / ((3.0 * kf) * (3.0 * kf + 2.0));
        tgp *= x3 / ((3.0 * kf) * (3.0 * kf - 2.0));
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
        let small = 1e-18 * (1.0 + f.abs() + g.abs() + fp.abs() + gp.abs());
        if tf.abs().max(tg.abs()).max(tfp.abs()).max(tgp.abs()) < small {
            break;
        }
    }
    (AI0 * f - AIP0_NEG * g, AI0 * fp - AIP0_NEG * gp)
}

/// Coefficients `u_k`, `v_k` of the large-argument expansions.
fn uv() -> &'static (Vec<f64>, Vec<f64>) {
    static UV: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    UV.get_or_init(|| {
        let mut u = vec![1.0];
        let mut v = vec![1.0];
        for k in 1..60 {
            let kf = k as f64;
            let uk =
                u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
            u.push(uk);
            v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
        }
        (u, v)
    })
}

/// `Σ s_k c_k / ζ^k` over `k = start, start + step, ...`, with signs
/// alternating between consecutive retained terms and truncation at the
/// smallest term.
fn asym_sum(c: &[f64], zeta: f64, start: usize, step: usize) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        sum += sign * term;
        prev = term.abs();
        if prev < 1e-17 * sum.abs() {
            break;
        }
        sign = -sign;
        k += step;
    }
    sum
}

pub fn asymptotic(x: f64) -> (f64, f64) {
    let (u, v) = uv();
    let sqrt_pi = PI.sqrt();
    if x > 0.0 {
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let e = (-zeta).exp();
        let q = x.powf(0.25);
        let su = asym_sum(u, zeta, 0, 1);
        let sv = asym_sum(v, zeta, 0, 1);
        (e / (2.0 * sqrt_pi * q) * su, -q * e / (2.0 * sqrt_pi) * sv)
    } else {
        let z = -x;
        let zeta = 2.0 / 3.0 * z.powf(1.5);
        let q = z.powf(0.25);
        let (s, c) = (zeta - FRAC_PI_4).sin_cos();
        let u_even = asym_sum(u, zeta, 0, 2);
        let u_odd = asym_sum(u, zeta, 1, 2);
        let v_even = asym_sum(v, zeta, 0, 2);
        let v_odd = asym_sum(v, zeta, 1, 2);
        ((c * u_even + s * u_odd) / (sqrt_pi * q), q / sqrt_pi * (s * v_even - c * v_odd))
    }
}

/// Taylor expansion of `y'' = x y` about `x0` evaluated at `x0 + h`.
pub fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    // coefficients a_n of (x - x0)^n: a_{n+2} = (x0 a_n + a_{n-1}) / ((n+2)(n+1))
    let mut a = [0.0f64; 64];
    a[0] = y;
    a[1] = yp;
    a[2] = x0 * y / 2.0;
    for n in 1..62 {
        a[n + 2] = (x0 * a[n] + a[n - 1]) / (((n + 2) * (n + 1)) as f64);
    }
    let (mut val, mut der) = (0.0, 0.0);
    for n in (0..64).rev() {
        val = val * h + a[n];
    }
    for n in (1..64).rev() {
        der = der * h + n as f64 * a[n];
    }
    (val, der)
}

/// Nodes `(x, Ai, Ai')` at `-6, -6.5, ..., -12`, stepped from the series.
fn nodes() -> &'static Vec<(f64, f64, f64)> {
    static NODES: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let mut out = Vec::new();
        let mut x = -SERIES_LIMIT;
        let (mut y, mut yp) = series(x);
        out.push((x, y, yp));
        let steps = ((SERIES_LIMIT + ODE_LIMIT).abs() / NODE_SPACING).round() as usize;
        for _ in 0..steps {
            // two half steps per node for extra margin
            for _ in 0..2 {
                let (ny, nyp) = taylor_step(x, y, yp, -NODE_SPACING / 2.0);
                x -= NODE_SPACING / 2.0;
                y = ny;
                yp = nyp;
            }
            out.push((x, y, yp));
        }
        out
    })
}

/// Nodes at `8, 7.5, ..., 2`, stepped leftwards from the expansion at 8.
fn pos_nodes() -> &'static Vec<(f64, f64, f64)> {
    static NODES: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let mut x = POS_ODE_LIMIT;
        let (mut y, mut yp) = asymptotic(x);
        let mut out = vec![(x, y, yp)];
        let steps = ((POS_ODE_LIMIT - POS_SERIES_LIMIT) / NODE_SPACING).round() as usize;
        for _ in 0..steps {
            for _ in 0..2 {
                let (ny, nyp) = taylor_step(x, y, yp, -NODE_SPACING / 2.0);
                x -= NODE_SPACING / 2.0;
                y = ny;
                yp = nyp;
            }
            out.push((x, y, yp));
        }
        out
    })
}

fn ode(x: f64) -> (f64, f64) {
    let (nodes, i) = if x > 0.0 {
        (pos_nodes(), ((POS_ODE_LIMIT - x) / NODE_SPACING).round() as usize)
    } else {
        (nodes(), ((-SERIES_LIMIT - x) / NODE_SPACING).round() as usize)
    };
    let (x0, y, yp) = nodes[i.min(nodes.len() - 1)];
    taylor_step(x0, y, yp, x - x0)
}

/// `Ai'(x) / Ai(x)`, finite for all `x` above the first zero, including
/// arguments where `Ai` underflows.
pub fn log_derivative(x: f64) -> f64 {
    if x > POS_ODE_LIMIT {
        let (u, v) = uv();
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        -x.sqrt() * asym_sum(v, zeta, 0, 1) / asym_sum(u, zeta, 0, 1)
    } else {
        let e = airy_unchecked(x);
        e.aip / e.ai
    }
}

/// Initial guess `T(t)` for the `k`-th zero magnitude.
fn zero_guess(t: f64) -> f64 {
    let t2 = t.powi(-2);
    t.powf(2.0 / 3.0) * (1.0 + t2 * (5.0 / 48.0 - t2 * (5.0 / 36.0 - t2 * 77125.0 / 82944.0)))
}

/// Initial guess `U(t)` for the `k`-th zero magnitude of `Ai'`.
fn deriv_zero_guess(t: f64) -> f64 {
    let t2 = t.powi(-2);
    t.powf(2.0 / 3.0) * (1.0 - t2 * (7.0 / 48.0 - t2 * (35.0 / 288.0 - t2 * 181223.0 / 207360.0)))
}

/// Safeguarded Newton iteration for a root of `f` in `[lo, hi]`.
fn refine(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64, mut x: f64) -> f64 {
    let (flo, _) = f(lo);
    for _ in 0..100 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if newton > lo.min(hi) && newton < lo.max(hi) { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() < 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Sign-change bracket around `guess` for `f`, widening as needed.
fn bracket(f: &impl Fn(f64) -> (f64, f64), guess: f64) -> (f64, f64) {
    let mut w = 0.05;
    loop {
        let (a, b) = (guess - w, guess + w);
        if f(a).0 * f(b).0 <= 0.0 {
            return (a, b);
        }
        w *= 1.6;
        assert!(w < 2.0, "no sign change near {guess}");
    }
}

/// Asymptotic value `T(3π(4k - 1)/8)` of the `k`-th zero magnitude.
pub fn airy_zero_asymptotic(k: usize) -> f64 {
    zero_guess(3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0)
}

/// Magnitude `ω_k` of the `k`-th zero of `Ai` (`k >= 1`).
pub fn airy_zero(k: usize) -> f64 {
    assert!(k >= 1, "zeros are indexed from 1");
    let g = zero_guess(3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0);
    let f = |w: f64| {
        let e = airy_unchecked(-w);
        (e.ai, -e.aip)
    };
    let (lo, hi) = bracket(&f, g);
    refine(f, lo, hi, g)
}

/// Magnitude of the `k`-th zero of `Ai'` (`k >= 1`).
pub fn airy_deriv_zero(k: usize) -> f64 {
    assert!(k >= 1, "zeros are indexed from 1");
    let g = deriv_zero_guess(3.0 * PI * (4.0 * k as f64 - 3.0) / 8.0);
    let f = |w: f64| {
        let e = airy_unchecked(-w);
        // d/dw Ai'(-w) = -Ai''(-w) = w Ai(-w)
        (e.aip, w * e.ai)
    };
    let (lo, hi) = bracket(&f, g);
    refine(f, lo, hi, g)
}

/// First `count` zero magnitudes, cached.
pub fn airy_zeros(count: usize) -> Vec<f64> {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    let cached = CACHE.get_or_init(|| (1..=64).map(airy_zero).collect());
    if count <= cached.len() {
        cached[..count].to_vec()
    } else {
        (1..=count).map(airy_zero).collect()
    }
}
