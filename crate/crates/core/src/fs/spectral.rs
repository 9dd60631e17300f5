//! Spectrum of the Airy operator `L f = ½ f'' - c r f` on `(0, ∞)` with
//! Dirichlet condition at 0, and the Ferrari–Spohn diffusion built from its
//! ground state.
//!
//! Eigenfunctions are `φ_k(r) = Ai(C r - ω_{k+1})`, `C = (2c/σ²)^{1/3}`,
//! with eigenvalues `-a_k`, `a_k = σ² C² ω_{k+1} / 2 = c ω_{k+1} / C`.

use super::airy::{self, airy_unchecked};
use super::quad;
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MODES: usize = 12;
pub const STORED_ZEROS: usize = 40;
/// `max |Ai|` on the real line, attained near `x = -1.0188`.
const AI_SUP: f64 = 0.535_656_656_015_700_4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsParams {
    c: f64,
    sigma: f64,
    big_c: f64,
    omega: Vec<f64>,
}

impl FsParams {
    pub fn new(c: f64) -> Result<Self> {
        Self::with_zeros(c, STORED_ZEROS)
    }

    pub fn with_zeros(c: f64, zeros: usize) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("potential slope must be positive, got {c}")));
        }
        if zeros == 0 {
            return Err(Error::InvalidParameter("at least one Airy zero is required".into()));
        }
        let sigma = 1.0;
        Ok(Self { c, sigma, big_c: (2.0 * c / (sigma * sigma)).cbrt(), omega: airy::airy_zeros(zeros) })
    }

    /// `c = 2 λ m* √χ`.
    pub fn from_walk(lambda: f64, m_star: f64, chi: f64) -> Result<Self> {
        if !(chi > 0.0) {
            return Err(Error::Domain(format!("chi must be positive, got {chi}")));
        }
        Self::new(2.0 * lambda * m_star * chi.sqrt())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn big_c(&self) -> f64 {
        self.big_c
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn num_zeros(&self) -> usize {
        self.omega.len()
    }

    /// `a_k`, `k = 0, 1, ...`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        0.5 * self.sigma * self.sigma * self.big_c * self.big_c * self.omega[k]
    }

    /// Unnormalized `Ai(C r - ω_{k+1})`.
    pub fn raw_mode(&self, k: usize, r: f64) -> f64 {
        airy_unchecked(self.big_c * r - self.omega[k]).ai
    }

    /// `∫_0^∞ Ai(C r - ω_{k+1})² dr = Ai'(-ω_{k+1})² / C`.
    pub fn closed_form_norm2(&self, k: usize) -> f64 {
        airy_unchecked(-self.omega[k]).aip.powi(2) / self.big_c
    }
}

/// `∫_0^∞ Ai(C r - ω)² dr` by quadrature in the Airy argument.
fn quadrature_norm2(big_c: f64, omega: f64) -> f64 {
    let f = |x: f64| airy_unchecked(x).ai.powi(2);
    let upper = 14.0;
    let tol = 1e-15 * (1.0 + omega);
    (quad::integrate(f, -omega, upper, tol) + quad::integrate_tail(f, upper, 1.0, 1e-24)) / big_c
}

/// The first `count` eigenpairs with L²-normalized eigenfunctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    params: FsParams,
    inv_norm: Vec<f64>,
}

impl Spectrum {
    pub fn new(params: FsParams) -> Self {
        let inv_norm = params.omega.iter().map(|&w| 1.0 / quadrature_norm2(params.big_c, w).sqrt()).collect();
        Self { params, inv_norm }
    }

    pub fn params(&self) -> &FsParams {
        &self.params
    }

    pub fn num_modes(&self) -> usize {
        self.inv_norm.len()
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.params.eigenvalue(k)
    }

    /// L² norm of the unnormalized mode, as computed by quadrature.
    pub fn quadrature_norm(&self, k: usize) -> f64 {
        1.0 / self.inv_norm[k]
    }

    /// Normalized `φ_k(r)`; zero for `r <= 0`.
    pub fn phi(&self, k: usize, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.inv_norm[k] * self.params.raw_mode(k, r)
    }

    pub fn phi_prime(&self, k: usize, r: f64) -> f64 {
        let p = &self.params;
        self.inv_norm[k] * p.big_c * airy_unchecked(p.big_c * r - p.omega[k]).aip
    }

    /// `sup_r |φ_k(r)|`.
    fn sup_bound(&self, k: usize) -> f64 {
        AI_SUP * self.inv_norm[k]
    }

    /// Bound on `Σ_{k >= modes} e^{-(a_k - a_0) t} sup|φ_k|²`, using the
    /// asymptotic zero spacing beyond the stored zeros.
    pub fn tail_bound(&self, t: f64, modes: usize) -> f64 {
        let p = &self.params;
        let a0 = p.eigenvalue(0);
        let mut sum = 0.0;
        for k in modes..modes + 400 {
            let (gap, sup2) = if k < self.num_modes() {
                (p.eigenvalue(k) - a0, self.sup_bound(k).powi(2))
            } else {
                let w = airy::airy_zero_asymptotic(k + 1);
                // |Ai'(-ω)|² >= √ω / π · (1 - 1/ω³) from the oscillatory envelope
                let norm2 = w.sqrt() / std::f64::consts::PI * (1.0 - w.powi(-3)) / p.big_c;
                (0.5 * p.big_c * p.big_c * w - a0, AI_SUP * AI_SUP / norm2)
            };
            let term = (-gap * t).exp() * sup2;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }
}

pub struct GroundState {
    pub a0: f64,
    pub big_c: f64,
    pub omega1: f64,
}

impl GroundState {
    /// `φ0(r) = Ai(C r - ω_1)`, unnormalized.
    pub fn phi(&self, r: f64) -> f64 {
        airy_unchecked(self.big_c * r - self.omega1).ai
    }
}

pub fn ground_state(params: &FsParams) -> GroundState {
    GroundState { a0: params.eigenvalue(0), big_c: params.big_c, omega1: params.omega[0] }
}

/// `ρ(r) = φ0(r)² / ∫ φ0²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDensity {
    big_c: f64,
    omega1: f64,
    /// `∫_0^∞ φ0²`, by quadrature.
    normalizer: f64,
    /// `Ai'(-ω_1)²`.
    aip2: f64,
}

impl StationaryDensity {
    pub fn new(params: &FsParams) -> Self {
        let omega1 = params.omega[0];
        Self {
            big_c: params.big_c,
            omega1,
            normalizer: quadrature_norm2(params.big_c, omega1),
            aip2: airy_unchecked(-omega1).aip.powi(2),
        }
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        airy_unchecked(self.big_c * r - self.omega1).ai.powi(2) / self.normalizer
    }

    /// Closed form `1 - (Ai'(X)² - X Ai(X)²) / Ai'(-ω_1)²`, `X = C r - ω_1`.
    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let x = self.big_c * r - self.omega1;
        if x > airy::MAX_ARGUMENT {
            return 1.0;
        }
        let e = airy_unchecked(x);
        (1.0 - (e.aip * e.aip - x * e.ai * e.ai) / self.aip2).clamp(0.0, 1.0)
    }

    /// Point where `Ai'(C r - ω_1) = 0`.
    pub fn mode(&self) -> f64 {
        (self.omega1 - airy::airy_deriv_zero(1)) / self.big_c
    }

    /// `E_ρ[r] = 2 ω_1 / (3 C)`.
    pub fn mean(&self) -> f64 {
        2.0 * self.omega1 / (3.0 * self.big_c)
    }

    /// Inverse of [`cdf`](Self::cdf) by bisection to `1e-14` relative.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let p = p.min(1.0 - 1e-16);
        let mut hi = 1.0 / self.big_c;
        while self.cdf(hi) < p {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

pub fn stationary_density(params: &FsParams) -> StationaryDensity {
    StationaryDensity::new(params)
}

/// `φ0'(r) / φ0(r) = C Ai'(C r - ω_1) / Ai(C r - ω_1)` for `r > 0`.
pub fn drift(params: &FsParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("drift is singular at r = {r} <= 0")));
    }
    Ok(params.big_c * airy::log_derivative(params.big_c * r - params.omega[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    /// Bound on the omitted part of the spectral sum.
    pub tail: f64,
    pub modes: usize,
}

/// Transition density of the Ferrari–Spohn diffusion from `r` to `y` in
/// time `t`, truncated to `modes` terms of its spectral expansion.
pub fn transition_kernel(spec: &Spectrum, t: f64, r: f64, y: f64, modes: usize, tolerance: f64) -> Result<KernelValue> {
    if !(t > 0.0) || !(r > 0.0) || !(y > 0.0) {
        return Err(Error::Domain(format!("kernel needs t, r, y > 0 (got {t}, {r}, {y})")));
    }
    if modes == 0 || modes > spec.num_modes() {
        return Err(Error::InvalidParameter(format!("modes must be in 1..={}, got {modes}", spec.num_modes())));
    }
    let a0 = spec.eigenvalue(0);
    let (p0r, p0y) = (spec.phi(0, r), spec.phi(0, y));
    let h = p0y / p0r;
    let mut sum = 0.0;
    for k in 0..modes {
        sum += (-(spec.eigenvalue(k) - a0) * t).exp() * spec.phi(k, r) * spec.phi(k, y);
    }
    let tail = spec.tail_bound(t, modes) * h.abs();
    if tail > tolerance {
        return Err(Error::ModesInsufficient { modes, tail, tolerance });
    }
    Ok(KernelValue { value: sum * h, tail, modes })
}

/// Joint density `ρ(r) p_t(r, y)` of the stationary diffusion at two times
/// `t` apart, in the symmetric form
/// `Σ e^{-(a_k - a_0) t} φ0(r) φ_k(r) φ0(y) φ_k(y)`.
pub fn joint_density(spec: &Spectrum, t: f64, r: f64, y: f64, modes: usize) -> f64 {
    let a0 = spec.eigenvalue(0);
    let (p0r, p0y) = (spec.phi(0, r), spec.phi(0, y));
    (0..modes.min(spec.num_modes()))
        .map(|k| (-(spec.eigenvalue(k) - a0) * t).exp() * spec.phi(k, r) * spec.phi(k, y))
        .sum::<f64>()
        * p0r
        * p0y
}

/// Kernel of the Airy semigroup `e^{tL}` itself (no ground-state transform).
pub fn semigroup_kernel(spec: &Spectrum, t: f64, r: f64, y: f64, modes: usize) -> f64 {
    (0..modes.min(spec.num_modes())).map(|k| (-spec.eigenvalue(k) * t).exp() * spec.phi(k, r) * spec.phi(k, y)).sum()
}
