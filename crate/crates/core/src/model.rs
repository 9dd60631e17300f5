//! Model parameters, box geometry, boundary conditions and the Ising
//! Hamiltonian.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Inverse critical temperature of the nearest-neighbour 2d Ising model,
/// the root of `sinh(2β) = 1`.
pub fn critical_beta() -> f64 {
    1f64.asinh() / 2.0
}

/// Spontaneous magnetization `m*(β) = (1 - sinh(2β)^-4)^(1/8)` (Onsager–Yang).
pub fn spontaneous_magnetization(beta: f64) -> Result<f64> {
    if !(beta > critical_beta()) {
        return Err(Error::Domain(format!("beta = {beta} is not above the critical value {}", critical_beta())));
    }
    let s = (2.0 * beta).sinh();
    Ok((1.0 - s.powi(-4)).powf(0.125))
}

/// Inverse temperature, tilt strength and box size. The field is always
/// derived as `h = λ / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub lambda: f64,
    pub n: usize,
}

impl ModelParams {
    pub fn new(beta: f64, lambda: f64, n: usize) -> Result<Self> {
        if !(beta > critical_beta()) {
            return Err(Error::Domain(format!("beta below critical: {beta} <= {:.10}", critical_beta())));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
        }
        Ok(Self { beta, lambda, n })
    }

    /// Parameters for toy boxes where β may sit anywhere and `n` only sets `h`.
    pub fn unchecked(beta: f64, lambda: f64, n: usize) -> Self {
        Self { beta, lambda, n }
    }

    pub fn h(&self) -> f64 {
        self.lambda / self.n as f64
    }

    pub fn m_star(&self) -> Result<f64> {
        spontaneous_magnetization(self.beta)
    }
}

/// Boundary condition on the exterior of the box.
#[derive(Debug, Clone, Copy, PartialEq, Hash, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// `η+ ≡ +1`
    Plus,
    /// `η- ≡ -1`
    Minus,
    /// `η±`: +1 on the closed upper half-plane, -1 below.
    Mixed,
    /// `-η±`, used for spin-flip duality checks.
    AntiMixed,
}

impl Boundary {
    pub fn spin(self, y: i64) -> i8 {
        match self {
            Boundary::Plus => 1,
            Boundary::Minus => -1,
            Boundary::Mixed => {
                if y >= 0 {
                    1
                } else {
                    -1
                }
            }
            Boundary::AntiMixed => {
                if y >= 0 {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Boundary::Plus => Boundary::Minus,
            Boundary::Minus => Boundary::Plus,
            Boundary::Mixed => Boundary::AntiMixed,
            Boundary::AntiMixed => Boundary::Mixed,
        }
    }
}

/// A rectangular box `{x_min..=x_max} × {0..=height}` with a frozen exterior.
///
/// `Λ_N` is `BoxGeometry::lambda_n(N)`; other shapes are used for exhaustive
/// checks on tiny boxes.
#[derive(Debug, Clone, Copy, PartialEq, Hash, Eq, Serialize, Deserialize)]
pub struct BoxGeometry {
    pub x_min: i64,
    pub x_max: i64,
    pub height: i64,
    pub boundary: Boundary,
}

impl BoxGeometry {
    /// `Λ_N = {-N..N} × {0..N}` with `η±`.
    pub fn lambda_n(n: usize) -> Self {
        let n = n as i64;
        Self { x_min: -n, x_max: n, height: n, boundary: Boundary::Mixed }
    }

    pub fn rect(x_min: i64, x_max: i64, height: i64, boundary: Boundary) -> Self {
        assert!(x_max >= x_min && height >= 0, "empty box");
        Self { x_min, x_max, height, boundary }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn width(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn rows(&self) -> usize {
        (self.height + 1) as usize
    }

    pub fn num_sites(&self) -> usize {
        self.width() * self.rows()
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= 0 && y <= self.height
    }

    #[inline]
    pub fn index(&self, x: i64, y: i64) -> usize {
        debug_assert!(self.contains(x, y));
        (y as usize) * self.width() + (x - self.x_min) as usize
    }

    #[inline]
    pub fn site(&self, idx: usize) -> (i64, i64) {
        let w = self.width();
        ((idx % w) as i64 + self.x_min, (idx / w) as i64)
    }

    /// Sites of the exterior boundary `∂ext` with their frozen spins.
    pub fn exterior_boundary(&self) -> Vec<((i64, i64), i8)> {
        let mut out = Vec::new();
        for x in self.x_min..=self.x_max {
            out.push(((x, -1), self.boundary.spin(-1)));
            out.push(((x, self.height + 1), self.boundary.spin(self.height + 1)));
        }
        for y in 0..=self.height {
            out.push(((self.x_min - 1, y), self.boundary.spin(y)));
            out.push(((self.x_max + 1, y), self.boundary.spin(y)));
        }
        out
    }
}

/// Spins on the box; the exterior is implied by the geometry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig {
    pub geometry: BoxGeometry,
    pub spins: Vec<i8>,
}

impl SpinConfig {
    pub fn uniform(geometry: BoxGeometry, spin: i8) -> Self {
        Self { geometry, spins: vec![spin; geometry.num_sites()] }
    }

    pub fn all_plus(geometry: BoxGeometry) -> Self {
        Self::uniform(geometry, 1)
    }

    /// Configuration whose interior spins are the bits of `mask` (bit set = -1),
    /// in row-major order.
    pub fn from_mask(geometry: BoxGeometry, mask: u64) -> Self {
        let spins = (0..geometry.num_sites()).map(|k| if (mask >> k) & 1 == 1 { -1 } else { 1 }).collect();
        Self { geometry, spins }
    }

    /// Spin at any lattice site, interior or exterior.
    #[inline]
    pub fn spin(&self, x: i64, y: i64) -> i8 {
        if self.geometry.contains(x, y) {
            self.spins[self.geometry.index(x, y)]
        } else {
            self.geometry.boundary.spin(y)
        }
    }

    pub fn set(&mut self, x: i64, y: i64, s: i8) {
        let idx = self.geometry.index(x, y);
        self.spins[idx] = s;
    }

    #[inline]
    pub fn neighbor_sum(&self, x: i64, y: i64) -> i32 {
        (self.spin(x - 1, y) + self.spin(x + 1, y) + self.spin(x, y - 1) + self.spin(x, y + 1)) as i32
    }

    pub fn magnetization(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    pub fn flipped(&self) -> Self {
        Self {
            geometry: self.geometry.with_boundary(self.geometry.boundary.flipped()),
            spins: self.spins.iter().map(|s| -s).collect(),
        }
    }
}

/// `H = -β Σ_{<ij>, {i,j}∩Λ≠∅} (σ_i σ_j - 1) - h Σ_{i∈Λ} σ_i`.
pub fn hamiltonian(config: &SpinConfig, params: &ModelParams) -> f64 {
    hamiltonian_with(config, params.beta, params.h())
}

pub fn hamiltonian_with(config: &SpinConfig, beta: f64, h: f64) -> f64 {
    let g = &config.geometry;
    let mut bond = 0i64;
    let mut field = 0i64;
    for y in 0..=g.height {
        for x in g.x_min..=g.x_max {
            let s = config.spin(x, y) as i64;
            field += s;
            // each bond with at least one interior end is counted once:
            // right and up neighbours always, left/down only if exterior
            bond += s * config.spin(x + 1, y) as i64 - 1;
            bond += s * config.spin(x, y + 1) as i64 - 1;
            if x == g.x_min {
                bond += s * config.spin(x - 1, y) as i64 - 1;
            }
            if y == 0 {
                bond += s * config.spin(x, y - 1) as i64 - 1;
            }
        }
    }
    -beta * bond as f64 - h * field as f64
}

/// Energy change of flipping the spin at `(x, y)`: `2σ(β Σ_j σ_j + h)`.
pub fn flip_delta(config: &SpinConfig, x: i64, y: i64, beta: f64, h: f64) -> f64 {
    let s = config.spin(x, y) as f64;
    2.0 * s * (beta * config.neighbor_sum(x, y) as f64 + h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_beta_values() {
        assert!(((2.0 * critical_beta()).sinh() - 1.0).abs() < 1e-14);
        assert!((critical_beta() - 0.4406867935).abs() < 1e-9);
        assert!(critical_beta() < 1.0);
    }

    #[test]
    fn magnetization_closed_form() {
        assert!(spontaneous_magnetization(critical_beta()).is_err());
        assert!(spontaneous_magnetization(0.3).is_err());
        // (1 - sinh(2)^-4)^(1/8) evaluated at 40 digits: 0.99927...
        let m = spontaneous_magnetization(1.0).unwrap();
        assert!((m - 0.99927).abs() < 1e-5, "{m}");
        assert!((spontaneous_magnetization(5.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn magnetization_increasing() {
        let grid: Vec<f64> = (0..=31).map(|k| 0.45 + 0.05 * k as f64).collect();
        for w in grid.windows(2) {
            assert!(spontaneous_magnetization(w[1]).unwrap() > spontaneous_magnetization(w[0]).unwrap());
        }
    }

    #[test]
    fn params_validate() {
        assert!(ModelParams::new(0.3, 1.0, 10).is_err());
        assert!(ModelParams::new(1.0, -1.0, 10).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1).is_err());
        let p = ModelParams::new(1.0, 2.0, 8).unwrap();
        assert_eq!(p.h(), 0.25);
    }

    #[test]
    fn box_counts() {
        for n in 2..6 {
            let g = BoxGeometry::lambda_n(n);
            assert_eq!(g.num_sites(), (2 * n + 1) * (n + 1));
            for ((_, y), s) in g.exterior_boundary() {
                assert_eq!(s, if y < 0 { -1 } else { 1 });
            }
        }
    }

    #[test]
    fn energy_examples() {
        let n = 4;
        let g = BoxGeometry::lambda_n(n).with_boundary(Boundary::Plus);
        let cfg = SpinConfig::all_plus(g);
        assert_eq!(hamiltonian_with(&cfg, 1.0, 0.0), 0.0);

        let mut one = cfg.clone();
        one.set(0, 2, -1);
        assert_eq!(hamiltonian_with(&one, 1.0, 0.0), 8.0);

        let g = BoxGeometry::lambda_n(n);
        let cfg = SpinConfig::all_plus(g);
        let expect = -0.5 * g.num_sites() as f64 + 2.0 * (2 * n + 1) as f64;
        assert!((hamiltonian_with(&cfg, 1.0, 0.5) - expect).abs() < 1e-12);
    }

    #[test]
    fn flip_delta_matches_energy_difference_5x5() {
        // 2^25 is too many; sweep a deterministic pseudo-random family instead
        // and cover every site for each.
        let g = BoxGeometry::rect(0, 4, 4, Boundary::Mixed);
        let mut state = 0x9E3779B97F4A7C15u64;
        for _ in 0..200 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let cfg = SpinConfig::from_mask(g, state & ((1 << 25) - 1));
            let e0 = hamiltonian_with(&cfg, 0.7, 0.3);
            for idx in 0..g.num_sites() {
                let (x, y) = g.site(idx);
                let mut c2 = cfg.clone();
                c2.spins[idx] = -c2.spins[idx];
                let d = hamiltonian_with(&c2, 0.7, 0.3) - e0;
                assert!((d - flip_delta(&cfg, x, y, 0.7, 0.3)).abs() < 1e-12);
            }
        }
    }
}
