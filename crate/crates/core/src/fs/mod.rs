//! The Ferrari–Spohn diffusion: Airy functions, the spectral decomposition
//! of `½ d²/dr² - c r` on `(0, ∞)` with Dirichlet condition, the diffusion's
//! stationary law, transition kernel, path sampler and the Trotter–Kurtz
//! approximation by tilted walks.

pub mod airy;
pub mod quad;
pub mod sde;
pub mod spectral;
pub mod trotter;
