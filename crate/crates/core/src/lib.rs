//! Simulation and analysis of the prewetting interface in the
//! two-dimensional Ising model, its effective random-walk description and
//! the Ferrari–Spohn diffusion that arises as its scaling limit.

pub mod analysis;
pub mod cone;
pub mod error;
pub mod fs;
pub mod interface;
pub mod io;
pub mod ising;
pub mod model;
pub mod path;
pub mod profile;
pub mod rng;
pub mod stats;
pub mod walk;

pub use cone::{EffectiveWalk, Step};
pub use error::{Error, Result};
pub use model::{Boundary, BoxGeometry, ModelParams, SpinConfig};
pub use path::{LatticePath, Point};
pub use profile::PiecewiseLinear;
