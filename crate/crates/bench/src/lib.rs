//! Shared fixtures for the benchmarks.

use prewet_core::ising::ChainState;
use prewet_core::model::{spontaneous_magnetization, BoxGeometry};
use prewet_core::path::Point;
use prewet_core::rng::StreamKey;
use prewet_core::walk::{BridgeSampler, StepLaw, TiltParams};

/// Chain on `Λ_N` after `burnin` sweeps at `β = 1`, `λ = 1`.
pub fn warm_chain(n: usize, burnin: usize) -> ChainState {
    let mut chain = ChainState::new(BoxGeometry::lambda_n(n), StreamKey::new(1, 0));
    chain.run(burnin, 1.0, 1.0 / n as f64);
    chain
}

/// Tilted bridge sampler from `(-N, 0)` to `(N, 0)` under the default law.
pub fn bridge_sampler(n: usize, lambda: f64) -> BridgeSampler {
    let law = StepLaw::default_law();
    let tilt = TiltParams::new(lambda, spontaneous_magnetization(1.0).unwrap(), n).unwrap();
    let half = n as i64;
    BridgeSampler::new(&law, &tilt, Point::new(-half, 0), Point::new(half, 0)).unwrap()
}
