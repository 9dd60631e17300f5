//! Heat-bath Monte Carlo for the Ising model in a box with frozen exterior.

use crate::error::{Error, Result};
use crate::model::{BoxGeometry, ModelParams, SpinConfig};
use crate::rng::{domain, StreamKey};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Probability that the heat-bath update sets a spin to +1 given the sum of
/// its four neighbours.
pub fn heat_bath_prob(neighbor_sum: i32, beta: f64, h: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * (beta * neighbor_sum as f64 + h)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSchedule {
    pub burnin_sweeps: usize,
    pub thinning: usize,
    pub samples: usize,
}

impl SampleSchedule {
    pub fn new(burnin_sweeps: usize, thinning: usize, samples: usize) -> Result<Self> {
        if burnin_sweeps == 0 || thinning == 0 || samples == 0 {
            return Err(Error::InvalidParameter("burn-in, thinning and sample count must all be positive".into()));
        }
        Ok(Self { burnin_sweeps, thinning, samples })
    }

    /// Burn-in of `20·N` sweeps.
    pub fn default_for(n: usize, thinning: usize, samples: usize) -> Self {
        Self { burnin_sweeps: 20 * n.max(1), thinning: thinning.max(1), samples: samples.max(1) }
    }
}

/// A single Markov chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub config: SpinConfig,
    pub sweep_count: u64,
    pub key: StreamKey,
}

impl ChainState {
    /// Chain started from the all-plus interior.
    pub fn new(geometry: BoxGeometry, key: StreamKey) -> Self {
        Self { config: SpinConfig::all_plus(geometry), sweep_count: 0, key }
    }

    pub fn from_config(config: SpinConfig, key: StreamKey) -> Self {
        Self { config, sweep_count: 0, key }
    }

    /// One checkerboard sweep: both parity classes, each driven by the
    /// stream keyed on `(sweep, parity)`.
    pub fn sweep(&mut self, beta: f64, h: f64) {
        let table: [f64; 9] = std::array::from_fn(|k| heat_bath_prob(k as i32 - 4, beta, h));
        let g = self.config.geometry;
        let width = g.width() as i64;
        for parity in 0..2u64 {
            let mut rng = self.key.stream(domain::ISING_SWEEP, self.sweep_count * 2 + parity);
            for y in 0..=g.height {
                let start = g.x_min + ((parity as i64 + y + g.x_min).rem_euclid(2));
                let row = (y * width) as usize;
                let mut x = start;
                while x <= g.x_max {
                    let sum = self.config.neighbor_sum(x, y);
                    let u: f64 = rng.random();
                    let idx = row + (x - g.x_min) as usize;
                    self.config.spins[idx] = if u < table[(sum + 4) as usize] { 1 } else { -1 };
                    x += 2;
                }
            }
        }
        self.sweep_count += 1;
    }

    pub fn run(&mut self, sweeps: usize, beta: f64, h: f64) {
        for _ in 0..sweeps {
            self.sweep(beta, h);
        }
    }
}

/// `sweep` in functional form.
pub fn sweep(mut state: ChainState, params: &ModelParams) -> ChainState {
    state.sweep(params.beta, params.h());
    state
}

/// One retained configuration, tagged by replica and sample index.
#[derive(Debug, Clone)]
pub struct EnsembleSample {
    pub replica: usize,
    pub index: usize,
    pub config: SpinConfig,
}

/// Runs one replica and hands each retained configuration to `sink`.
pub fn run_replica<E, F>(
    params: &ModelParams,
    geometry: BoxGeometry,
    schedule: &SampleSchedule,
    seed: u64,
    replica: usize,
    mut sink: F,
) -> std::result::Result<(), E>
where
    F: FnMut(usize, &SpinConfig) -> std::result::Result<(), E>,
{
    let (beta, h) = (params.beta, params.h());
    let mut chain = ChainState::new(geometry, StreamKey::new(seed, replica as u64));
    chain.run(schedule.burnin_sweeps, beta, h);
    for index in 0..schedule.samples {
        chain.run(schedule.thinning, beta, h);
        sink(index, &chain.config)?;
    }
    Ok(())
}

/// Independent replicas run in parallel; output is replica-major,
/// sample-minor regardless of scheduling.
pub fn sample_ensemble(
    params: &ModelParams,
    geometry: BoxGeometry,
    schedule: &SampleSchedule,
    replicas: usize,
    seed: u64,
) -> Result<Vec<EnsembleSample>> {
    if replicas == 0 {
        return Err(Error::InvalidParameter("replicas must be >= 1".into()));
    }
    let per_replica: Vec<Vec<EnsembleSample>> = (0..replicas)
        .into_par_iter()
        .map(|replica| {
            let mut out = Vec::with_capacity(schedule.samples);
            run_replica::<std::convert::Infallible, _>(params, geometry, schedule, seed, replica, |index, cfg| {
                out.push(EnsembleSample { replica, index, config: cfg.clone() });
                Ok(())
            })
            .unwrap();
            out
        })
        .collect();
    Ok(per_replica.into_iter().flatten().collect())
}
