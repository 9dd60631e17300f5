//! The area-tilted effective random walk: step laws, exact transfer-matrix
//! weights, exact bridge sampling, rescalings and ensemble statistics.

pub mod dp;
pub mod law;
pub mod reference;
pub mod rescale;
pub mod sample;
pub mod stats;

pub use dp::{bridge_weight, column_dp, fdd_weights, n_step_partition, pinned_partition, ColumnTable};
pub use law::{default_height_cap, StepLaw, TiltParams};
pub use rescale::{rescale_diffusive, rescale_fixed_steps, time_change};
pub use sample::{endpoint_insensitivity, sample_tilted_bridge, BridgeSampler, Crossing};
pub use stats::{area, ensemble_stats, WalkEnsembleStats, WalkSampleStats};
