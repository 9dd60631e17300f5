use crate::cone::EffectiveWalk;
use crate::error::{Error, Result};
use crate::stats::quantiles;
use serde::{Deserialize, Serialize};

/// `A(S) = Σ θ_i Z_{i-1}`.
pub fn area(walk: &EffectiveWalk) -> Result<i64> {
    if let Some((i, p)) = walk.points.iter().enumerate().find(|(_, p)| p.y < 0) {
        return Err(Error::NegativeHeight { index: i, height: p.y });
    }
    Ok(walk.points.windows(2).map(|w| (w[1].x - w[0].x) * w[0].y).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSampleStats {
    pub area: i64,
    pub nsteps: usize,
    pub gap: f64,
    /// Horizontal span `T_ℓ - T_0`.
    pub length: i64,
    /// Interpolated height at the midpoint abscissa.
    pub midpoint_height: f64,
}

impl WalkSampleStats {
    pub fn of(walk: &EffectiveWalk) -> Result<Self> {
        let mid = 0.5 * (walk.start().x + walk.end().x) as f64;
        Ok(Self {
            area: area(walk)?,
            nsteps: walk.num_steps(),
            gap: walk.gap(),
            length: walk.span(),
            midpoint_height: walk.height_at(mid),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    /// Quantiles at the levels of [`SUMMARY_LEVELS`].
    pub quantiles: Vec<f64>,
}

pub const SUMMARY_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, variance, quantiles: quantiles(values, &SUMMARY_LEVELS) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkEnsembleStats {
    pub samples: Vec<WalkSampleStats>,
    pub area: Summary,
    pub nsteps: Summary,
    pub gap: Summary,
    /// Counts of integer-rounded midpoint heights, indexed by height.
    pub midpoint_histogram: Vec<u64>,
}

pub fn ensemble_stats(walks: &[EffectiveWalk]) -> Result<WalkEnsembleStats> {
    if walks.is_empty() {
        return Err(Error::InsufficientData("no walks".into()));
    }
    let samples = walks.iter().map(WalkSampleStats::of).collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&WalkSampleStats) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    let mut hist = Vec::new();
    for s in &samples {
        let b = s.midpoint_height.round() as usize;
        if hist.len() <= b {
            hist.resize(b + 1, 0);
        }
        hist[b] += 1;
    }
    Ok(WalkEnsembleStats {
        area: Summary::of(&col(|s| s.area as f64)),
        nsteps: Summary::of(&col(|s| s.nsteps as f64)),
        gap: Summary::of(&col(|s| s.gap)),
        midpoint_histogram: hist,
        samples,
    })
}
