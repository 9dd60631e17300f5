//! Comparison of rescaled interfaces and walks with the Ferrari–Spohn
//! reference, and the finite-`N` diagnostics of the Ising interface.

use crate::cone::EffectiveWalk;
use crate::error::{Error, Result};
use crate::fs::spectral::{joint_density, Spectrum, StationaryDensity};
use crate::interface::InterfaceProfile;
use crate::profile::PiecewiseLinear;
use crate::rng::{domain, StreamKey};
use crate::stats::{self, Interval};
use crate::walk::rescale_diffusive;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const MIN_KS_SAMPLES: usize = 100;
pub const DEFAULT_WINDOW: f64 = 0.5;
pub const DEFAULT_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Ising,
    Walk,
    Fs,
}

/// Rescaled profiles sharing the window `[-window, window]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledEnsemble {
    pub provenance: Provenance,
    pub n: f64,
    pub lambda: f64,
    pub beta: Option<f64>,
    pub chi: f64,
    pub window: f64,
    pub profiles: Vec<PiecewiseLinear>,
}

impl RescaledEnsemble {
    pub fn new(
        provenance: Provenance,
        n: f64,
        lambda: f64,
        beta: Option<f64>,
        chi: f64,
        window: f64,
        profiles: Vec<PiecewiseLinear>,
    ) -> Result<Self> {
        if !(window > 0.0) {
            return Err(Error::InvalidParameter(format!("window must be positive, got {window}")));
        }
        for (i, p) in profiles.iter().enumerate() {
            let (a, b) = p.domain();
            if a > -window || b < window {
                return Err(Error::InvalidParameter(format!(
                    "profile {i} covers [{a}, {b}], not the window [-{window}, {window}]"
                )));
            }
            let inside = p.knots().iter().filter(|k| k.0.abs() <= window).map(|k| k.1);
            let ends = [p.eval(-window), p.eval(window)];
            if inside.chain(ends).any(|v| v < 0.0) {
                return Err(Error::InvalidParameter(format!("profile {i} is negative in the window")));
            }
        }
        Ok(Self { provenance, n, lambda, beta, chi, window, profiles })
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn values_at(&self, t: f64) -> Vec<f64> {
        self.profiles.iter().map(|p| p.eval(t)).collect()
    }
}

/// `ĝ+(t) = n^{-1/3} χ^{-1/2} γ+(n^{2/3} t)`, with knots at the columns.
pub fn rescale_interface(profile: &InterfaceProfile, n: f64, chi: f64) -> Result<PiecewiseLinear> {
    if !(chi > 0.0) {
        return Err(Error::InvalidParameter(format!("chi must be positive, got {chi}")));
    }
    let (ht, hz) = (n.powf(2.0 / 3.0), n.cbrt() * chi.sqrt());
    Ok(PiecewiseLinear::new(
        (profile.x_min..=profile.x_max()).map(|i| (i as f64 / ht, profile.gamma_plus_at(i) as f64 / hz)).collect(),
    ))
}

pub fn rescale_walks(walks: &[EffectiveWalk], n: f64, chi: f64) -> Result<Vec<PiecewiseLinear>> {
    walks.iter().map(|w| rescale_diffusive(w, n, chi)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// 95% percentile bootstrap interval.
    pub ci: Interval,
    pub samples: usize,
}

/// One-sample KS distance between `values` and the stationary CDF.
pub fn ks_values_against_fs(values: &[f64], rho: &StationaryDensity, resamples: usize, seed: u64) -> Result<KsResult> {
    if values.len() < MIN_KS_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "KS needs at least {MIN_KS_SAMPLES} samples, got {}",
            values.len()
        )));
    }
    let statistic = stats::ks_statistic(values, |r| rho.cdf(r));
    let mut buf = vec![0.0; values.len()];
    let reps = stats::bootstrap(values.len(), resamples, seed, |idx| {
        for (b, &i) in buf.iter_mut().zip(idx) {
            *b = values[i];
        }
        stats::ks_statistic(&buf, |r| rho.cdf(r))
    });
    Ok(KsResult {
        statistic,
        p_value: stats::ks_pvalue(statistic, values.len()),
        ci: stats::percentile_interval(&reps, 0.05),
        samples: values.len(),
    })
}

pub fn ks_against_fs(
    ensemble: &RescaledEnsemble,
    t0: f64,
    rho: &StationaryDensity,
    resamples: usize,
    seed: u64,
) -> Result<KsResult> {
    ks_values_against_fs(&ensemble.values_at(t0), rho, resamples, seed)
}

/// Square grid `[0, r_max]²` with `bins` cells per side and one overflow
/// cell for pairs leaving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeGrid {
    pub bins: usize,
    pub r_max: f64,
}

impl TwoTimeGrid {
    fn cell(&self, r: f64, y: f64) -> usize {
        let w = self.r_max / self.bins as f64;
        if r < 0.0 || y < 0.0 || r >= self.r_max || y >= self.r_max {
            return self.bins * self.bins;
        }
        let (i, j) = ((r / w) as usize, (y / w) as usize);
        i.min(self.bins - 1) * self.bins + j.min(self.bins - 1)
    }

    pub fn num_cells(&self) -> usize {
        self.bins * self.bins + 1
    }
}

const GL4_X: [f64; 4] =
    [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_W: [f64; 4] =
    [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// Cell probabilities of `ρ(r) p_t(r, y)`, the last entry being the
/// overflow cell.
pub fn two_time_prediction(spec: &Spectrum, dt: f64, grid: TwoTimeGrid) -> Vec<f64> {
    let w = grid.r_max / grid.bins as f64;
    let mut probs = vec![0.0; grid.num_cells()];
    let nodes: Vec<(usize, f64, f64)> = (0..grid.bins)
        .flat_map(|i| (0..4).map(move |q| (i, w * (i as f64 + 0.5 + 0.5 * GL4_X[q]), 0.5 * w * GL4_W[q])))
        .collect();
    let mut inside = 0.0;
    for &(i, r, wr) in &nodes {
        for &(j, y, wy) in &nodes {
            let v = wr * wy * joint_density(spec, dt, r, y, spec.num_modes());
            probs[i * grid.bins + j] += v;
            inside += v;
        }
    }
    probs[grid.bins * grid.bins] = (1.0 - inside).max(0.0);
    probs
}

/// Product of the stationary marginals on the same cells.
pub fn product_prediction(rho: &StationaryDensity, grid: TwoTimeGrid) -> Vec<f64> {
    let w = grid.r_max / grid.bins as f64;
    let m: Vec<f64> = (0..grid.bins).map(|i| rho.cdf(w * (i + 1) as f64) - rho.cdf(w * i as f64)).collect();
    let mut probs: Vec<f64> = m.iter().flat_map(|a| m.iter().map(move |b| a * b)).collect();
    let inside: f64 = probs.iter().sum();
    probs.push((1.0 - inside).max(0.0));
    probs
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn two_time_histogram(pairs: &[(f64, f64)], grid: TwoTimeGrid) -> Vec<f64> {
    let mut h = vec![0.0; grid.num_cells()];
    let inc = 1.0 / pairs.len() as f64;
    for &(r, y) in pairs {
        h[grid.cell(r, y)] += inc;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeResult {
    pub t1: f64,
    pub t2: f64,
    pub grid: TwoTimeGrid,
    /// L¹ distance between empirical and predicted cell probabilities.
    pub discrepancy: f64,
    pub samples: usize,
}

pub fn two_time_check(
    ensemble: &RescaledEnsemble,
    (t1, t2): (f64, f64),
    spec: &Spectrum,
    grid: TwoTimeGrid,
) -> Result<TwoTimeResult> {
    if !(t1 < t2) || t1 < -ensemble.window || t2 > ensemble.window {
        return Err(Error::InvalidParameter(format!(
            "need -{w} <= t1 < t2 <= {w}, got ({t1}, {t2})",
            w = ensemble.window
        )));
    }
    if ensemble.len() < MIN_KS_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "two-time check needs at least {MIN_KS_SAMPLES} samples, got {}",
            ensemble.len()
        )));
    }
    let pairs: Vec<(f64, f64)> = ensemble.profiles.iter().map(|p| (p.eval(t1), p.eval(t2))).collect();
    let pred = two_time_prediction(spec, t2 - t1, grid);
    let emp = two_time_histogram(&pairs, grid);
    Ok(TwoTimeResult { t1, t2, grid, discrepancy: l1_distance(&emp, &pred), samples: pairs.len() })
}

/// Quantile at `level` of the L¹ distance between multinomial histograms of
/// `samples` draws from `probs` and `probs` itself.
pub fn l1_null_quantile(probs: &[f64], samples: usize, resamples: usize, level: f64, seed: u64) -> f64 {
    let mut cum = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cum.push(acc);
    }
    let key = StreamKey::new(seed, 1);
    let mut dists: Vec<f64> = (0..resamples)
        .map(|b| {
            let mut rng = key.stream(domain::BOOTSTRAP, b as u64);
            let mut h = vec![0.0; probs.len()];
            for _ in 0..samples {
                let u = rng.random::<f64>() * acc;
                let k = cum.partition_point(|&c| c <= u).min(probs.len() - 1);
                h[k] += 1.0 / samples as f64;
            }
            l1_distance(&h, probs)
        })
        .collect();
    dists.sort_by(f64::total_cmp);
    stats::quantile_sorted(&dists, level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% percentile bootstrap interval for the slope.
    pub ci: Interval,
}

/// OLS slope of `ln(mean height)` against `ln n`; the bootstrap resamples
/// each ensemble independently.
pub fn height_scaling_fit(ns: &[f64], heights: &[Vec<f64>], resamples: usize, seed: u64) -> Result<ScalingFit> {
    if ns.len() < 4 || ns.len() != heights.len() {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 4 ensembles with matching sizes, got {} and {}",
            ns.len(),
            heights.len()
        )));
    }
    if heights.iter().any(|h| h.is_empty()) {
        return Err(Error::InsufficientData("empty height ensemble".into()));
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let fit = |means: &[f64]| -> Result<stats::LinearFit> {
        if means.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Domain("mean height must be positive for a log fit".into()));
        }
        stats::ols(&xs, &means.iter().map(|m| m.ln()).collect::<Vec<_>>())
    };
    let means: Vec<f64> = heights.iter().map(|h| stats::mean(h)).collect();
    let base = fit(&means)?;
    let key = StreamKey::new(seed, 2);
    let mut reps = Vec::with_capacity(resamples);
    for b in 0..resamples {
        let mut rng = key.stream(domain::BOOTSTRAP, b as u64);
        let m: Vec<f64> = heights
            .iter()
            .map(|h| (0..h.len()).map(|_| h[rng.random_range(0..h.len())]).sum::<f64>() / h.len() as f64)
            .collect();
        if let Ok(f) = fit(&m) {
            reps.push(f.slope);
        }
    }
    let ci =
        if reps.is_empty() { Interval { lo: f64::NAN, hi: f64::NAN } } else { stats::percentile_interval(&reps, 0.05) };
    Ok(ScalingFit { slope: base.slope, intercept: base.intercept, ci })
}

/// Thresholds of the interface diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub kappa: f64,
    /// Half-width `M` of the box `B_{M,R}`.
    pub box_half_width: i64,
    /// Height `R` of the box `B_{M,R}`.
    pub box_height: i64,
    pub c_area: f64,
    pub c_len: f64,
    /// Window `R'` for the width bound `K ln R'`.
    pub width_window: i64,
    pub width_k: f64,
}

impl Thresholds {
    /// `κ = 4`, `(M, R) = (⌊3 N^{1-5ε}⌋, ⌈N^ε⌉)` with `ε = 0.1`,
    /// `C_area = 4`, `C_len = 8`, `R' = N`, `K = 4`.
    pub fn defaults(n: usize) -> Self {
        let nf = n as f64;
        let eps = 0.1;
        Self {
            kappa: 4.0,
            box_half_width: (3.0 * nf.powf(1.0 - 5.0 * eps)).floor() as i64,
            box_height: nf.powf(eps).ceil() as i64,
            c_area: 4.0,
            c_len: 8.0,
            width_window: n as i64,
            width_k: 4.0,
        }
    }
}

/// Per-sample data the diagnostics need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceRecord {
    pub profile: InterfaceProfile,
    pub max_closed_diameter: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

impl QuantileSummary {
    pub const LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

    pub fn of(values: &[f64]) -> Self {
        let levels = Self::LEVELS.to_vec();
        let values = if values.is_empty() { vec![f64::NAN; levels.len()] } else { stats::quantiles(values, &levels) };
        Self { levels, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsAtTime {
    pub t: f64,
    pub result: KsResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub samples: usize,
    pub n: usize,
    pub thresholds: Thresholds,
    pub restricted_phase_rate: f64,
    pub repulsion_hit_rate: f64,
    pub area_exceed_rate: f64,
    pub length_exceed_rate: f64,
    pub width_exceed_rate: f64,
    /// `max_{|i| <= R'} (γ+ - γ-)`.
    pub width_quantiles: QuantileSummary,
    /// `|Λ^-| / N^{4/3}`.
    pub area_quantiles: QuantileSummary,
    /// `|γ| / N`.
    pub length_quantiles: QuantileSummary,
    pub ks: Vec<KsAtTime>,
    pub two_time: Vec<TwoTimeResult>,
}

fn rate(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut hit, mut tot) = (0usize, 0usize);
    for f in flags {
        hit += f as usize;
        tot += 1;
    }
    if tot == 0 {
        f64::NAN
    } else {
        hit as f64 / tot as f64
    }
}

pub fn diagnostics(records: &[InterfaceRecord], n: usize, th: Thresholds) -> DiagnosticsReport {
    use crate::interface::hits_box;
    let nf = n as f64;
    let diam_cap = th.kappa * nf.ln();
    let width_cap = th.width_k * (th.width_window.max(1) as f64).ln();
    let widths: Vec<f64> = records.iter().map(|r| r.profile.max_width(th.width_window) as f64).collect();
    let areas: Vec<f64> = records.iter().map(|r| r.profile.minus_area as f64 / nf.powf(4.0 / 3.0)).collect();
    let lengths: Vec<f64> = records.iter().map(|r| r.profile.gamma_length as f64 / nf).collect();
    DiagnosticsReport {
        samples: records.len(),
        n,
        thresholds: th,
        restricted_phase_rate: rate(records.iter().map(|r| r.max_closed_diameter as f64 <= diam_cap)),
        repulsion_hit_rate: rate(records.iter().map(|r| hits_box(&r.profile, th.box_half_width, th.box_height))),
        area_exceed_rate: rate(areas.iter().map(|&a| a > th.c_area)),
        length_exceed_rate: rate(lengths.iter().map(|&l| l > th.c_len)),
        width_exceed_rate: rate(widths.iter().map(|&w| w > width_cap)),
        width_quantiles: QuantileSummary::of(&widths),
        area_quantiles: QuantileSummary::of(&areas),
        length_quantiles: QuantileSummary::of(&lengths),
        ks: Vec::new(),
        two_time: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_profile(n: i64, h: i64) -> InterfaceProfile {
        let w = (2 * n + 1) as usize;
        InterfaceProfile {
            x_min: -n,
            gamma_plus: vec![h; w],
            gamma_minus: vec![h - 1; w],
            minus_area: (h.max(0) as usize) * w,
            gamma_length: w + 1 + 2 * h as usize,
        }
    }

    #[test]
    fn rescale_interface_examples() {
        let n = 27.0;
        let chi = 0.64;
        let zero = rescale_interface(&flat_profile(27, 0), n, chi).unwrap();
        assert!(zero.knots().iter().all(|k| k.1 == 0.0));
        // n^{1/3} √χ = 3 · 0.8 = 2.4: height 12 maps to 5
        let p = flat_profile(27, 12);
        let g = rescale_interface(&p, n, chi).unwrap();
        assert!(g.knots().iter().all(|k| (k.1 - 5.0).abs() < 1e-12));
        let mut q = p.clone();
        for (k, v) in q.gamma_plus.iter_mut().enumerate() {
            *v = (k % 5) as i64;
        }
        let g = rescale_interface(&q, n, chi).unwrap();
        for i in -27..=27i64 {
            let t = i as f64 / 9.0;
            assert!((g.eval(t) - q.gamma_plus_at(i) as f64 / 2.4).abs() < 1e-12);
        }
    }

    #[test]
    fn defaults_match_box_rule() {
        let t = Thresholds::defaults(128);
        assert_eq!((t.box_half_width, t.box_height), (33, 2));
        assert_eq!((t.kappa, t.c_area, t.c_len), (4.0, 4.0, 8.0));
    }

    #[test]
    fn straight_fixture_diagnostics() {
        let recs: Vec<InterfaceRecord> =
            (0..10).map(|_| InterfaceRecord { profile: flat_profile(16, 0), max_closed_diameter: 0 }).collect();
        let mut th = Thresholds::defaults(16);
        th.box_height = 0;
        let d = diagnostics(&recs, 16, th);
        assert_eq!(d.repulsion_hit_rate, 1.0);
        assert_eq!(d.area_exceed_rate, 0.0);
        assert_eq!(d.restricted_phase_rate, 1.0);
        assert_eq!(d.length_exceed_rate, 0.0);
    }

    #[test]
    fn one_large_contour_counts() {
        let n = 64;
        let cap = (4.0 * (n as f64).ln()).floor() as i64;
        let m = 7;
        let recs: Vec<InterfaceRecord> = (0..m)
            .map(|k| InterfaceRecord {
                profile: flat_profile(n as i64, 3),
                max_closed_diameter: if k == 0 { cap + 1 } else { cap },
            })
            .collect();
        let d = diagnostics(&recs, n, Thresholds::defaults(n));
        assert!((d.restricted_phase_rate - (m - 1) as f64 / m as f64).abs() < 1e-15);
    }

    #[test]
    fn hit_events_nest_in_box_height() {
        let recs: Vec<InterfaceRecord> =
            (0..12).map(|k| InterfaceRecord { profile: flat_profile(20, k % 6), max_closed_diameter: 0 }).collect();
        let mut last = -1.0;
        for r in 0..8 {
            let mut th = Thresholds::defaults(20);
            th.box_height = r;
            let d = diagnostics(&recs, 20, th);
            assert!(d.repulsion_hit_rate >= last);
            last = d.repulsion_hit_rate;
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn exact_power_laws() {
        let ns = [64.0, 128.0, 256.0, 512.0, 1024.0];
        for (p, want) in [(1.0 / 3.0, 1.0 / 3.0), (0.5, 0.5)] {
            let hs: Vec<Vec<f64>> = ns.iter().map(|n: &f64| vec![2.5 * n.powf(p); 3]).collect();
            let f = height_scaling_fit(&ns, &hs, 50, 1).unwrap();
            assert!((f.slope - want).abs() < 1e-10);
            assert!(f.ci.width() < 1e-10);
        }
        assert!(height_scaling_fit(&ns[..3], &[vec![1.0], vec![1.0], vec![1.0]], 10, 1).is_err());
    }
}
