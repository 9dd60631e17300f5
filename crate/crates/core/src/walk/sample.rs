use super::dp::{backward_table, check_leak, forward_table, top_zone, ColumnTable, Kernel};
use super::law::{StepLaw, TiltParams};
use crate::cone::EffectiveWalk;
use crate::error::{Error, Result};
use crate::path::Point;
use rand::Rng;
use std::collections::BTreeMap;

/// Exact sampler for the area-tilted bridge law from `u` to `v`.
///
/// Holds the forward table from `u` and the backward table to `v`; walks
/// are drawn by backward sampling on the forward table.
#[derive(Debug, Clone)]
pub struct BridgeSampler {
    kernel: Kernel,
    forward: ColumnTable,
    backward: ColumnTable,
    u: Point,
    v: Point,
    log_total: f64,
}

/// A step `(x', z') -> (x'', z'')` of the bridge with its probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub from: Point,
    pub to: Point,
    pub prob: f64,
}

impl BridgeSampler {
    pub fn new(law: &StepLaw, tilt: &TiltParams, u: Point, v: Point) -> Result<Self> {
        if u.y < 0 || v.y < 0 {
            return Err(Error::NegativeHeight { index: 0, height: u.y.min(v.y) });
        }
        let span = v.x - u.x;
        if span < 1 || span < (v.y - u.y).abs() {
            return Err(Error::InvalidParameter(format!("endpoint {v:?} is not in the forward cone of {u:?}")));
        }
        if u.y > tilt.h_max as i64 || v.y > tilt.h_max as i64 {
            return Err(Error::CapTooSmall { cap: tilt.h_max, fraction: 1.0 });
        }
        let kernel = Kernel::new(law, tilt.c_tilt(), tilt.h_max);
        let forward = forward_table(&kernel, u, span as usize);
        let log_total = forward.log_weight(v.x, v.y);
        if log_total == f64::NEG_INFINITY {
            return Err(Error::ZeroBridgeWeight);
        }
        let backward = backward_table(&kernel, v, span as usize);
        let sampler = Self { kernel, forward, backward, u, v, log_total };
        if tilt.leak_tolerance.is_some() {
            let (top, all) = sampler.visit_mass(top_zone(tilt.h_max));
            check_leak(tilt, top / all)?;
        }
        Ok(sampler)
    }

    pub fn start(&self) -> Point {
        self.u
    }

    pub fn end(&self) -> Point {
        self.v
    }

    /// `ln` of the total bridge weight.
    pub fn log_partition(&self) -> f64 {
        self.log_total
    }

    /// Probability that the bridge visits `(x, z)`.
    pub fn visit_prob(&self, x: i64, z: i64) -> f64 {
        let a = self.forward.log_weight(x, z) + self.backward.log_weight(x, z) - self.log_total;
        a.exp()
    }

    /// Expected number of visited vertices at heights `>= z_top`, and overall.
    fn visit_mass(&self, z_top: usize) -> (f64, f64) {
        let (mut top, mut all) = (0.0, 0.0);
        for x in self.u.x..=self.v.x {
            for z in 0..=self.kernel.h {
                let p = self.visit_prob(x, z as i64);
                all += p;
                if z >= z_top {
                    top += p;
                }
            }
        }
        (top, all)
    }

    /// Law of the step that crosses from `T < w` to `T >= w`.
    pub fn crossing_law(&self, w: i64) -> Result<Vec<Crossing>> {
        if w <= self.u.x || w > self.v.x {
            return Err(Error::InvalidParameter(format!("window column {w} must lie in ({}, {}]", self.u.x, self.v.x)));
        }
        let mut out = Vec::new();
        let h = self.kernel.h as i64;
        for (s, &(theta, zeta)) in self.kernel.steps.iter().enumerate() {
            for x_to in w..(w + theta).min(self.v.x + 1) {
                let x_from = x_to - theta;
                if x_from < self.u.x {
                    continue;
                }
                for z_from in 0..=h {
                    let z_to = z_from + zeta;
                    if z_to < 0 || z_to > h {
                        continue;
                    }
                    let lf = self.forward.log_weight(x_from, z_from);
                    let lb = self.backward.log_weight(x_to, z_to);
                    if lf == f64::NEG_INFINITY || lb == f64::NEG_INFINITY {
                        continue;
                    }
                    let prob = (lf + lb - self.log_total).exp() * self.kernel.weights[s][z_from as usize];
                    out.push(Crossing { from: Point::new(x_from, z_from), to: Point::new(x_to, z_to), prob });
                }
            }
        }
        Ok(out)
    }

    /// Exact law of the linearly interpolated height at abscissa `t`.
    pub fn height_law_at(&self, t: f64) -> Result<Vec<(f64, f64)>> {
        if t == self.v.x as f64 {
            return Ok(vec![(self.v.y as f64, 1.0)]);
        }
        let w = t.floor() as i64 + 1;
        let mut acc: BTreeMap<(i64, i64, i64, i64), f64> = BTreeMap::new();
        for c in self.crossing_law(w)? {
            *acc.entry((c.from.x, c.from.y, c.to.x, c.to.y)).or_insert(0.0) += c.prob;
        }
        Ok(acc
            .into_iter()
            .map(|((x0, z0, x1, z1), p)| {
                let frac = (t - x0 as f64) / (x1 - x0) as f64;
                (z0 as f64 + frac * (z1 - z0) as f64, p)
            })
            .collect())
    }

    pub fn mean_height_at(&self, t: f64) -> Result<f64> {
        Ok(self.height_law_at(t)?.iter().map(|(h, p)| h * p).sum())
    }

    /// One exact draw of the bridge.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> EffectiveWalk {
        let h = self.kernel.h as i64;
        let mut pts = vec![self.v];
        let (mut x, mut z) = (self.v.x, self.v.y);
        let mut cand: Vec<(f64, i64, i64)> = Vec::with_capacity(self.kernel.steps.len());
        while x > self.u.x {
            cand.clear();
            let here = self.forward.log_weight(x, z);
            let mut total = 0.0;
            for (s, &(theta, zeta)) in self.kernel.steps.iter().enumerate() {
                let (xs, zs) = (x - theta, z - zeta);
                if xs < self.u.x || zs < 0 || zs > h {
                    continue;
                }
                let lf = self.forward.log_weight(xs, zs);
                if lf == f64::NEG_INFINITY {
                    continue;
                }
                let w = (lf - here).exp() * self.kernel.weights[s][zs as usize];
                total += w;
                cand.push((total, xs, zs));
            }
            let r = rng.random::<f64>() * total;
            let &(_, xs, zs) = cand.iter().find(|c| c.0 > r).unwrap_or_else(|| cand.last().unwrap());
            x = xs;
            z = zs;
            pts.push(Point::new(x, z));
        }
        pts.reverse();
        EffectiveWalk { points: pts }
    }
}

/// Exact draw from the tilted bridge law between `u` and `v`.
pub fn sample_tilted_bridge<R: Rng + ?Sized>(
    u: Point,
    v: Point,
    law: &StepLaw,
    tilt: &TiltParams,
    rng: &mut R,
) -> Result<EffectiveWalk> {
    Ok(BridgeSampler::new(law, tilt, u, v)?.sample(rng))
}

/// Total-variation distance between the laws of the first vertex at or
/// beyond column `window` under the bridges `u -> v` and `u' -> v'`.
pub fn endpoint_insensitivity(
    (u, u2): (Point, Point),
    (v, v2): (Point, Point),
    law: &StepLaw,
    tilt: &TiltParams,
    window: i64,
) -> Result<f64> {
    let a = BridgeSampler::new(law, tilt, u, v)?;
    let b = BridgeSampler::new(law, tilt, u2, v2)?;
    let mut pair: BTreeMap<Point, (f64, f64)> = BTreeMap::new();
    for c in a.crossing_law(window)? {
        pair.entry(c.to).or_default().0 += c.prob;
    }
    for c in b.crossing_law(window)? {
        pair.entry(c.to).or_default().1 += c.prob;
    }
    Ok(0.5 * pair.values().map(|(p, q)| (p - q).abs()).sum::<f64>())
}
