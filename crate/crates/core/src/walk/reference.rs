//! Exhaustive path enumeration, used as an independent reference for the
//! transfer-matrix routines on small instances.

use super::law::{StepLaw, TiltParams};
use crate::cone::EffectiveWalk;
use crate::path::Point;

/// Product of `p · exp(-c θ z_from)` along a walk, computed step by step.
pub fn path_weight(law: &StepLaw, c_tilt: f64, walk: &EffectiveWalk) -> f64 {
    walk.steps()
        .iter()
        .zip(&walk.points)
        .map(|(s, from)| law.prob(*s) * (-c_tilt * s.theta as f64 * from.y as f64).exp())
        .product()
}

fn in_strip(z: i64, h_max: usize) -> bool {
    z >= 0 && z <= h_max as i64
}

/// Every walk from `u` whose horizontal coordinate stays within
/// `u.x ..= u.x + span` and whose heights stay in `0..=H_max`, including the
/// trivial walk.
pub fn walks_within(law: &StepLaw, tilt: &TiltParams, u: Point, span: i64) -> Vec<EffectiveWalk> {
    let mut out = Vec::new();
    let mut stack = vec![vec![u]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        for (s, _) in law.entries() {
            let next = Point::new(last.x + s.theta, last.y + s.zeta);
            if next.x - u.x <= span && in_strip(next.y, tilt.h_max) {
                let mut p = path.clone();
                p.push(next);
                stack.push(p);
            }
        }
        out.push(EffectiveWalk { points: path });
    }
    out
}

/// `W(x, z)` by enumeration, as `[dx][z]`.
pub fn column_weights(law: &StepLaw, tilt: &TiltParams, u: Point, span: usize) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; tilt.h_max + 1]; span + 1];
    for walk in walks_within(law, tilt, u, span as i64) {
        let e = walk.end();
        w[(e.x - u.x) as usize][e.y as usize] += path_weight(law, tilt.c_tilt(), &walk);
    }
    w
}

/// All `n`-step walks from `u` in the strip.
pub fn n_step_walks(law: &StepLaw, tilt: &TiltParams, u: Point, n: usize) -> Vec<EffectiveWalk> {
    let mut layer = vec![vec![u]];
    for _ in 0..n {
        let mut next = Vec::new();
        for path in &layer {
            let last = *path.last().unwrap();
            for (s, _) in law.entries() {
                let q = Point::new(last.x + s.theta, last.y + s.zeta);
                if in_strip(q.y, tilt.h_max) {
                    let mut p = path.clone();
                    p.push(q);
                    next.push(p);
                }
            }
        }
        layer = next;
    }
    layer.into_iter().map(|points| EffectiveWalk { points }).collect()
}

pub fn n_step_partition(law: &StepLaw, tilt: &TiltParams, u: Point, n: usize, f: impl Fn(i64) -> f64) -> f64 {
    n_step_walks(law, tilt, u, n).iter().map(|w| path_weight(law, tilt.c_tilt(), w) * f(w.end().y)).sum()
}

pub fn fdd_weights(
    law: &StepLaw,
    tilt: &TiltParams,
    u: Point,
    v: Point,
    n: usize,
    marks: &[(usize, &dyn Fn(i64) -> f64)],
) -> f64 {
    n_step_walks(law, tilt, u, n)
        .iter()
        .filter(|w| w.end() == v)
        .map(|w| {
            let m: f64 = marks.iter().map(|(k, f)| f(w.points[*k].y)).product();
            path_weight(law, tilt.c_tilt(), w) * m
        })
        .sum()
}

/// All bridges from `u` to `v` with their unnormalized weights.
pub fn bridges(law: &StepLaw, tilt: &TiltParams, u: Point, v: Point) -> Vec<(EffectiveWalk, f64)> {
    walks_within(law, tilt, u, v.x - u.x)
        .into_iter()
        .filter(|w| w.end() == v)
        .map(|w| {
            let wt = path_weight(law, tilt.c_tilt(), &w);
            (w, wt)
        })
        .collect()
}
