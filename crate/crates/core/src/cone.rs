//! Cone points, irreducible decomposition and the effective walk.
//!
//! The forward cone is `Y◀ = {i : i1 >= |i2|}` and the backward cone is
//! `Y▶ = -Y◀`. A vertex `u` of a path is a cone point when the whole path
//! lies in `u + (Y▶ ∪ Y◀)`.

use crate::error::{Error, Result};
use crate::path::{LatticePath, Point};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Which of the two cones at `u` contain all of `pts`.
fn cone_fit(pts: impl Iterator<Item = Point>, u: Point) -> (bool, bool) {
    let (mut fwd, mut bwd) = (true, true);
    for w in pts {
        let d = w - u;
        fwd &= d.in_forward_cone();
        bwd &= d.in_backward_cone();
    }
    (fwd, bwd)
}

fn is_cone_point_brute(path: &[Point], u: Point) -> bool {
    path.iter().all(|&w| {
        let d = w - u;
        d.in_forward_cone() || d.in_backward_cone()
    })
}

/// Running extrema of `x - y` and `x + y`.
#[derive(Clone, Copy)]
struct Env {
    min_d: i64,
    max_d: i64,
    min_s: i64,
    max_s: i64,
}

impl Env {
    const EMPTY: Env = Env { min_d: i64::MAX, max_d: i64::MIN, min_s: i64::MAX, max_s: i64::MIN };

    fn push(self, p: Point) -> Env {
        let (d, s) = (p.x - p.y, p.x + p.y);
        Env { min_d: self.min_d.min(d), max_d: self.max_d.max(d), min_s: self.min_s.min(s), max_s: self.max_s.max(s) }
    }

    /// All recorded points lie in `u + Y◀` or all lie in `u + Y▶`.
    fn one_cone(&self, u: Point) -> bool {
        if self.min_d == i64::MAX {
            return true;
        }
        let (d, s) = (u.x - u.y, u.x + u.y);
        let fwd = self.min_d >= d && self.min_s >= s;
        let bwd = self.max_d <= d && self.max_s <= s;
        fwd || bwd
    }
}

/// Indices (into `path.vertices`) of the cone points, in path order.
///
/// Linear time for vertices visited once: the parts of the path strictly
/// before and strictly after such a vertex are connected and avoid it, so
/// each must fit in a single cone, which prefix/suffix extrema decide.
/// Vertices visited more than once are checked directly.
pub fn cone_point_indices(path: &LatticePath) -> Vec<usize> {
    let v = &path.vertices;
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let mut visits: HashMap<Point, u32> = HashMap::with_capacity(n);
    for &p in v {
        *visits.entry(p).or_insert(0) += 1;
    }
    let mut suffix = vec![Env::EMPTY; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1].push(v[i]);
    }
    let mut out = Vec::new();
    let mut prefix = Env::EMPTY;
    for i in 0..n {
        let u = v[i];
        let ok =
            if visits[&u] > 1 { is_cone_point_brute(v, u) } else { prefix.one_cone(u) && suffix[i + 1].one_cone(u) };
        if ok {
            out.push(i);
        }
        prefix = prefix.push(u);
    }
    out
}

pub fn cone_points(path: &LatticePath) -> Vec<Point> {
    cone_point_indices(path).into_iter().map(|i| path.vertices[i]).collect()
}

/// Quadratic-time reference for [`cone_point_indices`].
pub fn cone_point_indices_brute(path: &LatticePath) -> Vec<usize> {
    (0..path.vertices.len()).filter(|&i| is_cone_point_brute(&path.vertices, path.vertices[i])).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub forward_confined: bool,
    pub backward_confined: bool,
    pub diamond_confined: bool,
    pub irreducible: bool,
    /// `f(η)`: the apex with `η ⊂ f + Y◀`.
    pub f: Option<Point>,
    /// `b(η)`: the apex with `η ⊂ b + Y▶`.
    pub b: Option<Point>,
}

pub fn classify(path: &LatticePath) -> Classification {
    let v = &path.vertices;
    let f = v.iter().copied().find(|&u| cone_fit(v.iter().copied(), u).0);
    let b = v.iter().copied().find(|&u| cone_fit(v.iter().copied(), u).1);
    let diamond = f.is_some() && b.is_some();
    let irreducible = diamond && {
        let (f, b) = (f.unwrap(), b.unwrap());
        cone_points(path).into_iter().all(|c| c == f || c == b)
    };
    Classification {
        forward_confined: f.is_some(),
        backward_confined: b.is_some(),
        diamond_confined: diamond,
        irreducible,
        f,
        b,
    }
}

/// Path split at its cone points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// From the first vertex up to the first cone point.
    pub left: LatticePath,
    pub irreducibles: Vec<LatticePath>,
    /// From the last cone point to the last vertex.
    pub right: LatticePath,
    pub cone_points: Vec<Point>,
}

impl Decomposition {
    /// Concatenation of all pieces, sharing endpoints.
    pub fn concatenate(&self) -> LatticePath {
        let mut v = self.left.vertices.clone();
        for piece in self.irreducibles.iter().chain(std::iter::once(&self.right)) {
            v.extend_from_slice(&piece.vertices[1..]);
        }
        LatticePath::new(v)
    }
}

pub fn decompose(path: &LatticePath) -> Result<Decomposition> {
    let idx = cone_point_indices(path);
    if idx.is_empty() {
        return Err(Error::NoConePoints);
    }
    let v = &path.vertices;
    let first = idx[0];
    let last = *idx.last().unwrap();
    let irreducibles = idx.windows(2).map(|w| LatticePath::new(v[w[0]..=w[1]].to_vec())).collect();
    Ok(Decomposition {
        left: LatticePath::new(v[..=first].to_vec()),
        irreducibles,
        right: LatticePath::new(v[last..].to_vec()),
        cone_points: idx.iter().map(|&i| v[i]).collect(),
    })
}

/// A step `(θ, ζ)` of the effective walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub theta: i64,
    pub zeta: i64,
}

impl Step {
    pub const fn new(theta: i64, zeta: i64) -> Self {
        Self { theta, zeta }
    }

    pub fn in_cone(self) -> bool {
        self.theta >= 1 && self.theta >= self.zeta.abs()
    }

    pub fn norm(self) -> f64 {
        ((self.theta * self.theta + self.zeta * self.zeta) as f64).sqrt()
    }
}

/// Points `S_i = (T_i, Z_i)` joined by cone steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveWalk {
    pub points: Vec<Point>,
}

impl EffectiveWalk {
    /// Builds a walk and checks that every step lies in the forward cone.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Structure("effective walk needs at least one point".into()));
        }
        for w in points.windows(2) {
            let d = w[1] - w[0];
            if !Step::new(d.x, d.y).in_cone() {
                return Err(Error::Structure(format!(
                    "step ({}, {}) from {:?} leaves the forward cone",
                    d.x, d.y, w[0]
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn from_steps(start: Point, steps: &[Step]) -> Result<Self> {
        let mut pts = vec![start];
        for s in steps {
            let p = *pts.last().unwrap();
            pts.push(Point::new(p.x + s.theta, p.y + s.zeta));
        }
        Self::new(pts)
    }

    pub fn steps(&self) -> Vec<Step> {
        self.points.windows(2).map(|w| Step::new(w[1].x - w[0].x, w[1].y - w[0].y)).collect()
    }

    pub fn num_steps(&self) -> usize {
        self.points.len() - 1
    }

    /// Largest Euclidean step length (0 for a single point).
    pub fn gap(&self) -> f64 {
        self.steps().into_iter().map(Step::norm).fold(0.0, f64::max)
    }

    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().unwrap()
    }

    pub fn span(&self) -> i64 {
        self.end().x - self.start().x
    }

    /// Linearly interpolated height at abscissa `t`, clamped to the ends.
    pub fn height_at(&self, t: f64) -> f64 {
        let p = &self.points;
        if t <= p[0].x as f64 {
            return p[0].y as f64;
        }
        let i = p.partition_point(|q| (q.x as f64) <= t);
        if i >= p.len() {
            return p[p.len() - 1].y as f64;
        }
        let (a, b) = (p[i - 1], p[i]);
        a.y as f64 + (t - a.x as f64) / (b.x - a.x) as f64 * (b.y - a.y) as f64
    }
}

pub fn effective_walk(dec: &Decomposition) -> Result<EffectiveWalk> {
    EffectiveWalk::new(dec.cone_points.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiEstimate {
    pub chi: f64,
    pub std_error: f64,
    pub steps: usize,
    pub walks: usize,
}

fn chi_of(sum_t: f64, sum_z: f64, sum_z2: f64, n: f64) -> f64 {
    let mean_z = sum_z / n;
    let var = (sum_z2 / n - mean_z * mean_z).max(0.0);
    var / (sum_t / n)
}

/// `Var(ζ) / E(θ)` over pooled steps, with a delete-one-walk jackknife
/// standard error.
pub fn estimate_chi(walks: &[EffectiveWalk]) -> Result<ChiEstimate> {
    let per: Vec<[f64; 4]> = walks
        .iter()
        .map(|w| {
            let mut a = [0.0; 4];
            for s in w.steps() {
                a[0] += s.theta as f64;
                a[1] += s.zeta as f64;
                a[2] += (s.zeta * s.zeta) as f64;
                a[3] += 1.0;
            }
            a
        })
        .collect();
    let mut tot = [0.0; 4];
    for a in &per {
        for k in 0..4 {
            tot[k] += a[k];
        }
    }
    if tot[3] < 2.0 {
        return Err(Error::InsufficientData(format!("chi needs at least 2 pooled steps, got {}", tot[3])));
    }
    let chi = chi_of(tot[0], tot[1], tot[2], tot[3]);
    let m = per.len();
    let std_error = if m >= 2 {
        let loo: Vec<f64> = per
            .iter()
            .filter_map(|a| {
                let n = tot[3] - a[3];
                (n >= 1.0).then(|| chi_of(tot[0] - a[0], tot[1] - a[1], tot[2] - a[2], n))
            })
            .collect();
        let k = loo.len() as f64;
        if k >= 2.0 {
            let mean = loo.iter().sum::<f64>() / k;
            ((k - 1.0) / k * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    Ok(ChiEstimate { chi, std_error, steps: tot[3] as usize, walks: m })
}
