//! Peierls contours on the dual lattice, the open interface γ, its
//! envelopes and per-sample geometric diagnostics.
//!
//! Dual vertices use the integer labelling of [`Point`]: `(x, y)` stands for
//! `(x - ½, y - ½)`. The horizontal dual edge `H(x, y)` joins `(x, y)` and
//! `(x + 1, y)` and separates sites `(x, y - 1)` and `(x, y)`; the vertical
//! edge `V(x, y)` joins `(x, y)` and `(x, y + 1)` and separates `(x - 1, y)`
//! and `(x, y)`.
//!
//! At a dual vertex carrying four contour edges the contour turns so that the
//! NW and SE squares stay connected: the north edge pairs with the east
//! edge and the south edge with the west edge.

use crate::error::{Error, Result};
use crate::model::{Boundary, BoxGeometry, SpinConfig};
use crate::path::{LatticePath, Point};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Rule used to resolve degree-4 dual vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitConvention {
    /// NE and SW squares are cut off; NW–SE stays connected.
    NeSw,
}

impl SplitConvention {
    pub fn tag(self) -> &'static str {
        match self {
            SplitConvention::NeSw => "split-ne-sw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DualEdge {
    H(i64, i64),
    V(i64, i64),
}

impl DualEdge {
    pub fn endpoints(self) -> (Point, Point) {
        match self {
            DualEdge::H(x, y) => (Point::new(x, y), Point::new(x + 1, y)),
            DualEdge::V(x, y) => (Point::new(x, y), Point::new(x, y + 1)),
        }
    }

    /// Edge joining two adjacent dual vertices.
    pub fn between(a: Point, b: Point) -> Self {
        let d = b - a;
        match (d.x, d.y) {
            (1, 0) => DualEdge::H(a.x, a.y),
            (-1, 0) => DualEdge::H(b.x, b.y),
            (0, 1) => DualEdge::V(a.x, a.y),
            (0, -1) => DualEdge::V(b.x, b.y),
            _ => panic!("vertices {a:?} and {b:?} are not adjacent"),
        }
    }

    /// The two primal sites the edge separates.
    pub fn sites(self) -> ((i64, i64), (i64, i64)) {
        match self {
            DualEdge::H(x, y) => ((x, y - 1), (x, y)),
            DualEdge::V(x, y) => ((x - 1, y), (x, y)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    fn step(self) -> (i64, i64) {
        match self {
            Dir::N => (0, 1),
            Dir::E => (1, 0),
            Dir::S => (0, -1),
            Dir::W => (-1, 0),
        }
    }

    fn opposite(self) -> Dir {
        match self {
            Dir::N => Dir::S,
            Dir::S => Dir::N,
            Dir::E => Dir::W,
            Dir::W => Dir::E,
        }
    }

    /// Partner of an incoming side at a degree-4 vertex.
    fn paired(self) -> Dir {
        match self {
            Dir::N => Dir::E,
            Dir::E => Dir::N,
            Dir::S => Dir::W,
            Dir::W => Dir::S,
        }
    }
}

/// Dense table of the contour (disagreement) edges of a configuration.
#[derive(Debug, Clone)]
pub struct EdgeSet {
    geometry: BoxGeometry,
    // H(x, y): x in x_min..=x_max, y in 0..=height+1
    h: Vec<bool>,
    // V(x, y): x in x_min..=x_max+1, y in 0..=height
    v: Vec<bool>,
}

impl EdgeSet {
    fn empty(geometry: BoxGeometry) -> Self {
        let w = geometry.width();
        let rows = geometry.rows();
        Self { geometry, h: vec![false; w * (rows + 1)], v: vec![false; (w + 1) * rows] }
    }

    /// All dual edges separating disagreeing nearest-neighbour spins, for
    /// bonds with at least one end in the box.
    pub fn from_config(config: &SpinConfig) -> Self {
        let g = config.geometry;
        let mut set = Self::empty(g);
        for y in 0..=g.height + 1 {
            for x in g.x_min..=g.x_max {
                if config.spin(x, y - 1) != config.spin(x, y) {
                    set.insert(DualEdge::H(x, y));
                }
            }
        }
        for y in 0..=g.height {
            for x in g.x_min..=g.x_max + 1 {
                if config.spin(x - 1, y) != config.spin(x, y) {
                    set.insert(DualEdge::V(x, y));
                }
            }
        }
        set
    }

    fn slot(&self, e: DualEdge) -> Option<(bool, usize)> {
        let g = &self.geometry;
        match e {
            DualEdge::H(x, y) => {
                if x < g.x_min || x > g.x_max || y < 0 || y > g.height + 1 {
                    None
                } else {
                    Some((true, y as usize * g.width() + (x - g.x_min) as usize))
                }
            }
            DualEdge::V(x, y) => {
                if x < g.x_min || x > g.x_max + 1 || y < 0 || y > g.height {
                    None
                } else {
                    Some((false, y as usize * (g.width() + 1) + (x - g.x_min) as usize))
                }
            }
        }
    }

    pub fn contains(&self, e: DualEdge) -> bool {
        match self.slot(e) {
            Some((true, i)) => self.h[i],
            Some((false, i)) => self.v[i],
            None => false,
        }
    }

    fn insert(&mut self, e: DualEdge) {
        match self.slot(e) {
            Some((true, i)) => self.h[i] = true,
            Some((false, i)) => self.v[i] = true,
            None => panic!("edge {e:?} outside the dual box"),
        }
    }

    fn remove(&mut self, e: DualEdge) {
        match self.slot(e) {
            Some((true, i)) => self.h[i] = false,
            Some((false, i)) => self.v[i] = false,
            None => {}
        }
    }

    pub fn len(&self) -> usize {
        self.h.iter().chain(&self.v).filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edges(&self) -> Vec<DualEdge> {
        let g = &self.geometry;
        let mut out = Vec::new();
        for y in 0..=g.height + 1 {
            for x in g.x_min..=g.x_max {
                if self.contains(DualEdge::H(x, y)) {
                    out.push(DualEdge::H(x, y));
                }
            }
        }
        for y in 0..=g.height {
            for x in g.x_min..=g.x_max + 1 {
                if self.contains(DualEdge::V(x, y)) {
                    out.push(DualEdge::V(x, y));
                }
            }
        }
        out
    }

    fn edge_at(p: Point, d: Dir) -> DualEdge {
        let (dx, dy) = d.step();
        DualEdge::between(p, Point::new(p.x + dx, p.y + dy))
    }

    /// Next direction when arriving at `p` through side `incoming`.
    fn exit(&self, p: Point, incoming: Dir) -> Option<Dir> {
        let others: Vec<Dir> = [Dir::N, Dir::E, Dir::S, Dir::W]
            .into_iter()
            .filter(|&d| d != incoming && self.contains(Self::edge_at(p, d)))
            .collect();
        match others.len() {
            1 => Some(others[0]),
            3 => Some(incoming.paired()),
            _ => None,
        }
    }

    /// Follows edges from `start`, leaving through `first`, removing every
    /// traversed edge. Stops when `stop` is reached or no edge continues.
    fn walk(&mut self, start: Point, first: Dir, stop: impl Fn(Point) -> bool) -> Vec<Point> {
        let mut verts = vec![start];
        let mut p = start;
        let mut d = first;
        loop {
            let e = Self::edge_at(p, d);
            if !self.contains(e) {
                break;
            }
            self.remove(e);
            let (dx, dy) = d.step();
            p = Point::new(p.x + dx, p.y + dy);
            verts.push(p);
            if stop(p) {
                break;
            }
            match self.exit_after_removal(p, d.opposite()) {
                Some(next) => d = next,
                None => break,
            }
        }
        verts
    }

    fn exit_after_removal(&self, p: Point, incoming: Dir) -> Option<Dir> {
        // incoming edge already removed; count what is left
        let present: Vec<Dir> = [Dir::N, Dir::E, Dir::S, Dir::W]
            .into_iter()
            .filter(|&d| d != incoming && self.contains(Self::edge_at(p, d)))
            .collect();
        match present.len() {
            1 => Some(present[0]),
            3 => Some(incoming.paired()),
            // second visit of a degree-4 vertex: only the partner pair is left
            2 => {
                let paired = incoming.paired();
                if present.contains(&paired) {
                    Some(paired)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Contours of a configuration with mixed boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub geometry: BoxGeometry,
    pub open_gamma: LatticePath,
    pub closed: Vec<LatticePath>,
    pub convention: SplitConvention,
}

impl ContourSet {
    pub fn left_corner(&self) -> Point {
        Point::new(self.geometry.x_min, 0)
    }

    pub fn right_corner(&self) -> Point {
        Point::new(self.geometry.x_max + 1, 0)
    }
}

/// Traces all Peierls contours and isolates the open contour joining the two
/// bottom corners of the dual box.
pub fn trace_contours(config: &SpinConfig) -> Result<ContourSet> {
    let g = config.geometry;
    if g.boundary != Boundary::Mixed {
        return Err(Error::Structure("open contour requires the mixed boundary condition".into()));
    }
    let mut edges = EdgeSet::from_config(config);
    let left = Point::new(g.x_min, 0);
    let right = Point::new(g.x_max + 1, 0);

    // arriving at the left corner from the outside line, i.e. from the west
    let first =
        edges.exit(left, Dir::W).ok_or_else(|| Error::Structure("no contour edge at the left corner".into()))?;
    let open = edges.walk(left, first, |p| p == right);
    if open.last() != Some(&right) {
        return Err(Error::Structure("open contour does not reach the right corner".into()));
    }

    let mut closed = Vec::new();
    for e in edges.edges() {
        if !edges.contains(e) {
            continue;
        }
        let (a, _) = e.endpoints();
        let d = match e {
            DualEdge::H(..) => Dir::E,
            DualEdge::V(..) => Dir::N,
        };
        let verts = edges.walk(a, d, |_| false);
        if verts.last() != Some(&a) {
            return Err(Error::Structure(format!("contour starting at {a:?} does not close")));
        }
        closed.push(LatticePath::new(verts));
    }

    Ok(ContourSet { geometry: g, open_gamma: LatticePath::new(open), closed, convention: SplitConvention::NeSw })
}

/// Edges of some paths as a set, for parity reconstruction.
fn path_edges<'a>(geometry: BoxGeometry, paths: impl IntoIterator<Item = &'a LatticePath>) -> EdgeSet {
    let mut set = EdgeSet::empty(geometry);
    for path in paths {
        for w in path.vertices.windows(2) {
            set.insert(DualEdge::between(w[0], w[1]));
        }
    }
    set
}

fn column_scan(geometry: BoxGeometry, set: &EdgeSet) -> SpinConfig {
    let mut cfg = SpinConfig::all_plus(geometry);
    for x in geometry.x_min..=geometry.x_max {
        let mut s = geometry.boundary.spin(-1);
        for y in 0..=geometry.height {
            if set.contains(DualEdge::H(x, y)) {
                s = -s;
            }
            cfg.set(x, y, s);
        }
    }
    cfg
}

/// The configuration whose contours are exactly `contours`.
pub fn reconstruct(contours: &ContourSet) -> SpinConfig {
    let paths = std::iter::once(&contours.open_gamma).chain(&contours.closed);
    column_scan(contours.geometry, &path_edges(contours.geometry, paths))
}

/// The configuration `ω_γ` whose only contour is the open contour.
///
/// Each column is scanned upward from the `-1` boundary row, flipping the
/// spin whenever a horizontal edge of γ is crossed. Because γ together with
/// the outside line is a cycle, the result is independent of the scan path.
pub fn omega_gamma(contours: &ContourSet) -> SpinConfig {
    column_scan(contours.geometry, &path_edges(contours.geometry, [&contours.open_gamma]))
}

/// Upper/lower envelopes of γ, area below it and its length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceProfile {
    pub x_min: i64,
    pub gamma_plus: Vec<i64>,
    pub gamma_minus: Vec<i64>,
    pub minus_area: usize,
    pub gamma_length: usize,
}

impl InterfaceProfile {
    pub fn x_max(&self) -> i64 {
        self.x_min + self.gamma_plus.len() as i64 - 1
    }

    /// `γ+(i)`; columns outside the box sit on the outside line.
    pub fn gamma_plus_at(&self, i: i64) -> i64 {
        if i < self.x_min || i > self.x_max() {
            0
        } else {
            self.gamma_plus[(i - self.x_min) as usize]
        }
    }

    pub fn gamma_minus_at(&self, i: i64) -> i64 {
        if i < self.x_min || i > self.x_max() {
            -1
        } else {
            self.gamma_minus[(i - self.x_min) as usize]
        }
    }

    /// Linear interpolation of `γ+` at a real abscissa.
    pub fn gamma_plus_interp(&self, t: f64) -> f64 {
        let i0 = t.floor() as i64;
        let frac = t - i0 as f64;
        let a = self.gamma_plus_at(i0) as f64;
        let b = self.gamma_plus_at(i0 + 1) as f64;
        a + frac * (b - a)
    }

    pub fn gamma_minus_interp(&self, t: f64) -> f64 {
        let i0 = t.floor() as i64;
        let frac = t - i0 as f64;
        let a = self.gamma_minus_at(i0) as f64;
        let b = self.gamma_minus_at(i0 + 1) as f64;
        a + frac * (b - a)
    }

    /// `max_{|i| <= r} (γ+(i) - γ-(i))`.
    pub fn max_width(&self, r: i64) -> i64 {
        (-r..=r).map(|i| self.gamma_plus_at(i) - self.gamma_minus_at(i)).max().unwrap_or(0)
    }
}

pub fn envelopes(contours: &ContourSet) -> InterfaceProfile {
    let g = contours.geometry;
    let omega = omega_gamma(contours);
    let mut plus = Vec::with_capacity(g.width());
    let mut minus = Vec::with_capacity(g.width());
    let mut area = 0usize;
    for x in g.x_min..=g.x_max {
        let mut top_minus = -1i64;
        let mut bottom_plus = g.height + 1;
        for y in 0..=g.height {
            if omega.spin(x, y) == -1 {
                top_minus = y;
                area += 1;
            } else if y < bottom_plus {
                bottom_plus = y;
            }
        }
        plus.push(top_minus + 1);
        minus.push(bottom_plus - 1);
    }
    InterfaceProfile {
        x_min: g.x_min,
        gamma_plus: plus,
        gamma_minus: minus,
        minus_area: area,
        gamma_length: contours.open_gamma.len_edges(),
    }
}

/// Minus sites s-connected (nearest neighbours plus the NW–SE diagonal) to
/// the minus boundary row below the box.
pub fn s_cluster(config: &SpinConfig) -> Vec<(i64, i64)> {
    let g = config.geometry;
    let mut seen = vec![false; g.num_sites()];
    let mut queue = VecDeque::new();
    if g.boundary.spin(-1) == -1 {
        for x in g.x_min..=g.x_max {
            if config.spin(x, 0) == -1 {
                seen[g.index(x, 0)] = true;
                queue.push_back((x, 0));
            }
        }
    }
    let moves = [(1, 0), (-1, 0), (0, 1), (0, -1), (-1, 1), (1, -1)];
    let mut out = Vec::new();
    while let Some((x, y)) = queue.pop_front() {
        out.push((x, y));
        for (dx, dy) in moves {
            let (nx, ny) = (x + dx, y + dy);
            if g.contains(nx, ny) && !seen[g.index(nx, ny)] && config.spin(nx, ny) == -1 {
                seen[g.index(nx, ny)] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    out.sort_unstable_by_key(|&(x, y)| (y, x));
    out
}

/// Sup-norm diameter of the largest closed contour (0 if there is none).
pub fn max_closed_diameter(contours: &ContourSet) -> i64 {
    contours.closed.iter().map(diameter).max().unwrap_or(0)
}

pub fn diameter(path: &LatticePath) -> i64 {
    if path.is_empty() {
        return 0;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for p in &path.vertices {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0).max(y1 - y0)
}

/// The event that every closed contour has diameter at most `κ ln n`.
pub fn check_restricted_phase(contours: &ContourSet, kappa: f64, n: usize) -> bool {
    max_closed_diameter(contours) as f64 <= kappa * (n as f64).ln()
}

/// Whether γ comes down to height `R` somewhere over `|i| <= M`.
pub fn hits_box(profile: &InterfaceProfile, half_width: i64, height: i64) -> bool {
    (-half_width..=half_width).any(|i| profile.gamma_minus_at(i) + 1 <= height)
}

/// Everything extracted from one configuration.
#[derive(Debug, Clone)]
pub struct InterfaceSample {
    pub contours: ContourSet,
    pub profile: InterfaceProfile,
    pub max_closed_diameter: i64,
}

pub fn extract(config: &SpinConfig) -> Result<InterfaceSample> {
    let contours = trace_contours(config)?;
    let profile = envelopes(&contours);
    let max_closed_diameter = max_closed_diameter(&contours);
    Ok(InterfaceSample { contours, profile, max_closed_diameter })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(n: i64) -> Vec<Point> {
        (-n..=n + 1).map(|x| Point::new(x, 0)).collect()
    }

    #[test]
    fn all_plus_is_straight() {
        let g = BoxGeometry::lambda_n(5);
        let c = trace_contours(&SpinConfig::all_plus(g)).unwrap();
        assert_eq!(c.open_gamma.vertices, straight(5));
        assert_eq!(c.open_gamma.len_edges(), 11);
        assert!(c.closed.is_empty());
        let p = envelopes(&c);
        assert!(p.gamma_plus.iter().all(|&v| v == 0));
        assert!(p.gamma_minus.iter().all(|&v| v == -1));
        assert_eq!(p.minus_area, 0);
        assert_eq!(max_closed_diameter(&c), 0);
        assert!(check_restricted_phase(&c, 1.0, 100));
        for m in 0..5 {
            assert!(hits_box(&p, m, 0));
        }
    }

    #[test]
    fn single_flip_gives_plaquette() {
        let g = BoxGeometry::lambda_n(6);
        let mut cfg = SpinConfig::all_plus(g);
        cfg.set(0, 5, -1);
        let c = trace_contours(&cfg).unwrap();
        assert_eq!(c.open_gamma.vertices, straight(6));
        assert_eq!(c.closed.len(), 1);
        let mut loop_pts = c.closed[0].vertices.clone();
        assert_eq!(loop_pts.len(), 5);
        assert_eq!(loop_pts.first(), loop_pts.last());
        loop_pts.pop();
        loop_pts.sort();
        // corners of the square around site (0, 5)
        let mut want = vec![Point::new(0, 5), Point::new(1, 5), Point::new(0, 6), Point::new(1, 6)];
        want.sort();
        assert_eq!(loop_pts, want);
        assert_eq!(max_closed_diameter(&c), 1);
    }

    #[test]
    fn bottom_row_minus() {
        let n = 4;
        let g = BoxGeometry::lambda_n(n as usize);
        let mut cfg = SpinConfig::all_plus(g);
        for x in -n..=n {
            cfg.set(x, 0, -1);
        }
        let c = trace_contours(&cfg).unwrap();
        let mut want = vec![Point::new(-n, 0)];
        want.extend((-n..=n + 1).map(|x| Point::new(x, 1)));
        want.push(Point::new(n + 1, 0));
        assert_eq!(c.open_gamma.vertices, want);
        assert!(c.closed.is_empty());
        let p = envelopes(&c);
        assert!(p.gamma_plus.iter().all(|&v| v == 1));
        assert_eq!(p.minus_area, (2 * n + 1) as usize);
    }

    #[test]
    fn square_bump() {
        let g = BoxGeometry::lambda_n(3);
        let mut cfg = SpinConfig::all_plus(g);
        cfg.set(0, 0, -1);
        let c = trace_contours(&cfg).unwrap();
        let p = envelopes(&c);
        assert_eq!(p.minus_area, 1);
        assert_eq!(p.gamma_plus_at(0), 1);
        assert_eq!(p.gamma_plus_at(1), 0);
        assert_eq!(p.gamma_plus_at(-1), 0);
        assert_eq!(p.gamma_minus_at(0), 0);
        // gamma_minus(0) + 1 = 1 > 0
        assert!(!hits_box(&p, 0, 0));
        assert!(hits_box(&p, 1, 0));
    }

    #[test]
    fn diameters_and_phase() {
        let mk =
            |d: i64| LatticePath::new(vec![Point::new(0, 0), Point::new(d, 0), Point::new(d, d), Point::new(0, d)]);
        let g = BoxGeometry::lambda_n(2);
        let c = ContourSet {
            geometry: g,
            open_gamma: LatticePath::new(straight(2)),
            closed: vec![mk(1), mk(3)],
            convention: SplitConvention::NeSw,
        };
        assert_eq!(max_closed_diameter(&c), 3);
        let c10 = ContourSet { closed: vec![mk(10)], ..c.clone() };
        assert!(!check_restricted_phase(&c10, 1.0, 100));
        let c4 = ContourSet { closed: vec![mk(4)], ..c };
        assert!(check_restricted_phase(&c4, 1.0, 100));
    }

    #[test]
    fn s_cluster_examples() {
        let g = BoxGeometry::lambda_n(3);
        assert!(s_cluster(&SpinConfig::all_plus(g)).is_empty());
        let mut one = SpinConfig::all_plus(g);
        one.set(0, 0, -1);
        assert_eq!(s_cluster(&one), vec![(0, 0)]);
        let mut diag = SpinConfig::all_plus(g);
        diag.set(1, 0, -1);
        diag.set(0, 1, -1);
        assert_eq!(s_cluster(&diag), vec![(1, 0), (0, 1)]);
        // the NE–SW diagonal does not connect
        let mut anti = SpinConfig::all_plus(g);
        anti.set(-1, 0, -1);
        anti.set(0, 1, -1);
        assert_eq!(s_cluster(&anti), vec![(-1, 0)]);
    }

    #[test]
    fn degree_four_split_keeps_nw_se() {
        // NW and SE minus around the dual vertex (1, 1): sites (0,1) and (1,0)
        let g = BoxGeometry::lambda_n(3);
        let mut cfg = SpinConfig::all_plus(g);
        cfg.set(1, 0, -1);
        cfg.set(0, 1, -1);
        let c = trace_contours(&cfg).unwrap();
        assert!(c.closed.is_empty());
        // the vertex is visited twice by γ
        let hits = c.open_gamma.vertices.iter().filter(|&&p| p == Point::new(1, 1)).count();
        assert_eq!(hits, 2);
        assert_eq!(omega_gamma(&c), cfg);
    }

    #[test]
    fn requires_mixed_boundary() {
        let g = BoxGeometry::lambda_n(2).with_boundary(Boundary::Plus);
        assert!(trace_contours(&SpinConfig::all_plus(g)).is_err());
    }
}
