use serde::{Deserialize, Serialize};
use std::ops::{Add, Sub};

/// Integer point. For dual-lattice paths, `Point { x, y }` denotes the dual
/// vertex at `(x - ½, y - ½)`, so the bottom line `y = -½` has `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// Membership of `self` in the forward cone `{x >= |y|}`.
    #[inline]
    pub fn in_forward_cone(self) -> bool {
        self.x >= self.y.abs()
    }

    /// Membership in the backward cone `{-x >= |y|}`.
    #[inline]
    pub fn in_backward_cone(self) -> bool {
        -self.x >= self.y.abs()
    }

    pub fn norm2(self) -> f64 {
        ((self.x * self.x + self.y * self.y) as f64).sqrt()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

/// Ordered sequence of lattice points joined by unit steps.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LatticePath {
    pub vertices: Vec<Point>,
}

impl LatticePath {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    /// Path from `start` following unit moves given as `(dx, dy)`.
    pub fn from_moves(start: Point, moves: &[(i64, i64)]) -> Self {
        let mut v = vec![start];
        for &(dx, dy) in moves {
            let last = *v.last().unwrap();
            v.push(Point::new(last.x + dx, last.y + dy));
        }
        Self { vertices: v }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn len_edges(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn first(&self) -> Option<Point> {
        self.vertices.first().copied()
    }

    pub fn last(&self) -> Option<Point> {
        self.vertices.last().copied()
    }

    /// `X = b - f`, the displacement from the first to the last vertex.
    pub fn displacement(&self) -> Point {
        match (self.first(), self.last()) {
            (Some(f), Some(b)) => b - f,
            _ => Point::new(0, 0),
        }
    }

    pub fn is_unit_step_path(&self) -> bool {
        self.vertices.windows(2).all(|w| {
            let d = w[1] - w[0];
            d.x.abs() + d.y.abs() == 1
        })
    }
}
