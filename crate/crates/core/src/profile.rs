use serde::{Deserialize, Serialize};

/// Continuous piecewise-linear function through strictly increasing knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    /// Knots with repeated abscissae keep the last value.
    pub fn new(mut knots: Vec<(f64, f64)>) -> Self {
        assert!(!knots.is_empty(), "piecewise-linear function needs a knot");
        knots.dedup_by(|b, a| {
            if b.0 == a.0 {
                a.1 = b.1;
                true
            } else {
                false
            }
        });
        debug_assert!(knots.windows(2).all(|w| w[0].0 < w[1].0));
        Self { knots }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots.last().unwrap().0)
    }

    /// Value at `t`, held constant outside the domain.
    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        if t >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|p| p.0 <= t) - 1;
        let (t0, y0) = k[i];
        let (t1, y1) = k[i + 1];
        if t == t0 {
            return y0;
        }
        y0 + (t - t0) / (t1 - t0) * (y1 - y0)
    }

    pub fn compose(&self, inner: &PiecewiseLinear, t: f64) -> f64 {
        self.eval(inner.eval(t))
    }

    pub fn min_value(&self) -> f64 {
        self.knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_clamps() {
        let f = PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)]);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(1.0), 2.0);
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(-1.0), 0.0);
        assert_eq!(f.eval(9.0), 0.0);
        assert_eq!(f.domain(), (0.0, 3.0));
    }
}
