use crate::cone::EffectiveWalk;
use crate::error::{Error, Result};
use crate::profile::PiecewiseLinear;

/// Linear interpolation through `(T_k / n^{2/3}, Z_k / (n^{1/3} √χ))`.
pub fn rescale_diffusive(walk: &EffectiveWalk, n: f64, chi: f64) -> Result<PiecewiseLinear> {
    if !(chi > 0.0) {
        return Err(Error::InvalidParameter(format!("chi must be positive, got {chi}")));
    }
    let (ht, hz) = (n.powf(2.0 / 3.0), n.cbrt() * chi.sqrt());
    Ok(PiecewiseLinear::new(walk.points.iter().map(|p| (p.x as f64 / ht, p.y as f64 / hz)).collect()))
}

/// Interpolation with uniform time increments `(t - s) / ℓ` from `(s, r)` to
/// `(t, y)` through the rescaled interior heights.
pub fn rescale_fixed_steps(
    walk: &EffectiveWalk,
    n: f64,
    chi: f64,
    (s, r): (f64, f64),
    (t, y): (f64, f64),
) -> Result<PiecewiseLinear> {
    let l = walk.num_steps();
    if l == 0 {
        return Err(Error::InvalidParameter("walk has no steps".into()));
    }
    if !(chi > 0.0) || !(t > s) {
        return Err(Error::InvalidParameter("need chi > 0 and t > s".into()));
    }
    let hz = n.cbrt() * chi.sqrt();
    let mut knots = Vec::with_capacity(l + 1);
    knots.push((s, r));
    for k in 1..l {
        knots.push((s + (t - s) * k as f64 / l as f64, walk.points[k].y as f64 / hz));
    }
    knots.push((t, y));
    Ok(PiecewiseLinear::new(knots))
}

/// The time change `φ(s + (t - s) k / ℓ) = T_k / n^{2/3}`.
pub fn time_change(walk: &EffectiveWalk, n: f64, s: f64, t: f64) -> Result<PiecewiseLinear> {
    let l = walk.num_steps();
    if l == 0 || !(t > s) {
        return Err(Error::InvalidParameter("need at least one step and t > s".into()));
    }
    let ht = n.powf(2.0 / 3.0);
    Ok(PiecewiseLinear::new(
        walk.points.iter().enumerate().map(|(k, p)| (s + (t - s) * k as f64 / l as f64, p.x as f64 / ht)).collect(),
    ))
}
