use serde::Serialize;

use crate::numeric::bisect;
use crate::profiles::BeamShape;
use crate::{Error, Result};

/// Separation at which two equal beams merge into a flat top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparrowLimit {
    pub separation_m: f64,
    /// `None` unless the base shape is an Airy disk.
    pub separation_rayleigh: Option<f64>,
}

/// Second derivative at the midpoint of `base(x − s/2) + base(x + s/2)`.
///
/// By symmetry this is `2·base''(s/2)`, taken here as a central difference
/// with step `1e-4` of the shape's length scale.
pub fn midpoint_curvature(base: &BeamShape, separation: f64) -> f64 {
    let h = 1e-4 * base.length_scale();
    let r = 0.5 * separation;
    2.0 * (base.eval(r + h) - 2.0 * base.eval(r) + base.eval(r - h)) / (h * h)
}

/// Smallest separation where the midpoint curvature of the equal-beam sum
/// changes sign from negative (single peak) to positive (central dip).
pub fn sparrow_limit(base: &BeamShape) -> Result<SparrowLimit> {
    base.validate()?;
    let scale = base.length_scale();
    let curvature = |s: f64| midpoint_curvature(base, s);
    let step = 0.01 * scale;
    let mut lo = step;
    if curvature(lo) >= 0.0 {
        return Err(Error::Numerical("summed profile is not peaked at small separation".into()));
    }
    while lo < 10.0 * scale {
        let hi = lo + step;
        if curvature(hi) > 0.0 {
            let s = bisect(curvature, lo, hi, 1e-13 * scale)?;
            return Ok(SparrowLimit {
                separation_m: s,
                separation_rayleigh: base.rayleigh_separation().map(|r| s / r),
            });
        }
        lo = hi;
    }
    Err(Error::Numerical("no flat-top separation within 10 length scales".into()))
}
