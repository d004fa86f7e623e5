use serde::Serialize;

use crate::numeric::{bisect, golden_max, linspace};
use crate::profiles::{BeamShape, IrradianceProfile};
use crate::{Error, Result};

/// Grid used to locate the maximum of a callable curve.
pub const DEFAULT_FWHM_GRID: usize = 4096;

/// Full width at half maximum of a peaked curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FwhmResult {
    pub fwhm: f64,
    pub peak_position: f64,
    pub peak_value: f64,
    pub left: f64,
    pub right: f64,
    /// The curve dips below half maximum between `left` and `right`.
    pub multimodal: bool,
}

/// FWHM of a callable curve on `domain`.
///
/// The global maximum is found on a [`DEFAULT_FWHM_GRID`] grid and refined by
/// golden section. Half-max crossings are the outermost ones inside `domain`,
/// bracketed on the grid and refined by bisection. For curves with side
/// lobes, pass the central lobe as the domain (see [`central_lobe`]).
pub fn fwhm(curve: impl Fn(f64) -> f64, domain: (f64, f64)) -> Result<FwhmResult> {
    let (lo, hi) = domain;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::config("domain", format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let xs = linspace(lo, hi, DEFAULT_FWHM_GRID);
    let ys: Vec<f64> = xs.iter().map(|&x| curve(x)).collect();
    let peak = locate_peak(&xs, &ys)?;
    let (a, b) = (xs[peak.saturating_sub(1)], xs[(peak + 1).min(xs.len() - 1)]);
    let (mut peak_x, mut peak_value) = golden_max(&curve, a, b, 1e-13 * (hi - lo));
    if ys[peak] > peak_value {
        peak_x = xs[peak];
        peak_value = ys[peak];
    }
    let half = 0.5 * peak_value;
    let (li, ri) = outer_crossings(&ys, half)?;
    let tol = 1e-14 * (hi - lo);
    let g = |x: f64| curve(x) - half;
    let left = bisect(g, xs[li - 1], xs[li], tol)?;
    let right = bisect(g, xs[ri], xs[ri + 1], tol)?;
    Ok(FwhmResult {
        fwhm: right - left,
        peak_position: peak_x,
        peak_value,
        left,
        right,
        multimodal: ys[li..=ri].iter().any(|&y| y < half),
    })
}

/// FWHM of sampled data, with linear interpolation between samples.
pub fn fwhm_sampled(xs: &[f64], ys: &[f64]) -> Result<FwhmResult> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::config("curve", "need at least 3 samples with matching x and y"));
    }
    let peak = locate_peak(xs, ys)?;
    let half = 0.5 * ys[peak];
    let (li, ri) = outer_crossings(ys, half)?;
    let lerp = |i: usize, j: usize| xs[i] + (half - ys[i]) * (xs[j] - xs[i]) / (ys[j] - ys[i]);
    let left = lerp(li - 1, li);
    let right = lerp(ri, ri + 1);
    Ok(FwhmResult {
        fwhm: right - left,
        peak_position: xs[peak],
        peak_value: ys[peak],
        left,
        right,
        multimodal: ys[li..=ri].iter().any(|&y| y < half),
    })
}

/// Ratio `fwhm(b) / fwhm(a)`: greater than 1 when `a` is narrower.
pub fn compression_factor(a: &FwhmResult, b: &FwhmResult) -> f64 {
    b.fwhm / a.fwhm
}

/// Domain spanning the central lobe of a single-beam profile: between the
/// first nulls for slit and Airy shapes, the whole domain otherwise.
pub fn central_lobe(profile: &IrradianceProfile) -> (f64, f64) {
    let c = profile.center();
    match profile.base_shape() {
        BeamShape::Slit { geometry } if profile.two_beam_parts().is_none() => {
            let n = geometry.first_null();
            (c - n, c + n)
        }
        BeamShape::Airy { geometry } if profile.two_beam_parts().is_none() => {
            let n = geometry.first_zero_radius();
            (c - n, c + n)
        }
        _ => profile.domain(),
    }
}

fn locate_peak(xs: &[f64], ys: &[f64]) -> Result<usize> {
    if ys.iter().any(|y| !y.is_finite()) || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoPeak("curve has non-finite samples".into()));
    }
    let (mut best, mut max, mut min) = (0, f64::NEG_INFINITY, f64::INFINITY);
    for (i, &y) in ys.iter().enumerate() {
        if y > max {
            max = y;
            best = i;
        }
        min = min.min(y);
    }
    if max <= 0.0 || max == min {
        return Err(Error::NoPeak(format!("curve is flat or non-positive (max {max})")));
    }
    Ok(best)
}

/// Indices of the first and last samples at or above `half`, both strictly
/// inside the sample range.
fn outer_crossings(ys: &[f64], half: f64) -> Result<(usize, usize)> {
    let first = ys.iter().position(|&y| y >= half).expect("peak is above half");
    let last = ys.iter().rposition(|&y| y >= half).expect("peak is above half");
    if first == 0 || last == ys.len() - 1 {
        return Err(Error::NoPeak(
            "curve does not fall below half maximum inside the domain".into(),
        ));
    }
    Ok((first, last))
}
