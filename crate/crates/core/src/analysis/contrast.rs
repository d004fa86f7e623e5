use rayon::prelude::*;
use serde::Serialize;

use crate::numeric::{golden_max, golden_min, linspace};
use crate::photon_stats::{Observable, ObservableCurve, SourceStatistics};
use crate::profiles::{BeamShape, IrradianceProfile, PinholeGeometry};
use crate::{Error, Result};

const DOMAIN_GRID: usize = 4096;
const WINDOW_GRID: usize = 4096;

/// Peak/saddle contrast of a two-beam curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContrastReport {
    pub i_max: f64,
    pub i_saddle: f64,
    /// `(I_max − I_saddle) / (I_max + I_saddle)`; 0 when there is no dip.
    pub contrast: f64,
    pub peak_position: f64,
    pub saddle_position: Option<f64>,
    pub separation_m: f64,
    pub separation_rayleigh: Option<f64>,
    /// The curve has no interior minimum between two maxima.
    pub no_dip: bool,
}

fn two_beam_layout(profile: &IrradianceProfile) -> Result<(f64, f64, f64)> {
    let (x1, x2) = profile
        .beam_centers()
        .ok_or_else(|| Error::config("profile", "contrast needs a two-beam profile"))?;
    let s = x2 - x1;
    if !(s > 0.0) {
        return Err(Error::config("separation", "contrast needs a separation > 0"));
    }
    Ok((x1, x2, s))
}

fn report(
    profile: &IrradianceProfile,
    s: f64,
    peak: (f64, f64),
    saddle: Option<(f64, f64)>,
) -> ContrastReport {
    let (peak_position, i_max) = peak;
    let separation_rayleigh = profile.rayleigh_separation().map(|r| s / r);
    match saddle {
        Some((x, v)) => ContrastReport {
            i_max,
            i_saddle: v,
            contrast: if i_max + v > 0.0 {
                ((i_max - v) / (i_max + v)).clamp(0.0, 1.0)
            } else {
                0.0
            },
            peak_position,
            saddle_position: Some(x),
            separation_m: s,
            separation_rayleigh,
            no_dip: false,
        },
        None => ContrastReport {
            i_max,
            i_saddle: i_max,
            contrast: 0.0,
            peak_position,
            saddle_position: None,
            separation_m: s,
            separation_rayleigh,
            no_dip: true,
        },
    }
}

/// Contrast of a callable curve laid over a two-beam `profile`.
///
/// `I_max` is the global maximum on the profile domain. The saddle is the
/// lowest point between the highest local maximum on each side of the
/// midpoint, searched within one separation of the beam centers. When no
/// such pair of maxima exists (beams closer than the Sparrow limit) the
/// report has `no_dip` set and `contrast = 0`.
pub fn contrast(curve: impl Fn(f64) -> f64, profile: &IrradianceProfile) -> Result<ContrastReport> {
    let (x1, x2, s) = two_beam_layout(profile)?;
    let (lo, hi) = profile.domain();

    let xs = linspace(lo, hi, DOMAIN_GRID);
    let ys: Vec<f64> = xs.iter().map(|&x| curve(x)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Numerical("curve has non-finite values".into()));
    }
    let top = argmax(&ys);
    let (a, b) = (xs[top.saturating_sub(1)], xs[(top + 1).min(xs.len() - 1)]);
    let mut peak = golden_max(&curve, a, b, 1e-13 * (hi - lo));
    if ys[top] > peak.1 {
        peak = (xs[top], ys[top]);
    }
    if peak.1 <= 0.0 {
        return Err(Error::NoPeak("curve is non-positive".into()));
    }

    let mid = 0.5 * (x1 + x2);
    let wlo = (x1 - s).max(lo);
    let whi = (x2 + s).min(hi);
    let wx = linspace(wlo, whi, WINDOW_GRID);
    let wy: Vec<f64> = wx.iter().map(|&x| curve(x)).collect();
    let maxima: Vec<usize> = (1..wy.len() - 1)
        .filter(|&i| wy[i] >= wy[i - 1] && wy[i] > wy[i + 1])
        .collect();
    let left = maxima.iter().filter(|&&i| wx[i] < mid).max_by(|&&a, &&b| wy[a].total_cmp(&wy[b]));
    let right = maxima.iter().filter(|&&i| wx[i] > mid).max_by(|&&a, &&b| wy[a].total_cmp(&wy[b]));
    let (Some(&li), Some(&ri)) = (left, right) else {
        return Ok(report(profile, s, peak, None));
    };
    let low = (li..=ri).min_by(|&a, &b| wy[a].total_cmp(&wy[b])).expect("non-empty range");
    if low == li || low == ri {
        return Ok(report(profile, s, peak, None));
    }
    let (a, b) = (wx[low - 1], wx[low + 1]);
    let mut saddle = golden_min(&curve, a, b, 1e-13 * (hi - lo));
    if wy[low] < saddle.1 {
        saddle = (wx[low], wy[low]);
    }
    let floor = saddle.1 * (1.0 + 1e-12);
    if !(floor < wy[li] && floor < wy[ri]) {
        return Ok(report(profile, s, peak, None));
    }
    Ok(report(profile, s, peak, Some(saddle)))
}

/// Contrast of sampled data read at the samples nearest to the given peak
/// and saddle positions (typically the analytic locations). A `None` saddle
/// yields a no-dip report.
pub fn contrast_sampled(
    xs: &[f64],
    ys: &[f64],
    profile: &IrradianceProfile,
    peak_x: f64,
    saddle_x: Option<f64>,
) -> Result<ContrastReport> {
    let (_, _, s) = two_beam_layout(profile)?;
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::config("samples", "need matching, non-empty x and y"));
    }
    let nearest = |target: f64| {
        (0..xs.len())
            .min_by(|&a, &b| (xs[a] - target).abs().total_cmp(&(xs[b] - target).abs()))
            .expect("non-empty samples")
    };
    let p = nearest(peak_x);
    let peak = (xs[p], ys[p]);
    let saddle = saddle_x.map(|x| {
        let i = nearest(x);
        (xs[i], ys[i])
    });
    Ok(report(profile, s, peak, saddle))
}

/// One separation of a contrast sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub separation_rayleigh: f64,
    pub separation_m: f64,
    /// Global maximum of the raw two-beam sum (single-beam peak units).
    pub normalization: f64,
    pub classical: ContrastReport,
    pub spd: ContrastReport,
    pub photon_numbers: Vec<(u32, ContrastReport)>,
}

/// Contrast versus separation for equal Airy beams.
pub fn contrast_sweep(
    src: &SourceStatistics,
    geometry: &PinholeGeometry,
    beam_mean: f64,
    ks: &[u32],
    separations_rayleigh: &[f64],
) -> Result<Vec<SweepRow>> {
    contrast_sweep_imbalanced(src, geometry, beam_mean, ks, separations_rayleigh, 1.0)
}

/// [`contrast_sweep`] with the `-s/2` beam scaled by `imbalance`.
///
/// Separations are evaluated in parallel; rows come back in input order.
pub fn contrast_sweep_imbalanced(
    src: &SourceStatistics,
    geometry: &PinholeGeometry,
    beam_mean: f64,
    ks: &[u32],
    separations_rayleigh: &[f64],
    imbalance: f64,
) -> Result<Vec<SweepRow>> {
    geometry.validate()?;
    let rayleigh = geometry.rayleigh_separation();
    separations_rayleigh
        .par_iter()
        .map(|&sr| {
            if !(sr > 0.0 && sr.is_finite()) {
                return Err(Error::config("separations_rayleigh", format!("must be > 0, got {sr}")));
            }
            let s = sr * rayleigh;
            let profile = IrradianceProfile::two_beam(BeamShape::airy(*geometry), s, imbalance)?;
            let obs = ObservableCurve::new(src, profile.peak_mean_for_beam(beam_mean))?;
            let eval = |o: Observable| {
                let obs = &obs;
                let profile = &profile;
                contrast(move |x| obs.at_transmission(o, profile.transmission(x)), profile)
            };
            let photon_numbers = ks
                .iter()
                .map(|&k| Ok((k, eval(Observable::PhotonNumber(k))?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow {
                separation_rayleigh: sr,
                separation_m: s,
                normalization: profile.normalization(),
                classical: eval(Observable::ClassicalMean)?,
                spd: eval(Observable::SpdClick)?,
                photon_numbers,
            })
        })
        .collect()
}

fn argmax(ys: &[f64]) -> usize {
    ys.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &y)| if y > acc.1 { (i, y) } else { acc })
        .0
}
