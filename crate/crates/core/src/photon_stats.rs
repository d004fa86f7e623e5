//! Photon-number statistics of the illumination and the effective
//! beamsplitter that maps a spatial profile onto detected photon numbers.
//!
//! A detector at position `x` sees the source through a fictitious
//! beamsplitter of transmission `T²(x)`: each source photon is kept
//! independently with probability `T²(x)`. For a source pmf `P(j)`
//!
//! ```text
//! p(k) = Σ_{j≥k} P(j) · C(j,k) · T^{2k} · (1 − T²)^{j−k}
//! ```
//!
//! which maps coherent → coherent, thermal → thermal and Fock → binomial.
//! The sum is evaluated directly so tabulated sources work too.

use serde::{Deserialize, Serialize};

use crate::profiles::IrradianceProfile;
use crate::{Error, Result};

/// The beamsplitter sum stops once the remaining source mass is below this.
pub const SOURCE_TAIL_BOUND: f64 = 1e-14;

/// Above this `j` binomial coefficients are evaluated in log space.
const EXACT_BINOMIAL_LIMIT: u32 = 30;

/// Photon-number distribution family of the illumination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SourceStatistics {
    /// Poissonian, mean `mean`.
    Coherent { mean: f64 },
    /// Bose–Einstein (geometric), mean `mean`.
    Thermal { mean: f64 },
    /// Exactly `photons` photons.
    Fock { photons: u32 },
    /// Arbitrary pmf over `0..pmf.len()`.
    Tabulated { pmf: Vec<f64> },
}

impl SourceStatistics {
    pub fn coherent(mean: f64) -> Result<Self> {
        let s = SourceStatistics::Coherent { mean };
        s.validate()?;
        Ok(s)
    }

    pub fn thermal(mean: f64) -> Result<Self> {
        let s = SourceStatistics::Thermal { mean };
        s.validate()?;
        Ok(s)
    }

    pub fn fock(photons: u32) -> Self {
        SourceStatistics::Fock { photons }
    }

    pub fn tabulated(pmf: Vec<f64>) -> Result<Self> {
        let s = SourceStatistics::Tabulated { pmf };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceStatistics::Coherent { mean } | SourceStatistics::Thermal { mean } => {
                if mean.is_finite() && *mean > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config("source.mean", format!("must be finite and > 0, got {mean}")))
                }
            }
            SourceStatistics::Fock { .. } => Ok(()),
            SourceStatistics::Tabulated { pmf } => {
                if pmf.is_empty() || pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::config("source.pmf", "needs non-negative finite entries"));
                }
                let total: f64 = pmf.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::config("source.pmf", format!("must sum to 1, sums to {total}")));
                }
                Ok(())
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SourceStatistics::Coherent { .. } => "coherent",
            SourceStatistics::Thermal { .. } => "thermal",
            SourceStatistics::Fock { .. } => "fock",
            SourceStatistics::Tabulated { .. } => "tabulated",
        }
    }

    /// Mean photon number.
    pub fn mean(&self) -> f64 {
        match self {
            SourceStatistics::Coherent { mean } | SourceStatistics::Thermal { mean } => *mean,
            SourceStatistics::Fock { photons } => *photons as f64,
            SourceStatistics::Tabulated { pmf } => {
                pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
            }
        }
    }

    /// `ln P(k)`; `-∞` where the pmf vanishes.
    pub fn ln_pmf(&self, k: u32) -> f64 {
        let kf = k as f64;
        match self {
            SourceStatistics::Coherent { mean } => -mean + kf * mean.ln() - ln_factorial(k),
            SourceStatistics::Thermal { mean } => kf * mean.ln() - (kf + 1.0) * mean.ln_1p(),
            SourceStatistics::Fock { photons } => {
                if k == *photons {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            SourceStatistics::Tabulated { pmf } => {
                pmf.get(k as usize).map_or(f64::NEG_INFINITY, |p| p.ln())
            }
        }
    }

    fn pmf_at(&self, k: u32) -> f64 {
        match self {
            SourceStatistics::Fock { photons } => f64::from(u8::from(k == *photons)),
            SourceStatistics::Tabulated { pmf } => pmf.get(k as usize).copied().unwrap_or(0.0),
            _ => self.ln_pmf(k).exp(),
        }
    }

    /// A cutoff `J` with `P(n > J) < SOURCE_TAIL_BOUND`, from a closed-form
    /// tail bound rather than a running sum (which can stall on rounding).
    /// Finite sources return their last support point.
    pub fn truncation(&self) -> u32 {
        match self {
            SourceStatistics::Fock { photons } => *photons,
            SourceStatistics::Tabulated { pmf } => (pmf.len() - 1) as u32,
            SourceStatistics::Thermal { mean } => {
                // P(n > J) = (m/(1+m))^(J+1)
                let ratio = mean / (1.0 + mean);
                let j = (SOURCE_TAIL_BOUND.ln() / ratio.ln()).ceil() - 1.0;
                j.max(0.0) as u32
            }
            SourceStatistics::Coherent { mean } => {
                // past j + 2 > m successive terms shrink by at least m/(j+2), so
                // P(n > j) <= p(j+1) / (1 - m/(j+2))
                let mut j = mean.ceil() as u32;
                loop {
                    let ratio = mean / (j as f64 + 2.0);
                    if self.pmf_at(j + 1) / (1.0 - ratio) < SOURCE_TAIL_BOUND {
                        return j;
                    }
                    j += 1;
                }
            }
        }
    }

    /// The same family with detected mean `peak_mean` at unit transmission,
    /// plus any residual transmission needed to reach it.
    ///
    /// Coherent and thermal sources are rescaled directly. Fock and tabulated
    /// sources cannot gain photons, so they are thinned by
    /// `η = peak_mean / mean ≤ 1`.
    pub fn scaled_to_peak_mean(&self, peak_mean: f64) -> Result<(SourceStatistics, f64)> {
        if !(peak_mean.is_finite() && peak_mean > 0.0) {
            return Err(Error::config("peak_mean", format!("must be finite and > 0, got {peak_mean}")));
        }
        match self {
            SourceStatistics::Coherent { .. } => Ok((SourceStatistics::Coherent { mean: peak_mean }, 1.0)),
            SourceStatistics::Thermal { .. } => Ok((SourceStatistics::Thermal { mean: peak_mean }, 1.0)),
            _ => {
                let mean = self.mean();
                if peak_mean > mean * (1.0 + 1e-12) {
                    return Err(Error::config(
                        "peak_mean",
                        format!(
                            "{} source with mean {mean} cannot be detected with mean {peak_mean}",
                            self.family_name()
                        ),
                    ));
                }
                Ok((self.clone(), (peak_mean / mean).min(1.0)))
            }
        }
    }
}

/// Probabilities `p[0..=k_cap]` with the remaining mass in `tail`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonNumberDistribution {
    pub probabilities: Vec<f64>,
    pub tail: f64,
}

impl PhotonNumberDistribution {
    pub fn k_cap(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// What a scanning detector reports per pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionMode {
    /// Photon number up to `k_max`, larger numbers lumped into an overflow bin.
    NumberResolving,
    /// Click / no-click.
    ConventionalSinglePhoton,
    /// Mean photon number (average irradiance).
    ClassicalMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionModel {
    pub mode: DetectionMode,
    pub k_max: u32,
}

impl DetectionModel {
    pub fn number_resolving(k_max: u32) -> Result<Self> {
        let d = Self {
            mode: DetectionMode::NumberResolving,
            k_max,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == DetectionMode::NumberResolving && self.k_max < 1 {
            return Err(Error::config("detection.k_max", "must be >= 1 for number-resolving detection"));
        }
        Ok(())
    }
}

/// `P(k)` of the source.
pub fn source_pmf(src: &SourceStatistics, k: i64) -> Result<f64> {
    if k < 0 {
        return Err(Error::domain(format!("photon number must be >= 0, got {k}")));
    }
    Ok(src.pmf_at(k as u32))
}

/// Probability of detecting `k` photons behind a beamsplitter of
/// transmission `t2`, by direct summation over source photon numbers.
pub fn beamsplitter_transform(src: &SourceStatistics, t2: f64, k: u32) -> Result<f64> {
    check_transmission(t2)?;
    Ok(transform_unchecked(src, t2, k, src.truncation()))
}

/// Full detected distribution behind a beamsplitter of transmission `t2`,
/// out to the source truncation point.
pub fn detected_distribution(src: &SourceStatistics, t2: f64) -> Result<PhotonNumberDistribution> {
    check_transmission(t2)?;
    let cap = src.truncation();
    let probabilities: Vec<f64> = (0..=cap).map(|k| transform_unchecked(src, t2, k, cap)).collect();
    let tail = (1.0 - probabilities.iter().sum::<f64>()).max(0.0);
    Ok(PhotonNumberDistribution { probabilities, tail })
}

fn check_transmission(t2: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t2) {
        Ok(())
    } else {
        Err(Error::domain(format!("transmission must lie in [0, 1], got {t2}")))
    }
}

fn transform_unchecked(src: &SourceStatistics, t2: f64, k: u32, cap: u32) -> f64 {
    if t2 == 0.0 {
        return f64::from(u8::from(k == 0));
    }
    if t2 == 1.0 {
        return src.pmf_at(k);
    }
    if k > cap {
        return 0.0;
    }
    let ln_t = t2.ln();
    let ln_r = (-t2).ln_1p();
    let t_k = t2.powi(k as i32);
    let r = 1.0 - t2;
    let mut sum = 0.0;
    for j in k..=cap {
        let p = src.pmf_at(j);
        if p == 0.0 {
            continue;
        }
        let term = if j <= EXACT_BINOMIAL_LIMIT {
            p * binomial_exact(j, k) * t_k * r.powi((j - k) as i32)
        } else {
            (src.ln_pmf(j) + ln_binomial(j, k) + k as f64 * ln_t + (j - k) as f64 * ln_r).exp()
        };
        sum += term;
    }
    sum
}

/// `C(n, k)` for `n ≤ 30`; exact in `f64` (`C(30, 15) < 2⁵³`).
fn binomial_exact(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * (n as u64 - i) / (i + 1);
    }
    c as f64
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln n!`: direct summation for small `n`, Stirling series above.
pub(crate) fn ln_factorial(n: u32) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 128 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Probability of detecting exactly `k` photons at each grid position.
///
/// `peak_mean` is the detected mean photon number where `T² = 1`.
pub fn conditional_profile(
    src: &SourceStatistics,
    profile: &IrradianceProfile,
    k: u32,
    x_grid: &[f64],
    peak_mean: f64,
) -> Result<Vec<f64>> {
    let (scaled, eta) = src.scaled_to_peak_mean(peak_mean)?;
    let cap = scaled.truncation();
    Ok(x_grid
        .iter()
        .map(|&x| transform_unchecked(&scaled, eta * profile.transmission(x), k, cap))
        .collect())
}

/// Expected detected photon number `peak_mean · T²(x)`.
pub fn classical_mean_profile(profile: &IrradianceProfile, peak_mean: f64, x_grid: &[f64]) -> Vec<f64> {
    x_grid.iter().map(|&x| peak_mean * profile.transmission(x)).collect()
}

/// Click probability `1 − p₀(x)` of a non-number-resolving detector.
pub fn spd_click_profile(
    src: &SourceStatistics,
    profile: &IrradianceProfile,
    peak_mean: f64,
    x_grid: &[f64],
) -> Result<Vec<f64>> {
    Ok(conditional_profile(src, profile, 0, x_grid, peak_mean)?
        .into_iter()
        .map(|p0| 1.0 - p0)
        .collect())
}

/// Pointwise observable as a function of transmission, used where a curve is
/// needed as a closure rather than on a grid.
#[derive(Debug, Clone)]
pub struct ObservableCurve {
    source: SourceStatistics,
    eta: f64,
    cap: u32,
    peak_mean: f64,
}

/// Which detector output an [`ObservableCurve`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "observable", content = "k")]
pub enum Observable {
    ClassicalMean,
    SpdClick,
    PhotonNumber(u32),
}

impl ObservableCurve {
    pub fn new(src: &SourceStatistics, peak_mean: f64) -> Result<Self> {
        let (source, eta) = src.scaled_to_peak_mean(peak_mean)?;
        let cap = source.truncation();
        Ok(Self {
            source,
            eta,
            cap,
            peak_mean,
        })
    }

    /// Observable at transmission `t2 ∈ [0, 1]`.
    pub fn at_transmission(&self, observable: Observable, t2: f64) -> f64 {
        let t2 = t2.clamp(0.0, 1.0);
        match observable {
            Observable::ClassicalMean => self.peak_mean * t2,
            Observable::SpdClick => 1.0 - transform_unchecked(&self.source, self.eta * t2, 0, self.cap),
            Observable::PhotonNumber(k) => transform_unchecked(&self.source, self.eta * t2, k, self.cap),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{IrradianceProfile, SlitGeometry};

    #[test]
    fn truncation_bounds_the_tail() {
        for &m in &[0.05, 3.6, 30.0, 200.0] {
            for src in [SourceStatistics::coherent(m).unwrap(), SourceStatistics::thermal(m).unwrap()] {
                let j = src.truncation();
                let tail: f64 = (j + 1..j + 20_000).map(|i| src.pmf_at(i)).sum();
                assert!(tail < SOURCE_TAIL_BOUND, "{src:?}: cutoff {j}, tail {tail:e}");
                assert!(j as f64 >= m);
            }
        }
    }

    #[test]
    fn source_pmf_reference_values() {
        let coh = SourceStatistics::coherent(3.6).unwrap();
        // mpmath: e^-3.6 = 0.02732372244729255837
        assert!((source_pmf(&coh, 0).unwrap() - 0.027_323_722_447_292_56).abs() < 1e-15);
        let fock = SourceStatistics::fock(10);
        assert_eq!(source_pmf(&fock, 10).unwrap(), 1.0);
        assert_eq!(source_pmf(&fock, 9).unwrap(), 0.0);
        let th = SourceStatistics::thermal(1.0).unwrap();
        for k in 0..20 {
            let expected = 0.5f64.powi(k + 1);
            assert!((source_pmf(&th, k as i64).unwrap() - expected).abs() < 1e-16);
        }
        assert!(source_pmf(&coh, -1).is_err());
    }

    #[test]
    fn transform_edge_transmissions() {
        let sources = [
            SourceStatistics::coherent(3.6).unwrap(),
            SourceStatistics::thermal(2.0).unwrap(),
            SourceStatistics::fock(7),
            SourceStatistics::tabulated(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
        ];
        for src in &sources {
            for k in 0..12 {
                let at_one = beamsplitter_transform(src, 1.0, k).unwrap();
                assert_eq!(at_one, source_pmf(src, k as i64).unwrap());
                let at_zero = beamsplitter_transform(src, 0.0, k).unwrap();
                assert_eq!(at_zero, if k == 0 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn transform_reference_values() {
        let fock = SourceStatistics::fock(10);
        assert!((beamsplitter_transform(&fock, 0.5, 5).unwrap() - 252.0 / 1024.0).abs() < 1e-15);
        let coh = SourceStatistics::coherent(3.6).unwrap();
        // mpmath: e^-1.8 · 1.8² / 2 = 0.26778419891897019
        assert!((beamsplitter_transform(&coh, 0.5, 2).unwrap() - 0.267_784_198_918_970_2).abs() < 1e-14);
    }

    #[test]
    fn transform_rejects_bad_transmission() {
        let coh = SourceStatistics::coherent(1.0).unwrap();
        assert!(beamsplitter_transform(&coh, 1.5, 0).is_err());
        assert!(beamsplitter_transform(&coh, -0.1, 0).is_err());
        assert!(beamsplitter_transform(&coh, f64::NAN, 0).is_err());
    }

    #[test]
    fn invalid_sources() {
        assert!(SourceStatistics::coherent(0.0).is_err());
        assert!(SourceStatistics::thermal(f64::NAN).is_err());
        assert!(SourceStatistics::tabulated(vec![0.5, 0.4]).is_err());
        assert!(DetectionModel::number_resolving(0).is_err());
    }

    #[test]
    fn fock_cannot_be_brightened() {
        let fock = SourceStatistics::fock(4);
        assert!(fock.scaled_to_peak_mean(5.0).is_err());
        let (_, eta) = fock.scaled_to_peak_mean(2.0).unwrap();
        assert_eq!(eta, 0.5);
    }

    #[test]
    fn k0_profile_is_brightest_in_the_dark() {
        let profile = IrradianceProfile::slit(SlitGeometry::new(250e-6, 1550e-9, 0.23).unwrap()).unwrap();
        let coh = SourceStatistics::coherent(3.6).unwrap();
        let grid = [0.0, profile.base_shape().length_scale()];
        let p0 = conditional_profile(&coh, &profile, 0, &grid, 3.6).unwrap();
        assert!((p0[0] - (-3.6f64).exp()).abs() < 1e-15);
        assert!((p0[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn classical_and_spd_profiles() {
        let profile = IrradianceProfile::slit(SlitGeometry::new(250e-6, 1550e-9, 0.23).unwrap()).unwrap();
        let null = profile.base_shape().length_scale();
        let grid = [0.0, 2e-4, null];
        let m = classical_mean_profile(&profile, 3.6, &grid);
        assert_eq!(m[0], 3.6);
        assert!(m[2].abs() < 1e-12);
        let m2 = classical_mean_profile(&profile, 7.2, &grid);
        for (a, b) in m.iter().zip(&m2) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
        let coh = SourceStatistics::coherent(3.6).unwrap();
        let spd = spd_click_profile(&coh, &profile, 3.6, &grid).unwrap();
        for (s, mean) in spd.iter().zip(&m) {
            assert!((s - (1.0 - (-mean).exp())).abs() < 1e-14);
        }
        assert!(spd[2].abs() < 1e-12);
        // weak-beam limit: clicks ≈ mean
        let weak = spd_click_profile(&coh, &profile, 1e-6, &grid).unwrap();
        let weak_mean = classical_mean_profile(&profile, 1e-6, &grid);
        for (s, mean) in weak.iter().zip(&weak_mean) {
            assert!((s - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn ln_factorial_continuity_across_stirling_switch() {
        let direct: f64 = (2..=129u32).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(129) - direct).abs() < 1e-10);
        assert!((ln_factorial(10) - 3_628_800f64.ln()).abs() < 1e-13);
    }
}
