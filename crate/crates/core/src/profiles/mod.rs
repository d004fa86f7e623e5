//! Closed-form, peak-normalized irradiance profiles `T²(x) ∈ [0, 1]` of
//! diffraction-limited beams, sampled along one transverse axis.
//!
//! Conventions:
//!
//! - `sinc(u) = sin(πu)/(πu)`; the slit argument is `u = d·sin(x/z)/λ`, so the
//!   first null sits at `u = 1`.
//! - The pinhole `D` is the aperture diameter, so the first Airy zero is at
//!   `≈1.22·λf/D`.
//! - Gaussian beams use `exp(-2x²/w²)` with `w` the 1/e² irradiance waist.
//! - Two beams add in irradiance (orthogonal polarizations, no interference
//!   term) and the sum is rescaled so its global maximum is 1.

mod bessel;

pub use bessel::{bessel_j1, J1_FIRST_ZERO};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::numeric::{golden_max, interpolate, linspace};
use crate::{Error, Result};

/// Rayleigh separation in units of `λf/D`.
pub const RAYLEIGH_FACTOR: f64 = 1.22;

/// Grid used to locate the global maximum of a two-beam sum.
const NORMALIZATION_GRID: usize = 4097;

fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be finite and > 0, got {value}")))
    }
}

/// Single-slit far-field geometry. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitGeometry {
    pub slit_width: f64,
    pub wavelength: f64,
    pub screen_distance: f64,
}

impl SlitGeometry {
    pub fn new(slit_width: f64, wavelength: f64, screen_distance: f64) -> Result<Self> {
        let g = Self {
            slit_width,
            wavelength,
            screen_distance,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("slit_width", self.slit_width)?;
        require_positive("wavelength", self.wavelength)?;
        require_positive("screen_distance", self.screen_distance)
    }

    /// Dimensionless sinc argument `u = d·sin(θ)/λ` with `θ = x/z`.
    pub fn u(&self, x: f64) -> f64 {
        self.slit_width * (x / self.screen_distance).sin() / self.wavelength
    }

    /// Transverse position where the sinc argument equals `u`, if reachable.
    pub fn position_of(&self, u: f64) -> Option<f64> {
        let s = u * self.wavelength / self.slit_width;
        (s.abs() <= 1.0).then(|| self.screen_distance * s.asin())
    }

    /// Small-angle null spacing `λz/d`.
    pub fn null_spacing(&self) -> f64 {
        self.wavelength * self.screen_distance / self.slit_width
    }

    /// Position of the first null, `z·asin(λ/d)` (or the small-angle value
    /// when the slit is narrower than a wavelength).
    pub fn first_null(&self) -> f64 {
        self.position_of(1.0).unwrap_or_else(|| self.null_spacing())
    }
}

/// Circular-pinhole geometry imaged by a lens. All lengths in meters;
/// `aperture_diameter` is the pinhole diameter `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinholeGeometry {
    pub aperture_diameter: f64,
    pub wavelength: f64,
    pub focal_length: f64,
}

impl PinholeGeometry {
    pub fn new(aperture_diameter: f64, wavelength: f64, focal_length: f64) -> Result<Self> {
        let g = Self {
            aperture_diameter,
            wavelength,
            focal_length,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("aperture_diameter", self.aperture_diameter)?;
        require_positive("wavelength", self.wavelength)?;
        require_positive("focal_length", self.focal_length)
    }

    /// Bessel argument `πDρ/(λf)` at radial distance `rho`.
    pub fn u(&self, rho: f64) -> f64 {
        PI * self.aperture_diameter * rho / (self.wavelength * self.focal_length)
    }

    /// Exact radius of the first dark ring.
    pub fn first_zero_radius(&self) -> f64 {
        J1_FIRST_ZERO / PI * self.wavelength * self.focal_length / self.aperture_diameter
    }

    pub fn rayleigh_separation(&self) -> f64 {
        rayleigh_separation(self)
    }
}

/// `sin(πu)/(πu)`, equal to 1 at `u = 0`.
pub fn sinc(u: f64) -> f64 {
    let a = PI * u;
    if a.abs() < 1e-8 {
        1.0 - a * a / 6.0
    } else {
        a.sin() / a
    }
}

/// Single-slit irradiance `sinc²(d·sin(x/z)/λ)`.
pub fn slit_sinc2(x: f64, g: &SlitGeometry) -> f64 {
    let s = sinc(g.u(x));
    s * s
}

/// Airy irradiance `(2J₁(u)/u)²` at radial distance `rho ≥ 0`.
pub fn airy(rho: f64, g: &PinholeGeometry) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!("airy radius must be finite and >= 0, got {rho}")));
    }
    Ok(airy_of_u(g.u(rho)))
}

fn airy_of_u(u: f64) -> f64 {
    let ratio = if u < 1e-6 {
        1.0 - u * u / 8.0
    } else {
        // u is finite and non-negative here
        2.0 * bessel_j1(u).unwrap_or(0.0) / u
    };
    ratio * ratio
}

/// Gaussian irradiance `exp(-2x²/w²)`.
pub fn gaussian(x: f64, waist: f64) -> f64 {
    (-2.0 * x * x / (waist * waist)).exp()
}

/// Rayleigh separation `1.22·λf/D`.
pub fn rayleigh_separation(g: &PinholeGeometry) -> f64 {
    RAYLEIGH_FACTOR * g.wavelength * g.focal_length / g.aperture_diameter
}

/// A single, centered beam shape with peak value 1 at `x = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum BeamShape {
    Slit { geometry: SlitGeometry },
    Airy { geometry: PinholeGeometry },
    Gaussian { waist: f64 },
    /// Linearly interpolated samples, rescaled to peak 1; zero outside.
    Tabulated { positions: Vec<f64>, values: Vec<f64> },
}

impl BeamShape {
    pub fn slit(geometry: SlitGeometry) -> Self {
        BeamShape::Slit { geometry }
    }

    pub fn airy(geometry: PinholeGeometry) -> Self {
        BeamShape::Airy { geometry }
    }

    pub fn gaussian(waist: f64) -> Self {
        BeamShape::Gaussian { waist }
    }

    pub fn tabulated(positions: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if positions.len() != values.len() || positions.len() < 2 {
            return Err(Error::config(
                "tabulated",
                "positions and values need equal length >= 2",
            ));
        }
        if positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("tabulated.positions", "must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::config("tabulated.values", "must be finite and >= 0"));
        }
        let peak = values.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::config("tabulated.values", "need a positive maximum"));
        }
        Ok(BeamShape::Tabulated {
            positions,
            values: values.into_iter().map(|v| v / peak).collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BeamShape::Slit { geometry } => geometry.validate(),
            BeamShape::Airy { geometry } => geometry.validate(),
            BeamShape::Gaussian { waist } => require_positive("waist", *waist),
            BeamShape::Tabulated { positions, values } => {
                BeamShape::tabulated(positions.clone(), values.clone()).map(|_| ())
            }
        }
    }

    /// `T²` at offset `x` from the beam center.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BeamShape::Slit { geometry } => slit_sinc2(x, geometry),
            BeamShape::Airy { geometry } => airy_of_u(geometry.u(x.abs())),
            BeamShape::Gaussian { waist } => gaussian(x, *waist),
            BeamShape::Tabulated { positions, values } => interpolate(positions, values, x),
        }
    }

    /// Natural length scale: first-null distance (slit), Rayleigh
    /// separation (Airy), waist (Gaussian) or a third of the table half-span.
    pub fn length_scale(&self) -> f64 {
        match self {
            BeamShape::Slit { geometry } => geometry.first_null(),
            BeamShape::Airy { geometry } => geometry.rayleigh_separation(),
            BeamShape::Gaussian { waist } => *waist,
            BeamShape::Tabulated { positions, .. } => {
                positions[0].abs().max(positions[positions.len() - 1].abs()) / 3.0
            }
        }
    }

    /// Default symmetric half-width of the evaluation domain.
    pub fn default_half_width(&self) -> f64 {
        3.0 * self.length_scale()
    }

    /// Rayleigh separation when the shape is an Airy disk.
    pub fn rayleigh_separation(&self) -> Option<f64> {
        match self {
            BeamShape::Airy { geometry } => Some(geometry.rayleigh_separation()),
            _ => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            BeamShape::Slit { .. } => "slit-sinc2",
            BeamShape::Airy { .. } => "airy",
            BeamShape::Gaussian { .. } => "gaussian",
            BeamShape::Tabulated { .. } => "tabulated",
        }
    }
}

/// Incoherent sum of two copies of a beam shape.
///
/// The beam at `+s/2` has unit weight; the beam at `-s/2` has weight
/// `imbalance` and its width is multiplied by `width_scale`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoBeam {
    base: BeamShape,
    separation: f64,
    imbalance: f64,
    width_scale: f64,
    normalization: f64,
}

impl TwoBeam {
    pub fn base(&self) -> &BeamShape {
        &self.base
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn imbalance(&self) -> f64 {
        self.imbalance
    }

    pub fn width_scale(&self) -> f64 {
        self.width_scale
    }

    /// Global maximum of the unnormalized sum.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `base(x − s/2) + r·base((x + s/2)/w)`, not normalized.
    pub fn sum(&self, x: f64) -> f64 {
        let half = 0.5 * self.separation;
        self.base.eval(x - half) + self.imbalance * self.base.eval((x + half) / self.width_scale)
    }
}

/// Shape of an [`IrradianceProfile`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    Single(BeamShape),
    TwoBeam(TwoBeam),
}

/// Peak-normalized transmission map `T²(x)` on a one-dimensional domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrradianceProfile {
    kind: ProfileKind,
    center: f64,
    domain: (f64, f64),
}

impl IrradianceProfile {
    /// Profile of a single beam centered at 0 with the shape's default domain.
    pub fn single(shape: BeamShape) -> Result<Self> {
        shape.validate()?;
        let half = shape.default_half_width();
        let domain = match &shape {
            BeamShape::Tabulated { positions, .. } => (positions[0], positions[positions.len() - 1]),
            _ => (-half, half),
        };
        Ok(Self {
            kind: ProfileKind::Single(shape),
            center: 0.0,
            domain,
        })
    }

    pub fn slit(geometry: SlitGeometry) -> Result<Self> {
        Self::single(BeamShape::slit(geometry))
    }

    pub fn airy(geometry: PinholeGeometry) -> Result<Self> {
        Self::single(BeamShape::airy(geometry))
    }

    pub fn gaussian(waist: f64) -> Result<Self> {
        Self::single(BeamShape::gaussian(waist))
    }

    pub fn tabulated(positions: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::single(BeamShape::tabulated(positions, values)?)
    }

    /// Two equal-width copies of `base` separated by `separation` with the
    /// weaker beam scaled by `imbalance`.
    pub fn two_beam(base: BeamShape, separation: f64, imbalance: f64) -> Result<Self> {
        Self::two_beam_scaled(base, separation, imbalance, 1.0)
    }

    /// As [`two_beam`](Self::two_beam), with the width of the `-s/2` beam
    /// multiplied by `width_scale`.
    pub fn two_beam_scaled(
        base: BeamShape,
        separation: f64,
        imbalance: f64,
        width_scale: f64,
    ) -> Result<Self> {
        base.validate()?;
        if !(separation.is_finite() && separation >= 0.0) {
            return Err(Error::config("separation", format!("must be >= 0, got {separation}")));
        }
        if !(imbalance > 0.0 && imbalance <= 1.0) {
            return Err(Error::config("imbalance", format!("must lie in (0, 1], got {imbalance}")));
        }
        require_positive("width_scale", width_scale)?;
        let half = base.default_half_width() * width_scale.max(1.0) + 0.5 * separation;
        let mut beams = TwoBeam {
            base,
            separation,
            imbalance,
            width_scale,
            normalization: 1.0,
        };
        beams.normalization = global_max(|x| beams.sum(x), -half, half);
        Ok(Self {
            kind: ProfileKind::TwoBeam(beams),
            center: 0.0,
            domain: (-half, half),
        })
    }

    /// Shifts the profile (and its domain) so it is centered at `center`.
    pub fn with_center(mut self, center: f64) -> Self {
        let shift = center - self.center;
        self.center = center;
        self.domain = (self.domain.0 + shift, self.domain.1 + shift);
        self
    }

    /// Replaces the evaluation domain. Normalization is not recomputed.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::config("domain", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        self.domain = (lo, hi);
        Ok(self)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            ProfileKind::Single(shape) => shape.kind_name(),
            ProfileKind::TwoBeam(_) => "two-beam",
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// `n` evenly spaced positions across the domain.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        linspace(self.domain.0, self.domain.1, n)
    }

    /// Normalized transmission `T²(x) ∈ [0, 1]`.
    pub fn transmission(&self, x: f64) -> f64 {
        let t = match &self.kind {
            ProfileKind::Single(shape) => shape.eval(x - self.center),
            ProfileKind::TwoBeam(beams) => beams.sum(x - self.center) / beams.normalization,
        };
        t.clamp(0.0, 1.0)
    }

    /// Irradiance in units of a single beam's peak: the raw two-beam sum,
    /// or `T²` for single beams.
    pub fn relative_irradiance(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Single(shape) => shape.eval(x - self.center),
            ProfileKind::TwoBeam(beams) => beams.sum(x - self.center),
        }
    }

    /// Global maximum of [`relative_irradiance`](Self::relative_irradiance):
    /// 1 for single beams.
    pub fn normalization(&self) -> f64 {
        match &self.kind {
            ProfileKind::Single(_) => 1.0,
            ProfileKind::TwoBeam(beams) => beams.normalization,
        }
    }

    /// Detected mean at the profile maximum when each beam peaks at `beam_mean`.
    pub fn peak_mean_for_beam(&self, beam_mean: f64) -> f64 {
        beam_mean * self.normalization()
    }

    pub fn two_beam_parts(&self) -> Option<&TwoBeam> {
        match &self.kind {
            ProfileKind::TwoBeam(beams) => Some(beams),
            ProfileKind::Single(_) => None,
        }
    }

    pub fn base_shape(&self) -> &BeamShape {
        match &self.kind {
            ProfileKind::Single(shape) => shape,
            ProfileKind::TwoBeam(beams) => &beams.base,
        }
    }

    /// Centers of the two beams (`-s/2`, `+s/2` around the profile center).
    pub fn beam_centers(&self) -> Option<(f64, f64)> {
        self.two_beam_parts().map(|b| {
            let half = 0.5 * b.separation;
            (self.center - half, self.center + half)
        })
    }

    /// Rayleigh separation of the underlying shape, when it is an Airy disk.
    pub fn rayleigh_separation(&self) -> Option<f64> {
        self.base_shape().rayleigh_separation()
    }
}

/// Value of the normalized two-beam sum of `base` at `x`.
///
/// Builds the profile on every call; construct an [`IrradianceProfile`]
/// once when evaluating many points.
pub fn two_beam(x: f64, base: &BeamShape, separation: f64, imbalance: f64) -> Result<f64> {
    Ok(IrradianceProfile::two_beam(base.clone(), separation, imbalance)?.transmission(x))
}

fn global_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let xs = linspace(lo, hi, NORMALIZATION_GRID);
    let (best, _) = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, f(x)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(xs.len() - 1)];
    let (_, refined) = golden_max(&f, a, b, 1e-12 * (hi - lo));
    refined.max(f(xs[best]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_slit() -> SlitGeometry {
        SlitGeometry::new(250e-6, 1550e-9, 0.23).unwrap()
    }

    fn reference_pinhole() -> PinholeGeometry {
        PinholeGeometry::new(75e-6, 1550e-9, 0.1).unwrap()
    }

    #[test]
    fn slit_center_and_first_null() {
        let g = reference_slit();
        assert_eq!(slit_sinc2(0.0, &g), 1.0);
        let null = g.wavelength * g.screen_distance / g.slit_width;
        assert!(slit_sinc2(null, &g) < 1e-9);
        assert!(slit_sinc2(g.first_null(), &g) < 1e-20);
    }

    #[test]
    fn slit_half_max_positions() {
        // u = 0.4429464706894523 from a high-precision root of sinc²(u) = 1/2
        let g = reference_slit();
        let x = g.position_of(0.442_946_470_689_452_3).unwrap();
        assert!((slit_sinc2(x, &g) - 0.5).abs() < 1e-12);
        assert!((x - 0.632e-3).abs() < 1e-6);
        assert!((2.0 * x - 1.263e-3).abs() < 1e-6);
    }

    #[test]
    fn airy_reference_values() {
        let g = reference_pinhole();
        assert_eq!(airy(0.0, &g).unwrap(), 1.0);
        let r = rayleigh_separation(&g);
        // 1.22 is a rounded zero; the exact ring sits at 1.2197 λf/D
        assert!(airy(r, &g).unwrap() < 5e-8);
        assert!(airy(g.first_zero_radius(), &g).unwrap() < 1e-25);
        // mpmath: (2 J1(0.61π)/(0.61π))² = 0.3672968925458677
        assert!((airy(0.5 * r, &g).unwrap() - 0.367_296_892_545_867_7).abs() < 1e-12);
        assert!(airy(-1e-6, &g).is_err());
        assert!(airy(f64::NAN, &g).is_err());
    }

    #[test]
    fn rayleigh_separation_scaling() {
        let g = reference_pinhole();
        let r = rayleigh_separation(&g);
        assert!((r - 2.521_333_333e-3).abs() < 1e-11);
        let wide = PinholeGeometry::new(150e-6, 1550e-9, 0.1).unwrap();
        assert!((rayleigh_separation(&wide) - 0.5 * r).abs() < 1e-15);
        let red = PinholeGeometry::new(75e-6, 3100e-9, 0.1).unwrap();
        assert!((rayleigh_separation(&red) - 2.0 * r).abs() < 1e-15);
    }

    #[test]
    fn gaussian_half_max() {
        let w = 1.3e-3;
        assert_eq!(gaussian(0.0, w), 1.0);
        let x = w / 2f64.sqrt() * (2f64.ln()).sqrt();
        assert!((gaussian(x, w) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_beam_coincident_matches_base() {
        let base = BeamShape::airy(reference_pinhole());
        let p = IrradianceProfile::two_beam(base.clone(), 0.0, 1.0).unwrap();
        assert!((p.normalization() - 2.0).abs() < 1e-12);
        for &x in &[0.0, 3e-4, 1.1e-3, 2.9e-3] {
            assert!((p.transmission(x) - base.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_beam_at_rayleigh() {
        let g = reference_pinhole();
        let s = rayleigh_separation(&g);
        let p = IrradianceProfile::two_beam(BeamShape::airy(g), s, 1.0).unwrap();
        let n = p.normalization();
        let at_center = p.relative_irradiance(0.5 * s);
        assert!((at_center - 1.0).abs() < 1e-7);
        let mid = p.transmission(0.0) * n;
        assert!((mid - 2.0 * 0.367_296_892_545_867_7).abs() < 1e-12);
        assert!((p.transmission(0.7e-3) - p.transmission(-0.7e-3)).abs() < 1e-14);
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(SlitGeometry::new(0.0, 1e-6, 1.0).is_err());
        assert!(PinholeGeometry::new(1e-4, f64::INFINITY, 1.0).is_err());
        assert!(IrradianceProfile::gaussian(-1.0).is_err());
        let base = BeamShape::gaussian(1.0);
        assert!(IrradianceProfile::two_beam(base.clone(), 1.0, 0.0).is_err());
        assert!(IrradianceProfile::two_beam(base, -1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_profile_is_renormalized() {
        let p = IrradianceProfile::tabulated(vec![-1.0, 0.0, 1.0], vec![0.0, 2.0, 1.0]).unwrap();
        assert_eq!(p.transmission(0.0), 1.0);
        assert_eq!(p.transmission(0.5), 0.75);
        assert_eq!(p.transmission(2.0), 0.0);
        assert_eq!(p.domain(), (-1.0, 1.0));
    }
}
