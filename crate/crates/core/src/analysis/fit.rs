use serde::{Deserialize, Serialize};

use super::nelder_mead::{minimize, NelderMeadOptions};
use crate::photon_stats::{Observable, ObservableCurve, SourceStatistics};
use crate::profiles::{BeamShape, IrradianceProfile, SlitGeometry};
use crate::{Error, Result};

/// Profile family fitted to scan data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProfileModel {
    /// `{amplitude, scale, center}`; `scale` multiplies the slit width.
    Slit { geometry: SlitGeometry },
    /// `{amplitude (per-beam peak mean), separation, imbalance, center,
    /// width_scale}` around a base shape.
    TwoBeam { base: BeamShape },
}

/// Model parameters. Fields a model does not use are carried through
/// unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParameters {
    pub amplitude: f64,
    pub center: f64,
    pub scale: f64,
    pub separation: f64,
    pub imbalance: f64,
    pub width_scale: f64,
}

impl FitParameters {
    pub fn slit(amplitude: f64, scale: f64, center: f64) -> Self {
        Self {
            amplitude,
            center,
            scale,
            separation: 0.0,
            imbalance: 1.0,
            width_scale: 1.0,
        }
    }

    pub fn two_beam(amplitude: f64, separation: f64, imbalance: f64, center: f64, width_scale: f64) -> Self {
        Self {
            amplitude,
            center,
            scale: 1.0,
            separation,
            imbalance,
            width_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub parameters: FitParameters,
    pub residual_sum_squares: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Finite-difference gradient norm of the residual at the optimum, in
    /// units of the initial simplex steps.
    pub gradient_norm: f64,
}

/// A least-squares fit problem.
#[derive(Debug, Clone)]
pub struct FitSpec {
    pub model: ProfileModel,
    pub observable: Observable,
    /// Photon statistics of the source; only its family matters.
    pub source: SourceStatistics,
    pub initial: FitParameters,
    pub options: NelderMeadOptions,
}

impl FitSpec {
    pub fn new(model: ProfileModel, observable: Observable, initial: FitParameters) -> Self {
        Self {
            model,
            observable,
            source: SourceStatistics::Coherent { mean: 1.0 },
            initial,
            options: NelderMeadOptions::default(),
        }
    }

    fn free_count(&self) -> usize {
        match self.model {
            ProfileModel::Slit { .. } => 3,
            ProfileModel::TwoBeam { .. } => 5,
        }
    }

    fn pack(&self, p: &FitParameters) -> Vec<f64> {
        match self.model {
            ProfileModel::Slit { .. } => vec![p.amplitude, p.scale, p.center],
            ProfileModel::TwoBeam { .. } => {
                vec![p.amplitude, p.separation, p.imbalance, p.center, p.width_scale]
            }
        }
    }

    fn unpack(&self, v: &[f64]) -> FitParameters {
        let mut p = self.initial;
        match self.model {
            ProfileModel::Slit { .. } => {
                p.amplitude = v[0];
                p.scale = v[1];
                p.center = v[2];
            }
            ProfileModel::TwoBeam { .. } => {
                p.amplitude = v[0];
                p.separation = v[1];
                p.imbalance = v[2];
                p.center = v[3];
                p.width_scale = v[4];
            }
        }
        p
    }

    fn length_scale(&self) -> f64 {
        match &self.model {
            ProfileModel::Slit { geometry } => geometry.first_null(),
            ProfileModel::TwoBeam { base } => base.length_scale(),
        }
    }

    fn steps(&self) -> Vec<f64> {
        let p = &self.initial;
        let l = self.length_scale();
        let rel = |v: f64, fallback: f64| if v != 0.0 { 0.05 * v.abs() } else { fallback };
        match self.model {
            ProfileModel::Slit { .. } => vec![rel(p.amplitude, 0.1), rel(p.scale, 0.05), 0.05 * l],
            ProfileModel::TwoBeam { .. } => vec![
                rel(p.amplitude, 0.1),
                rel(p.separation, 0.05 * l),
                0.05,
                0.05 * l,
                0.05,
            ],
        }
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let free = (f64::NEG_INFINITY, f64::INFINITY);
        let positive = (1e-12, f64::INFINITY);
        match self.model {
            ProfileModel::Slit { .. } => vec![positive, (1e-6, f64::INFINITY), free],
            ProfileModel::TwoBeam { .. } => {
                vec![positive, (0.0, f64::INFINITY), (1e-6, 1.0), free, (0.05, 20.0)]
            }
        }
    }

    /// Model prediction at each position.
    pub fn predict(&self, params: &FitParameters, xs: &[f64]) -> Result<Vec<f64>> {
        let profile = match &self.model {
            ProfileModel::Slit { geometry } => {
                let mut g = *geometry;
                g.slit_width *= params.scale;
                IrradianceProfile::slit(g)?
            }
            ProfileModel::TwoBeam { base } => IrradianceProfile::two_beam_scaled(
                base.clone(),
                params.separation,
                params.imbalance,
                params.width_scale,
            )?,
        }
        .with_center(params.center);
        let curve = ObservableCurve::new(&self.source, profile.peak_mean_for_beam(params.amplitude))?;
        Ok(xs
            .iter()
            .map(|&x| curve.at_transmission(self.observable, profile.transmission(x)))
            .collect())
    }

    fn residual(&self, params: &FitParameters, xs: &[f64], ys: &[f64]) -> f64 {
        match self.predict(params, xs) {
            Ok(m) => m.iter().zip(ys).map(|(a, b)| (a - b) * (a - b)).sum(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Derivative-free least-squares fit of `spec.model` to `(xs, ys)`.
///
/// The simplex is restarted around the incumbent after each convergence
/// until a restart no longer improves the residual or the iteration budget
/// (`spec.options.max_iterations`) is spent. Non-convergence is reported in
/// the result, not as an error.
pub fn fit_profile(xs: &[f64], ys: &[f64], spec: &FitSpec) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::config("data", "x and y lengths differ"));
    }
    if xs.len() < 2 * spec.free_count() {
        return Err(Error::config(
            "data",
            format!("need at least {} points for {} parameters", 2 * spec.free_count(), spec.free_count()),
        ));
    }
    if ys.iter().chain(xs).any(|v| !v.is_finite()) {
        return Err(Error::config("data", "values must be finite"));
    }
    if let SourceStatistics::Fock { .. } | SourceStatistics::Tabulated { .. } = spec.source {
        return Err(Error::config("fit.source", "fits need a coherent or thermal source family"));
    }

    let steps = spec.steps();
    let bounds = spec.bounds();
    let objective = |v: &[f64]| spec.residual(&spec.unpack(v), xs, ys);

    let mut best = spec.pack(&spec.initial);
    let mut best_value = objective(&best);
    let mut used = 0;
    let mut converged = false;
    while used < spec.options.max_iterations {
        let options = NelderMeadOptions {
            max_iterations: spec.options.max_iterations - used,
            tolerance: spec.options.tolerance,
        };
        let m = minimize(objective, &best, &steps, &bounds, options);
        used += m.iterations;
        let improved = m.value < best_value * (1.0 - 1e-12) && m.value < best_value - 1e-300;
        if m.value <= best_value {
            best = m.x;
            best_value = m.value;
        }
        converged = m.converged;
        if !converged || !improved || m.iterations == 0 {
            break;
        }
    }

    let gradient_norm = {
        let h = 1e-6;
        (0..best.len())
            .map(|i| {
                let mut up = best.clone();
                let mut down = best.clone();
                up[i] += h * steps[i];
                down[i] -= h * steps[i];
                let g = (objective(&up) - objective(&down)) / (2.0 * h);
                g * g
            })
            .sum::<f64>()
            .sqrt()
    };

    Ok(FitResult {
        parameters: spec.unpack(&best),
        residual_sum_squares: best_value,
        iterations: used,
        converged,
        gradient_norm,
    })
}
