//! JSON scenario files: schema, loading and validation.
//!
//! ```json
//! {
//!   "schema": "pnr-scope/scenario@1",
//!   "name": "fig1_slit",
//!   "experiment": { "kind": "single-slit", "slit_width_m": 250e-6,
//!                   "wavelength_m": 1550e-9, "screen_distance_m": 0.23 },
//!   "source": { "family": "coherent", "mean": 3.6 },
//!   "detection": { "k_max": 9 },
//!   "scan": { "step_m": 50e-6, "pulses": 100000, "seed": 2010 },
//!   "analyses": ["fwhm", "fit"]
//! }
//! ```
//!
//! `source.mean` is the detected mean at the profile peak (single beam) or
//! per beam (two-beam). Monte Carlo runs only when `scan.pulses` is set.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::analysis::sparrow_limit;
use crate::photon_stats::SourceStatistics;
use crate::profiles::{BeamShape, PinholeGeometry, SlitGeometry};

pub const SCHEMA: &str = "pnr-scope/scenario@1";

/// Default number of analytic grid points when no scan positions are given.
pub const DEFAULT_GRID_POINTS: usize = 401;

/// Scenario files shipped with the crate, as `(file name, contents)`.
pub const BUNDLED: &[(&str, &str)] = &[
    ("fig1_slit.json", include_str!("../scenarios/fig1_slit.json")),
    ("fig2_twobeam.json", include_str!("../scenarios/fig2_twobeam.json")),
    ("fig3_stats.json", include_str!("../scenarios/fig3_stats.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceStatistics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub analyses: Vec<AnalysisRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    SingleSlit {
        slit_width_m: f64,
        wavelength_m: f64,
        screen_distance_m: f64,
    },
    TwoBeam {
        aperture_diameter_m: f64,
        wavelength_m: f64,
        focal_length_m: f64,
        separations_rayleigh: Vec<f64>,
        #[serde(default = "unit")]
        imbalance: f64,
        contrast_k: Vec<u32>,
    },
    StatsCompare {
        waist_m: f64,
        k: u32,
        sources: Vec<SourceStatistics>,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    pub k_max: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    /// Explicit, strictly increasing positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_m: Option<Vec<f64>>,
    /// Step of an automatic grid across the profile domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_m: Option<f64>,
    /// Pulses per position; enables Monte Carlo.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulses: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisRequest {
    Fwhm,
    Contrast,
    Sweep,
    Fit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory used when `--out-dir` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// A scenario problem, tied to the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{source_name}: parse error: {message}")]
    Parse { source_name: String, message: String },
    #[error("invalid `{field}`: {message}")]
    Schema { field: String, message: String },
}

fn schema_err(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Non-fatal findings from [`Scenario::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub field: String,
    pub message: String,
}

impl Scenario {
    pub fn from_json(text: &str, source_name: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })
    }

    /// Reads a scenario file, falling back to a bundled scenario of the same
    /// file name (or stem) when `path` does not exist.
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let name = path.display().to_string();
        match std::fs::read_to_string(path) {
            Ok(text) => Self::from_json(&text, &name),
            Err(e) => match bundled(&name) {
                Some(text) => Self::from_json(text, &name),
                None => Err(ScenarioError::Parse {
                    source_name: name,
                    message: e.to_string(),
                }),
            },
        }
    }

    pub fn monte_carlo_requested(&self) -> bool {
        self.scan.as_ref().is_some_and(|s| s.pulses.is_some())
    }

    pub fn wants(&self, analysis: AnalysisRequest) -> bool {
        self.analyses.contains(&analysis)
    }

    /// Schema and physics checks. Errors abort; warnings are advisory.
    pub fn validate(&self) -> Result<Vec<Warning>, ScenarioError> {
        let mut warnings = Vec::new();
        if self.schema != SCHEMA {
            return Err(schema_err("schema", format!("expected \"{SCHEMA}\", found \"{}\"", self.schema)));
        }
        if self.name.is_empty()
            || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(schema_err("name", "must be non-empty and use only [A-Za-z0-9_-]"));
        }

        match &self.experiment {
            Experiment::SingleSlit {
                slit_width_m,
                wavelength_m,
                screen_distance_m,
            } => {
                positive("experiment.slit_width_m", *slit_width_m)?;
                positive("experiment.wavelength_m", *wavelength_m)?;
                positive("experiment.screen_distance_m", *screen_distance_m)?;
                self.require_source()?;
                self.require_detection()?;
                self.only_analyses(&[AnalysisRequest::Fwhm, AnalysisRequest::Fit])?;
            }
            Experiment::TwoBeam {
                aperture_diameter_m,
                wavelength_m,
                focal_length_m,
                separations_rayleigh,
                imbalance,
                contrast_k,
            } => {
                positive("experiment.aperture_diameter_m", *aperture_diameter_m)?;
                positive("experiment.wavelength_m", *wavelength_m)?;
                positive("experiment.focal_length_m", *focal_length_m)?;
                if !(*imbalance > 0.0 && *imbalance <= 1.0) {
                    return Err(schema_err("experiment.imbalance", "must lie in (0, 1]"));
                }
                if separations_rayleigh.is_empty() {
                    return Err(schema_err("experiment.separations_rayleigh", "must not be empty"));
                }
                for s in separations_rayleigh {
                    positive("experiment.separations_rayleigh", *s)?;
                }
                let src = self.require_source()?;
                if !matches!(src, SourceStatistics::Coherent { .. } | SourceStatistics::Thermal { .. }) {
                    return Err(schema_err(
                        "source.family",
                        "two-beam scenarios need a coherent or thermal source",
                    ));
                }
                let k_max = self.require_detection()?.k_max;
                if let Some(k) = contrast_k.iter().find(|&&k| k > k_max) {
                    return Err(schema_err(
                        "experiment.contrast_k",
                        format!("k = {k} exceeds detection.k_max = {k_max}"),
                    ));
                }
                self.only_analyses(&[AnalysisRequest::Contrast, AnalysisRequest::Sweep, AnalysisRequest::Fit])?;
                let g = PinholeGeometry {
                    aperture_diameter: *aperture_diameter_m,
                    wavelength: *wavelength_m,
                    focal_length: *focal_length_m,
                };
                if let Ok(sparrow) = sparrow_limit(&BeamShape::airy(g)) {
                    let limit = sparrow.separation_rayleigh.unwrap_or(0.0);
                    for s in separations_rayleigh.iter().filter(|&&s| s < limit) {
                        warnings.push(Warning {
                            field: "experiment.separations_rayleigh".into(),
                            message: format!(
                                "separation {s} Rayleigh is below the Sparrow limit ({limit:.4}): \
                                 the summed profile is a flat top with no dip, contrast is 0"
                            ),
                        });
                    }
                }
            }
            Experiment::StatsCompare { waist_m, sources, k } => {
                positive("experiment.waist_m", *waist_m)?;
                if sources.is_empty() {
                    return Err(schema_err("experiment.sources", "must not be empty"));
                }
                for src in sources {
                    src.validate()
                        .map_err(|e| schema_err("experiment.sources", e.to_string()))?;
                }
                if self.source.is_some() {
                    warnings.push(Warning {
                        field: "source".into(),
                        message: "ignored for stats-compare; sources are listed in the experiment".into(),
                    });
                }
                if self.monte_carlo_requested() {
                    let k_max = self.require_detection()?.k_max;
                    if *k > k_max {
                        return Err(schema_err(
                            "experiment.k",
                            format!("k = {k} exceeds detection.k_max = {k_max}"),
                        ));
                    }
                }
                self.only_analyses(&[AnalysisRequest::Fwhm])?;
            }
        }

        if let Some(scan) = &self.scan {
            if let Some(positions) = &scan.positions_m {
                if positions.len() < 2
                    || positions.iter().any(|x| !x.is_finite())
                    || positions.windows(2).any(|w| !(w[1] > w[0]))
                {
                    return Err(schema_err(
                        "scan.positions_m",
                        "need at least 2 finite, strictly increasing positions",
                    ));
                }
                if scan.step_m.is_some() {
                    return Err(schema_err("scan.step_m", "give either positions_m or step_m, not both"));
                }
            }
            if let Some(step) = scan.step_m {
                positive("scan.step_m", step)?;
            }
            match (scan.pulses, scan.seed) {
                (Some(0), _) => return Err(schema_err("scan.pulses", "must be >= 1")),
                (Some(_), None) => {
                    return Err(schema_err("scan.seed", "`seed` is required when Monte Carlo (pulses) is requested"))
                }
                _ => {}
            }
        }
        if self.wants(AnalysisRequest::Fit) && !self.monte_carlo_requested() {
            warnings.push(Warning {
                field: "analyses".into(),
                message: "fit without Monte Carlo data is fitted to the noiseless analytic profile".into(),
            });
        }
        Ok(warnings)
    }

    fn require_source(&self) -> Result<&SourceStatistics, ScenarioError> {
        let src = self
            .source
            .as_ref()
            .ok_or_else(|| schema_err("source", "required for this experiment"))?;
        src.validate().map_err(|e| schema_err("source", e.to_string()))?;
        Ok(src)
    }

    fn require_detection(&self) -> Result<DetectionSpec, ScenarioError> {
        let d = self
            .detection
            .ok_or_else(|| schema_err("detection", "required for this experiment"))?;
        if d.k_max < 1 {
            return Err(schema_err("detection.k_max", "must be >= 1"));
        }
        Ok(d)
    }

    fn only_analyses(&self, allowed: &[AnalysisRequest]) -> Result<(), ScenarioError> {
        match self.analyses.iter().find(|a| !allowed.contains(a)) {
            Some(a) => Err(schema_err(
                "analyses",
                format!("{a:?} is not available for this experiment").to_lowercase(),
            )),
            None => Ok(()),
        }
    }

    pub fn slit_geometry(&self) -> Option<SlitGeometry> {
        match self.experiment {
            Experiment::SingleSlit {
                slit_width_m,
                wavelength_m,
                screen_distance_m,
            } => Some(SlitGeometry {
                slit_width: slit_width_m,
                wavelength: wavelength_m,
                screen_distance: screen_distance_m,
            }),
            _ => None,
        }
    }

    pub fn pinhole_geometry(&self) -> Option<PinholeGeometry> {
        match self.experiment {
            Experiment::TwoBeam {
                aperture_diameter_m,
                wavelength_m,
                focal_length_m,
                ..
            } => Some(PinholeGeometry {
                aperture_diameter: aperture_diameter_m,
                wavelength: wavelength_m,
                focal_length: focal_length_m,
            }),
            _ => None,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(schema_err(field, format!("must be finite and > 0, got {v}")))
    }
}

/// Contents of a bundled scenario looked up by file name or stem.
pub fn bundled(name: &str) -> Option<&'static str> {
    let file = Path::new(name).file_name()?.to_str()?;
    BUNDLED
        .iter()
        .find(|(f, _)| *f == file || f.trim_end_matches(".json") == file)
        .map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Scenario {
        Scenario::from_json(bundled("fig1_slit.json").unwrap(), "fig1").unwrap()
    }

    #[test]
    fn bundled_scenarios_validate_cleanly() {
        for (name, text) in BUNDLED {
            let s = Scenario::from_json(text, name).unwrap();
            let warnings = s.validate().unwrap();
            assert!(warnings.is_empty(), "{name}: {warnings:?}");
        }
    }

    #[test]
    fn missing_seed_names_the_field() {
        let mut s = fig1();
        s.scan.as_mut().unwrap().seed = None;
        match s.validate() {
            Err(ScenarioError::Schema { field, .. }) => assert_eq!(field, "scan.seed"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn below_sparrow_separation_warns() {
        let text = bundled("fig2_twobeam.json").unwrap();
        let mut s = Scenario::from_json(text, "fig2").unwrap();
        if let Experiment::TwoBeam { separations_rayleigh, .. } = &mut s.experiment {
            separations_rayleigh.push(0.5);
        }
        let w = s.validate().unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].message.contains("no dip"));
    }

    #[test]
    fn unknown_fields_are_parse_errors() {
        let text = fig1_text().replace("\"analyses\"", "\"analysis\"");
        assert!(matches!(Scenario::from_json(&text, "x"), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn wrong_schema_version() {
        let mut s = fig1();
        s.schema = "pnr-scope/scenario@0".into();
        assert!(matches!(s.validate(), Err(ScenarioError::Schema { field, .. }) if field == "schema"));
    }

    #[test]
    fn analyses_must_match_experiment() {
        let mut s = fig1();
        s.analyses.push(AnalysisRequest::Sweep);
        assert!(matches!(s.validate(), Err(ScenarioError::Schema { field, .. }) if field == "analyses"));
    }

    fn fig1_text() -> String {
        bundled("fig1_slit").unwrap().to_string()
    }
}
