//! The `pnr-scope` command line: `run`, `validate` and `list-scenarios`.
//!
//! [`render`] turns a scenario into output file contents without touching
//! the file system; [`run_scenario`] writes them. Both are deterministic for
//! a fixed scenario (and seed), independent of the worker count.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{
    central_lobe, contrast, contrast_sampled, contrast_sweep_imbalanced, fit_profile, fwhm, fwhm_sampled,
    sparrow_limit, ContrastReport, FitResult, FitSpec, FitParameters, FwhmResult, ProfileModel,
};
use crate::photon_stats::{DetectionModel, Observable, ObservableCurve, SourceStatistics};
use crate::profiles::{BeamShape, IrradianceProfile, PinholeGeometry, SlitGeometry};
use crate::scenario::{bundled, AnalysisRequest, Experiment, Scenario, ScenarioError, Warning, BUNDLED};
use crate::simulate::{per_k_profiles, reconstruct_classical, reconstruct_spd, run_scan, CountTable, ScanPlan, ScanRecord};
use crate::Error;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PNR_SCOPE_THREADS";

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const SCHEMA: i32 = 4;
    pub const NUMERICAL: i32 = 5;
    pub const IO: i32 = 6;
}

#[derive(Debug, Parser)]
#[command(name = "pnr-scope", version, about = "Photon-number-resolved beam profiling scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file (or a bundled scenario by name) and write its outputs.
    Run {
        scenario: PathBuf,
        /// Output directory (default: the scenario's `outputs.dir`, else `.`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the Monte Carlo seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a scenario without running it.
    Validate { scenario: PathBuf },
    /// List the scenarios bundled with the tool.
    ListScenarios,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Scenario(ScenarioError::Parse { .. }) => exit::PARSE,
            CliError::Scenario(ScenarioError::Schema { .. }) => exit::SCHEMA,
            CliError::Model(Error::Config { .. } | Error::Domain(_)) => exit::SCHEMA,
            CliError::Model(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

/// Output of [`render`]: file names with their contents, plus the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub files: Vec<(String, String)>,
    pub summary: String,
    pub warnings: Vec<Warning>,
}

/// Reads a scenario from `path`, or a bundled scenario of that name.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let name = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(Scenario::from_json(&text, &name)?),
        Err(e) => match bundled(&name) {
            Some(text) => Ok(Scenario::from_json(text, &name)?),
            None => Err(CliError::io(path, e)),
        },
    }
}

/// Renders `scenario` and writes its files into `out_dir`.
///
/// `threads` sizes a dedicated worker pool; `None` uses the global one.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path, threads: Option<usize>) -> Result<(Rendered, Vec<PathBuf>), CliError> {
    let rendered = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}")))?
            .install(|| render(scenario))?,
        None => render(scenario)?,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut written = Vec::new();
    for (name, contents) in &rendered.files {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok((rendered, written))
}

/// Validates and evaluates a scenario, returning file contents.
pub fn render(scenario: &Scenario) -> Result<Rendered, CliError> {
    let warnings = scenario.validate()?;
    let mut out = Output::new(scenario);
    match &scenario.experiment {
        Experiment::SingleSlit { .. } => single_slit(scenario, &mut out)?,
        Experiment::TwoBeam { .. } => two_beam(scenario, &mut out)?,
        Experiment::StatsCompare { .. } => stats_compare(scenario, &mut out)?,
    }
    Ok(out.finish(scenario, warnings))
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        _ => Ok(None),
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let console = |e: std::io::Error| CliError::Io {
        path: "<stdout>".into(),
        message: e.to_string(),
    };
    match cli.command {
        Command::ListScenarios => {
            for (file, text) in BUNDLED {
                let s = Scenario::from_json(text, file)?;
                writeln!(stdout, "{file:<20} {}", s.description.unwrap_or_default()).map_err(console)?;
            }
        }
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            let warnings = s.validate()?;
            for w in &warnings {
                writeln!(stderr, "warning: `{}`: {}", w.field, w.message).map_err(console)?;
            }
            writeln!(stdout, "{}: ok ({} warning(s))", s.name, warnings.len()).map_err(console)?;
        }
        Command::Run { scenario, out_dir, seed } => {
            let threads = threads_from_env()?;
            let mut s = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                s.scan.get_or_insert_with(Default::default).seed = Some(seed);
            }
            let dir = out_dir
                .or_else(|| s.outputs.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let (rendered, written) = run_scenario(&s, &dir, threads)?;
            for w in &rendered.warnings {
                writeln!(stderr, "warning: `{}`: {}", w.field, w.message).map_err(console)?;
            }
            write!(stdout, "{}", rendered.summary).map_err(console)?;
            writeln!(stdout, "wrote:").map_err(console)?;
            for p in written {
                writeln!(stdout, "  {}", p.display()).map_err(console)?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Output assembly

struct Output {
    name: String,
    profiles: Vec<[String; 4]>,
    files: Vec<(String, String)>,
    results: serde_json::Map<String, Value>,
    summary: String,
}

impl Output {
    fn new(scenario: &Scenario) -> Self {
        let mut summary = String::new();
        let _ = writeln!(summary, "pnr-scope: {}", scenario.name);
        if let Some(d) = &scenario.description {
            let _ = writeln!(summary, "  {d}");
        }
        Self {
            name: scenario.name.clone(),
            profiles: Vec::new(),
            files: Vec::new(),
            results: serde_json::Map::new(),
            summary,
        }
    }

    fn series(&mut self, panel: &str, series: &str, xs: &[f64], ys: &[f64]) {
        for (x, y) in xs.iter().zip(ys) {
            self.profiles
                .push([panel.to_string(), num(*x), series.to_string(), num(*y)]);
        }
    }

    fn file(&mut self, suffix: &str, contents: String) {
        self.files.push((format!("{}_{suffix}", self.name), contents));
    }

    fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }

    fn finish(mut self, scenario: &Scenario, warnings: Vec<Warning>) -> Rendered {
        let profiles = csv_text(
            &["panel", "x_m", "series", "value"],
            self.profiles.iter().map(|r| r.to_vec()),
        );
        self.files.insert(0, (format!("{}_profiles.csv", self.name), profiles));
        let meta = json!({
            "tool": "pnr-scope",
            "version": env!("CARGO_PKG_VERSION"),
            "scenario": scenario,
            "warnings": warnings,
            "results": Value::Object(std::mem::take(&mut self.results)),
        });
        let mut meta = serde_json::to_string_pretty(&meta).expect("meta is serializable");
        meta.push('\n');
        self.file("meta.json", meta);
        Rendered {
            files: self.files,
            summary: self.summary,
            warnings,
        }
    }
}

/// Shortest round-trip decimal; empty for non-finite values.
fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

fn csv_text<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Symmetric positions around the profile center: explicit scan positions,
/// the scan step, or a default grid of about 401 points over the domain.
fn scan_positions(scenario: &Scenario, profile: &IrradianceProfile) -> Vec<f64> {
    let scan = scenario.scan.clone().unwrap_or_default();
    if let Some(p) = scan.positions_m {
        return p;
    }
    let (lo, hi) = profile.domain();
    let c = profile.center();
    let step = scan
        .step_m
        .unwrap_or((hi - lo) / (crate::scenario::DEFAULT_GRID_POINTS - 1) as f64);
    let n = ((hi - c).min(c - lo) / step + 1e-9).floor() as i64;
    (-n..=n).map(|i| c + i as f64 * step).collect()
}

fn monte_carlo(
    scenario: &Scenario,
    src: &SourceStatistics,
    profile: &IrradianceProfile,
    peak_mean: f64,
    xs: &[f64],
) -> Result<Option<(ScanPlan, CountTable)>, CliError> {
    let Some(scan) = scenario.scan.as_ref().filter(|s| s.pulses.is_some()) else {
        return Ok(None);
    };
    let k_max = scenario.detection.map(|d| d.k_max).unwrap_or(1);
    let plan = ScanPlan::new(
        xs.to_vec(),
        scan.pulses.unwrap_or(1),
        DetectionModel::number_resolving(k_max)?,
        scan.seed.unwrap_or(0),
    )?;
    let table = run_scan(src, profile, peak_mean, &plan)?;
    Ok(Some((plan, table)))
}

fn write_counts(
    out: &mut Output,
    tag: &str,
    src: &SourceStatistics,
    profile: &IrradianceProfile,
    peak_mean: f64,
    plan: &ScanPlan,
    table: &CountTable,
) {
    let record = ScanRecord {
        source: src,
        profile,
        peak_mean,
        plan,
        table,
    };
    let mut json = record.to_json();
    json.push('\n');
    out.file(&format!("{tag}counts.csv"), table.to_csv());
    out.file(&format!("{tag}counts.json"), json);
}

fn fwhm_json(r: &Result<FwhmResult, Error>) -> Value {
    match r {
        Ok(r) => json!(r),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn fit_json(r: &FitResult) -> Value {
    json!(r)
}

// ---------------------------------------------------------------------------
// Single slit

fn single_slit(scenario: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let g: SlitGeometry = scenario.slit_geometry().expect("single-slit experiment");
    let src = scenario.source.clone().expect("validated");
    let k_max = scenario.detection.expect("validated").k_max;
    let peak_mean = src.mean();
    let profile = IrradianceProfile::slit(g)?;
    let xs = scan_positions(scenario, &profile);
    let curve = ObservableCurve::new(&src, peak_mean)?;
    let lobe = central_lobe(&profile);

    out.line(format!(
        "  slit d = {} m, lambda = {} m, z = {} m; {} source, peak mean {peak_mean}; k_max = {k_max}",
        g.slit_width,
        g.wavelength,
        g.screen_distance,
        src.family_name()
    ));
    out.result(
        "geometry",
        json!({ "first_null_m": g.first_null(), "null_spacing_m": g.null_spacing() }),
    );

    let eval = |o: Observable| -> Vec<f64> { xs.iter().map(|&x| curve.at_transmission(o, profile.transmission(x))).collect() };
    out.series("analytic", "classical_mean", &xs, &eval(Observable::ClassicalMean));
    out.series("analytic", "spd_click", &xs, &eval(Observable::SpdClick));
    for k in 0..=k_max {
        out.series("analytic", &format!("p_k{k}"), &xs, &eval(Observable::PhotonNumber(k)));
    }

    if scenario.wants(AnalysisRequest::Fwhm) {
        let width = |o: Observable| fwhm(|x| curve.at_transmission(o, profile.transmission(x)), lobe);
        let classical = width(Observable::ClassicalMean)?;
        let spd = width(Observable::SpdClick)?;
        let per_k: Vec<(u32, Result<FwhmResult, Error>)> =
            (1..=k_max).map(|k| (k, width(Observable::PhotonNumber(k)))).collect();
        let u_width = |r: &FwhmResult| g.u(r.right) - g.u(r.left);

        out.file("fwhm.csv", fwhm_table(&classical, &spd, &per_k));
        out.line("  FWHM (analytic, central lobe):");
        out.line(format!("    {:>9} {:>12} {:>10} {:>10}", "k", "fwhm_mm", "vs_class", "vs_spd"));
        out.line(format!("    {:>9} {:>12.5} {:>10} {:>10}", "classical", classical.fwhm * 1e3, "", ""));
        out.line(format!("    {:>9} {:>12.5} {:>10} {:>10}", "spd", spd.fwhm * 1e3, "", ""));
        for (k, r) in &per_k {
            match r {
                Ok(r) => out.line(format!(
                    "    {:>9} {:>12.5} {:>10.4} {:>10.4}{}",
                    k,
                    r.fwhm * 1e3,
                    classical.fwhm / r.fwhm,
                    spd.fwhm / r.fwhm,
                    if r.multimodal { "  (two-peaked)" } else { "" }
                )),
                Err(e) => out.line(format!("    {k:>9} {e}")),
            }
        }
        out.result(
            "fwhm",
            json!({
                "domain_m": [lobe.0, lobe.1],
                "classical": classical,
                "classical_u": u_width(&classical),
                "spd": spd,
                "spd_u": u_width(&spd),
                "photon_numbers": per_k.iter().map(|(k, r)| json!({
                    "k": k,
                    "result": fwhm_json(r),
                    "fwhm_u": r.as_ref().ok().map(u_width),
                })).collect::<Vec<_>>(),
            }),
        );
    }

    let mc = monte_carlo(scenario, &src, &profile, peak_mean, &xs)?;
    if let Some((plan, table)) = &mc {
        write_counts(out, "", &src, &profile, peak_mean, plan, table);
        let classical = reconstruct_classical(table);
        let spd = reconstruct_spd(table);
        let per_k = per_k_profiles(table);
        out.series("monte-carlo", "classical_mean", &xs, &classical);
        out.series("monte-carlo", "spd_click", &xs, &spd);
        for (k, ys) in per_k.iter().enumerate() {
            out.series("monte-carlo", &format!("p_k{k}"), &xs, ys);
        }
        if scenario.wants(AnalysisRequest::Fwhm) {
            let inside: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] >= lobe.0 && xs[i] <= lobe.1).collect();
            let pick = |ys: &[f64]| -> (Vec<f64>, Vec<f64>) { inside.iter().map(|&i| (xs[i], ys[i])).unzip() };
            let sampled = |ys: &[f64]| {
                let (a, b) = pick(ys);
                fwhm_sampled(&a, &b)
            };
            let c = sampled(&classical)?;
            let s = sampled(&spd)?;
            let rows: Vec<(u32, Result<FwhmResult, Error>)> =
                (1..=k_max).map(|k| (k, sampled(&per_k[k as usize]))).collect();
            out.file("fwhm_mc.csv", fwhm_table(&c, &s, &rows));
            if let Some((_, Ok(top))) = rows.last() {
                out.line(format!(
                    "  Monte Carlo ({} pulses/position): k = {k_max} compression {:.3} vs classical, {:.3} vs SPD",
                    plan.pulses_per_position,
                    c.fwhm / top.fwhm,
                    s.fwhm / top.fwhm
                ));
            }
        }
    }

    if scenario.wants(AnalysisRequest::Fit) {
        let (data, label) = match &mc {
            Some((_, table)) => (reconstruct_classical(table), "monte-carlo"),
            None => (eval(Observable::ClassicalMean), "analytic"),
        };
        let amplitude = data.iter().cloned().fold(0.0, f64::max);
        let spec = FitSpec::new(
            ProfileModel::Slit { geometry: g },
            Observable::ClassicalMean,
            FitParameters::slit(amplitude, 1.0, 0.0),
        );
        let fit = fit_profile(&xs, &data, &spec)?;
        out.line(format!(
            "  fit ({label} classical means): peak mean {:.4}, width scale {:.5}, center {:.3e} m, converged {}",
            fit.parameters.amplitude, fit.parameters.scale, fit.parameters.center, fit.converged
        ));
        out.result("fit", json!({ "data": label, "model": "slit", "result": fit_json(&fit) }));
    }
    Ok(())
}

fn fwhm_table(classical: &FwhmResult, spd: &FwhmResult, per_k: &[(u32, Result<FwhmResult, Error>)]) -> String {
    let mut rows = vec![
        vec!["classical".into(), num(classical.fwhm), num(1.0), num(spd.fwhm / classical.fwhm)],
        vec!["spd".into(), num(spd.fwhm), num(classical.fwhm / spd.fwhm), num(1.0)],
    ];
    for (k, r) in per_k {
        rows.push(match r {
            Ok(r) => vec![k.to_string(), num(r.fwhm), num(classical.fwhm / r.fwhm), num(spd.fwhm / r.fwhm)],
            Err(_) => vec![k.to_string(), String::new(), String::new(), String::new()],
        });
    }
    csv_text(&["k", "fwhm_m", "compression_vs_classical", "compression_vs_spd"], rows)
}

// ---------------------------------------------------------------------------
// Two beams

fn two_beam(scenario: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let Experiment::TwoBeam {
        separations_rayleigh,
        imbalance,
        contrast_k,
        ..
    } = &scenario.experiment
    else {
        unreachable!("two-beam experiment")
    };
    let g: PinholeGeometry = scenario.pinhole_geometry().expect("two-beam experiment");
    let src = scenario.source.clone().expect("validated");
    let beam_mean = src.mean();
    let rayleigh = g.rayleigh_separation();
    let sparrow = sparrow_limit(&BeamShape::airy(g))?;

    out.line(format!(
        "  Airy beams D = {} m, f = {} m, lambda = {} m; Rayleigh separation {:.6e} m; Sparrow limit {:.4} Rayleigh",
        g.aperture_diameter,
        g.focal_length,
        g.wavelength,
        rayleigh,
        sparrow.separation_rayleigh.unwrap_or(f64::NAN)
    ));
    out.line(format!(
        "  {} source, per-beam mean {beam_mean}, imbalance {imbalance}",
        src.family_name()
    ));

    let mut conventions = Vec::new();
    let mut mc_rows = Vec::new();
    let mut fits = Vec::new();
    let analytic_contrast = scenario.wants(AnalysisRequest::Contrast) || scenario.wants(AnalysisRequest::Sweep);

    for (index, &sr) in separations_rayleigh.iter().enumerate() {
        let profile = IrradianceProfile::two_beam(BeamShape::airy(g), sr * rayleigh, *imbalance)?;
        let peak_mean = profile.peak_mean_for_beam(beam_mean);
        conventions.push(json!({
            "separation_rayleigh": sr,
            "separation_m": sr * rayleigh,
            "normalization": profile.normalization(),
            "beam_mean": beam_mean,
            "peak_mean": peak_mean,
        }));
        let xs = scan_positions(scenario, &profile);
        let curve = ObservableCurve::new(&src, peak_mean)?;
        let eval = |o: Observable| -> Vec<f64> { xs.iter().map(|&x| curve.at_transmission(o, profile.transmission(x))).collect() };
        let panel = format!("s_rayleigh={sr}");
        let classical = eval(Observable::ClassicalMean);
        out.series(&panel, "classical_mean", &xs, &classical);
        out.series(&panel, "spd_click", &xs, &eval(Observable::SpdClick));
        for &k in contrast_k {
            out.series(&panel, &format!("p_k{k}"), &xs, &eval(Observable::PhotonNumber(k)));
        }

        let mc = monte_carlo(scenario, &src, &profile, peak_mean, &xs)?;
        if let Some((plan, table)) = &mc {
            write_counts(out, &format!("s{index}_"), &src, &profile, peak_mean, plan, table);
            let mc_classical = reconstruct_classical(table);
            let mc_spd = reconstruct_spd(table);
            let per_k = per_k_profiles(table);
            let mc_panel = format!("monte-carlo s_rayleigh={sr}");
            out.series(&mc_panel, "classical_mean", &xs, &mc_classical);
            out.series(&mc_panel, "spd_click", &xs, &mc_spd);
            for &k in contrast_k {
                out.series(&mc_panel, &format!("p_k{k}"), &xs, &per_k[k as usize]);
            }
            if analytic_contrast {
                let at = |ys: &[f64], o: Observable| -> Result<ContrastReport, Error> {
                    let reference = contrast(|x| curve.at_transmission(o, profile.transmission(x)), &profile)?;
                    contrast_sampled(&xs, ys, &profile, reference.peak_position, reference.saddle_position)
                };
                let mut row = vec![
                    num(sr),
                    num(at(&mc_classical, Observable::ClassicalMean)?.contrast),
                    num(at(&mc_spd, Observable::SpdClick)?.contrast),
                ];
                for &k in contrast_k {
                    row.push(num(at(&per_k[k as usize], Observable::PhotonNumber(k))?.contrast));
                }
                mc_rows.push(row);
            }
        }

        if scenario.wants(AnalysisRequest::Fit) {
            let (data, label) = match &mc {
                Some((_, table)) => (reconstruct_classical(table), "monte-carlo"),
                None => (classical.clone(), "analytic"),
            };
            let spec = FitSpec::new(
                ProfileModel::TwoBeam { base: BeamShape::airy(g) },
                Observable::ClassicalMean,
                FitParameters::two_beam(beam_mean, sr * rayleigh, *imbalance, 0.0, 1.0),
            );
            let fit = fit_profile(&xs, &data, &spec)?;
            out.line(format!(
                "  fit s = {sr} Rayleigh ({label}): separation {:.4} Rayleigh, imbalance {:.4}, beam mean {:.4}",
                fit.parameters.separation / rayleigh,
                fit.parameters.imbalance,
                fit.parameters.amplitude
            ));
            fits.push(json!({ "separation_rayleigh": sr, "data": label, "result": fit_json(&fit) }));
        }
    }

    let header: Vec<String> = ["s_rayleigh", "C_classical", "C_spd"]
        .iter()
        .map(|s| s.to_string())
        .chain(contrast_k.iter().map(|k| format!("C_k{k}")))
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    if analytic_contrast {
        let sweep = contrast_sweep_imbalanced(&src, &g, beam_mean, contrast_k, separations_rayleigh, *imbalance)?;
        let rows = sweep.iter().map(|r| {
            let mut row = vec![num(r.separation_rayleigh), num(r.classical.contrast), num(r.spd.contrast)];
            row.extend(r.photon_numbers.iter().map(|(_, c)| num(c.contrast)));
            row
        });
        out.file("contrast.csv", csv_text(&header_refs, rows));

        out.line("  contrast (analytic):");
        let mut head = format!("    {:>6} {:>8} {:>8}", "s/R", "class", "spd");
        for k in contrast_k {
            let _ = write!(head, " {:>7}", format!("k={k}"));
        }
        out.line(head);
        for r in &sweep {
            let mut line = format!(
                "    {:>6} {:>8.4} {:>8.4}",
                r.separation_rayleigh, r.classical.contrast, r.spd.contrast
            );
            for (_, c) in &r.photon_numbers {
                let _ = write!(line, " {:>7.4}", c.contrast);
            }
            out.line(line);
        }
        out.result("contrast", json!(sweep));
        if !mc_rows.is_empty() {
            out.file("contrast_mc.csv", csv_text(&header_refs, mc_rows));
        }
    }

    out.result(
        "geometry",
        json!({
            "rayleigh_separation_m": rayleigh,
            "sparrow_limit_m": sparrow.separation_m,
            "sparrow_limit_rayleigh": sparrow.separation_rayleigh,
        }),
    );
    out.result(
        "normalization",
        json!({
            "convention": "T^2 is the two-beam sum divided by its global maximum; each beam alone peaks at beam_mean, the summed profile peaks at peak_mean = beam_mean * normalization",
            "separations": conventions,
        }),
    );
    if !fits.is_empty() {
        out.result("fit", Value::Array(fits));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Photon statistics comparison

fn stats_compare(scenario: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let Experiment::StatsCompare { waist_m, k, sources } = &scenario.experiment else {
        unreachable!("stats-compare experiment")
    };
    let (w, k) = (*waist_m, *k);
    let profile = IrradianceProfile::gaussian(w)?;
    let xs = scan_positions(scenario, &profile);
    let domain = profile.domain();
    let labels = source_labels(sources);

    out.line(format!("  Gaussian waist {w} m, k = {k}"));
    let classical: Vec<f64> = xs.iter().map(|&x| profile.transmission(x)).collect();
    out.series("analytic", "classical", &xs, &classical);
    let classical_fwhm = fwhm(|x| profile.transmission(x), domain)?;

    let mut rows = vec![vec![
        "classical".to_string(),
        String::new(),
        num(classical_fwhm.fwhm),
        num(classical_fwhm.fwhm / w),
        num(1.0),
    ]];
    let mut results = vec![json!({ "series": "classical", "fwhm": classical_fwhm })];
    out.line(format!("    {:<12} {:>12} {:>10} {:>10}", "series", "fwhm/w", "vs_class", "mean"));
    out.line(format!("    {:<12} {:>12.6} {:>10.4} {:>10}", "classical", classical_fwhm.fwhm / w, 1.0, ""));

    for (src, label) in sources.iter().zip(&labels) {
        let mean = src.mean();
        let curve = ObservableCurve::new(src, mean)?;
        let obs = Observable::PhotonNumber(k);
        let ys: Vec<f64> = xs.iter().map(|&x| curve.at_transmission(obs, profile.transmission(x))).collect();
        let series = format!("{label}_k{k}");
        out.series("analytic", &series, &xs, &ys);
        let r = fwhm(|x| curve.at_transmission(obs, profile.transmission(x)), domain);
        match &r {
            Ok(r) => {
                rows.push(vec![
                    label.clone(),
                    k.to_string(),
                    num(r.fwhm),
                    num(r.fwhm / w),
                    num(classical_fwhm.fwhm / r.fwhm),
                ]);
                out.line(format!(
                    "    {:<12} {:>12.6} {:>10.4} {:>10}",
                    label,
                    r.fwhm / w,
                    classical_fwhm.fwhm / r.fwhm,
                    mean
                ));
            }
            Err(e) => {
                rows.push(vec![label.clone(), k.to_string(), String::new(), String::new(), String::new()]);
                out.line(format!("    {label:<12} {e}"));
            }
        }
        results.push(json!({ "series": series, "mean": mean, "fwhm": fwhm_json(&r) }));

        if let Some((plan, table)) = monte_carlo(scenario, src, &profile, mean, &xs)? {
            write_counts(out, &format!("{label}_"), src, &profile, mean, &plan, &table);
            let per_k = per_k_profiles(&table);
            out.series("monte-carlo", &series, &xs, &per_k[k as usize]);
        }
    }

    if scenario.wants(AnalysisRequest::Fwhm) {
        out.file(
            "fwhm.csv",
            csv_text(&["series", "k", "fwhm_m", "fwhm_over_waist", "compression_vs_classical"], rows),
        );
        out.result("fwhm", Value::Array(results));
    }
    Ok(())
}

/// Family names, suffixed with an index where a family repeats.
fn source_labels(sources: &[SourceStatistics]) -> Vec<String> {
    sources
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let name = s.family_name();
            if sources.iter().filter(|o| o.family_name() == name).count() > 1 {
                format!("{name}{i}")
            } else {
                name.to_string()
            }
        })
        .collect()
}
