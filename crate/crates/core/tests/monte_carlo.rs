use statrs::distribution::{ChiSquared, ContinuousCDF};

use pnr_scope::photon_stats::{beamsplitter_transform, conditional_profile, DetectionModel, SourceStatistics};
use pnr_scope::profiles::{IrradianceProfile, SlitGeometry};
use pnr_scope::simulate::{
    per_k_profiles, reconstruct_classical, reconstruct_spd, run_scan, run_scan_with_threads, CountRow, CountTable,
    ScanPlan,
};

fn slit_profile() -> IrradianceProfile {
    IrradianceProfile::slit(SlitGeometry::new(250e-6, 1550e-9, 0.23).unwrap()).unwrap()
}

/// Gaussian of unit waist with positions chosen so that `T²(x_i) = t2[i]`.
fn gaussian_at(t2: &[f64]) -> (IrradianceProfile, Vec<f64>) {
    let profile = IrradianceProfile::gaussian(1.0).unwrap();
    let mut xs: Vec<f64> = t2.iter().map(|&t| (-t.ln() / 2.0).sqrt()).collect();
    xs.sort_by(f64::total_cmp);
    (profile, xs)
}

/// 50 µm scan across ±3 first nulls of the slit, centered on the axis.
fn slit_positions() -> Vec<f64> {
    (-85..=85).map(|i| i as f64 * 50e-6).collect()
}

/// Standard error of a rate estimated from `n` pulses, with a one-count
/// variance floor so that rare bins with an expected count far below one do
/// not turn a single event into a many-sigma outlier.
fn standard_error(p: f64, n: u64) -> f64 {
    let n = n as f64;
    (p.max(1.0 / n) * (1.0 - p).max(0.0) / n).sqrt().max(1.0 / n)
}

/// Chi-square p-value of observed counts against expected probabilities,
/// pooling bins with fewer than 5 expected counts into their neighbours.
fn chi_square_p_value(observed: &[u64], expected: &[f64], total: u64) -> f64 {
    let mut obs_bins = Vec::new();
    let mut exp_bins = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &p) in observed.iter().zip(expected) {
        o += ob as f64;
        e += p * total as f64;
        if e >= 5.0 {
            obs_bins.push(o);
            exp_bins.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        let last = exp_bins.len() - 1;
        obs_bins[last] += o;
        exp_bins[last] += e;
    }
    let stat: f64 = obs_bins.iter().zip(&exp_bins).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (obs_bins.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Observed counts plus overflow, and the matching expected probabilities.
fn histogram_with_overflow(row: &CountRow, src: &SourceStatistics, t2: f64) -> (Vec<u64>, Vec<f64>) {
    let mut observed = row.counts.clone();
    observed.push(row.overflow);
    let mut expected: Vec<f64> = (0..row.counts.len() as u32)
        .map(|k| beamsplitter_transform(src, t2, k).unwrap())
        .collect();
    expected.push(1.0 - expected.iter().sum::<f64>());
    (observed, expected)
}

#[test]
fn lossless_fock_counts_land_in_one_bin() {
    let (profile, xs) = gaussian_at(&[1.0, 0.999_999]);
    let plan = ScanPlan::new(xs, 1000, DetectionModel::number_resolving(9).unwrap(), 1).unwrap();
    let table = run_scan(&SourceStatistics::fock(5), &profile, 5.0, &plan).unwrap();
    let row = &table.rows[0];
    assert_eq!(row.counts[5], 1000);
    assert_eq!(row.counts.iter().sum::<u64>(), 1000);
}

#[test]
fn coherent_peak_histogram_is_poisson() {
    let profile = slit_profile();
    let plan = ScanPlan::new(vec![0.0, 1e-9], 1_000_000, DetectionModel::number_resolving(9).unwrap(), 7).unwrap();
    let src = SourceStatistics::coherent(3.6).unwrap();
    let table = run_scan(&src, &profile, 3.6, &plan).unwrap();
    let row = &table.rows[0];
    for k in 0..=9u32 {
        let p = beamsplitter_transform(&src, 1.0, k).unwrap();
        let observed = row.counts[k as usize] as f64 / row.total as f64;
        let se = standard_error(p, row.total);
        assert!((observed - p).abs() < 5.0 * se, "k = {k}: {observed} vs {p} (se {se:e})");
    }
}

#[test]
fn thermal_fock_and_tabulated_samplers_match_their_pmfs() {
    let t2 = [0.3, 0.75];
    let (profile, xs) = gaussian_at(&t2);
    let sources = [
        (SourceStatistics::thermal(4.0).unwrap(), 4.0),
        (SourceStatistics::fock(10), 10.0),
        (SourceStatistics::tabulated(vec![0.1, 0.0, 0.5, 0.1, 0.3]).unwrap(), 2.5),
        // thinned by η = 0.5 before the profile
        (SourceStatistics::fock(12), 6.0),
    ];
    for (i, (src, peak)) in sources.iter().enumerate() {
        let plan = ScanPlan::new(xs.clone(), 200_000, DetectionModel::number_resolving(12).unwrap(), 100 + i as u64)
            .unwrap();
        let table = run_scan(src, &profile, *peak, &plan).unwrap();
        let (scaled, eta) = src.scaled_to_peak_mean(*peak).unwrap();
        for row in &table.rows {
            let t = eta * profile.transmission(row.x);
            let (observed, expected) = histogram_with_overflow(row, &scaled, t);
            let p = chi_square_p_value(&observed, &expected, row.total);
            assert!(p > 1e-3, "{src:?} at T² = {t}: chi-square p = {p:e}");
        }
    }
}

#[test]
fn chi_square_at_slit_peak() {
    let profile = slit_profile();
    let src = SourceStatistics::coherent(3.6).unwrap();
    let plan = ScanPlan::new(slit_positions(), 100_000, DetectionModel::number_resolving(9).unwrap(), 20101).unwrap();
    let table = run_scan(&src, &profile, 3.6, &plan).unwrap();
    let peak = table.rows.iter().find(|r| r.x == 0.0).unwrap();
    let (observed, expected) = histogram_with_overflow(peak, &src, 1.0);
    let p = chi_square_p_value(&observed, &expected, peak.total);
    assert!(p > 1e-3, "p = {p}");
}

#[test]
fn slit_scan_matches_analytic_profiles() {
    let profile = slit_profile();
    let g = SlitGeometry::new(250e-6, 1550e-9, 0.23).unwrap();
    let src = SourceStatistics::coherent(3.6).unwrap();
    let xs = slit_positions();
    let pulses = 100_000;
    let plan = ScanPlan::new(xs.clone(), pulses, DetectionModel::number_resolving(9).unwrap(), 20101).unwrap();
    let table = run_scan(&src, &profile, 3.6, &plan).unwrap();

    let rates = per_k_profiles(&table);
    for k in 0..=9u32 {
        let expected = conditional_profile(&src, &profile, k, &xs, 3.6).unwrap();
        for (i, (&o, &e)) in rates[k as usize].iter().zip(&expected).enumerate() {
            let se = standard_error(e, pulses);
            assert!((o - e).abs() < 5.0 * se, "k = {k}, x = {}: {o} vs {e}", xs[i]);
        }
    }

    // classical reconstruction: within 2% wherever T² ≥ 0.1 in the central lobe
    let classical = reconstruct_classical(&table);
    let mut worst = 0.0f64;
    for (&x, &m) in xs.iter().zip(&classical) {
        let t2 = profile.transmission(x);
        if x.abs() < g.first_null() && t2 >= 0.1 {
            worst = worst.max((m / (3.6 * t2) - 1.0).abs());
        }
    }
    assert!(worst < 0.02, "max relative deviation {worst}");

    let spd = reconstruct_spd(&table);
    for (&x, &c) in xs.iter().zip(&spd) {
        let e = 1.0 - (-3.6 * profile.transmission(x)).exp();
        assert!((c - e).abs() < 5.0 * standard_error(e, pulses), "x = {x}: {c} vs {e}");
    }
}

#[test]
fn counts_partition_the_pulses() {
    let profile = slit_profile();
    let src = SourceStatistics::thermal(6.0).unwrap();
    let plan = ScanPlan::new(slit_positions(), 5_000, DetectionModel::number_resolving(3).unwrap(), 3).unwrap();
    let table = run_scan(&src, &profile, 6.0, &plan).unwrap();
    table.validate().unwrap();
    assert!(table.rows.iter().any(|r| r.overflow > 0));
    for row in &table.rows {
        assert_eq!(row.counts.iter().sum::<u64>() + row.overflow, row.total);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let profile = slit_profile();
    let src = SourceStatistics::coherent(3.6).unwrap();
    let plan = ScanPlan::new(slit_positions(), 20_000, DetectionModel::number_resolving(9).unwrap(), 42).unwrap();
    let one = run_scan_with_threads(&src, &profile, 3.6, &plan, 1).unwrap();
    let many = run_scan_with_threads(&src, &profile, 3.6, &plan, 7).unwrap();
    assert_eq!(one, many);
    assert_eq!(one.to_csv(), many.to_csv());

    let again = run_scan(&src, &profile, 3.6, &plan).unwrap();
    assert_eq!(one, again);

    let mut other = plan.clone();
    other.seed = 43;
    assert_ne!(one, run_scan(&src, &profile, 3.6, &other).unwrap());
}

#[test]
fn csv_round_trip() {
    let profile = slit_profile();
    let src = SourceStatistics::coherent(3.6).unwrap();
    let plan = ScanPlan::new(slit_positions(), 100, DetectionModel::number_resolving(9).unwrap(), 5).unwrap();
    let table = run_scan(&src, &profile, 3.6, &plan).unwrap();
    let text = table.to_csv();
    assert!(text.starts_with("x_m,k0,k1,k2,k3,k4,k5,k6,k7,k8,k9,overflow,total\n"));
    assert_eq!(CountTable::from_csv(&text).unwrap(), table);
}

#[test]
fn classical_reconstruction_arithmetic() {
    let mut counts = vec![0; 10];
    counts[0] = 50;
    counts[2] = 50;
    let table = CountTable {
        k_max: 9,
        rows: vec![CountRow {
            x: 0.0,
            counts,
            overflow: 0,
            total: 100,
        }],
    };
    assert_eq!(reconstruct_classical(&table), vec![1.0]);
    assert_eq!(reconstruct_spd(&table), vec![0.5]);
}
