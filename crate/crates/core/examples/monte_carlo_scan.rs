//! A seeded detector scan across the slit pattern, compared with the
//! analytic k = 9 profile.

use pnr_scope::photon_stats::{conditional_profile, DetectionModel, SourceStatistics};
use pnr_scope::profiles::{IrradianceProfile, SlitGeometry};
use pnr_scope::simulate::{per_k_profiles, reconstruct_classical, run_scan, ScanPlan};

fn main() -> pnr_scope::Result<()> {
    let profile = IrradianceProfile::slit(SlitGeometry::new(250e-6, 1550e-9, 0.23)?)?;
    let source = SourceStatistics::coherent(3.6)?;
    let xs: Vec<f64> = (-30..=30).map(|i| i as f64 * 50e-6).collect();
    let plan = ScanPlan::new(xs.clone(), 100_000, DetectionModel::number_resolving(9)?, 2010)?;
    let table = run_scan(&source, &profile, 3.6, &plan)?;

    let measured = per_k_profiles(&table);
    let expected = conditional_profile(&source, &profile, 9, &xs, 3.6)?;
    let means = reconstruct_classical(&table);
    println!("{:>8} {:>10} {:>10} {:>8}", "x_mm", "p9_mc", "p9_exact", "mean");
    for (i, x) in xs.iter().enumerate().step_by(3) {
        println!("{:>8.2} {:>10.6} {:>10.6} {:>8.4}", x * 1e3, measured[9][i], expected[i], means[i]);
    }
    let path = std::env::temp_dir().join("monte_carlo_scan_counts.csv");
    std::fs::write(&path, table.to_csv()).expect("write counts");
    println!("counts written to {}", path.display());
    Ok(())
}
