//! Contrast between two equal Airy spots as their separation shrinks.

use pnr_scope::analysis::contrast_sweep;
use pnr_scope::photon_stats::SourceStatistics;
use pnr_scope::profiles::PinholeGeometry;

fn main() -> pnr_scope::Result<()> {
    let geometry = PinholeGeometry::new(75e-6, 1550e-9, 0.1)?;
    let source = SourceStatistics::coherent(5.3)?;
    let ks = [4, 8, 12];
    let separations = [0.8, 0.85, 0.9, 0.95, 1.0, 1.1, 1.2, 1.3];
    let rows = contrast_sweep(&source, &geometry, 5.3, &ks, &separations)?;

    println!("Rayleigh separation {:.4} mm", geometry.rayleigh_separation() * 1e3);
    println!("{:>5} {:>9} {:>9} {:>9} {:>9} {:>9}", "s/R", "classical", "spd", "k=4", "k=8", "k=12");
    for row in rows {
        print!("{:>5} {:>9.4} {:>9.4}", row.separation_rayleigh, row.classical.contrast, row.spd.contrast);
        for (_, c) in &row.photon_numbers {
            print!(" {:>9.4}", c.contrast);
        }
        println!();
    }
    Ok(())
}
