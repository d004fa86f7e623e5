//! Where two equal spots merge into a flat top.

use pnr_scope::analysis::{contrast, sparrow_limit};
use pnr_scope::profiles::{BeamShape, IrradianceProfile, PinholeGeometry};

fn main() -> pnr_scope::Result<()> {
    let geometry = PinholeGeometry::new(75e-6, 1550e-9, 0.1)?;
    let airy = BeamShape::airy(geometry);
    let limit = sparrow_limit(&airy)?;
    println!(
        "Airy: flat top at {:.4} mm = {:.5} Rayleigh",
        limit.separation_m * 1e3,
        limit.separation_rayleigh.unwrap_or(f64::NAN)
    );
    let gaussian = sparrow_limit(&BeamShape::gaussian(1.0))?;
    println!("Gaussian (w = 1): flat top at s = {:.6}", gaussian.separation_m);

    for sr in [0.7, 0.76, 0.78, 0.8, 0.9] {
        let profile = IrradianceProfile::two_beam(airy.clone(), sr * geometry.rayleigh_separation(), 1.0)?;
        let r = contrast(|x| profile.transmission(x), &profile)?;
        println!("s = {sr:.2} R: contrast {:.5}{}", r.contrast, if r.no_dip { " (no dip)" } else { "" });
    }
    Ok(())
}
