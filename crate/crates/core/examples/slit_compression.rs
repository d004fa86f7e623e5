//! FWHM of the k-photon conditional profiles behind a single slit, relative
//! to the classical irradiance and a click/no-click detector.

use pnr_scope::analysis::{central_lobe, fwhm};
use pnr_scope::photon_stats::{Observable, ObservableCurve, SourceStatistics};
use pnr_scope::profiles::{IrradianceProfile, SlitGeometry};

fn main() -> pnr_scope::Result<()> {
    let geometry = SlitGeometry::new(250e-6, 1550e-9, 0.23)?;
    let profile = IrradianceProfile::slit(geometry)?;
    let source = SourceStatistics::coherent(3.6)?;
    let curve = ObservableCurve::new(&source, 3.6)?;
    let lobe = central_lobe(&profile);
    let width = |o| fwhm(|x| curve.at_transmission(o, profile.transmission(x)), lobe);

    let classical = width(Observable::ClassicalMean)?.fwhm;
    let spd = width(Observable::SpdClick)?.fwhm;
    println!("classical FWHM {:.4} mm, SPD FWHM {:.4} mm", classical * 1e3, spd * 1e3);
    println!("{:>3} {:>10} {:>10} {:>10}", "k", "fwhm_mm", "vs_class", "vs_spd");
    for k in 1..=12 {
        let r = width(Observable::PhotonNumber(k))?;
        println!(
            "{k:>3} {:>10.4} {:>10.3} {:>10.3}{}",
            r.fwhm * 1e3,
            classical / r.fwhm,
            spd / r.fwhm,
            if r.multimodal { "  two peaks" } else { "" }
        );
    }
    Ok(())
}
