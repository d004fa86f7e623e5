//! The k = 10 conditional profile of a Gaussian beam for coherent, thermal
//! and Fock illumination with the same mean.

use pnr_scope::analysis::fwhm;
use pnr_scope::photon_stats::{detected_distribution, Observable, ObservableCurve, SourceStatistics};
use pnr_scope::profiles::IrradianceProfile;

fn main() -> pnr_scope::Result<()> {
    let profile = IrradianceProfile::gaussian(1.0)?;
    let classical = fwhm(|x| profile.transmission(x), profile.domain())?;
    println!("classical FWHM/w = {:.4}", classical.fwhm);

    for source in [
        SourceStatistics::coherent(10.0)?,
        SourceStatistics::thermal(10.0)?,
        SourceStatistics::fock(10),
    ] {
        let curve = ObservableCurve::new(&source, 10.0)?;
        let r = fwhm(|x| curve.at_transmission(Observable::PhotonNumber(10), profile.transmission(x)), profile.domain())?;
        let half = detected_distribution(&source, 0.5)?;
        println!(
            "{:<9} FWHM/w = {:.4}   p(k) at T² = 0.5: {:.4} {:.4} {:.4} {:.4} {:.4} ...",
            source.family_name(),
            r.fwhm,
            half.probabilities[0],
            half.probabilities[1],
            half.probabilities[2],
            half.probabilities[3],
            half.probabilities[4],
        );
    }
    Ok(())
}
