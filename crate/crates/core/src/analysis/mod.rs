//! Derived metrics: FWHM and compression factors, two-beam contrast and
//! contrast sweeps, the Sparrow flat-top separation, and least-squares
//! profile fits.

mod contrast;
mod fit;
mod fwhm;
pub mod nelder_mead;
mod sparrow;

pub use contrast::{contrast, contrast_sampled, contrast_sweep, contrast_sweep_imbalanced, ContrastReport, SweepRow};
pub use fit::{fit_profile, FitParameters, FitResult, FitSpec, ProfileModel};
pub use fwhm::{central_lobe, compression_factor, fwhm, fwhm_sampled, FwhmResult, DEFAULT_FWHM_GRID};
pub use sparrow::{midpoint_curvature, sparrow_limit, SparrowLimit};
