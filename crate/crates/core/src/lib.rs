//! Simulation and analysis of photon-number-resolved imaging of
//! diffraction-limited beams.
//!
//! The crate models a scanning detector that resolves the number of photons
//! in each pulse of a coherent, thermal or Fock-state beam whose transverse
//! irradiance follows a single-slit, Airy or Gaussian profile. Conditioning
//! on a detected photon number `k` compresses the central fringe; summing two
//! non-interfering Airy beams near the Rayleigh separation, that compression
//! turns into higher peak/saddle contrast.
//!
//! # Layout
//!
//! - [`profiles`]: normalized irradiance profiles `T²(x)`, the Bessel `J₁`
//!   they need, and Rayleigh-criterion geometry.
//! - [`photon_stats`]: source photon-number distributions, the
//!   effective-beamsplitter transform and the per-`k` spatial profiles.
//! - [`simulate`]: seeded Monte Carlo scans producing [`simulate::CountTable`]s
//!   and the classical / click-detector / per-`k` reconstructions.
//! - [`analysis`]: FWHM, compression factors, contrast, Sparrow limit and
//!   least-squares profile fits.
//! - [`scenario`] and [`cli`]: JSON scenario files and the `pnr-scope`
//!   runner that writes plot-ready CSV/JSON tables.
//!
//! Every function is pure unless it writes files; parallel sections produce
//! results identical to sequential execution.

pub mod analysis;
pub mod cli;
mod error;
mod numeric;
pub mod photon_stats;
pub mod profiles;
pub mod scenario;
pub mod simulate;

pub use error::{Error, Result};
