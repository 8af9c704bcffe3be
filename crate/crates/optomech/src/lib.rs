//! Collective optomechanics of laser-driven two-dimensional atom arrays.
//!
//! A planar lattice of trapped atoms responds to resonant light as a single
//! collective mirror. Photon exchange between the atoms shifts and broadens
//! the optical response, and the recoil of the scattered light couples to
//! the atoms' motion along the trap axis: the light exerts static forces,
//! pairwise mechanical couplings, friction, and diffusion on the array.
//! This crate computes that coupled response in a linearized regime:
//!
//! - cooperative shift, width, and pairwise decay kernel of the array
//!   ([`dipole`]),
//! - light-induced forces and the collective mechanical normal modes
//!   ([`mechanics`]),
//! - motional sidebands of the reflected intensity ([`spectra`]),
//! - Bogoliubov coefficients and squeezing spectra of the output light
//!   ([`squeezing`]),
//! - the equivalent linearized cavity-optomechanics parameters ([`cavity`]),
//! - a stochastic time-domain integrator used as an independent
//!   cross-check of the frequency-domain results ([`langevin`]).
//!
//! Internal units fix gamma = lambda = hbar = 1, so rates are in units of
//! the single-atom linewidth, lengths in units of the transition
//! wavelength, and the optical wavenumber is q = 2 pi exactly.
//!
//! The numeric core is generic over the scalar type through [`Real`];
//! `f64` aliases for the main types live at the crate root.

pub mod cavity;
pub mod dipole;
pub mod error;
pub mod langevin;
pub mod mechanics;
pub mod params;
pub mod scalar;
pub mod spectra;
pub mod squeezing;

pub use error::{Error, Result};
pub use scalar::Real;

/// Array geometry over `f64`.
pub type ArrayGeometry = params::ArrayGeometry<f64>;
/// Trap parameters over `f64`.
pub type TrapParams = params::TrapParams<f64>;
/// Drive profile over `f64`.
pub type DriveProfile = params::DriveProfile<f64>;
/// Detuning specification over `f64`.
pub type DetuningSpec = params::DetuningSpec<f64>;
/// Cooperative response over `f64`.
pub type CooperativeResponse = dipole::CooperativeResponse<f64>;
/// Force coefficients over `f64`.
pub type ForceCoefficients = mechanics::ForceCoefficients<f64>;
/// Mode basis over `f64`.
pub type ModeBasis = mechanics::ModeBasis<f64>;
/// Intensity spectrum over `f64`.
pub type IntensitySpectrum = spectra::IntensitySpectrum<f64>;
/// Bogoliubov coefficient pair of the reflected field, in f64.
pub type BogoliubovPair = squeezing::BogoliubovPair<f64>;
/// Squeezing spectrum over a (k, omega) grid, in f64.
pub type SqueezingSpectrum = squeezing::SqueezingSpectrum<f64>;
/// Near-resonance squeezing approximation, in f64.
pub type ResonanceApproximation = squeezing::ResonanceApproximation<f64>;
/// Cavity-optomechanics picture of the driven array, in f64.
pub type CavityMapping = cavity::CavityMapping<f64>;
/// Adiabatically eliminated cavity-field coefficients, in f64.
pub type CavityCoefficients = cavity::CavityCoefficients<f64>;
/// Stochastic-run configuration, in f64.
pub type LangevinConfig = langevin::LangevinConfig<f64>;
/// Recorded stochastic trajectories, in f64.
pub type TrajectoryEnsemble = langevin::TrajectoryEnsemble<f64>;
/// Welch spectral-density estimate, in f64.
pub type PsdEstimate = langevin::PsdEstimate<f64>;
