//! Unit system, lattice geometry, trap parameters, and drive profiles.
//!
//! Internal units fix the single-atom linewidth gamma = 1 (all rates), the
//! transition wavelength lambda = 1 (all lengths), and hbar = 1 (energies in
//! hbar*gamma). The wavenumber is then q = 2*pi exactly.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;

/// Constants of the internal unit system.
pub mod units {
    use crate::scalar::Real;

    /// Single-atom linewidth gamma (the rate unit).
    pub const GAMMA: f64 = 1.0;
    /// Transition wavelength lambda (the length unit).
    pub const LAMBDA: f64 = 1.0;
    /// Reduced Planck constant (the action unit).
    pub const HBAR: f64 = 1.0;

    /// Optical wavenumber q = 2*pi/lambda, exact in internal units.
    pub fn wavenumber<R: Real>() -> R {
        R::two_pi()
    }
}

/// Square array of trapped atoms in the z = 0 plane.
///
/// Site 0 sits exactly at the origin; it is the site closest to the array
/// centroid, with coordinate ties broken by smallest x, then smallest y.
/// For even side lengths the array is therefore slightly asymmetric about
/// the origin, which makes central-site quantities unambiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry<R: Real> {
    nx: usize,
    ny: usize,
    spacing: R,
    positions: Vec<[R; 2]>,
}

impl<R: Real> ArrayGeometry<R> {
    /// Builds an nx-by-ny lattice with the given spacing (units of lambda).
    pub fn build(nx: usize, ny: usize, spacing: R) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!(
                "lattice dimensions must be positive, got {nx}x{ny}"
            )));
        }
        if spacing <= R::zero() {
            return Err(Error::InvalidArgument(format!(
                "lattice spacing must be positive, got {spacing:?}"
            )));
        }
        let half = |n: usize| R::of((n - 1) as f64 / 2.0);
        let mut positions = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let x = (R::of(i as f64) - half(nx)) * spacing;
                let y = (R::of(j as f64) - half(ny)) * spacing;
                positions.push([x, y]);
            }
        }
        // Central site: minimal |r|^2, ties by (x, y). Mirror-symmetric
        // coordinates compare bit-equal, so the tie-break is deterministic.
        let central = (0..positions.len())
            .min_by(|&i, &j| {
                let ri = positions[i][0] * positions[i][0] + positions[i][1] * positions[i][1];
                let rj = positions[j][0] * positions[j][0] + positions[j][1] * positions[j][1];
                (ri, positions[i][0], positions[i][1])
                    .partial_cmp(&(rj, positions[j][0], positions[j][1]))
                    .expect("grid coordinates are finite")
            })
            .expect("lattice is non-empty");
        let origin = positions[central];
        for p in &mut positions {
            p[0] -= origin[0];
            p[1] -= origin[1];
        }
        positions.swap(0, central);
        // Keep the remaining sites in row-major order for reproducibility.
        if central > 0 {
            positions[1..=central].rotate_right(1);
        }
        Ok(Self { nx, ny, spacing, positions })
    }

    /// Number of sites N = nx * ny.
    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    /// Side lengths (nx, ny).
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Lattice spacing in units of lambda.
    pub fn spacing(&self) -> R {
        self.spacing
    }

    /// Transverse site coordinates, site 0 first and at the origin.
    pub fn positions(&self) -> &[[R; 2]] {
        &self.positions
    }

    /// True when inversion through site 0 maps the site set onto itself.
    /// Lattice Fourier sums are real only in that case.
    pub fn inversion_symmetric(&self) -> bool {
        let tol = self.spacing * R::of(1e-9);
        self.positions.iter().all(|p| {
            self.positions
                .iter()
                .any(|m| (p[0] + m[0]).abs() < tol && (p[1] + m[1]).abs() < tol)
        })
    }
}

/// Longitudinal trap parameters and derived single-atom scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams<R: Real> {
    /// Trap frequency nu (units gamma).
    pub nu: R,
    /// Recoil energy over hbar*gamma.
    pub recoil: R,
    /// Lamb-Dicke parameter eta = q * x0.
    pub eta: R,
    /// Atomic mass, m = hbar q^2 / (gamma * recoil).
    pub mass: R,
    /// Zero-point length x0 = sqrt(hbar / (2 m nu)).
    pub x0: R,
    /// Optional trap depth V / E_R the parameters were reconstructed from.
    pub depth_over_recoil: Option<R>,
    /// Optional sinusoidal trap period l (units lambda).
    pub trap_length: Option<R>,
}

impl<R: Real> TrapParams<R> {
    /// Direct construction from the trap frequency and recoil energy.
    pub fn from_frequency(nu: R, recoil: R) -> Result<Self> {
        if nu <= R::zero() || recoil <= R::zero() {
            return Err(Error::InvalidArgument(format!(
                "trap frequency and recoil energy must be positive, got nu={nu:?}, recoil={recoil:?}"
            )));
        }
        let q: R = units::wavenumber();
        let eta = (recoil / (R::of(2.0) * nu)).sqrt();
        Ok(Self {
            nu,
            recoil,
            eta,
            mass: q * q / recoil,
            x0: eta / q,
            depth_over_recoil: None,
            trap_length: None,
        })
    }

    /// Reconstruction from a sinusoidal trap V sin^2(pi z / l) via its
    /// harmonic expansion m nu^2 = 2 V (pi / l)^2.
    pub fn from_depth(depth_over_recoil: R, trap_length: R, recoil: R) -> Result<Self> {
        if depth_over_recoil <= R::zero() || trap_length <= R::zero() || recoil <= R::zero() {
            return Err(Error::InvalidArgument(format!(
                "trap depth, length and recoil must be positive, got V/E_R={depth_over_recoil:?}, l={trap_length:?}, recoil={recoil:?}"
            )));
        }
        let q: R = units::wavenumber();
        let nu = R::pi() / trap_length * recoil * (R::of(2.0) * depth_over_recoil).sqrt() / q;
        let mut trap = Self::from_frequency(nu, recoil)?;
        if trap.eta > R::of(0.3) {
            return Err(Error::LambDickeViolation {
                eta: trap.eta.to_subset().unwrap_or(f64::NAN),
            });
        }
        trap.depth_over_recoil = Some(depth_over_recoil);
        trap.trap_length = Some(trap_length);
        Ok(trap)
    }
}

/// Illumination sides of the array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sides<R: Real> {
    /// Single beam from the left.
    Left,
    /// Two counter-propagating beams with the given relative phase.
    TwoSided { phase: R },
}

/// Transverse beam envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beam<R: Real> {
    /// Equal amplitude on every site.
    Uniform { rabi: R },
    /// Gaussian envelope exp(-|r|^2 / w0^2) with peak amplitude at site 0.
    Gaussian { waist: R, peak: R },
    /// Amplitudes supplied directly (complex in general).
    Custom,
}

/// Per-site Rabi amplitudes of the incident drive (units gamma).
#[derive(Debug, Clone, PartialEq)]
pub struct DriveProfile<R: Real> {
    amplitudes: Vec<Complex<R>>,
    beam: Beam<R>,
    sides: Sides<R>,
}

impl<R: Real> DriveProfile<R> {
    /// Uniform left-side drive.
    pub fn uniform(geom: &ArrayGeometry<R>, rabi: R) -> Result<Self> {
        if rabi < R::zero() {
            return Err(Error::InvalidArgument(format!(
                "peak Rabi frequency must be non-negative, got {rabi:?}"
            )));
        }
        Ok(Self {
            amplitudes: vec![Complex::new(rabi, R::zero()); geom.n_sites()],
            beam: Beam::Uniform { rabi },
            sides: Sides::Left,
        })
    }

    /// Gaussian left-side drive; site 0 carries the peak amplitude.
    pub fn gaussian(geom: &ArrayGeometry<R>, waist: R, peak: R) -> Result<Self> {
        if waist <= R::zero() {
            return Err(Error::InvalidArgument(format!(
                "beam waist must be positive, got {waist:?}"
            )));
        }
        if peak < R::zero() {
            return Err(Error::InvalidArgument(format!(
                "peak Rabi frequency must be non-negative, got {peak:?}"
            )));
        }
        let amplitudes = geom
            .positions()
            .iter()
            .map(|p| {
                let r2 = p[0] * p[0] + p[1] * p[1];
                Complex::new(peak * (-r2 / (waist * waist)).exp(), R::zero())
            })
            .collect();
        Ok(Self {
            amplitudes,
            beam: Beam::Gaussian { waist, peak },
            sides: Sides::Left,
        })
    }

    /// Arbitrary per-site amplitudes (must match the geometry size).
    pub fn from_amplitudes(
        geom: &ArrayGeometry<R>,
        amplitudes: Vec<Complex<R>>,
        sides: Sides<R>,
    ) -> Result<Self> {
        if amplitudes.len() != geom.n_sites() {
            return Err(Error::InvalidArgument(format!(
                "drive has {} amplitudes for {} sites",
                amplitudes.len(),
                geom.n_sites()
            )));
        }
        Ok(Self { amplitudes, beam: Beam::Custom, sides })
    }

    /// Same profile with the illumination sides replaced.
    pub fn with_sides(mut self, sides: Sides<R>) -> Self {
        self.sides = sides;
        self
    }

    /// Per-site complex Rabi amplitudes, ordered like the geometry sites.
    pub fn amplitudes(&self) -> &[Complex<R>] {
        &self.amplitudes
    }

    /// Beam descriptor.
    pub fn beam(&self) -> Beam<R> {
        self.beam
    }

    /// Illumination sides.
    pub fn sides(&self) -> Sides<R> {
        self.sides
    }

    /// True for real, non-negative amplitudes on every site.
    pub fn is_real(&self) -> bool {
        self.amplitudes
            .iter()
            .all(|a| a.im == R::zero() && a.re >= R::zero())
    }

    /// True when all amplitudes are equal.
    pub fn is_uniform(&self) -> bool {
        self.amplitudes
            .windows(2)
            .all(|w| w[0] == w[1])
    }

    /// Saturation guard: the model assumes max |Omega_n| well below the
    /// collective linewidth. Returns true when that headroom is gone.
    pub fn saturation_warning(&self, linewidth: R) -> bool {
        let max = self
            .amplitudes
            .iter()
            .map(|a| crate::scalar::cmod(*a))
            .fold(R::zero(), R::max);
        max > R::of(0.5) * linewidth
    }
}

/// How the laser detuning is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetuningSpec<R: Real> {
    /// delta_L - Delta in units of the collective linewidth gamma+Gamma.
    OverLinewidth(R),
    /// Bare delta_L in units of gamma; the cooperative shift is subtracted.
    BareOverGamma(R),
}

impl<R: Real> DetuningSpec<R> {
    /// Resolves to delta_L - Delta in units of gamma.
    pub fn resolve(self, cooperative_shift: R, linewidth: R) -> R {
        match self {
            DetuningSpec::OverLinewidth(x) => x * linewidth,
            DetuningSpec::BareOverGamma(d) => d - cooperative_shift,
        }
    }
}
