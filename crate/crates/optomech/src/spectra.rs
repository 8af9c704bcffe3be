//! Intensity spectrum of the reflected light.
//!
//! The reflected field at transverse detection wavevector k_perp carries a
//! coherent (elastic) line at the drive frequency plus motional sidebands:
//! the atoms' thermal motion phase-modulates the scattered light, and each
//! collective mode j imprints a Lorentzian-like sideband of width alpha_j
//! at +-nu_j. Spectra are normalized per unit time, relative to the
//! coherent peak at k_perp = 0.

use crate::dipole::{reflection_coefficient, CooperativeResponse};
use crate::error::{Error, Result};
use crate::mechanics::{susceptibility, ForceCoefficients, ModeBasis};
use crate::params::{units, ArrayGeometry, DriveProfile, TrapParams};
use crate::scalar::{cis, cmod2, Real};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// Mode-overlap matrix of the sideband double sum:
///
/// M_jj' = (btilde_j b_j' / |b_{k=0}|^2) (nu^4 / (nu_j^2 nu_j'^2))
///         Sum_nm U_jn U_j'm (Gamma_nm/gamma) (Omega_n^* Omega_m / |Omega_0|^2)
///
/// with b_j = (1/N) Sum_n e^{-i k.r_n} U_jn Omega_n and btilde_j the same
/// sum over the conjugated drive with opposite phase sign. Hermitian for a
/// real drive at k_perp = 0. k_perp is given in units of q.
pub fn overlap_matrix<R: Real>(
    geom: &ArrayGeometry<R>,
    modes: &ModeBasis<R>,
    drive: &DriveProfile<R>,
    coop: &CooperativeResponse<R>,
    trap: &TrapParams<R>,
    k_perp: [R; 2],
) -> Result<DMatrix<Complex<R>>> {
    let n = geom.n_sites();
    if modes.n_modes() != n || drive.amplitudes().len() != n {
        return Err(Error::InvalidArgument(format!(
            "size mismatch: {} sites, {} modes, {} amplitudes",
            n,
            modes.n_modes(),
            drive.amplitudes().len()
        )));
    }
    let om = drive.amplitudes();
    if cmod2(om[0]) == R::zero() {
        return Err(Error::ZeroCentralAmplitude);
    }
    let pts = geom.positions();
    let zero = Complex::new(R::zero(), R::zero());
    // Coherent k = 0 amplitude (1/N) Sum_n Omega_n.
    let b_coherent = om.iter().fold(zero, |acc, &o| acc + o) / R::of(n as f64);
    if cmod2(b_coherent) == R::zero() {
        return Err(Error::ZeroCentralAmplitude);
    }
    let inv_n = R::of(n as f64).recip();
    let q: R = units::wavenumber();
    let mut b = DVector::from_element(n, zero);
    let mut btilde = DVector::from_element(n, zero);
    for j in 0..n {
        for a in 0..n {
            let phase = q * (k_perp[0] * pts[a][0] + k_perp[1] * pts[a][1]);
            let u = Complex::new(modes.transform[(j, a)], R::zero());
            b[j] += cis(-phase) * u * om[a];
            btilde[j] += cis(phase) * u * om[a].conj();
        }
        b[j] = b[j] * Complex::new(inv_n, R::zero());
        btilde[j] = btilde[j] * Complex::new(inv_n, R::zero());
    }
    // inner_jj' = Sum_nm (U_jn Omega_n^*) Gamma_nm (U_j'm Omega_m).
    let p = DMatrix::from_fn(n, n, |j, a| {
        Complex::new(modes.transform[(j, a)], R::zero()) * om[a]
    });
    let kernel = coop.decay_kernel.map(|x| Complex::new(x, R::zero()));
    let inner = p.map(|z| z.conj()) * kernel * p.transpose();
    let nu2 = trap.nu * trap.nu;
    let norm = cmod2(b_coherent) * cmod2(om[0]);
    Ok(DMatrix::from_fn(n, n, |j, jp| {
        let nuj2 = modes.frequencies[j] * modes.frequencies[j];
        let nujp2 = modes.frequencies[jp] * modes.frequencies[jp];
        btilde[j] * b[jp] * inner[(j, jp)]
            * Complex::new(nu2 * nu2 / (nuj2 * nujp2) / norm, R::zero())
    }))
}

/// Reflected intensity spectrum at one detection wavevector.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySpectrum<R: Real> {
    /// Detection wavevector (units q).
    pub k_perp: [R; 2],
    /// Envelope frequency grid omega = ck - omega_L (units gamma).
    pub omega_grid: DVector<R>,
    /// Weight of the elastic delta(omega) line, |r|^2 |b_k|^2 / |b_0|^2.
    pub linear_weight: R,
    /// Continuous sideband spectrum on the grid, per unit time.
    pub nonlinear: DVector<R>,
    /// Gaussian width used to draw the elastic line.
    pub delta_render_width: R,
    /// Set when the grid reaches outside the slow-dynamics band
    /// |omega| << gamma+Gamma where the spectrum formula is valid.
    pub slow_band_warning: bool,
}

impl<R: Real> IntensitySpectrum<R> {
    /// Sideband spectrum plus the elastic line rendered as a unit-area
    /// Gaussian of width `delta_render_width`.
    pub fn total_rendered(&self) -> DVector<R> {
        let peak = render_delta_peak(self.linear_weight, self.delta_render_width, &self.omega_grid)
            .expect("render width fixed positive at construction");
        &self.nonlinear + peak
    }

    /// Trapezoidal integral of the sideband part over the grid.
    pub fn sideband_power(&self) -> R {
        trapezoid(&self.omega_grid, &self.nonlinear)
    }
}

fn trapezoid<R: Real>(x: &DVector<R>, y: &DVector<R>) -> R {
    let mut acc = R::zero();
    for i in 1..x.len() {
        acc += (y[i] + y[i - 1]) * (x[i] - x[i - 1]) * R::of(0.5);
    }
    acc
}

/// Uniform default frequency grid [-2 nu, 2 nu] with 4001 points.
pub fn default_omega_grid<R: Real>(nu: R) -> DVector<R> {
    let n = 4001;
    let half = R::of(2.0) * nu;
    DVector::from_fn(n, |i, _| {
        half * (R::of(2.0) * R::of(i as f64) / R::of((n - 1) as f64) - R::one())
    })
}

/// Unit-area Gaussian of the given width scaled by `weight`, sampled on
/// the grid; used to draw the elastic delta(omega) line.
pub fn render_delta_peak<R: Real>(
    weight: R,
    width: R,
    omega_grid: &DVector<R>,
) -> Result<DVector<R>> {
    if width <= R::zero() {
        return Err(Error::InvalidArgument(format!(
            "render width must be positive, got {width:?}"
        )));
    }
    let norm = weight / (width * R::two_pi().sqrt());
    Ok(omega_grid.map(|w| {
        let t = w / width;
        norm * (-R::of(0.5) * t * t).exp()
    }))
}

/// Computes the full intensity spectrum at one detection wavevector,
/// given in units of q.
///
/// Elastic weight: |r|^2 |b_k|^2 / |b_0|^2 with b_k the drive's lattice
/// Fourier amplitude. Sidebands:
///
/// I(omega) = |r|^2 32 eta^4 (T_e/E_R) (alpha_0/nu^2)
///            Sum_jj' M_jj' chi_j(omega)^* chi_j'(omega).
pub fn intensity_spectrum<R: Real>(
    geom: &ArrayGeometry<R>,
    modes: &ModeBasis<R>,
    fc: &ForceCoefficients<R>,
    drive: &DriveProfile<R>,
    coop: &CooperativeResponse<R>,
    trap: &TrapParams<R>,
    k_perp: [R; 2],
    omega_grid: &DVector<R>,
) -> Result<IntensitySpectrum<R>> {
    let alpha_0 = fc.friction[0];
    if alpha_0 <= R::zero() {
        return Err(Error::InvalidArgument(
            "central-site friction must be positive (driven, red-detuned array)".into(),
        ));
    }
    let m = overlap_matrix(geom, modes, drive, coop, trap, k_perp)?;
    let r = reflection_coefficient(fc.detuning, fc.linewidth)?;
    let r2 = cmod2(r);

    let om = drive.amplitudes();
    let pts = geom.positions();
    let zero = Complex::new(R::zero(), R::zero());
    let n = geom.n_sites();
    let inv_n = R::of(n as f64).recip();
    let q: R = units::wavenumber();
    let mut b_k = zero;
    let mut b_0 = zero;
    for a in 0..n {
        let phase = q * (k_perp[0] * pts[a][0] + k_perp[1] * pts[a][1]);
        b_k += cis(-phase) * om[a];
        b_0 += om[a];
    }
    b_k = b_k * Complex::new(inv_n, R::zero());
    b_0 = b_0 * Complex::new(inv_n, R::zero());
    let linear_weight = r2 * cmod2(b_k) / cmod2(b_0);

    let eta2 = trap.eta * trap.eta;
    let prefactor = r2
        * R::of(32.0)
        * eta2
        * eta2
        * (fc.t_eff / trap.recoil)
        * (alpha_0 / (trap.nu * trap.nu));
    let nonlinear = DVector::from_fn(omega_grid.len(), |i, _| {
        let w = omega_grid[i];
        let chi = DVector::from_fn(n, |j, _| {
            susceptibility(modes.frequencies[j], modes.mode_friction[j], w)
        });
        let mut sum = zero;
        for j in 0..n {
            let mut row = zero;
            for jp in 0..n {
                row += m[(j, jp)] * chi[jp];
            }
            sum += chi[j].conj() * row;
        }
        prefactor * sum.re
    });

    let band = omega_grid.amax();
    Ok(IntensitySpectrum {
        k_perp,
        omega_grid: omega_grid.clone(),
        linear_weight,
        nonlinear,
        delta_render_width: alpha_0 / R::of(3.0),
        slow_band_warning: band > R::of(0.2) * fc.linewidth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::normal_modes;
    use crate::params::Sides;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    struct Build {
        geom: ArrayGeometry<f64>,
        drive: DriveProfile<f64>,
        coop: CooperativeResponse<f64>,
        trap: TrapParams<f64>,
        fc: ForceCoefficients<f64>,
        modes: ModeBasis<f64>,
    }

    fn build(recoil: f64, det_over_lw: f64) -> Build {
        let geom = ArrayGeometry::build(3, 3, 0.4).unwrap();
        let drive = DriveProfile::gaussian(&geom, 1.2, 0.6).unwrap();
        let coop = CooperativeResponse::of_geometry(&geom);
        let trap = TrapParams::from_frequency(0.05, recoil).unwrap();
        let det = det_over_lw * coop.linewidth();
        let fc = ForceCoefficients::build(&geom, &drive, &coop, &trap, det).unwrap();
        let modes = normal_modes(&fc, &trap).unwrap();
        Build {
            geom,
            drive,
            coop,
            trap,
            fc,
            modes,
        }
    }

    fn spectrum_of(b: &Build, k: [f64; 2], grid: &DVector<f64>) -> IntensitySpectrum<f64> {
        intensity_spectrum(&b.geom, &b.modes, &b.fc, &b.drive, &b.coop, &b.trap, k, grid)
            .unwrap()
    }

    #[test]
    fn single_site_overlap_is_pure_weight_ratio() {
        let geom = ArrayGeometry::build(1, 1, 0.2).unwrap();
        let drive = DriveProfile::uniform(&geom, 0.5).unwrap();
        let coop = CooperativeResponse::of_geometry(&geom);
        let trap = TrapParams::from_frequency(0.05, 1.0 / 810.0).unwrap();
        let fc = ForceCoefficients::build(&geom, &drive, &coop, &trap, -0.5).unwrap();
        let modes = normal_modes(&fc, &trap).unwrap();
        let m = overlap_matrix(&geom, &modes, &drive, &coop, &trap, [0.0, 0.0]).unwrap();
        assert_relative_eq!(m[(0, 0)].re, 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(m[(0, 0)].im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn overlap_is_hermitian_for_real_drive_at_zero_angle() {
        let b = build(1.0 / 810.0, -0.25);
        let m = overlap_matrix(&b.geom, &b.modes, &b.drive, &b.coop, &b.trap, [0.0, 0.0])
            .unwrap();
        let n = m.nrows();
        let scale = m.iter().map(|z| cmod2(*z)).fold(0.0f64, f64::max).sqrt();
        for i in 0..n {
            for j in 0..n {
                let d = m[(i, j)] - m[(j, i)].conj();
                assert!(cmod2(d).sqrt() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn zero_central_amplitude_is_rejected() {
        let geom = ArrayGeometry::build(2, 1, 0.4).unwrap();
        let amps = vec![Complex::new(0.0, 0.0), Complex::new(0.5, 0.0)];
        let drive = DriveProfile::from_amplitudes(&geom, amps, Sides::Left).unwrap();
        let coop = CooperativeResponse::of_geometry(&geom);
        let trap = TrapParams::from_frequency(0.05, 1.0 / 810.0).unwrap();
        let fc = ForceCoefficients::build(&geom, &drive, &coop, &trap, -0.5).unwrap();
        let modes = normal_modes(&fc, &trap).unwrap();
        let err =
            overlap_matrix(&geom, &modes, &drive, &coop, &trap, [0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::ZeroCentralAmplitude));
    }

    #[test]
    fn spectrum_is_even_in_frequency_at_zero_angle() {
        let b = build(1.0 / 810.0, -0.25);
        let grid = default_omega_grid(b.trap.nu);
        let s = spectrum_of(&b, [0.0, 0.0], &grid);
        let n = grid.len();
        let peak = s.nonlinear.amax();
        for i in 0..n {
            let v = s.nonlinear[i];
            let vm = s.nonlinear[n - 1 - i];
            assert!(v >= -1e-12);
            assert!((v - vm).abs() <= 1e-10 * peak, "asymmetry at {i}");
        }
    }

    #[test]
    fn sidebands_sit_inside_the_mode_band_and_decay_outside() {
        let b = build(1.0 / 810.0, -0.25);
        let grid = DVector::from_fn(2001, |i, _| -4.0 * 0.05 + 8.0 * 0.05 * i as f64 / 2000.0);
        let s = spectrum_of(&b, [0.0, 0.0], &grid);
        let peak = s.nonlinear.amax();
        // Peak lies within the eigenfrequency band.
        let i_max = (0..grid.len()).max_by(|&a, &c| {
            s.nonlinear[a].partial_cmp(&s.nonlinear[c]).unwrap()
        }).unwrap();
        let w_peak = grid[i_max].abs();
        assert!(w_peak >= b.modes.frequencies.min() * 0.999);
        assert!(w_peak <= b.modes.frequencies.max() * 1.001);
        // Far wings (beyond 3 nu) are orders of magnitude down and keep
        // falling with |omega|.
        let mut last = f64::MAX;
        for i in 0..grid.len() {
            if grid[i] > 3.0 * b.trap.nu {
                assert!(s.nonlinear[i] < 1e-5 * peak);
                assert!(s.nonlinear[i] < last);
                last = s.nonlinear[i];
            }
        }
    }

    #[test]
    fn linear_weight_follows_reflectivity_and_beam_profile() {
        let b = build(1.0 / 810.0, -0.25);
        let grid = default_omega_grid(b.trap.nu);
        let s0 = spectrum_of(&b, [0.0, 0.0], &grid);
        let r = reflection_coefficient(b.fc.detuning, b.fc.linewidth).unwrap();
        assert_relative_eq!(s0.linear_weight, cmod2(r), max_relative = 1e-12);
        // Off-axis detection sees less of the coherent drive.
        let s1 = spectrum_of(&b, [0.3, 0.0], &grid);
        assert!(s1.linear_weight < s0.linear_weight);
    }

    #[test]
    fn sideband_power_scales_with_temperature_and_lamb_dicke() {
        let b1 = build(1.0 / 810.0, -0.25);
        let g1 = default_omega_grid(b1.trap.nu);
        let p1 = spectrum_of(&b1, [0.0, 0.0], &g1).sideband_power();
        // At fixed mode structure the power is linear in T_e and quartic
        // in eta; rescale those inputs directly.
        let mut fc = b1.fc.clone();
        fc.t_eff *= 3.0;
        let p_t = intensity_spectrum(
            &b1.geom, &b1.modes, &fc, &b1.drive, &b1.coop, &b1.trap, [0.0, 0.0], &g1,
        )
        .unwrap()
        .sideband_power();
        assert_relative_eq!(p_t / p1, 3.0, max_relative = 1e-12);
        let mut trap2 = b1.trap;
        trap2.eta *= 1.3;
        let p_e = intensity_spectrum(
            &b1.geom, &b1.modes, &b1.fc, &b1.drive, &b1.coop, &trap2, [0.0, 0.0], &g1,
        )
        .unwrap()
        .sideband_power();
        assert_relative_eq!(p_e / p1, 1.3f64.powi(4), max_relative = 1e-12);
        // Physical route: recoil -> c * recoil moves eta^4/E_R by c and
        // alpha_0 by c while every 1/alpha_j linewidth integral gains 1/c,
        // so the integrated power itself scales by c. Check within 1%.
        let c = 1.44;
        let b2 = build(c / 810.0, -0.25);
        let p2 = spectrum_of(&b2, [0.0, 0.0], &g1).sideband_power();
        assert_relative_eq!(p2 / p1, c, max_relative = 1e-2);
    }

    #[test]
    fn nonlinear_part_ignores_global_drive_phase() {
        let b = build(1.0 / 810.0, -0.25);
        let grid = DVector::from_fn(101, |i, _| -0.08 + 0.16 * i as f64 / 100.0);
        let s = spectrum_of(&b, [0.1, 0.2], &grid);
        let phase = cis(0.7f64);
        let amps: Vec<Complex<f64>> =
            b.drive.amplitudes().iter().map(|&a| phase * a).collect();
        let drive2 = DriveProfile::from_amplitudes(&b.geom, amps, Sides::Left).unwrap();
        let fc2 =
            ForceCoefficients::build(&b.geom, &drive2, &b.coop, &b.trap, b.fc.detuning).unwrap();
        let modes2 = normal_modes(&fc2, &b.trap).unwrap();
        let s2 = intensity_spectrum(
            &b.geom, &modes2, &fc2, &drive2, &b.coop, &b.trap, [0.1, 0.2], &grid,
        )
        .unwrap();
        let peak = s.nonlinear.amax();
        for i in 0..grid.len() {
            assert!((s.nonlinear[i] - s2.nonlinear[i]).abs() <= 1e-12 * peak);
        }
        assert_relative_eq!(s.linear_weight, s2.linear_weight, max_relative = 1e-12);
    }

    #[test]
    fn rendered_peak_has_unit_area_and_stated_height() {
        let width = 2.0e-4;
        let weight = 0.8;
        let grid = DVector::from_fn(4001, |i, _| {
            -6.0 * width + 12.0 * width * i as f64 / 4000.0
        });
        let peak = render_delta_peak(weight, width, &grid).unwrap();
        assert_relative_eq!(
            trapezoid(&grid, &peak),
            weight,
            max_relative = 1e-3
        );
        let mid = peak[2000];
        assert_relative_eq!(
            mid,
            weight / (width * (2.0 * std::f64::consts::PI).sqrt()),
            max_relative = 1e-12
        );
        // Narrowing the width concentrates the weight into one bin.
        let narrow = render_delta_peak(weight, width / 1e4, &grid).unwrap();
        let total: f64 = narrow.iter().sum();
        assert_relative_eq!(narrow[2000] / total, 1.0, max_relative = 1e-12);
        assert!(render_delta_peak(weight, 0.0, &grid).is_err());
    }

    #[test]
    fn dark_drive_silences_the_sidebands() {
        let b = build(1.0 / 810.0, -0.25);
        let grid = DVector::from_fn(11, |i, _| -0.08 + 0.016 * i as f64);
        let amps: Vec<Complex<f64>> = b
            .drive
            .amplitudes()
            .iter()
            .map(|&a| a * 1e-6)
            .collect();
        let drive2 = DriveProfile::from_amplitudes(&b.geom, amps, Sides::Left).unwrap();
        let fc2 =
            ForceCoefficients::build(&b.geom, &drive2, &b.coop, &b.trap, b.fc.detuning).unwrap();
        let modes2 = normal_modes(&fc2, &b.trap).unwrap();
        let s2 = intensity_spectrum(
            &b.geom, &modes2, &fc2, &drive2, &b.coop, &b.trap, [0.0, 0.0], &grid,
        )
        .unwrap();
        let s1 = spectrum_of(&b, [0.0, 0.0], &grid);
        // Sidebands shrink as |Omega|^2 (through alpha_0); the elastic
        // weight is drive-shape invariant.
        assert!(s2.nonlinear.amax() < 1e-11 * s1.nonlinear.amax());
        assert_relative_eq!(s2.linear_weight, s1.linear_weight, max_relative = 1e-9);
    }

    #[test]
    fn wide_grids_raise_the_slow_band_warning() {
        let b = build(1.0 / 810.0, -0.25);
        let narrow = default_omega_grid(b.trap.nu);
        assert!(!spectrum_of(&b, [0.0, 0.0], &narrow).slow_band_warning);
        let wide = DVector::from_fn(11, |i, _| -5.0 + i as f64);
        assert!(spectrum_of(&b, [0.0, 0.0], &wide).slow_band_warning);
    }
}
