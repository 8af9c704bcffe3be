//! Free-space dipole radiation kernels and the array's cooperative response.
//!
//! Everything is expressed through the dimensionless dyadic Green tensor
//! G(u) evaluated at u = q*(r - r'), projected onto the fixed circular
//! polarization e_d = (x + i y)/sqrt(2). The pairwise decay kernel, the
//! cooperative shift and width of the driven array, and the dimensionless
//! radiation force tensor all derive from it.

use crate::error::{Error, Result};
use crate::params::{units, ArrayGeometry};
use crate::scalar::{cis, Real};
use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex;

/// Circular dipole polarization e_d = (x + i y)/sqrt(2).
pub fn polarization<R: Real>() -> Vector3<Complex<R>> {
    let s = (R::of(2.0)).sqrt().recip();
    Vector3::new(
        Complex::new(s, R::zero()),
        Complex::new(R::zero(), s),
        Complex::new(R::zero(), R::zero()),
    )
}

/// Diagonal imaginary part of the dimensionless Green tensor at coincidence,
/// Im[G_ii(u -> 0)] = 1/(6 pi). This is the only piece of G defined at u = 0
/// and the normalization anchor that makes the decay kernel's diagonal gamma.
pub fn green_coincidence_imag<R: Real>() -> R {
    R::of(1.0 / (6.0 * std::f64::consts::PI))
}

/// Dimensionless free-space dyadic Green tensor at u = q*(r - r').
///
/// G(u) = e^{iu}/(4 pi u) * [(1 + (iu-1)/u^2) I + (-1 + (3-3iu)/u^2) n n^T]
/// with u = |u| and n = u/|u|. Even under u -> -u.
pub fn dyadic_green<R: Real>(u: [R; 3]) -> Result<Matrix3<Complex<R>>> {
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    if u2 == R::zero() {
        return Err(Error::CoincidenceLimit);
    }
    let s = u2.sqrt();
    let inv = s.recip();
    let inv2 = inv * inv;
    let pref = cis(s) * Complex::new(R::of(0.25) / R::pi() * inv, R::zero());
    // 1 + (i s - 1)/s^2
    let diag = Complex::new(R::one() - inv2, inv);
    // -1 + (3 - 3 i s)/s^2
    let proj = Complex::new(R::of(3.0) * inv2 - R::one(), -R::of(3.0) * inv);
    let mut g = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let nn = Complex::new(u[i] * u[j] * inv2, R::zero());
            g[(i, j)] = pref * (proj * nn + if i == j { diag } else { Complex::new(R::zero(), R::zero()) });
        }
    }
    Ok(g)
}

/// Polarization-projected Green function e_d^dag G(u) e_d for an in-plane
/// separation of length u: e^{iu}/(8 pi u) * (1 - i/u + 1/u^2).
pub fn green_dd_inplane<R: Real>(u: R) -> Result<Complex<R>> {
    if u == R::zero() {
        return Err(Error::CoincidenceLimit);
    }
    let inv = u.recip();
    let bracket = Complex::new(R::one() + inv * inv, -inv);
    Ok(cis(u) * bracket * Complex::new(R::of(0.125) / R::pi() * inv, R::zero()))
}

/// Pairwise decay rate Gamma(u)/gamma for an in-plane separation of length
/// u = q|r_n - r_m|; the coincidence limit is exactly 1.
pub fn decay_pair<R: Real>(u: R) -> R {
    if u == R::zero() {
        return R::one();
    }
    let six_pi = R::of(6.0) * R::pi();
    six_pi * green_dd_inplane(u).expect("u != 0").im
}

/// Pairwise decay kernel Gamma_nm in units of gamma; symmetric, unit
/// diagonal, positive semidefinite up to rounding.
pub fn decay_kernel<R: Real>(geom: &ArrayGeometry<R>) -> DMatrix<R> {
    let q: R = units::wavenumber();
    let pts = geom.positions();
    let n = pts.len();
    let mut k = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            let dx = pts[i][0] - pts[j][0];
            let dy = pts[i][1] - pts[j][1];
            let g = decay_pair(q * dx.hypot(dy));
            k[(i, j)] = g;
            k[(j, i)] = g;
        }
    }
    k
}

/// Cooperative shift Delta and width Gamma of the driven array, from the
/// lattice sum Delta - i Gamma/2 = -3 pi Sum_{n != 0} e_d^dag G(q r_n) e_d
/// over all sites relative to the central one. Units of gamma.
pub fn cooperative_shift_width<R: Real>(geom: &ArrayGeometry<R>) -> (R, R) {
    let q: R = units::wavenumber();
    let mut sum = Complex::new(R::zero(), R::zero());
    for p in geom.positions().iter().skip(1) {
        let u = q * p[0].hypot(p[1]);
        sum += green_dd_inplane(u).expect("distinct lattice sites");
    }
    let three_pi = R::of(3.0) * R::pi();
    (-three_pi * sum.re, R::of(2.0) * three_pi * sum.im)
}

/// Cooperative optical response of a geometry: shift, width, and the full
/// decay kernel, all in units of gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct CooperativeResponse<R: Real> {
    /// Cooperative shift Delta.
    pub delta: R,
    /// Cooperative width Gamma (so the total linewidth is gamma + Gamma).
    pub gamma_coop: R,
    /// Pairwise decay kernel Gamma_nm / gamma, unit diagonal.
    pub decay_kernel: DMatrix<R>,
}

impl<R: Real> CooperativeResponse<R> {
    /// Evaluates the lattice sums for a geometry.
    pub fn of_geometry(geom: &ArrayGeometry<R>) -> Self {
        let (delta, gamma_coop) = cooperative_shift_width(geom);
        Self {
            delta,
            gamma_coop,
            decay_kernel: decay_kernel(geom),
        }
    }

    /// Total linewidth gamma + Gamma of the collectively driven array.
    pub fn linewidth(&self) -> R {
        R::one() + self.gamma_coop
    }

    /// Decay width of the spatially uniform mode, (1/N) Sum_nm Gamma_nm.
    /// Converges to gamma (3/4pi)(lambda/a)^2 for large dense arrays.
    pub fn uniform_mode_width(&self) -> R {
        let n = self.decay_kernel.nrows();
        self.decay_kernel.iter().fold(R::zero(), |acc, &x| acc + x) / R::of(n as f64)
    }
}

/// Dimensionless radiation force tensor F(u), the second transverse
/// derivative kernel of the Green tensor:
///
/// F_ij = delta_ij e^{iu}/u^2 [(i - 1/u)(1 + (iu-1)/u^2) + (i/u^2 - 2(iu-1)/u^3)]
///      + (u_i u_j/u^2) e^{iu}/u^2 [(i - 3/u)(-1 + (3-3iu)/u^2) + 3(-i/u^2 - 2(1-iu)/u^3)]
///
/// Even under u -> -u and symmetric in (i, j).
pub fn force_tensor<R: Real>(u: [R; 3]) -> Result<Matrix3<Complex<R>>> {
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    if u2 == R::zero() {
        return Err(Error::SingularSeparation);
    }
    let s = u2.sqrt();
    let (a, b) = force_brackets(s);
    let inv2 = s.recip() * s.recip();
    let mut f = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let nn = Complex::new(u[i] * u[j] * inv2, R::zero());
            f[(i, j)] = b * nn + if i == j { a } else { Complex::new(R::zero(), R::zero()) };
        }
    }
    Ok(f)
}

/// The two scalar brackets of the force tensor: F = A I + B n n^T.
fn force_brackets<R: Real>(s: R) -> (Complex<R>, Complex<R>) {
    let i = Complex::new(R::zero(), R::one());
    let one = Complex::new(R::one(), R::zero());
    let re = |x: R| Complex::new(x, R::zero());
    let inv = s.recip();
    let phase = cis(s) * re(inv * inv);
    // (i u - 1)/u^2 appears in both brackets.
    let g1 = (i * re(s) - one) * re(inv * inv);
    let a = phase
        * ((i - re(inv)) * (one + g1) + (i * re(inv * inv) - re(R::of(2.0) * inv) * g1));
    let g2 = (re(R::of(3.0)) - i * re(R::of(3.0) * s)) * re(inv * inv);
    let b = phase
        * ((i - re(R::of(3.0) * inv)) * (g2 - one)
            + re(R::of(3.0)) * (-i * re(inv * inv) - re(R::of(2.0) * inv) * (one - i * re(s)) * re(inv * inv)));
    (a, b)
}

/// Polarization-projected force e_d^dag F(u) e_d for an in-plane separation
/// of length u; equals A + B/2 independent of the in-plane direction.
pub fn force_dd_inplane<R: Real>(u: R) -> Result<Complex<R>> {
    if u == R::zero() {
        return Err(Error::SingularSeparation);
    }
    let (a, b) = force_brackets(u);
    Ok(a + b * Complex::new(R::of(0.5), R::zero()))
}

/// Array reflection coefficient for a spatially uniform drive,
/// r = -i(gamma+Gamma)/2 / [i(gamma+Gamma)/2 + (delta_L - Delta)].
/// Perfect reflection (r = -1) at cooperative resonance.
pub fn reflection_coefficient<R: Real>(detuning: R, linewidth: R) -> Result<Complex<R>> {
    if linewidth <= R::zero() {
        return Err(Error::InvalidArgument(format!(
            "linewidth must be positive, got {linewidth:?}"
        )));
    }
    let w = R::of(0.5) * linewidth;
    let num = Complex::new(R::zero(), -w);
    let den = Complex::new(detuning, w);
    Ok(num / den)
}

/// Transmission of the lossless array mirror, t = 1 + r.
pub fn transmission<R: Real>(r: Complex<R>) -> Complex<R> {
    Complex::new(R::one(), R::zero()) + r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ArrayGeometry;
    use crate::scalar::cmod2;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c64(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn coincidence_is_an_error_with_a_separate_constant() {
        assert!(matches!(dyadic_green::<f64>([0.0; 3]), Err(Error::CoincidenceLimit)));
        assert!(matches!(green_dd_inplane::<f64>(0.0), Err(Error::CoincidenceLimit)));
        assert!(matches!(force_tensor::<f64>([0.0; 3]), Err(Error::SingularSeparation)));
        assert_relative_eq!(
            green_coincidence_imag::<f64>(),
            1.0 / (6.0 * std::f64::consts::PI),
            max_relative = 1e-15
        );
        // The anchor: 6 pi Im[e_d G e_d](0) = 1, i.e. Gamma_nn = gamma.
        assert_eq!(decay_pair::<f64>(0.0), 1.0);
    }

    #[test]
    fn green_is_even_and_projection_matches_closed_form() {
        let pts = [[0.7, -0.3, 1.1], [2.5, 0.0, 0.0], [0.1, 0.2, -0.4]];
        let e = polarization::<f64>();
        for u in pts {
            let g = dyadic_green(u).unwrap();
            let gm = dyadic_green([-u[0], -u[1], -u[2]]).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!(g[(i, j)].re, gm[(i, j)].re, epsilon = 1e-15);
                    assert_abs_diff_eq!(g[(i, j)].im, gm[(i, j)].im, epsilon = 1e-15);
                }
            }
        }
        // In-plane separations: tensor projection agrees with the closed form.
        for s in [0.3, 1.0, 2.7, 9.4] {
            let phi = 0.813f64;
            let u = [s * phi.cos(), s * phi.sin(), 0.0];
            let g = dyadic_green(u).unwrap();
            let proj = (e.adjoint() * g * e)[(0, 0)];
            let closed = green_dd_inplane(s).unwrap();
            assert_relative_eq!(proj.re, closed.re, max_relative = 1e-12);
            assert_relative_eq!(proj.im, closed.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn far_field_is_transverse_spherical_wave() {
        for s in [100.0, 250.0, 1000.0] {
            let n = [0.48, -0.6, 0.64];
            let u = [s * n[0], s * n[1], s * n[2]];
            let g = dyadic_green(u).unwrap();
            let pref = crate::scalar::cis(s) / (4.0 * std::f64::consts::PI * s);
            let mut err: f64 = 0.0;
            let mut norm: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let lead = pref * (if i == j { 1.0 } else { 0.0 } - n[i] * n[j]);
                    err += cmod2(g[(i, j)] - lead);
                    norm += cmod2(g[(i, j)]);
                }
            }
            assert!((err / norm).sqrt() < 0.02, "far-field error at u={s}");
        }
    }

    #[test]
    fn decay_pair_matches_explicit_trigonometric_form() {
        for u in [0.4f64, 1.2566370614359172, 3.9, 17.0] {
            let explicit =
                0.75 / u * ((1.0 + 1.0 / (u * u)) * u.sin() - u.cos() / u);
            assert_relative_eq!(decay_pair(u), explicit, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernel_is_symmetric_with_unit_diagonal() {
        let g = ArrayGeometry::<f64>::build(4, 3, 0.37).unwrap();
        let k = decay_kernel(&g);
        for i in 0..k.nrows() {
            assert_eq!(k[(i, i)], 1.0);
            for j in 0..i {
                assert_eq!(k[(i, j)], k[(j, i)]);
            }
        }
    }

    #[test]
    fn kernel_eigenvalues_are_nonnegative() {
        for (nx, ny, a) in [(5, 5, 0.2), (4, 4, 0.5), (8, 1, 0.31), (3, 6, 0.75)] {
            let g = ArrayGeometry::<f64>::build(nx, ny, a).unwrap();
            let k = decay_kernel(&g);
            let eig = k.symmetric_eigenvalues();
            for &e in eig.iter() {
                assert!(e >= -1e-10, "kernel eigenvalue {e} at {nx}x{ny}, a={a}");
            }
        }
    }

    #[test]
    fn distant_pair_decouples() {
        let g = ArrayGeometry::<f64>::build(2, 1, 1e4).unwrap();
        let k = decay_kernel(&g);
        assert!(k[(0, 1)].abs() < 1e-4);
        let (delta, gamma) = cooperative_shift_width(&g);
        assert!(delta.abs() < 1e-4 && gamma.abs() < 1e-4);
    }

    #[test]
    fn single_site_has_no_cooperative_response() {
        let g = ArrayGeometry::<f64>::build(1, 1, 0.2).unwrap();
        let (delta, gamma) = cooperative_shift_width(&g);
        assert_eq!(delta, 0.0);
        assert_eq!(gamma, 0.0);
        assert_eq!(CooperativeResponse::of_geometry(&g).linewidth(), 1.0);
    }

    #[test]
    fn cooperative_response_matches_frozen_lattice_sums() {
        let g = ArrayGeometry::<f64>::build(14, 14, 0.2).unwrap();
        let r = CooperativeResponse::of_geometry(&g);
        assert_relative_eq!(r.delta, 5.5259086951988459e-2, max_relative = 1e-10);
        assert_relative_eq!(r.linewidth(), 7.4409655391450764, max_relative = 1e-10);
        let g = ArrayGeometry::<f64>::build(21, 21, 0.5).unwrap();
        let r = CooperativeResponse::of_geometry(&g);
        assert_relative_eq!(r.delta, 3.1570537981634866e-1, max_relative = 1e-10);
        assert_relative_eq!(r.linewidth(), 1.0867616044474389, max_relative = 1e-10);
    }

    #[test]
    fn uniform_mode_width_converges_toward_dense_array_asymptote() {
        // a = 0.2: the asymptote is 75/(4 pi). Deviation must shrink with N.
        let target = 75.0 / (4.0 * std::f64::consts::PI);
        let frozen = [(10, 5.537386269515), (20, 5.756383329205)];
        let mut prev = f64::MAX;
        for (n, expect) in frozen {
            let g = ArrayGeometry::<f64>::build(n, n, 0.2).unwrap();
            let w = CooperativeResponse::of_geometry(&g).uniform_mode_width();
            assert_relative_eq!(w, expect, max_relative = 1e-9);
            let dev = (w - target).abs() / target;
            assert!(dev < prev);
            prev = dev;
        }
    }

    #[test]
    fn force_tensor_is_even_and_symmetric() {
        let u = [0.9, -1.7, 0.6];
        let f = force_tensor(u).unwrap();
        let fm = force_tensor([-u[0], -u[1], -u[2]]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f[(i, j)], fm[(i, j)]);
                assert_abs_diff_eq!(f[(i, j)].re, f[(j, i)].re, epsilon = 1e-15);
                assert_abs_diff_eq!(f[(i, j)].im, f[(j, i)].im, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn force_matches_expanded_polynomial_form() {
        // Independent route: the brackets expand exactly to
        // A = e^{iu}/u^2 (i - 2/u - 3i/u^2 + 3/u^3),
        // B = e^{iu}/u^2 (-i + 6/u + 15i/u^2 - 15/u^3).
        // Below u ~ 0.5 both routes lose digits to the same analytic
        // cancellation (Im A vanishes as u -> 0 while the bracket terms
        // grow as 1/u^3), so the comparison samples u in [0.9, 40].
        let mut s = 0.9f64;
        for _ in 0..20 {
            let inv = 1.0 / s;
            let ph = crate::scalar::cis(s) * inv * inv;
            let a = ph * c64(-2.0 * inv + 3.0 * inv.powi(3), 1.0 - 3.0 * inv * inv);
            let b = ph * c64(6.0 * inv - 15.0 * inv.powi(3), -1.0 + 15.0 * inv * inv);
            let (fa, fb) = force_brackets(s);
            assert_relative_eq!(fa.re, a.re, max_relative = 1e-12);
            assert_relative_eq!(fa.im, a.im, max_relative = 1e-12);
            assert_relative_eq!(fb.re, b.re, max_relative = 1e-12);
            assert_relative_eq!(fb.im, b.im, max_relative = 1e-12);
            s *= 1.22;
        }
    }

    #[test]
    fn projected_force_matches_frozen_symbolic_samples() {
        let q = 2.0 * std::f64::consts::PI;
        let cases = [
            (0.2f64, 0.0f64, c64(-2.3054115201718135, -0.23099298165515336)),
            (0.2, 0.2, c64(-0.58101727221115462, -0.19895912521517828)),
            (0.5, 0.0, c64(-1.7546598039459255e-2, -9.68575119672484e-2)),
            (0.5, 0.5, c64(3.320438294534335e-2, -1.8304748693502237e-2)),
            (1.0, 0.0, c64(3.5719125418455537e-3, 1.5552455464422191e-2)),
            (0.4, 0.6, c64(3.2942970700508854e-2, -1.458102877239756e-2)),
        ];
        for (x, y, want) in cases {
            let f = force_dd_inplane(q * x.hypot(y)).unwrap();
            assert_relative_eq!(f.re, want.re, max_relative = 1e-12);
            assert_relative_eq!(f.im, want.im, max_relative = 1e-12);
            // Same value through the full tensor projection.
            let e = polarization::<f64>();
            let t = force_tensor([q * x, q * y, 0.0]).unwrap();
            let proj = (e.adjoint() * t * e)[(0, 0)];
            assert_relative_eq!(proj.re, want.re, max_relative = 1e-12);
            assert_relative_eq!(proj.im, want.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn off_plane_tensor_matches_frozen_symbolic_samples() {
        let u = [1.3, -0.7, 2.1];
        let f = force_tensor(u).unwrap();
        let want = [
            (0, 0, c64(-4.2641237248382105e-2, -1.3002997199514799e-1)),
            (0, 1, c64(4.0047924596840118e-2, 5.9308986049984597e-3)),
            (0, 2, c64(-1.2014377379052038e-1, -1.7792695814995381e-2)),
            (1, 1, c64(1.0169212769429056e-2, -1.2220900680174342e-1)),
            (1, 2, c64(6.4692801271818659e-2, 9.5806823619205891e-3)),
            (2, 2, c64(-1.6234492395542072e-1, -1.4775749310019834e-1)),
        ];
        for (i, j, w) in want {
            assert_relative_eq!(f[(i, j)].re, w.re, max_relative = 1e-12);
            assert_relative_eq!(f[(i, j)].im, w.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn force_decays_as_inverse_square() {
        let n = [0.48, -0.6, 0.64];
        let amp = |s: f64| {
            let f = force_tensor([s * n[0], s * n[1], s * n[2]]).unwrap();
            (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| cmod2(f[(i, j)]))
                .sum::<f64>()
                .sqrt()
        };
        let slope = (amp(1000.0) / amp(100.0)).ln() / 10f64.ln();
        assert!((slope + 2.0).abs() < 0.02, "log-log slope {slope}");
    }

    #[test]
    fn reflection_anchors_and_energy_conservation() {
        let lw = 7.4409655391450764;
        let r0 = reflection_coefficient(0.0, lw).unwrap();
        assert_abs_diff_eq!(r0.re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r0.im, 0.0, epsilon = 1e-14);
        let r = reflection_coefficient(-lw / 4.0, lw).unwrap();
        assert_relative_eq!(cmod2(r), 0.8, max_relative = 1e-12);
        let far = reflection_coefficient(1e9, lw).unwrap();
        assert!(crate::scalar::cmod(far) < 1e-8);
        // |r|^2 + |1+r|^2 = 1 on a detuning grid.
        for i in 0..100 {
            let d = -25.0 + 0.5 * i as f64;
            let r = reflection_coefficient(d, lw).unwrap();
            let t = transmission(r);
            assert_abs_diff_eq!(cmod2(r) + cmod2(t), 1.0, epsilon = 1e-12);
        }
        assert!(reflection_coefficient(0.0, -1.0).is_err());
    }

    #[test]
    fn linewidth_strictly_decreases_with_spacing() {
        // 41x41 sites: large enough that finite-size fringes do not break
        // monotonicity across a in [0.2, 0.8].
        let mut prev = f64::MAX;
        for i in 0..13 {
            let a = 0.2 + 0.05 * i as f64;
            let g = ArrayGeometry::<f64>::build(41, 41, a).unwrap();
            let (_, gamma) = cooperative_shift_width(&g);
            let lw = 1.0 + gamma;
            assert!(lw > 0.0);
            assert!(lw < prev, "linewidth not decreasing at a={a}");
            prev = lw;
        }
    }
}
