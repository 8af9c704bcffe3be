//! Scalar abstraction for the numeric core.
//!
//! Everything downstream is generic over [`Real`], instantiated in practice
//! with `f32` or `f64` (`f64` aliases live at the crate root). The bounds
//! combine `nalgebra::RealField` (elementary functions, eigensolves) with the
//! `num-traits` operator set so the same code drives both widths.

use num_complex::Complex;

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    nalgebra::RealField
    + Copy
    + num_traits::NumAssign
    + num_traits::FromPrimitive
    + num_traits::Signed
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; panics only on non-representable values.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal must be representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// e^{i phi} on the unit circle.
pub fn cis<R: Real>(phi: R) -> Complex<R> {
    Complex::new(phi.cos(), phi.sin())
}

/// Modulus |z| without the `Float` bound `num-complex` would require.
pub fn cmod<R: Real>(z: Complex<R>) -> R {
    z.re.hypot(z.im)
}

/// Squared modulus |z|^2.
pub fn cmod2<R: Real>(z: Complex<R>) -> R {
    z.re * z.re + z.im * z.im
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cis_is_unit_modulus() {
        for k in 0..12 {
            let phi = 0.537 * k as f64;
            assert!((cmod(cis(phi)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn literal_conversion_round_trips() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.25), 0.25_f32);
    }
}
