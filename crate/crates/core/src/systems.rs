//! Builtin example systems.

use num_complex::Complex64;

use crate::ode::VectorField;
use crate::poly::ComplexPoly;

/// `f(z) = z² + 1`.
pub fn z2p1() -> ComplexPoly {
    ComplexPoly::from_real(&[1.0, 0.0, 1.0])
}

/// `f(z) = cosh(z − 1/2)`; separatrices on `Im z = kπ`, centers at `1/2 + i(k + 1/2)π`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoshShift;

impl VectorField for CoshShift {
    fn eval(&self, z: Complex64) -> Complex64 {
        (z - 0.5).cosh()
    }
}

impl CoshShift {
    pub fn center(k: i64) -> Complex64 {
        Complex64::new(0.5, (k as f64 + 0.5) * std::f64::consts::PI)
    }

    /// Real-time solution through `z0`, `z(t) = 1/2 + log tan((t + c)/2)` with
    /// `c = 2 atan(e^{z0 − 1/2})`, valid until the first singular time.
    pub fn solution(z0: Complex64, t: Complex64) -> Complex64 {
        let c = 2.0 * (z0 - 0.5).exp().atan();
        0.5 + ((t + c) / 2.0).tan().ln()
    }

    /// Complex times `−c + nπ` at which the solution through `z0` blows up.
    pub fn singular_time(z0: Complex64, n: i64) -> Complex64 {
        -2.0 * (z0 - 0.5).exp().atan() + n as f64 * std::f64::consts::PI
    }
}

/// Newton flow of `cosh(z − 1/2)`: `−coth(z − 1/2)`; branch points at `1/2 + ikπ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoshShiftNewton;

impl VectorField for CoshShiftNewton {
    fn eval(&self, z: Complex64) -> Complex64 {
        let w = z - 0.5;
        -w.cosh() / w.sinh()
    }

    fn singularity_measure(&self, z: Complex64) -> Option<f64> {
        Some((z - 0.5).sinh().norm())
    }
}
