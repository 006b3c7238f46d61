//! Dormand–Prince 5(4) integrator for complex scalar autonomous ODEs.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::ComplexPoly;

/// Right-hand side of `z' = F(z)`.
pub trait VectorField: Sync {
    fn eval(&self, z: Complex64) -> Complex64;

    /// Quantity whose vanishing marks a singularity of the field (for Newton
    /// fields `|f'(z)|`); `None` for fields without one.
    fn singularity_measure(&self, _z: Complex64) -> Option<f64> {
        None
    }
}

impl<F> VectorField for F
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval(&self, z: Complex64) -> Complex64 {
        self(z)
    }
}

impl VectorField for ComplexPoly {
    fn eval(&self, z: Complex64) -> Complex64 {
        ComplexPoly::eval(self, z)
    }
}

/// Field multiplied by a constant complex factor, e.g. a time direction `e^{iφ}`.
pub struct Rotated<'a, F: VectorField + ?Sized> {
    pub field: &'a F,
    pub factor: Complex64,
}

impl<F: VectorField + ?Sized> VectorField for Rotated<'_, F> {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.factor * self.field.eval(z)
    }

    fn singularity_measure(&self, z: Complex64) -> Option<f64> {
        self.field.singularity_measure(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    pub escape_radius: f64,
    /// Stop once `|F(z)| < stall_tol·(1 + |z|)` for three consecutive steps.
    pub stall_detection: bool,
    pub stall_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rtol: 1e-10,
            atol: 1e-14,
            h0: None,
            h_max: f64::INFINITY,
            max_steps: 500_000,
            escape_radius: 1e8,
            stall_detection: true,
            stall_tol: 1e-13,
        }
    }
}

impl Options {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol >= 0.0 && self.h_max > 0.0 && self.stall_tol > 0.0) {
            return Err(Error::Invalid("tolerances and h_max must be positive".into()));
        }
        if !(self.escape_radius > 0.0) {
            return Err(Error::Invalid("escape radius must be positive".into()));
        }
        Ok(())
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    TimeLimit,
    Escaped {
        #[serde(serialize_with = "crate::ode::ser_c")]
        direction: Complex64,
        t_max: f64,
    },
    PeriodClosed { period: f64, winding: i64 },
    StalledAtEquilibrium,
    /// Stopped by the step observer.
    Interrupted,
}

pub(crate) fn ser_c<S: serde::Serializer>(v: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [v.re, v.im].serialize(s)
}

/// Sampled solution. Times are monotone in the direction of integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Complex64>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> (f64, Complex64) {
        (*self.times.last().unwrap(), *self.states.last().unwrap())
    }
}

/// One accepted step, passed to observers.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub t0: f64,
    pub z0: Complex64,
    pub f0: Complex64,
    pub t1: f64,
    pub z1: Complex64,
    pub f1: Complex64,
}

impl StepInfo {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }
}

pub enum Control {
    Continue,
    Stop,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b̂ of the embedded fourth-order solution
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// A single Dormand–Prince step of size `h` from `(z, f = F(z))`.
/// Returns `(z_new, F(z_new), error estimate)`.
pub fn dp_substep<F: VectorField + ?Sized>(
    field: &F,
    z: Complex64,
    f: Complex64,
    h: f64,
) -> (Complex64, Complex64, Complex64) {
    let k1 = f;
    let k2 = field.eval(z + h * (A21 * k1));
    let k3 = field.eval(z + h * (A31 * k1 + A32 * k2));
    let k4 = field.eval(z + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = field.eval(z + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = field.eval(z + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let z1 = z + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = field.eval(z1);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    (z1, k7, err)
}

fn initial_step<F: VectorField + ?Sized>(field: &F, z: Complex64, f: Complex64, opts: &Options) -> f64 {
    let sc = opts.atol + opts.rtol * z.norm();
    let d0 = z.norm() / sc.max(1e-300);
    let d1 = f.norm() / sc.max(1e-300);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let z1 = z + h0 * f;
    let d2 = (field.eval(z1) - f).norm() / sc.max(1e-300) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let h = (100.0 * h0).min(h1);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        1e-6
    }
}

/// Integrates from `t0` towards `t1` (either direction), calling `observer`
/// after every accepted step.
pub fn solve<F, O>(field: &F, z0: Complex64, t0: f64, t1: f64, opts: &Options, mut observer: O) -> Result<Trajectory>
where
    F: VectorField + ?Sized,
    O: FnMut(&StepInfo) -> Control,
{
    opts.validate()?;
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut z = z0;
    let mut f = field.eval(z);
    let mut times = vec![t];
    let mut states = vec![z];
    if !f.is_finite() {
        return Err(Error::StepUnderflow { t, z });
    }
    if t1 == t0 {
        return Ok(Trajectory { times, states, termination: Termination::TimeLimit });
    }
    let span = (t1 - t0).abs();
    let mut h = opts.h0.unwrap_or_else(|| initial_step(field, z, f, opts)).min(opts.h_max).min(span);
    let mut stall = 0usize;
    let mut steps = 0usize;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::TooManySteps { t });
        }
        steps += 1;
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let hh = if last { remaining } else { h };
        let (zn, fn_, err) = dp_substep(field, z, f, dir * hh);
        let scale = opts.atol + opts.rtol * z.norm().max(zn.norm());
        let e = err.norm() / scale;
        if !(e.is_finite() && zn.is_finite() && fn_.is_finite()) || e > 1.0 {
            let factor = if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.2, 1.0) } else { 0.2 };
            h = hh * factor;
            if h < 1e-15 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, z });
            }
            continue;
        }
        let info = StepInfo { t0: t, z0: z, f0: f, t1: if last { t1 } else { t + dir * hh }, z1: zn, f1: fn_ };
        t = info.t1;
        let z_prev = z;
        z = zn;
        f = fn_;
        times.push(t);
        states.push(z);
        if z.norm() > opts.escape_radius {
            let d = z - z_prev;
            let direction = if d.norm() > 0.0 { d / d.norm() } else { z / z.norm() };
            return Ok(Trajectory { times, states, termination: Termination::Escaped { direction, t_max: t } });
        }
        if let Control::Stop = observer(&info) {
            return Ok(Trajectory { times, states, termination: Termination::Interrupted });
        }
        if opts.stall_detection {
            if f.norm() < opts.stall_tol * (1.0 + z.norm()) {
                stall += 1;
                if stall >= 3 {
                    return Ok(Trajectory { times, states, termination: Termination::StalledAtEquilibrium });
                }
            } else {
                stall = 0;
            }
        }
        if last {
            return Ok(Trajectory { times, states, termination: Termination::TimeLimit });
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h = (hh * factor).min(opts.h_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential() {
        let tr = solve(&|z: Complex64| z, Complex64::new(1.0, 0.0), 0.0, 1.0, &Options::default(), |_| Control::Continue).unwrap();
        let (t, z) = tr.last();
        assert_eq!(t, 1.0);
        assert!((z - Complex64::new(std::f64::consts::E, 0.0)).norm() < 1e-9);
        assert_eq!(tr.termination, Termination::TimeLimit);
    }

    #[test]
    fn rotation_backward() {
        let i = Complex64::i();
        let tr = solve(&|z: Complex64| i * z, Complex64::new(1.0, 0.0), 0.0, -2.0, &Options::default(), |_| Control::Continue).unwrap();
        let (_, z) = tr.last();
        assert!((z - (-2.0 * i).exp()).norm() < 1e-9);
        assert!(tr.times.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn tangent_blow_up() {
        let f = |z: Complex64| z * z + 1.0;
        let tr = solve(&f, Complex64::new(0.0, 0.0), 0.0, 10.0, &Options::default(), |_| Control::Continue).unwrap();
        match tr.termination {
            Termination::Escaped { direction, t_max } => {
                assert!((t_max - std::f64::consts::FRAC_PI_2).abs() < 1e-4);
                assert!((direction - Complex64::new(1.0, 0.0)).norm() < 1e-3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stall_at_equilibrium() {
        let f = |z: Complex64| -z;
        let tr = solve(&f, Complex64::new(1.0, 1.0), 0.0, 1e3, &Options::default(), |_| Control::Continue).unwrap();
        assert_eq!(tr.termination, Termination::StalledAtEquilibrium);
    }

    #[test]
    fn observer_stops() {
        let mut n = 0;
        let tr = solve(&|_z: Complex64| Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.0, 100.0, &Options { h_max: 0.1, ..Options::default() }, |_| {
            n += 1;
            if n == 5 { Control::Stop } else { Control::Continue }
        })
        .unwrap();
        assert_eq!(tr.termination, Termination::Interrupted);
        assert_eq!(tr.states.len(), 6);
    }

    #[test]
    fn too_many_steps() {
        let opts = Options { max_steps: 10, h_max: 1e-3, ..Options::default() };
        let r = solve(&|z: Complex64| z, Complex64::new(1.0, 0.0), 0.0, 1.0, &opts, |_| Control::Continue);
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
    }
}
