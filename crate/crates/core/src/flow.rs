//! Real-time flows: integration, Newton fields, transit times, periodic
//! orbits, winding numbers and separatrices.

use num_complex::Complex64;
use serde::Serialize;

use crate::compactify::{separatrix_seed, EquilibriumKind, InfinityEquilibrium};
use crate::error::{Error, Result};
use crate::ode::{self, dp_substep, Control, Options, StepInfo, Termination, Trajectory, VectorField};
use crate::poly::ComplexPoly;

pub fn integrate<F: VectorField + ?Sized>(field: &F, z0: Complex64, t_span: (f64, f64), opts: &Options) -> Result<Trajectory> {
    ode::solve(field, z0, t_span.0, t_span.1, opts, |_| Control::Continue)
}

/// Newton field of a polynomial, `−f/f'`, or its desingularised form
/// `−f·conj(f')` which has the same orbits and no poles.
#[derive(Debug, Clone)]
pub struct NewtonField {
    f: ComplexPoly,
    desingularized: bool,
}

pub fn newton_field(f: &ComplexPoly, desingularized: bool) -> Result<NewtonField> {
    if f.degree() == 0 {
        return Err(Error::Invalid("Newton field needs a non-constant polynomial".into()));
    }
    Ok(NewtonField { f: f.clone(), desingularized })
}

impl NewtonField {
    pub fn poly(&self) -> &ComplexPoly {
        &self.f
    }

    pub fn is_desingularized(&self) -> bool {
        self.desingularized
    }
}

impl VectorField for NewtonField {
    fn eval(&self, z: Complex64) -> Complex64 {
        let (v, d) = self.f.eval_with_derivative(z);
        if self.desingularized {
            -v * d.conj()
        } else {
            -v / d
        }
    }

    fn singularity_measure(&self, z: Complex64) -> Option<f64> {
        Some(self.f.eval_with_derivative(z).1.norm())
    }
}

const SINGULAR_TOL: f64 = 1e-12;
const TRANSIT_TOL: f64 = 1e-10;

fn simpson<G: Fn(f64) -> Result<Complex64>>(
    g: &G,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm)?;
    let frm = g(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// `∫ dz/f(z)` along a sampled orbit polyline, adaptive Simpson on each chord.
pub fn transit_time<F: VectorField + ?Sized>(field: &F, path: &[Complex64]) -> Result<Complex64> {
    let total: f64 = path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let mut acc = Complex64::new(0.0, 0.0);
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d = b - a;
        if d.norm() == 0.0 {
            continue;
        }
        let g = |s: f64| -> Result<Complex64> {
            let z = a + s * d;
            let v = field.eval(z);
            if !(v.norm() >= SINGULAR_TOL) {
                return Err(Error::SingularOnPath(z));
            }
            Ok(d / v)
        };
        let (ga, gm, gb) = (g(0.0)?, g(0.5)?, g(1.0)?);
        let whole = (ga + 4.0 * gm + gb) / 6.0;
        let tol = TRANSIT_TOL * d.norm() / total;
        acc += simpson(&g, 0.0, 1.0, ga, gm, gb, whole, tol, 40)?;
    }
    Ok(acc)
}

/// Index of a closed polyline about `center` (the closing segment is implied).
pub fn winding_number(samples: &[Complex64], center: Complex64) -> Result<i64> {
    if samples.len() < 3 {
        return Err(Error::Invalid("winding number needs at least three samples".into()));
    }
    let n = samples.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = samples[i] - center;
        let b = samples[(i + 1) % n] - center;
        if point_segment_distance(center, samples[i], samples[(i + 1) % n]) <= 1e-12 * (1.0 + center.norm()) {
            return Err(Error::CenterOnOrbit);
        }
        total += (b / a).arg();
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

pub(crate) fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + s * d)).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicOptions {
    pub closure_tol: f64,
    /// Minimum cosine between the velocities at closure and at the start.
    pub velocity_cos: f64,
    pub t_limit: f64,
    pub ode: Options,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        PeriodicOptions {
            closure_tol: 1e-8,
            velocity_cos: 0.999,
            t_limit: 200.0,
            ode: Options { rtol: 1e-12, ..Options::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    #[serde(skip)]
    pub samples: Vec<Complex64>,
    #[serde(skip)]
    pub times: Vec<f64>,
    pub period: f64,
    pub gap: f64,
    /// Time average of the orbit, which is the enclosed equilibrium for
    /// holomorphic flows.
    #[serde(serialize_with = "crate::ode::ser_c")]
    pub center: Complex64,
    pub winding: i64,
}

impl PeriodicOrbit {
    pub fn trajectory(&self) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states: self.samples.clone(),
            termination: Termination::PeriodClosed { period: self.period, winding: self.winding },
        }
    }
}

fn phi(z: Complex64, f: Complex64, z0: Complex64) -> f64 {
    ((z - z0).conj() * f).re
}

/// Integrates forward from `z0` until the orbit returns to `z0` with the same
/// heading; `None` on escape, stall or time limit.
pub fn detect_periodic<F: VectorField + ?Sized>(field: &F, z0: Complex64, opts: &PeriodicOptions) -> Result<Option<PeriodicOrbit>> {
    let f_start = field.eval(z0);
    if f_start.norm() < opts.ode.stall_tol * (1.0 + z0.norm()) {
        return Ok(None);
    }
    let mut left = false;
    let mut closure: Option<(f64, Complex64, Complex64)> = None;
    let mut rhs = vec![f_start];
    let observer = |s: &StepInfo| {
        rhs.push(s.f1);
        if (s.z1 - z0).norm() > 100.0 * opts.closure_tol {
            left = true;
        }
        let p0 = phi(s.z0, s.f0, z0);
        let p1 = phi(s.z1, s.f1, z0);
        if left && p0 < 0.0 && p1 >= 0.0 {
            let (mut lo, mut hi) = (0.0, s.h());
            let mut best = (s.t1, s.z1, s.f1);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let (zm, fm, _) = dp_substep(field, s.z0, s.f0, mid);
                best = (s.t0 + mid, zm, fm);
                if phi(zm, fm, z0) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (_, zc, fc) = best;
            let cos = (fc.conj() * f_start).re / (fc.norm() * f_start.norm());
            if (zc - z0).norm() < opts.closure_tol && cos > opts.velocity_cos {
                closure = Some(best);
                return Control::Stop;
            }
        }
        Control::Continue
    };
    let tr = ode::solve(field, z0, 0.0, opts.t_limit, &opts.ode, observer)?;
    let Some((tc, zc, fc)) = closure else {
        return Ok(None);
    };
    let mut times = tr.times;
    let mut samples = tr.states;
    times.pop();
    samples.pop();
    rhs.pop();
    times.push(tc);
    samples.push(zc);
    rhs.push(fc);
    // ∮ z dz/f over one period equals T·c for a simple zero c enclosed.
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..times.len() - 1 {
        let h = times[i + 1] - times[i];
        acc += h / 2.0 * (samples[i] + samples[i + 1]) + h * h / 12.0 * (rhs[i] - rhs[i + 1]);
    }
    let center = acc / tc;
    samples.pop();
    times.pop();
    let winding = winding_number(&samples, center)?;
    samples.push(zc);
    times.push(tc);
    Ok(Some(PeriodicOrbit { samples, times, period: tc, gap: (zc - z0).norm(), center, winding }))
}

/// Traces the separatrix attached to a saddle at infinity: seeded
/// `eps`-close to the equator, integrated backward when `alpha > 0`.
pub fn trace_separatrix(f: &ComplexPoly, eq: &InfinityEquilibrium, eps: f64, t_limit: f64, opts: &Options) -> Result<Trajectory> {
    if eq.kind != EquilibriumKind::Saddle {
        return Err(Error::NotASaddle);
    }
    let seed = separatrix_seed(eq, eps)?;
    let end = if eq.alpha > 0.0 { -t_limit } else { t_limit };
    integrate(f, seed.plane, (0.0, end), opts)
}

/// Whether the separatrix runs into (`Incoming`) or out of the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparatrixRole {
    Incoming,
    Outgoing,
}

pub fn separatrix_role(eq: &InfinityEquilibrium) -> SeparatrixRole {
    if eq.alpha > 0.0 {
        SeparatrixRole::Incoming
    } else {
        SeparatrixRole::Outgoing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexFlip {
    #[serde(serialize_with = "ser_pair")]
    pub sides: [Complex64; 2],
    #[serde(serialize_with = "ser_pair")]
    pub centers: [Complex64; 2],
    pub windings: [i64; 2],
    pub product: i64,
}

fn ser_pair<S: serde::Serializer>(v: &[Complex64; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
    [[v[0].re, v[0].im], [v[1].re, v[1].im]].serialize(s)
}

fn same_point(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-4 * (1.0 + a.norm())
}

/// Orbits through `z_star ± eps·n`, `n` the unit normal of the field at
/// `z_star`, and the product of their indices.
pub fn index_flip<F: VectorField + ?Sized>(field: &F, z_star: Complex64, eps: f64, opts: &PeriodicOptions) -> Result<IndexFlip> {
    let v = field.eval(z_star);
    let n = if v.norm() > 1e-12 { Complex64::i() * v / v.norm() } else { Complex64::new(1.0, 0.0) };
    let sides = [z_star + eps * n, z_star - eps * n];
    let a = detect_periodic(field, sides[0], opts)?.ok_or(Error::NotBetweenCenters)?;
    let b = detect_periodic(field, sides[1], opts)?.ok_or(Error::NotBetweenCenters)?;
    if same_point(a.center, b.center) {
        return Err(Error::NotBetweenCenters);
    }
    Ok(IndexFlip {
        sides,
        centers: [a.center, b.center],
        windings: [a.winding, b.winding],
        product: a.winding * b.winding,
    })
}

pub fn index_flip_check<F: VectorField + ?Sized>(field: &F, z_star: Complex64, eps: f64) -> Result<bool> {
    Ok(index_flip(field, z_star, eps, &PeriodicOptions::default())?.product == -1)
}

/// Bisects over `Im z0 ∈ [im_lo, im_hi]` at fixed `Re z0 = re` for the
/// boundary between the period annuli of two different centers. A start
/// point whose orbit does not close is taken to lie on the separatrix.
pub fn locate_separatrix<F: VectorField + ?Sized>(
    field: &F,
    re: f64,
    im_lo: f64,
    im_hi: f64,
    tol: f64,
    opts: &PeriodicOptions,
) -> Result<f64> {
    let center_at = |y: f64| -> Result<Option<Complex64>> {
        Ok(detect_periodic(field, Complex64::new(re, y), opts)?.map(|o| o.center))
    };
    let c_lo = center_at(im_lo)?.ok_or(Error::NotBetweenCenters)?;
    let c_hi = center_at(im_hi)?.ok_or(Error::NotBetweenCenters)?;
    if same_point(c_lo, c_hi) {
        return Err(Error::NotBetweenCenters);
    }
    let (mut lo, mut hi) = (im_lo, im_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        // Blow-up in finite time also means the orbit does not close.
        let c = match center_at(mid) {
            Err(Error::StepUnderflow { .. } | Error::TooManySteps { .. }) => None,
            r => r?,
        };
        match c {
            None => return Ok(mid),
            Some(c) if same_point(c, c_lo) => lo = mid,
            Some(c) if same_point(c, c_hi) => hi = mid,
            Some(_) => return Err(Error::NotBetweenCenters),
        }
    }
    Ok(0.5 * (lo + hi))
}
