//! Compactifications of the plane and the critical points at infinity.
//!
//! Three views of infinity are provided: the Poincaré hemisphere (with the
//! equator dynamics and the two tangent charts), the closed unit ball, and the
//! polar-degree bookkeeping `k̂ = I − J`. Time-rescaling factors are never
//! materialised; only the rescaled fields are exposed.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{HomogPoly, RealPlanarField};

/// Tolerance on `|X² + Y² − 1|` for points that must lie on the equator.
pub const UNIT_TOLERANCE: f64 = 1e-9;
/// Default perturbation used when seeding separatrices.
pub const DEFAULT_SEED_EPS: f64 = 1e-3;

const EIGEN_ZERO: f64 = 1e-9;

/// Point on the closed northern hemisphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    /// Central projection back to the plane; `None` on the equator.
    pub fn to_plane(&self) -> Option<(f64, f64)> {
        (self.z > 0.0).then(|| (self.x / self.z, self.y / self.z))
    }
}

pub fn sphere_project(x: f64, y: f64) -> SpherePoint {
    let n = (1.0 + x * x + y * y).sqrt();
    SpherePoint { x: x / n, y: y / n, z: 1.0 / n }
}

/// `X·Q_d(X, Y) − Y·P_d(X, Y)`, homogeneous of degree `d + 1`.
pub fn equator_form(field: &RealPlanarField) -> HomogPoly {
    let d = field.degree();
    let (pd, qd) = field.homogeneous(d);
    qd.mul_x().sub(&pd.mul_y())
}

/// Rescaled dynamics on the equator, `(−Y·G, X·G)` with `G = X·Q_d − Y·P_d`.
pub fn equator_field(field: &RealPlanarField, x: f64, y: f64) -> Result<(f64, f64)> {
    let norm2 = x * x + y * y;
    if (norm2 - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NotUnit(norm2.sqrt()));
    }
    let g = equator_form(field).eval(x, y);
    Ok((-y * g, x * g))
}

/// Which coordinate is divided out in a tangent chart at the equator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    /// `β = Y/X`, `γ = Z/X`.
    X,
    /// `β = X/Y`, `γ = Z/Y`.
    Y,
}

fn pow(v: f64, n: usize) -> f64 {
    v.powi(n as i32)
}

fn chart_field(field: &RealPlanarField, chart: Chart) -> RealPlanarField {
    match chart {
        Chart::X => field.clone(),
        Chart::Y => field.swapped(),
    }
}

fn x_chart_dynamics(field: &RealPlanarField, beta: f64, gamma: f64) -> (f64, f64) {
    let d = field.degree();
    let mut db = 0.0;
    let mut dg = 0.0;
    for k in 0..=d {
        let (pk, qk) = field.homogeneous(k);
        let (p, _) = pk.eval_x_chart(beta);
        let (q, _) = qk.eval_x_chart(beta);
        db += pow(gamma, d - k) * (q - beta * p);
        dg -= pow(gamma, d + 1 - k) * p;
    }
    (db, dg)
}

fn x_chart_jacobian(field: &RealPlanarField, beta: f64, gamma: f64) -> [[f64; 2]; 2] {
    let d = field.degree();
    let mut j = [[0.0; 2]; 2];
    for k in 0..=d {
        let (pk, qk) = field.homogeneous(k);
        let (p, dp) = pk.eval_x_chart(beta);
        let (q, dq) = qk.eval_x_chart(beta);
        j[0][0] += pow(gamma, d - k) * (dq - p - beta * dp);
        if k < d {
            j[0][1] += (d - k) as f64 * pow(gamma, d - k - 1) * (q - beta * p);
        }
        j[1][0] -= pow(gamma, d + 1 - k) * dp;
        j[1][1] -= (d + 1 - k) as f64 * pow(gamma, d - k) * p;
    }
    j
}

/// Tangent-chart dynamics near the equator point `X ≠ 0`, written as
/// polynomials in `(β, γ)` so that `γ = 0` (infinity) is a regular line.
pub fn tangent_dynamics(field: &RealPlanarField, beta: f64, gamma: f64) -> (f64, f64) {
    x_chart_dynamics(field, beta, gamma)
}

/// Chart dynamics for either chart; the `Y` chart swaps the coordinate roles.
pub fn chart_dynamics(field: &RealPlanarField, chart: Chart, beta: f64, gamma: f64) -> (f64, f64) {
    x_chart_dynamics(&chart_field(field, chart), beta, gamma)
}

pub fn chart_jacobian(field: &RealPlanarField, chart: Chart, beta: f64, gamma: f64) -> [[f64; 2]; 2] {
    x_chart_jacobian(&chart_field(field, chart), beta, gamma)
}

/// Maps a plane point into the open unit ball, `u = 2x/(1 + √(1 + 4‖x‖²))`.
pub fn ball_compactify(x: [f64; 2]) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let s = 2.0 / (1.0 + (1.0 + 4.0 * r2).sqrt());
    [s * x[0], s * x[1]]
}

/// Inverse of [`ball_compactify`], `x = u/(1 − ‖u‖²)`; `None` outside the open ball.
pub fn ball_inverse(u: [f64; 2]) -> Option<[f64; 2]> {
    let w = 1.0 - (u[0] * u[0] + u[1] * u[1]);
    (w > 0.0).then(|| [u[0] / w, u[1] / w])
}

/// Rescaled compactified field on the closed ball; on the boundary it equals
/// twice the equator field.
pub fn ball_field(field: &RealPlanarField, u: [f64; 2]) -> [f64; 2] {
    let d = field.degree();
    let n2 = u[0] * u[0] + u[1] * u[1];
    let w = 1.0 - n2;
    let mut v = [0.0; 2];
    for k in 0..=d {
        let (pk, qk) = field.homogeneous(k);
        let s = pow(w, d - k);
        v[0] += s * pk.eval(u[0], u[1]);
        v[1] += s * qk.eval(u[0], u[1]);
    }
    let proj = u[0] * v[0] + u[1] * v[1];
    [
        (1.0 + n2) * v[0] - 2.0 * proj * u[0],
        (1.0 + n2) * v[1] - 2.0 * proj * u[1],
    ]
}

/// Degrees read off the inverse-polar system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolarDegrees {
    pub i: i32,
    pub j: i32,
    pub khat: i32,
}

/// `k̂ = I − J` following the case table on `d` and the leading coefficient
/// `α_d = a_d + i b_d`. The real coefficient parts are read back from the
/// field as `a_k = P_k(1, 0)`, `b_k = Q_k(1, 0)`.
pub fn khat(field: &RealPlanarField) -> Result<PolarDegrees> {
    let d = field.degree();
    if d == 0 {
        return Err(Error::Invalid("k̂ needs degree ≥ 1".into()));
    }
    let a: Vec<f64> = (0..=d).map(|k| field.homogeneous(k).0.eval(1.0, 0.0)).collect();
    let b: Vec<f64> = (0..=d).map(|k| field.homogeneous(k).1.eval(1.0, 0.0)).collect();
    let di = d as i32;
    let (i, j) = if d % 2 == 0 || (a[d] != 0.0 && b[d] != 0.0) {
        (di, di - 1)
    } else if b[d] == 0.0 {
        // θ' along θ = 0 is (1/r) Σ r^k b_k, so J drops to the top surviving b_k.
        let j = (0..=d).rev().find(|&k| b[k] != 0.0).map_or(-1, |k| k as i32 - 1);
        (di, j)
    } else {
        let i = (0..=d).rev().find(|&k| a[k] != 0.0).map_or(1, |k| (k as i32).max(1));
        (i, di - 1)
    };
    Ok(PolarDegrees { i, j, khat: i - j })
}

/// Type of an equilibrium at infinity from its chart Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    Saddle,
    Node,
    DegenerateOther,
}

/// A critical point at infinity `p ∈ ∂U`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfinityEquilibrium {
    pub p: [f64; 2],
    /// `(P_d, Q_d)(p) = alpha · p`.
    pub alpha: f64,
    pub chart: Chart,
    /// Chart coordinate of the fixed point `(β₀, 0)`.
    pub beta0: f64,
    pub chart_jacobian: [[f64; 2]; 2],
    #[serde(serialize_with = "ser_eigen")]
    pub eigenvalues: [Complex64; 2],
    pub kind: EquilibriumKind,
    /// True when `d` is even: the antipode carries the reversed flow.
    pub antipode_flow_reversed: bool,
    /// `+1` if chart time runs with physical time at this point, `−1` otherwise.
    pub orientation: f64,
}

fn ser_eigen<S: serde::Serializer>(v: &[Complex64; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
    [[v[0].re, v[0].im], [v[1].re, v[1].im]].serialize(s)
}

fn eigen2(j: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let half = Complex64::new(tr / 2.0, 0.0);
    let mut ev = [half + disc, half - disc];
    // Sorting by real part keeps output order deterministic.
    if ev[0].re > ev[1].re {
        ev.swap(0, 1);
    }
    ev
}

fn eigenvector2(j: &[[f64; 2]; 2], lambda: f64) -> Option<[f64; 2]> {
    let a = [j[0][1], lambda - j[0][0]];
    let b = [lambda - j[1][1], j[1][0]];
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if na.max(nb) <= 1e-12 * scale {
        return None;
    }
    let v = if na >= nb { a } else { b };
    let n = v[0].hypot(v[1]);
    Some([v[0] / n, v[1] / n])
}

fn classify(ev: &[Complex64; 2]) -> EquilibriumKind {
    let mag = ev[0].norm().max(ev[1].norm());
    if ev[0].norm() < EIGEN_ZERO || ev[1].norm() < EIGEN_ZERO {
        return EquilibriumKind::DegenerateOther;
    }
    let real = ev.iter().all(|l| l.im.abs() <= EIGEN_ZERO * mag.max(1.0));
    if !real {
        return EquilibriumKind::DegenerateOther;
    }
    let prod = ev[0].re * ev[1].re;
    if prod < -EIGEN_ZERO {
        EquilibriumKind::Saddle
    } else if prod > EIGEN_ZERO {
        EquilibriumKind::Node
    } else {
        EquilibriumKind::DegenerateOther
    }
}

/// Angles in `[0, π)` where `G(cos θ, sin θ)` vanishes.
fn equator_angles(g: &HomogPoly) -> Vec<f64> {
    let n = (64 * (g.degree() + 2)).max(720);
    let scale = g.max_abs_coeff();
    let h = std::f64::consts::PI / n as f64;
    let eval = |t: f64| g.eval(t.cos(), t.sin());
    let vals: Vec<f64> = (0..=n).map(|i| eval(i as f64 * h)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(i as f64 * h);
        } else if b != 0.0 && a.signum() != b.signum() {
            let (mut lo, mut hi) = (i as f64 * h, (i + 1) as f64 * h);
            let mut flo = a;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = eval(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        } else if i > 0 && a.abs() < 1e-9 * scale && a.abs() <= vals[i - 1].abs() && a.abs() <= b.abs() {
            // Even-multiplicity touch: golden-section minimisation of |G|.
            let (mut lo, mut hi) = ((i - 1) as f64 * h, (i + 1) as f64 * h);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..100 {
                let m1 = hi - phi * (hi - lo);
                let m2 = lo + phi * (hi - lo);
                if eval(m1).abs() < eval(m2).abs() {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let t = 0.5 * (lo + hi);
            if eval(t).abs() < 1e-10 * scale {
                roots.push(t);
            }
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    roots
}

/// Newton polish in the chart variable; returns `(chart, β₀, p)`.
fn refine_direction(g: &HomogPoly, theta: f64) -> (Chart, f64, [f64; 2]) {
    let (c, s) = (theta.cos(), theta.sin());
    let (chart, sigma, mut beta) = if c.abs() >= s.abs() {
        (Chart::X, c.signum(), s / c)
    } else {
        (Chart::Y, s.signum(), c / s)
    };
    let eval = |b: f64| match chart {
        Chart::X => g.eval_x_chart(b),
        Chart::Y => g.eval_y_chart(b),
    };
    let (v0, _) = eval(beta);
    if v0 != 0.0 {
        let mut best = (v0.abs(), beta);
        for _ in 0..6 {
            let (v, dv) = eval(beta);
            if dv == 0.0 || v == 0.0 {
                break;
            }
            let next = beta - v / dv;
            let r = eval(next).0.abs();
            if !(r < best.0) {
                break;
            }
            best = (r, next);
            beta = next;
        }
        beta = best.1;
    }
    let n = (1.0 + beta * beta).sqrt();
    let p = match chart {
        Chart::X => [sigma / n, sigma * beta / n],
        Chart::Y => [sigma * beta / n, sigma / n],
    };
    (chart, beta, p)
}

fn build_equilibrium(field: &RealPlanarField, chart: Chart, beta0: f64, p: [f64; 2]) -> InfinityEquilibrium {
    let d = field.degree();
    let (pd, qd) = field.homogeneous(d);
    let v = [pd.eval(p[0], p[1]), qd.eval(p[0], p[1])];
    let alpha = p[0] * v[0] + p[1] * v[1];
    let jac = chart_jacobian(field, chart, beta0, 0.0);
    let eigenvalues = eigen2(&jac);
    let axis = match chart {
        Chart::X => p[0],
        Chart::Y => p[1],
    };
    let orientation = if d >= 1 && (d - 1) % 2 == 1 { axis.signum() } else { 1.0 };
    InfinityEquilibrium {
        p,
        alpha,
        chart,
        beta0,
        chart_jacobian: jac,
        eigenvalues,
        kind: classify(&eigenvalues),
        antipode_flow_reversed: d % 2 == 0,
        orientation,
    }
}

/// All critical points at infinity, sorted by angle and closed under `p ↦ −p`.
pub fn infinity_critical_points(field: &RealPlanarField) -> Result<Vec<InfinityEquilibrium>> {
    let d = field.degree();
    if d == 0 {
        return Err(Error::Invalid("critical points at infinity need degree ≥ 1".into()));
    }
    let g = equator_form(field);
    let (pd, qd) = field.homogeneous(d);
    let scale = pd.max_abs_coeff().max(qd.max_abs_coeff());
    if g.coeffs().iter().all(|c| c.abs() <= 1e-14 * scale) {
        return Err(Error::IdentZeroEquator);
    }
    let mut out = Vec::new();
    for theta in equator_angles(&g) {
        let (chart, beta0, p) = refine_direction(&g, theta);
        let q = [-p[0], -p[1]];
        if out
            .iter()
            .any(|e: &InfinityEquilibrium| (e.p[0] - p[0]).hypot(e.p[1] - p[1]) < 1e-9)
        {
            continue;
        }
        out.push(build_equilibrium(field, chart, beta0, p));
        out.push(build_equilibrium(field, chart, beta0, q));
    }
    let angle = |p: &[f64; 2]| {
        let a = p[1].atan2(p[0]);
        if a < -1e-15 {
            a + 2.0 * std::f64::consts::PI
        } else {
            a.max(0.0)
        }
    };
    out.sort_by(|a, b| angle(&a.p).total_cmp(&angle(&b.p)));
    Ok(out)
}

/// Starting point for tracing the separatrix attached to a saddle at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparatrixSeed {
    /// Perturbed chart point `(β, γ)`.
    pub chart_point: [f64; 2],
    /// Chart eigenvector used for the perturbation (unit length).
    pub eigenvector: [f64; 2],
    pub sphere: SpherePoint,
    #[serde(serialize_with = "ser_complex")]
    pub plane: Complex64,
}

fn ser_complex<S: serde::Serializer>(v: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [v.re, v.im].serialize(s)
}

/// Perturbs the chart fixed point by `eps` along the eigenvector transverse
/// to the equator and maps the result back to the finite plane.
pub fn separatrix_seed(eq: &InfinityEquilibrium, eps: f64) -> Result<SeparatrixSeed> {
    if eq.kind != EquilibriumKind::Saddle {
        return Err(Error::NotASaddle);
    }
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::Invalid(format!("seed eps must lie in (0, 0.1], got {eps}")));
    }
    let mut best: Option<[f64; 2]> = None;
    for lambda in eq.eigenvalues {
        if let Some(v) = eigenvector2(&eq.chart_jacobian, lambda.re) {
            if best.map_or(true, |b| v[1].abs() > b[1].abs()) {
                best = Some(v);
            }
        }
    }
    let mut v = best.ok_or(Error::DegenerateEigenvector)?;
    if v[1] < 0.0 {
        v = [-v[0], -v[1]];
    }
    if v[1].abs() < 1e-9 {
        return Err(Error::DegenerateEigenvector);
    }
    let sigma = match eq.chart {
        Chart::X => eq.p[0].signum(),
        Chart::Y => eq.p[1].signum(),
    };
    // γ must carry the sign of the divided-out coordinate so that Z > 0.
    let s = sigma * v[1].signum();
    let beta = eq.beta0 + s * eps * v[0];
    let gamma = s * eps * v[1];
    let n = (1.0 + beta * beta + gamma * gamma).sqrt();
    let (sphere, plane) = match eq.chart {
        Chart::X => (
            SpherePoint { x: sigma / n, y: sigma * beta / n, z: sigma * gamma / n },
            Complex64::new(1.0 / gamma, beta / gamma),
        ),
        Chart::Y => (
            SpherePoint { x: sigma * beta / n, y: sigma / n, z: sigma * gamma / n },
            Complex64::new(beta / gamma, 1.0 / gamma),
        ),
    };
    Ok(SeparatrixSeed { chart_point: [beta, gamma], eigenvector: v, sphere, plane })
}

/// The three equivalent characterisations of a critical point at infinity,
/// each evaluated under the same absolute tolerance.
pub mod criteria {
    use super::*;

    fn leading(field: &RealPlanarField, p: [f64; 2]) -> [f64; 2] {
        let (pd, qd) = field.homogeneous(field.degree());
        [pd.eval(p[0], p[1]), qd.eval(p[0], p[1])]
    }

    /// `p₁ Q_d(p) − p₂ P_d(p) = 0`.
    pub fn determinant(field: &RealPlanarField, p: [f64; 2], tol: f64) -> bool {
        let v = leading(field, p);
        (p[0] * v[1] - p[1] * v[0]).abs() <= tol
    }

    /// `(P_d, Q_d)(p) = α p` for some real `α`, with `α` read off the
    /// dominant component of `p`.
    pub fn collinear(field: &RealPlanarField, p: [f64; 2], tol: f64) -> bool {
        let v = leading(field, p);
        let (i, j) = if p[0].abs() >= p[1].abs() { (0, 1) } else { (1, 0) };
        let alpha = v[i] / p[i];
        (v[j] - alpha * p[j]).abs() <= tol
    }

    /// `(P_d, Q_d)(p) = (pᵀ (P_d, Q_d)(p)) p`.
    pub fn projection(field: &RealPlanarField, p: [f64; 2], tol: f64) -> bool {
        let v = leading(field, p);
        let s = p[0] * v[0] + p[1] * v[1];
        (v[0] - s * p[0]).abs().max((v[1] - s * p[1]).abs()) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ComplexPoly;

    fn z2p1() -> RealPlanarField {
        ComplexPoly::from_real(&[1.0, 0.0, 1.0]).to_real_field()
    }

    #[test]
    fn sphere_projection_examples() {
        assert_eq!(sphere_project(0.0, 0.0), SpherePoint { x: 0.0, y: 0.0, z: 1.0 });
        let s = sphere_project(1.0, 0.0);
        let h = 0.5f64.sqrt();
        assert!((s.x - h).abs() < 1e-15 && s.y == 0.0 && (s.z - h).abs() < 1e-15);
        assert_eq!(sphere_project(2.0, -3.0).to_plane().map(|(x, y)| (x.round(), y.round())), Some((2.0, -3.0)));
    }

    #[test]
    fn equator_field_z2p1() {
        let f = z2p1();
        let g = equator_form(&f);
        for k in 0..16 {
            let t = k as f64 * 0.4;
            let (x, y) = (t.cos(), t.sin());
            assert!((g.eval(x, y) - y * (x * x + y * y)).abs() < 1e-14);
        }
        assert_eq!(equator_field(&f, 1.0, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(equator_field(&f, 0.0, 1.0).unwrap(), (-1.0, 0.0));
        assert_eq!(equator_field(&f, 0.5, 0.5), Err(Error::NotUnit(0.5f64.sqrt())));
    }

    #[test]
    fn z2p1_infinity() {
        let eqs = infinity_critical_points(&z2p1()).unwrap();
        assert_eq!(eqs.len(), 2);
        assert_eq!(eqs[0].p, [1.0, 0.0]);
        assert_eq!(eqs[1].p, [-1.0, 0.0]);
        assert_eq!(eqs[0].alpha, 1.0);
        assert_eq!(eqs[1].alpha, -1.0);
        for e in &eqs {
            assert_eq!(e.kind, EquilibriumKind::Saddle);
            assert_eq!(e.chart_jacobian, [[1.0, 0.0], [0.0, -1.0]]);
            assert!(e.antipode_flow_reversed);
        }
        assert_eq!(eqs[0].orientation, 1.0);
        assert_eq!(eqs[1].orientation, -1.0);
    }

    #[test]
    fn tangent_dynamics_z2p1() {
        let f = z2p1();
        for &(b, g) in &[(0.3, -0.2), (1.5, 0.7), (-2.0, 0.1), (0.0, 0.0)] {
            let (db, dg) = tangent_dynamics(&f, b, g);
            assert!((db - (b + b * b * b - b * g * g)).abs() < 1e-13);
            assert!((dg - (-g + b * b * g - g * g * g)).abs() < 1e-13);
        }
    }

    #[test]
    fn real_leading_coefficient_has_axis_equilibria() {
        for coeffs in [vec![0.3, 1.0, -2.0, 0.5], vec![1.0, 0.0, 0.0, 0.0, -3.0], vec![2.0, -1.0, 4.0]] {
            let mut c: Vec<Complex64> = coeffs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            c[0].im = 0.7;
            let f = ComplexPoly::new(c).to_real_field();
            assert_eq!(equator_form(&f).eval(1.0, 0.0), 0.0);
            assert_eq!(equator_form(&f).eval(-1.0, 0.0), 0.0);
            let eqs = infinity_critical_points(&f).unwrap();
            assert!(eqs.iter().any(|e| e.p == [1.0, 0.0]));
            assert!(eqs.iter().any(|e| e.p == [-1.0, 0.0]));
        }
    }

    #[test]
    fn identically_zero_equator_is_reported() {
        let f = ComplexPoly::from_real(&[1.0, 2.0]).to_real_field();
        assert_eq!(infinity_critical_points(&f), Err(Error::IdentZeroEquator));
    }

    #[test]
    fn y_chart_equilibria_for_cubic() {
        let f = ComplexPoly::from_real(&[0.0, 0.0, 0.0, 1.0]).to_real_field();
        let eqs = infinity_critical_points(&f).unwrap();
        assert_eq!(eqs.len(), 4);
        let up = eqs.iter().find(|e| e.p[1] > 0.9).unwrap();
        assert_eq!(up.chart, Chart::Y);
        assert!((up.alpha + 1.0).abs() < 1e-12);
    }

    #[test]
    fn khat_table() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let even = ComplexPoly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]).to_real_field();
        assert_eq!(khat(&even).unwrap().khat, 1);
        let odd_mixed = ComplexPoly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)]).to_real_field();
        assert_eq!(khat(&odd_mixed).unwrap(), PolarDegrees { i: 3, j: 2, khat: 1 });
        let odd_real = ComplexPoly::new(vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).to_real_field();
        assert_eq!(khat(&odd_real).unwrap(), PolarDegrees { i: 3, j: -1, khat: 4 });
        let odd_real2 = ComplexPoly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 1.0), c(2.0, 0.0)]).to_real_field();
        assert_eq!(khat(&odd_real2).unwrap(), PolarDegrees { i: 3, j: 1, khat: 2 });
        let odd_imag = ComplexPoly::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]).to_real_field();
        let k = khat(&odd_imag).unwrap();
        assert_eq!(k, PolarDegrees { i: 1, j: 2, khat: -1 });
        assert!(k.khat <= 1);
    }

    #[test]
    fn seed_z2p1() {
        let eqs = infinity_critical_points(&z2p1()).unwrap();
        let eps = 1e-3;
        let s = separatrix_seed(&eqs[0], eps).unwrap();
        assert_eq!(s.eigenvector, [0.0, 1.0]);
        assert!((s.plane - Complex64::new(1.0 / eps, 0.0)).norm() < 1e-9);
        let n = (1.0 + eps * eps).sqrt();
        assert!((s.sphere.x - 1.0 / n).abs() < 1e-15);
        assert_eq!(s.sphere.y, 0.0);
        assert!((s.sphere.z - eps / n).abs() < 1e-15);
        let back = separatrix_seed(&eqs[1], eps).unwrap();
        assert!((back.plane - Complex64::new(-1.0 / eps, 0.0)).norm() < 1e-9);
        assert!(back.sphere.z > 0.0);
        assert!(separatrix_seed(&eqs[0], 0.5).is_err());
    }

    #[test]
    fn degenerate_eigenvector_rejected() {
        let eq = InfinityEquilibrium {
            p: [1.0, 0.0],
            alpha: 1.0,
            chart: Chart::X,
            beta0: 0.0,
            chart_jacobian: [[1.0, 1.0], [0.0, 1.0]],
            eigenvalues: [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            kind: EquilibriumKind::Saddle,
            antipode_flow_reversed: false,
            orientation: 1.0,
        };
        assert_eq!(separatrix_seed(&eq, 1e-3), Err(Error::DegenerateEigenvector));
    }

    #[test]
    fn ball_roundtrip_and_boundary() {
        assert_eq!(ball_compactify([0.0, 0.0]), [0.0, 0.0]);
        let x = [3.0, -4.0];
        let u = ball_compactify(x);
        assert!(u[0].hypot(u[1]) < 1.0);
        let back = ball_inverse(u).unwrap();
        assert!((back[0] - 3.0).abs() < 1e-12 && (back[1] + 4.0).abs() < 1e-12);
        assert!(ball_inverse([1.0, 0.0]).is_none());
        let f = z2p1();
        let t: f64 = 0.9;
        let b = ball_field(&f, [t.cos(), t.sin()]);
        let e = equator_field(&f, t.cos(), t.sin()).unwrap();
        assert!((b[0] - 2.0 * e.0).abs() < 1e-13 && (b[1] - 2.0 * e.1).abs() < 1e-13);
    }
}
