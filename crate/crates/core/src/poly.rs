//! Complex polynomials and their identification with real planar vector fields.
//!
//! A polynomial `f(z) = Σ α_k z^k` with `α_k = a_k + i b_k` drives the flow
//! `z' = f(z)`. Writing `z = x + iy` turns it into the real system
//! `x' = P(x, y)`, `y' = Q(x, y)` where the homogeneous parts are
//! `P_k = a_k ξ_k − b_k η_k` and `Q_k = a_k η_k + b_k ξ_k`, with
//! `(x + iy)^k = ξ_k + i η_k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative modulus below which a coefficient does not count towards the degree.
pub const DEGREE_TOLERANCE: f64 = 1e-14;

/// Dense complex polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    /// Builds a polynomial, dropping trailing coefficients that are negligible
    /// relative to the largest one.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while coeffs.len() > 1 {
            let last = coeffs[coeffs.len() - 1].norm();
            if last < DEGREE_TOLERANCE * scale || last == 0.0 {
                coeffs.pop();
            } else {
                break;
            }
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `[[re, im], ...]` pairs in ascending degree, the CLI input format.
    pub fn from_pairs(pairs: &[[f64; 2]]) -> Self {
        Self::new(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }

    /// Parses the JSON pair-list syntax, e.g. `[[1,0],[0,0],[1,0]]` for `z²+1`.
    pub fn from_json(text: &str) -> Result<Self> {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("polynomial JSON: {e}")))?;
        if pairs.is_empty() {
            return Err(Error::Invalid("polynomial needs at least one coefficient".into()));
        }
        if pairs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("polynomial coefficients must be finite".into()));
        }
        Ok(Self::from_pairs(&pairs))
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.coeffs.iter().map(|c| [c.re, c.im]).collect()
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> ComplexPoly {
        if self.coeffs.len() == 1 {
            return ComplexPoly::new(vec![Complex64::new(0.0, 0.0)]);
        }
        ComplexPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// All complex roots: eigenvalues of the companion matrix, each polished
    /// by a few Newton steps on `f` itself.
    pub fn roots(&self) -> Vec<Complex64> {
        let d = self.degree();
        if d == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        if d == 1 {
            return vec![-self.coeffs[0] / lead];
        }
        let mut companion = DMatrix::<Complex64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        let eig = match nalgebra::linalg::Schur::try_new(companion, 1e-15, 10_000) {
            Some(schur) => {
                let (_, t) = schur.unpack();
                t.diagonal().iter().copied().collect::<Vec<_>>()
            }
            None => return Vec::new(),
        };
        eig.into_iter().map(|r| self.polish_root(r)).collect()
    }

    fn polish_root(&self, mut z: Complex64) -> Complex64 {
        let mut best = (self.eval(z).norm(), z);
        for _ in 0..8 {
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == 0.0 {
                break;
            }
            z -= p / dp;
            let r = self.eval(z).norm();
            if !r.is_finite() {
                break;
            }
            if r < best.0 {
                best = (r, z);
            }
        }
        best.1
    }

    /// The real planar field `(P, Q)` identified with `z' = f(z)`.
    pub fn to_real_field(&self) -> RealPlanarField {
        let d = self.degree();
        let mut p_parts = Vec::with_capacity(d + 1);
        let mut q_parts = Vec::with_capacity(d + 1);
        for (k, alpha) in self.coeffs.iter().enumerate() {
            let (xi, eta) = xi_eta_coeffs(k);
            let (a, b) = (alpha.re, alpha.im);
            p_parts.push(HomogPoly::new(
                k,
                xi.iter().zip(&eta).map(|(x, e)| a * x - b * e).collect(),
            ));
            q_parts.push(HomogPoly::new(
                k,
                xi.iter().zip(&eta).map(|(x, e)| a * e + b * x).collect(),
            ));
        }
        RealPlanarField::new(RealPoly2::from_parts(p_parts), RealPoly2::from_parts(q_parts))
    }
}

impl Serialize for ComplexPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        if pairs.is_empty() {
            return Err(serde::de::Error::custom("empty coefficient list"));
        }
        Ok(Self::from_pairs(&pairs))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of `ξ_k` and `η_k` by power of `y`: entry `j` multiplies
/// `x^{k−j} y^j`.
pub fn xi_eta_coeffs(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xi = vec![0.0; k + 1];
    let mut eta = vec![0.0; k + 1];
    for j in 0..=k {
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * binomial(k, j).round();
        if j % 2 == 0 {
            xi[j] = c;
        } else {
            eta[j] = c;
        }
    }
    (xi, eta)
}

/// `(ξ_k(x, y), η_k(x, y))` from the binomial sums, so that
/// `(x + iy)^k = ξ_k + i η_k`.
pub fn xi_eta(k: usize, x: f64, y: f64) -> (f64, f64) {
    let mut xi = 0.0;
    for l in 0..=k / 2 {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        xi += binomial(k, 2 * l) * sign * x.powi((k - 2 * l) as i32) * y.powi((2 * l) as i32);
    }
    let mut eta = 0.0;
    if k >= 1 {
        for l in 0..=(k - 1) / 2 {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            eta += binomial(k, 2 * l + 1)
                * sign
                * x.powi((k - 2 * l - 1) as i32)
                * y.powi((2 * l + 1) as i32);
        }
    }
    (xi, eta)
}

/// Homogeneous real polynomial of fixed degree; `coeffs[j]` multiplies `x^{deg−j} y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogPoly {
    degree: usize,
    coeffs: Vec<f64>,
}

impl HomogPoly {
    pub fn new(degree: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), degree + 1, "homogeneous part needs degree+1 coefficients");
        Self { degree, coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self::new(degree, vec![0.0; degree + 1])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in y/x is unsafe at x = 0, so accumulate powers directly.
        let n = self.degree;
        let mut xp = vec![1.0; n + 1];
        let mut yp = vec![1.0; n + 1];
        for i in 1..=n {
            xp[i] = xp[i - 1] * x;
            yp[i] = yp[i - 1] * y;
        }
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * xp[n - j] * yp[j])
            .sum()
    }

    /// Dehomogenised value `h(1, t)` and its derivative in `t`.
    pub fn eval_x_chart(&self, t: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for &c in self.coeffs.iter().rev() {
            dv = dv * t + v;
            v = v * t + c;
        }
        (v, dv)
    }

    /// Dehomogenised value `h(t, 1)` and its derivative in `t`.
    pub fn eval_y_chart(&self, t: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for &c in &self.coeffs {
            dv = dv * t + v;
            v = v * t + c;
        }
        (v, dv)
    }

    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let n = self.degree;
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate() {
            let px = n - j;
            if px > 0 {
                gx += c * px as f64 * x.powi(px as i32 - 1) * y.powi(j as i32);
            }
            if j > 0 {
                gy += c * j as f64 * x.powi(px as i32) * y.powi(j as i32 - 1);
            }
        }
        (gx, gy)
    }

    pub fn mul_x(&self) -> HomogPoly {
        let mut c = self.coeffs.clone();
        c.push(0.0);
        HomogPoly::new(self.degree + 1, c)
    }

    pub fn mul_y(&self) -> HomogPoly {
        let mut c = vec![0.0];
        c.extend_from_slice(&self.coeffs);
        HomogPoly::new(self.degree + 1, c)
    }

    pub fn sub(&self, other: &HomogPoly) -> HomogPoly {
        assert_eq!(self.degree, other.degree);
        HomogPoly::new(
            self.degree,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        )
    }

    /// Exchanges the roles of `x` and `y`.
    pub fn swapped(&self) -> HomogPoly {
        let mut c = self.coeffs.clone();
        c.reverse();
        HomogPoly::new(self.degree, c)
    }
}

/// Dense bivariate real polynomial stored as its homogeneous parts.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoly2 {
    parts: Vec<HomogPoly>,
}

impl RealPoly2 {
    pub fn from_parts(mut parts: Vec<HomogPoly>) -> Self {
        for (k, p) in parts.iter().enumerate() {
            assert_eq!(p.degree(), k, "part {k} has the wrong degree");
        }
        while parts.len() > 1 && parts[parts.len() - 1].is_zero() {
            parts.pop();
        }
        if parts.is_empty() {
            parts.push(HomogPoly::zero(0));
        }
        Self { parts }
    }

    /// Builds from a coefficient table `c[i][j]` of `x^i y^j`.
    pub fn from_monomials(terms: &[(usize, usize, f64)]) -> Self {
        let deg = terms.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0);
        let mut parts: Vec<HomogPoly> = (0..=deg).map(HomogPoly::zero).collect();
        for &(i, j, c) in terms {
            parts[i + j].coeffs[j] += c;
        }
        Self::from_parts(parts)
    }

    pub fn degree(&self) -> usize {
        self.parts.len() - 1
    }

    /// Homogeneous part of total degree `k` (zero beyond the degree).
    pub fn homogeneous(&self, k: usize) -> HomogPoly {
        self.parts.get(k).cloned().unwrap_or_else(|| HomogPoly::zero(k))
    }

    pub fn parts(&self) -> &[HomogPoly] {
        &self.parts
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.parts.iter().map(|p| p.eval(x, y)).sum()
    }

    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        self.parts.iter().fold((0.0, 0.0), |(gx, gy), p| {
            let (a, b) = p.grad(x, y);
            (gx + a, gy + b)
        })
    }

    /// Coefficient of `x^i y^j`.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.parts.get(i + j).map_or(0.0, |p| p.coeffs()[j])
    }
}

/// Real planar polynomial vector field `x' = P`, `y' = Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPlanarField {
    p: RealPoly2,
    q: RealPoly2,
}

impl RealPlanarField {
    pub fn new(p: RealPoly2, q: RealPoly2) -> Self {
        Self { p, q }
    }

    pub fn p(&self) -> &RealPoly2 {
        &self.p
    }

    pub fn q(&self) -> &RealPoly2 {
        &self.q
    }

    /// Common degree `d = max(deg P, deg Q)`.
    pub fn degree(&self) -> usize {
        self.p.degree().max(self.q.degree())
    }

    /// `(P_k, Q_k)`.
    pub fn homogeneous(&self, k: usize) -> (HomogPoly, HomogPoly) {
        (self.p.homogeneous(k), self.q.homogeneous(k))
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.p.eval(x, y), self.q.eval(x, y))
    }

    /// Field with `x` and `y` exchanged: `(x, y) ↦ (Q(y, x), P(y, x))`.
    pub fn swapped(&self) -> RealPlanarField {
        let swap = |r: &RealPoly2| RealPoly2::from_parts(r.parts.iter().map(HomogPoly::swapped).collect());
        RealPlanarField::new(swap(&self.q), swap(&self.p))
    }
}
