//! Zero-product approximant of the ξ Newton flow and root continuation in
//! complex time.
//!
//! For zeros `ρ_n = 1/2 ± i t_n` and an anchor `z0`, the time-`T` state is the
//! root of `P(z; T) = Π (z − ρ_n)/(z0 − ρ_n) − e^{−T}` that continues from
//! `z0` at `T = 0`. Products are kept in log space.

use std::io::BufRead;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ctime::{BranchEvent, Region, TimePath};
use crate::error::{Error, Result};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Ascending positive ordinates of zeros on the critical line.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
}

impl ZeroTable {
    pub fn new(ordinates: Vec<f64>) -> Result<Self> {
        if ordinates.is_empty() {
            return Err(Error::Parse { line: 0, msg: "no ordinates".into() });
        }
        for (i, &t) in ordinates.iter().enumerate() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Parse { line: i + 1, msg: format!("ordinate must be positive, got {t}") });
            }
            if i > 0 && t <= ordinates[i - 1] {
                return Err(Error::Monotonicity { line: i + 1 });
            }
        }
        Ok(ZeroTable { ordinates })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn count(&self) -> usize {
        self.ordinates.len()
    }
}

/// One ordinate per line; blank lines and `#` comments are skipped. Line
/// numbers in errors are 1-based source lines.
pub fn load_zeros<R: BufRead>(source: R) -> Result<ZeroTable> {
    let mut ordinates = Vec::new();
    let mut last: Option<f64> = None;
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let t: f64 = s.parse().map_err(|_| Error::Parse { line: lineno, msg: format!("not a number: {s:?}") })?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Parse { line: lineno, msg: format!("ordinate must be positive, got {s}") });
        }
        if last.is_some_and(|p| t <= p) {
            return Err(Error::Monotonicity { line: lineno });
        }
        last = Some(t);
        ordinates.push(t);
    }
    if ordinates.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no ordinates".into() });
    }
    Ok(ZeroTable { ordinates })
}

/// Principal value of `x` with imaginary part wrapped to `(−π, π]`.
fn wrap(x: Complex64) -> Complex64 {
    let mut im = x.im % TAU;
    if im > std::f64::consts::PI {
        im -= TAU;
    } else if im <= -std::f64::consts::PI {
        im += TAU;
    }
    Complex64::new(x.re, im)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxSystem {
    pub m: usize,
    #[serde(skip)]
    pub rho: Vec<Complex64>,
    #[serde(serialize_with = "crate::ode::ser_c")]
    pub z0: Complex64,
    /// `Σ log(z0 − ρ_n)`, principal branch per factor.
    #[serde(serialize_with = "crate::ode::ser_c")]
    pub log_denom: Complex64,
}

pub fn build_system(zt: &ZeroTable, m: usize, z0: Complex64) -> Result<ApproxSystem> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::Invalid(format!("m must be even and positive, got {m}")));
    }
    if m / 2 > zt.count() {
        return Err(Error::Invalid(format!("m = {m} needs {} ordinates, table has {}", m / 2, zt.count())));
    }
    if !z0.is_finite() {
        return Err(Error::Invalid("anchor must be finite".into()));
    }
    let mut rho = Vec::with_capacity(m);
    for &t in &zt.ordinates[..m / 2] {
        rho.push(Complex64::new(0.5, t));
        rho.push(Complex64::new(0.5, -t));
    }
    if rho.iter().any(|r| (z0 - r).norm() <= 1e-14 * (1.0 + r.norm())) {
        return Err(Error::AnchorIsZero);
    }
    let log_denom = rho.iter().map(|r| (z0 - r).ln()).sum();
    Ok(ApproxSystem { m, rho, z0, log_denom })
}

impl ApproxSystem {
    pub fn denom(&self) -> Complex64 {
        self.log_denom.exp()
    }

    /// `Σ log(z − ρ_n)`.
    pub fn log_product(&self, z: Complex64) -> Complex64 {
        self.rho.iter().map(|r| (z - r).ln()).sum()
    }

    /// `F(z) = Π (z − ρ_n)/(z0 − ρ_n)`.
    pub fn ratio(&self, z: Complex64) -> Complex64 {
        (self.log_product(z) - self.log_denom).exp()
    }

    /// `S(z) = Σ 1/(z − ρ_n) = F'/F`.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        self.rho.iter().map(|r| 1.0 / (z - r)).sum()
    }

    /// `|P(z; T)|`.
    pub fn residual(&self, z: Complex64, t: Complex64) -> f64 {
        (self.ratio(z) - (-t).exp()).norm()
    }

    /// `|S| / Σ 1/|z − ρ_n|`: near zero only close to critical points of the product.
    fn branch_ratio(&self, z: Complex64) -> (Complex64, f64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut a = 0.0;
        for r in &self.rho {
            let w = 1.0 / (z - r);
            s += w;
            a += w.norm();
        }
        (s, s.norm() / a)
    }

    /// Newton iteration on `S(z) = 0` from `start`.
    pub fn critical_point_near(&self, start: Complex64) -> Complex64 {
        let mut z = start;
        for _ in 0..100 {
            let mut s = Complex64::new(0.0, 0.0);
            let mut ds = Complex64::new(0.0, 0.0);
            for r in &self.rho {
                let w = 1.0 / (z - r);
                s += w;
                ds -= w * w;
            }
            let step = s / ds;
            if !step.is_finite() {
                break;
            }
            z -= step;
            if step.norm() < 1e-14 * (1.0 + z.norm()) {
                break;
            }
        }
        z
    }

    /// Critical points of the product (zeros of `S`) inside `region`, found by
    /// Newton from a lattice of starts.
    pub fn critical_points(&self, region: &Region, n: usize) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let s = Complex64::new(
                    region.re_min + (region.re_max - region.re_min) * i as f64 / n as f64,
                    region.im_min + (region.im_max - region.im_min) * j as f64 / n as f64,
                );
                let c = self.critical_point_near(s);
                let (sv, ratio) = self.branch_ratio(c);
                if region.contains(c) && ratio < 1e-10 && sv.is_finite() && !out.iter().any(|o| (*o - c).norm() < 1e-8) {
                    out.push(c);
                }
            }
        }
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinueOptions {
    pub ds0: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    /// Largest state displacement per step, relative to the distance to the nearest zero.
    pub dz_frac: f64,
    pub branch_tol: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_steps: usize,
}

impl Default for ContinueOptions {
    fn default() -> Self {
        ContinueOptions {
            ds0: 0.01,
            ds_min: 1e-12,
            ds_max: 0.1,
            dz_frac: 0.1,
            branch_tol: 1e-8,
            newton_tol: 1e-13,
            max_newton: 12,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    #[serde(serialize_with = "crate::ode::ser_c")]
    pub dir: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationRun {
    #[serde(skip)]
    pub t_samples: Vec<Complex64>,
    #[serde(skip)]
    pub roots: Vec<Complex64>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    pub branch_events: Vec<BranchEvent>,
    pub segments: Vec<Segment>,
    /// Sample index of every path vertex.
    pub vertex_samples: Vec<usize>,
}

impl ContinuationRun {
    pub fn end(&self) -> (Complex64, Complex64) {
        (*self.t_samples.last().unwrap(), *self.roots.last().unwrap())
    }

    pub fn max_scaled_residual(&self) -> f64 {
        self.t_samples
            .iter()
            .zip(&self.residuals)
            .map(|(t, r)| r / (-t).exp().norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

fn corrector(sys: &ApproxSystem, mut z: Complex64, t: Complex64, opts: &ContinueOptions) -> Option<(Complex64, usize)> {
    // Rounding z alone perturbs the log residual by about ε·|z|·|S|, which
    // dominates `newton_tol` once the root sits close to a zero.
    let tol = |z: Complex64, s: Complex64| opts.newton_tol + 8.0 * f64::EPSILON * (1.0 + z.norm()) * s.norm();
    for it in 0..opts.max_newton {
        let w = wrap(sys.log_product(z) - sys.log_denom + t);
        let s = sys.log_derivative(z);
        if w.norm() < tol(z, s) {
            return Some((z, it));
        }
        let step = w / s;
        if !step.is_finite() {
            return None;
        }
        z -= step;
    }
    let w = wrap(sys.log_product(z) - sys.log_denom + t);
    (w.norm() < tol(z, sys.log_derivative(z))).then_some((z, opts.max_newton))
}

fn nearest_distance(sys: &ApproxSystem, z: Complex64) -> f64 {
    sys.rho.iter().map(|r| (z - r).norm()).fold(f64::INFINITY, f64::min)
}

/// Tracks the root along `path` (which must start at `T = 0`) by an RK4
/// predictor on `dz/dT = −1/S(z)` and a Newton corrector on the log residual.
pub fn continue_root(sys: &ApproxSystem, path: &TimePath, opts: &ContinueOptions) -> Result<ContinuationRun> {
    let v = path.vertices();
    if v[0].norm() != 0.0 {
        return Err(Error::Invalid("continuation path must start at T = 0".into()));
    }
    let mut t_samples = vec![v[0]];
    let mut roots = vec![sys.z0];
    let mut residuals = vec![sys.residual(sys.z0, v[0])];
    let mut events: Vec<BranchEvent> = Vec::new();
    let mut segments = Vec::new();
    let mut vertex_samples = vec![0];
    let mut z = sys.z0;
    let mut ds = opts.ds0;
    let mut steps = 0usize;
    let mut near_branch = false;
    for w in v.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        let dir = (b - a) / len;
        let start = t_samples.len() - 1;
        let mut s = 0.0;
        while s < len {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::TooManySteps { t: (a + s * dir).norm() });
            }
            let h = ds.min(len - s);
            let last = h >= len - s;
            let s_new = if last { len } else { s + h };
            let t_new = a + s_new * dir;
            let rhs = |zz: Complex64| -dir / sys.log_derivative(zz);
            let k1 = rhs(z);
            let k2 = rhs(z + 0.5 * h * k1);
            let k3 = rhs(z + 0.5 * h * k2);
            let k4 = rhs(z + h * k3);
            let pred = z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let moved = (pred - z).norm();
            let limit = opts.dz_frac * nearest_distance(sys, z);
            let accepted = if pred.is_finite() && moved <= limit {
                corrector(sys, pred, t_new, opts).filter(|(zc, _)| (zc - pred).norm() <= 0.1 * moved + 1e-12 * (1.0 + zc.norm()))
            } else {
                None
            };
            let (s_val, ratio) = sys.branch_ratio(z);
            match accepted {
                Some((zc, iters)) => {
                    z = zc;
                    s = s_new;
                    t_samples.push(t_new);
                    roots.push(z);
                    residuals.push(sys.residual(z, t_new));
                    let (sv, r) = sys.branch_ratio(z);
                    if r < opts.branch_tol {
                        if !near_branch {
                            events.push(BranchEvent { t: t_new, z, measure: (sys.ratio(z) * sv).norm() });
                        }
                        near_branch = true;
                    } else {
                        near_branch = false;
                    }
                    if iters <= 2 {
                        ds = (ds * 1.5).min(opts.ds_max);
                    }
                }
                None => {
                    ds *= 0.5;
                    if ds < opts.ds_min {
                        let t = a + s * dir;
                        if ratio < opts.branch_tol.sqrt() {
                            let near = sys.critical_point_near(z);
                            if events.last().map_or(true, |e| e.t != t) {
                                events.push(BranchEvent { t, z, measure: (sys.ratio(z) * s_val).norm() });
                            }
                            return Err(Error::BranchPointHit { t, near });
                        }
                        return Err(Error::StepUnderflow { t: t.norm(), z });
                    }
                }
            }
        }
        segments.push(Segment { start, end: t_samples.len() - 1, dir });
        vertex_samples.push(t_samples.len() - 1);
    }
    Ok(ContinuationRun { t_samples, roots, residuals, branch_events: events, segments, vertex_samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantReport {
    /// Largest phase change of the product along real-time segments (radians).
    pub phase_drift: f64,
    /// Largest relative modulus change of the product along imaginary-time segments.
    pub modulus_drift: f64,
    pub max_scaled_residual: f64,
    pub real_segments: usize,
    pub imag_segments: usize,
}

pub fn invariant_report(run: &ContinuationRun, sys: &ApproxSystem) -> InvariantReport {
    let mut phase_drift: f64 = 0.0;
    let mut modulus_drift: f64 = 0.0;
    let mut real_segments = 0;
    let mut imag_segments = 0;
    for seg in &run.segments {
        let is_real = seg.dir.im.abs() < 1e-12;
        let is_imag = seg.dir.re.abs() < 1e-12;
        if !(is_real || is_imag) {
            continue;
        }
        let base = sys.log_product(run.roots[seg.start]);
        for &z in &run.roots[seg.start..=seg.end] {
            let d = wrap(sys.log_product(z) - base);
            if is_real {
                phase_drift = phase_drift.max(d.im.abs());
            } else {
                modulus_drift = modulus_drift.max(d.re.exp_m1().abs());
            }
        }
        if is_real {
            real_segments += 1;
        } else {
            imag_segments += 1;
        }
    }
    InvariantReport {
        phase_drift,
        modulus_drift,
        max_scaled_residual: run.max_scaled_residual(),
        real_segments,
        imag_segments,
    }
}

/// Continuation results for one anchor of a portrait.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitCell {
    #[serde(serialize_with = "crate::ode::ser_c")]
    pub z0: Complex64,
    /// Root at every requested time, `None` where continuation failed.
    #[serde(skip)]
    pub roots: Vec<Option<Complex64>>,
    /// Root polylines, one per ray of requested times.
    #[serde(skip)]
    pub paths: Vec<Vec<Complex64>>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Portrait {
    pub m: usize,
    pub region: Region,
    pub grid: (usize, usize),
    pub t_set: Vec<Complex64>,
    pub cells: Vec<PortraitCell>,
}

/// Times `0, 1, …, 8`.
pub fn default_t_set() -> Vec<Complex64> {
    (0..=8).map(|k| Complex64::new(k as f64, 0.0)).collect()
}

fn run_cell(zt: &ZeroTable, m: usize, z0: Complex64, t_set: &[Complex64], opts: &ContinueOptions) -> PortraitCell {
    let sys = match build_system(zt, m, z0) {
        Ok(s) => s,
        Err(e) => {
            return PortraitCell { z0, roots: vec![None; t_set.len()], paths: Vec::new(), failure: Some(e.to_string()) };
        }
    };
    let mut roots = vec![None; t_set.len()];
    let mut paths = Vec::new();
    let mut failure = None;
    // Times on a common ray from 0 share one continuation.
    let mut rays: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, t) in t_set.iter().enumerate() {
        if t.norm() == 0.0 {
            roots[i] = Some(z0);
            continue;
        }
        let a = t.arg();
        match rays.iter_mut().find(|r| (r.0 - a).abs() < 1e-12) {
            Some(r) => r.1.push(i),
            None => rays.push((a, vec![i])),
        }
    }
    for (_, mut idx) in rays {
        idx.sort_by(|&x, &y| t_set[x].norm().total_cmp(&t_set[y].norm()));
        let mut verts = vec![Complex64::new(0.0, 0.0)];
        verts.extend(idx.iter().map(|&i| t_set[i]));
        let path = match TimePath::new(verts) {
            Ok(p) => p,
            Err(e) => {
                failure = Some(e.to_string());
                continue;
            }
        };
        let vertex_of: Vec<usize> = {
            // TimePath drops repeated vertices, so map each requested time to its vertex.
            let pv = path.vertices();
            idx.iter().map(|&i| pv.iter().position(|v| *v == t_set[i]).unwrap()).collect()
        };
        match continue_root(&sys, &path, opts) {
            Ok(run) => {
                for (k, &i) in idx.iter().enumerate() {
                    roots[i] = Some(run.roots[run.vertex_samples[vertex_of[k]]]);
                }
                paths.push(run.roots);
            }
            Err(e) => failure = Some(e.to_string()),
        }
    }
    PortraitCell { z0, roots, paths, failure }
}

/// Root paths for every anchor of an `nx × ny` lattice over `region` and every
/// time in `t_set`. Failing cells are recorded, never fatal.
pub fn flow_portrait(
    zt: &ZeroTable,
    m: usize,
    region: &Region,
    grid: (usize, usize),
    t_set: &[Complex64],
    opts: &ContinueOptions,
) -> Result<Portrait> {
    let (nx, ny) = grid;
    if nx == 0 || ny == 0 {
        return Err(Error::Invalid("portrait grid needs positive resolution".into()));
    }
    if m == 0 || m % 2 != 0 || m / 2 > zt.count() {
        return Err(Error::Invalid(format!("invalid m = {m} for a table of {} ordinates", zt.count())));
    }
    let coord = |lo: f64, hi: f64, k: usize, n: usize| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
    let anchors: Vec<Complex64> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| Complex64::new(coord(region.re_min, region.re_max, i, nx), coord(region.im_min, region.im_max, j, ny)))
        .collect();
    let cells = anchors.par_iter().map(|&z0| run_cell(zt, m, z0, t_set, opts)).collect();
    Ok(Portrait { m, region: *region, grid, t_set: t_set.to_vec(), cells })
}

impl Portrait {
    /// Upper-half zeros `ρ` such that some root at the largest requested time
    /// ends within `radius` of `ρ`, ascending.
    pub fn upper_attractors(&self, zt: &ZeroTable, radius: f64) -> Vec<Complex64> {
        let last = self
            .t_set
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
            .map(|(i, _)| i);
        let Some(last) = last else { return Vec::new() };
        let upper: Vec<Complex64> = zt.ordinates()[..self.m / 2].iter().map(|&t| Complex64::new(0.5, t)).collect();
        let mut hit = vec![false; upper.len()];
        for cell in &self.cells {
            if let Some(z) = cell.roots[last] {
                if let Some((k, d)) = upper
                    .iter()
                    .enumerate()
                    .map(|(k, r)| (k, (z - r).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                {
                    if d < radius {
                        hit[k] = true;
                    }
                }
            }
        }
        upper.into_iter().zip(hit).filter(|(_, h)| *h).map(|(r, _)| r).collect()
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.failure.is_some()).count()
    }
}
