//! Flows in complex time `t = τ₁ + iτ₂`.
//!
//! Each straight segment of a time path with direction `e^{iφ}` is reduced to
//! the real ODE `dz/ds = e^{iφ} F(z)` in arclength `s`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::compactify::{infinity_critical_points, EquilibriumKind};
use crate::error::{Error, Result};
use crate::flow::trace_separatrix;
use crate::ode::{self, Control, Options, Rotated, Termination, VectorField};
use crate::poly::ComplexPoly;

/// Piecewise-linear path in the complex time plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePath {
    vertices: Vec<Complex64>,
    closed: bool,
}

impl TimePath {
    /// Consecutive duplicate vertices are dropped.
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        let mut v: Vec<Complex64> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if !p.is_finite() {
                return Err(Error::Invalid("time path vertices must be finite".into()));
            }
            if v.last() != Some(&p) {
                v.push(p);
            }
        }
        if v.is_empty() {
            return Err(Error::Invalid("time path needs at least one vertex".into()));
        }
        let closed = v.len() > 2 && v.first() == v.last();
        Ok(TimePath { vertices: v, closed })
    }

    pub fn straight(to: Complex64) -> Self {
        TimePath::new(vec![Complex64::new(0.0, 0.0), to]).expect("finite endpoint")
    }

    /// `0 → T1 → T1 + iT2 → iT2 → 0`.
    pub fn rectangle(t1: f64, t2: f64) -> Self {
        let v = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(t1, 0.0),
            Complex64::new(t1, t2),
            Complex64::new(0.0, t2),
            Complex64::new(0.0, 0.0),
        ];
        TimePath::new(v).expect("finite rectangle")
    }

    /// Closed regular polygon with `n` sides on the circle `|t − center| = |center|`,
    /// starting and ending at `t = 0`.
    pub fn circle_through_origin(center: Complex64, n: usize) -> Self {
        let start = -center;
        let v = (0..=n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                if k == 0 || k == n {
                    Complex64::new(0.0, 0.0)
                } else {
                    center + start * Complex64::from_polar(1.0, a)
                }
            })
            .collect();
        TimePath::new(v).expect("finite circle")
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn end(&self) -> Complex64 {
        *self.vertices.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathOptions {
    pub ode: Options,
    /// Largest arclength between returned samples.
    pub max_ds: f64,
    /// Singularity-measure level below which a branch warning is recorded.
    pub branch_tol: f64,
    pub closure_tol: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            ode: Options { rtol: 1e-12, stall_detection: false, ..Options::default() },
            max_ds: 0.05,
            branch_tol: 1e-6,
            closure_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchEvent {
    #[serde(serialize_with = "crate::ode::ser_c")]
    pub t: Complex64,
    #[serde(serialize_with = "crate::ode::ser_c")]
    pub z: Complex64,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution {
    /// `(t, z(t))` samples, starting with `(0, z0)` at the first vertex.
    pub samples: Vec<(Complex64, Complex64)>,
    pub branch_warnings: Vec<BranchEvent>,
}

impl PathSolution {
    pub fn end(&self) -> (Complex64, Complex64) {
        *self.samples.last().unwrap()
    }
}

pub fn integrate_path<F: VectorField + ?Sized>(field: &F, z0: Complex64, path: &TimePath, opts: &PathOptions) -> Result<PathSolution> {
    let ode_opts = Options { h_max: opts.max_ds.min(opts.ode.h_max), ..opts.ode };
    let mut samples = vec![(path.vertices[0], z0)];
    let mut warnings = Vec::new();
    let mut z = z0;
    let mut inside = false;
    for w in path.vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        let dir = (b - a) / len;
        let rotated = Rotated { field, factor: dir };
        let tr = ode::solve(&rotated, z, 0.0, len, &ode_opts, |s| {
            if let Some(m) = field.singularity_measure(s.z1) {
                if m < opts.branch_tol {
                    if !inside {
                        warnings.push(BranchEvent { t: a + s.t1 * dir, z: s.z1, measure: m });
                    }
                    inside = true;
                } else {
                    inside = false;
                }
            }
            Control::Continue
        })?;
        if let Termination::Escaped { t_max, .. } = tr.termination {
            return Err(Error::BlowUp { t: a + t_max * dir });
        }
        samples.extend(tr.times.iter().zip(&tr.states).skip(1).map(|(&s, &zz)| (a + s * dir, zz)));
        z = *tr.states.last().unwrap();
        // Land exactly on the vertex so that closed paths compare equal times.
        samples.last_mut().unwrap().0 = b;
    }
    Ok(PathSolution { samples, branch_warnings: warnings })
}

/// A curve in the state plane used to decide which separatrices a probe crosses.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    /// The line `Im z = y`.
    Horizontal(f64),
    Polyline(Vec<Complex64>),
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let cross = |o: Complex64, a: Complex64, b: Complex64| ((a - o).conj() * (b - o)).im;
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl Curve {
    /// Whether the polyline `pts` crosses this curve.
    pub fn crossed_by(&self, pts: &[Complex64]) -> bool {
        match self {
            Curve::Horizontal(y) => pts.windows(2).any(|w| (w[0].im - y) * (w[1].im - y) < 0.0),
            Curve::Polyline(c) => {
                if c.len() < 2 {
                    return false;
                }
                let bbox = |v: &[Complex64]| {
                    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |b, z| {
                        (b.0.min(z.re), b.1.max(z.re), b.2.min(z.im), b.3.max(z.im))
                    })
                };
                let cb = bbox(c);
                pts.windows(2).any(|w| {
                    let sb = bbox(w);
                    if sb.1 < cb.0 || sb.0 > cb.1 || sb.3 < cb.2 || sb.2 > cb.3 {
                        return false;
                    }
                    c.windows(2).any(|s| segments_intersect(w[0], w[1], s[0], s[1]))
                })
            }
        }
    }
}

/// Separatrices of the real-time flow of `F` and of the imaginary-time flow
/// (the flow of `iF`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeparatrixSet {
    pub real: Vec<Curve>,
    pub imag: Vec<Curve>,
}

impl SeparatrixSet {
    /// `cosh(z − 1/2)`: real-time separatrices `Im z = kπ`, imaginary-time
    /// separatrices `Im z = (k + 1/2)π`, for `|k| ≤ kmax`.
    pub fn cosh_shift(kmax: i64) -> Self {
        let pi = std::f64::consts::PI;
        SeparatrixSet {
            real: (-kmax..=kmax).map(|k| Curve::Horizontal(k as f64 * pi)).collect(),
            imag: (-kmax - 1..=kmax).map(|k| Curve::Horizontal((k as f64 + 0.5) * pi)).collect(),
        }
    }

    /// Traces the separatrices of every saddle at infinity of `f` and of `i·f`.
    pub fn from_polynomial(f: &ComplexPoly, eps: f64, t_limit: f64, opts: &Options) -> Result<Self> {
        let trace = |g: &ComplexPoly| -> Result<Vec<Curve>> {
            let eqs = match infinity_critical_points(&g.to_real_field()) {
                Ok(e) => e,
                Err(Error::IdentZeroEquator) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            let mut out = Vec::new();
            for eq in eqs.iter().filter(|e| e.kind == EquilibriumKind::Saddle) {
                let tr = trace_separatrix(g, eq, eps, t_limit, opts)?;
                out.push(Curve::Polyline(tr.states));
            }
            Ok(out)
        };
        Ok(SeparatrixSet { real: trace(f)?, imag: trace(&f.scale(Complex64::i()))? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeClass {
    NoSep,
    ImSep,
    ReSep,
    BothSep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectangleProbeResult {
    pub t1: f64,
    pub t2: f64,
    pub closure_gap: f64,
    pub classification: ProbeClass,
    pub crosses_real: bool,
    pub crosses_imag: bool,
    #[serde(serialize_with = "crate::ode::ser_c")]
    pub z_end: Complex64,
    pub branch_events: Vec<BranchEvent>,
}

/// Integrates around the time rectangle `[0, T1] × [0, T2]` and labels it by
/// the separatrices its state-plane image crosses.
pub fn probe_rectangle<F: VectorField + ?Sized>(
    field: &F,
    z0: Complex64,
    t1: f64,
    t2: f64,
    seps: &SeparatrixSet,
    opts: &PathOptions,
) -> Result<RectangleProbeResult> {
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::Invalid("rectangle extents must be positive".into()));
    }
    let sol = integrate_path(field, z0, &TimePath::rectangle(t1, t2), opts)?;
    let image: Vec<Complex64> = sol.samples.iter().map(|s| s.1).collect();
    let crosses_real = seps.real.iter().any(|c| c.crossed_by(&image));
    let crosses_imag = seps.imag.iter().any(|c| c.crossed_by(&image));
    let classification = match (crosses_real, crosses_imag) {
        (false, false) => ProbeClass::NoSep,
        (true, false) => ProbeClass::ReSep,
        (false, true) => ProbeClass::ImSep,
        (true, true) => ProbeClass::BothSep,
    };
    let z_end = sol.end().1;
    Ok(RectangleProbeResult {
        t1,
        t2,
        closure_gap: (z_end - z0).norm(),
        classification,
        crosses_real,
        crosses_imag,
        z_end,
        branch_events: sol.branch_warnings,
    })
}

/// Rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// Zeros of `f'` inside `region` at which `f` itself does not vanish.
pub fn detect_branch_points(f: &ComplexPoly, region: &Region) -> Vec<Complex64> {
    let df = f.derivative();
    if df.degree() == 0 {
        return Vec::new();
    }
    let scale = f.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut out: Vec<Complex64> = df
        .roots()
        .into_iter()
        .filter(|&r| region.contains(r))
        .filter(|&r| f.eval(r).norm() > 1e-10 * scale.max(1.0) * (1.0 + r.norm()).powi(f.degree() as i32))
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
    out
}

/// Regular lattice in the complex time plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub nx: usize,
    pub im_min: f64,
    pub im_max: f64,
    pub ny: usize,
}

impl TimeGrid {
    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![lo];
        }
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn re_axis(&self) -> Vec<f64> {
        Self::axis(self.re_min, self.re_max, self.nx)
    }

    pub fn im_axis(&self) -> Vec<f64> {
        Self::axis(self.im_min, self.im_max, self.ny)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceNode {
    pub t: Complex64,
    /// `None` marks a hole: the node could not be reached without blow-up.
    pub z: Option<Complex64>,
}

/// Samples of the solution graph `(t, z(t))`, row-major with `re` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub grid: TimeGrid,
    pub nodes: Vec<SurfaceNode>,
}

impl SurfaceGrid {
    pub fn holes(&self) -> usize {
        self.nodes.iter().filter(|n| n.z.is_none()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re_t,im_t,re_z,im_z\n");
        for n in &self.nodes {
            match n.z {
                Some(z) => s.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.12e}\n", n.t.re, n.t.im, z.re, z.im)),
                None => s.push_str(&format!("{:.12e},{:.12e},nan,nan\n", n.t.re, n.t.im)),
            }
        }
        s
    }
}

/// Continues from `(t_start, z_start)` through `targets` in order; after the
/// first failure every later target is a hole.
fn sweep<F: VectorField + ?Sized>(
    field: &F,
    t_start: Complex64,
    z_start: Complex64,
    targets: &[Complex64],
    opts: &PathOptions,
) -> Vec<Option<Complex64>> {
    let mut out = Vec::with_capacity(targets.len());
    let mut cur = Some((t_start, z_start));
    for &t in targets {
        cur = cur.and_then(|(ta, za)| {
            if t == ta {
                return Some((t, za));
            }
            let path = TimePath::new(vec![Complex64::new(0.0, 0.0), t - ta]).ok()?;
            integrate_path(field, za, &path, opts).ok().map(|s| (t, s.end().1))
        });
        out.push(cur.map(|c| c.1));
    }
    out
}

fn outward<F: VectorField + ?Sized>(
    field: &F,
    t0: Complex64,
    z0: Complex64,
    offsets: &[f64],
    unit: Complex64,
    opts: &PathOptions,
) -> Vec<Option<Complex64>> {
    let mut res = vec![None; offsets.len()];
    let mut pos: Vec<usize> = (0..offsets.len()).filter(|&i| offsets[i] >= 0.0).collect();
    let mut neg: Vec<usize> = (0..offsets.len()).filter(|&i| offsets[i] < 0.0).collect();
    pos.sort_by(|&a, &b| offsets[a].total_cmp(&offsets[b]));
    neg.sort_by(|&a, &b| offsets[b].total_cmp(&offsets[a]));
    for idx in [pos, neg] {
        let targets: Vec<Complex64> = idx.iter().map(|&i| t0 + unit * offsets[i]).collect();
        for (k, z) in sweep(field, t0, z0, &targets, opts).into_iter().enumerate() {
            res[idx[k]] = z;
        }
    }
    res
}

/// Real-time sweep from `t = 0` along the lattice's real axis, then an
/// imaginary-time fibre above every real node, fibres in parallel.
pub fn surface_sample<F: VectorField + ?Sized>(field: &F, z0: Complex64, grid: &TimeGrid, opts: &PathOptions) -> Result<SurfaceGrid> {
    if grid.nx == 0 || grid.ny == 0 {
        return Err(Error::Invalid("surface grid needs positive resolution".into()));
    }
    let re = grid.re_axis();
    let im = grid.im_axis();
    let zero = Complex64::new(0.0, 0.0);
    let base = outward(field, zero, z0, &re, Complex64::new(1.0, 0.0), opts);
    let columns: Vec<Vec<Option<Complex64>>> = re
        .par_iter()
        .zip(base.par_iter())
        .map(|(&x, b)| match b {
            Some(zb) => outward(field, Complex64::new(x, 0.0), *zb, &im, Complex64::i(), opts),
            None => vec![None; im.len()],
        })
        .collect();
    let mut nodes = Vec::with_capacity(re.len() * im.len());
    for (j, &y) in im.iter().enumerate() {
        for (i, &x) in re.iter().enumerate() {
            nodes.push(SurfaceNode { t: Complex64::new(x, y), z: columns[i][j] });
        }
    }
    Ok(SurfaceGrid { grid: *grid, nodes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonodromySample {
    pub tau1: f64,
    /// `|z(τ₁ + iL) − z(τ₁)|`; `None` when the loop could not be completed.
    pub mismatch: Option<f64>,
}

/// For each real offset `τ₁`, the state mismatch after continuing
/// `z(τ₁)` along the imaginary-time segment of length `loop_len`.
pub fn monodromy_sweep<F: VectorField + ?Sized>(
    field: &F,
    z0: Complex64,
    offsets: &[f64],
    loop_len: f64,
    opts: &PathOptions,
) -> Vec<MonodromySample> {
    offsets
        .par_iter()
        .map(|&tau1| {
            let mismatch = (|| {
                let base = integrate_path(field, z0, &TimePath::straight(Complex64::new(tau1, 0.0)), opts).ok()?;
                let zb = base.end().1;
                let fibre = integrate_path(field, zb, &TimePath::straight(Complex64::new(0.0, loop_len)), opts).ok()?;
                Some((fibre.end().1 - zb).norm())
            })();
            MonodromySample { tau1, mismatch }
        })
        .collect()
}

/// First pair of consecutive offsets across which the loop switches between
/// closing (`< closure_tol`) and not closing (`> 0.1`).
pub fn bifurcation_signature(samples: &[MonodromySample], closure_tol: f64) -> Option<(f64, f64)> {
    let mut classified: Vec<(f64, bool)> = samples
        .iter()
        .filter_map(|s| {
            let m = s.mismatch?;
            if m < closure_tol {
                Some((s.tau1, true))
            } else if m > 0.1 {
                Some((s.tau1, false))
            } else {
                None
            }
        })
        .collect();
    classified.sort_by(|a, b| a.0.total_cmp(&b.0));
    classified.windows(2).find(|w| w[0].1 != w[1].1).map(|w| (w[0].0, w[1].0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{CoshShift, CoshShiftNewton};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_field_traces_path() {
        let one = |_z: Complex64| c(1.0, 0.0);
        let sol = integrate_path(&one, c(2.0, -1.0), &TimePath::rectangle(1.5, 0.7), &PathOptions::default()).unwrap();
        for (t, z) in &sol.samples {
            assert!((z - (c(2.0, -1.0) + t)).norm() < 1e-12);
        }
        let r = probe_rectangle(&one, c(0.0, 0.0), 2.0, 3.0, &SeparatrixSet::default(), &PathOptions::default()).unwrap();
        assert!(r.closure_gap < 1e-12);
        assert_eq!(r.classification, ProbeClass::NoSep);
    }

    #[test]
    fn exponential_rectangle_closes() {
        let f = |z: Complex64| z;
        let sol = integrate_path(&f, c(1.0, 0.5), &TimePath::rectangle(1.0, 2.0 * std::f64::consts::PI + 1.0), &PathOptions::default()).unwrap();
        assert!((sol.end().1 - c(1.0, 0.5)).norm() < 1e-9);
    }

    #[test]
    fn cosh_probe_classes() {
        let seps = SeparatrixSet::cosh_shift(3);
        let z0 = c(3.0, -0.5);
        let opts = PathOptions::default();
        let cases = [
            (0.1, 0.05, ProbeClass::NoSep),
            (0.1, 1.0, ProbeClass::ReSep),
            (1.0, 0.05, ProbeClass::ImSep),
            (1.0, 1.0, ProbeClass::BothSep),
        ];
        for (t1, t2, want) in cases {
            let r = probe_rectangle(&CoshShift, z0, t1, t2, &seps, &opts).unwrap();
            assert_eq!(r.classification, want, "{t1} {t2}");
            if want == ProbeClass::BothSep {
                assert!((r.closure_gap - 2.0 * std::f64::consts::PI).abs() < 1e-6);
            } else {
                assert!(r.closure_gap < 1e-6, "{want:?} gap {}", r.closure_gap);
            }
        }
    }

    #[test]
    fn branch_points() {
        let all = Region { re_min: -10.0, re_max: 10.0, im_min: -10.0, im_max: 10.0 };
        let b = detect_branch_points(&ComplexPoly::from_real(&[1.0, 0.0, 1.0]), &all);
        assert_eq!(b.len(), 1);
        assert!(b[0].norm() < 1e-12);
        let b = detect_branch_points(&ComplexPoly::from_real(&[0.0, -3.0, 0.0, 1.0]), &all);
        assert_eq!(b.len(), 2);
        assert!((b[0] + 1.0).norm() < 1e-12 && (b[1] - 1.0).norm() < 1e-12);
        assert!(detect_branch_points(&ComplexPoly::from_real(&[0.0, 0.0, 1.0]), &all).is_empty());
    }

    #[test]
    fn surface_of_constant_field() {
        let one = |_z: Complex64| c(1.0, 0.0);
        let g = TimeGrid { re_min: -1.0, re_max: 1.0, nx: 5, im_min: -0.5, im_max: 1.0, ny: 4 };
        let s = surface_sample(&one, c(0.3, 0.0), &g, &PathOptions::default()).unwrap();
        assert_eq!(s.nodes.len(), 20);
        assert_eq!(s.holes(), 0);
        for n in &s.nodes {
            assert!((n.z.unwrap() - (c(0.3, 0.0) + n.t)).norm() < 1e-12);
        }
    }

    #[test]
    fn cosh_newton_signature() {
        let offsets: Vec<f64> = (0..=16).map(|k| 0.25 * k as f64).collect();
        let opts = PathOptions::default();
        let off = monodromy_sweep(&CoshShiftNewton, c(3.0, 0.5), &offsets, 2.0 * std::f64::consts::PI, &opts);
        let (a, b) = bifurcation_signature(&off, opts.closure_tol).expect("signature");
        let star = (c(2.5, 0.5)).cosh().norm().ln();
        assert!(a < star && star < b);
        let on = monodromy_sweep(&CoshShiftNewton, c(3.0, 0.0), &offsets, 2.0 * std::f64::consts::PI, &opts);
        assert!(bifurcation_signature(&on, opts.closure_tol).is_none());
    }
}
