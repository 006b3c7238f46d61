//! Command-line front end: `portrait`, `infinity`, `separatrix`, `winding`,
//! `ctime-probe`, `xi-approx` and `report`.
//!
//! Exit codes: 0 success, 1 numerical failure (diagnostic JSON on stdout),
//! 2 invalid input or usage.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::compactify::{infinity_critical_points, khat, separatrix_seed, EquilibriumKind, DEFAULT_SEED_EPS};
use crate::ctime::{probe_rectangle, surface_sample, PathOptions, Region, SeparatrixSet, TimeGrid, TimePath};
use crate::error::Error;
use crate::flow::{detect_periodic, index_flip, integrate, locate_separatrix, separatrix_role, trace_separatrix, PeriodicOptions};
use crate::ode::{Options, Termination, Trajectory, VectorField};
use crate::poly::ComplexPoly;
use crate::render::{direction_field, render_portrait, trajectories_csv, Canvas, PortraitData};
use crate::systems::{z2p1, CoshShift};
use crate::xi::{self, build_system, continue_root, flow_portrait, invariant_report, load_zeros, ContinueOptions};

#[derive(Debug, Parser)]
#[command(name = "holoflow", version, about = "Global analysis of complex polynomial flows")]
pub struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Prefix for every file written (a directory needs a trailing slash).
    #[arg(long, global = true)]
    pub out_prefix: Option<String>,
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true)]
    pub escape_radius: Option<f64>,
    #[arg(long, global = true)]
    pub closure_tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase portrait as SVG plus trajectory CSV.
    Portrait(PortraitArgs),
    /// Critical points at infinity as JSON.
    Infinity(InfinityArgs),
    /// Separatrices attached to saddles at infinity.
    Separatrix(SeparatrixArgs),
    /// Periodic orbit and winding number through a point, or the index flip across it.
    Winding(WindingArgs),
    /// Complex-time rectangle probe and surface samples.
    CtimeProbe(CtimeArgs),
    /// Root continuation for the zero-product approximant.
    XiApprox(XiArgs),
    /// Combined summary for one system.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PortraitArgs {
    /// Coefficient pairs `[[re,im],...]` (ascending) or a builtin: z2p1, cosh-shift.
    #[arg(long)]
    pub poly: Option<String>,
    /// Initial-condition lattice `NxM`.
    #[arg(long)]
    pub grid: Option<String>,
    /// `re_min,re_max,im_min,im_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub t_limit: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InfinityArgs {
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SeparatrixArgs {
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub t_limit: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WindingArgs {
    #[arg(long)]
    pub poly: Option<String>,
    /// Start point `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// Winding centre `re,im`; defaults to the orbit's time average.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// Treat `z0` as a separatrix point and compare the orbits on both sides.
    #[arg(long)]
    pub index_flip: bool,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CtimeArgs {
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    /// Surface lattice `NxM` over `[0,T1] × [0,T2]`.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct XiArgs {
    /// Zero ordinates, one per line.
    #[arg(long)]
    pub zeros: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// `straight RE[,IM]`, `rect T1 T2`, `loop K` (0 → 2πiK) or `circle RE,IM N`.
    #[arg(long, allow_hyphen_values = true)]
    pub path: Option<String>,
    /// Portrait lattice `NxM` over the window.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub poly: Option<String>,
}

/// Values accepted by `--config`; flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<Value>,
    pub rtol: Option<f64>,
    pub closure_tol: Option<f64>,
    pub escape_radius: Option<f64>,
    pub out_prefix: Option<String>,
    pub eps: Option<f64>,
    pub t_limit: Option<f64>,
    pub grid: Option<String>,
    pub window: Option<[f64; 4]>,
    pub z0: Option<[f64; 2]>,
    pub center: Option<[f64; 2]>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub zeros: Option<PathBuf>,
    pub m: Option<usize>,
    pub path: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// A system named on the command line.
#[derive(Debug, Clone)]
pub enum System {
    Poly { name: String, poly: ComplexPoly },
    CoshShift,
}

impl VectorField for System {
    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            System::Poly { poly, .. } => poly.eval(z),
            System::CoshShift => CoshShift.eval(z),
        }
    }
}

impl System {
    pub fn parse(s: &str) -> crate::Result<System> {
        match s.trim() {
            "z2p1" => Ok(System::Poly { name: "z2p1".into(), poly: z2p1() }),
            "cosh-shift" => Ok(System::CoshShift),
            "xi-approx" => Err(Error::Invalid("xi-approx is only available through the xi-approx subcommand".into())),
            other => Ok(System::Poly { name: "custom".into(), poly: ComplexPoly::from_json(other)? }),
        }
    }

    fn describe(&self) -> Value {
        match self {
            System::Poly { name, poly } => json!({ "name": name, "coefficients": poly.to_pairs() }),
            System::CoshShift => json!({ "name": "cosh-shift", "coefficients": Value::Null }),
        }
    }

    fn poly(&self) -> Result<&ComplexPoly, CliError> {
        match self {
            System::Poly { poly, .. } => Ok(poly),
            System::CoshShift => usage("this command needs a polynomial system"),
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    prefix: String,
    rtol: f64,
    escape_radius: f64,
    closure_tol: f64,
}

impl Ctx {
    fn ode(&self) -> Options {
        Options { rtol: self.rtol, escape_radius: self.escape_radius, ..Options::default() }
    }

    fn periodic(&self) -> PeriodicOptions {
        let d = PeriodicOptions::default();
        PeriodicOptions {
            closure_tol: self.closure_tol.min(d.closure_tol),
            ode: Options { rtol: self.rtol.min(d.ode.rtol), escape_radius: self.escape_radius, ..d.ode },
            ..d
        }
    }

    fn system(&self, flag: &Option<String>) -> Result<System, CliError> {
        if let Some(s) = flag {
            return Ok(System::parse(s)?);
        }
        match &self.cfg.system {
            Some(Value::String(s)) => Ok(System::parse(s)?),
            Some(v @ Value::Array(_)) => Ok(System::parse(&v.to_string())?),
            Some(_) => usage("config `system` must be a name or a coefficient array"),
            None => usage("missing --poly"),
        }
    }

    fn out_path(&self, name: &str) -> Result<PathBuf, CliError> {
        let p = PathBuf::from(format!("{}{}", self.prefix, name));
        if let Some(dir) = p.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
        }
        Ok(p)
    }

    fn write(&self, name: &str, content: &str) -> Result<String, CliError> {
        let p = self.out_path(name)?;
        fs::write(&p, content).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        Ok(p.display().to_string())
    }
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| CliError::Usage(format!("bad number {t:?} in {s:?}")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => usage(format!("expected RE,IM, got {s:?}")),
    }
}

fn complex_arg(flag: &Option<String>, cfg: Option<[f64; 2]>, default: Option<Complex64>, name: &str) -> Result<Complex64, CliError> {
    match (flag, cfg, default) {
        (Some(s), _, _) => parse_complex(s),
        (None, Some([re, im]), _) => Ok(Complex64::new(re, im)),
        (None, None, Some(d)) => Ok(d),
        _ => usage(format!("missing --{name}")),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| CliError::Usage(format!("grid must look like NxM, got {s:?}")))?;
    let n: usize = a.trim().parse().map_err(|_| CliError::Usage(format!("bad grid {s:?}")))?;
    let m: usize = b.trim().parse().map_err(|_| CliError::Usage(format!("bad grid {s:?}")))?;
    if n == 0 || m == 0 {
        return usage("grid resolution must be positive");
    }
    Ok((n, m))
}

fn parse_window(flag: &Option<String>, cfg: Option<[f64; 4]>, default: [f64; 4]) -> Result<[f64; 4], CliError> {
    let w = match (flag, cfg) {
        (Some(s), _) => {
            let v: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad window {s:?}")))?;
            if v.len() != 4 {
                return usage("window needs re_min,re_max,im_min,im_max");
            }
            [v[0], v[1], v[2], v[3]]
        }
        (None, Some(w)) => w,
        (None, None) => default,
    };
    if !(w[1] > w[0] && w[3] > w[2]) || w.iter().any(|v| !v.is_finite()) {
        return usage("window must have re_max > re_min and im_max > im_min");
    }
    Ok(w)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        usage(format!("{name} must be positive, got {v}"))
    }
}

fn c2(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn termination_json(t: &Termination) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

/// Parses argv and runs the selected command, writing JSON to `out` and
/// usage errors to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };
    match execute(cli) {
        Ok(v) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap());
            0
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&json!({ "error": "usage", "message": msg })).unwrap());
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(CliError::Core(e)) => {
            let diag = json!({ "error": e.code(), "message": e.to_string() });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&diag).unwrap());
            if e.is_validation() {
                2
            } else {
                1
            }
        }
        Err(CliError::Io(msg)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&json!({ "error": "io", "message": msg })).unwrap());
            1
        }
    }
}

fn execute(cli: Cli) -> Result<Value, CliError> {
    let cfg: RunConfig = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    let rtol = positive("rtol", cli.rtol.or(cfg.rtol).unwrap_or(1e-10))?;
    let closure_tol = positive("closure_tol", cli.closure_tol.or(cfg.closure_tol).unwrap_or(1e-6))?;
    let escape_radius = cli.escape_radius.or(cfg.escape_radius).unwrap_or(1e8);
    if !(escape_radius > 1e3) {
        return usage("escape_radius must exceed 1e3");
    }
    let prefix = cli.out_prefix.clone().or(cfg.out_prefix.clone()).unwrap_or_else(|| "holoflow-out/".into());
    let ctx = Ctx { cfg, prefix, rtol, escape_radius, closure_tol };
    match &cli.command {
        Command::Portrait(a) => portrait(&ctx, a),
        Command::Infinity(a) => infinity(&ctx, a),
        Command::Separatrix(a) => separatrix(&ctx, a),
        Command::Winding(a) => winding(&ctx, a),
        Command::CtimeProbe(a) => ctime_probe(&ctx, a),
        Command::XiApprox(a) => xi_approx(&ctx, a),
        Command::Report(a) => report(&ctx, a),
    }
}

fn eps_arg(ctx: &Ctx, flag: Option<f64>) -> Result<f64, CliError> {
    let eps = flag.or(ctx.cfg.eps).unwrap_or(DEFAULT_SEED_EPS);
    if !(eps > 0.0 && eps <= 0.1) {
        return usage(format!("eps must lie in (0, 0.1], got {eps}"));
    }
    Ok(eps)
}

fn infinity_json(poly: &ComplexPoly, eps: f64) -> Result<Value, CliError> {
    let field = poly.to_real_field();
    let eqs = infinity_critical_points(&field)?;
    let k = khat(&field)?;
    let list: Vec<Value> = eqs
        .iter()
        .map(|e| {
            let seed = if e.kind == EquilibriumKind::Saddle { separatrix_seed(e, eps).ok().map(|s| c2(s.plane)) } else { None };
            json!({
                "p": e.p,
                "alpha": e.alpha,
                "chart": e.chart,
                "chart_jacobian": e.chart_jacobian,
                "eigenvalues": [c2(e.eigenvalues[0]), c2(e.eigenvalues[1])],
                "kind": e.kind,
                "antipode_flow_reversed": e.antipode_flow_reversed,
                "seed_point": seed,
            })
        })
        .collect();
    Ok(json!({
        "degree": poly.degree(),
        "khat": { "i": k.i, "j": k.j, "khat": k.khat },
        "equilibria": list,
    }))
}

fn infinity(ctx: &Ctx, a: &InfinityArgs) -> Result<Value, CliError> {
    let sys = ctx.system(&a.poly)?;
    let eps = eps_arg(ctx, a.eps)?;
    let mut v = infinity_json(sys.poly()?, eps)?;
    v["command"] = json!("infinity");
    v["system"] = sys.describe();
    v["eps"] = json!(eps);
    Ok(v)
}

struct Traced {
    eq_p: [f64; 2],
    alpha: f64,
    role: &'static str,
    traj: Trajectory,
}

fn trace_all(poly: &ComplexPoly, eps: f64, t_limit: f64, opts: &Options) -> Result<Vec<Traced>, CliError> {
    let eqs = infinity_critical_points(&poly.to_real_field())?;
    let mut out = Vec::new();
    for e in eqs.iter().filter(|e| e.kind == EquilibriumKind::Saddle) {
        let traj = trace_separatrix(poly, e, eps, t_limit, opts)?;
        let role = match separatrix_role(e) {
            crate::flow::SeparatrixRole::Incoming => "incoming",
            crate::flow::SeparatrixRole::Outgoing => "outgoing",
        };
        out.push(Traced { eq_p: e.p, alpha: e.alpha, role, traj });
    }
    Ok(out)
}

fn separatrix(ctx: &Ctx, a: &SeparatrixArgs) -> Result<Value, CliError> {
    let sys = ctx.system(&a.poly)?;
    let eps = eps_arg(ctx, a.eps)?;
    let t_limit = positive("t_limit", a.t_limit.or(ctx.cfg.t_limit).unwrap_or(50.0))?;
    let traced = trace_all(sys.poly()?, eps, t_limit, &ctx.ode())?;
    let tags: Vec<String> = (0..traced.len()).map(|k| format!("separatrix_{k}")).collect();
    let csv = trajectories_csv(traced.iter().zip(&tags).map(|(t, tag)| (tag.as_str(), t.traj.times.as_slice(), t.traj.states.as_slice())));
    let csv_path = ctx.write("separatrix.csv", &csv)?;
    let list: Vec<Value> = traced
        .iter()
        .zip(&tags)
        .map(|(t, tag)| {
            let max_im = t.traj.states.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            json!({
                "tag": tag,
                "p": t.eq_p,
                "alpha": t.alpha,
                "role": t.role,
                "samples": t.traj.states.len(),
                "max_abs_im": max_im,
                "termination": termination_json(&t.traj.termination),
            })
        })
        .collect();
    Ok(json!({ "command": "separatrix", "system": sys.describe(), "eps": eps, "t_limit": t_limit, "csv": csv_path, "separatrices": list }))
}

fn default_window(sys: &System) -> [f64; 4] {
    match sys {
        System::CoshShift => [-4.0, 5.0, -5.0, 5.0],
        System::Poly { .. } => [-3.0, 3.0, -3.0, 3.0],
    }
}

fn portrait(ctx: &Ctx, a: &PortraitArgs) -> Result<Value, CliError> {
    let sys = ctx.system(&a.poly)?;
    let (nx, ny) = parse_grid(a.grid.as_deref().or(ctx.cfg.grid.as_deref()).unwrap_or("10x10"))?;
    let w = parse_window(&a.window, ctx.cfg.window, default_window(&sys))?;
    let t_limit = positive("t_limit", a.t_limit.or(ctx.cfg.t_limit).unwrap_or(10.0))?;
    // Drawing only needs the window; stopping well outside it also keeps
    // exponentially fast fields from underflowing the step size first.
    let reach = 10.0 * w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let opts = Options { max_steps: 50_000, escape_radius: ctx.escape_radius.min(reach), ..ctx.ode() };
    let starts: Vec<Complex64> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| {
            Complex64::new(
                w[0] + (i as f64 + 0.5) / nx as f64 * (w[1] - w[0]),
                w[2] + (j as f64 + 0.5) / ny as f64 * (w[3] - w[2]),
            )
        })
        .collect();
    let orbits: Vec<Option<(Trajectory, Trajectory)>> = starts
        .par_iter()
        .map(|&z| {
            let fw = integrate(&sys, z, (0.0, t_limit), &opts).ok()?;
            let bw = integrate(&sys, z, (0.0, -t_limit), &opts).ok()?;
            Some((bw, fw))
        })
        .collect();
    let mut separatrices: Vec<(String, Trajectory)> = Vec::new();
    let mut equilibria = Vec::new();
    match &sys {
        System::Poly { poly, .. } => {
            if poly.degree() >= 2 {
                for (k, t) in trace_all(poly, DEFAULT_SEED_EPS, 50.0, &ctx.ode())?.into_iter().enumerate() {
                    separatrices.push((format!("separatrix_{k}"), t.traj));
                }
            }
            equilibria = poly.roots();
        }
        System::CoshShift => {
            let pi = std::f64::consts::PI;
            let kmin = (w[2] / pi).floor() as i64;
            let kmax = (w[3] / pi).ceil() as i64;
            for k in kmin..=kmax {
                let z = Complex64::new(0.5, k as f64 * pi);
                let fw = integrate(&sys, z, (0.0, t_limit), &opts)?;
                let bw = integrate(&sys, z, (0.0, -t_limit), &opts)?;
                separatrices.push((format!("separatrix_{k}"), join(&bw, &fw)));
                equilibria.push(CoshShift::center(k));
            }
        }
    }
    equilibria.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let joined: Vec<Trajectory> = orbits.iter().flatten().map(|(b, f)| join(b, f)).collect();
    let canvas = Canvas::new((w[0], w[1]), (w[2], w[3]), 600);
    let data = PortraitData {
        trajectories: joined.iter().map(|t| t.states.clone()).collect(),
        separatrices: separatrices.iter().map(|(_, t)| t.states.clone()).collect(),
        equilibria: equilibria.clone(),
        dirfield: direction_field(&sys, &canvas, 24),
    };
    let svg_path = ctx.write("portrait.svg", &render_portrait(&data, &canvas))?;
    let orbit_tags: Vec<String> = (0..joined.len()).map(|k| format!("orbit_{k}")).collect();
    let rows = joined
        .iter()
        .zip(&orbit_tags)
        .map(|(t, tag)| (tag.as_str(), t.times.as_slice(), t.states.as_slice()))
        .chain(separatrices.iter().map(|(tag, t)| (tag.as_str(), t.times.as_slice(), t.states.as_slice())));
    let csv_path = ctx.write("portrait.csv", &trajectories_csv(rows))?;
    Ok(json!({
        "command": "portrait",
        "system": sys.describe(),
        "window": w,
        "grid": [nx, ny],
        "t_limit": t_limit,
        "trajectories": joined.len(),
        "failed": orbits.iter().filter(|o| o.is_none()).count(),
        "separatrices": separatrices.len(),
        "equilibria": equilibria.iter().map(|z| c2(*z)).collect::<Vec<_>>(),
        "svg": svg_path,
        "csv": csv_path,
    }))
}

/// Backward and forward halves through the same start as one trajectory in
/// increasing time.
fn join(bw: &Trajectory, fw: &Trajectory) -> Trajectory {
    let mut times: Vec<f64> = bw.times.iter().rev().copied().collect();
    let mut states: Vec<Complex64> = bw.states.iter().rev().copied().collect();
    times.extend(fw.times.iter().skip(1));
    states.extend(fw.states.iter().skip(1));
    Trajectory { times, states, termination: fw.termination }
}

fn winding(ctx: &Ctx, a: &WindingArgs) -> Result<Value, CliError> {
    let sys = ctx.system(&a.poly)?;
    let z0 = complex_arg(&a.z0, ctx.cfg.z0, None, "z0")?;
    let popts = ctx.periodic();
    if a.index_flip {
        let eps = a.eps.or(ctx.cfg.eps).unwrap_or(1e-3);
        let eps = positive("eps", eps)?;
        let r = index_flip(&sys, z0, eps, &popts)?;
        return Ok(json!({
            "command": "winding",
            "mode": "index_flip",
            "system": sys.describe(),
            "z_star": c2(z0),
            "eps": eps,
            "sides": [c2(r.sides[0]), c2(r.sides[1])],
            "centers": [c2(r.centers[0]), c2(r.centers[1])],
            "windings": r.windings,
            "product": r.product,
            "flipped": r.product == -1,
        }));
    }
    let orbit = detect_periodic(&sys, z0, &popts)?;
    let center_override = match (&a.center, ctx.cfg.center) {
        (None, None) => None,
        _ => Some(complex_arg(&a.center, ctx.cfg.center, None, "center")?),
    };
    let v = match orbit {
        Some(o) => {
            let center = center_override.unwrap_or(o.center);
            let n = o.samples.len();
            let w = crate::flow::winding_number(&o.samples[..n - 1], center)?;
            json!({
                "command": "winding",
                "mode": "orbit",
                "system": sys.describe(),
                "z0": c2(z0),
                "periodic": true,
                "period": o.period,
                "gap": o.gap,
                "center": c2(center),
                "winding": w,
            })
        }
        None => json!({
            "command": "winding",
            "mode": "orbit",
            "system": sys.describe(),
            "z0": c2(z0),
            "periodic": false,
            "period": Value::Null,
            "gap": Value::Null,
            "center": Value::Null,
            "winding": Value::Null,
        }),
    };
    Ok(v)
}

fn ctime_probe(ctx: &Ctx, a: &CtimeArgs) -> Result<Value, CliError> {
    let sys = ctx.system(&a.poly)?;
    let z0 = complex_arg(&a.z0, ctx.cfg.z0, None, "z0")?;
    let t1 = positive("t1", a.t1.or(ctx.cfg.t1).ok_or_else(|| CliError::Usage("missing --t1".into()))?)?;
    let t2 = positive("t2", a.t2.or(ctx.cfg.t2).ok_or_else(|| CliError::Usage("missing --t2".into()))?)?;
    let popts = PathOptions {
        ode: Options { rtol: ctx.rtol.min(1e-12), escape_radius: ctx.escape_radius, stall_detection: false, ..Options::default() },
        closure_tol: ctx.closure_tol,
        ..PathOptions::default()
    };
    let seps = match &sys {
        System::CoshShift => {
            let k = ((z0.im.abs() + t1 + t2) / std::f64::consts::PI).ceil() as i64 + 4;
            SeparatrixSet::cosh_shift(k)
        }
        System::Poly { poly, .. } if poly.degree() >= 2 => SeparatrixSet::from_polynomial(poly, DEFAULT_SEED_EPS, 50.0, &ctx.ode())?,
        System::Poly { .. } => SeparatrixSet::default(),
    };
    let r = probe_rectangle(&sys, z0, t1, t2, &seps, &popts)?;
    let mut v = serde_json::to_value(&r).unwrap();
    v["command"] = json!("ctime-probe");
    v["system"] = sys.describe();
    v["z0"] = c2(z0);
    v["closes"] = json!(r.closure_gap < ctx.closure_tol);
    let grid = a.grid.as_deref().or(ctx.cfg.grid.as_deref());
    v["surface"] = match grid {
        Some(g) => {
            let (nx, ny) = parse_grid(g)?;
            let tg = TimeGrid { re_min: 0.0, re_max: t1, nx, im_min: 0.0, im_max: t2, ny };
            let s = surface_sample(&sys, z0, &tg, &popts)?;
            let path = ctx.write("surface.csv", &s.to_csv())?;
            json!({ "csv": path, "nodes": s.nodes.len(), "holes": s.holes() })
        }
        None => Value::Null,
    };
    Ok(v)
}

fn parse_time_path(spec: &str) -> Result<TimePath, CliError> {
    let words: Vec<&str> = spec.split_whitespace().collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| CliError::Usage(format!("bad number {t:?} in path {spec:?}")));
    let path = match words.as_slice() {
        ["straight", to] => TimePath::straight(parse_complex(to)?),
        ["rect", a, b] => {
            let (t1, t2) = (num(a)?, num(b)?);
            if !(t1 > 0.0 && t2 > 0.0) {
                return usage("rect extents must be positive");
            }
            TimePath::rectangle(t1, t2)
        }
        ["loop", k] => TimePath::straight(Complex64::new(0.0, 2.0 * std::f64::consts::PI * num(k)?)),
        ["circle", c, n] => {
            let n: usize = n.parse().map_err(|_| CliError::Usage(format!("bad vertex count in {spec:?}")))?;
            let center = parse_complex(c)?;
            if n < 3 || center.norm() == 0.0 {
                return usage("circle needs a nonzero centre and at least 3 vertices");
            }
            TimePath::circle_through_origin(center, n)
        }
        _ => return usage(format!("unknown path spec {spec:?}")),
    };
    Ok(path)
}

fn xi_approx(ctx: &Ctx, a: &XiArgs) -> Result<Value, CliError> {
    let zeros = a.zeros.clone().or(ctx.cfg.zeros.clone()).ok_or_else(|| CliError::Usage("missing --zeros".into()))?;
    let file = fs::File::open(&zeros).map_err(|e| CliError::Usage(format!("{}: {e}", zeros.display())))?;
    let table = load_zeros(BufReader::new(file))?;
    let m = a.m.or(ctx.cfg.m).unwrap_or(4);
    let z0 = complex_arg(&a.z0, ctx.cfg.z0, Some(Complex64::new(2.0, 20.0)), "z0")?;
    let spec = a.path.clone().or(ctx.cfg.path.clone()).unwrap_or_else(|| "straight 1".into());
    let path = parse_time_path(&spec)?;
    let sys = build_system(&table, m, z0)?;
    let copts = ContinueOptions::default();
    let run = continue_root(&sys, &path, &copts)?;
    let inv = invariant_report(&run, &sys);
    let mut csv = String::from("re_t,im_t,re_z,im_z,residual\n");
    for ((t, z), r) in run.t_samples.iter().zip(&run.roots).zip(&run.residuals) {
        csv.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.12e},{:.3e}\n", t.re, t.im, z.re, z.im, r));
    }
    let csv_path = ctx.write("xi_path.csv", &csv)?;
    let (t_end, z_end) = run.end();
    let report = json!({
        "m": m,
        "z0": c2(z0),
        "path": spec,
        "t_end": c2(t_end),
        "root_end": c2(z_end),
        "closure_gap": (z_end - z0).norm(),
        "samples": run.roots.len(),
        "branch_events": serde_json::to_value(&run.branch_events).unwrap(),
        "invariants": serde_json::to_value(inv).unwrap(),
    });
    let report_path = ctx.write("xi_report.json", &(serde_json::to_string_pretty(&report).unwrap() + "\n"))?;
    let portrait = match a.grid.as_deref().or(ctx.cfg.grid.as_deref()) {
        Some(g) => {
            let (nx, ny) = parse_grid(g)?;
            let w = parse_window(&a.window, ctx.cfg.window, [-7.0, 8.0, -1.0, 30.0])?;
            let region = Region { re_min: w[0], re_max: w[1], im_min: w[2], im_max: w[3] };
            let p = flow_portrait(&table, m, &region, (nx, ny), &xi::default_t_set(), &copts)?;
            let attractors = p.upper_attractors(&table, 0.5);
            let canvas = Canvas::new((w[0], w[1]), (w[2], w[3]), 500);
            let data = PortraitData {
                trajectories: p.cells.iter().flat_map(|c| c.paths.iter().cloned()).collect(),
                separatrices: Vec::new(),
                equilibria: sys.rho.clone(),
                dirfield: Vec::new(),
            };
            let svg_path = ctx.write("xi_portrait.svg", &render_portrait(&data, &canvas))?;
            json!({
                "grid": [nx, ny],
                "window": w,
                "cells": p.cells.len(),
                "failures": p.failures(),
                "upper_attractors": attractors.len(),
                "attractor_ordinates": attractors.iter().map(|z| z.im).collect::<Vec<_>>(),
                "svg": svg_path,
            })
        }
        None => Value::Null,
    };
    Ok(json!({
        "command": "xi-approx",
        "zeros": zeros.display().to_string(),
        "zeros_loaded": table.count(),
        "csv": csv_path,
        "report": report_path,
        "result": report,
        "portrait": portrait,
    }))
}

fn report(ctx: &Ctx, a: &ReportArgs) -> Result<Value, CliError> {
    let sys = ctx.system(&a.poly)?;
    match &sys {
        System::Poly { poly, .. } => {
            let inf = if poly.degree() >= 2 { infinity_json(poly, DEFAULT_SEED_EPS)? } else { Value::Null };
            let region = Region { re_min: -1e6, re_max: 1e6, im_min: -1e6, im_max: 1e6 };
            let branch = crate::ctime::detect_branch_points(poly, &region);
            let roots = {
                let mut r = poly.roots();
                r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                r
            };
            let seps: Vec<Value> = if poly.degree() >= 2 {
                trace_all(poly, DEFAULT_SEED_EPS, 50.0, &ctx.ode())?
                    .iter()
                    .map(|t| json!({ "p": t.eq_p, "alpha": t.alpha, "role": t.role, "termination": termination_json(&t.traj.termination) }))
                    .collect()
            } else {
                Vec::new()
            };
            Ok(json!({
                "command": "report",
                "system": sys.describe(),
                "degree": poly.degree(),
                "equilibria": roots.iter().map(|z| c2(*z)).collect::<Vec<_>>(),
                "newton_branch_points": branch.iter().map(|z| c2(*z)).collect::<Vec<_>>(),
                "infinity": inf,
                "separatrices": seps,
                "index_flips": Value::Null,
            }))
        }
        System::CoshShift => {
            let popts = ctx.periodic();
            let pi = std::f64::consts::PI;
            let mut flips = Vec::new();
            for k in -1i64..=1 {
                let y = locate_separatrix(&sys, 3.0, k as f64 * pi - 1.3, k as f64 * pi + 1.7, 1e-7, &popts)?;
                let r = index_flip(&sys, Complex64::new(3.0, k as f64 * pi), 1e-3, &popts)?;
                flips.push(json!({
                    "k": k,
                    "located_im": y,
                    "error": (y - k as f64 * pi).abs(),
                    "windings": r.windings,
                    "product": r.product,
                }));
            }
            Ok(json!({
                "command": "report",
                "system": sys.describe(),
                "degree": Value::Null,
                "equilibria": (-2i64..=1).map(|k| c2(CoshShift::center(k))).collect::<Vec<_>>(),
                "newton_branch_points": Value::Null,
                "infinity": Value::Null,
                "separatrices": Vec::<Value>::new(),
                "index_flips": flips,
            }))
        }
    }
}

/// Convenience for callers that only need the exit code and captured stdout.
pub fn run_captured<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}
