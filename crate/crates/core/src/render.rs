//! Deterministic SVG phase portraits.

use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ode::VectorField;

/// Visible window of the state plane and the pixel size of the drawing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub width: u32,
    pub height: u32,
}

impl Canvas {
    pub fn new(re: (f64, f64), im: (f64, f64), width: u32) -> Self {
        let aspect = (im.1 - im.0) / (re.1 - re.0);
        let height = ((width as f64 * aspect).round() as u32).clamp(50, 4 * width.max(1));
        Canvas { re_min: re.0, re_max: re.1, im_min: im.0, im_max: im.1, width, height }
    }

    pub fn is_valid(&self) -> bool {
        self.re_max > self.re_min && self.im_max > self.im_min && self.width > 0 && self.height > 0
    }

    fn px(&self, z: Complex64) -> (f64, f64) {
        let x = (z.re - self.re_min) / (self.re_max - self.re_min) * self.width as f64;
        let y = (self.im_max - z.im) / (self.im_max - self.im_min) * self.height as f64;
        (x, y)
    }

    fn inside(&self, z: Complex64, margin: f64) -> bool {
        let dx = margin * (self.re_max - self.re_min);
        let dy = margin * (self.im_max - self.im_min);
        z.re >= self.re_min - dx && z.re <= self.re_max + dx && z.im >= self.im_min - dy && z.im <= self.im_max + dy
    }
}

/// Unit-length field directions on an `n × n` lattice over the canvas.
pub fn direction_field<F: VectorField + ?Sized>(field: &F, canvas: &Canvas, n: usize) -> Vec<(Complex64, Complex64)> {
    let mut out = Vec::with_capacity(n * n);
    if n == 0 {
        return out;
    }
    for j in 0..n {
        for i in 0..n {
            let z = Complex64::new(
                canvas.re_min + (i as f64 + 0.5) / n as f64 * (canvas.re_max - canvas.re_min),
                canvas.im_min + (j as f64 + 0.5) / n as f64 * (canvas.im_max - canvas.im_min),
            );
            let v = field.eval(z);
            let r = v.norm();
            if r.is_finite() && r > 0.0 {
                out.push((z, v / r));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PortraitData {
    pub trajectories: Vec<Vec<Complex64>>,
    pub separatrices: Vec<Vec<Complex64>>,
    pub equilibria: Vec<Complex64>,
    /// `(base point, unit direction)` glyphs.
    pub dirfield: Vec<(Complex64, Complex64)>,
}

/// Splits a polyline into on-canvas runs and drops sub-pixel moves.
fn pieces(canvas: &Canvas, pts: &[Complex64]) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur: Vec<(f64, f64)> = Vec::new();
    for &z in pts {
        if !z.is_finite() || !canvas.inside(z, 0.05) {
            if cur.len() > 1 {
                out.push(std::mem::take(&mut cur));
            }
            cur.clear();
            continue;
        }
        let p = canvas.px(z);
        if let Some(&(x, y)) = cur.last() {
            if (p.0 - x).abs() < 0.5 && (p.1 - y).abs() < 0.5 {
                continue;
            }
        }
        cur.push(p);
    }
    if cur.len() > 1 {
        out.push(cur);
    }
    out
}

fn polyline(s: &mut String, class: &str, pts: &[(f64, f64)]) {
    let _ = write!(s, "<polyline class=\"{class}\" points=\"");
    for (k, (x, y)) in pts.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s.push_str("\"/>\n");
}

pub fn render_portrait(data: &PortraitData, canvas: &Canvas) -> String {
    let (w, h) = (canvas.width, canvas.height);
    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">");
    s.push_str(
        "<style>\n\
         .axis{stroke:#000;stroke-width:0.8}\n\
         .dirfield{stroke:#999;stroke-width:0.7}\n\
         .orbit{fill:none;stroke:#1f4fd0;stroke-width:0.9}\n\
         .separatrix{fill:none;stroke:#d01f1f;stroke-width:1.6}\n\
         .equilibrium{fill:#000}\n\
         </style>\n",
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#fff\"/>");
    s.push_str("<g id=\"axes\">\n");
    if canvas.im_min <= 0.0 && canvas.im_max >= 0.0 {
        let (_, y) = canvas.px(Complex64::new(0.0, 0.0));
        let _ = writeln!(s, "<line class=\"axis\" x1=\"0\" y1=\"{y:.2}\" x2=\"{w}\" y2=\"{y:.2}\"/>");
    }
    if canvas.re_min <= 0.0 && canvas.re_max >= 0.0 {
        let (x, _) = canvas.px(Complex64::new(0.0, 0.0));
        let _ = writeln!(s, "<line class=\"axis\" x1=\"{x:.2}\" y1=\"0\" x2=\"{x:.2}\" y2=\"{h}\"/>");
    }
    let _ = writeln!(
        s,
        "<text x=\"4\" y=\"{}\" font-size=\"10\">Re [{}, {}]  Im [{}, {}]</text>",
        h.saturating_sub(4),
        canvas.re_min,
        canvas.re_max,
        canvas.im_min,
        canvas.im_max
    );
    s.push_str("</g>\n<g id=\"dirfield\">\n");
    let glyph = 0.35 * (canvas.re_max - canvas.re_min) / (data.dirfield.len() as f64).sqrt().max(1.0);
    for &(z, d) in &data.dirfield {
        if !canvas.inside(z, 0.0) {
            continue;
        }
        let (x1, y1) = canvas.px(z - 0.5 * glyph * d);
        let (x2, y2) = canvas.px(z + 0.5 * glyph * d);
        let _ = writeln!(s, "<line class=\"dirfield\" x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>");
    }
    s.push_str("</g>\n<g id=\"orbits\">\n");
    for t in &data.trajectories {
        for p in pieces(canvas, t) {
            polyline(&mut s, "orbit", &p);
        }
    }
    s.push_str("</g>\n<g id=\"separatrices\">\n");
    for t in &data.separatrices {
        for p in pieces(canvas, t) {
            polyline(&mut s, "separatrix", &p);
        }
    }
    s.push_str("</g>\n<g id=\"equilibria\">\n");
    for &z in &data.equilibria {
        if canvas.inside(z, 0.0) {
            let (x, y) = canvas.px(z);
            let _ = writeln!(s, "<circle class=\"equilibrium\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\"/>");
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// CSV with columns `t,re,im,tag`; one block per tagged polyline.
pub fn trajectories_csv<'a, I>(rows: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a [f64], &'a [Complex64])>,
{
    let mut s = String::from("t,re,im,tag\n");
    for (tag, times, states) in rows {
        for (t, z) in times.iter().zip(states) {
            let _ = writeln!(s, "{t:.12e},{:.12e},{:.12e},{tag}", z.re, z.im);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canvas() -> Canvas {
        Canvas::new((-3.0, 3.0), (-2.0, 2.0), 300)
    }

    #[test]
    fn empty_portrait_has_axes_only() {
        let svg = render_portrait(&PortraitData::default(), &canvas());
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("class=\"axis\"").count(), 2);
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn classes_and_determinism() {
        let line: Vec<Complex64> = (0..50).map(|k| Complex64::new(-2.5 + 0.1 * k as f64, 0.0)).collect();
        let circle: Vec<Complex64> = (0..60).map(|k| Complex64::new(0.0, 1.0) + Complex64::from_polar(0.5, k as f64 * 0.1)).collect();
        let field = |z: Complex64| z * z + 1.0;
        let data = PortraitData {
            trajectories: vec![circle],
            separatrices: vec![line],
            equilibria: vec![Complex64::new(0.0, 1.0)],
            dirfield: direction_field(&field, &canvas(), 8),
        };
        let a = render_portrait(&data, &canvas());
        assert_eq!(a, render_portrait(&data, &canvas()));
        assert!(a.contains("class=\"separatrix\""));
        assert!(a.contains("class=\"orbit\""));
        assert_eq!(a.matches("class=\"dirfield\"").count(), 64);
        // The separatrix sits on the horizontal axis line.
        let y = canvas().height as f64 / 2.0;
        assert!(a.contains(&format!(",{y:.2} ")));
    }

    #[test]
    fn off_canvas_points_split_polylines() {
        let pts = vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(100.0, 0.0),
            Complex64::new(1.0, 0.5),
            Complex64::new(2.0, 0.5),
        ];
        assert_eq!(pieces(&canvas(), &pts).len(), 2);
    }
}
