//! Single-file SVG figures. CSV outputs are the contract; these are previews.

use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(width: f64, height: f64, notes: &[String]) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n"
    );
    for n in notes {
        // XML comments may not contain "--".
        let _ = writeln!(s, "<!-- {} -->", n.replace("--", "- -"));
    }
    s
}

/// Linear ramp from white (lowest finite value) to dark blue (highest).
fn ramp(t: f64) -> String {
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(255.0, 8.0), lerp(255.0, 48.0), lerp(255.0, 107.0))
}

/// Heatmap of a square matrix; missing cells are grey, every cell is labelled
/// with its value to two decimals.
pub fn heatmap(labels: &[String], values: &[Vec<Option<f64>>], notes: &[String]) -> String {
    let cell = 56.0;
    let margin = 90.0;
    let n = labels.len() as f64;
    let finite: Vec<f64> = values.iter().flatten().flatten().copied().collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = open(margin + n * cell + 20.0, margin + n * cell + 20.0, notes);
    for (k, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let (x, y) = (margin + j as f64 * cell, margin + k as f64 * cell);
            let (fill, text) = match v {
                Some(v) => {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
                    (ramp(t), Some((format!("{v:.2}"), if t > 0.5 { "white" } else { "black" })))
                }
                None => ("#dddddd".to_string(), None),
            };
            let _ = writeln!(s, "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{fill}\" stroke=\"white\"/>");
            if let Some((t, ink)) = text {
                let _ = writeln!(
                    s,
                    "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" fill=\"{ink}\">{t}</text>",
                    x + cell / 2.0,
                    y + cell / 2.0 + 4.0
                );
            }
        }
    }
    for (k, l) in labels.iter().enumerate() {
        let mid = margin + (k as f64 + 0.5) * cell;
        let l = escape(l);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{l}</text>", margin - 6.0, mid + 4.0);
        let _ = writeln!(s, "<text x=\"{mid}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{l}</text>", margin - 8.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Projected points over a grid of predicted classes.
pub struct Scatter<'a> {
    pub names: &'a [String],
    pub points: &'a [([f64; 2], usize)],
    pub cells: &'a [([f64; 2], usize)],
    pub step: [f64; 2],
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Scatter<'_> {
    pub fn render(&self, notes: &[String]) -> String {
        let (w, h, m) = (520.0, 520.0, 20.0);
        let sx = w / (self.hi[0] - self.lo[0]);
        let sy = h / (self.hi[1] - self.lo[1]);
        let px = |z: [f64; 2]| (m + (z[0] - self.lo[0]) * sx, m + (self.hi[1] - z[1]) * sy);
        let legend = 18.0 * self.names.len() as f64;
        let mut s = open(w + 2.0 * m, h + 2.0 * m + legend, notes);
        for &(z, k) in self.cells {
            let (x, y) = px([z[0] - 0.5 * self.step[0], z[1] + 0.5 * self.step[1]]);
            let _ = writeln!(
                s,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" fill-opacity=\"0.18\"/>",
                self.step[0] * sx,
                self.step[1] * sy,
                color(k)
            );
        }
        for &(z, k) in self.points {
            let (x, y) = px(z);
            let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{}\"/>", color(k));
        }
        let _ = writeln!(s, "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"black\"/>");
        for (k, name) in self.names.iter().enumerate() {
            let y = h + 2.0 * m + 18.0 * k as f64 + 4.0;
            let _ = writeln!(s, "<circle cx=\"{}\" cy=\"{y}\" r=\"4\" fill=\"{}\"/>", m + 4.0, color(k));
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>", m + 14.0, y + 4.0, escape(name));
        }
        s.push_str("</svg>\n");
        s
    }
}
