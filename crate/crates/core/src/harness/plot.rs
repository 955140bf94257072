use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::run::{read_learning_curves, EvalRecord};
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Renders mean return against real samples as an SVG document.
pub fn render_svg(curves: &[(String, Vec<EvalRecord>)]) -> Result<String> {
    let points: Vec<&EvalRecord> = curves.iter().flat_map(|(_, c)| c.iter()).collect();
    if points.is_empty() {
        return Err(Error::InvalidArgument("no learning-curve rows to plot".into()));
    }
    let x_max = points.iter().map(|p| p.real_samples as f64).fold(1.0, f64::max);
    let y_min = points.iter().map(|p| p.mean_return).fold(f64::INFINITY, f64::min);
    let y_max = points.iter().map(|p| p.mean_return).fold(f64::NEG_INFINITY, f64::max);
    let (y_lo, y_hi) = if y_max > y_min { (y_min, y_max) } else { (y_min - 1.0, y_max + 1.0) };
    let sx = |x: f64| MARGIN + x / x_max * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = f * x_max;
        let yv = y_lo + f * (y_hi - y_lo);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.0}</text>"#, sx(xv), y0 + 18.0, xv);
        let _ =
            writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.1}</text>"#, x0 - 6.0, sy(yv) + 4.0, yv);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">real samples</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">mean return</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (i, (label, rows)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> =
            rows.iter().map(|r| format!("{:.2},{:.2}", sx(r.real_samples as f64), sy(r.mean_return))).collect();
        let _ =
            writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{ly:.1}" fill="{color}" text-anchor="end">{label}</text>"#, x1);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes `learning_curve.svg` into `dir` from the CSVs found there.
pub fn plot(dir: &Path) -> Result<PathBuf> {
    let curves = read_learning_curves(dir)?;
    let svg = render_svg(&curves)?;
    let out = dir.join("learning_curve.svg");
    std::fs::write(&out, svg)?;
    Ok(out)
}
