//! Static step-plot rendering of quality curves.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use anytime_core::QualityCurve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Vertices of the step function, right-continuous jumps drawn vertically.
fn step_points(curve: &QualityCurve) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, curve.initial())];
    let mut level = curve.initial();
    for s in curve.steps() {
        pts.push((s.time, level));
        pts.push((s.time, s.quality));
        level = s.quality;
    }
    pts.push((curve.horizon(), level));
    pts
}

/// One polyline per curve, axes in ms and quality units, legend by name.
pub fn render_curve_svg(curves: &[(String, QualityCurve)]) -> Result<String> {
    if curves.is_empty() {
        bail!("no curves to render");
    }
    let t_max = curves.iter().map(|(_, c)| c.horizon()).fold(0.0, f64::max);
    let q_max = curves.iter().map(|(_, c)| c.final_quality().max(c.initial())).fold(0.0, f64::max);
    let q_min = curves.iter().map(|(_, c)| c.initial()).fold(0.0, f64::min);
    let t_span = if t_max > 0.0 { t_max } else { 1.0 };
    let q_span = if q_max > q_min { q_max - q_min } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + t / t_span * plot_w;
    let y = |q: f64| TOP + plot_h - (q - q_min) / q_span * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#)?;
    let (x0, y0) = (LEFT, TOP + plot_h);
    writeln!(
        svg,
        r#"<path d="M{x0} {TOP} L{x0} {y0} L{:.2} {y0}" fill="none" stroke="black"/>"#,
        LEFT + plot_w
    )?;
    for i in 0..=TICKS {
        let frac = i as f64 / TICKS as f64;
        let t = frac * t_span;
        let q = q_min + frac * q_span;
        let (tx, qy) = (x(t), y(q));
        writeln!(svg, r#"<line x1="{tx:.2}" y1="{y0}" x2="{tx:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 4.0)?;
        writeln!(svg, r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{t:.2}</text>"#, y0 + 18.0)?;
        writeln!(svg, r#"<line x1="{:.2}" y1="{qy:.2}" x2="{x0}" y2="{qy:.2}" stroke="black"/>"#, x0 - 4.0)?;
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{q:.2}</text>"#, x0 - 8.0, qy + 4.0)?;
    }
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time (ms)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    )?;
    writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">quality</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )?;
    for (i, (name, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = step_points(curve)
            .into_iter()
            .map(|(t, q)| format!("{:.2},{:.2}", x(t), y(q)))
            .collect();
        writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        )?;
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 16.0;
        writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        )?;
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(name))?;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use anytime_core::Step;

    #[test]
    fn one_polyline_per_curve() {
        let flat = QualityCurve::new(5.0, vec![], 2.0).unwrap();
        let svg = render_curve_svg(&[("flat".into(), flat.clone())]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let stepped = QualityCurve::new(0.0, vec![Step::new(1.0, 3.0)], 2.0).unwrap();
        let svg = render_curve_svg(&[("a".into(), flat), ("b<c".into(), stepped)]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(render_curve_svg(&[]).is_err());
    }

    #[test]
    fn constant_curve_is_horizontal() {
        let flat = QualityCurve::new(5.0, vec![], 2.0).unwrap();
        let pts = step_points(&flat);
        assert_eq!(pts, vec![(0.0, 5.0), (2.0, 5.0)]);
    }
}
