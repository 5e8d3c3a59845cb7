//! Metric-versus-parameter-count charts with a logarithmic x axis.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    /// `(num_params, metric)` sorted by parameter count.
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one chart. `stamp` adds a comment line and nothing else.
pub fn render_svg(title: &str, series: &[Series], stamp: Option<&str>) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let lx: Vec<f64> = all.iter().map(|p| p.0.max(1.0).log10()).collect();
    let (mut x0, mut x1) = lx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let y1 = all.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let y1 = if y1 > 0.0 { y1 * 1.05 } else { 1.0 };
    let px = |v: f64| LEFT + (v.max(1.0).log10() - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |v: f64| H - BOTTOM - v / y1 * (H - TOP - BOTTOM);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    if let Some(stamp) = stamp {
        writeln!(s, "<!-- generated {} -->", escape(stamp)).unwrap();
    }
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
    let (axis_y, right_x) = (H - BOTTOM, W - RIGHT);
    writeln!(s, r#"<line x1="{LEFT}" y1="{axis_y}" x2="{right_x}" y2="{axis_y}" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{axis_y}" stroke="black"/>"#).unwrap();
    for e in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = px(10f64.powi(e));
        writeln!(s, r#"<line x1="{x:.1}" y1="{axis_y}" x2="{x:.1}" y2="{}" stroke="black"/>"#, axis_y + 5.0).unwrap();
        writeln!(s, r#"<text x="{x:.1}" y="{}" font-size="12" text-anchor="middle">1e{e}</text>"#, axis_y + 20.0).unwrap();
    }
    for k in 0..=4 {
        let v = y1 * k as f64 / 4.0;
        let y = py(v);
        writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/>"#, LEFT - 5.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" font-size="12" text-anchor="end">{v:.3}</text>"#, LEFT - 8.0, y + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">number of parameters</text>"#, (LEFT + W - RIGHT) / 2.0, H - 10.0).unwrap();
    for (k, series) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        if pts.len() > 1 {
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" ")).unwrap();
        }
        for &(x, y) in &series.points {
            writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, px(x), py(y)).unwrap();
        }
        let ly = TOP + 16.0 * k as f64;
        writeln!(s, r#"<text x="{}" y="{ly}" font-size="12" fill="{color}" text-anchor="end">{}</text>"#, W - RIGHT - 5.0, escape(&series.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
