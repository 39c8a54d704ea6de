//! Minimal SVG line and bar charts for the benchmark outputs.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 320.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 120.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, y_lo: f64, y_hi: f64, label: &str) {
    let ph = H - TOP - BOTTOM;
    let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, H - BOTTOM);
    for k in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let y = H - BOTTOM - ph * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            W - RIGHT,
            LEFT - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(label)
    );
}

/// Lines through `(x, y)` points, one per named series; y spans `[0, 1]`.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    y_axis(&mut out, 0.0, 1.0, y_label);
    let xs: Vec<f64> = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)).filter(|x| x.is_finite()).collect();
    let x_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut x_hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !x_lo.is_finite() {
        out.push_str("</svg>\n");
        return out;
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let px = |x: f64| LEFT + pw * (x - x_lo) / (x_hi - x_lo);
    let py = |y: f64| H - BOTTOM - ph * y.clamp(0.0, 1.0);
    let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - BOTTOM, W - RIGHT, H - BOTTOM);
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ticks.dedup();
    for x in ticks {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x}</text>"#,
            px(x),
            H - BOTTOM + 14.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 10.0,
        escape(x_label)
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for p in &path {
            let (cx, cy) = p.split_once(',').unwrap();
            let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            W - RIGHT + 10.0,
            ly - 9.0,
            W - RIGHT + 24.0,
            ly,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical bars in `[0, 1]` with an optional dashed reference line.
pub fn bar_chart(title: &str, y_label: &str, bars: &[(String, f64)], reference: Option<f64>) -> String {
    let mut out = String::new();
    header(&mut out, title);
    y_axis(&mut out, 0.0, 1.0, y_label);
    let (pw, ph) = (W - LEFT - RIGHT + 100.0, H - TOP - BOTTOM);
    let slot = pw / bars.len().max(1) as f64;
    for (i, (label, v)) in bars.iter().enumerate() {
        let h = ph * v.clamp(0.0, 1.0);
        let x = LEFT + slot * i as f64 + slot * 0.15;
        let _ = writeln!(
            out,
            r##"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="#1f77b4"/>"##,
            H - BOTTOM - h,
            slot * 0.7
        );
        let cx = x + slot * 0.35;
        let cy = H - BOTTOM + 10.0;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{cy:.1}" text-anchor="end" transform="rotate(-40 {cx:.1} {cy:.1})">{}</text>"#,
            escape(label)
        );
    }
    if let Some(r) = reference {
        let y = H - BOTTOM - ph * r.clamp(0.0, 1.0);
        let _ = writeln!(
            out,
            r#"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black" stroke-dasharray="4 3"/>"#,
            LEFT + pw
        );
    }
    out.push_str("</svg>\n");
    out
}
