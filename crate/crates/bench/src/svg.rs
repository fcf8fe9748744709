//! Minimal static SVG line plots.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One polyline per series over x = 1..n, with a legend.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<f64>)]) -> String {
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0).max(2);
    let (mut lo, mut hi) = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let sx = |i: usize| PAD + (W - 2.0 * PAD) * i as f64 / (n - 1) as f64;
    let sy = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / (hi - lo);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{0}" stroke="black"/>"#,
        H - PAD,
        W - PAD
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(x_label)).unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
        H / 2.0,
        escape(y_label)
    )
    .unwrap();
    for t in 0..=4 {
        let v = lo + (hi - lo) * t as f64 / 4.0;
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.2}</text>"#, PAD - 4.0, sy(v) + 4.0, v).unwrap();
    }
    writeln!(s, r#"<text x="{PAD}" y="{}" text-anchor="middle">1</text>"#, H - PAD + 14.0).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{n}</text>"#, W - PAD, H - PAD + 14.0).unwrap();
    for (k, (name, v)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = v
            .iter()
            .enumerate()
            .filter(|(_, y)| y.is_finite())
            .map(|(i, y)| format!("{:.1},{:.1}", sx(i), sy(*y)))
            .collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" ")).unwrap();
        let ly = PAD + 14.0 * k as f64;
        writeln!(
            s,
            r#"<rect x="{0}" y="{1}" width="10" height="3" fill="{color}"/><text x="{2}" y="{3}">{4}</text>"#,
            W - PAD - 150.0,
            ly,
            W - PAD - 136.0,
            ly + 4.0,
            escape(name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
