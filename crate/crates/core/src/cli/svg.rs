//! Minimal SVG line plots with a logarithmic time axis.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
/// Points kept per series; the rest are thinned on a log-spaced index grid.
const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(t, y)| *t > 0.0 && y.is_finite())
        .collect();
    if pts.len() <= MAX_POINTS {
        return pts;
    }
    let (t0, t1) = (pts[0].0.ln(), pts[pts.len() - 1].0.ln());
    let mut out = Vec::with_capacity(MAX_POINTS + 1);
    let mut j = 0;
    for k in 0..MAX_POINTS {
        let target = t0 + (t1 - t0) * k as f64 / (MAX_POINTS - 1) as f64;
        while j + 1 < pts.len() && pts[j].0.ln() < target {
            j += 1;
        }
        if out.last() != Some(&pts[j]) {
            out.push(pts[j]);
        }
    }
    out
}

/// Renders the series against `log10 t`. Points with `t <= 0` are dropped.
pub fn log_x_plot(title: &str, y_label: &str, series: &[Series]) -> String {
    let thinned: Vec<Vec<(f64, f64)>> = series.iter().map(|s| thin(&s.points)).collect();
    let all = thinned.iter().flatten();
    let (mut lx0, mut lx1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (t, y) in all {
        lx0 = lx0.min(t.log10());
        lx1 = lx1.max(t.log10());
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !lx0.is_finite() {
        (lx0, lx1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if lx1 - lx0 < 1e-12 {
        lx1 = lx0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |t: f64| MARGIN + (t.log10() - lx0) / (lx1 - lx0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for dec in (lx0.ceil() as i32)..=(lx1.floor() as i32) {
        let x = px(10f64.powi(dec));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{dec}</text>"##,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 16.0
        );
    }
    if y0 < 0.0 && y1 > 0.0 {
        let y = py(0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            WIDTH - MARGIN
        );
    }
    for (v, y) in [(y0 + pad, py(y0 + pad)), (y1 - pad, py(y1 - pad))] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{v:.3e}</text>"#, MARGIN - 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">t (log scale)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (k, (ser, pts)) in series.iter().zip(&thinned).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut poly = String::new();
        for (t, y) in pts {
            let _ = write!(poly, "{:.2},{:.2} ", px(*t), py(*y));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            poly.trim_end()
        );
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 80.0,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polylines_and_skips_t_zero() {
        let pts: Vec<(f64, f64)> = (0..5000).map(|i| (i as f64 * 0.1, (i as f64).sin())).collect();
        let svg = log_x_plot("demo", "x", &[Series { label: "x1", points: pts }]);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn empty_series_is_valid() {
        let svg = log_x_plot("empty", "y", &[]);
        assert!(svg.contains("</svg>"));
    }
}
