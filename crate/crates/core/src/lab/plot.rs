//! Minimal SVG line charts of `log2` ratio against `x`, with the fitted and
//! predicted slopes of the first slope check on the ratio.

use std::fmt::Write;

use super::report::{Report, Statistic, Target};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const PAD: f64 = 48.0;

/// Renders a report. Only values that survive the CSV round trip are used, so
/// rendering a report re-read from its CSV gives the same bytes.
pub fn render_svg(report: &Report) -> String {
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.ratio() > 0.0 && r.ratio().is_finite())
        .map(|r| (r.x, r.ratio().log2()))
        .collect();
    let fit = report
        .checks
        .iter()
        .find(|c| c.statistic == Statistic::Slope && c.target == Target::Ratio);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let title = format!(
        "{} n={} p={} s={} {}",
        report.experiment,
        report.n,
        report.p.map_or("na".into(), |v| format!("{v}")),
        report.s.map_or("na".into(), |v| format!("{v:.4}")),
        report.family
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="20" font-family="monospace" font-size="12">{}</text>"#,
        escape(&title)
    );
    if pts.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }

    let (mut x0, mut x1) = bounds(pts.iter().map(|p| p.0));
    let (mut y0, mut y1) = bounds(pts.iter().map(|p| p.1));
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * PAD);
    let sy = |y: f64| HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * PAD);

    let _ = writeln!(
        out,
        r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2}" fill="none" stroke="black"/>"#,
        PAD,
        PAD,
        PAD,
        HEIGHT - PAD,
        WIDTH - PAD,
        HEIGHT - PAD
    );
    for (v, anchor_x) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = writeln!(
            out,
            r#"<text x="{anchor_x:.2}" y="{:.2}" font-family="monospace" font-size="10" text-anchor="middle">{v:.2}</text>"#,
            HEIGHT - PAD + 14.0
        );
    }
    for (v, anchor_y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{anchor_y:.2}" font-family="monospace" font-size="10" text-anchor="end">{v:.2}</text>"#,
            PAD - 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="10" text-anchor="middle">x</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="12" y="{:.2}" font-family="monospace" font-size="10">log2</text>"#,
        HEIGHT / 2.0
    );

    let mut d = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.2} {:.2} ", if i == 0 { "M" } else { "L" }, sx(*x), sy(*y));
    }
    let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="steelblue"/>"#, d.trim_end());
    for (x, y) in &pts {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            sx(*x),
            sy(*y)
        );
    }

    if let Some(c) = fit {
        if let Some(b) = c.intercept {
            line(&mut out, x0, x1, |x| b + c.observed * x, &sx, &sy, "firebrick", "");
            let xm = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
            let ym = b + c.observed * xm;
            line(&mut out, x0, x1, |x| ym + c.predicted * (x - xm), &sx, &sy, "gray", r#" stroke-dasharray="4 3""#);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="34" font-family="monospace" font-size="10">fit {:.3}  predicted {:.3}</text>"#,
                PAD, c.observed, c.predicted
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[allow(clippy::too_many_arguments)]
fn line(
    out: &mut String,
    x0: f64,
    x1: f64,
    f: impl Fn(f64) -> f64,
    sx: &impl Fn(f64) -> f64,
    sy: &impl Fn(f64) -> f64,
    color: &str,
    extra: &str,
) {
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"{extra}/>"#,
        sx(x0),
        sy(f(x0)),
        sx(x1),
        sy(f(x1))
    );
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
