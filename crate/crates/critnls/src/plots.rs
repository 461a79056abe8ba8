//! SVG line charts rendered from a diagnostics table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use critnls_core::evolution::DiagnosticsRecord;

use crate::io::read_diagnostics;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

struct Series<'a> {
    label: &'a str,
    points: Vec<(f64, f64)>,
    dashed: bool,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
        }
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if b.1 - b.0 <= 0.0 {
        b.1 = b.0 + 1.0;
    }
    if b.3 - b.2 <= 1e-12 * b.3.abs().max(1.0) {
        let pad = 0.5 * b.3.abs().max(1.0);
        b.2 -= pad;
        b.3 += pad;
    }
    b
}

fn chart(title: &str, x_label: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(xv),
            HEIGHT - MARGIN + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let colors = ["#1f5fa8", "#c23b22", "#2a8a3e"];
    for (k, ser) in series.iter().enumerate() {
        let mut d = String::new();
        for &(x, y) in ser.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = write!(d, "{}{:.2} {:.2}", if d.is_empty() { "M" } else { " L" }, px(x), py(y));
        }
        let color = colors[k % colors.len()];
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            MARGIN + 16.0 * k as f64,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn line(rows: &[DiagnosticsRecord], label: &'static str, f: fn(&DiagnosticsRecord) -> f64) -> Series<'static> {
    Series {
        label,
        points: rows.iter().map(|r| (r.t, f(r))).collect(),
        dashed: false,
    }
}

/// Least-squares `K ≈ α + β t²` over the last quarter of rows.
fn terminal_fit(rows: &[DiagnosticsRecord]) -> Option<(f64, f64)> {
    let m = (rows.len() / 4).max(2);
    if rows.len() < 2 {
        return None;
    }
    let w = &rows[rows.len() - m..];
    let n = w.len() as f64;
    let mx = w.iter().map(|r| r.t * r.t).sum::<f64>() / n;
    let my = w.iter().map(|r| r.kinetic).sum::<f64>() / n;
    let sxx: f64 = w.iter().map(|r| (r.t * r.t - mx).powi(2)).sum();
    let sxy: f64 = w.iter().map(|r| (r.t * r.t - mx) * (r.kinetic - my)).sum();
    (sxx > 0.0).then(|| {
        let beta = sxy / sxx;
        (my - beta * mx, beta)
    })
}

/// Chart file names and contents, in a fixed order.
pub fn render(rows: &[DiagnosticsRecord]) -> Vec<(&'static str, String)> {
    let mut fit_series = vec![Series {
        label: "K",
        points: rows.iter().map(|r| (r.t * r.t, r.kinetic)).collect(),
        dashed: false,
    }];
    let mut fit_title = String::from("K against t²");
    if let Some((alpha, beta)) = terminal_fit(rows) {
        let xs = [rows[0].t * rows[0].t, rows[rows.len() - 1].t * rows[rows.len() - 1].t];
        fit_series.push(Series {
            label: "terminal fit",
            points: xs.iter().map(|&x| (x, alpha + beta * x)).collect(),
            dashed: true,
        });
        fit_title = format!("K against t² (terminal slope {beta:.4e})");
    }
    vec![
        ("kinetic.svg", chart("K(t)", "t", &[line(rows, "K", |r| r.kinetic)])),
        ("energy.svg", chart("E(t)", "t", &[line(rows, "E", |r| r.energy)])),
        ("virial.svg", chart("V(t)", "t", &[line(rows, "V", |r| r.virial)])),
        ("localized_virial.svg", chart("Rloc(t)", "t", &[line(rows, "Rloc", |r| r.r_loc)])),
        ("kinetic_vs_t2.svg", chart(&fit_title, "t²", &fit_series)),
    ]
}

/// Reads a diagnostics CSV and writes the chart set into `dir`.
pub fn render_from_csv(csv: &Path, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rows = read_diagnostics(csv)?;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, svg) in render(&rows) {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
