//! Log-log line chart of an error column against `n`, one series per
//! family. Presentation only: it reads finished rows and computes nothing
//! the CSV does not already hold.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::family::FamilyKind;
use super::fit::ErrorColumn;
use super::row::ScanRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn series(rows: &[ScanRow], column: ErrorColumn) -> BTreeMap<FamilyKind, Vec<(f64, f64)>> {
    let mut out: BTreeMap<FamilyKind, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        if let Some(e) = column.value(r).filter(|e| *e > 0.0) {
            out.entry(r.family).or_default().push((r.n as f64, e));
        }
    }
    out
}

pub fn render_svg(rows: &[ScanRow], column: ErrorColumn) -> String {
    let data = series(rows, column);
    let pts = data.values().flatten();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        xmin = xmin.min(x.log10());
        xmax = xmax.max(x.log10());
        ymin = ymin.min(y.log10());
        ymax = ymax.max(y.log10());
    }
    if xmin > xmax {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    if xmax - xmin < 1e-9 {
        xmax = xmin + 1.0;
    }
    if ymax - ymin < 1e-9 {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| MARGIN + (x.log10() - xmin) / (xmax - xmin) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y.log10() - ymin) / (ymax - ymin) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#);
    for e in xmin.floor() as i32..=xmax.ceil() as i32 {
        let v = 10f64.powi(e);
        if (e as f64) < xmin - 1e-9 || (e as f64) > xmax + 1e-9 {
            continue;
        }
        let x = sx(v);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{e}</text>"#, b + 16.0);
    }
    for e in ymin.floor() as i32..=ymax.ceil() as i32 {
        if (e as f64) < ymin - 1e-9 || (e as f64) > ymax + 1e-9 {
            continue;
        }
        let y = sy(10f64.powi(e));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">1e{e}</text>"#, l - 6.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">n</text>"#, WIDTH / 2.0, HEIGHT - 16.0);
    let _ = writeln!(s, r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{column}</text>"#, HEIGHT / 2.0, HEIGHT / 2.0);
    for (i, (fam, pts)) in data.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#, path.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = t + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" fill="{color}" text-anchor="end">{fam}</text>"#, r);
    }
    s.push_str("</svg>\n");
    s
}
