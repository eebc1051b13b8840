use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::sweep::SweepResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "method,param,seed,chamfer,d1_mse,d1_psnr,d2_mse,d2_psnr,symbols,bits,failed,wall_ms";

/// Sweep rows as CSV text, one row per cell in result order.
pub fn csv_string(result: &SweepResult) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &result.rows {
        let q = &r.report;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.param,
            r.seed,
            q.chamfer,
            q.d1_mse,
            q.d1_psnr_db,
            q.d2_mse,
            q.d2_psnr_db,
            r.symbols,
            r.bits,
            r.failed,
            r.wall_ms
        )
        .expect("write to string");
    }
    s
}

pub fn emit_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, csv_string(result)).map_err(|e| Error::io(path, e))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Mean `y` per distinct `x` for each group, x ascending.
type Series = BTreeMap<String, Vec<(f64, f64)>>;

fn series(csv_text: &str, x: &str, y: &str, group: &str) -> Result<Series> {
    let mut reader = csv::ReaderBuilder::new().from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Column(name.to_string()))
    };
    let (cx, cy, cg) = (col(x)?, col(y)?, col(group)?);
    let mut sums: BTreeMap<String, Vec<(f64, f64, usize)>> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let num = |c: usize| -> Result<f64> {
            let field = rec.get(c).unwrap_or("");
            field.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("{:?} is not a number", field),
            })
        };
        let (vx, vy) = (num(cx)?, num(cy)?);
        let g = sums
            .entry(rec.get(cg).unwrap_or("").to_string())
            .or_default();
        match g.iter_mut().find(|(px, _, _)| *px == vx) {
            Some(e) => {
                e.1 += vy;
                e.2 += 1;
            }
            None => g.push((vx, vy, 1)),
        }
    }
    Ok(sums
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            (
                k,
                v.into_iter().map(|(x, s, n)| (x, s / n as f64)).collect(),
            )
        })
        .collect())
}

/// Line chart of `y` against `x` with one polyline per `group` value; `y` is
/// averaged over rows sharing a group and `x`.
pub fn render_svg(csv_text: &str, x: &str, y: &str, group: &str) -> Result<String> {
    let data = series(csv_text, x, y, group)?;
    let all = || data.values().flatten();
    let (x0, x1) = span(all().map(|p| p.0));
    let (y0, y1) = span(all().map(|p| p.1));
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + ph - (v - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        w,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{} vs {}</text>"#,
        LEFT + pw / 2.0,
        escape(y),
        escape(x)
    );
    let _ = writeln!(
        w,
        r#"<path d="M{LEFT:.2},{TOP:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw
    );
    for t in 0..TICKS {
        let f = t as f64 / (TICKS - 1) as f64;
        let (vx, vy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(vx), sy(vy));
        let _ = writeln!(
            w,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{vx:.3}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0
        );
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{vy:.3}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(x)
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y)
    );
    for (i, (name, pts)) in data.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b)))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 14.0 * i as f64 + 6.0;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_svg_plot(
    csv_path: impl AsRef<Path>,
    x: &str,
    y: &str,
    group: &str,
    out: impl AsRef<Path>,
) -> Result<()> {
    let (csv_path, out) = (csv_path.as_ref(), out.as_ref());
    let text = std::fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let svg = render_svg(&text, x, y, group)?;
    std::fs::write(out, svg).map_err(|e| Error::io(out, e))
}
