//! Standalone SVG line plots. Output is a pure function of the input, so
//! identical data gives identical bytes.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    LogLog,
    Linear,
    /// Linear axes; the first curve is drawn as markers (measured), the
    /// rest as lines (analytic).
    Overdamping,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-log" | "loglog" => Ok(PlotKind::LogLog),
            "linear" => Ok(PlotKind::Linear),
            "overdamping" => Ok(PlotKind::Overdamping),
            other => Err(Error::InvalidArgument(format!("unknown plot kind {other:?} (log-log, linear, overdamping)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Reads a header + rows CSV. The first numeric column is the abscissa,
/// every other numeric column a curve; columns with any non-numeric
/// entry are skipped.
pub fn parse_plot_csv(text: &str) -> Result<Vec<Curve>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Format("CSV has no header".into()));
    }
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); headers.len()];
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != headers.len() {
            return Err(Error::Format(format!("row has {} fields, header has {}", rec.len(), headers.len())));
        }
        for (c, field) in rec.iter().enumerate() {
            cols[c].push(field.parse::<f64>().ok());
        }
    }
    if cols[0].is_empty() {
        return Err(Error::Format("CSV has no data rows".into()));
    }
    let numeric: Vec<usize> = (0..headers.len()).filter(|&c| cols[c].iter().all(Option::is_some)).collect();
    if numeric.len() < 2 {
        return Err(Error::Format("need at least two numeric columns".into()));
    }
    let x: Vec<f64> = cols[numeric[0]].iter().map(|v| v.unwrap()).collect();
    Ok(numeric[1..]
        .iter()
        .map(|&c| Curve {
            name: headers[c].clone(),
            x: x.clone(),
            y: cols[c].iter().map(|v| v.unwrap()).collect(),
        })
        .collect())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: [f64; 4] = [70.0, 20.0, 30.0, 50.0]; // left, right, top, bottom
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Axis> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        Some(Axis { lo, hi, log })
    }

    fn map(&self, v: f64, a: f64, b: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        a + (v - self.lo) / (self.hi - self.lo) * (b - a)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|k| {
                let u = self.lo + (self.hi - self.lo) * k as f64 / 4.0;
                let label = if self.log { format!("1e{u:.1}") } else { format!("{u:.3}") };
                (if self.log { 10f64.powf(u) } else { u }, label)
            })
            .collect()
    }
}

pub fn render_svg(curves: &[Curve], kind: PlotKind, title: &str) -> Result<String> {
    let log = kind == PlotKind::LogLog;
    let keep = |x: f64, y: f64| x.is_finite() && y.is_finite() && (!log || (x > 0.0 && y > 0.0));
    let points: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| c.x.iter().zip(&c.y).filter(|(x, y)| keep(**x, **y)).map(|(x, y)| (*x, *y)).collect())
        .collect();
    let all = || points.iter().flatten();
    let xa = Axis::fit(all().map(|p| p.0), log).ok_or_else(|| Error::Format("nothing to plot".into()))?;
    let ya = Axis::fit(all().map(|p| p.1), log).ok_or_else(|| Error::Format("nothing to plot".into()))?;
    let (x0, x1) = (MARGIN[0], WIDTH - MARGIN[1]);
    let (y0, y1) = (HEIGHT - MARGIN[3], MARGIN[2]);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{:.1}" y="18" font-size="14" text-anchor="middle" font-family="sans-serif">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    writeln!(s, r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1).unwrap();
    for (v, label) in xa.ticks() {
        let x = xa.map(v, x0, x1);
        writeln!(s, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle" font-family="sans-serif">{label}</text>"#, y0 + 18.0).unwrap();
    }
    for (v, label) in ya.ticks() {
        let y = ya.map(v, y0, y1);
        writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end" font-family="sans-serif">{label}</text>"#, x0 - 8.0, y + 4.0).unwrap();
    }
    for (i, (curve, pts)) in curves.iter().zip(&points).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", xa.map(*x, x0, x1), ya.map(*y, y0, y1))).collect();
        if kind == PlotKind::Overdamping && i == 0 {
            for c in &coords {
                let (cx, cy) = c.split_once(',').unwrap();
                writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#).unwrap();
            }
        } else if !coords.is_empty() {
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" ")).unwrap();
        }
        let ly = y1 + 16.0 * (i as f64 + 1.0);
        writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" font-size="11" fill="{color}" text-anchor="end" font-family="sans-serif">{}</text>"#, x1 - 6.0, escape(&curve.name)).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// CSV text to SVG text.
pub fn plot_csv(text: &str, kind: PlotKind, title: &str) -> Result<String> {
    render_svg(&parse_plot_csv(text)?, kind, title)
}
