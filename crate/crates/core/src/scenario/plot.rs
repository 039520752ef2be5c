//! Minimal SVG line plots of the CSV outputs.
//!
//! Output depends only on the CSV bytes, so identical data gives identical
//! files.

use super::output::write_atomic;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// `t` against `pop` or `pop_*` columns.
    Population,
    /// `t` against `qd_*` and `eof_*` columns.
    Correlations,
    /// `E` against `y_minus_e*` columns, with the zero line.
    BoundState,
}

impl PlotKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "population" => Ok(Self::Population),
            "correlations" => Ok(Self::Correlations),
            "bound-state" => Ok(Self::BoundState),
            other => Err(Error::Config(format!(
                "unknown plot kind `{other}` (expected population, correlations or bound-state)"
            ))),
        }
    }

    fn x_column(self) -> &'static str {
        match self {
            Self::BoundState => "E",
            _ => "t",
        }
    }

    fn y_label(self) -> &'static str {
        match self {
            Self::Population => "|b(t)|²",
            Self::Correlations => "bits",
            Self::BoundState => "y(E) − E",
        }
    }

    fn selects(self, column: &str) -> bool {
        match self {
            Self::Population => column == "pop" || column.starts_with("pop_"),
            Self::Correlations => column.starts_with("qd_") || column.starts_with("eof_"),
            Self::BoundState => column.starts_with("y_minus_e"),
        }
    }

    /// Guesses the kind from a header row.
    pub fn infer(header: &[String]) -> Option<Self> {
        [Self::Correlations, Self::BoundState, Self::Population]
            .into_iter()
            .find(|k| header.first().map(|h| h == k.x_column()) == Some(true) && header.iter().any(|c| k.selects(c)))
    }
}

fn legend_label(column: &str) -> String {
    let pretty_w0 = |rest: &str| match rest.strip_prefix("w") {
        Some(v) => format!("ω₀ = {v}"),
        None => rest.to_string(),
    };
    if let Some(p) = column.strip_prefix("qd_") {
        format!("QD {p}")
    } else if let Some(p) = column.strip_prefix("eof_") {
        format!("EoF {p}")
    } else if let Some(rest) = column.strip_prefix("pop_") {
        pretty_w0(rest)
    } else if let Some(rest) = column.strip_prefix("y_minus_e_") {
        pretty_w0(rest)
    } else {
        column.to_string()
    }
}

struct Series {
    label: String,
    points: Vec<Option<(f64, f64)>>,
}

/// Parses CSV text (lines starting with `#` are skipped).
fn read_series(text: &str, kind: PlotKind) -> Result<Vec<Series>> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some(kind.x_column()) {
        return Err(Error::Plot(format!(
            "first column must be `{}`, found {:?}",
            kind.x_column(),
            header.first()
        )));
    }
    let picked: Vec<usize> = (1..header.len()).filter(|&i| kind.selects(&header[i])).collect();
    if picked.is_empty() {
        return Err(Error::Plot(format!("no columns match plot kind {kind:?} in {header:?}")));
    }
    let mut series: Vec<Series> = picked
        .iter()
        .map(|&i| Series {
            label: legend_label(&header[i]),
            points: Vec::new(),
        })
        .collect();
    let parse = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<f64>()
            .map(|v| v.is_finite().then_some(v))
            .map_err(|_| Error::Plot(format!("not a number: `{s}`")))
    };
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        rows += 1;
        let x = parse(rec.get(0).unwrap_or(""))?;
        for (s, &i) in series.iter_mut().zip(&picked) {
            let y = parse(rec.get(i).unwrap_or(""))?;
            s.points.push(x.zip(y));
        }
    }
    if rows == 0 {
        return Err(Error::Plot("csv has no data rows".into()));
    }
    Ok(series)
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// Renders an SVG document for `csv_text`.
pub fn render_svg(csv_text: &str, kind: PlotKind, title: &str) -> Result<String> {
    let series = read_series(csv_text, kind)?;
    let all = series.iter().flat_map(|s| s.points.iter().flatten());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(Error::Plot("no finite data points".into()));
    }
    if kind == PlotKind::BoundState {
        y0 = y0.min(0.0);
        y1 = y1.max(0.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.04 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in nice_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(t));
    }
    for t in nice_ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, tick_label(t));
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0, kind.x_column());
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(kind.y_label())
    );
    if kind == PlotKind::BoundState && y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(svg, r##"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##, sy(0.0), LEFT + pw, sy(0.0));
    }

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if i >= PALETTE.len() { r#" stroke-dasharray="6 3""# } else { "" };
        for run in s.points.split(Option::is_none) {
            if run.is_empty() {
                continue;
            }
            let pts: Vec<String> = run.iter().flatten().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#, pts.join(" "));
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#, lx + 22.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&s.label));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads `csv`, renders it, and writes `svg`. Nothing is written on error.
pub fn emit_plot(csv: &Path, kind: Option<PlotKind>, svg: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv)?;
    let kind = match kind {
        Some(k) => k,
        None => {
            let header: Vec<String> = text
                .lines()
                .find(|l| !l.starts_with('#'))
                .unwrap_or("")
                .split(',')
                .map(str::to_string)
                .collect();
            PlotKind::infer(&header).ok_or_else(|| Error::Plot(format!("cannot infer plot kind from header {header:?}")))?
        }
    };
    let title = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let doc = render_svg(&text, kind, &title)?;
    write_atomic(svg, doc.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_csv_is_an_error() {
        assert!(render_svg("t,pop\n", PlotKind::Population, "x").is_err());
    }

    #[test]
    fn wrong_columns_are_an_error() {
        assert!(render_svg("t,pop\n0,1\n", PlotKind::Correlations, "x").is_err());
        assert!(render_svg("E,pop\n0,1\n", PlotKind::Population, "x").is_err());
    }

    #[test]
    fn output_is_deterministic_and_labelled() {
        let csv = "t,qd_n1n2,eof_n1n2,mi_n1n2\n0,1,1,2\n1,0.5,0.4,1\n2,0.4,0.3,0.9\n";
        let a = render_svg(csv, PlotKind::Correlations, "fig").unwrap();
        let b = render_svg(csv, PlotKind::Correlations, "fig").unwrap();
        assert_eq!(a, b);
        assert!(a.contains("QD n1n2") && a.contains("EoF n1n2"));
        assert!(!a.contains("mi_n1n2"));
    }

    #[test]
    fn undefined_values_break_the_line() {
        let csv = "t,pop\n0,1\n1,\n2,0.5\n3,0.4\n";
        let svg = render_svg(csv, PlotKind::Population, "x").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn kind_is_inferred_from_header() {
        let h = |s: &str| s.split(',').map(str::to_string).collect::<Vec<_>>();
        assert_eq!(PlotKind::infer(&h("t,qd_n1n2,eof_n1n2")), Some(PlotKind::Correlations));
        assert_eq!(PlotKind::infer(&h("E,y_minus_e_w0.1")), Some(PlotKind::BoundState));
        assert_eq!(PlotKind::infer(&h("t,re_b,im_b,pop")), Some(PlotKind::Population));
        assert_eq!(PlotKind::infer(&h("x,y")), None);
    }
}
