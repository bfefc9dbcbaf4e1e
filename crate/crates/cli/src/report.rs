//! CSV and SVG renderings of an evaluation.

use std::fmt::Write as _;

use boxcast_core::modeling::{EvaluationReport, FilmEvaluation, R2Point};
use serde::{Deserialize, Serialize};

pub const R2_HEADER: [&str; 2] = ["t", "r_squared"];
pub const ERRORS_HEADER: [&str; 5] = ["rank", "title", "revenue", "prediction", "relative_error"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R2Row {
    pub t: i32,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub rank: usize,
    pub title: String,
    pub revenue: u64,
    pub prediction: f64,
    pub relative_error: f64,
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .has_headers(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub fn r2_csv(points: &[R2Point]) -> Vec<u8> {
    let mut w = csv_writer();
    for p in points {
        w.serialize(R2Row {
            t: p.t,
            r_squared: p.r_squared,
        })
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// The `top_n` films by revenue, highest first.
pub fn error_rows(report: &EvaluationReport, top_n: usize) -> Vec<ErrorRow> {
    report
        .by_revenue()
        .into_iter()
        .take(top_n)
        .enumerate()
        .map(|(i, f): (usize, &FilmEvaluation)| ErrorRow {
            rank: i + 1,
            title: f.title.clone(),
            revenue: f.revenue as u64,
            prediction: f.prediction,
            relative_error: f.relative_error,
        })
        .collect()
}

pub fn errors_csv(rows: &[ErrorRow]) -> Vec<u8> {
    let mut w = csv_writer();
    if rows.is_empty() {
        w.write_record(ERRORS_HEADER).expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn parse_r2_csv(bytes: &[u8]) -> Result<Vec<R2Row>, csv::Error> {
    parse_with_header(bytes, &R2_HEADER)
}

pub fn parse_errors_csv(bytes: &[u8]) -> Result<Vec<ErrorRow>, csv::Error> {
    parse_with_header(bytes, &ERRORS_HEADER)
}

fn parse_with_header<T: serde::de::DeserializeOwned>(bytes: &[u8], header: &[&str]) -> Result<Vec<T>, csv::Error> {
    let mut r = csv::Reader::from_reader(bytes);
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("expected header {header:?}, found {found:?}"),
        )));
    }
    r.deserialize().collect()
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// 1, 2 or 5 times a power of ten, at least `raw`.
fn nice_step(raw: f64) -> f64 {
    if !(raw > 0.0) || !raw.is_finite() {
        return 1.0;
    }
    let magnitude = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw * (1.0 - 1e-12))
        .unwrap_or(10.0 * magnitude)
}

fn tick_label(value: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    let s = format!("{value:.decimals$}");
    if s.starts_with('-') && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

/// Value axis covering `[lo, hi]` with about five ticks.
struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn new(min: f64, max: f64) -> Self {
        let (min, max) = if max - min < 1e-9 { (min - 0.5, max + 0.5) } else { (min, max) };
        let step = nice_step((max - min) / 5.0);
        Axis {
            lo: (min / step).floor() * step,
            hi: (max / step).ceil() * step,
            step,
        }
    }

    fn y(&self, v: f64) -> f64 {
        let plot = HEIGHT - TOP - BOTTOM;
        TOP + plot * (self.hi - v) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step).round() as i64;
        (0..=count).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

fn svg_open(out: &mut String, width: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{HEIGHT:.0}" viewBox="0 0 {width:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{width:.0}" height="{HEIGHT:.0}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, axis: &Axis, right_edge: f64, label: &str) {
    for v in axis.ticks() {
        let y = axis.y(v);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{right_edge:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(v, axis.step)
        );
    }
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="#333"/>"##,
        HEIGHT - BOTTOM
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (HEIGHT - BOTTOM + TOP) / 2.0,
        (HEIGHT - BOTTOM + TOP) / 2.0,
        escape(label)
    );
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Line chart of R² against days before release, furthest day on the left.
pub fn r2_svg(points: &[R2Point], title: &str) -> String {
    let mut out = String::new();
    svg_open(&mut out, WIDTH, title);
    let values: Vec<f64> = points.iter().map(|p| finite_or_zero(p.r_squared)).collect();
    let min = values.iter().copied().fold(0.0, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(min);
    let axis = Axis::new(min, max);
    let right = WIDTH - RIGHT;
    y_axis(&mut out, &axis, right, "R²");

    let days: Vec<i32> = points.iter().map(|p| -p.t).collect();
    let far = days.iter().copied().max().unwrap_or(1);
    let near = days.iter().copied().min().unwrap_or(1);
    let span = (far - near).max(1) as f64;
    let x = |d: i32| LEFT + (right - LEFT) * (far - d) as f64 / span;

    let baseline = HEIGHT - BOTTOM;
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{baseline:.2}" x2="{right:.2}" y2="{baseline:.2}" stroke="#333"/>"##
    );
    let step = nice_step(span / 8.0).max(1.0) as i32;
    for d in (near..=far).filter(|d| d % step == 0 || *d == near) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{d}</text>"#,
            x(d),
            baseline + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">days before release</text>"#,
        (LEFT + right) / 2.0,
        HEIGHT - 12.0
    );

    let coords: Vec<String> = days
        .iter()
        .zip(&values)
        .map(|(&d, &v)| format!("{:.2},{:.2}", x(d), axis.y(v)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="2" points="{}"/>"##,
        coords.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// Bar per film in revenue rank order, height = relative error.
pub fn errors_svg(rows: &[ErrorRow], title: &str) -> String {
    const BAR: f64 = 14.0;
    let width = (LEFT + RIGHT + BAR * rows.len() as f64).max(WIDTH);
    let right = width - RIGHT;
    let mut out = String::new();
    svg_open(&mut out, width, title);
    let max = rows.iter().map(|r| finite_or_zero(r.relative_error)).fold(0.0, f64::max);
    let axis = Axis::new(0.0, max.max(1e-3));
    y_axis(&mut out, &axis, right, "relative error");

    let baseline = HEIGHT - BOTTOM;
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{baseline:.2}" x2="{right:.2}" y2="{baseline:.2}" stroke="#333"/>"##
    );
    let label_every = nice_step(rows.len() as f64 / 20.0).max(1.0) as usize;
    for (i, r) in rows.iter().enumerate() {
        let x = LEFT + BAR * i as f64;
        let top = axis.y(finite_or_zero(r.relative_error));
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#d62728"><title>{}. {}: {}</title></rect>"##,
            x + 1.0,
            BAR - 2.0,
            baseline - top,
            r.rank,
            escape(&r.title),
            r.relative_error
        );
        if r.rank == 1 || r.rank % label_every == 0 {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                x + BAR / 2.0,
                baseline + 16.0,
                r.rank
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">films by revenue rank</text>"#,
        (LEFT + right) / 2.0,
        HEIGHT - 12.0
    );
    out.push_str("</svg>\n");
    out
}
