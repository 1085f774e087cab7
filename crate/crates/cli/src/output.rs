//! CSV text with a commented config echo, and minimal SVG line charts.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// Comment block naming the command and every effective option.
pub fn echo<T: serde::Serialize>(command: &str, args: &T) -> Result<Vec<String>, CliError> {
    let body = toml::to_string(args).map_err(|e| CliError::Config(e.to_string()))?;
    let mut lines = vec![format!("command = \"{command}\"")];
    lines.extend(body.lines().filter(|l| !l.is_empty()).map(str::to_string));
    Ok(lines)
}

pub struct Table {
    text: String,
}

impl Table {
    pub fn new(comments: &[String], header: &[&str]) -> Self {
        let mut text = String::new();
        for c in comments {
            for line in c.lines() {
                let _ = writeln!(text, "# {line}");
            }
        }
        let _ = writeln!(text, "{}", header.join(","));
        Self { text }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let cells: Vec<String> = cells.into_iter().collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let finite = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let text = |svg: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    };
    text(&mut svg, w / 2.0, m / 2.0, "middle", title);
    text(&mut svg, w / 2.0, h - 15.0, "middle", x_label);
    text(&mut svg, 15.0, h / 2.0, "start", y_label);
    text(&mut svg, m, h - m + 16.0, "middle", &format!("{x0:.3e}"));
    text(&mut svg, w - m, h - m + 16.0, "middle", &format!("{x1:.3e}"));
    text(&mut svg, m - 4.0, h - m, "end", &format!("{y0:.3e}"));
    text(&mut svg, m - 4.0, m + 4.0, "end", &format!("{y1:.3e}"));
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = m + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            w - m - 110.0,
            w - m - 90.0
        );
        text(&mut svg, w - m - 85.0, ly + 4.0, "start", &s.label);
    }
    svg.push_str("</svg>\n");
    svg
}
