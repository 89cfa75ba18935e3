//! CSV, JSON manifest and SVG writers for sweep tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use heralded_core::scans::SweepTable;
use serde_json::{Map, Value};

use crate::CliError;

/// Twelve significant digits in scientific notation. Rust float formatting
/// never consults the locale.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        // Print negative zero as zero.
        format!("{:.11e}", v + 0.0)
    }
}

pub fn table_csv(table: &SweepTable) -> String {
    let mut out = table.header().join(",");
    out.push('\n');
    for i in 0..table.len() {
        let row: Vec<String> = std::iter::once(table.parameter_values[i])
            .chain(table.columns.iter().map(|c| c.values[i]))
            .map(format_value)
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Summary values as JSON; non-finite entries become strings.
pub fn summary_json(table: &SweepTable) -> Value {
    let map: Map<String, Value> = table
        .summary
        .iter()
        .map(|(k, &v)| {
            let value = serde_json::Number::from_f64(v)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(format_value(v)));
            (k.clone(), value)
        })
        .collect();
    Value::Object(map)
}

pub fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Output paths `<out>/<stem>.csv` etc.
pub fn output_path(out: &Path, stem: &str, ext: &str) -> PathBuf {
    out.join(format!("{stem}.{ext}"))
}

const PANEL_WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 140.0;
const MARGIN: f64 = 48.0;

/// Stacked line plots, one panel per column against the swept parameter.
pub fn table_svg(table: &SweepTable) -> String {
    let panels = table.columns.len();
    let height = panels as f64 * (PANEL_HEIGHT + MARGIN) + MARGIN;
    let width = PANEL_WIDTH + 2.0 * MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let x = &table.parameter_values;
    let (x_lo, x_hi) = finite_range(x);
    for (k, column) in table.columns.iter().enumerate() {
        let top = MARGIN + k as f64 * (PANEL_HEIGHT + MARGIN);
        let (y_lo, y_hi) = finite_range(&column.values);
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN}" y="{top}" width="{PANEL_WIDTH}" height="{PANEL_HEIGHT}" fill="none" stroke="#999"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{MARGIN}" y="{}">{} [{} .. {}] vs {}</text>"#,
            top - 6.0,
            column.name,
            format_short(y_lo),
            format_short(y_hi),
            table.parameter_name
        );
        let scale_x = |v: f64| {
            MARGIN
                + if x_hi > x_lo {
                    (v - x_lo) / (x_hi - x_lo) * PANEL_WIDTH
                } else {
                    0.0
                }
        };
        let scale_y = |v: f64| {
            top + PANEL_HEIGHT
                - if y_hi > y_lo {
                    (v - y_lo) / (y_hi - y_lo) * PANEL_HEIGHT
                } else {
                    PANEL_HEIGHT / 2.0
                }
        };
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, svg: &mut String| {
            if segment.len() > 1 {
                let _ = writeln!(
                    svg,
                    r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{}"/>"##,
                    segment.join(" ")
                );
            }
            segment.clear();
        };
        for (&xi, &yi) in x.iter().zip(&column.values) {
            if xi.is_finite() && yi.is_finite() {
                segment.push(format!("{:.2},{:.2}", scale_x(xi), scale_y(yi)));
            } else {
                flush(&mut segment, &mut svg);
            }
        }
        flush(&mut segment, &mut svg);
    }
    svg.push_str("</svg>\n");
    svg
}

fn finite_range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn format_short(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4e}")
    } else {
        "-".to_string()
    }
}
