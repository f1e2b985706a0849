//! Standalone SVG 1.1 rendering: line charts for one-axis sweeps and cell-grid
//! heatmaps for two-axis sweeps. Output depends only on the input, with all
//! coordinates printed to two decimals.

use std::fmt::Write;

use super::{format_sig6, Row, SweepResult, Value};
use crate::error::{ModelError, Result};

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const LEGEND_W: f64 = 220.0;
const GAP: f64 = 40.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];
const DASHES: [&str; 4] = ["", "6 3", "2 3", "8 3 2 3"];

pub fn render_svg(result: &SweepResult) -> Result<String> {
    match result.axes.len() {
        1 => Ok(line_chart(result)),
        2 => Ok(heatmap(result)),
        n => Err(ModelError::UnsupportedShape(format!(
            "cannot render {n} grid axes; need 1 or 2"
        ))),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
}

fn series_label(result: &SweepResult, key: &[f64]) -> String {
    result
        .series_keys
        .iter()
        .zip(key)
        .map(|(k, v)| format!("{k}={}", format_sig6(*v)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn series_keys(result: &SweepResult) -> Vec<Vec<f64>> {
    if result.series.is_empty() {
        vec![Vec::new()]
    } else {
        result.series.clone()
    }
}

fn rows_of<'a>(result: &'a SweepResult, key: &'a [f64]) -> impl Iterator<Item = &'a Row> + 'a {
    result.rows.iter().filter(move |r| r.series == key)
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn line_chart(result: &SweepResult) -> String {
    let axis = &result.axes[0];
    let real_cols: Vec<usize> = (0..result.value_names.len())
        .filter(|&i| result.rows.first().is_some_and(|r| r.values[i].as_real().is_some()))
        .collect();
    let (x_lo, x_hi) = span(axis.values.iter().copied());
    let (mut y_lo, mut y_hi) = span(
        result
            .rows
            .iter()
            .flat_map(|r| real_cols.iter().filter_map(|&i| r.values[i].as_real())),
    );
    if y_lo >= 0.0 && y_hi <= 1.0 {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    let width = MARGIN_L + PANEL_W + GAP + LEGEND_W;
    let height = MARGIN_T + PANEL_H + MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * PANEL_W;
    let py = |y: f64| MARGIN_T + PANEL_H - (y - y_lo) / (y_hi - y_lo) * PANEL_H;

    let mut out = String::new();
    header(&mut out, width, height, &result.figure_id);
    frame(&mut out, MARGIN_L, MARGIN_T, &result.figure_id);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = x_lo + t * (x_hi - x_lo);
        let yv = y_lo + t * (y_hi - y_lo);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(xv),
            MARGIN_T + PANEL_H + 18.0,
            format_sig6(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            py(yv) + 4.0,
            format_sig6(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_L + PANEL_W / 2.0,
        MARGIN_T + PANEL_H + 40.0,
        escape(&axis.name)
    );

    let mut legend_y = MARGIN_T + 10.0;
    let legend_x = MARGIN_L + PANEL_W + GAP;
    for (s, key) in series_keys(result).iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        for (c, &col) in real_cols.iter().enumerate() {
            let dash = DASHES[c % DASHES.len()];
            let points: Vec<String> = rows_of(result, key)
                .filter_map(|r| r.values[col].as_real().map(|v| (r.point[0], v)))
                .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let dash_attr = if dash.is_empty() {
                String::new()
            } else {
                format!(r#" stroke-dasharray="{dash}""#)
            };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{}"/>"#,
                points.join(" ")
            );
            let mut label = series_label(result, key);
            if !label.is_empty() {
                label.push(' ');
            }
            label.push_str(&result.value_names[col]);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#,
                legend_x,
                legend_y,
                legend_x + 24.0,
                legend_y
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                legend_x + 30.0,
                legend_y + 4.0,
                escape(&label)
            );
            legend_y += 16.0;
        }
    }
    out.push_str("</svg>\n");
    out
}

fn frame(out: &mut String, x: f64, y: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{x:.2}" y="{y:.2}" width="{PANEL_W:.2}" height="{PANEL_H:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        x + PANEL_W / 2.0,
        y - 12.0,
        escape(title)
    );
}

/// Blue ramp for ordinary cells, red ramp for flagged ones.
fn cell_color(t: f64, flagged: bool) -> String {
    let t = t.clamp(0.0, 1.0);
    let shade = (235.0 - 175.0 * t).round() as u8;
    if flagged {
        format!("rgb(255,{shade},{shade})")
    } else {
        format!("rgb({shade},{shade},245)")
    }
}

fn heatmap(result: &SweepResult) -> String {
    let (xa, ya) = (&result.axes[0], &result.axes[1]);
    let value_col = (0..result.value_names.len())
        .find(|&i| result.rows.first().is_some_and(|r| r.values[i].as_real().is_some()));
    let flag_col = (0..result.value_names.len())
        .find(|&i| result.rows.first().is_some_and(|r| r.values[i].as_flag().is_some()));
    let keys = series_keys(result);
    let width = MARGIN_L + keys.len() as f64 * (PANEL_W + GAP + MARGIN_L) - MARGIN_L;
    let height = MARGIN_T + PANEL_H + MARGIN_B + 20.0;
    let cw = PANEL_W / xa.values.len().max(1) as f64;
    let ch = PANEL_H / ya.values.len().max(1) as f64;

    let mut out = String::new();
    header(&mut out, width, height, &result.figure_id);
    for (s, key) in keys.iter().enumerate() {
        let x0 = MARGIN_L + s as f64 * (PANEL_W + GAP + MARGIN_L);
        let label = series_label(result, key);
        let title = if label.is_empty() {
            result.figure_id.clone()
        } else {
            format!("{} {label}", result.figure_id)
        };
        let (lo, hi) = span(
            rows_of(result, key).filter_map(|r| value_col.and_then(|c| r.values[c].as_real())),
        );
        for r in rows_of(result, key) {
            let Some(i) = xa.values.iter().position(|v| *v == r.point[0]) else {
                continue;
            };
            let Some(j) = ya.values.iter().position(|v| *v == r.point[1]) else {
                continue;
            };
            let v = value_col.and_then(|c| r.values[c].as_real()).unwrap_or(lo);
            let flagged = flag_col
                .map(|c| r.values[c] == Value::Flag(true))
                .unwrap_or(false);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{}={} {}={} {}</title></rect>"#,
                x0 + i as f64 * cw,
                MARGIN_T + PANEL_H - (j + 1) as f64 * ch,
                cw,
                ch,
                cell_color((v - lo) / (hi - lo), flagged),
                escape(&xa.name),
                format_sig6(r.point[0]),
                escape(&ya.name),
                format_sig6(r.point[1]),
                format_sig6(v)
            );
        }
        frame(&mut out, x0, MARGIN_T, &title);
        for (axis, horizontal) in [(xa, true), (ya, false)] {
            let n = axis.values.len();
            for idx in [0, n / 2, n.saturating_sub(1)] {
                let Some(v) = axis.values.get(idx) else { continue };
                let (tx, ty, anchor) = if horizontal {
                    (x0 + (idx as f64 + 0.5) * cw, MARGIN_T + PANEL_H + 18.0, "middle")
                } else {
                    (x0 - 6.0, MARGIN_T + PANEL_H - (idx as f64 + 0.5) * ch + 4.0, "end")
                };
                let _ = writeln!(
                    out,
                    r#"<text x="{tx:.2}" y="{ty:.2}" text-anchor="{anchor}">{}</text>"#,
                    format_sig6(*v)
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} (x), {} (y); range {} to {}</text>"#,
            x0 + PANEL_W / 2.0,
            MARGIN_T + PANEL_H + 40.0,
            escape(&xa.name),
            escape(&ya.name),
            format_sig6(lo),
            format_sig6(hi)
        );
    }
    out.push_str("</svg>\n");
    out
}
