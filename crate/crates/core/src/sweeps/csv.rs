use std::fmt::Write;

use super::{SweepResult, Value};

/// Formats `v` with 6 significant digits in the style of C's `%g`: fixed
/// notation for decimal exponents in [-4, 6), scientific otherwise, trailing
/// zeros removed.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Header of series keys, axis names and value names, then one line per row.
pub fn render_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    let header: Vec<&str> = result
        .series_keys
        .iter()
        .chain(result.axes.iter().map(|a| &a.name))
        .chain(&result.value_names)
        .map(String::as_str)
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &result.rows {
        let mut fields: Vec<String> = row
            .series
            .iter()
            .chain(&row.point)
            .map(|&v| format_sig6(v))
            .collect();
        fields.extend(row.values.iter().map(|v| match *v {
            Value::Real(x) => format_sig6(x),
            Value::Flag(b) => b.to_string(),
        }));
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}
