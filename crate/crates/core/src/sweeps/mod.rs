//! Parameter sweeps behind each figure, plus CSV and SVG rendering.
//!
//! Every cell is produced by a call into [`crate::rates`] or
//! [`crate::estimator`]; nothing here re-derives a formula.
//!
//! Grid values are built as `k / d` so that points such as 0.80 or 0.15 are
//! the correctly rounded doubles and compare equal across sweeps.

mod csv;
mod svg;

pub use csv::{format_sig6, render_csv};
pub use svg::render_svg;

use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::estimator::rr_ratio;
use crate::rates::{
    fpr_hacked, fpr_regime, fpr_sound, resolve_psi, rr_sound, HackingRegime, PsiSpec, TestDesign,
};

/// Proportion of true nulls used by every figure (prior odds 1:10).
pub const PHI: f64 = 10.0 / 11.0;
pub const BASELINE_ALPHA: f64 = 0.05;
pub const NEW_ALPHA: f64 = 0.005;
pub const BASELINE_BETA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Flag(bool),
}

impl Value {
    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Value::Real(v) => Some(v),
            Value::Flag(_) => None,
        }
    }

    pub fn as_flag(&self) -> Option<bool> {
        match *self {
            Value::Flag(b) => Some(b),
            Value::Real(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    fn new(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    /// Values of the series keys (one line or panel per distinct tuple).
    pub series: Vec<f64>,
    /// Position on the grid axes.
    pub point: Vec<f64>,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub figure_id: String,
    pub series_keys: Vec<String>,
    pub series: Vec<Vec<f64>>,
    pub axes: Vec<Axis>,
    pub value_names: Vec<String>,
    pub rows: Vec<Row>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    fn new(
        figure_id: &str,
        series_keys: &[&str],
        series: Vec<Vec<f64>>,
        axes: Vec<Axis>,
        value_names: &[&str],
        metadata: Vec<(String, String)>,
    ) -> Self {
        Self {
            figure_id: figure_id.to_string(),
            series_keys: series_keys.iter().map(|s| s.to_string()).collect(),
            series,
            axes,
            value_names: value_names.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    /// Fills rows in row-major order: series outermost, last axis fastest.
    fn fill<F>(mut self, mut cell: F) -> Result<Self>
    where
        F: FnMut(&[f64], &[f64]) -> Result<Vec<Value>>,
    {
        let series = if self.series.is_empty() {
            vec![Vec::new()]
        } else {
            self.series.clone()
        };
        let mut rows = Vec::new();
        for key in &series {
            for point in grid_points(&self.axes) {
                let values = cell(key, &point)?;
                rows.push(Row {
                    series: key.clone(),
                    point,
                    values,
                });
            }
        }
        self.rows = rows;
        Ok(self)
    }

    pub fn value_index(&self, name: &str) -> Option<usize> {
        self.value_names.iter().position(|n| n == name)
    }

    pub fn find(&self, series: &[f64], point: &[f64]) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.series == series && r.point == point)
    }

    pub fn value_at(&self, series: &[f64], point: &[f64], name: &str) -> Option<Value> {
        let i = self.value_index(name)?;
        self.find(series, point).map(|r| r.values[i])
    }

    /// Every row on the declared grid and series, with no duplicates.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for row in &self.rows {
            let on_grid = row.point.len() == self.axes.len()
                && row
                    .point
                    .iter()
                    .zip(&self.axes)
                    .all(|(v, a)| a.values.contains(v));
            let on_series = (self.series.is_empty() && row.series.is_empty())
                || self.series.contains(&row.series);
            if !on_grid || !on_series || row.values.len() != self.value_names.len() {
                return Err(ModelError::UnsupportedShape(format!(
                    "row {:?}/{:?} is off the declared grid",
                    row.series, row.point
                )));
            }
            let key: Vec<u64> = row
                .series
                .iter()
                .chain(&row.point)
                .map(|v| v.to_bits())
                .collect();
            if !seen.insert(key) {
                return Err(ModelError::UnsupportedShape(format!(
                    "duplicate point {:?}/{:?}",
                    row.series, row.point
                )));
            }
        }
        Ok(())
    }
}

fn grid_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// `k / denom` for `k` in `from..=to`.
pub fn ratio_grid(from: u32, to: u32, denom: u32) -> Vec<f64> {
    (from..=to).map(|k| k as f64 / denom as f64).collect()
}

fn common_metadata() -> Vec<(String, String)> {
    vec![
        ("phi".into(), "10/11".into()),
        ("prior_odds".into(), "1:10".into()),
    ]
}

fn real(v: f64) -> Value {
    Value::Real(v)
}

/// FPR vs power for α ∈ {0.05, 0.005} × h ∈ {0, 0.05, 0.15}, all hacked
/// P-values significant at the operative cutoff.
pub fn sweep_figure1() -> Result<SweepResult> {
    sweep_figure1_with_phi(PHI)
}

pub fn sweep_figure1_with_phi(phi: f64) -> Result<SweepResult> {
    let series = [BASELINE_ALPHA, NEW_ALPHA]
        .iter()
        .flat_map(|&a| [0.0, 0.05, 0.15].map(|h| vec![a, h]))
        .collect();
    let mut meta = common_metadata();
    if phi != PHI {
        meta[0].1 = format_sig6(phi);
    }
    meta.push(("psi".into(), "1".into()));
    SweepResult::new(
        "figure1",
        &["alpha", "h"],
        series,
        vec![Axis::new("power", ratio_grid(5, 99, 100))],
        &["fpr"],
        meta,
    )
    .fill(|s, p| {
        let design = TestDesign::from_power(s[0], p[0], phi)?;
        Ok(vec![real(fpr_hacked(&design, s[1])?)])
    })
}

/// FPR and RR vs power without hacking.
pub fn sweep_figure2() -> Result<SweepResult> {
    SweepResult::new(
        "figure2",
        &["alpha"],
        vec![vec![BASELINE_ALPHA], vec![NEW_ALPHA]],
        vec![Axis::new("power", ratio_grid(5, 99, 100))],
        &["fpr", "rr"],
        common_metadata(),
    )
    .fill(|s, p| {
        let design = TestDesign::from_power(s[0], p[0], PHI)?;
        Ok(vec![real(fpr_sound(&design)?), real(rr_sound(&design)?)])
    })
}

/// FPR at α = 0.005, power 0.80 across the persistence parameter π, with
/// the three reference levels as constant columns.
///
/// `naive_cdf = None` draws the lower bound ψ = π; `Some(q)` draws the
/// interpolated persistence `π + (1 - π) q`.
pub fn sweep_figure3(h: f64) -> Result<SweepResult> {
    sweep_figure3_with(h, None)
}

pub fn sweep_figure3_with(h: f64, naive_cdf: Option<f64>) -> Result<SweepResult> {
    let new = TestDesign::new(NEW_ALPHA, BASELINE_BETA, PHI)?;
    let old = TestDesign::new(BASELINE_ALPHA, BASELINE_BETA, PHI)?;
    let ref_hacked = fpr_hacked(&old, h)?;
    let ref_sound_old = fpr_sound(&old)?;
    let ref_sound_new = fpr_sound(&new)?;
    let mut meta = common_metadata();
    meta.push(("h".into(), format_sig6(h)));
    meta.push(("alpha".into(), "0.005".into()));
    meta.push(("beta".into(), "0.2".into()));
    meta.push((
        "curve".into(),
        match naive_cdf {
            None => "lower-bound".into(),
            Some(q) => format!("interpolated naive_cdf={}", format_sig6(q)),
        },
    ));
    let id = format!("figure3_h{}", format_sig6(h));
    SweepResult::new(
        &id,
        &[],
        Vec::new(),
        vec![Axis::new("pi", ratio_grid(0, 200, 200))],
        &["fpr", "ref_hacked_0.05", "ref_sound_0.05", "ref_sound_0.005"],
        meta,
    )
    .fill(|_, p| {
        let pi = p[0];
        let spec = match naive_cdf {
            None => PsiSpec::LowerBound { pi },
            Some(q) => PsiSpec::Interpolated { pi, naive_cdf: q },
        };
        let regime = HackingRegime::new(h, BASELINE_ALPHA, spec)?;
        let psi = resolve_psi(&regime, NEW_ALPHA)?;
        Ok(vec![
            real(fpr_regime(&new, h, psi)?),
            real(ref_hacked),
            real(ref_sound_old),
            real(ref_sound_new),
        ])
    })
}

/// FPR over power × h at α ∈ {0.05, 0.005}, ψ = 1.
pub fn sweep_figure4() -> Result<SweepResult> {
    let mut meta = common_metadata();
    meta.push(("psi".into(), "1".into()));
    SweepResult::new(
        "figure4",
        &["alpha"],
        vec![vec![BASELINE_ALPHA], vec![NEW_ALPHA]],
        vec![
            Axis::new("power", ratio_grid(1, 20, 20)),
            Axis::new("h", ratio_grid(0, 19, 20)),
        ],
        &["fpr"],
        meta,
    )
    .fill(|s, p| {
        let design = TestDesign::from_power(s[0], p[0], PHI)?;
        Ok(vec![real(fpr_hacked(&design, p[1])?)])
    })
}

/// RR at α = 0.005 over power × ψ, relative to RR at α = 0.05 with power 0.80.
pub fn sweep_figure5(h: f64) -> Result<SweepResult> {
    let old = TestDesign::new(BASELINE_ALPHA, BASELINE_BETA, PHI)?;
    let mut meta = common_metadata();
    meta.push(("h".into(), format_sig6(h)));
    meta.push(("old_alpha".into(), "0.05".into()));
    meta.push(("old_power".into(), "0.8".into()));
    meta.push(("new_alpha".into(), "0.005".into()));
    let id = format!("figure5_h{}", format_sig6(h));
    SweepResult::new(
        &id,
        &[],
        Vec::new(),
        vec![
            Axis::new("power", ratio_grid(1, 20, 20)),
            Axis::new("psi", ratio_grid(0, 20, 20)),
        ],
        &["ratio", "below_one"],
        meta,
    )
    .fill(|_, p| {
        let new = TestDesign::from_power(NEW_ALPHA, p[0], PHI)?;
        let ratio = rr_ratio(&new, &old, h, p[1])?;
        Ok(vec![real(ratio), Value::Flag(ratio < 1.0)])
    })
}

/// Hacking rates shown for figures 3 and 5.
pub const FIGURE_H: [f64; 2] = [0.05, 0.15];

/// Every published figure, in file order.
pub fn all_figures() -> Result<Vec<SweepResult>> {
    let mut out = vec![sweep_figure1()?, sweep_figure2()?];
    for h in FIGURE_H {
        out.push(sweep_figure3(h)?);
    }
    out.push(sweep_figure4()?);
    for h in FIGURE_H {
        out.push(sweep_figure5(h)?);
    }
    Ok(out)
}
