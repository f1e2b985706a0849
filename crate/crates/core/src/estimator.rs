//! Hacking-rate estimation from replication counts and inverse solves on the
//! regime-change model.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::normal::NormalShift;
use crate::rates::{check_prob, rr_hacked, rr_regime, TestDesign};

/// Width target for every bisection root.
pub const ROOT_TOL: f64 = 1e-10;
/// Upper end of the h bracket.
pub const H_MAX: f64 = 1.0 - 1e-12;

const RESIDUAL_TOL: f64 = 1e-12;
const MAX_ITER: usize = 400;

/// Root of a nonincreasing `f` with `f(lo) >= target >= f(hi)`.
///
/// Stops once the bracket is narrower than `tol` and the residual is below
/// 1e-12, or when the bracket can no longer shrink in double precision.
pub fn bisect_decreasing<F>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut best = (f64::INFINITY, lo);
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        let residual = (v - target).abs();
        if residual < best.0 {
            best = (residual, mid);
        }
        if v == target {
            return mid;
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol && residual <= RESIDUAL_TOL {
            break;
        }
    }
    best.1
}

/// One row of replication counts for original P-values in `[p_low, p_high)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub p_low: f64,
    pub p_high: f64,
    pub total: u64,
    pub replicated: u64,
}

impl Stratum {
    pub fn rate(&self) -> f64 {
        self.replicated as f64 / self.total as f64
    }
}

/// Observed replication counts, overall and by original P-value range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationData {
    pub total: u64,
    pub replicated: u64,
    #[serde(default)]
    pub strata: Vec<Stratum>,
}

impl ReplicationData {
    /// The 97 psychology replications: 36 replicated overall, 24/47 with
    /// original P < 0.005 and 12/50 with 0.005 < P < 0.05.
    pub fn psych_rep() -> Self {
        Self {
            total: 97,
            replicated: 36,
            strata: vec![
                Stratum {
                    p_low: 0.0,
                    p_high: 0.005,
                    total: 47,
                    replicated: 24,
                },
                Stratum {
                    p_low: 0.005,
                    p_high: 0.05,
                    total: 50,
                    replicated: 12,
                },
            ],
        }
    }

    pub fn rate(&self) -> f64 {
        self.replicated as f64 / self.total as f64
    }

    /// Checks count consistency. When the strata tile `(0, alpha)` without
    /// gaps their totals must add up to the overall totals.
    pub fn validate(&self, alpha: f64) -> Result<()> {
        if self.total == 0 {
            return Err(ModelError::DomainError("overall total must be > 0".into()));
        }
        if self.replicated > self.total {
            return Err(ModelError::DomainError(format!(
                "replicated {} exceeds total {}",
                self.replicated, self.total
            )));
        }
        for s in &self.strata {
            if s.replicated > s.total {
                return Err(ModelError::DomainError(format!(
                    "stratum [{}, {}): replicated {} exceeds total {}",
                    s.p_low, s.p_high, s.replicated, s.total
                )));
            }
            if !(s.p_low.is_finite() && s.p_high.is_finite() && s.p_low >= 0.0 && s.p_low < s.p_high)
            {
                return Err(ModelError::DomainError(format!(
                    "stratum range [{}, {}) is not a valid interval",
                    s.p_low, s.p_high
                )));
            }
        }
        if self.strata_tile(alpha) {
            let total: u64 = self.strata.iter().map(|s| s.total).sum();
            let replicated: u64 = self.strata.iter().map(|s| s.replicated).sum();
            if total != self.total || replicated != self.replicated {
                return Err(ModelError::DomainError(format!(
                    "strata sum to {replicated}/{total}, overall is {}/{}",
                    self.replicated, self.total
                )));
            }
        }
        Ok(())
    }

    fn strata_tile(&self, alpha: f64) -> bool {
        if self.strata.is_empty() {
            return false;
        }
        let mut sorted: Vec<&Stratum> = self.strata.iter().collect();
        sorted.sort_by(|a, b| a.p_low.total_cmp(&b.p_low));
        let mut edge = 0.0;
        for s in sorted {
            if (s.p_low - edge).abs() > 1e-12 {
                return false;
            }
            edge = s.p_high;
        }
        (edge - alpha).abs() <= 1e-12
    }
}

/// How the replication rate of a single P-value stratum depends on h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StratumModel {
    /// Each stratum's rate is matched to the pooled hacked-RR curve.
    #[default]
    PooledEquation,
    /// Sound H1 P-values follow the one-sided normal shift, sound null
    /// P-values are uniform, and every hacked P-value sits in the stratum
    /// that ends at the cutoff.
    NormalShift,
}

impl StratumModel {
    /// Predicted replication rate of the stratum `[lo, hi)` as a function of h.
    pub fn predictor(
        self,
        design: &TestDesign,
        lo: f64,
        hi: f64,
    ) -> Result<Box<dyn Fn(f64) -> Result<f64>>> {
        let design = *design;
        match self {
            StratumModel::PooledEquation => Ok(Box::new(move |h| rr_hacked(&design, h))),
            StratumModel::NormalShift => {
                let alpha = design.alpha();
                let shift = NormalShift::from_power(design.power(), alpha)?;
                let top = hi.min(alpha);
                let tp_share = shift.interval_prob(lo, top);
                let null_share = (top - lo).max(0.0);
                let hacked_share = if lo < alpha && hi >= alpha - 1e-12 { 1.0 } else { 0.0 };
                let phi = design.phi();
                Ok(Box::new(move |h| {
                    let tp = tp_share * (1.0 - phi) * (1.0 - h);
                    let denom = tp + null_share * phi * (1.0 - h) + hacked_share * h;
                    if denom > 0.0 {
                        Ok(tp / denom)
                    } else {
                        Err(ModelError::DegenerateDesign)
                    }
                }))
            }
        }
    }
}

fn fit_rate_with<F>(predict: F, rate: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if rate.is_nan() || rate <= 0.0 {
        return Err(ModelError::NoRoot {
            reason: format!("observed rate {rate} must be > 0"),
        });
    }
    let ceiling = predict(0.0)?;
    if rate >= ceiling {
        return Err(ModelError::NoRoot {
            reason: format!(
                "observed rate {rate:.6} is not below the no-hacking prediction {ceiling:.6} (bracket h in [0, 1))"
            ),
        });
    }
    let floor = predict(H_MAX)?;
    if rate <= floor {
        return Err(ModelError::NoRoot {
            reason: format!(
                "observed rate {rate:.6} is not above the prediction {floor:.6} at h -> 1 (bracket h in [0, 1))"
            ),
        });
    }
    // predict is finite on the whole bracket once both ends evaluate.
    Ok(bisect_decreasing(
        |h| predict(h).unwrap_or(f64::NAN),
        rate,
        0.0,
        H_MAX,
        ROOT_TOL,
    ))
}

/// The h at which the hacked-RR curve equals the observed rate `rate`.
pub fn fit_h_to_rate(rate: f64, design: &TestDesign) -> Result<f64> {
    fit_rate_with(|h| rr_hacked(design, h), rate)
}

/// Fits h to the overall replication rate of `data`.
pub fn fit_h(data: &ReplicationData, design: &TestDesign) -> Result<f64> {
    data.validate(design.alpha())?;
    fit_h_to_rate(data.rate(), design)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumFit {
    pub p_low: f64,
    pub p_high: f64,
    pub total: u64,
    pub replicated: u64,
    pub observed: f64,
    /// Per-stratum h, absent when the stratum has no root.
    pub root: Option<f64>,
    /// Stratum prediction at the pooled point estimate.
    pub predicted_at_point: f64,
    /// `observed - predicted_at_point`.
    pub residual: f64,
    /// Why no root was found, when it was not.
    pub no_root: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HackingEstimate {
    pub point: f64,
    pub range_low: Option<f64>,
    pub range_high: Option<f64>,
    pub model: StratumModel,
    pub strata: Vec<StratumFit>,
}

impl HackingEstimate {
    pub fn has_missing_strata(&self) -> bool {
        self.strata.iter().any(|s| s.root.is_none())
    }
}

/// Pooled point estimate plus the range spanned by per-stratum roots.
pub fn fit_h_stratified(
    data: &ReplicationData,
    design: &TestDesign,
    model: StratumModel,
) -> Result<HackingEstimate> {
    if data.strata.is_empty() {
        return Err(ModelError::DomainError(
            "stratified fit needs at least one stratum".into(),
        ));
    }
    let point = fit_h(data, design)?;
    let mut strata = Vec::with_capacity(data.strata.len());
    for s in &data.strata {
        let observed = if s.total > 0 { s.rate() } else { f64::NAN };
        let predict = model.predictor(design, s.p_low, s.p_high)?;
        let (root, no_root) = if s.total == 0 {
            (None, Some("empty stratum".to_string()))
        } else {
            match fit_rate_with(&predict, observed) {
                Ok(h) => (Some(h), None),
                Err(ModelError::NoRoot { reason }) => (None, Some(reason)),
                Err(e) => return Err(e),
            }
        };
        let predicted_at_point = predict(point)?;
        strata.push(StratumFit {
            p_low: s.p_low,
            p_high: s.p_high,
            total: s.total,
            replicated: s.replicated,
            observed,
            root,
            predicted_at_point,
            residual: observed - predicted_at_point,
            no_root,
        });
    }
    let roots = strata.iter().filter_map(|s| s.root);
    let range_low = roots.clone().reduce(f64::min).map(|h| h.clamp(0.0, H_MAX));
    let range_high = roots.reduce(f64::max).map(|h| h.clamp(0.0, H_MAX));
    Ok(HackingEstimate {
        point,
        range_low,
        range_high,
        model,
        strata,
    })
}

/// RR under the new design relative to RR under the old (baseline) design.
pub fn rr_ratio(design_new: &TestDesign, design_old: &TestDesign, h: f64, psi: f64) -> Result<f64> {
    let old = rr_hacked(design_old, h)?;
    if old.is_nan() || old <= 0.0 {
        return Err(ModelError::DegenerateDesign);
    }
    Ok(rr_regime(design_new, h, psi)? / old)
}

/// The persistence ψ at which [`rr_ratio`] equals `target_ratio`.
pub fn solve_psi_for_rr_ratio(
    target_ratio: f64,
    design_new: &TestDesign,
    design_old: &TestDesign,
    h: f64,
) -> Result<f64> {
    if !(target_ratio.is_finite() && target_ratio > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "target_ratio",
            value: target_ratio,
            reason: "must be a positive real",
        });
    }
    check_prob("h", h)?;
    if h <= 0.0 {
        return Err(ModelError::InvalidParameter {
            name: "h",
            value: h,
            reason: "the ratio does not depend on psi when h = 0",
        });
    }
    let ratio = |psi: f64| rr_ratio(design_new, design_old, h, psi);
    let at_zero = ratio(0.0)?;
    let at_one = ratio(1.0)?;
    if target_ratio > at_zero {
        return Err(ModelError::Unachievable {
            target: target_ratio,
            boundary: 0.0,
            achieved: at_zero,
        });
    }
    if target_ratio < at_one {
        return Err(ModelError::Unachievable {
            target: target_ratio,
            boundary: 1.0,
            achieved: at_one,
        });
    }
    if target_ratio == at_one {
        return Ok(1.0);
    }
    if target_ratio == at_zero {
        return Ok(0.0);
    }
    Ok(bisect_decreasing(
        |psi| ratio(psi).unwrap_or(f64::NAN),
        target_ratio,
        0.0,
        1.0,
        ROOT_TOL,
    ))
}
