//! Registry of published headline numbers, each recomputed from the model and
//! compared at a fixed tolerance.
//!
//! Claims marked as documented gaps are reported as `Info` unless strict
//! mode is on, in which case they are judged like any other claim.

use serde::Serialize;

use crate::error::Result;
use crate::estimator::{
    fit_h, fit_h_stratified, rr_ratio, solve_psi_for_rr_ratio, ReplicationData, StratumModel,
};
use crate::rates::{fpr_bound, fpr_hacked, fpr_regime, rr_hacked, rr_regime, rr_sound, TestDesign};
use crate::sweeps::{BASELINE_ALPHA, BASELINE_BETA, NEW_ALPHA, PHI};

/// Tolerance for values published to two decimals.
pub const PUBLISHED_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// `|computed - expected| <= tol`.
    Within { tol: f64 },
    /// `computed > expected`.
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub id: String,
    pub criterion: u8,
    pub description: String,
    pub computed: f64,
    pub expected: f64,
    pub check: Check,
    pub documented_gap: bool,
    pub verdict: Verdict,
}

impl ClaimResult {
    pub fn line(&self) -> String {
        let check = match self.check {
            Check::Within { tol } => format!("tol {tol:e}"),
            Check::Above => "must exceed".to_string(),
        };
        format!(
            "{:<4} [{}] {}: computed {:.6} vs {} ({check}){}",
            format!("{:?}", self.verdict).to_uppercase(),
            self.id,
            self.description,
            self.computed,
            self.expected,
            if self.documented_gap {
                " [documented gap]"
            } else {
                ""
            }
        )
    }
}

struct Registry {
    strict: bool,
    results: Vec<ClaimResult>,
}

impl Registry {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        criterion: u8,
        id: &str,
        description: &str,
        computed: f64,
        expected: f64,
        check: Check,
        documented_gap: bool,
    ) {
        let ok = match check {
            Check::Within { tol } => (computed - expected).abs() <= tol,
            Check::Above => computed > expected,
        };
        let verdict = match (ok, documented_gap && !self.strict) {
            (_, true) => Verdict::Info,
            (true, false) => Verdict::Pass,
            (false, false) => Verdict::Fail,
        };
        self.results.push(ClaimResult {
            id: id.to_string(),
            criterion,
            description: description.to_string(),
            computed,
            expected,
            check,
            documented_gap,
            verdict,
        });
    }

    fn within(&mut self, criterion: u8, id: &str, description: &str, computed: f64, expected: f64, tol: f64) {
        self.push(criterion, id, description, computed, expected, Check::Within { tol }, false);
    }
}

/// Recomputes every headline number.
pub fn evaluate_claims(strict: bool) -> Result<Vec<ClaimResult>> {
    let mut reg = Registry {
        strict,
        results: Vec::new(),
    };
    let old = TestDesign::new(BASELINE_ALPHA, BASELINE_BETA, PHI)?;
    let new = TestDesign::new(NEW_ALPHA, BASELINE_BETA, PHI)?;
    let new_half = TestDesign::new(NEW_ALPHA, 0.5, PHI)?;

    // FPR at power 0.80 for both cutoffs and three hacking rates.
    let block = [
        (BASELINE_ALPHA, 0.0, 0.38),
        (NEW_ALPHA, 0.0, 0.06),
        (BASELINE_ALPHA, 0.05, 0.57),
        (NEW_ALPHA, 0.05, 0.44),
        (BASELINE_ALPHA, 0.15, 0.75),
        (NEW_ALPHA, 0.15, 0.71),
    ];
    for (alpha, h, published) in block {
        let d = if alpha == BASELINE_ALPHA { &old } else { &new };
        let computed = if alpha == BASELINE_ALPHA {
            fpr_hacked(d, h)?
        } else {
            fpr_regime(d, h, 1.0)?
        };
        reg.within(
            1,
            &format!("fpr_a{alpha}_h{h}"),
            &format!("FPR at alpha={alpha}, power=0.80, h={h}, psi=1"),
            computed,
            published,
            PUBLISHED_TOL,
        );
    }

    let data = ReplicationData::psych_rep();
    reg.within(2, "rr_predicted", "predicted RR without hacking at 0.05", rr_sound(&old)?, 0.62, PUBLISHED_TOL);
    reg.within(2, "rr_observed_exact", "built-in replication rate equals 36/97", data.rate(), 36.0 / 97.0, 0.0);
    reg.within(2, "rr_observed", "built-in replication rate (37%)", data.rate(), 0.37, PUBLISHED_TOL);

    let h_point = fit_h(&data, &old)?;
    reg.push(3, "h_point_range", "fitted h lies in [0.070, 0.080]", h_point, 0.075, Check::Within { tol: 0.005 }, false);
    reg.push(3, "h_point_published", "fitted h vs published point estimate 0.075", h_point, 0.075, Check::Within { tol: PUBLISHED_TOL }, true);
    reg.within(3, "h_point_consistency", "RR at fitted h reproduces 36/97", rr_hacked(&old, h_point)?, 36.0 / 97.0, 1e-9);

    let est = fit_h_stratified(&data, &old, StratumModel::default())?;
    reg.within(4, "h_range_low", "stratified range lower endpoint", est.range_low.unwrap_or(f64::NAN), 0.05, 0.03);
    reg.within(4, "h_range_high", "stratified range upper endpoint", est.range_high.unwrap_or(f64::NAN), 0.15, 0.03);

    reg.within(5, "ratio_h0.05_psi0.75", "RR ratio at power 0.50, h=0.05, psi=0.75 (+19%)", rr_ratio(&new_half, &old, 0.05, 0.75)?, 1.19, 0.01);
    reg.within(5, "ratio_h0.15_psi1", "RR ratio at power 0.50, h=0.15, psi=1 (-19%)", rr_ratio(&new_half, &old, 0.15, 1.0)?, 0.81, 0.01);
    reg.within(5, "rr_high_end", "RR at power 0.50, h=0.05, psi=0.75 (51%)", rr_regime(&new_half, 0.05, 0.75)?, 0.51, PUBLISHED_TOL);
    reg.within(5, "rr_low_end", "RR at power 0.50, h=0.15, psi=1 (20%)", rr_regime(&new_half, 0.15, 1.0)?, 0.20, PUBLISHED_TOL);

    reg.within(6, "double_h0.05", "persistence that doubles RR at power 0.80, h=0.05", solve_psi_for_rr_ratio(2.0, &new, &old, 0.05)?, 0.15, 0.02);
    reg.push(6, "double_h0.15", "persistence that doubles RR at power 0.80, h=0.15 (published 0.35)", solve_psi_for_rr_ratio(2.0, &new, &old, 0.15)?, 0.35, Check::Within { tol: 0.02 }, true);

    reg.push(7, "fpr_bound_pi0.25", "FPR bound at alpha=0.005, h=0.15, pi=0.25 stays above 20%", fpr_bound(&new, 0.15, 0.25)?, 0.20, Check::Above, false);

    Ok(reg.results)
}

pub fn all_pass(results: &[ClaimResult]) -> bool {
    results.iter().all(|r| r.verdict != Verdict::Fail)
}
