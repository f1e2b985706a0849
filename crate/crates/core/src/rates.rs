//! Closed-form false positive rate (FPR) and replication rate (RR).
//!
//! Three settings are covered:
//!
//! * sound testing only (`fpr_sound`, `rr_sound`, `table_sound`);
//! * a proportion `h` of hacked P-values, all significant at the baseline
//!   cutoff (`fpr_hacked`, `rr_hacked`);
//! * a lowered cutoff where only a proportion `psi` of hacked P-values stays
//!   significant (`fpr_regime`, `rr_regime`, `fpr_bound`, `table_regime`).
//!
//! Hacked P-values never produce true positives, and replication is perfect:
//! every true positive replicates and no false positive does, so RR = 1 - FPR.

use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::normal::{self, NormalShift};

/// Absolute tolerance for identities between closed forms.
pub const EXACT_TOL: f64 = 1e-12;

pub(crate) fn check_prob(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value: v,
            reason: "must be a probability in [0, 1]",
        })
    }
}

/// Significance level, Type-II error rate and proportion of true nulls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestDesign {
    alpha: f64,
    beta: f64,
    phi: f64,
}

impl TestDesign {
    pub fn new(alpha: f64, beta: f64, phi: f64) -> Result<Self> {
        check_prob("alpha", alpha)?;
        check_prob("beta", beta)?;
        check_prob("phi", phi)?;
        Ok(Self { alpha, beta, phi })
    }

    pub fn from_power(alpha: f64, power: f64, phi: f64) -> Result<Self> {
        check_prob("power", power)?;
        Self::new(alpha, 1.0 - power, phi)
    }

    /// Builds φ from prior odds `in_favor : against` of H1, so `1:10` gives φ = 10/11.
    pub fn phi_from_odds(in_favor: f64, against: f64) -> Result<f64> {
        if !(in_favor.is_finite() && against.is_finite())
            || in_favor < 0.0
            || against < 0.0
            || in_favor + against <= 0.0
        {
            return Err(ModelError::InvalidParameter {
                name: "prior_odds",
                value: in_favor / against,
                reason: "odds terms must be nonnegative and not both zero",
            });
        }
        Ok(against / (in_favor + against))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn power(&self) -> f64 {
        1.0 - self.beta
    }

    /// Prior odds `(1 - φ) / φ` of H1 against H0.
    pub fn prior_odds(&self) -> Result<f64> {
        if self.phi > 0.0 {
            Ok((1.0 - self.phi) / self.phi)
        } else {
            Err(ModelError::InvalidParameter {
                name: "phi",
                value: self.phi,
                reason: "prior odds need phi > 0",
            })
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.beta, self.phi)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.alpha, beta, self.phi)
    }
}

/// How the persistence ψ at a lowered cutoff is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PsiSpec {
    /// ψ given outright.
    Direct { psi: f64 },
    /// `pi * 1 + (1 - pi) * naive_cdf`, where `naive_cdf` is the share of
    /// hacked P-values already below the new cutoff under the old one.
    Interpolated { pi: f64, naive_cdf: f64 },
    /// ψ = π, the conservative end of the interpolation (`naive_cdf = 0`).
    LowerBound { pi: f64 },
}

impl PsiSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            PsiSpec::Direct { psi } => check_prob("psi", psi),
            PsiSpec::Interpolated { pi, naive_cdf } => {
                check_prob("pi", pi)?;
                check_prob("naive_cdf", naive_cdf)
            }
            PsiSpec::LowerBound { pi } => check_prob("pi", pi),
        }
    }
}

/// Hacking rate, the cutoff at which every hacked P-value is significant,
/// and the persistence specification for a lowered cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HackingRegime {
    h: f64,
    baseline_alpha: f64,
    psi_spec: PsiSpec,
}

impl HackingRegime {
    pub fn new(h: f64, baseline_alpha: f64, psi_spec: PsiSpec) -> Result<Self> {
        check_prob("h", h)?;
        check_prob("baseline_alpha", baseline_alpha)?;
        psi_spec.validate()?;
        Ok(Self {
            h,
            baseline_alpha,
            psi_spec,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn baseline_alpha(&self) -> f64 {
        self.baseline_alpha
    }

    pub fn psi_spec(&self) -> PsiSpec {
        self.psi_spec
    }

    pub fn resolve_psi(&self, new_alpha: f64) -> Result<f64> {
        resolve_psi(self, new_alpha)
    }
}

/// Proportions of the outcome table: H0-true sound, H0-true unsound (hacked)
/// and H0-false sound columns, split into reject / not-reject rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeTable {
    pub sound_true_reject: f64,
    pub sound_true_notreject: f64,
    pub unsound_reject: f64,
    pub unsound_notreject: f64,
    /// True positives.
    pub sound_false_reject: f64,
    pub sound_false_notreject: f64,
    pub phi_sound: f64,
    pub mass_unsound: f64,
    pub mass_sound_false: f64,
}

impl OutcomeTable {
    pub fn cells(&self) -> [f64; 6] {
        [
            self.sound_true_reject,
            self.sound_true_notreject,
            self.unsound_reject,
            self.unsound_notreject,
            self.sound_false_reject,
            self.sound_false_notreject,
        ]
    }

    pub fn total(&self) -> f64 {
        self.cells().iter().sum()
    }

    pub fn reject_total(&self) -> f64 {
        self.sound_true_reject + self.unsound_reject + self.sound_false_reject
    }

    pub fn rates(&self) -> Result<Rates> {
        let rejected = self.reject_total();
        if rejected <= 0.0 {
            return Err(ModelError::DegenerateDesign);
        }
        Ok(Rates {
            fpr: (self.sound_true_reject + self.unsound_reject) / rejected,
            rr: self.sound_false_reject / rejected,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub fpr: f64,
    pub rr: f64,
}

/// Significant mass of each kind: sound false positives, hacked false
/// positives and sound true positives.
struct RejectMass {
    sound_false_pos: f64,
    hacked: f64,
    true_pos: f64,
}

impl RejectMass {
    fn new(design: &TestDesign, h: f64, psi: f64) -> Result<Self> {
        check_prob("h", h)?;
        check_prob("psi", psi)?;
        let keep = 1.0 - h;
        Ok(Self {
            sound_false_pos: design.alpha * design.phi * keep,
            hacked: h * psi,
            true_pos: (1.0 - design.beta) * (1.0 - design.phi) * keep,
        })
    }

    fn denominator(&self) -> Result<f64> {
        let d = self.sound_false_pos + self.hacked + self.true_pos;
        if d > 0.0 {
            Ok(d)
        } else {
            Err(ModelError::DegenerateDesign)
        }
    }

    fn fpr(&self) -> Result<f64> {
        Ok((self.sound_false_pos + self.hacked) / self.denominator()?)
    }

    fn rr(&self) -> Result<f64> {
        Ok(self.true_pos / self.denominator()?)
    }
}

fn sound_parts(design: &TestDesign) -> Result<(f64, f64, f64)> {
    let false_pos = design.alpha * design.phi;
    let true_pos = (1.0 - design.beta) * (1.0 - design.phi);
    let denom = false_pos + true_pos;
    if denom > 0.0 {
        Ok((false_pos, true_pos, denom))
    } else {
        Err(ModelError::DegenerateDesign)
    }
}

/// FPR without hacking: `αφ / (αφ + (1-β)(1-φ))`.
pub fn fpr_sound(design: &TestDesign) -> Result<f64> {
    let (fp, _, denom) = sound_parts(design)?;
    Ok(fp / denom)
}

/// RR without hacking: `(1-β)(1-φ) / (αφ + (1-β)(1-φ))`.
pub fn rr_sound(design: &TestDesign) -> Result<f64> {
    let (_, tp, denom) = sound_parts(design)?;
    Ok(tp / denom)
}

pub fn table_sound(design: &TestDesign) -> OutcomeTable {
    let (a, b, phi) = (design.alpha, design.beta, design.phi);
    OutcomeTable {
        sound_true_reject: a * phi,
        sound_true_notreject: (1.0 - a) * phi,
        unsound_reject: 0.0,
        unsound_notreject: 0.0,
        sound_false_reject: (1.0 - b) * (1.0 - phi),
        sound_false_notreject: b * (1.0 - phi),
        phi_sound: phi,
        mass_unsound: 0.0,
        mass_sound_false: 1.0 - phi,
    }
}

/// FPR with a proportion `h` of hacked P-values, all significant at `design.alpha`.
pub fn fpr_hacked(design: &TestDesign, h: f64) -> Result<f64> {
    RejectMass::new(design, h, 1.0)?.fpr()
}

pub fn rr_hacked(design: &TestDesign, h: f64) -> Result<f64> {
    RejectMass::new(design, h, 1.0)?.rr()
}

/// Persistence ψ of hacked P-values at `new_alpha`.
///
/// At the baseline cutoff every hacked P-value is significant, so the result
/// is 1 there regardless of mode.
pub fn resolve_psi(regime: &HackingRegime, new_alpha: f64) -> Result<f64> {
    check_prob("new_alpha", new_alpha)?;
    if new_alpha > regime.baseline_alpha {
        return Err(ModelError::CutoffAboveBaseline {
            new_alpha,
            baseline_alpha: regime.baseline_alpha,
        });
    }
    if new_alpha == regime.baseline_alpha {
        return Ok(1.0);
    }
    Ok(match regime.psi_spec {
        PsiSpec::Direct { psi } => psi,
        PsiSpec::Interpolated { pi, naive_cdf } => pi + (1.0 - pi) * naive_cdf,
        PsiSpec::LowerBound { pi } => pi,
    })
}

/// FPR at the cutoff `design_new.alpha` when a share `psi` of hacked P-values
/// remains significant there. `design_new.beta` is the Type-II rate at that cutoff.
pub fn fpr_regime(design_new: &TestDesign, h: f64, psi: f64) -> Result<f64> {
    RejectMass::new(design_new, h, psi)?.fpr()
}

pub fn rr_regime(design_new: &TestDesign, h: f64, psi: f64) -> Result<f64> {
    RejectMass::new(design_new, h, psi)?.rr()
}

/// Lower bound on the FPR at the new cutoff: ψ replaced by π, valid since ψ ≥ π.
pub fn fpr_bound(design_new: &TestDesign, h: f64, pi: f64) -> Result<f64> {
    check_prob("pi", pi)?;
    fpr_regime(design_new, h, pi)
}

/// Upper bound on the RR at the new cutoff, the companion of [`fpr_bound`].
pub fn rr_bound(design_new: &TestDesign, h: f64, pi: f64) -> Result<f64> {
    check_prob("pi", pi)?;
    rr_regime(design_new, h, pi)
}

pub fn rates_regime(design_new: &TestDesign, h: f64, psi: f64) -> Result<Rates> {
    let mass = RejectMass::new(design_new, h, psi)?;
    Ok(Rates {
        fpr: mass.fpr()?,
        rr: mass.rr()?,
    })
}

pub fn table_regime(design_new: &TestDesign, h: f64, psi: f64) -> Result<OutcomeTable> {
    check_prob("h", h)?;
    check_prob("psi", psi)?;
    let (a, b, phi) = (design_new.alpha, design_new.beta, design_new.phi);
    let keep = 1.0 - h;
    Ok(OutcomeTable {
        sound_true_reject: a * phi * keep,
        sound_true_notreject: (1.0 - a) * phi * keep,
        unsound_reject: h * psi,
        unsound_notreject: h * (1.0 - psi),
        sound_false_reject: (1.0 - b) * (1.0 - phi) * keep,
        sound_false_notreject: b * (1.0 - phi) * keep,
        phi_sound: phi * keep,
        mass_unsound: h,
        mass_sound_false: (1.0 - phi) * keep,
    })
}

/// Power at `new_alpha` of a fixed-size one-sided z-test that has
/// `power_at_alpha` at `alpha`.
pub fn power_at_new_cutoff(power_at_alpha: f64, alpha: f64, new_alpha: f64) -> Result<f64> {
    normal::open_unit("new_alpha", new_alpha)?;
    if new_alpha > alpha {
        return Err(ModelError::DomainError(format!(
            "new_alpha = {new_alpha} must not exceed alpha = {alpha}"
        )));
    }
    let shift = NormalShift::from_power(power_at_alpha, alpha)?;
    if new_alpha == alpha {
        return Ok(power_at_alpha);
    }
    Ok(shift.rejection_prob(new_alpha))
}
