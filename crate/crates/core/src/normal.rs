//! Standard normal helpers and the one-sided normal shift model.
//!
//! A sound test of a false null is modeled as a one-sided z-test whose
//! statistic is `N(delta, 1)`. The P-value is `1 - Phi(Z)` and the test
//! rejects at cutoff `c` iff `Z > z(1 - c)`, so the power at `c` is
//! `Phi(delta - z(1 - c))`.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{ModelError, Result};

fn standard() -> Normal {
    Normal::standard()
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// Upper tail `1 - Phi(x)`, computed without cancellation.
pub fn sf(x: f64) -> f64 {
    standard().sf(x)
}

/// Standard normal quantile; `p` must lie strictly inside (0, 1).
///
/// The library inverse is good to about 1e-11; one Newton step on the CDF
/// brings it to double precision.
pub fn quantile(p: f64) -> f64 {
    let n = standard();
    let x = n.inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    let density = n.pdf(x);
    if density > 0.0 {
        x - (n.cdf(x) - p) / density
    } else {
        x
    }
}

/// Effect size of a one-sided z-test, fixed by the power it reaches at a cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalShift {
    delta: f64,
}

impl NormalShift {
    pub fn from_power(power: f64, alpha: f64) -> Result<Self> {
        open_unit("power", power)?;
        open_unit("alpha", alpha)?;
        Ok(Self {
            delta: quantile(power) + quantile(1.0 - alpha),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Probability that the P-value falls below `cutoff`.
    pub fn rejection_prob(&self, cutoff: f64) -> f64 {
        if cutoff <= 0.0 {
            return 0.0;
        }
        if cutoff >= 1.0 {
            return 1.0;
        }
        cdf(self.delta - quantile(1.0 - cutoff))
    }

    /// Probability that the P-value lands in `[lo, hi)`.
    pub fn interval_prob(&self, lo: f64, hi: f64) -> f64 {
        (self.rejection_prob(hi) - self.rejection_prob(lo)).max(0.0)
    }
}

pub(crate) fn open_unit(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ModelError::DomainError(format!(
            "{name} = {v} must lie strictly inside (0, 1)"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf() {
        for p in [1e-6, 0.005, 0.05, 0.2, 0.5, 0.8, 0.95, 0.995] {
            assert!((cdf(quantile(p)) - p).abs() < 1e-15, "p = {p}");
        }
    }

    #[test]
    fn calibrated_shift_hits_its_power() {
        let shift = NormalShift::from_power(0.8, 0.05).unwrap();
        assert!((shift.rejection_prob(0.05) - 0.8).abs() < 1e-12);
        assert_eq!(shift.rejection_prob(0.0), 0.0);
        assert_eq!(shift.rejection_prob(1.0), 1.0);
    }

    #[test]
    fn rejects_closed_endpoints() {
        assert!(NormalShift::from_power(1.0, 0.05).is_err());
        assert!(NormalShift::from_power(0.8, 0.0).is_err());
    }
}
