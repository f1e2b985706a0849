use thiserror::Error;

/// Errors raised by the model, the estimator, the simulator and the renderers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// No test rejects, so FPR and RR are undefined.
    #[error("degenerate design: the rejection mass is zero, so FPR/RR are undefined")]
    DegenerateDesign,

    #[error("new cutoff {new_alpha} is above the baseline cutoff {baseline_alpha}; only lowering is modeled")]
    CutoffAboveBaseline { new_alpha: f64, baseline_alpha: f64 },

    #[error("no root: {reason}")]
    NoRoot { reason: String },

    /// `boundary` is the ψ endpoint that comes closest to the target.
    #[error("target ratio {target} unachievable for psi in [0,1] (closest at psi = {boundary}, ratio {achieved})")]
    Unachievable {
        target: f64,
        boundary: f64,
        achieved: f64,
    },

    #[error("degenerate simulation config: {0}")]
    DegenerateConfig(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("domain error: {0}")]
    DomainError(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
