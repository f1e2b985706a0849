//! Closed-form false positive and replication rates under significance
//! testing with P-hacking, plus a hacking-rate estimator, a Monte Carlo
//! oracle and the parameter sweeps behind the published figures.

pub mod claims;
pub mod error;
pub mod estimator;
pub mod mc;
pub mod normal;
pub mod rates;
pub mod sweeps;

pub use error::{ModelError, Result};
pub use estimator::{
    fit_h, fit_h_stratified, fit_h_to_rate, rr_ratio, solve_psi_for_rr_ratio, HackingEstimate,
    ReplicationData, Stratum, StratumModel,
};
pub use mc::{crosscheck, simulate, CrossCheck, SimConfig, SimOutcome};
pub use rates::{
    fpr_bound, fpr_hacked, fpr_regime, fpr_sound, power_at_new_cutoff, resolve_psi, rr_bound,
    rr_hacked, rr_regime, rr_sound, table_regime, table_sound, HackingRegime, OutcomeTable,
    PsiSpec, Rates, TestDesign,
};
pub use sweeps::{render_csv, render_svg, SweepResult};
