//! Seeded Monte Carlo realization of the outcome table.
//!
//! Each study is drawn independently: hacked with probability h (significant
//! with probability ψ, never replicable), otherwise a sound test of a true null
//! (uniform P-value) with probability φ or of a false null (P-value from the
//! one-sided normal shift calibrated to the design's power at the cutoff).
//! Studies are split into fixed chunks of [`CHUNK_LEN`]; chunk `k` draws from
//! ChaCha8 stream `k` of the seed, so the result does not depend on how many
//! threads run the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::normal::{self, NormalShift};
use crate::rates::{fpr_regime, rr_regime, HackingRegime, TestDesign};

pub const GENERATOR: &str = "chacha8/rand_chacha-0.9/stream-per-65536-chunk";
pub const CHUNK_LEN: u64 = 65_536;
/// |z| above this fails a cross-check.
pub const Z_LIMIT: f64 = 4.0;

/// Operative cutoff is `design.alpha`; `design.beta` is the Type-II rate there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_tests: u64,
    pub seed: u64,
    pub design: TestDesign,
    pub hacking: HackingRegime,
}

impl SimConfig {
    pub fn new(n_tests: u64, seed: u64, design: TestDesign, hacking: HackingRegime) -> Result<Self> {
        let config = Self {
            n_tests,
            seed,
            design,
            hacking,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn cutoff(&self) -> f64 {
        self.design.alpha()
    }

    fn validate(&self) -> Result<()> {
        if self.n_tests == 0 {
            return Err(ModelError::DegenerateConfig("n_tests must be >= 1".into()));
        }
        if self.cutoff() > self.hacking.baseline_alpha() {
            return Err(ModelError::DegenerateConfig(format!(
                "cutoff {} is above the baseline {}",
                self.cutoff(),
                self.hacking.baseline_alpha()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct CellCounts {
    pub sound_true_reject: u64,
    pub sound_true_notreject: u64,
    pub unsound_reject: u64,
    pub unsound_notreject: u64,
    pub sound_false_reject: u64,
    pub sound_false_notreject: u64,
}

impl CellCounts {
    pub fn total(&self) -> u64 {
        self.sound_true_reject
            + self.sound_true_notreject
            + self.unsound_reject
            + self.unsound_notreject
            + self.sound_false_reject
            + self.sound_false_notreject
    }

    pub fn significant(&self) -> u64 {
        self.sound_true_reject + self.unsound_reject + self.sound_false_reject
    }

    pub fn false_positives(&self) -> u64 {
        self.sound_true_reject + self.unsound_reject
    }

    /// Significant and replicable: sound tests of false nulls that rejected.
    pub fn replicated(&self) -> u64 {
        self.sound_false_reject
    }

    pub fn sound_false(&self) -> u64 {
        self.sound_false_reject + self.sound_false_notreject
    }

    fn merge(self, o: Self) -> Self {
        Self {
            sound_true_reject: self.sound_true_reject + o.sound_true_reject,
            sound_true_notreject: self.sound_true_notreject + o.sound_true_notreject,
            unsound_reject: self.unsound_reject + o.unsound_reject,
            unsound_notreject: self.unsound_notreject + o.unsound_notreject,
            sound_false_reject: self.sound_false_reject + o.sound_false_reject,
            sound_false_notreject: self.sound_false_notreject + o.sound_false_notreject,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub config: SimConfig,
    pub generator: &'static str,
    pub psi: f64,
    pub counts: CellCounts,
    /// `None` when nothing was significant.
    pub empirical_fpr: Option<f64>,
    pub empirical_rr: Option<f64>,
    pub se_fpr: Option<f64>,
    pub se_rr: Option<f64>,
}

/// How a sound false-null test decides significance.
#[derive(Clone, Copy)]
enum PowerLaw {
    Never,
    Always,
    Shift(NormalShift),
}

struct Sampler {
    h: f64,
    psi: f64,
    phi: f64,
    cutoff: f64,
    h1: PowerLaw,
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng, counts: &mut CellCounts) {
        if rng.random::<f64>() < self.h {
            if rng.random::<f64>() < self.psi {
                counts.unsound_reject += 1;
            } else {
                counts.unsound_notreject += 1;
            }
            return;
        }
        if rng.random::<f64>() < self.phi {
            let p: f64 = rng.random();
            if p < self.cutoff {
                counts.sound_true_reject += 1;
            } else {
                counts.sound_true_notreject += 1;
            }
            return;
        }
        let significant = match self.h1 {
            PowerLaw::Never => false,
            PowerLaw::Always => true,
            PowerLaw::Shift(shift) => {
                let noise: f64 = rng.sample(StandardNormal);
                normal::sf(shift.delta() + noise) < self.cutoff
            }
        };
        if significant {
            counts.sound_false_reject += 1;
        } else {
            counts.sound_false_notreject += 1;
        }
    }
}

fn chunk_counts(sampler: &Sampler, seed: u64, chunk: u64, len: u64) -> CellCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut counts = CellCounts::default();
    for _ in 0..len {
        sampler.draw(&mut rng, &mut counts);
    }
    counts
}

fn proportion_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn simulate(config: &SimConfig) -> Result<SimOutcome> {
    config.validate()?;
    let cutoff = config.cutoff();
    let psi = config
        .hacking
        .resolve_psi(cutoff)
        .map_err(|e| ModelError::DegenerateConfig(e.to_string()))?;
    let power = config.design.power();
    let h1 = if power <= 0.0 || cutoff <= 0.0 {
        PowerLaw::Never
    } else if power >= 1.0 || cutoff >= 1.0 {
        PowerLaw::Always
    } else {
        PowerLaw::Shift(NormalShift::from_power(power, cutoff)?)
    };
    let sampler = Sampler {
        h: config.hacking.h(),
        psi,
        phi: config.design.phi(),
        cutoff,
        h1,
    };
    let n_chunks = config.n_tests.div_ceil(CHUNK_LEN);
    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK_LEN.min(config.n_tests - k * CHUNK_LEN);
            chunk_counts(&sampler, config.seed, k, len)
        })
        .reduce(CellCounts::default, CellCounts::merge);

    let sig = counts.significant();
    let (empirical_fpr, empirical_rr, se_fpr, se_rr) = if sig > 0 {
        let fpr = counts.false_positives() as f64 / sig as f64;
        let rr = counts.replicated() as f64 / sig as f64;
        (
            Some(fpr),
            Some(rr),
            Some(proportion_se(fpr, sig)),
            Some(proportion_se(rr, sig)),
        )
    } else {
        (None, None, None, None)
    };
    Ok(SimOutcome {
        config: *config,
        generator: GENERATOR,
        psi,
        counts,
        empirical_fpr,
        empirical_rr,
        se_fpr,
        se_rr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// No draws in the denominator, so the empirical rate is undefined.
    EmptyDenominator,
    /// The closed form itself is undefined (no rejection mass).
    ClosedFormUndefined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub quantity: &'static str,
    pub closed_form: Option<f64>,
    pub empirical: Option<f64>,
    /// Standard error under the closed-form proportion.
    pub se: Option<f64>,
    pub z_score: Option<f64>,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub outcome: SimOutcome,
    pub rows: Vec<CheckRow>,
}

impl CrossCheck {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == CheckStatus::Pass)
    }

    pub fn row(&self, quantity: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

fn check_row(quantity: &'static str, closed: Option<f64>, hits: u64, n: u64) -> CheckRow {
    let empirical = (n > 0).then(|| hits as f64 / n as f64);
    let (se, z_score, status) = match (closed, empirical) {
        (None, _) => (None, None, CheckStatus::ClosedFormUndefined),
        (Some(_), None) => (None, None, CheckStatus::EmptyDenominator),
        (Some(p), Some(e)) => {
            let se = proportion_se(p, n);
            let z = if se > 0.0 {
                (e - p) / se
            } else if (e - p).abs() <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            let status = if z.abs() <= Z_LIMIT {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            (Some(se), Some(z), status)
        }
    };
    CheckRow {
        quantity,
        closed_form: closed,
        empirical,
        se,
        z_score,
        status,
    }
}

/// Simulates `config` and compares FPR, RR and the sound power against the
/// closed forms.
pub fn crosscheck(config: &SimConfig) -> Result<CrossCheck> {
    let outcome = simulate(config)?;
    let h = config.hacking.h();
    let fpr = fpr_regime(&config.design, h, outcome.psi).ok();
    let rr = rr_regime(&config.design, h, outcome.psi).ok();
    let c = outcome.counts;
    let rows = vec![
        check_row("fpr", fpr, c.false_positives(), c.significant()),
        check_row("rr", rr, c.replicated(), c.significant()),
        check_row(
            "power",
            Some(config.design.power()),
            c.sound_false_reject,
            c.sound_false(),
        ),
    ];
    Ok(CrossCheck { outcome, rows })
}
