use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use phack_core::claims::{all_pass, evaluate_claims, Verdict};
use phack_core::mc::{CellCounts, CheckRow};
use phack_core::sweeps::{self, format_sig6};
use phack_core::{
    crosscheck, fit_h, fit_h_stratified, fpr_regime, render_csv, render_svg, rr_hacked,
    rr_regime, table_regime, HackingEstimate, HackingRegime, ModelError, OutcomeTable, PsiSpec,
    ReplicationData, SimConfig, StratumModel, SweepResult, TestDesign,
};
use serde::Serialize;

use crate::args::{
    Builtin, Command, DesignArgs, FitArgs, HackingArgs, ModelArg, RatesArgs, RecordFormat,
    ReproduceArgs, SimulateArgs, SweepArgs,
};

const DEFAULT_ALPHA: f64 = 0.05;
const DEFAULT_POWER: f64 = 0.8;

/// Flag or input problems found after parsing; exits with 2 like clap's own errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// 2 for usage/validation, 3 for domain or numerical failures, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<ModelError>() {
        Some(ModelError::InvalidParameter { .. } | ModelError::CutoffAboveBaseline { .. }) => 2,
        Some(_) => 3,
        None => 1,
    }
}

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Rates(a) => rates(a),
        Command::Fit(a) => fit(a),
        Command::Sweep(a) => sweep(a),
        Command::Simulate(a) => simulate(a),
        Command::Reproduce(a) => reproduce(a),
    }
}

fn resolve_design(args: &DesignArgs) -> Result<TestDesign> {
    let alpha = args.alpha.unwrap_or(DEFAULT_ALPHA);
    let phi = match (args.phi, args.prior_odds) {
        (Some(phi), _) => phi,
        (None, Some(o)) => TestDesign::phi_from_odds(o.in_favor, o.against)?,
        (None, None) => TestDesign::phi_from_odds(1.0, 10.0)?,
    };
    let design = match args.beta {
        Some(beta) => TestDesign::new(alpha, beta, phi)?,
        None => TestDesign::from_power(alpha, args.power.unwrap_or(DEFAULT_POWER), phi)?,
    };
    Ok(design)
}

fn resolve_regime(args: &HackingArgs, alpha: f64) -> Result<HackingRegime> {
    let spec = match (args.psi, args.pi, args.naive_cdf) {
        (Some(psi), _, _) => PsiSpec::Direct { psi },
        (None, Some(pi), Some(naive_cdf)) => PsiSpec::Interpolated { pi, naive_cdf },
        (None, Some(pi), None) => PsiSpec::LowerBound { pi },
        (None, None, _) => PsiSpec::Direct { psi: 1.0 },
    };
    let baseline = args.baseline_alpha.unwrap_or(DEFAULT_ALPHA.max(alpha));
    Ok(HackingRegime::new(args.h.unwrap_or(0.0), baseline, spec)?)
}

/// Writes a line to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: impl fmt::Display) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(serde_json::to_string_pretty(value)?)
}

#[derive(Serialize)]
struct RatesInputs {
    alpha: f64,
    beta: f64,
    power: f64,
    phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    prior_odds: Option<String>,
    h: f64,
    baseline_alpha: f64,
    psi_spec: PsiSpec,
}

#[derive(Serialize)]
struct RatesRecord {
    inputs: RatesInputs,
    psi: f64,
    fpr: f64,
    rr: f64,
    table: OutcomeTable,
}

fn rates(args: RatesArgs) -> Result<ExitCode> {
    let design = resolve_design(&args.design)?;
    let regime = resolve_regime(&args.hacking, design.alpha())?;
    let psi = regime.resolve_psi(design.alpha())?;
    let h = regime.h();
    let record = RatesRecord {
        inputs: RatesInputs {
            alpha: design.alpha(),
            beta: design.beta(),
            power: design.power(),
            phi: design.phi(),
            prior_odds: args
                .design
                .prior_odds
                .filter(|_| args.design.phi.is_none())
                .map(|o| format!("{}:{}", o.in_favor, o.against)),
            h,
            baseline_alpha: regime.baseline_alpha(),
            psi_spec: regime.psi_spec(),
        },
        psi,
        fpr: fpr_regime(&design, h, psi)?,
        rr: rr_regime(&design, h, psi)?,
        table: table_regime(&design, h, psi)?,
    };
    match args.format {
        RecordFormat::Json => print_json(&record)?,
        RecordFormat::Csv => {
            let t = &record.table;
            let i = &record.inputs;
            let fields = [
                ("alpha", i.alpha),
                ("beta", i.beta),
                ("power", i.power),
                ("phi", i.phi),
                ("h", i.h),
                ("baseline_alpha", i.baseline_alpha),
                ("psi", record.psi),
                ("fpr", record.fpr),
                ("rr", record.rr),
                ("sound_true_reject", t.sound_true_reject),
                ("sound_true_notreject", t.sound_true_notreject),
                ("unsound_reject", t.unsound_reject),
                ("unsound_notreject", t.unsound_notreject),
                ("sound_false_reject", t.sound_false_reject),
                ("sound_false_notreject", t.sound_false_notreject),
                ("phi_sound", t.phi_sound),
                ("mass_unsound", t.mass_unsound),
                ("mass_sound_false", t.mass_sound_false),
            ];
            let header: Vec<&str> = fields.iter().map(|f| f.0).collect();
            let values: Vec<String> = fields.iter().map(|f| format_sig6(f.1)).collect();
            emit(format!("{}\n{}", header.join(","), values.join(",")))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DataSummary {
    source: String,
    total: u64,
    replicated: u64,
    rate: f64,
}

#[derive(Serialize)]
struct FitRecord {
    design: TestDesign,
    data: DataSummary,
    point: f64,
    predicted_rr: f64,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stratified: Option<HackingEstimate>,
}

fn load_data(args: &FitArgs) -> Result<(String, ReplicationData)> {
    if let Some(path) = &args.input {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let data: ReplicationData = toml::from_str(&text)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        return Ok((path.display().to_string(), data));
    }
    match args.builtin {
        Some(Builtin::PsychRep) => Ok(("builtin:psych-rep".into(), ReplicationData::psych_rep())),
        None => Err(usage("one of --input or --builtin is required")),
    }
}

fn fit(args: FitArgs) -> Result<ExitCode> {
    let design = resolve_design(&args.design)?;
    let (source, data) = load_data(&args)?;
    data.validate(design.alpha())
        .map_err(|e| usage(format!("invalid replication data: {e}")))?;
    if args.stratified && data.strata.is_empty() {
        return Err(usage("--stratified needs replication data with strata"));
    }
    let point = fit_h(&data, &design)?;
    let predicted_rr = rr_hacked(&design, point)?;
    let stratified = if args.stratified {
        let model = match args.stratum_model {
            ModelArg::PooledEquation => StratumModel::PooledEquation,
            ModelArg::NormalShift => StratumModel::NormalShift,
        };
        Some(fit_h_stratified(&data, &design, model)?)
    } else {
        None
    };
    print_json(&FitRecord {
        design,
        data: DataSummary {
            source,
            total: data.total,
            replicated: data.replicated,
            rate: data.rate(),
        },
        point,
        predicted_rr,
        residual: predicted_rr - data.rate(),
        stratified,
    })?;
    Ok(ExitCode::SUCCESS)
}

fn write_figure(fig: &SweepResult, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let csv_path = dir.join(format!("{}.csv", fig.figure_id));
    fs::write(&csv_path, render_csv(fig))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    written.push(csv_path);
    if svg {
        let svg_path = dir.join(format!("{}.svg", fig.figure_id));
        fs::write(&svg_path, render_svg(fig)?)
            .with_context(|| format!("writing {}", svg_path.display()))?;
        written.push(svg_path);
    }
    Ok(written)
}

fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let needs_h = matches!(args.figure, 3 | 5);
    let h = match (needs_h, args.h) {
        (true, Some(h)) => h,
        (true, None) => return Err(usage(format!("figure {} needs --h", args.figure))),
        (false, Some(_)) => return Err(usage(format!("figure {} takes no --h", args.figure))),
        (false, None) => 0.0,
    };
    if args.naive_cdf.is_some() && args.figure != 3 {
        return Err(usage("--naive-cdf only applies to figure 3"));
    }
    let fig = match args.figure {
        1 => sweeps::sweep_figure1()?,
        2 => sweeps::sweep_figure2()?,
        3 => sweeps::sweep_figure3_with(h, args.naive_cdf)?,
        4 => sweeps::sweep_figure4()?,
        5 => sweeps::sweep_figure5(h)?,
        k => return Err(usage(format!("unknown figure {k}"))),
    };
    for path in write_figure(&fig, &args.out, args.svg)? {
        emit(path.display())?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SimRecord<'a> {
    generator: &'a str,
    config: &'a SimConfig,
    psi: f64,
    counts: CellCounts,
    empirical_fpr: Option<f64>,
    empirical_rr: Option<f64>,
    se_fpr: Option<f64>,
    se_rr: Option<f64>,
    checks: &'a [CheckRow],
    passed: bool,
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let design = resolve_design(&args.design)?;
    let regime = resolve_regime(&args.hacking, design.alpha())?;
    let config = SimConfig::new(args.n, args.seed, design, regime)?;
    let check = crosscheck(&config)?;
    let o = &check.outcome;
    print_json(&SimRecord {
        generator: o.generator,
        config: &o.config,
        psi: o.psi,
        counts: o.counts,
        empirical_fpr: o.empirical_fpr,
        empirical_rr: o.empirical_rr,
        se_fpr: o.se_fpr,
        se_rr: o.se_rr,
        checks: &check.rows,
        passed: check.passed(),
    })?;
    Ok(ExitCode::SUCCESS)
}

fn reproduce(args: ReproduceArgs) -> Result<ExitCode> {
    let results = evaluate_claims(args.strict)?;
    for r in &results {
        emit(r.line())?;
    }
    let count = |v: Verdict| results.iter().filter(|r| r.verdict == v).count();
    emit(format!(
        "claims: {} pass, {} fail, {} info",
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::Info)
    ))?;
    for fig in sweeps::all_figures()? {
        for path in write_figure(&fig, &args.out, true)? {
            emit(format!("wrote {}", path.display()))?;
        }
    }
    Ok(if all_pass(&results) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
