use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use leakcert::adversary::TrainConfig;
use leakcert::audit::{certify_classification, certify_representation, AuditReport, VerdictPolicy};
use leakcert::harness::{load_sweep_config, run_sweep, selftest, SelftestOptions};
use leakcert::synthdata::{build_feature_leakage_scenario, read_dataset, write_dataset, FileSetting, Scenario};
use leakcert::{Loss, Result};

#[derive(Parser)]
#[command(name = "leakcert", version, about = "Certified lower bounds on the loss of any adversary")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Mixture experiment over a grid of μ; writes sweep.csv, sweep.json, sweep.svg.
    Sweep(SweepArgs),
    /// Certify a representation dataset with a trained two-layer adversary.
    AuditRep(AuditRepArgs),
    /// Certify a finite-alphabet dataset with the exact empirical minimizer.
    AuditCls(AuditClsArgs),
    /// Sample a synthetic mixture dataset as CSV.
    GenData(GenDataArgs),
    /// Gradient, quadrature and coverage self-checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated μ values.
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Record wall-clock seconds per grid point.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct AuditRepArgs {
    #[command(flatten)]
    common: Common,
    /// CSV with header s,t or s,t1,...,tq.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    /// Barron constant of the regression function (asserted by the user).
    #[arg(long)]
    c_eta: Option<f64>,
    /// Diameter of the representation support (asserted by the user).
    #[arg(long)]
    diam: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Verdict threshold on the certified lower bound.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Squared,
    Log,
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Loss {
        match l {
            LossArg::Squared => Loss::Squared,
            LossArg::Log => Loss::Log,
        }
    }
}

#[derive(Args)]
struct AuditClsArgs {
    #[command(flatten)]
    common: Common,
    /// CSV with header s,t and symbols in 1..=d.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct GenDataArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.1)]
    mu: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Truncation radius.
    #[arg(long, default_value_t = 3.0)]
    r: f64,
    /// Bin the representation into this many symbols (classification data).
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct SelftestArgs {
    #[command(flatten)]
    common: Common,
    /// Smaller suites; finishes in seconds.
    #[arg(long)]
    quick: bool,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct AuditRepFile {
    data: Option<PathBuf>,
    k: Option<usize>,
    delta: Option<f64>,
    c_eta: Option<f64>,
    diam: Option<f64>,
    threshold: Option<f64>,
    train: Option<TrainConfig>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct AuditClsFile {
    data: Option<PathBuf>,
    d: Option<usize>,
    delta: Option<f64>,
    loss: Option<Loss>,
    threshold: Option<f64>,
}

fn read_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p)?)?),
        None => Ok(T::default()),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| leakcert::Error::InvalidArgument(format!("missing required --{flag}")))
}

fn policy(threshold: Option<f64>, loss: Loss) -> Result<VerdictPolicy> {
    threshold.map_or(Ok(VerdictPolicy::default_for(loss)), |t| VerdictPolicy::new(t, loss))
}

fn emit_report(report: &AuditReport, out: Option<&Path>) -> Result<ExitCode> {
    let mut json = report.to_json()?;
    json.push('\n');
    match out {
        Some(p) => fs::write(p, json)?,
        None => print!("{json}"),
    }
    eprintln!(
        "{}: certified lower bound {} (empirical {}, epsilon {})",
        report.verdict, report.certified_lower_bound, report.empirical_loss, report.epsilon
    );
    Ok(ExitCode::from(report.verdict.exit_code() as u8))
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let mut cfg = match &args.common.config {
        Some(p) => load_sweep_config(p)?,
        None => Default::default(),
    };
    if let Some(mu) = args.mu {
        cfg.mu_grid = mu;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if let Some(v) = args.restarts {
        cfg.train.restarts = v;
    }
    if let Some(v) = args.epochs {
        cfg.train.epochs = v;
    }
    if let Some(v) = args.common.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.common.out {
        cfg.output_dir = v;
    }
    cfg.timing |= args.timing;
    let out = run_sweep(&cfg)?;
    println!("mu,empirical_loss,true_loss,lower_bound,ratio");
    for r in &out.rows {
        println!("{},{},{},{},{}", r.mu, r.empirical_loss, r.true_loss, r.lower_bound, r.ratio);
    }
    eprintln!("wrote {}, {}, {}", out.csv.display(), out.json.display(), out.svg.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_audit_rep(args: AuditRepArgs) -> Result<ExitCode> {
    let file: AuditRepFile = read_config(args.common.config.as_deref())?;
    let data = required(args.data.or(file.data), "data")?;
    let c_eta = required(args.c_eta.or(file.c_eta), "c-eta")?;
    let diam = required(args.diam.or(file.diam), "diam")?;
    let k = args.k.or(file.k).unwrap_or(1000);
    let delta = args.delta.or(file.delta).unwrap_or(0.01);
    let mut train = file.train.unwrap_or_default();
    if let Some(v) = args.restarts {
        train.restarts = v;
    }
    if let Some(v) = args.epochs {
        train.epochs = v;
    }
    if let Some(v) = args.common.seed {
        train.seed = v;
    }
    let policy = policy(args.threshold.or(file.threshold), Loss::Squared)?;
    let ds = read_dataset(&data, FileSetting::Representation)?;
    let mut report = certify_representation(&ds, k, &train, c_eta, diam, delta, &policy)?;
    report.metadata.insert("data".into(), data.display().to_string());
    emit_report(&report, args.common.out.as_deref())
}

fn cmd_audit_cls(args: AuditClsArgs) -> Result<ExitCode> {
    let file: AuditClsFile = read_config(args.common.config.as_deref())?;
    let data = required(args.data.or(file.data), "data")?;
    let d = required(args.d.or(file.d), "d")?;
    let delta = args.delta.or(file.delta).unwrap_or(0.01);
    let loss = args.loss.map(Loss::from).or(file.loss).unwrap_or(Loss::Squared);
    let policy = policy(args.threshold.or(file.threshold), loss)?;
    let ds = read_dataset(&data, FileSetting::Classification { d })?;
    let mut report = certify_classification(&ds, d, delta, loss, &policy)?;
    report.metadata.insert("data".into(), data.display().to_string());
    emit_report(&report, args.common.out.as_deref())
}

fn cmd_gen_data(args: GenDataArgs) -> Result<ExitCode> {
    let out = required(args.common.out, "out")?;
    let scn = Scenario::with_mu(args.mu, args.r, args.common.seed.unwrap_or(0))?;
    let mut ds = build_feature_leakage_scenario(&scn, args.n)?;
    if let Some(d) = args.d {
        ds = ds.discretize(d, args.r)?;
    }
    write_dataset(&ds, &out)?;
    eprintln!("wrote {} rows to {}", ds.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(args: SelftestArgs) -> Result<ExitCode> {
    let report = selftest(SelftestOptions { quick: args.quick, seed: args.common.seed.unwrap_or(0) });
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(p) = args.common.out {
        fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Exit status 2 is reserved for the leakage-possible verdict.
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::AuditRep(a) => cmd_audit_rep(a),
        Command::AuditCls(a) => cmd_audit_cls(a),
        Command::GenData(a) => cmd_gen_data(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
