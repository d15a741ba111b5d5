//! Experiment sweeps over the mixture scenario, result files, and the
//! self-test suites.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{gradient_check, random_net, train_erm, TrainConfig};
use crate::analytic::{
    barron_constant_numeric, barron_constant_tanh, eta, minimal_true_loss, representation_bound,
    BoundIngredients, MixtureParams, QuadratureSpec,
};
use crate::audit::{certify_synthetic, VerdictPolicy};
use crate::rng::{self, derive_seed};
use crate::synthdata::{sample_dataset, Dataset, Scenario};
use crate::{Error, Loss, Result, Sign};

/// Seed tags for [`derive_seed`].
mod tags {
    pub const SWEEP_DATA: u64 = 0;
    pub const SWEEP_TRAIN: u64 = 1;
    pub const COVERAGE_DATA: u64 = 2;
    pub const COVERAGE_TRAIN: u64 = 3;
    pub const GRADIENT: u64 = 4;
    pub const MONTE_CARLO: u64 = 5;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub mu_grid: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    /// Truncation radius; the bound uses `diam = 2r`.
    pub r: f64,
    /// Master seed. Grid point `j` draws data from `derive_seed(seed, 0, j)`
    /// and trains from `derive_seed(seed, 1, j)`; `train.seed` is ignored.
    pub seed: u64,
    pub train: TrainConfig,
    pub output_dir: PathBuf,
    /// Record real wall-clock times. Off by default so that repeated runs
    /// produce identical files.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            mu_grid: vec![0.01, 0.02, 0.04, 0.06, 0.08, 0.1],
            n: 100_000,
            k: 1_000,
            delta: 0.01,
            r: 3.0,
            seed: 0,
            train: TrainConfig::default(),
            output_dir: PathBuf::from("results"),
            timing: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu_grid.is_empty() {
            return Err(Error::InvalidArgument("mu_grid must not be empty".into()));
        }
        if let Some(mu) = self.mu_grid.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::InvalidArgument(format!("mu_grid values must lie in [0, 1], got {mu}")));
        }
        if self.train.loss != Loss::Squared {
            return Err(Error::Unsupported("the sweep certifies the squared loss only".into()));
        }
        BoundIngredients::new(self.delta, self.n as u64, self.k as u64, 0.0, 2.0 * self.r)?;
        MixtureParams::new(0.0, self.r)?;
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub n: u64,
    pub k: u64,
    pub delta: f64,
    pub empirical_loss: f64,
    pub true_loss: f64,
    pub lower_bound: f64,
    pub ratio: f64,
    pub wall_seconds: f64,
}

#[derive(Serialize)]
struct SweepRecord<'a> {
    mu_grid: &'a [f64],
    n: usize,
    k: usize,
    delta: f64,
    r: f64,
    seed: u64,
    train: &'a TrainConfig,
    rows: &'a [SweepRow],
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: PathBuf,
}

/// One grid point of the sweep.
pub fn sweep_point(cfg: &SweepConfig, j: usize, spec: &QuadratureSpec) -> Result<SweepRow> {
    let mu = cfg.mu_grid[j];
    let start = Instant::now();
    let scn = Scenario::with_mu(mu, cfg.r, derive_seed(cfg.seed, tags::SWEEP_DATA, j as u64))?;
    let ds = sample_dataset(&scn, cfg.n)?;
    let train = TrainConfig { seed: derive_seed(cfg.seed, tags::SWEEP_TRAIN, j as u64), ..cfg.train.clone() };
    let erm = train_erm(&ds, cfg.k, &train)?;
    let mixture = scn.mixture();
    let ingredients =
        BoundIngredients::new(cfg.delta, cfg.n as u64, cfg.k as u64, barron_constant_tanh(mu), mixture.diameter())?;
    let empirical_loss = erm.best_empirical_loss;
    let lower_bound = (empirical_loss - representation_bound(&ingredients)).max(0.0);
    let true_loss = minimal_true_loss(&mixture, spec)?;
    let elapsed = start.elapsed().as_secs_f64();
    log::info!("mu={mu}: empirical {empirical_loss}, true {true_loss}, bound {lower_bound} ({elapsed:.1}s)");
    Ok(SweepRow {
        mu,
        n: cfg.n as u64,
        k: cfg.k as u64,
        delta: cfg.delta,
        empirical_loss,
        true_loss,
        lower_bound,
        ratio: if empirical_loss > 0.0 { lower_bound / empirical_loss } else { 0.0 },
        wall_seconds: if cfg.timing { elapsed } else { 0.0 },
    })
}

/// Runs every grid point and writes `sweep.csv`, `sweep.json` and
/// `sweep.svg` into `cfg.output_dir`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let spec = QuadratureSpec::default();
    let rows = (0..cfg.mu_grid.len())
        .map(|j| sweep_point(cfg, j, &spec))
        .collect::<Result<Vec<_>>>()?;
    write_sweep(cfg, rows)
}

fn write_sweep(cfg: &SweepConfig, rows: Vec<SweepRow>) -> Result<SweepOutput> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let csv = dir.join("sweep.csv");
    let json = dir.join("sweep.json");
    let svg = dir.join("sweep.svg");

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&csv)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;

    let record = SweepRecord {
        mu_grid: &cfg.mu_grid,
        n: cfg.n,
        k: cfg.k,
        delta: cfg.delta,
        r: cfg.r,
        seed: cfg.seed,
        train: &cfg.train,
        rows: &rows,
    };
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    fs::write(&json, text)?;
    fs::write(&svg, render_svg(&rows))?;
    Ok(SweepOutput { rows, csv, json, svg })
}

fn axis_range(values: impl Iterator<Item = f64>, pad_frac: f64, min_span: f64) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    let span = (hi - lo).max(min_span);
    let mid = 0.5 * (lo + hi);
    (mid - 0.5 * span * (1.0 + 2.0 * pad_frac), mid + 0.5 * span * (1.0 + 2.0 * pad_frac))
}

/// Three-series line chart of the sweep against μ.
pub fn render_svg(rows: &[SweepRow]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 440.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 200.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 50.0;
    let (x0, x1) = axis_range(rows.iter().map(|r| r.mu), 0.0, 0.02);
    let (y0, y1) = axis_range(
        rows.iter().flat_map(|r| [r.true_loss, r.empirical_loss, r.lower_bound]),
        0.05,
        0.05,
    );
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (bx, by) = (px(x0), py(y0));
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT:.2},{TOP:.2} L{bx:.2},{by:.2} L{:.2},{by:.2}" fill="none" stroke="black"/>"#,
        W - RIGHT
    );
    for i in 0..=5 {
        let x = x0 + (x1 - x0) * i as f64 / 5.0;
        let tx = px(x);
        let _ = writeln!(s, r#"<line x1="{tx:.2}" y1="{by:.2}" x2="{tx:.2}" y2="{:.2}" stroke="black"/>"#, by + 5.0);
        let _ = writeln!(s, r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{x:.3}</text>"#, by + 20.0);
        let y = y0 + (y1 - y0) * i as f64 / 5.0;
        let ty = py(y);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ty:.2}" x2="{LEFT:.2}" y2="{ty:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.3}</text>"#, LEFT - 8.0, ty + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">μ</text>"#,
        0.5 * (LEFT + W - RIGHT),
        H - 10.0
    );
    let _ = writeln!(s, r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">loss</text>"#, 0.5 * H, 0.5 * H);

    let series: [(&str, &str, fn(&SweepRow) -> f64); 3] = [
        ("minimal true loss", "#1f77b4", |r| r.true_loss),
        ("minimal empirical loss", "#ff7f0e", |r| r.empirical_loss),
        ("certified lower bound", "#2ca02c", |r| r.lower_bound),
    ];
    for (idx, (label, color, value)) in series.iter().enumerate() {
        let points: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", px(r.mu), py(value(r)))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        for r in rows {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(r.mu), py(value(r)));
        }
        let ly = TOP + 10.0 + 20.0 * idx as f64;
        let lx = W - RIGHT + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, lx + 26.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Streaming Monte-Carlo estimate of the minimal squared loss
/// `E[(S − η(T))²]`; returns `(mean, standard error)`.
pub fn monte_carlo_true_loss(params: &MixtureParams, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let t = loop {
            let z: f64 = rng.sample(StandardNormal);
            let t = s * params.mu + z;
            if t.abs() <= params.r {
                break t;
            }
        };
        let e = (s - eta(t, params.mu)).powi(2);
        sum += e;
        sum_sq += e * e;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean) * m / (m - 1.0);
    Ok((mean, (var / m).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub runs: usize,
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub mus: Vec<f64>,
    pub r: f64,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            runs: 500,
            n: 5_000,
            k: 64,
            delta: 0.05,
            mus: vec![0.0, 0.02, 0.05, 0.1],
            r: 3.0,
            train: TrainConfig { restarts: 1, ..TrainConfig::default() },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub runs: usize,
    /// Runs whose certified lower bound exceeded the exact minimal loss.
    pub violations: usize,
    pub rate: f64,
    /// `δ + 3·√(δ(1−δ)/runs)`.
    pub limit: f64,
}

impl CoverageSummary {
    pub fn passed(&self) -> bool {
        self.rate <= self.limit
    }
}

/// Repeated independent synthetic audits, counting how often the certificate
/// overshoots the exact minimal loss.
pub fn coverage_experiment(cfg: &CoverageConfig) -> Result<CoverageSummary> {
    if cfg.runs == 0 || cfg.mus.is_empty() {
        return Err(Error::InvalidArgument("coverage needs at least one run and one mu".into()));
    }
    let spec = QuadratureSpec::default();
    let policy = VerdictPolicy::default_for(Loss::Squared);
    let flags = (0..cfg.runs)
        .into_par_iter()
        .map(|i| {
            let mu = cfg.mus[i % cfg.mus.len()];
            let scn = Scenario::with_mu(mu, cfg.r, derive_seed(cfg.seed, tags::COVERAGE_DATA, i as u64))?;
            let train = TrainConfig { seed: derive_seed(cfg.seed, tags::COVERAGE_TRAIN, i as u64), ..cfg.train.clone() };
            let report = certify_synthetic(&scn, cfg.n, cfg.k, &train, cfg.delta, &policy, &spec)?;
            let truth = report.reference_true_loss.expect("synthetic report carries the truth");
            Ok(report.certified_lower_bound > truth)
        })
        .collect::<Result<Vec<bool>>>()?;
    let violations = flags.iter().filter(|&&v| v).count();
    let m = cfg.runs as f64;
    Ok(CoverageSummary {
        runs: cfg.runs,
        violations,
        rate: violations as f64 / m,
        limit: cfg.delta + 3.0 * (cfg.delta * (1.0 - cfg.delta) / m).sqrt(),
    })
}

/// Max relative backprop error over `nets` random small networks.
pub fn gradient_suite(nets: usize, seed: u64) -> Result<f64> {
    let mut rng = rng::stream(seed, 0);
    let mut worst: f64 = 0.0;
    for i in 0..nets {
        let k = rng.random_range(1..=8);
        let q = rng.random_range(1..=3);
        let loss = if i % 2 == 0 { Loss::Squared } else { Loss::Log };
        let net = random_net(k, q, 0.3, derive_seed(seed, tags::GRADIENT, i as u64))?;
        let n = 8;
        let labels: Vec<Sign> = (0..n).map(|_| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus }).collect();
        let values: Vec<f64> = (0..n * q).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let ds = Dataset::representation(labels, q, values)?;
        let batch: Vec<usize> = (0..n).collect();
        worst = worst.max(gradient_check(&net, &ds, &batch, loss, 1e-6)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        log::info!("{name}: {} ({detail})", if passed { "pass" } else { "FAIL" });
        self.checks.push(Check { name: name.into(), passed, detail });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestOptions {
    /// Smaller gradient, Monte-Carlo and coverage suites.
    pub quick: bool,
    pub seed: u64,
}

/// Gradient check, quadrature oracles, Barron cross-check and coverage.
pub fn selftest(opts: SelftestOptions) -> SelftestReport {
    let mut report = SelftestReport::default();
    let spec = QuadratureSpec::default();

    report.record("gradient", (|| {
        let nets = if opts.quick { 20 } else { 100 };
        let worst = gradient_suite(nets, opts.seed)?;
        Ok((worst < 1e-5, format!("{nets} networks, max relative error {worst:e}")))
    })());

    report.record("quadrature-identity", (|| {
        let l0 = minimal_true_loss(&MixtureParams::new(0.0, 3.0)?, &spec)?;
        Ok(((l0 - 1.0).abs() <= 1e-8, format!("L(0) = {l0}")))
    })());

    report.record("quadrature-monte-carlo", (|| {
        let params = MixtureParams::new(0.1, 3.0)?;
        let samples = if opts.quick { 1_000_000 } else { 10_000_000 };
        let l = minimal_true_loss(&params, &spec)?;
        let (mc, se) = monte_carlo_true_loss(&params, samples, derive_seed(opts.seed, tags::MONTE_CARLO, 0))?;
        let z = (l - mc).abs() / se;
        Ok((z <= 3.0, format!("L(0.1) = {l}, Monte-Carlo {mc} ± {se:e}, |z| = {z:.2}")))
    })());

    report.record("barron-constant", (|| {
        let mut worst: f64 = 0.0;
        for mu in [0.01, 0.1, 1.0] {
            let numeric = barron_constant_numeric(mu, &spec)?;
            worst = worst.max((numeric - mu).abs() / mu);
        }
        Ok((worst <= 1e-6, format!("max relative error {worst:e}")))
    })());

    report.record("coverage", (|| {
        let cfg = CoverageConfig {
            runs: if opts.quick { 50 } else { 500 },
            seed: opts.seed,
            ..CoverageConfig::default()
        };
        let c = coverage_experiment(&cfg)?;
        Ok((c.passed(), format!("{} of {} runs above the truth, limit rate {:.4}", c.violations, c.runs, c.limit)))
    })());

    report
}

/// Reads a JSON sweep config; absent fields take their defaults.
pub fn load_sweep_config(path: impl AsRef<Path>) -> Result<SweepConfig> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
