//! Seeded data generation and dataset files.
//!
//! The mixture scenario draws `S` uniformly from `{−1, +1}` and
//! `U | S ~ N(S·v0, I_p)`, releasing `T = ⟨U, v⟩` truncated to `[−r, r]`.
//! Only the projection is materialized: `⟨U, v⟩ | S ~ N(S·μ, 1)` with
//! `μ = ⟨v, v0⟩`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{self, streams};
use crate::{Error, Result, Sign};

const MAX_CONSECUTIVE_REJECTIONS: usize = 1_000_000;

/// Generative description of the audited system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub p: usize,
    pub v0: Vec<f64>,
    pub v: Vec<f64>,
    pub r: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(v0: Vec<f64>, v: Vec<f64>, r: f64, seed: u64) -> Result<Self> {
        if v0.is_empty() || v0.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: v0.len(), got: v.len() });
        }
        for (name, vec) in [("v0", &v0), ("v", &v)] {
            let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("{name} must be a unit vector, |{name}| = {norm}")));
            }
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("truncation radius must be positive, got {r}")));
        }
        Ok(Scenario { p: v0.len(), v0, v, r, seed })
    }

    /// Two-dimensional scenario with `v0 = e1` and `v = (μ, √(1 − μ²))`, so
    /// that `⟨v, v0⟩ = μ` exactly.
    pub fn with_mu(mu: f64, r: f64, seed: u64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&mu) {
            return Err(Error::InvalidArgument(format!("mu must lie in [-1, 1], got {mu}")));
        }
        Scenario::new(vec![1.0, 0.0], vec![mu, (1.0 - mu * mu).sqrt()], r, seed)
    }

    pub fn mu(&self) -> f64 {
        self.v.iter().zip(&self.v0).map(|(a, b)| a * b).sum()
    }

    pub fn mixture(&self) -> crate::analytic::MixtureParams {
        crate::analytic::MixtureParams { mu: self.mu(), r: self.r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Representation,
    Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    /// Row-major `n × q` real features.
    Representation { q: usize, values: Vec<f64> },
    /// Symbols in `1..=d`.
    Classification { d: usize, symbols: Vec<u32> },
}

/// An audit sample `{(s_i, t_i)}`. Metadata is descriptive and does not take
/// part in equality.
#[derive(Debug, Clone)]
pub struct Dataset {
    labels: Vec<Sign>,
    features: Features,
    pub metadata: BTreeMap<String, String>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.features == other.features
    }
}

impl Dataset {
    pub fn representation(labels: Vec<Sign>, q: usize, values: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if q == 0 || values.len() != labels.len() * q {
            return Err(Error::DimensionMismatch { expected: labels.len() * q.max(1), got: values.len() });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite feature value {bad}")));
        }
        Ok(Dataset {
            labels,
            features: Features::Representation { q, values },
            metadata: BTreeMap::new(),
        })
    }

    pub fn classification(labels: Vec<Sign>, d: usize, symbols: Vec<u32>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if symbols.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), got: symbols.len() });
        }
        if d == 0 {
            return Err(Error::InvalidArgument("alphabet size d must be at least 1".into()));
        }
        if let Some(bad) = symbols.iter().find(|&&t| t == 0 || t as usize > d) {
            return Err(Error::InvalidArgument(format!("symbol {bad} outside 1..={d}")));
        }
        Ok(Dataset {
            labels,
            features: Features::Classification { d, symbols },
            metadata: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Sign] {
        &self.labels
    }

    pub fn features(&self) -> &Features {
        &self.features
    }

    pub fn setting(&self) -> Setting {
        match self.features {
            Features::Representation { .. } => Setting::Representation,
            Features::Classification { .. } => Setting::Classification,
        }
    }

    /// `(q, values)` of a representation dataset.
    pub fn representation_values(&self) -> Result<(usize, &[f64])> {
        match &self.features {
            Features::Representation { q, values } => Ok((*q, values)),
            _ => Err(Error::WrongSetting { expected: "representation" }),
        }
    }

    /// `(d, symbols)` of a classification dataset.
    pub fn classification_symbols(&self) -> Result<(usize, &[u32])> {
        match &self.features {
            Features::Classification { d, symbols } => Ok((*d, symbols)),
            _ => Err(Error::WrongSetting { expected: "classification" }),
        }
    }

    /// Bins a scalar representation dataset into `d` equal-width symbols over
    /// `[−r, r]` (values on the boundary go to the outer bins).
    pub fn discretize(&self, d: usize, r: f64) -> Result<Dataset> {
        let (q, values) = self.representation_values()?;
        if q != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: q });
        }
        if d == 0 || !(r > 0.0) {
            return Err(Error::InvalidArgument("discretization needs d >= 1 and r > 0".into()));
        }
        let width = 2.0 * r / d as f64;
        let symbols = values
            .iter()
            .map(|&t| (((t + r) / width).floor().clamp(0.0, d as f64 - 1.0) as u32) + 1)
            .collect();
        let mut out = Dataset::classification(self.labels.clone(), d, symbols)?;
        out.metadata = self.metadata.clone();
        out.metadata.insert("discretized_bins".into(), d.to_string());
        Ok(out)
    }
}

fn rademacher<R: Rng>(rng: &mut R) -> Sign {
    if rng.random::<bool>() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Draws `N(mean, sd²)` conditioned on `[−r, r]` by rejection.
fn truncated_normal<R: Rng>(rng: &mut R, mean: f64, sd: f64, r: f64) -> Result<f64> {
    for _ in 0..MAX_CONSECUTIVE_REJECTIONS {
        let z: f64 = rng.sample(StandardNormal);
        let x = mean + sd * z;
        if x.abs() <= r {
            return Ok(x);
        }
    }
    Err(Error::RejectionExhausted(MAX_CONSECUTIVE_REJECTIONS))
}

/// `n` i.i.d. draws of `(S, T)` from the mixture scenario.
pub fn sample_dataset(scn: &Scenario, n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mu = scn.mu();
    let mut rng = rng::stream(scn.seed, streams::DATASET);
    let mut labels = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let s = rademacher(&mut rng);
        labels.push(s);
        values.push(truncated_normal(&mut rng, s.value() * mu, 1.0, scn.r)?);
    }
    let mut ds = Dataset::representation(labels, 1, values)?;
    ds.metadata.insert("scenario".into(), "gaussian-mixture".into());
    ds.metadata.insert("mu".into(), mu.to_string());
    ds.metadata.insert("r".into(), scn.r.to_string());
    ds.metadata.insert("p".into(), scn.p.to_string());
    ds.metadata.insert("seed".into(), scn.seed.to_string());
    Ok(ds)
}

/// Feature-leakage audit of a linear predictor: `S = Z` (protected
/// attribute), `U = X`, `T = g(X)`. Same draws as [`sample_dataset`].
pub fn build_feature_leakage_scenario(scn: &Scenario, n: usize) -> Result<Dataset> {
    let mut ds = sample_dataset(scn, n)?;
    ds.metadata.insert("scenario".into(), "feature-leakage".into());
    ds.metadata
        .insert("identification".into(), "S = Z (protected attribute), U = X, T = g(X)".into());
    // Ŷ is independent of Z exactly when v ⟂ v0.
    ds.metadata
        .insert("demographic_parity".into(), (scn.mu() == 0.0).to_string());
    Ok(ds)
}

/// Adds independent `N(0, γ²)` noise to each value, redrawing the noise until
/// the result lands in `[−r, r]`.
pub fn smooth_and_truncate(values: &[f64], gamma: f64, r: f64, seed: u64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise scale must be positive, got {gamma}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("truncation radius must be positive, got {r}")));
    }
    let mut rng = rng::stream(seed, streams::SMOOTHING);
    values
        .iter()
        .map(|&v| truncated_normal(&mut rng, v, gamma, r))
        .collect()
}

/// Population table for membership inference: features `x_i ∈ ℝ^p`, labels
/// `y_i` and membership bits `s_i` (`+1` iff the row trained the target).
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    p: usize,
    x: Vec<f64>,
    y: Vec<Sign>,
    membership: Vec<Sign>,
}

impl Population {
    pub fn new(p: usize, x: Vec<f64>, y: Vec<Sign>, membership: Vec<Sign>) -> Result<Self> {
        if p == 0 || x.len() != y.len() * p {
            return Err(Error::DimensionMismatch { expected: y.len() * p.max(1), got: x.len() });
        }
        if membership.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: y.len(), got: membership.len() });
        }
        let members = membership.iter().filter(|&&m| m == Sign::Plus).count();
        if members == 0 || members == membership.len() {
            return Err(Error::DegeneratePopulation(
                "membership needs at least one member and one non-member".into(),
            ));
        }
        Ok(Population { p, x, y, membership })
    }

    /// `rows` Gaussian records with labels `sign(x_1)` flipped with
    /// probability `label_noise`; the first `members` rows are members.
    pub fn synthetic(rows: usize, p: usize, members: usize, label_noise: f64, seed: u64) -> Result<Self> {
        if members > rows {
            return Err(Error::InvalidArgument("more members than rows".into()));
        }
        let mut rng = rng::stream(seed, streams::POPULATION);
        let mut x = Vec::with_capacity(rows * p);
        let mut y = Vec::with_capacity(rows);
        for _ in 0..rows {
            let row: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
            let clean = if row.first().copied().unwrap_or(0.0) >= 0.0 { Sign::Plus } else { Sign::Minus };
            let flip = rng.random::<f64>() < label_noise;
            y.push(match (clean, flip) {
                (s, false) => s,
                (Sign::Plus, true) => Sign::Minus,
                (Sign::Minus, true) => Sign::Plus,
            });
            x.extend(row);
        }
        let membership = (0..rows).map(|i| if i < members { Sign::Plus } else { Sign::Minus }).collect();
        Population::new(p, x, y, membership)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> (&[f64], Sign) {
        (&self.x[i * self.p..(i + 1) * self.p], self.y[i])
    }

    pub fn membership(&self) -> &[Sign] {
        &self.membership
    }
}

/// Logistic-regression target `g(x) = σ(w·x)` with `σ(t) = tanh(t/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticTarget {
    pub w: Vec<f64>,
}

impl LogisticTarget {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Confidence in `(−1, 1)`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        (0.5 * self.score(x)).tanh()
    }

    /// `log(1 + exp(−y·w·x))`, the log loss of `P(y = +1 | x) = (1 + g(x))/2`.
    pub fn loss(&self, x: &[f64], y: Sign) -> f64 {
        softplus(-y.value() * self.score(x))
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Trains the target by full-batch gradient descent on member rows only.
pub fn train_target(pop: &Population, steps: usize, learn_rate: f64, seed: u64) -> Result<LogisticTarget> {
    if !(learn_rate > 0.0 && learn_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!("learn rate must be positive, got {learn_rate}")));
    }
    let members: Vec<usize> = (0..pop.len()).filter(|&i| pop.membership[i] == Sign::Plus).collect();
    let first = pop.y[members[0]];
    if members.iter().all(|&i| pop.y[i] == first) {
        return Err(Error::DegeneratePopulation("all members share one label".into()));
    }
    let mut rng = rng::stream(seed, streams::MEMBERSHIP);
    let mut target = LogisticTarget {
        w: (0..pop.p).map(|_| 0.01 * rng.sample::<f64, _>(StandardNormal)).collect(),
    };
    let m = members.len() as f64;
    let mut grad = vec![0.0; pop.p];
    for _ in 0..steps {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for &i in &members {
            let (x, y) = pop.row(i);
            let yv = y.value();
            // d/dz softplus(−y z) = −y / (1 + e^{y z})
            let coeff = -yv / (1.0 + (yv * target.score(x)).exp());
            for (g, xj) in grad.iter_mut().zip(x) {
                *g += coeff * xj;
            }
        }
        for (w, g) in target.w.iter_mut().zip(&grad) {
            *w -= learn_rate * g / m;
        }
    }
    Ok(target)
}

/// Black-box membership-inference sample `{(s_i, g(x_i))}` over the whole
/// population, with `g` trained on the members.
pub fn build_membership_scenario(pop: &Population, train_steps: usize, learn_rate: f64, seed: u64) -> Result<Dataset> {
    let target = train_target(pop, train_steps, learn_rate, seed)?;
    let values = (0..pop.len()).map(|i| target.predict(pop.row(i).0)).collect();
    let mut ds = Dataset::representation(pop.membership.clone(), 1, values)?;
    ds.metadata.insert("scenario".into(), "membership-inference".into());
    ds.metadata
        .insert("identification".into(), "S = s_i (membership), U = (x_i, y_i), T = g(x_i)".into());
    ds.metadata.insert("population".into(), pop.len().to_string());
    ds.metadata.insert("seed".into(), seed.to_string());
    Ok(ds)
}

/// Writes `s,t` rows (or `s,t1,..,tq` for vector features). Reals use
/// shortest round-trip formatting.
pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    match &ds.features {
        Features::Representation { q, values } => {
            if *q == 1 {
                w.write_record(["s", "t"])?;
            } else {
                let mut header = vec!["s".to_string()];
                header.extend((1..=*q).map(|j| format!("t{j}")));
                w.write_record(&header)?;
            }
            for (s, row) in ds.labels.iter().zip(values.chunks(*q)) {
                let mut rec = vec![s.as_i8().to_string()];
                rec.extend(row.iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
        Features::Classification { symbols, .. } => {
            w.write_record(["s", "t"])?;
            for (s, t) in ds.labels.iter().zip(symbols) {
                w.write_record([s.as_i8().to_string(), t.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// How to interpret the `t` column(s) of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileSetting {
    Representation,
    Classification { d: usize },
}

pub fn read_dataset(path: impl AsRef<Path>, setting: FileSetting) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.is_empty() || header.get(0) != Some("s") || header.len() < 2 {
        if header.is_empty() {
            return Err(Error::EmptyDataset);
        }
        return Err(Error::Parse { line: 1, msg: "expected header starting with 's,t'".into() });
    }
    let q = header.len() - 1;
    if matches!(setting, FileSetting::Classification { .. }) && q != 1 {
        return Err(Error::Parse { line: 1, msg: "classification files have exactly one t column".into() });
    }
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut symbols = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let parse_err = |msg: String| Error::Parse { line, msg };
        if record.len() != q + 1 {
            return Err(parse_err(format!("expected {} fields, found {}", q + 1, record.len())));
        }
        let s_raw = record[0].trim();
        let s = s_raw
            .parse::<i64>()
            .ok()
            .and_then(Sign::from_i64)
            .ok_or_else(|| parse_err(format!("label '{s_raw}' is not -1 or +1")))?;
        labels.push(s);
        match setting {
            FileSetting::Representation => {
                for field in record.iter().skip(1) {
                    let v: f64 = field
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(format!("'{field}' is not a number")))?;
                    if !v.is_finite() {
                        return Err(parse_err(format!("'{field}' is not finite")));
                    }
                    values.push(v);
                }
            }
            FileSetting::Classification { d } => {
                let field = record[1].trim();
                let t: u32 = field
                    .parse()
                    .map_err(|_| parse_err(format!("'{field}' is not a symbol")))?;
                if t == 0 || t as usize > d {
                    return Err(parse_err(format!("symbol {t} outside 1..={d}")));
                }
                symbols.push(t);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match setting {
        FileSetting::Representation => Dataset::representation(labels, q, values),
        FileSetting::Classification { d } => Dataset::classification(labels, d, symbols),
    }
}
