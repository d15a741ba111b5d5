//! The finite adversary: two-layer networks
//! `h(x) = c0 + Σ_i c_i·σ(a_i·x + b_i)` with `σ(t) = (1 − e^{−t})/(1 + e^{−t})`,
//! their exact gradients, and a multi-restart search for the empirical risk
//! minimizer.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{self, streams};
use crate::synthdata::Dataset;
use crate::{Error, Loss, Result, Sign};

/// Clamp margin applied before the log loss: `ŝ = (1 + clamp(h, −1+ε, 1−ε))/2`.
pub const LOG_LOSS_EPS: f64 = 1e-6;

const LOG2_E: f64 = std::f64::consts::LOG2_E;
#[allow(clippy::excessive_precision)]
const LN2_HI: f64 = 6.931_471_803_691_238_2e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
// 1.5·2^52: adding it rounds to an integer held in the low mantissa bits.
const ROUND_SHIFT: f64 = 6_755_399_441_055_744.0;

/// `e^{−x}` for `x ≥ 0`, branch free so that loops over neurons vectorize.
#[inline(always)]
fn exp_neg(x: f64) -> f64 {
    let y = -x.min(700.0);
    let shifted = y * LOG2_E + ROUND_SHIFT;
    let n = shifted - ROUND_SHIFT;
    let n_bits = shifted.to_bits().wrapping_sub(ROUND_SHIFT.to_bits());
    let r = y - n * LN2_HI - n * LN2_LO;
    // Taylor polynomial of degree 13; |r| ≤ ln2/2 keeps the remainder below 1e-17.
    let mut p = 1.0 / 6_227_020_800.0;
    p = p * r + 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    p * f64::from_bits(n_bits.wrapping_add(1023) << 52)
}

/// The activation `σ(t) = tanh(t/2)`.
#[inline(always)]
pub fn sigma(t: f64) -> f64 {
    let e = exp_neg(t.abs());
    ((1.0 - e) / (1.0 + e)).copysign(t)
}

/// Sum of `a[i]·b[i]` with a fixed 8-lane association order.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for j in 0..8 {
            lanes[j] += x[j] * y[j];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((lanes[0] + lanes[4]) + (lanes[1] + lanes[5])) + ((lanes[2] + lanes[6]) + (lanes[3] + lanes[7])) + tail
}

/// A member of `H_k` on inputs in `ℝ^q`.
///
/// Parameters live in one flat buffer laid out as
/// `[a (k×q, neuron-major) | b (k) | c (k) | c0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerNet {
    k: usize,
    q: usize,
    params: Vec<f64>,
}

impl TwoLayerNet {
    pub fn zeros(k: usize, q: usize) -> Result<Self> {
        if k == 0 || q == 0 {
            return Err(Error::InvalidArgument("a network needs k >= 1 and q >= 1".into()));
        }
        Ok(TwoLayerNet { k, q, params: vec![0.0; k * q + 2 * k + 1] })
    }

    pub fn from_parts(a: Vec<Vec<f64>>, b: Vec<f64>, c0: f64, c: Vec<f64>) -> Result<Self> {
        let k = a.len();
        let q = a.first().map_or(0, Vec::len);
        let mut net = TwoLayerNet::zeros(k, q)?;
        if b.len() != k || c.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: if b.len() != k { b.len() } else { c.len() } });
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != q {
                return Err(Error::DimensionMismatch { expected: q, got: row.len() });
            }
            net.params[i * q..(i + 1) * q].copy_from_slice(row);
        }
        net.b_mut().copy_from_slice(&b);
        net.c_mut().copy_from_slice(&c);
        *net.c0_mut() = c0;
        if net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("network parameters must be finite".into()));
        }
        Ok(net)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn input_dim(&self) -> usize {
        self.q
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Hidden weights, neuron-major: `a()[i*q + j]` is `a_i[j]`.
    pub fn a(&self) -> &[f64] {
        &self.params[..self.k * self.q]
    }

    pub fn b(&self) -> &[f64] {
        let o = self.k * self.q;
        &self.params[o..o + self.k]
    }

    pub fn c(&self) -> &[f64] {
        let o = self.k * self.q + self.k;
        &self.params[o..o + self.k]
    }

    pub fn c0(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    pub fn a_mut(&mut self) -> &mut [f64] {
        let kq = self.k * self.q;
        &mut self.params[..kq]
    }

    pub fn b_mut(&mut self) -> &mut [f64] {
        let o = self.k * self.q;
        &mut self.params[o..o + self.k]
    }

    pub fn c_mut(&mut self) -> &mut [f64] {
        let o = self.k * self.q + self.k;
        &mut self.params[o..o + self.k]
    }

    pub fn c0_mut(&mut self) -> &mut f64 {
        let last = self.params.len() - 1;
        &mut self.params[last]
    }

    /// Writes `σ(a_i·x + b_i)` for every neuron into `out`.
    #[inline]
    fn hidden(&self, x: &[f64], out: &mut [f64]) {
        let k = self.k;
        let (a, b) = (self.a(), self.b());
        let out = &mut out[..k];
        if self.q == 1 {
            let x0 = x[0];
            for ((o, &ai), &bi) in out.iter_mut().zip(a).zip(b) {
                *o = sigma(ai * x0 + bi);
            }
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                let z = b[i] + dot(&a[i * self.q..(i + 1) * self.q], x);
                *o = sigma(z);
            }
        }
    }

    #[inline]
    fn eval_with(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        self.hidden(x, scratch);
        self.c0() + dot(self.c(), &scratch[..self.k])
    }

    pub fn forward(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.q {
            return Err(Error::DimensionMismatch { expected: self.q, got: t.len() });
        }
        let mut scratch = vec![0.0; self.k];
        Ok(self.eval_with(t, &mut scratch))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct NetDoc {
    k: usize,
    q: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c0: f64,
    c: Vec<f64>,
}

impl Serialize for TwoLayerNet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        NetDoc {
            k: self.k,
            q: self.q,
            a: self.a().chunks(self.q).map(<[f64]>::to_vec).collect(),
            b: self.b().to_vec(),
            c0: self.c0(),
            c: self.c().to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TwoLayerNet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = NetDoc::deserialize(deserializer)?;
        if doc.a.len() != doc.k || doc.a.iter().any(|row| row.len() != doc.q) {
            return Err(serde::de::Error::custom("shape of 'a' does not match k and q"));
        }
        TwoLayerNet::from_parts(doc.a, doc.b, doc.c0, doc.c).map_err(serde::de::Error::custom)
    }
}

/// Per-sample loss of prediction `h` against label `s ∈ {−1, +1}`.
#[inline]
pub fn sample_loss(h: f64, s: f64, loss: Loss) -> f64 {
    match loss {
        Loss::Squared => (h - s) * (h - s),
        Loss::Log => {
            let p = 0.5 * (1.0 + h.clamp(-1.0 + LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS));
            if s > 0.0 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        }
    }
}

/// Derivative of [`sample_loss`] with respect to `h`.
#[inline]
fn sample_loss_grad(h: f64, s: f64, loss: Loss) -> f64 {
    match loss {
        Loss::Squared => 2.0 * (h - s),
        Loss::Log => {
            if h <= -1.0 + LOG_LOSS_EPS || h >= 1.0 - LOG_LOSS_EPS {
                return 0.0;
            }
            let p = 0.5 * (1.0 + h);
            if s > 0.0 {
                -0.5 / p
            } else {
                0.5 / (1.0 - p)
            }
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const EVAL_CHUNK: usize = 4096;

/// Mean loss of `net` over a representation dataset.
pub fn empirical_loss(net: &TwoLayerNet, ds: &Dataset, loss: Loss) -> Result<f64> {
    let (q, values) = ds.representation_values()?;
    if q != net.q {
        return Err(Error::DimensionMismatch { expected: net.q, got: q });
    }
    let labels = ds.labels();
    let partials: Vec<CompensatedSum> = labels
        .par_chunks(EVAL_CHUNK)
        .zip(values.par_chunks(EVAL_CHUNK * q))
        .map(|(ls, xs)| {
            let mut scratch = vec![0.0; net.k];
            let mut acc = CompensatedSum::default();
            for (s, x) in ls.iter().zip(xs.chunks_exact(q)) {
                acc.add(sample_loss(net.eval_with(x, &mut scratch), s.value(), loss));
            }
            acc
        })
        .collect();
    let mut total = CompensatedSum::default();
    for p in &partials {
        total.add(p.sum);
        total.add(p.comp);
    }
    Ok(total.value() / labels.len() as f64)
}

/// Adds the gradient of `scale · Σ_{i∈batch} loss(h(x_i), s_i)` into `grad`
/// (same layout as the network parameters).
fn accumulate_gradient(
    net: &TwoLayerNet,
    values: &[f64],
    labels: &[f64],
    batch: &[usize],
    loss: Loss,
    scale: f64,
    grad: &mut [f64],
    scratch: &mut [f64],
) {
    let (k, q) = (net.k, net.q);
    let c = net.c();
    let (ga, rest) = grad.split_at_mut(k * q);
    let (gb, rest) = rest.split_at_mut(k);
    let (gc, gc0) = rest.split_at_mut(k);
    let act = &mut scratch[..k];
    for &idx in batch {
        let x = &values[idx * q..(idx + 1) * q];
        let h = net.eval_with(x, act);
        let g = scale * sample_loss_grad(h, labels[idx], loss);
        gc0[0] += g;
        if q == 1 {
            let x0 = x[0];
            for i in 0..k {
                let s = act[i];
                let d = g * c[i] * 0.5 * (1.0 - s * s);
                gc[i] += g * s;
                gb[i] += d;
                ga[i] += d * x0;
            }
        } else {
            for i in 0..k {
                let s = act[i];
                let d = g * c[i] * 0.5 * (1.0 - s * s);
                gc[i] += g * s;
                gb[i] += d;
                for (gaj, xj) in ga[i * q..(i + 1) * q].iter_mut().zip(x) {
                    *gaj += d * xj;
                }
            }
        }
    }
}

/// Exact gradient of the batch-mean loss, returned in network shape.
pub fn gradient(net: &TwoLayerNet, ds: &Dataset, batch: &[usize], loss: Loss) -> Result<TwoLayerNet> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("gradient needs a non-empty batch".into()));
    }
    let (q, values) = ds.representation_values()?;
    if q != net.q {
        return Err(Error::DimensionMismatch { expected: net.q, got: q });
    }
    if let Some(&bad) = batch.iter().find(|&&i| i >= ds.len()) {
        return Err(Error::InvalidArgument(format!("batch index {bad} out of range")));
    }
    let labels: Vec<f64> = ds.labels().iter().map(|s| s.value()).collect();
    let mut out = TwoLayerNet::zeros(net.k, net.q)?;
    let mut scratch = vec![0.0; net.k];
    accumulate_gradient(
        net,
        values,
        &labels,
        batch,
        loss,
        1.0 / batch.len() as f64,
        &mut out.params,
        &mut scratch,
    );
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::Adam),
            other => Err(Error::InvalidArgument(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// Training protocol for the ERM search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub restarts: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub learn_rate: f64,
    pub adam_betas: (f64, f64),
    /// Standard deviation of the initial output weights `c_i`; `None` means
    /// `0.5/√k`. Hidden weights and biases start as `N(0, 1)`.
    pub init_scale: Option<f64>,
    pub seed: u64,
    pub loss: Loss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            restarts: 10,
            epochs: 30,
            batch_size: 256,
            optimizer: Optimizer::Adam,
            learn_rate: 1e-3,
            adam_betas: (0.9, 0.999),
            init_scale: None,
            seed: 0,
            loss: Loss::Squared,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.restarts == 0 || self.epochs == 0 || self.batch_size == 0 {
            return bad("restarts, epochs and batch_size must be positive");
        }
        if !(self.learn_rate > 0.0 && self.learn_rate.is_finite()) {
            return bad("learn_rate must be positive");
        }
        let (b1, b2) = self.adam_betas;
        if !(b1 > 0.0 && b1 < 1.0 && b2 > 0.0 && b2 < 1.0) {
            return bad("adam betas must lie in (0, 1)");
        }
        if let Some(s) = self.init_scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad("init_scale must be positive");
            }
        }
        Ok(())
    }

    pub fn output_init_scale(&self, k: usize) -> f64 {
        self.init_scale.unwrap_or(0.5 / (k as f64).sqrt())
    }
}

/// Outcome of the multi-restart search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmResult {
    pub best_net: TwoLayerNet,
    pub best_empirical_loss: f64,
    /// Best full-sample loss of each restart; `None` for diverged restarts.
    pub per_restart_losses: Vec<Option<f64>>,
    pub best_restart_index: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

const ADAM_EPS: f64 = 1e-8;

fn init_net<R: Rng>(k: usize, q: usize, out_scale: f64, rng: &mut R) -> TwoLayerNet {
    let mut net = TwoLayerNet::zeros(k, q).expect("validated shape");
    for v in net.a_mut() {
        *v = rng.sample(StandardNormal);
    }
    for v in net.b_mut() {
        *v = rng.sample(StandardNormal);
    }
    for v in net.c_mut() {
        *v = out_scale * rng.sample::<f64, _>(StandardNormal);
    }
    net
}

fn run_restart(ds: &Dataset, values: &[f64], labels: &[f64], k: usize, q: usize, cfg: &TrainConfig, index: usize) -> Option<(f64, TwoLayerNet)> {
    let mut rng = rng::stream(cfg.seed, streams::RESTART_BASE + index as u64);
    let mut net = init_net(k, q, cfg.output_init_scale(k), &mut rng);
    let n_params = net.num_params();
    let mut grad = vec![0.0; n_params];
    let mut scratch = vec![0.0; k];
    let mut adam = Adam { m: vec![0.0; n_params], v: vec![0.0; n_params], step: 0 };
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut best: Option<(f64, TwoLayerNet)> = None;
    let (b1, b2) = cfg.adam_betas;

    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            accumulate_gradient(&net, values, labels, batch, cfg.loss, scale, &mut grad, &mut scratch);
            match cfg.optimizer {
                Optimizer::Sgd => {
                    for (p, g) in net.params.iter_mut().zip(&grad) {
                        *p -= cfg.learn_rate * g;
                    }
                }
                Optimizer::Adam => {
                    adam.step += 1;
                    let c1 = 1.0 - b1.powi(adam.step);
                    let c2 = 1.0 - b2.powi(adam.step);
                    let lr = cfg.learn_rate;
                    for (((p, g), m), v) in net.params.iter_mut().zip(&grad).zip(&mut adam.m).zip(&mut adam.v) {
                        *m = b1 * *m + (1.0 - b1) * g;
                        *v = b2 * *v + (1.0 - b2) * g * g;
                        *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        let loss = empirical_loss(&net, ds, cfg.loss).ok()?;
        if !loss.is_finite() || net.params.iter().any(|p| !p.is_finite()) {
            return None;
        }
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, net.clone()));
        }
    }
    best
}

/// Approximates `inf_{h ∈ H_k} L_{S_n}(h)` by training `cfg.restarts`
/// independently initialized networks and keeping the best per-epoch
/// snapshot. Deterministic in `cfg.seed` regardless of thread scheduling.
pub fn train_erm(ds: &Dataset, k: usize, cfg: &TrainConfig) -> Result<ErmResult> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let (q, values) = ds.representation_values()?;
    if k >= 2 * ds.len() {
        log::warn!(
            "k = {k} >= 2n = {}: the network can memorize the sample and the certificate is vacuous",
            2 * ds.len()
        );
    }
    let labels: Vec<f64> = ds.labels().iter().map(|s| s.value()).collect();
    let outcomes: Vec<Option<(f64, TwoLayerNet)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| run_restart(ds, values, &labels, k, q, cfg, i))
        .collect();

    let per_restart_losses: Vec<Option<f64>> = outcomes.iter().map(|o| o.as_ref().map(|(l, _)| *l)).collect();
    let mut best_index: Option<usize> = None;
    for (i, l) in per_restart_losses.iter().enumerate() {
        if let Some(l) = l {
            if best_index.is_none_or(|b| *l < per_restart_losses[b].expect("survivor")) {
                best_index = Some(i);
            }
        }
    }
    let best_restart_index = best_index.ok_or(Error::AllRestartsDiverged(cfg.restarts))?;
    let (best_empirical_loss, best_net) = outcomes
        .into_iter()
        .nth(best_restart_index)
        .flatten()
        .expect("best restart survived");
    Ok(ErmResult { best_net, best_empirical_loss, per_restart_losses, best_restart_index })
}

/// Network with the training initialization, drawn from its own stream.
pub fn random_net(k: usize, q: usize, out_scale: f64, seed: u64) -> Result<TwoLayerNet> {
    TwoLayerNet::zeros(k, q)?;
    if !(out_scale > 0.0 && out_scale.is_finite()) {
        return Err(Error::InvalidArgument("out_scale must be positive".into()));
    }
    Ok(init_net(k, q, out_scale, &mut rng::stream(seed, 0)))
}

fn batch_loss(net: &TwoLayerNet, values: &[f64], labels: &[Sign], batch: &[usize], loss: Loss) -> f64 {
    let q = net.q;
    let mut scratch = vec![0.0; net.k];
    batch
        .iter()
        .map(|&i| sample_loss(net.eval_with(&values[i * q..(i + 1) * q], &mut scratch), labels[i].value(), loss))
        .sum::<f64>()
        / batch.len() as f64
}

/// Largest relative disagreement between [`gradient`] and central
/// differences with step `step`, over every parameter. Relative error is
/// `|g − fd| / max(|g|, |fd|, 1e-3)`.
pub fn gradient_check(net: &TwoLayerNet, ds: &Dataset, batch: &[usize], loss: Loss, step: f64) -> Result<f64> {
    let analytic = gradient(net, ds, batch, loss)?;
    let (_, values) = ds.representation_values()?;
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for j in 0..net.num_params() {
        let orig = probe.params[j];
        probe.params[j] = orig + step;
        let up = batch_loss(&probe, values, ds.labels(), batch, loss);
        probe.params[j] = orig - step;
        let down = batch_loss(&probe, values, ds.labels(), batch, loss);
        probe.params[j] = orig;
        let fd = (up - down) / (2.0 * step);
        let an = analytic.params[j];
        worst = worst.max((an - fd).abs() / an.abs().max(fd.abs()).max(1e-3));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::{sample_dataset, Scenario};
    use crate::Sign;
    use approx::assert_abs_diff_eq;

    fn tiny_dataset() -> Dataset {
        Dataset::representation(vec![Sign::Plus, Sign::Minus, Sign::Plus], 1, vec![0.5, -1.0, 2.0]).unwrap()
    }

    #[test]
    fn sigma_matches_tanh_half() {
        for i in -4000..=4000 {
            let t = i as f64 * 0.01;
            assert_abs_diff_eq!(sigma(t), (0.5 * t).tanh(), epsilon = 5e-16);
        }
        for &t in &[1e-300, -1e-12, 50.0, -800.0, 1e6] {
            assert_abs_diff_eq!(sigma(t), (0.5 * t).tanh(), epsilon = 5e-16);
        }
        assert_eq!(sigma(0.0), 0.0);
    }

    #[test]
    fn forward_examples() {
        let zero = TwoLayerNet::zeros(5, 2).unwrap();
        assert_eq!(zero.forward(&[0.3, -7.0]).unwrap(), 0.0);
        let net = TwoLayerNet::from_parts(vec![vec![2.0]], vec![0.0], 0.0, vec![1.0]).unwrap();
        assert_eq!(net.forward(&[0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(net.forward(&[1.0]).unwrap(), 0.761_594_155_955_764_9, epsilon = 1e-15);
        assert!(matches!(net.forward(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn empirical_loss_examples() {
        let ds = tiny_dataset();
        let zero = TwoLayerNet::zeros(3, 1).unwrap();
        assert_eq!(empirical_loss(&zero, &ds, Loss::Squared).unwrap(), 1.0);

        // Hand evaluation with h(t) = 0.1 + 0.8·tanh((1.5t − 0.2)/2).
        let net = TwoLayerNet::from_parts(vec![vec![1.5]], vec![-0.2], 0.1, vec![0.8]).unwrap();
        let h = |t: f64| 0.1 + 0.8 * ((1.5 * t - 0.2) / 2.0).tanh();
        let by_hand = ((h(0.5) - 1.0).powi(2) + (h(-1.0) + 1.0).powi(2) + (h(2.0) - 1.0).powi(2)) / 3.0;
        assert_abs_diff_eq!(empirical_loss(&net, &ds, Loss::Squared).unwrap(), by_hand, epsilon = 1e-15);
        // 40-digit mpmath: 0.268624334969311
        assert_abs_diff_eq!(by_hand, 0.268_624_334_969_311, epsilon = 1e-12);

        let p = |t: f64| 0.5 * (1.0 + h(t));
        let log_hand = (-(p(0.5)).ln() - (1.0 - p(-1.0)).ln() - p(2.0).ln()) / 3.0;
        assert_abs_diff_eq!(empirical_loss(&net, &ds, Loss::Log).unwrap(), log_hand, epsilon = 1e-15);
    }

    #[test]
    fn perfect_memorizer_has_zero_loss() {
        // Steep single neuron separating t < 0 from t > 0.
        let ds = Dataset::representation(vec![Sign::Plus, Sign::Minus], 1, vec![1.0, -1.0]).unwrap();
        let net = TwoLayerNet::from_parts(vec![vec![200.0]], vec![0.0], 0.0, vec![1.0]).unwrap();
        assert!(empirical_loss(&net, &ds, Loss::Squared).unwrap() < 1e-80);
    }

    fn finite_difference(net: &TwoLayerNet, ds: &Dataset, batch: &[usize], loss: Loss, j: usize) -> f64 {
        let batch_loss = |n: &TwoLayerNet| {
            let (q, v) = ds.representation_values().unwrap();
            batch
                .iter()
                .map(|&i| sample_loss(n.forward(&v[i * q..(i + 1) * q]).unwrap(), ds.labels()[i].value(), loss))
                .sum::<f64>()
                / batch.len() as f64
        };
        let h = 1e-6;
        let mut plus = net.clone();
        plus.params_mut()[j] += h;
        let mut minus = net.clone();
        minus.params_mut()[j] -= h;
        (batch_loss(&plus) - batch_loss(&minus)) / (2.0 * h)
    }

    #[test]
    fn gradient_of_zero_net() {
        let ds = Dataset::representation(vec![Sign::Plus], 1, vec![0.0]).unwrap();
        let net = TwoLayerNet::zeros(2, 1).unwrap();
        let g = gradient(&net, &ds, &[0], Loss::Squared).unwrap();
        assert_eq!(g.c0(), -2.0);
        assert_abs_diff_eq!(finite_difference(&net, &ds, &[0], Loss::Squared, net.num_params() - 1), -2.0, epsilon = 1e-8);
        assert!(g.a().iter().chain(g.b()).all(|&v| v == 0.0));
    }

    #[test]
    fn zero_output_weights_freeze_hidden_gradient() {
        let mut net = TwoLayerNet::zeros(4, 1).unwrap();
        net.a_mut().copy_from_slice(&[0.3, -1.0, 2.0, 0.1]);
        net.b_mut().copy_from_slice(&[0.0, 0.5, -0.5, 1.0]);
        let g = gradient(&net, &tiny_dataset(), &[0, 1, 2], Loss::Squared).unwrap();
        assert!(g.a().iter().chain(g.b()).all(|&v| v == 0.0));
        assert!(gradient(&net, &tiny_dataset(), &[], Loss::Squared).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng::stream(42, 0);
        for &(q, loss) in &[(1, Loss::Squared), (3, Loss::Squared), (1, Loss::Log), (2, Loss::Log)] {
            let k = 4;
            let mut net = init_net(k, q, 0.3, &mut rng);
            *net.c0_mut() = 0.05;
            let n = 6;
            let labels: Vec<Sign> = (0..n).map(|i| if i % 2 == 0 { Sign::Plus } else { Sign::Minus }).collect();
            let values: Vec<f64> = (0..n * q).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let ds = Dataset::representation(labels, q, values).unwrap();
            let batch = [0, 2, 3, 5];
            let g = gradient(&net, &ds, &batch, loss).unwrap();
            for j in 0..net.num_params() {
                let fd = finite_difference(&net, &ds, &batch, loss, j);
                let an = g.params()[j];
                let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-3);
                assert!(rel < 1e-5, "param {j}: analytic {an} vs fd {fd}");
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_outputs() {
        let mut rng = rng::stream(3, 0);
        let net = init_net(16, 2, 0.7, &mut rng);
        let text = serde_json::to_string(&net).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["k"], 16);
        assert_eq!(doc["q"], 2);
        assert_eq!(doc["a"].as_array().unwrap().len(), 16);
        let back: TwoLayerNet = serde_json::from_str(&text).unwrap();
        for x in [[0.1, 0.2], [-3.0, 1.0], [2.5, -0.7]] {
            let (a, b) = (net.forward(&x).unwrap(), back.forward(&x).unwrap());
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
        }
        assert!(serde_json::from_str::<TwoLayerNet>(r#"{"k":2,"q":1,"a":[[1.0]],"b":[0,0],"c0":0,"c":[0,0]}"#).is_err());
    }

    fn small_cfg(restarts: usize) -> TrainConfig {
        TrainConfig { restarts, epochs: 5, batch_size: 64, seed: 9, ..TrainConfig::default() }
    }

    #[test]
    fn erm_result_is_consistent() {
        let ds = sample_dataset(&Scenario::with_mu(0.5, 3.0, 1).unwrap(), 2000).unwrap();
        let res = train_erm(&ds, 8, &small_cfg(3)).unwrap();
        let min = res.per_restart_losses.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(res.best_empirical_loss, min);
        assert_eq!(res.per_restart_losses[res.best_restart_index], Some(min));
        assert_eq!(empirical_loss(&res.best_net, &ds, Loss::Squared).unwrap(), res.best_empirical_loss);
        assert_eq!(res.best_net.k(), 8);

        let single = train_erm(&ds, 8, &small_cfg(1)).unwrap();
        assert_eq!(single.per_restart_losses[0], res.per_restart_losses[0]);
        assert!(single.best_empirical_loss >= res.best_empirical_loss);
    }

    #[test]
    fn erm_is_deterministic_across_thread_counts() {
        let ds = sample_dataset(&Scenario::with_mu(0.3, 3.0, 2).unwrap(), 1000).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| train_erm(&ds, 6, &small_cfg(4)).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn sgd_and_log_loss_train() {
        let ds = sample_dataset(&Scenario::with_mu(0.8, 3.0, 4).unwrap(), 2000).unwrap();
        let sgd = TrainConfig { optimizer: Optimizer::Sgd, learn_rate: 0.05, ..small_cfg(1) };
        let res = train_erm(&ds, 8, &sgd).unwrap();
        assert!(res.best_empirical_loss < 1.0);
        let log = TrainConfig { loss: Loss::Log, learn_rate: 0.01, ..small_cfg(1) };
        let res = train_erm(&ds, 8, &log).unwrap();
        assert!(res.best_empirical_loss < 2f64.ln());
    }

    #[test]
    fn divergent_training_is_reported() {
        let ds = sample_dataset(&Scenario::with_mu(0.5, 3.0, 4).unwrap(), 500).unwrap();
        let wild = TrainConfig { optimizer: Optimizer::Sgd, learn_rate: 1e200, ..small_cfg(2) };
        assert!(matches!(train_erm(&ds, 4, &wild), Err(Error::AllRestartsDiverged(2))));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig { restarts: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { adam_betas: (0.9, 1.0), ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { learn_rate: -1.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { init_scale: Some(0.0), ..TrainConfig::default() }.validate().is_err());
        assert_abs_diff_eq!(TrainConfig::default().output_init_scale(1000), 0.5 / 1000f64.sqrt());
    }
}
