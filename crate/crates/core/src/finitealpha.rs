//! Finite-alphabet (`T ∈ [d]`) machinery. Here every `h: [d] → [−1, 1]` is a
//! vector, so the empirical minimizer is exact and needs no training.

use serde::{Deserialize, Serialize};

use crate::synthdata::Dataset;
use crate::{Error, Loss, Result, Sign};

/// Counts over `{−1, +1} × [d]`. Row 0 is `s = −1`, row 1 is `s = +1`;
/// column `j` is symbol `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HistogramDoc", into = "HistogramDoc")]
pub struct JointHistogram {
    d: usize,
    counts: [Vec<u64>; 2],
    n: u64,
}

#[derive(Serialize, Deserialize)]
struct HistogramDoc {
    d: usize,
    counts: Vec<Vec<u64>>,
}

impl TryFrom<HistogramDoc> for JointHistogram {
    type Error = Error;

    fn try_from(doc: HistogramDoc) -> Result<Self> {
        let [minus, plus]: [Vec<u64>; 2] = doc
            .counts
            .try_into()
            .map_err(|_| Error::InvalidArgument("histogram needs exactly two rows".into()))?;
        JointHistogram::from_counts(doc.d, minus, plus)
    }
}

impl From<JointHistogram> for HistogramDoc {
    fn from(h: JointHistogram) -> Self {
        let [minus, plus] = h.counts;
        HistogramDoc { d: h.d, counts: vec![minus, plus] }
    }
}

impl JointHistogram {
    pub fn from_counts(d: usize, minus: Vec<u64>, plus: Vec<u64>) -> Result<Self> {
        if d == 0 || minus.len() != d || plus.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: minus.len().min(plus.len()) });
        }
        let n = minus.iter().chain(&plus).sum();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(JointHistogram { d, counts: [minus, plus], n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Count of `(s, t)` with `t` in `1..=d`.
    pub fn count(&self, s: Sign, t: usize) -> u64 {
        self.counts[s.index()][t - 1]
    }

    fn column(&self, j: usize) -> (u64, u64) {
        (self.counts[0][j], self.counts[1][j])
    }

    pub fn to_pmf(&self) -> JointPMF {
        let n = self.n as f64;
        let row = |r: &Vec<u64>| r.iter().map(|&c| c as f64 / n).collect();
        JointPMF { d: self.d, probs: [row(&self.counts[0]), row(&self.counts[1])] }
    }
}

/// Exact counts of a classification dataset.
pub fn histogram(ds: &Dataset) -> Result<JointHistogram> {
    let (d, symbols) = ds.classification_symbols()?;
    let mut minus = vec![0; d];
    let mut plus = vec![0; d];
    for (s, &t) in ds.labels().iter().zip(symbols) {
        if t == 0 || t as usize > d {
            return Err(Error::InvalidArgument(format!("symbol {t} outside 1..={d}")));
        }
        match s {
            Sign::Minus => minus[t as usize - 1] += 1,
            Sign::Plus => plus[t as usize - 1] += 1,
        }
    }
    JointHistogram::from_counts(d, minus, plus)
}

/// A probability table over `{−1, +1} × [d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPMF {
    d: usize,
    probs: [Vec<f64>; 2],
}

impl JointPMF {
    pub fn new(minus: Vec<f64>, plus: Vec<f64>) -> Result<Self> {
        let d = minus.len();
        if d == 0 || plus.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: plus.len() });
        }
        if minus.iter().chain(&plus).any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = minus.iter().chain(&plus).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(JointPMF { d, probs: [minus, plus] })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn prob(&self, s: Sign, t: usize) -> f64 {
        self.probs[s.index()][t - 1]
    }

    fn cells(&self) -> impl Iterator<Item = f64> + '_ {
        self.probs[0].iter().chain(&self.probs[1]).copied()
    }
}

impl From<&JointHistogram> for JointPMF {
    fn from(h: &JointHistogram) -> Self {
        h.to_pmf()
    }
}

/// `−Σ_{s,t} P(s,t)·log(P(s,t)/P(t))` in nats for one symbol column.
fn column_entropy(p_minus: f64, p_plus: f64) -> f64 {
    let marginal = p_minus + p_plus;
    let term = |p: f64| if p > 0.0 { -p * (p / marginal).ln() } else { 0.0 };
    term(p_minus) + term(p_plus)
}

/// Conditional entropy `H(S | T)` of a joint table.
pub fn conditional_entropy(pmf: &JointPMF) -> f64 {
    (0..pmf.d).map(|j| column_entropy(pmf.probs[0][j], pmf.probs[1][j])).sum()
}

/// Plug-in estimate of `H(S | T)` from counts.
pub fn plugin_conditional_entropy(h: &JointHistogram) -> f64 {
    let n = h.n as f64;
    (0..h.d)
        .map(|j| {
            let (cm, cp) = h.column(j);
            column_entropy(cm as f64 / n, cp as f64 / n)
        })
        .sum()
}

/// `½·Σ|p − q|`.
pub fn tv_distance(p: &JointPMF, q: &JointPMF) -> Result<f64> {
    if p.d != q.d {
        return Err(Error::DimensionMismatch { expected: p.d, got: q.d });
    }
    Ok(0.5 * p.cells().zip(q.cells()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Empirical loss of an explicit predictor vector `h[t−1] = h(t)`; for the
/// log loss `h` holds probabilities of `s = +1`.
pub fn classification_loss(hist: &JointHistogram, h: &[f64], loss: Loss) -> Result<f64> {
    if h.len() != hist.d {
        return Err(Error::DimensionMismatch { expected: hist.d, got: h.len() });
    }
    let n = hist.n as f64;
    let mut total = 0.0;
    for (j, &hj) in h.iter().enumerate() {
        let (cm, cp) = hist.column(j);
        let (lm, lp) = match loss {
            Loss::Squared => ((hj + 1.0).powi(2), (hj - 1.0).powi(2)),
            Loss::Log => (-(1.0 - hj).ln(), -hj.ln()),
        };
        if cm > 0 {
            total += cm as f64 * lm;
        }
        if cp > 0 {
            total += cp as f64 * lp;
        }
    }
    Ok(total / n)
}

/// Closed-form minimizer of the empirical loss over all `h: [d] → [−1, 1]`
/// (squared) or `h: [d] → [0, 1]` (log). Returns `(value, argmin)`.
///
/// Symbols never observed get the neutral prediction (0 for squared, ½ for
/// log) and contribute nothing.
pub fn min_empirical_loss_classification(hist: &JointHistogram, loss: Loss) -> (f64, Vec<f64>) {
    let n = hist.n as f64;
    let mut argmin = Vec::with_capacity(hist.d);
    let mut value = 0.0;
    for j in 0..hist.d {
        let (cm, cp) = hist.column(j);
        let m = (cm + cp) as f64;
        if cm + cp == 0 {
            argmin.push(match loss {
                Loss::Squared => 0.0,
                Loss::Log => 0.5,
            });
            continue;
        }
        let mean = (cp as f64 - cm as f64) / m;
        match loss {
            Loss::Squared => {
                argmin.push(mean);
                value += (cp as f64 * (1.0 - mean).powi(2) + cm as f64 * (1.0 + mean).powi(2)) / n;
            }
            Loss::Log => argmin.push(0.5 * (1.0 + mean)),
        }
    }
    if loss == Loss::Log {
        value = plugin_conditional_entropy(hist);
    }
    (value, argmin)
}
