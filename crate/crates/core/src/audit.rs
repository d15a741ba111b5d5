//! Turns an adversary's minimal empirical loss into a certified lower bound
//! on the minimal true loss, plus a verdict.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::{train_erm, TrainConfig};
use crate::analytic::{
    barron_constant_tanh, classification_log_bound, classification_sq_bound, minimal_true_loss,
    representation_terms, BoundIngredients, QuadratureSpec,
};
use crate::finitealpha::{histogram, min_empirical_loss_classification};
use crate::synthdata::{sample_dataset, Dataset, Scenario, Setting};
use crate::{Error, Loss, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    LeakagePossible,
    LeakageBounded,
}

impl Verdict {
    /// Process exit status: 0 bounded, 2 leakage possible.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::LeakageBounded => 0,
            Verdict::LeakagePossible => 2,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::LeakagePossible => "leakage-possible",
            Verdict::LeakageBounded => "leakage-bounded",
        })
    }
}

/// Minimum certified lower bound regarded as safe. This is a user policy,
/// not a consequence of any bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictPolicy {
    pub threshold: f64,
}

impl VerdictPolicy {
    pub fn new(threshold: f64, loss: Loss) -> Result<Self> {
        let max = Self::max_loss(loss);
        if !(0.0..=max).contains(&threshold) {
            return Err(Error::InvalidArgument(format!(
                "{loss} threshold must lie in [0, {max}], got {threshold}"
            )));
        }
        Ok(VerdictPolicy { threshold })
    }

    /// 0.95 of the trivial loss: 1 for squared, ln 2 for log.
    pub fn default_for(loss: Loss) -> Self {
        VerdictPolicy { threshold: 0.95 * Self::max_loss(loss) }
    }

    fn max_loss(loss: Loss) -> f64 {
        match loss {
            Loss::Squared => 1.0,
            Loss::Log => std::f64::consts::LN_2,
        }
    }

    pub fn verdict(&self, certified_lower_bound: f64) -> Verdict {
        if certified_lower_bound >= self.threshold {
            Verdict::LeakageBounded
        } else {
            Verdict::LeakagePossible
        }
    }
}

/// Where a bound constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantSource {
    Derived,
    UserAsserted,
}

/// Named pieces of ε. Representation audits fill the first three,
/// classification audits fill `classification`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpsilonTerms {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generalization: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inverse_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inverse_sqrt_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classification: Option<f64>,
}

impl EpsilonTerms {
    /// Sum in declaration order.
    pub fn total(&self) -> f64 {
        [self.generalization, self.inverse_k, self.inverse_sqrt_k, self.classification]
            .into_iter()
            .flatten()
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRecord {
    pub threshold: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub setting: Setting,
    pub loss: Loss,
    pub delta: f64,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c_eta_source: Option<ConstantSource>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diam: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diam_source: Option<ConstantSource>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<u64>,
    pub empirical_loss: f64,
    pub epsilon_terms: EpsilonTerms,
    pub epsilon: f64,
    pub certified_lower_bound: f64,
    /// True when `empirical_loss − epsilon` was negative and got clamped to 0.
    pub floored: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_true_loss: Option<f64>,
    pub verdict: Verdict,
    pub policy: PolicyRecord,
    pub caveats: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

impl AuditReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Certificate {
    epsilon: f64,
    lower_bound: f64,
    floored: bool,
}

fn certificate(empirical_loss: f64, terms: &EpsilonTerms) -> Certificate {
    let epsilon = terms.total();
    let raw = empirical_loss - epsilon;
    Certificate { epsilon, lower_bound: raw.max(0.0), floored: raw < 0.0 }
}

fn policy_record(policy: &VerdictPolicy) -> PolicyRecord {
    PolicyRecord {
        threshold: policy.threshold,
        note: "verdict threshold is a user policy, not part of the bound".into(),
    }
}

/// Representation setting with the squared loss: trains the adversary,
/// subtracts the representation bound, floors at 0. `c_eta` and `diam`
/// are recorded as user-asserted.
pub fn certify_representation(
    ds: &Dataset,
    k: usize,
    cfg: &TrainConfig,
    c_eta: f64,
    diam: f64,
    delta: f64,
    policy: &VerdictPolicy,
) -> Result<AuditReport> {
    if cfg.loss != Loss::Squared {
        return Err(Error::Unsupported(
            "representation certificates exist only for the squared loss".into(),
        ));
    }
    let (q, _) = ds.representation_values()?;
    let ingredients = BoundIngredients::new(delta, ds.len() as u64, k as u64, c_eta, diam)?;
    let erm = train_erm(ds, k, cfg)?;
    let t = representation_terms(&ingredients);
    let terms = EpsilonTerms {
        generalization: Some(t.generalization),
        inverse_k: Some(t.inverse_k),
        inverse_sqrt_k: Some(t.inverse_sqrt_k),
        classification: None,
    };
    let cert = certificate(erm.best_empirical_loss, &terms);

    let mut metadata = ds.metadata.clone();
    metadata.insert("train_config".into(), serde_json::to_string(cfg)?);
    metadata.insert("train_seed".into(), cfg.seed.to_string());
    metadata.insert("best_restart_index".into(), erm.best_restart_index.to_string());
    metadata.insert("input_dim".into(), q.to_string());

    Ok(AuditReport {
        setting: Setting::Representation,
        loss: Loss::Squared,
        delta,
        n: ds.len() as u64,
        k: Some(k as u64),
        c_eta: Some(c_eta),
        c_eta_source: Some(ConstantSource::UserAsserted),
        diam: Some(diam),
        diam_source: Some(ConstantSource::UserAsserted),
        d: None,
        empirical_loss: erm.best_empirical_loss,
        epsilon_terms: terms,
        epsilon: cert.epsilon,
        certified_lower_bound: cert.lower_bound,
        floored: cert.floored,
        reference_true_loss: None,
        verdict: policy.verdict(cert.lower_bound),
        policy: policy_record(policy),
        caveats: vec![
            "the bound assumes both conditional densities share a compact support of the stated diameter \
             and have a smooth ratio with Barron constant c_eta; these are not checked"
                .into(),
            "empirical_loss comes from gradient training and may exceed the true minimal empirical loss, \
             which would make the certificate optimistic"
                .into(),
        ],
        metadata,
    })
}

/// Synthetic mixture audit: samples `n` points, fills `C_η = |μ|` and
/// `diam = 2r` as derived constants, and attaches the exact minimal loss.
pub fn certify_synthetic(
    scn: &Scenario,
    n: usize,
    k: usize,
    cfg: &TrainConfig,
    delta: f64,
    policy: &VerdictPolicy,
    spec: &QuadratureSpec,
) -> Result<AuditReport> {
    let ds = sample_dataset(scn, n)?;
    let mixture = scn.mixture();
    let mut report =
        certify_representation(&ds, k, cfg, barron_constant_tanh(mixture.mu), mixture.diameter(), delta, policy)?;
    report.c_eta_source = Some(ConstantSource::Derived);
    report.diam_source = Some(ConstantSource::Derived);
    report.reference_true_loss = Some(reference_truth(scn, spec)?);
    report.caveats.remove(0);
    Ok(report)
}

/// Classification setting: exact empirical minimizer plus the squared-loss
/// or log-loss concentration term.
pub fn certify_classification(ds: &Dataset, d: usize, delta: f64, loss: Loss, policy: &VerdictPolicy) -> Result<AuditReport> {
    let (data_d, _) = ds.classification_symbols()?;
    if data_d != d {
        return Err(Error::DimensionMismatch { expected: d, got: data_d });
    }
    let hist = histogram(ds)?;
    let n = hist.n();
    let eps = match loss {
        Loss::Squared => classification_sq_bound(delta, n)?,
        Loss::Log => classification_log_bound(delta, n, d as u64)?,
    };
    let (empirical_loss, _) = min_empirical_loss_classification(&hist, loss);
    let terms = EpsilonTerms { classification: Some(eps), ..Default::default() };
    let cert = certificate(empirical_loss, &terms);
    Ok(AuditReport {
        setting: Setting::Classification,
        loss,
        delta,
        n,
        k: None,
        c_eta: None,
        c_eta_source: None,
        diam: None,
        diam_source: None,
        d: Some(d as u64),
        empirical_loss,
        epsilon_terms: terms,
        epsilon: cert.epsilon,
        certified_lower_bound: cert.lower_bound,
        floored: cert.floored,
        reference_true_loss: None,
        verdict: policy.verdict(cert.lower_bound),
        policy: policy_record(policy),
        caveats: vec![],
        metadata: ds.metadata.clone(),
    })
}

/// Exact minimal squared loss of the mixture scenario.
pub fn reference_truth(scn: &Scenario, spec: &QuadratureSpec) -> Result<f64> {
    minimal_true_loss(&scn.mixture(), spec)
}
