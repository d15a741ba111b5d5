//! Certified lower bounds on the loss of *any* adversary trying to recover a
//! binary sensitive variable `S` from a released quantity `T`.
//!
//! A finite adversary (a two-layer network with `k` hidden units trained on
//! `n` samples) is fit to the audit sample. Its minimal empirical loss, minus
//! a generalization/approximation slack `ε(δ, n, k, C_η, Dia(K))`, lower-bounds
//! the minimal true loss over every measurable predictor with probability at
//! least `1 − δ`. For symbolic `T ∈ [d]` the optimal adversary is available in
//! closed form and the slack depends only on `δ`, `n` and `d`.
//!
//! Modules:
//! - [`analytic`]: special functions, quadrature and every bound formula.
//! - [`synthdata`]: seeded scenario generators and dataset I/O.
//! - [`adversary`]: the two-layer network, backprop and multi-restart ERM.
//! - [`finitealpha`]: histograms, plug-in entropy and exact finite-alphabet minimizers.
//! - [`audit`]: turns all of the above into an [`audit::AuditReport`].
//! - [`harness`]: experiment sweeps, CSV/JSON/SVG output and the self-test suite.

pub mod adversary;
pub mod analytic;
pub mod audit;
pub mod error;
pub mod finitealpha;
pub mod harness;
pub mod rng;
pub mod synthdata;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Loss functions an adversary can be scored with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// `(ŝ − s)²`
    Squared,
    /// `−(1+s)/2·log ŝ − (1−s)/2·log(1−ŝ)` with `ŝ ∈ (0,1)`.
    Log,
}

impl std::str::FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" | "sq" | "l2" => Ok(Loss::Squared),
            "log" => Ok(Loss::Log),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss '{other}' (expected 'squared' or 'log')"
            ))),
        }
    }
}

impl std::fmt::Display for Loss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Loss::Squared => "squared",
            Loss::Log => "log",
        })
    }
}

/// A binary sensitive label in `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    /// Row index used by 2×d tables: 0 for −1, 1 for +1.
    pub fn index(self) -> usize {
        match self {
            Sign::Minus => 0,
            Sign::Plus => 1,
        }
    }

    pub fn from_i64(v: i64) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Minus),
            1 => Some(Sign::Plus),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }
}
