//! Sample-compression generalization bounds.
//!
//! Every logarithm here is natural. `n^(d+2)` is never formed; its logarithm
//! is expanded as `(d+2)·ln n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::net_size_exponent;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("compression size {d} must be below the sample size {n}")]
    CompressionTooLarge { d: usize, n: usize },
    #[error("rescaled loss {eps_tilde} exceeds 1/2")]
    OutOfRegime { eps_tilde: f64 },
    #[error("removed-point count {k} exceeds half the sample size {n}")]
    RemovalOutOfRange { k: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    /// Lossless compression: `((d+1)·ln n + ln(1/δ)) / (n−d)`.
    SlowConsistent,
    /// Lossy compression with a Hoeffding deviation term.
    SlowLossy,
    /// The Bernstein fast-rate bound `Q(d, ε)`.
    Fast,
    /// `Q(d, k/n)` for a (k, γ)-separable sample.
    Margin,
}

impl Formula {
    pub fn name(&self) -> &'static str {
        match self {
            Formula::SlowConsistent => "slow0",
            Formula::SlowLossy => "slow",
            Formula::Fast => "fast",
            Formula::Margin => "margin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInput {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Margin; absent when infinite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl BoundInput {
    fn check(&self) -> Result<(), BoundError> {
        if self.n == 0 {
            return Err(BoundError::InvalidInput("n must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BoundError::InvalidInput(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(BoundError::InvalidInput(format!("eps must lie in [0, 1], got {}", self.eps)));
        }
        if self.d >= self.n {
            return Err(BoundError::CompressionTooLarge { d: self.d, n: self.n });
        }
        Ok(())
    }

    /// `(d+2)·ln n + ln(1/δ)`, the log of `n^(d+2)/δ`.
    fn union_log(&self, extra: usize) -> f64 {
        (self.d + extra) as f64 * (self.n as f64).ln() + (1.0 / self.delta).ln()
    }

    fn remaining(&self) -> f64 {
        (self.n - self.d) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `min(1, unclamped)`.
    pub value: f64,
    /// Sum of the components.
    pub unclamped: f64,
    /// True when the unclamped bound exceeds 1.
    pub vacuous: bool,
    pub formula: Formula,
    pub inputs: BoundInput,
    pub components: Vec<Component>,
}

impl BoundReport {
    fn from_components(formula: Formula, inputs: BoundInput, parts: &[(&str, f64)]) -> Self {
        let unclamped: f64 = parts.iter().map(|p| p.1).sum();
        BoundReport {
            value: unclamped.min(1.0),
            unclamped,
            vacuous: unclamped > 1.0,
            formula,
            inputs,
            components: parts
                .iter()
                .map(|&(name, value)| Component { name: name.into(), value })
                .collect(),
        }
    }

    /// A vacuous report (value 1) for when no formula applies.
    pub fn trivial(formula: Formula, inputs: BoundInput) -> Self {
        BoundReport {
            value: 1.0,
            unclamped: 1.0,
            vacuous: true,
            formula,
            inputs,
            components: vec![Component { name: "trivial".into(), value: 1.0 }],
        }
    }
}

/// Empirical Bernstein upper confidence limit on a binomial mean:
/// `p̂ + (2/(3n))·ln(1/δ) + sqrt(9·p̂(1−p̂)/(2n)·ln(1/δ))`.
pub fn bernstein_upper(p_hat: f64, n: usize, delta: f64) -> f64 {
    debug_assert!(n >= 1);
    let n = n as f64;
    let log = (1.0 / delta).ln();
    p_hat + 2.0 / (3.0 * n) * log + (9.0 * p_hat * (1.0 - p_hat) / (2.0 * n) * log).sqrt()
}

/// Bound for a consistent compression of size `d`:
/// `((d+1)·ln n + ln(1/δ)) / (n−d)`.
pub fn gen_slow_consistent(n: usize, d: usize, delta: f64) -> Result<BoundReport, BoundError> {
    let inputs = BoundInput { n, d, eps: 0.0, delta, k: None, gamma: None };
    inputs.check()?;
    let term = inputs.union_log(1) / inputs.remaining();
    Ok(BoundReport::from_components(Formula::SlowConsistent, inputs, &[("log term", term)]))
}

/// Bound for a compression of size `d` mislabeling an `eps` fraction:
/// `ε·n/(n−d) + sqrt(((d+2)·ln n + ln(1/δ)) / (2(n−d)))`.
pub fn gen_slow_lossy(n: usize, d: usize, eps: f64, delta: f64) -> Result<BoundReport, BoundError> {
    let inputs = BoundInput { n, d, eps, delta, k: None, gamma: None };
    inputs.check()?;
    let empirical = eps * n as f64 / inputs.remaining();
    let deviation = (inputs.union_log(2) / (2.0 * inputs.remaining())).sqrt();
    Ok(BoundReport::from_components(
        Formula::SlowLossy,
        inputs,
        &[("empirical", empirical), ("deviation", deviation)],
    ))
}

/// The fast-rate bound `Q(d, ε)`.
///
/// With `ε̃ = ε·n/(n−d)` and `L = (d+2)·ln n + ln(1/δ)`:
/// `Q = ε̃ + 2L/(3(n−d)) + sqrt(9·ε̃(1−ε̃)·L/(2(n−d)))`. Requires `ε̃ ≤ 1/2`.
pub fn q_bound(n: usize, d: usize, eps: f64, delta: f64) -> Result<BoundReport, BoundError> {
    let inputs = BoundInput { n, d, eps, delta, k: None, gamma: None };
    inputs.check()?;
    let rest = inputs.remaining();
    let eps_tilde = eps * n as f64 / rest;
    if eps_tilde > 0.5 {
        return Err(BoundError::OutOfRegime { eps_tilde });
    }
    let log = inputs.union_log(2);
    let log_term = 2.0 / (3.0 * rest) * log;
    let bernstein = (9.0 * eps_tilde * (1.0 - eps_tilde) / (2.0 * rest) * log).sqrt();
    Ok(BoundReport::from_components(
        Formula::Fast,
        inputs,
        &[("empirical", eps_tilde), ("log term", log_term), ("bernstein term", bernstein)],
    ))
}

/// Where the compression size of a margin bound comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source", content = "value")]
pub enum CompressionSize {
    /// Cardinality of the net actually extracted.
    ActualNetSize(usize),
    /// `μ^⌈log₂(2·rad/γ)⌉` from a density constant μ.
    MuFormula(usize),
}

/// `μ^⌈log₂(2·rad/γ)⌉` with a non-negative exponent, saturating at `usize::MAX`.
pub fn mu_formula_size(mu: usize, rad: f64, gamma: f64) -> usize {
    let exp = net_size_exponent(rad, gamma).max(0) as u32;
    (mu as u128)
        .checked_pow(exp)
        .and_then(|v| usize::try_from(v).ok())
        .unwrap_or(usize::MAX)
}

/// Margin bound `R(k, γ) = Q(d, k/n)` for a sample made γ-separable by
/// removing `k ≤ n/2` points.
pub fn r_bound(
    n: usize,
    k: usize,
    gamma: f64,
    rad: f64,
    d_source: CompressionSize,
    delta: f64,
) -> Result<BoundReport, BoundError> {
    if 2 * k > n {
        return Err(BoundError::RemovalOutOfRange { k, n });
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(BoundError::InvalidInput(format!("margin must be positive, got {gamma}")));
    }
    let d = match d_source {
        CompressionSize::ActualNetSize(d) => d,
        CompressionSize::MuFormula(mu) => mu_formula_size(mu, rad, gamma),
    };
    let mut report = q_bound(n, d, k as f64 / n as f64, delta)?;
    report.formula = Formula::Margin;
    report.inputs.k = Some(k);
    report.inputs.gamma = gamma.is_finite().then_some(gamma);
    Ok(report)
}
