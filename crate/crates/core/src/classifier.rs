//! Labeled samples, margins and the condensed 1-NN classifier.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::extract_net;
use crate::space::SemimetricMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("label count {labels} does not match matrix size {n}")]
    LabelCount { labels: usize, n: usize },
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("expected {expected} distances, got {got}")]
    DistanceCount { expected: usize, got: usize },
    #[error("no prototype distances")]
    NoPrototypes,
    #[error("model was trained on different data (digest {model} vs {sample})")]
    DigestMismatch { model: String, sample: String },
    #[error("sample has no active points")]
    EmptySample,
    #[error("invalid label {0}")]
    InvalidLabel(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.sign()
    }
}

impl TryFrom<i8> for Label {
    type Error = ClassifierError;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(ClassifierError::InvalidLabel(other as i64)),
        }
    }
}

/// A ±1-labeled view of a shared distance matrix.
///
/// `active` selects the points that make up the sample without copying the
/// matrix; every index has a label whether active or not.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    matrix: Arc<SemimetricMatrix>,
    labels: Vec<Label>,
    active: Vec<usize>,
}

impl LabeledSample {
    /// Sample over every index of `matrix`.
    pub fn new(matrix: Arc<SemimetricMatrix>, labels: Vec<Label>) -> Result<Self, ClassifierError> {
        let active = (0..matrix.n()).collect();
        Self::with_active(matrix, labels, active)
    }

    pub fn with_active(matrix: Arc<SemimetricMatrix>, labels: Vec<Label>, active: Vec<usize>) -> Result<Self, ClassifierError> {
        if labels.len() != matrix.n() {
            return Err(ClassifierError::LabelCount { labels: labels.len(), n: matrix.n() });
        }
        if active.is_empty() {
            return Err(ClassifierError::EmptySample);
        }
        if let Some(&i) = active.iter().find(|&&i| i >= matrix.n()) {
            return Err(ClassifierError::IndexOutOfRange(i));
        }
        Ok(LabeledSample { matrix, labels, active })
    }

    /// The same matrix and labels restricted to `active`.
    pub fn restrict(&self, active: Vec<usize>) -> Result<Self, ClassifierError> {
        Self::with_active(Arc::clone(&self.matrix), self.labels.clone(), active)
    }

    pub fn matrix(&self) -> &SemimetricMatrix {
        &self.matrix
    }

    pub fn shared_matrix(&self) -> Arc<SemimetricMatrix> {
        Arc::clone(&self.matrix)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn positives(&self) -> Vec<usize> {
        self.active.iter().copied().filter(|&i| self.labels[i] == Label::Positive).collect()
    }

    pub fn negatives(&self) -> Vec<usize> {
        self.active.iter().copied().filter(|&i| self.labels[i] == Label::Negative).collect()
    }

    /// SHA-256 over the matrix entries, labels and active set.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.matrix.n() as u64).to_le_bytes());
        for v in self.matrix.entries() {
            h.update(v.to_bits().to_le_bytes());
        }
        for l in &self.labels {
            h.update([l.sign() as u8]);
        }
        for &i in &self.active {
            h.update((i as u64).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Smallest distance between a positive and a negative point of `subset`;
/// infinite when either class is absent.
pub fn margin(s: &LabeledSample, subset: &[usize]) -> f64 {
    let (pos, neg): (Vec<usize>, Vec<usize>) = subset.iter().partition(|&&i| s.label(i) == Label::Positive);
    let m = s.matrix();
    let mut best = f64::INFINITY;
    for &p in &pos {
        for &q in &neg {
            best = best.min(m.get(p, q));
        }
    }
    best
}

/// A condensed prototype set inducing a 1-NN rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NNModel {
    /// Matrix indices of the prototypes.
    pub prototypes: Vec<usize>,
    pub prototype_labels: Vec<Label>,
    /// Separation of the prototypes; infinite for single-class samples.
    pub margin_used: f64,
    pub source_digest: String,
}

impl NNModel {
    pub fn classify(&self, dists: &[f64]) -> Result<Label, ClassifierError> {
        nn_classify(self, dists)
    }
}

/// Labels a query from its distances to the prototypes, in prototype order.
///
/// Returns `sign(d(x, S₋) − d(x, S₊))` with a tie going to [`Label::Positive`];
/// the distance to an absent class is +∞.
pub fn nn_classify(model: &NNModel, dists: &[f64]) -> Result<Label, ClassifierError> {
    if dists.is_empty() {
        return Err(ClassifierError::NoPrototypes);
    }
    if dists.len() != model.prototype_labels.len() {
        return Err(ClassifierError::DistanceCount {
            expected: model.prototype_labels.len(),
            got: dists.len(),
        });
    }
    let mut to_pos = f64::INFINITY;
    let mut to_neg = f64::INFINITY;
    for (&d, &l) in dists.iter().zip(&model.prototype_labels) {
        match l {
            Label::Positive => to_pos = to_pos.min(d),
            Label::Negative => to_neg = to_neg.min(d),
        }
    }
    Ok(if to_pos <= to_neg {
        Label::Positive
    } else {
        Label::Negative
    })
}

/// Condenses a sample at its own margin γ: the greedy γ-net over the active
/// points, in active order, classifies every training point correctly.
pub fn condense_consistent(s: &LabeledSample) -> NNModel {
    let gamma = margin(s, s.active());
    condense_at(s, s.active(), gamma)
}

/// Greedy `radius`-net of `subset` labelled from `s`.
pub(crate) fn condense_at(s: &LabeledSample, subset: &[usize], radius: f64) -> NNModel {
    let net = extract_net(s.matrix(), subset, radius).expect("margin of a validated sample is positive");
    NNModel {
        prototype_labels: net.members.iter().map(|&i| s.label(i)).collect(),
        prototypes: net.members,
        margin_used: radius,
        source_digest: s.digest(),
    }
}

/// Fraction of active points whose nearest prototype disagrees with their label.
pub fn training_error(model: &NNModel, s: &LabeledSample) -> Result<f64, ClassifierError> {
    let digest = s.digest();
    if model.source_digest != digest {
        return Err(ClassifierError::DigestMismatch {
            model: model.source_digest.clone(),
            sample: digest,
        });
    }
    sample_error(model, s)
}

/// Error on the active points of `s`, which must share the model's matrix.
pub fn sample_error(model: &NNModel, s: &LabeledSample) -> Result<f64, ClassifierError> {
    let m = s.matrix();
    if let Some(&p) = model.prototypes.iter().find(|&&p| p >= m.n()) {
        return Err(ClassifierError::IndexOutOfRange(p));
    }
    let mut wrong = 0usize;
    let mut dists = vec![0.0; model.prototypes.len()];
    for &i in s.active() {
        for (d, &p) in dists.iter_mut().zip(&model.prototypes) {
            *d = m.get(i, p);
        }
        if nn_classify(model, &dists)? != s.label(i) {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / s.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_line_space, validate_semimetric};
    use Label::{Negative as N, Positive as P};

    fn model(labels: &[Label]) -> NNModel {
        NNModel {
            prototypes: (0..labels.len()).collect(),
            prototype_labels: labels.to_vec(),
            margin_used: 1.0,
            source_digest: String::new(),
        }
    }

    fn line_sample(points: &[(f64, Label)]) -> LabeledSample {
        let raw: Vec<Vec<f64>> = points
            .iter()
            .map(|a| points.iter().map(|b| (a.0 - b.0).abs()).collect())
            .collect();
        let m = validate_semimetric(&raw).unwrap();
        LabeledSample::new(Arc::new(m), points.iter().map(|p| p.1).collect()).unwrap()
    }

    #[test]
    fn margin_examples() {
        let s = line_sample(&[(0.0, P), (7.0, N)]);
        assert_eq!(margin(&s, &[0, 1]), 7.0);
        assert_eq!(margin(&s, &[0]), f64::INFINITY);
        assert_eq!(margin(&s, &[]), f64::INFINITY);
    }

    #[test]
    fn classify_examples() {
        let m = model(&[P, N]);
        assert_eq!(nn_classify(&m, &[1.0, 5.0]).unwrap(), P);
        assert_eq!(nn_classify(&m, &[5.0, 1.0]).unwrap(), N);
        assert_eq!(nn_classify(&m, &[2.0, 2.0]).unwrap(), P);
        let only_neg = model(&[N, N]);
        assert_eq!(nn_classify(&only_neg, &[0.1, 9.0]).unwrap(), N);
        assert_eq!(nn_classify(&m, &[]), Err(ClassifierError::NoPrototypes));
        assert!(matches!(nn_classify(&m, &[1.0]), Err(ClassifierError::DistanceCount { .. })));
    }

    #[test]
    fn condense_line_trace() {
        let s = line_sample(&[(0.0, P), (1.0, P), (10.0, N), (11.0, N)]);
        let model = condense_consistent(&s);
        assert_eq!(model.margin_used, 9.0);
        assert_eq!(model.prototypes, vec![0, 2]);
        assert_eq!(model.prototype_labels, vec![P, N]);
        assert_eq!(training_error(&model, &s).unwrap(), 0.0);
    }

    #[test]
    fn single_class_is_constant() {
        let s = line_sample(&[(0.0, N), (3.0, N), (4.0, N)]);
        let model = condense_consistent(&s);
        assert_eq!(model.prototypes.len(), 1);
        assert_eq!(model.margin_used, f64::INFINITY);
        assert_eq!(training_error(&model, &s).unwrap(), 0.0);
    }

    #[test]
    fn error_of_constant_and_full_models() {
        let s = line_sample(&[(0.0, P), (1.0, N), (2.0, P), (3.0, N)]);
        let constant = NNModel {
            prototypes: vec![0],
            prototype_labels: vec![P],
            margin_used: f64::INFINITY,
            source_digest: s.digest(),
        };
        assert_eq!(training_error(&constant, &s).unwrap(), 0.5);
        let full = NNModel {
            prototypes: vec![0, 1, 2, 3],
            prototype_labels: vec![P, N, P, N],
            margin_used: 1.0,
            source_digest: s.digest(),
        };
        assert_eq!(training_error(&full, &s).unwrap(), 0.0);
    }

    #[test]
    fn digest_mismatch_detected() {
        let s = line_sample(&[(0.0, P), (1.0, N)]);
        let other = line_sample(&[(0.0, P), (2.0, N)]);
        let model = condense_consistent(&s);
        assert!(matches!(training_error(&model, &other), Err(ClassifierError::DigestMismatch { .. })));
        let restricted = s.restrict(vec![0]).unwrap();
        assert_ne!(restricted.digest(), s.digest());
    }

    #[test]
    fn label_serde_is_signed() {
        assert_eq!(i8::from(N), -1);
        assert_eq!(Label::try_from(1i8).unwrap(), P);
        assert!(Label::try_from(0i8).is_err());
    }

    #[test]
    fn restrict_checks_indices() {
        let m = Arc::new(build_line_space(3, 1.0).unwrap());
        let s = LabeledSample::new(m.clone(), vec![P, N, P]).unwrap();
        assert!(s.restrict(vec![0, 5]).is_err());
        assert_eq!(s.restrict(vec![]).unwrap_err(), ClassifierError::EmptySample);
        assert!(LabeledSample::new(m, vec![P]).is_err());
    }
}
