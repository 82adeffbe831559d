//! Sample-size probe on nearly equidistant spaces.
//!
//! One atom carries mass `1 − 8ε`, the other `k − 1` share `8ε` evenly, and
//! the target labels the atoms uniformly at random. The consistent condensed
//! classifier is trained on the distinct atoms drawn and its true error is
//! the total mass of the atoms it mislabels.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use semnet::classifier::{condense_consistent, nn_classify};
use semnet::space::build_equidistant_space;
use semnet::{Label, LabeledSample, SemimetricMatrix};

use crate::error::CliError;
use crate::format::sig6;

pub const DEFAULT_EPS: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub mean_err: f64,
    pub lower_curve: f64,
}

/// Seed derived from the run seed and the labels of one cell or trial.
pub fn derive_seed(parts: &[u64]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.to_le_bytes());
    }
    h.finalize().into()
}

fn atom_mass(k: usize, eps: f64, atom: usize) -> f64 {
    if atom == 0 {
        1.0 - 8.0 * eps
    } else {
        8.0 * eps / (k - 1) as f64
    }
}

/// True error of one trial.
pub fn trial_error<R: Rng>(space: &Arc<SemimetricMatrix>, n: usize, eps: f64, rng: &mut R) -> f64 {
    let k = space.n();
    let target: Vec<Label> = (0..k)
        .map(|_| if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative })
        .collect();
    let mut seen = vec![false; k];
    for _ in 0..n {
        let atom = if rng.gen_bool(1.0 - 8.0 * eps) { 0 } else { rng.gen_range(1..k) };
        seen[atom] = true;
    }
    let observed: Vec<usize> = (0..k).filter(|&a| seen[a]).collect();
    let sample = LabeledSample::with_active(space.clone(), target.clone(), observed).expect("at least one draw");
    let model = condense_consistent(&sample);
    (0..k)
        .filter(|&a| {
            let dists: Vec<f64> = model.prototypes.iter().map(|&p| space.get(a, p)).collect();
            nn_classify(&model, &dists).expect("one distance per prototype") != target[a]
        })
        .map(|a| atom_mass(k, eps, a))
        .sum()
}

pub fn run_lower_bound(ks: &[usize], ns: &[usize], trials: usize, seed: u64, eps: f64) -> Result<Vec<ExperimentRow>, CliError> {
    if let Some(k) = ks.iter().find(|&&k| k < 2) {
        return Err(CliError::Validation(format!("k must be at least 2, got {k}")));
    }
    if ns.contains(&0) {
        return Err(CliError::Validation("n must be at least 1".into()));
    }
    if trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 0.125) {
        return Err(CliError::Validation(format!("eps must lie in (0, 1/8), got {eps}")));
    }
    let mut ks = ks.to_vec();
    let mut ns = ns.to_vec();
    ks.sort_unstable();
    ks.dedup();
    ns.sort_unstable();
    ns.dedup();

    let mut rows = Vec::new();
    for &k in &ks {
        let space_seed = u64::from_le_bytes(derive_seed(&[seed, k as u64])[..8].try_into().expect("8 bytes"));
        let space = Arc::new(build_equidistant_space(k, space_seed)?);
        for &n in &ns {
            let errors: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::from_seed(derive_seed(&[seed, k as u64, n as u64, t as u64]));
                    trial_error(&space, n, eps, &mut rng)
                })
                .collect();
            rows.push(ExperimentRow {
                k,
                n,
                trials,
                mean_err: errors.iter().sum::<f64>() / trials as f64,
                lower_curve: k as f64 / n as f64,
            });
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("k,n,trials,mean_err,lower_curve\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.k, r.n, r.trials, sig6(r.mean_err), sig6(r.lower_curve)));
    }
    out
}
