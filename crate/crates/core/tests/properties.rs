use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semnet::classifier::{condense_consistent, margin, nn_classify, training_error, LabeledSample, Label};
use semnet::geometry::{
    density_constant, doubling_constant, extract_net, is_net, net_size_bound, packing_number_exact, radius,
    DimensionMode,
};
use semnet::random::{random_labeled_sample, random_lp, random_metric, random_semimetric};
use semnet::space::{
    build_matrix, jensen_shannon, triangle_violations, validate_semimetric, DistanceSpec, PointSet,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn distribution(raw: Vec<f64>) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_matrices_validate(n in 1usize..12, dim in 1usize..4, seed: u64, kind in 0u8..3) {
        let mut r = rng(seed);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| r.gen_range(-5.0..5.0)).collect()).collect();
        let (set, spec) = match kind {
            0 => (PointSet::vectors(pts).unwrap(), DistanceSpec::Euclidean),
            1 => (PointSet::vectors(pts).unwrap(), DistanceSpec::FractionalLp { p: r.gen_range(0.05..0.95) }),
            _ => {
                let d: Vec<Vec<f64>> = pts.iter().map(|p| distribution(p.iter().chain([&1.0]).map(|v| v.abs() + 0.01).collect())).collect();
                (PointSet::distributions(d).unwrap(), DistanceSpec::JensenShannon)
            }
        };
        let m = build_matrix(&set, &spec).unwrap();
        prop_assert!(validate_semimetric(&m.to_rows()).is_ok());
        if spec == DistanceSpec::Euclidean {
            prop_assert!(triangle_violations(&m).is_empty());
        }
    }

    #[test]
    fn js_range(a in prop::collection::vec(0.0f64..1.0, 1..6), seed: u64) {
        prop_assume!(a.iter().sum::<f64>() > 1e-3);
        let p = distribution(a.clone());
        let mut r = rng(seed);
        let q = distribution(a.iter().map(|_| r.gen::<f64>() + 1e-3).collect());
        let v = jensen_shannon(&p, &q).unwrap();
        prop_assert!((0.0..=std::f64::consts::LN_2).contains(&v));
        prop_assert_eq!(jensen_shannon(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn greedy_net_is_net(n in 1usize..40, seed: u64, scale in 0.01f64..3.0) {
        let m = random_semimetric(&mut rng(seed), n);
        let subset: Vec<usize> = (0..n).rev().collect();
        let r = scale * 2.0;
        let net = extract_net(&m, &subset, r).unwrap();
        prop_assert!(is_net(&m, &subset, &net.members, r).is_valid());
        for (x, c) in &net.covered_by {
            prop_assert!(m.get(*x, *c) < r);
        }
    }

    #[test]
    fn greedy_net_at_most_max_packing(n in 1usize..16, seed: u64, r in 0.1f64..8.0) {
        let m = random_semimetric(&mut rng(seed), n);
        let all: Vec<usize> = (0..n).collect();
        let net = extract_net(&m, &all, r).unwrap();
        prop_assert!(net.members.len() <= packing_number_exact(&m, &all, r).unwrap());
    }

    #[test]
    fn margin_is_monotone(seed: u64, n in 2usize..30) {
        let mut r = rng(seed);
        let s = random_labeled_sample(&mut r, n);
        let full = margin(&s, s.active());
        let sub: Vec<usize> = s.active().iter().copied().filter(|_| r.gen_bool(0.6)).collect();
        prop_assert!(margin(&s, &sub) >= full);
    }

    #[test]
    fn condensing_is_consistent(seed: u64, n in 1usize..60) {
        let s = random_labeled_sample(&mut rng(seed), n);
        let model = condense_consistent(&s);
        prop_assert!(!model.prototypes.is_empty());
        prop_assert_eq!(training_error(&model, &s).unwrap(), 0.0);
        // Every training point's nearest prototype carries its label.
        for &i in s.active() {
            let nearest = model
                .prototypes
                .iter()
                .zip(&model.prototype_labels)
                .min_by(|a, b| s.matrix().get(i, *a.0).total_cmp(&s.matrix().get(i, *b.0)))
                .unwrap();
            prop_assert_eq!(*nearest.1, s.label(i));
        }
        if model.margin_used.is_finite() {
            prop_assert!(is_net(s.matrix(), s.active(), &model.prototypes, model.margin_used).is_valid());
        }
    }
}

#[test]
fn classify_agrees_with_argmin_oracle() {
    let mut r = rng(7);
    for _ in 0..20 {
        let k = r.gen_range(1..12);
        let labels: Vec<Label> = (0..k).map(|_| if r.gen_bool(0.5) { Label::Positive } else { Label::Negative }).collect();
        let model = semnet::NNModel {
            prototypes: (0..k).collect(),
            prototype_labels: labels.clone(),
            margin_used: 1.0,
            source_digest: String::new(),
        };
        for _ in 0..1000 {
            // Coarse grid so that exact ties occur.
            let dists: Vec<f64> = (0..k).map(|_| r.gen_range(0..20) as f64 / 4.0).collect();
            let min = dists.iter().copied().fold(f64::INFINITY, f64::min);
            let nearest: Vec<Label> = (0..k).filter(|&i| dists[i] == min).map(|i| labels[i]).collect();
            let expected = if nearest.contains(&Label::Positive) { Label::Positive } else { Label::Negative };
            assert_eq!(nn_classify(&model, &dists).unwrap(), expected);
        }
    }
}

#[test]
fn prototype_count_within_density_bound() {
    let mut r = rng(11);
    for _ in 0..40 {
        let n = r.gen_range(2..=16);
        let s = random_labeled_sample(&mut r, n);
        let model = condense_consistent(&s);
        let mu = density_constant(s.matrix(), s.active(), DimensionMode::Exact).unwrap();
        let (rad, _) = radius(s.matrix(), s.active()).unwrap();
        assert!(
            model.prototypes.len() as f64 <= net_size_bound(mu.constant, rad, model.margin_used).max(1.0),
            "{} prototypes, mu {}, rad {rad}, margin {}",
            model.prototypes.len(),
            mu.constant,
            model.margin_used
        );
    }
}

#[test]
fn doubling_below_density_and_metric_square() {
    let mut r = rng(3);
    for _ in 0..30 {
        let n = r.gen_range(1..=12);
        let m = random_semimetric(&mut r, n);
        let all: Vec<usize> = (0..n).collect();
        let mu = density_constant(&m, &all, DimensionMode::Exact).unwrap().constant;
        let la = doubling_constant(&m, &all, DimensionMode::Exact).unwrap().constant;
        assert!(la <= mu);

        let dim = r.gen_range(1..=3);
        let metric = random_metric(&mut r, n, dim);
        let mu = density_constant(&metric, &all, DimensionMode::Exact).unwrap().constant;
        let la = doubling_constant(&metric, &all, DimensionMode::Exact).unwrap().constant;
        assert!(la <= mu && mu <= la * la, "mu {mu}, lambda {la}");
    }
}

#[test]
fn lp_nets_within_size_bound() {
    let mut r = rng(5);
    for _ in 0..30 {
        let n = r.gen_range(2..=14);
        let m = random_lp(&mut r, n, 2);
        let all: Vec<usize> = (0..n).collect();
        let (rad, _) = radius(&m, &all).unwrap();
        let b = r.gen_range(0.05..1.999) * rad;
        let mu = density_constant(&m, &all, DimensionMode::Exact).unwrap().constant;
        let net = extract_net(&m, &all, b).unwrap();
        assert!(net.members.len() as f64 <= net_size_bound(mu, rad, b));
    }
}

#[test]
fn labeled_sample_digest_is_stable() {
    let m = Arc::new(random_semimetric(&mut rng(1), 5));
    let labels = vec![Label::Positive; 5];
    let a = LabeledSample::new(m.clone(), labels.clone()).unwrap();
    let b = LabeledSample::new(m, labels).unwrap();
    assert_eq!(a.digest(), b.digest());
    assert_eq!(a.digest().len(), 64);
}
