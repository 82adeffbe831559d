//! Seeded random instances for experiments and property checks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::classifier::{LabeledSample, Label};
use crate::space::{build_matrix, validate_semimetric, DistanceSpec, PointSet, SemimetricMatrix};
use crate::srm::{ConflictEdge, ConflictGraph};

/// Symmetric table with log-uniform off-diagonal entries in [e⁻², e²].
///
/// Such tables violate the triangle inequality almost surely once n ≥ 3.
pub fn random_semimetric<R: Rng>(rng: &mut R, n: usize) -> SemimetricMatrix {
    let mut raw = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (rng.gen_range(-2.0..2.0f64)).exp();
            raw[i][j] = v;
            raw[j][i] = v;
        }
    }
    validate_semimetric(&raw)
        .expect("positive symmetric table")
        .with_provenance(format!("random semimetric n={n}"))
}

/// Uniform points in the unit cube of dimension `dim`.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Euclidean distances between uniform points in the unit cube.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize, dim: usize) -> SemimetricMatrix {
    let points = PointSet::vectors(random_points(rng, n, dim)).expect("non-empty, common arity");
    build_matrix(&points, &DistanceSpec::Euclidean).expect("continuous points are distinct")
}

/// Fractional ℓp distances (p drawn from [0.2, 0.9]) between uniform points.
pub fn random_lp<R: Rng>(rng: &mut R, n: usize, dim: usize) -> SemimetricMatrix {
    let p = rng.gen_range(0.2..0.9);
    let points = PointSet::vectors(random_points(rng, n, dim)).expect("non-empty, common arity");
    build_matrix(&points, &DistanceSpec::FractionalLp { p }).expect("continuous points are distinct")
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<Label> {
    (0..n)
        .map(|_| if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative })
        .collect()
}

/// A sample mixing the three matrix families above, with labels from a noisy
/// linear rule so that both clean and overlapping margins occur. Both classes
/// are always present when `n ≥ 2`.
pub fn random_labeled_sample<R: Rng>(rng: &mut R, n: usize) -> LabeledSample {
    let dim = rng.gen_range(1..=3);
    let points = random_points(rng, n, dim);
    let matrix = match rng.gen_range(0..3) {
        0 => random_semimetric(rng, n),
        1 => build_matrix(&PointSet::vectors(points.clone()).unwrap(), &DistanceSpec::Euclidean).unwrap(),
        _ => {
            let p = rng.gen_range(0.2..0.9);
            build_matrix(&PointSet::vectors(points.clone()).unwrap(), &DistanceSpec::FractionalLp { p }).unwrap()
        }
    };
    let flip = rng.gen_range(0.0..0.2);
    let threshold = rng.gen_range(0.3..0.7);
    let mut labels: Vec<Label> = points
        .iter()
        .map(|x| {
            let side = x[0] > threshold;
            if side ^ rng.gen_bool(flip) {
                Label::Positive
            } else {
                Label::Negative
            }
        })
        .collect();
    if n >= 2 {
        labels[0] = Label::Positive;
        labels[1] = Label::Negative;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    LabeledSample::with_active(Arc::new(matrix), labels, order).expect("labels cover the matrix")
}

/// Random bipartite graph with `left` and `right` vertices and edge
/// probability `p`; left vertices are `0..left`, right ones follow.
pub fn random_bipartite_graph<R: Rng>(rng: &mut R, left: usize, right: usize, p: f64) -> ConflictGraph {
    let mut edges = Vec::new();
    for l in 0..left {
        for r in 0..right {
            if rng.gen_bool(p) {
                edges.push(ConflictEdge { left: l, right: left + r, distance: rng.gen() });
            }
        }
    }
    edges.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    ConflictGraph::new((0..left).collect(), (left..left + right).collect(), edges).expect("sides are disjoint")
}
