//! Semimetric distance tables and the distances that produce them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for symmetry of ingested raw matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Tolerance on the unit mass of a probability vector.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("empty input")]
    Empty,
    #[error("asymmetric entry at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("negative distance at ({0}, {1})")]
    NegativeDistance(usize, usize),
    #[error("non-finite distance at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("non-zero diagonal entry at index {0}")]
    NonZeroDiagonal(usize),
    #[error("distinct points at distance zero: {pairs:?}")]
    DuplicatePoints { pairs: Vec<(usize, usize)> },
    #[error("distance {spec} does not apply to {items}")]
    SpecMismatch { spec: String, items: String },
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hausdorff rank {k} out of range for clouds of sizes {a} and {b}")]
    RankOutOfRange { k: usize, a: usize, b: usize },
}

/// A validated n×n distance table.
///
/// Symmetric, zero on the diagonal and strictly positive elsewhere. The
/// triangle inequality is not required; see [`triangle_violations`].
#[derive(Debug, Clone, PartialEq)]
pub struct SemimetricMatrix {
    n: usize,
    d: Vec<f64>,
    provenance: String,
}

impl SemimetricMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    /// Restriction to `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> SemimetricMatrix {
        let m = indices.len();
        let mut d = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                d.push(self.get(i, j));
            }
        }
        SemimetricMatrix {
            n: m,
            d,
            provenance: format!("submatrix of {}", self.provenance),
        }
    }

    /// Builds from a symmetric fill function evaluated once per unordered pair.
    fn from_pair_fn<F>(n: usize, provenance: String, f: F) -> Result<Self, SpaceError>
    where
        F: Fn(usize, usize) -> Result<f64, SpaceError> + Sync,
    {
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let mut d = vec![0.0; n * n];
        let mut duplicates = Vec::new();
        for (i, row) in upper.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let j = i + 1 + off;
                if !v.is_finite() {
                    return Err(SpaceError::NonFinite(i, j));
                }
                if v < 0.0 {
                    return Err(SpaceError::NegativeDistance(i, j));
                }
                if v == 0.0 {
                    duplicates.push((i, j));
                }
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        if !duplicates.is_empty() {
            return Err(SpaceError::DuplicatePoints { pairs: duplicates });
        }
        Ok(SemimetricMatrix { n, d, provenance })
    }
}

/// Checks the semimetric axioms on a raw square table.
///
/// Entries within [`SYMMETRY_TOLERANCE`] of their transpose are accepted and
/// averaged.
pub fn validate_semimetric(raw: &[Vec<f64>]) -> Result<SemimetricMatrix, SpaceError> {
    let n = raw.len();
    if n == 0 {
        return Err(SpaceError::Empty);
    }
    for (row, r) in raw.iter().enumerate() {
        if r.len() != n {
            return Err(SpaceError::NotSquare { row, len: r.len(), n });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !raw[i][j].is_finite() {
                return Err(SpaceError::NonFinite(i, j));
            }
            if raw[i][j] < 0.0 {
                return Err(SpaceError::NegativeDistance(i, j));
            }
        }
    }
    for i in 0..n {
        if raw[i][i] != 0.0 {
            return Err(SpaceError::NonZeroDiagonal(i));
        }
        for j in (i + 1)..n {
            if (raw[i][j] - raw[j][i]).abs() > SYMMETRY_TOLERANCE {
                return Err(SpaceError::Asymmetric(i, j));
            }
        }
    }
    SemimetricMatrix::from_pair_fn(n, "validated raw matrix".into(), |i, j| {
        Ok(0.5 * (raw[i][j] + raw[j][i]))
    })
}

/// A strict triangle-inequality failure `d[i][j] > d[i][k] + d[k][j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleViolation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub excess: f64,
}

/// All ordered triples breaking the triangle inequality.
///
/// Excesses below a relative 1e-12 are treated as rounding noise. An empty
/// result means the matrix is a metric.
pub fn triangle_violations(m: &SemimetricMatrix) -> Vec<TriangleViolation> {
    let n = m.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = m.get(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let excess = dij - (m.get(i, k) + m.get(k, j));
                if excess > 1e-12 * dij.max(1.0) {
                    out.push(TriangleViolation { i, j, k, excess });
                }
            }
        }
    }
    out
}

/// How a set of k-median Hausdorff ranks is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rank", content = "k")]
pub enum HausdorffRank {
    /// The k-th smallest nearest-point distance (1-indexed).
    Fixed(usize),
    /// k = ⌈|A|/2⌉ for each directed evaluation.
    Median,
}

/// The distance used to turn a [`PointSet`] into a [`SemimetricMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DistanceSpec {
    /// (Σ|xᵢ−yᵢ|^p)^(1/p) with 0 < p < 1.
    FractionalLp { p: f64 },
    JensenShannon,
    /// Clouds are flat rows reshaped into points of dimension `dim`.
    KMedianHausdorff { rank: HausdorffRank, dim: usize },
    Euclidean,
    /// The input already is a distance table.
    Precomputed,
}

impl DistanceSpec {
    pub fn validate(&self) -> Result<(), SpaceError> {
        match *self {
            DistanceSpec::FractionalLp { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(SpaceError::InvalidParameter(format!(
                        "fractional lp requires 0 < p < 1, got {p}"
                    )));
                }
            }
            DistanceSpec::KMedianHausdorff { rank, dim } => {
                if dim == 0 {
                    return Err(SpaceError::InvalidParameter("cloud dimension must be positive".into()));
                }
                if rank == HausdorffRank::Fixed(0) {
                    return Err(SpaceError::InvalidParameter("hausdorff rank must be at least 1".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match *self {
            DistanceSpec::FractionalLp { p } => format!("lp:{p}"),
            DistanceSpec::JensenShannon => "js".into(),
            DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Fixed(k), dim } => {
                format!("hausdorff:{k}:{dim}")
            }
            DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Median, dim } => {
                format!("hausdorff-median:{dim}")
            }
            DistanceSpec::Euclidean => "euclidean".into(),
            DistanceSpec::Precomputed => "precomputed".into(),
        }
    }

    /// The item kind this distance consumes, or `None` for precomputed tables.
    pub fn item_kind(&self) -> Option<ItemKind> {
        match *self {
            DistanceSpec::FractionalLp { .. } | DistanceSpec::Euclidean => Some(ItemKind::Vector),
            DistanceSpec::JensenShannon => Some(ItemKind::Distribution),
            DistanceSpec::KMedianHausdorff { dim, .. } => Some(ItemKind::Cloud { dim }),
            DistanceSpec::Precomputed => None,
        }
    }

    /// Distance between two raw items of the matching kind.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64, SpaceError> {
        match *self {
            DistanceSpec::FractionalLp { p } => fractional_lp(x, y, p),
            DistanceSpec::Euclidean => euclidean(x, y),
            DistanceSpec::JensenShannon => jensen_shannon(x, y),
            DistanceSpec::KMedianHausdorff { rank, dim } => {
                let a = reshape_cloud(x, dim)?;
                let b = reshape_cloud(y, dim)?;
                let k = match rank {
                    HausdorffRank::Fixed(k) => k,
                    HausdorffRank::Median => a.len().min(b.len()).div_ceil(2),
                };
                k_median_hausdorff_rank(&a, &b, rank, k)
            }
            DistanceSpec::Precomputed => Err(SpaceError::SpecMismatch {
                spec: self.name(),
                items: "raw items".into(),
            }),
        }
    }
}

impl std::str::FromStr for DistanceSpec {
    type Err = SpaceError;

    /// Parses the forms produced by [`DistanceSpec::name`].
    fn from_str(text: &str) -> Result<Self, SpaceError> {
        let bad = || SpaceError::InvalidParameter(format!("unknown distance '{text}'"));
        let num = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = text.trim().split(':').collect();
        let spec = match parts.as_slice() {
            ["lp", p] => DistanceSpec::FractionalLp { p: p.trim().parse().map_err(|_| bad())? },
            ["js"] => DistanceSpec::JensenShannon,
            ["hausdorff", k, dim] => DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Fixed(num(k)?), dim: num(dim)? },
            ["hausdorff-median", dim] => DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Median, dim: num(dim)? },
            ["euclidean"] => DistanceSpec::Euclidean,
            ["precomputed"] => DistanceSpec::Precomputed,
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemKind {
    Vector,
    /// Non-negative entries summing to one.
    Distribution,
    /// A flat row holding points of dimension `dim`.
    Cloud { dim: usize },
}

impl ItemKind {
    fn describe(&self) -> String {
        match self {
            ItemKind::Vector => "vectors".into(),
            ItemKind::Distribution => "distributions".into(),
            ItemKind::Cloud { dim } => format!("point clouds of dimension {dim}"),
        }
    }
}

/// Raw items of one kind sharing a common arity.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    kind: ItemKind,
    items: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(kind: ItemKind, items: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        if items.is_empty() {
            return Err(SpaceError::Empty);
        }
        match kind {
            ItemKind::Vector | ItemKind::Distribution => {
                let arity = items[0].len();
                if let Some(bad) = items.iter().find(|it| it.len() != arity) {
                    return Err(SpaceError::ArityMismatch(arity, bad.len()));
                }
                if kind == ItemKind::Distribution {
                    for it in &items {
                        check_distribution(it)?;
                    }
                }
            }
            ItemKind::Cloud { dim } => {
                for it in &items {
                    reshape_cloud(it, dim)?;
                }
            }
        }
        Ok(PointSet { kind, items })
    }

    pub fn vectors(items: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        Self::new(ItemKind::Vector, items)
    }

    pub fn distributions(items: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        Self::new(ItemKind::Distribution, items)
    }

    pub fn clouds(dim: usize, items: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        Self::new(ItemKind::Cloud { dim }, items)
    }

    pub fn kind(&self) -> ItemKind {
        self.kind
    }

    pub fn items(&self) -> &[Vec<f64>] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Pairwise distance table of `points` under `spec`.
pub fn build_matrix(points: &PointSet, spec: &DistanceSpec) -> Result<SemimetricMatrix, SpaceError> {
    spec.validate()?;
    let compatible = match (spec.item_kind(), points.kind) {
        (None, _) => false,
        (Some(ItemKind::Vector), ItemKind::Vector | ItemKind::Distribution) => true,
        (Some(want), have) => want == have,
    };
    if !compatible {
        return Err(SpaceError::SpecMismatch {
            spec: spec.name(),
            items: points.kind.describe(),
        });
    }
    if let DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Fixed(k), dim } = *spec {
        let smallest = points.items.iter().map(|it| it.len() / dim).min().unwrap_or(0);
        if k > smallest {
            return Err(SpaceError::RankOutOfRange { k, a: smallest, b: smallest });
        }
    }
    let items = &points.items;
    SemimetricMatrix::from_pair_fn(items.len(), spec.name(), |i, j| spec.distance(&items[i], &items[j]))
}

fn check_arity(x: &[f64], y: &[f64]) -> Result<(), SpaceError> {
    if x.len() != y.len() {
        return Err(SpaceError::ArityMismatch(x.len(), y.len()));
    }
    Ok(())
}

pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64, SpaceError> {
    check_arity(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// (Σ|xᵢ−yᵢ|^p)^(1/p) for 0 < p < 1. Not a metric in this range.
pub fn fractional_lp(x: &[f64], y: &[f64], p: f64) -> Result<f64, SpaceError> {
    check_arity(x, y)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(SpaceError::InvalidParameter(format!(
            "fractional lp requires 0 < p < 1, got {p}"
        )));
    }
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

fn check_distribution(p: &[f64]) -> Result<(), SpaceError> {
    if p.is_empty() {
        return Err(SpaceError::InvalidDistribution("empty".into()));
    }
    if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(SpaceError::InvalidDistribution(format!("entry {v} is not a probability")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(SpaceError::InvalidDistribution(format!("mass sums to {total}")));
    }
    Ok(())
}

/// ½KL(p‖m) + ½KL(q‖m) with m = (p+q)/2, natural log. Lies in [0, ln 2].
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> Result<f64, SpaceError> {
    check_arity(p, q)?;
    check_distribution(p)?;
    check_distribution(q)?;
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            total += 0.5 * a * (a / m).ln();
        }
        if b > 0.0 {
            total += 0.5 * b * (b / m).ln();
        }
    }
    Ok(total.clamp(0.0, std::f64::consts::LN_2))
}

fn reshape_cloud(flat: &[f64], dim: usize) -> Result<Vec<&[f64]>, SpaceError> {
    if dim == 0 || flat.is_empty() || flat.len() % dim != 0 {
        return Err(SpaceError::InvalidParameter(format!(
            "cloud of {} values is not a non-empty set of {dim}-dimensional points",
            flat.len()
        )));
    }
    Ok(flat.chunks(dim).collect())
}

/// k-th smallest (1-indexed) of the nearest-point distances from `from` into `to`.
fn directed_rank(from: &[&[f64]], to: &[&[f64]], k: usize) -> f64 {
    let mut nearest: Vec<f64> = from
        .iter()
        .map(|a| {
            to.iter()
                .map(|b| euclidean(a, b).expect("cloud points share a dimension"))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nearest.sort_by(f64::total_cmp);
    nearest[k - 1]
}

fn k_median_hausdorff_rank(
    a: &[&[f64]],
    b: &[&[f64]],
    rank: HausdorffRank,
    k: usize,
) -> Result<f64, SpaceError> {
    let (ka, kb) = match rank {
        HausdorffRank::Fixed(_) => (k, k),
        HausdorffRank::Median => (a.len().div_ceil(2), b.len().div_ceil(2)),
    };
    if ka == 0 || kb == 0 || ka > a.len() || kb > b.len() {
        return Err(SpaceError::RankOutOfRange { k, a: a.len(), b: b.len() });
    }
    Ok(directed_rank(a, b, ka).max(directed_rank(b, a, kb)))
}

/// Symmetric k-median Hausdorff distance between two euclidean point clouds.
///
/// The directed value A→B is the k-th smallest of `min_b |a − b|` over `a ∈ A`;
/// the result is the larger of the two directions. Distinct clouds can be at
/// distance zero, which [`build_matrix`] rejects as duplicates.
pub fn k_median_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>], k: usize) -> Result<f64, SpaceError> {
    let a: Vec<&[f64]> = a.iter().map(Vec::as_slice).collect();
    let b: Vec<&[f64]> = b.iter().map(Vec::as_slice).collect();
    if let Some(p) = a.iter().chain(&b).find(|p| p.len() != a[0].len()) {
        return Err(SpaceError::ArityMismatch(a[0].len(), p.len()));
    }
    k_median_hausdorff_rank(&a, &b, HausdorffRank::Fixed(k), k)
}

/// Two-part space with a bounded doubling constant but a large packing.
///
/// Indices `0..n` hold the line points aᵢ with d(aᵢ,aⱼ) = |i−j|; indices
/// `n..2n` hold their shadows a'ᵢ with d(a'ᵢ,aⱼ) = |i−j| + phi·[i=j] and
/// d(a'ᵢ,a'ⱼ) = n−1.
pub fn build_no_packing_space(n: usize, phi: f64) -> Result<SemimetricMatrix, SpaceError> {
    if n < 2 {
        return Err(SpaceError::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    if !(phi > 0.0 && phi < 1.0) {
        return Err(SpaceError::InvalidParameter(format!("need 0 < phi < 1, got {phi}")));
    }
    let line = |i: usize, j: usize| i.abs_diff(j) as f64;
    SemimetricMatrix::from_pair_fn(2 * n, format!("no-packing n={n} phi={phi}"), |x, y| {
        Ok(match (x < n, y < n) {
            (true, true) => line(x, y),
            (false, false) => (n - 1) as f64,
            (true, false) => line(x, y - n) + if x == y - n { phi } else { 0.0 },
            (false, true) => line(x - n, y) + if x - n == y { phi } else { 0.0 },
        })
    })
}

/// `k` points with pairwise distances drawn uniformly from [1, 2] under `seed`.
pub fn build_equidistant_space(k: usize, seed: u64) -> Result<SemimetricMatrix, SpaceError> {
    if k < 2 {
        return Err(SpaceError::InvalidParameter(format!("need k >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let v = rng.gen_range(1.0..=2.0);
            raw[i][j] = v;
            raw[j][i] = v;
        }
    }
    Ok(validate_semimetric(&raw)?.with_provenance(format!("equidistant k={k} seed={seed}")))
}

/// `k` points at mutual distance exactly 1.
pub fn build_unit_equidistant_space(k: usize) -> Result<SemimetricMatrix, SpaceError> {
    if k < 1 {
        return Err(SpaceError::InvalidParameter("need k >= 1".into()));
    }
    SemimetricMatrix::from_pair_fn(k, format!("unit equidistant k={k}"), |_, _| Ok(1.0))
}

/// Line metric on `0..n` with d = |i−j| scaled by `step`.
pub fn build_line_space(n: usize, step: f64) -> Result<SemimetricMatrix, SpaceError> {
    if n == 0 {
        return Err(SpaceError::Empty);
    }
    SemimetricMatrix::from_pair_fn(n, format!("line n={n}"), |i, j| Ok(i.abs_diff(j) as f64 * step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_names_parse_back() {
        for spec in [
            DistanceSpec::FractionalLp { p: 0.5 },
            DistanceSpec::JensenShannon,
            DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Fixed(2), dim: 3 },
            DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Median, dim: 2 },
            DistanceSpec::Euclidean,
            DistanceSpec::Precomputed,
        ] {
            assert_eq!(spec.name().parse::<DistanceSpec>().unwrap(), spec);
        }
        assert!("lp:1.5".parse::<DistanceSpec>().is_err());
        assert!("cosine".parse::<DistanceSpec>().is_err());
    }

    #[test]
    fn lp_half_on_unit_diagonal() {
        let ps = PointSet::vectors(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let m = build_matrix(&ps, &DistanceSpec::FractionalLp { p: 0.5 }).unwrap();
        assert!((m.get(0, 1) - 4.0).abs() < 1e-12);
        assert_eq!(m.get(1, 0), m.get(0, 1));
    }

    #[test]
    fn single_point_matrix() {
        let ps = PointSet::vectors(vec![vec![3.0]]).unwrap();
        let m = build_matrix(&ps, &DistanceSpec::Euclidean).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn js_disjoint_supports() {
        let ps = PointSet::distributions(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let m = build_matrix(&ps, &DistanceSpec::JensenShannon).unwrap();
        assert!((m.get(0, 1) - 0.693147).abs() < 1e-6);
    }

    #[test]
    fn js_half_vs_point_mass() {
        // Independent evaluation: m = (3/4, 1/4),
        // KL(p‖m) = ½ln(2/3) + ½ln 2, KL(q‖m) = ln(4/3).
        let expected = 0.5 * (0.5 * (2.0f64 / 3.0).ln() + 0.5 * 2.0f64.ln()) + 0.5 * (4.0f64 / 3.0).ln();
        let v = jensen_shannon(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.215_761_554_338_835_7).abs() < 1e-12);
    }

    #[test]
    fn js_identical_is_zero() {
        assert_eq!(jensen_shannon(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn js_rejects_bad_distribution() {
        assert!(matches!(
            jensen_shannon(&[0.2, 0.2], &[0.5, 0.5]),
            Err(SpaceError::InvalidDistribution(_))
        ));
        assert!(PointSet::distributions(vec![vec![1.5, -0.5]]).is_err());
    }

    #[test]
    fn validate_examples() {
        assert!(validate_semimetric(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert_eq!(
            validate_semimetric(&[vec![0.0, 1.0], vec![2.0, 0.0]]),
            Err(SpaceError::Asymmetric(0, 1))
        );
        assert!(matches!(
            validate_semimetric(&[vec![0.0, 0.0], vec![0.0, 0.0]]),
            Err(SpaceError::DuplicatePoints { .. })
        ));
        assert!(matches!(
            validate_semimetric(&[vec![0.0, -1.0], vec![-1.0, 0.0]]),
            Err(SpaceError::NegativeDistance(0, 1))
        ));
        assert!(matches!(
            validate_semimetric(&[vec![0.0, 1.0]]),
            Err(SpaceError::NotSquare { .. })
        ));
    }

    #[test]
    fn symmetry_tolerance_is_absolute() {
        let ok = validate_semimetric(&[vec![0.0, 1.0], vec![1.0 + 5e-13, 0.0]]);
        assert!(ok.is_ok());
        let bad = validate_semimetric(&[vec![0.0, 1.0], vec![1.0 + 1e-11, 0.0]]);
        assert_eq!(bad, Err(SpaceError::Asymmetric(0, 1)));
    }

    #[test]
    fn triangle_examples() {
        let line = build_line_space(3, 1.0).unwrap();
        assert!(triangle_violations(&line).is_empty());

        let m = validate_semimetric(&[
            vec![0.0, 3.0, 1.0],
            vec![3.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let v = triangle_violations(&m);
        let hit = v.iter().find(|t| (t.i, t.j, t.k) == (0, 1, 2)).unwrap();
        assert!((hit.excess - 1.0).abs() < 1e-15);
        assert_eq!(v.len(), 2);

        let ps = PointSet::vectors(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let lp = build_matrix(&ps, &DistanceSpec::FractionalLp { p: 0.5 }).unwrap();
        assert!(!triangle_violations(&lp).is_empty());
    }

    #[test]
    fn lp_single_coordinate_and_identity() {
        for p in [0.1, 0.5, 0.9] {
            assert!((fractional_lp(&[2.0], &[5.5], p).unwrap() - 3.5).abs() < 1e-12);
            assert_eq!(fractional_lp(&[1.0, 2.0], &[1.0, 2.0], p).unwrap(), 0.0);
        }
        assert!(fractional_lp(&[1.0], &[1.0, 2.0], 0.5).is_err());
        assert!(fractional_lp(&[1.0], &[2.0], 1.0).is_err());
    }

    #[test]
    fn lp_near_one_matches_l1() {
        let x = [0.3f64, -1.2, 2.0];
        let y = [1.1, 0.4, -0.5];
        let l1: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        let v = fractional_lp(&x, &y, 0.999).unwrap();
        // ‖·‖_p is within a factor 3^(1/p − 1) of ℓ1 for three terms.
        assert!((v - l1).abs() / l1 < 3f64.powf(1.0 / 0.999 - 1.0) - 1.0 + 1e-9);
        let two = fractional_lp(&[0.0, 0.0], &[0.0, 1.5], 0.999).unwrap();
        assert!((two - 1.5).abs() < 1e-6);
    }

    #[test]
    fn hausdorff_examples() {
        let a = vec![vec![0.0], vec![3.0]];
        assert_eq!(k_median_hausdorff(&a, &a, 1).unwrap(), 0.0);
        assert_eq!(k_median_hausdorff(&[vec![0.0]], &[vec![5.0]], 1).unwrap(), 5.0);
        let a = vec![vec![0.0], vec![10.0]];
        let b = vec![vec![0.0]];
        assert_eq!(k_median_hausdorff(&a, &b, 1).unwrap(), 0.0);
        assert!(matches!(
            k_median_hausdorff(&a, &b, 2),
            Err(SpaceError::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn hausdorff_degenerate_pair_rejected_at_build() {
        let ps = PointSet::clouds(1, vec![vec![0.0, 10.0], vec![0.0]]).unwrap();
        let spec = DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Fixed(1), dim: 1 };
        assert!(matches!(
            build_matrix(&ps, &spec),
            Err(SpaceError::DuplicatePoints { .. })
        ));
    }

    #[test]
    fn hausdorff_median_preset() {
        // A = {0,1,2}, B = {0.5, 8}: nearest distances A→B = {0.5,0.5,1.5}, median rank 2 → 0.5;
        // B→A = {0.5, 6}, rank 1 → 0.5.
        let spec = DistanceSpec::KMedianHausdorff { rank: HausdorffRank::Median, dim: 1 };
        let v = spec.distance(&[0.0, 1.0, 2.0], &[0.5, 8.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spec_mismatch() {
        let ps = PointSet::vectors(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            build_matrix(&ps, &DistanceSpec::JensenShannon),
            Err(SpaceError::SpecMismatch { .. })
        ));
        assert!(matches!(
            build_matrix(&ps, &DistanceSpec::Precomputed),
            Err(SpaceError::SpecMismatch { .. })
        ));
        assert!(build_matrix(&ps, &DistanceSpec::FractionalLp { p: 1.0 }).is_err());
    }

    #[test]
    fn duplicate_vectors_listed() {
        let ps = PointSet::vectors(vec![vec![1.0], vec![2.0], vec![1.0], vec![2.0]]).unwrap();
        let err = build_matrix(&ps, &DistanceSpec::Euclidean).unwrap_err();
        assert_eq!(err, SpaceError::DuplicatePoints { pairs: vec![(0, 2), (1, 3)] });
    }

    #[test]
    fn no_packing_values() {
        let m = build_no_packing_space(3, 0.001).unwrap();
        let (a, ap) = (|i: usize| i - 1, |i: usize| 3 + i - 1);
        assert!((m.get(ap(1), a(1)) - 0.001).abs() < 1e-15);
        assert_eq!(m.get(ap(1), a(2)), 1.0);
        assert_eq!(m.get(ap(1), ap(2)), 2.0);
        for n in 2..8 {
            let m = build_no_packing_space(n, 0.25).unwrap();
            for i in n..2 * n {
                for j in n..2 * n {
                    if i != j {
                        assert_eq!(m.get(i, j), (n - 1) as f64);
                    }
                }
            }
        }
        let small = build_no_packing_space(2, 0.5).unwrap();
        assert_eq!(small.n(), 4);
        assert!(validate_semimetric(&small.to_rows()).is_ok());
        assert!(build_no_packing_space(1, 0.5).is_err());
        assert!(build_no_packing_space(3, 0.0).is_err());
        assert!(build_no_packing_space(3, 1.0).is_err());
    }

    #[test]
    fn no_packing_is_not_metric() {
        for n in 3..7 {
            let m = build_no_packing_space(n, 0.01).unwrap();
            assert!(!triangle_violations(&m).is_empty(), "n = {n}");
        }
    }

    #[test]
    fn equidistant_range_and_determinism() {
        let m2 = build_equidistant_space(2, 1).unwrap();
        assert!((1.0..=2.0).contains(&m2.get(0, 1)));
        let a = build_equidistant_space(4, 42).unwrap();
        let b = build_equidistant_space(4, 42).unwrap();
        assert_eq!(a.entries(), b.entries());
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((1.0..=2.0).contains(&a.get(i, j)));
                }
            }
        }
        assert_ne!(a.entries(), build_equidistant_space(4, 43).unwrap().entries());
    }
}
