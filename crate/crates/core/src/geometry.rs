//! Nets, packings, and the density and doubling constants of finite samples.
//!
//! Balls are open everywhere: `B_r(x) = {y : d(x, y) < r}`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::space::SemimetricMatrix;

/// Largest point set handed to the exhaustive packing and cover searches.
pub const EXACT_THRESHOLD: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("empty subset")]
    EmptySubset,
    #[error("{size} points exceed the exact threshold {threshold}")]
    TooLargeForExact { size: usize, threshold: usize },
}

/// An r-net of a subset: r-separated members covering every other point.
#[derive(Debug, Clone, PartialEq)]
pub struct NetResult {
    pub radius: f64,
    pub members: Vec<usize>,
    /// For each non-member, the first member found within distance < radius.
    pub covered_by: BTreeMap<usize, usize>,
}

/// Greedy net: each point of `subset`, in order, joins unless some current
/// member lies strictly closer than `r`.
pub fn extract_net(m: &SemimetricMatrix, subset: &[usize], r: f64) -> Result<NetResult, GeometryError> {
    if r.is_nan() || r <= 0.0 {
        return Err(GeometryError::NonPositiveRadius(r));
    }
    let mut members: Vec<usize> = Vec::new();
    let mut covered_by = BTreeMap::new();
    for &x in subset {
        match members.iter().find(|&&c| m.get(x, c) < r) {
            Some(&c) => {
                covered_by.insert(x, c);
            }
            None => members.push(x),
        }
    }
    Ok(NetResult { radius: r, members, covered_by })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetViolation {
    /// Two candidate points closer than the radius.
    Separation { a: usize, b: usize, distance: f64 },
    /// A subset point with no candidate strictly within the radius.
    Coverage { point: usize },
    /// A candidate point outside the subset.
    Foreign { point: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetCheck {
    pub violations: Vec<NetViolation>,
}

impl NetCheck {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies separation ≥ r among `candidate` and coverage (< r) of `subset`.
pub fn is_net(m: &SemimetricMatrix, subset: &[usize], candidate: &[usize], r: f64) -> NetCheck {
    let mut violations = Vec::new();
    for &c in candidate {
        if !subset.contains(&c) {
            violations.push(NetViolation::Foreign { point: c });
        }
    }
    for (i, &a) in candidate.iter().enumerate() {
        for &b in &candidate[i + 1..] {
            let distance = m.get(a, b);
            if distance < r {
                violations.push(NetViolation::Separation { a, b, distance });
            }
        }
    }
    for &x in subset {
        if !candidate.iter().any(|&c| m.get(x, c) < r) {
            violations.push(NetViolation::Coverage { point: x });
        }
    }
    NetCheck { violations }
}

/// Maximum size of an r-separated sub-collection of `subset`.
pub fn packing_number_exact(m: &SemimetricMatrix, subset: &[usize], r: f64) -> Result<usize, GeometryError> {
    max_packing(m, subset, r).map(|p| p.len())
}

/// A maximum r-separated sub-collection, found as a maximum independent set
/// of the conflict graph whose edges join pairs closer than `r`.
pub fn max_packing(m: &SemimetricMatrix, subset: &[usize], r: f64) -> Result<Vec<usize>, GeometryError> {
    if subset.len() > EXACT_THRESHOLD {
        return Err(GeometryError::TooLargeForExact {
            size: subset.len(),
            threshold: EXACT_THRESHOLD,
        });
    }
    let s = subset.len();
    let mut adj = vec![0u64; s];
    for a in 0..s {
        for b in 0..s {
            if a != b && m.get(subset[a], subset[b]) < r {
                adj[a] |= 1 << b;
            }
        }
    }
    let all = if s == 0 { 0 } else { u64::MAX >> (64 - s) };
    let mut best = 0u64;
    max_independent_set(all, &adj, 0, &mut best);
    Ok(bits(best).map(|b| subset[b]).collect())
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}

fn max_independent_set(cand: u64, adj: &[u64], cur: u64, best: &mut u64) {
    if cand == 0 {
        if cur.count_ones() > best.count_ones() {
            *best = cur;
        }
        return;
    }
    if cur.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    // Isolated candidates belong to some maximum set; take them all at once.
    let mut isolated = 0u64;
    let mut pivot = None;
    let mut pivot_degree = 0;
    for v in bits(cand) {
        let deg = (adj[v] & cand).count_ones();
        if deg == 0 {
            isolated |= 1 << v;
        } else if deg > pivot_degree {
            pivot_degree = deg;
            pivot = Some(v);
        }
    }
    if isolated != 0 {
        max_independent_set(cand & !isolated, adj, cur | isolated, best);
        return;
    }
    let v = pivot.expect("non-empty candidate set without isolated vertices has a pivot");
    max_independent_set(cand & !adj[v] & !(1 << v), adj, cur | (1 << v), best);
    max_independent_set(cand & !(1 << v), adj, cur, best);
}

/// Smallest enclosing radius `min_x max_y d(x, y)` with its center; ties go to
/// the lowest index.
pub fn radius(m: &SemimetricMatrix, subset: &[usize]) -> Result<(f64, usize), GeometryError> {
    let mut best: Option<(f64, usize)> = None;
    for &x in subset {
        let ecc = subset.iter().map(|&y| m.get(x, y)).fold(0.0, f64::max);
        let better = match best {
            None => true,
            Some((r, c)) => ecc < r || (ecc == r && x < c),
        };
        if better {
            best = Some((ecc, x));
        }
    }
    best.ok_or(GeometryError::EmptySubset)
}

/// `⌈log₂(2·rad/b)⌉`, the number of radius halvings in the net-size bound.
pub fn net_size_exponent(rad: f64, b: f64) -> i32 {
    if rad <= 0.0 {
        return 0;
    }
    (2.0 * rad / b).log2().ceil() as i32
}

/// `μ^⌈log₂(2·rad/b)⌉`, the size bound for any b-separated subset of a sample
/// of radius `rad` and density constant `mu`.
pub fn net_size_bound(mu: usize, rad: f64, b: f64) -> f64 {
    (mu as f64).powi(net_size_exponent(rad, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportMode {
    Exact,
    /// Greedy packings (a lower bound on μ) or greedy covers (an upper bound on λ).
    GreedyBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionKind {
    Density,
    Doubling,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub center: usize,
    pub radius: f64,
    /// Packing points for μ, cover centers for λ.
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub kind: DimensionKind,
    pub constant: usize,
    /// `log₂(constant)`.
    pub dimension: f64,
    pub mode: ReportMode,
    pub witness: Witness,
}

/// Sorted distinct values of `{d(i,j)} ∪ {2·d(i,j)}` over pairs in `subset`.
///
/// Ball contents and half-radius relations only change at these values, so
/// scanning them is exhaustive for a finite sample.
pub fn candidate_radii(m: &SemimetricMatrix, subset: &[usize]) -> Vec<f64> {
    let mut radii = Vec::new();
    for (i, &a) in subset.iter().enumerate() {
        for &b in &subset[i + 1..] {
            let d = m.get(a, b);
            radii.push(d);
            radii.push(2.0 * d);
        }
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

fn ball(m: &SemimetricMatrix, subset: &[usize], center: usize, r: f64) -> Vec<usize> {
    subset.iter().copied().filter(|&y| m.get(center, y) < r).collect()
}

fn sorted_centers(subset: &[usize]) -> Vec<usize> {
    let mut c = subset.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

/// Scans every center and candidate radius, keeping the first strict maximum.
fn scan<F>(m: &SemimetricMatrix, subset: &[usize], kind: DimensionKind, per_ball: F) -> Result<DimensionReport, GeometryError>
where
    F: Fn(usize, f64, &[usize]) -> (Vec<usize>, bool),
{
    let centers = sorted_centers(subset);
    let first = *centers.first().ok_or(GeometryError::EmptySubset)?;
    let radii = candidate_radii(m, subset);
    let mut best = Witness {
        center: first,
        radius: radii.first().copied().unwrap_or(f64::INFINITY),
        points: vec![first],
    };
    let mut degraded = false;
    for &x in &centers {
        for &r in &radii {
            let members = ball(m, subset, x, r);
            if members.len() <= best.points.len() {
                continue;
            }
            let (points, greedy) = per_ball(x, r, &members);
            degraded |= greedy;
            if points.len() > best.points.len() {
                best = Witness { center: x, radius: r, points };
            }
        }
    }
    let constant = best.points.len();
    Ok(DimensionReport {
        kind,
        constant,
        dimension: (constant as f64).log2(),
        mode: if degraded { ReportMode::GreedyBound } else { ReportMode::Exact },
        witness: best,
    })
}

/// Density constant μ: the most points at mutual distance ≥ r/2 inside any
/// ball `B_r(x)`.
///
/// Balls above [`EXACT_THRESHOLD`] points, or [`DimensionMode::Greedy`], use
/// a greedy packing instead and flag the report as a lower bound.
pub fn density_constant(m: &SemimetricMatrix, subset: &[usize], mode: DimensionMode) -> Result<DimensionReport, GeometryError> {
    scan(m, subset, DimensionKind::Density, |_, r, members| {
        if mode == DimensionMode::Exact && members.len() <= EXACT_THRESHOLD {
            (max_packing(m, members, r / 2.0).expect("ball within threshold"), false)
        } else {
            let net = extract_net(m, members, r / 2.0).expect("positive radius");
            (net.members, true)
        }
    })
}

/// Doubling constant λ: the fewest `r/2`-balls centered at sample points
/// needed to cover any ball `B_r(x)` of the sample.
///
/// Exact mode runs an exhaustive set cover per ball up to
/// [`EXACT_THRESHOLD`] points; otherwise a greedy cover (an upper bound) is used.
pub fn doubling_constant(m: &SemimetricMatrix, subset: &[usize], mode: DimensionMode) -> Result<DimensionReport, GeometryError> {
    scan(m, subset, DimensionKind::Doubling, |_, r, members| {
        let (centers, sets) = cover_sets(m, subset, members, r / 2.0);
        let universe = if members.len() == 64 { u64::MAX } else { (1u64 << members.len()) - 1 };
        let greedy = greedy_set_cover(universe, &sets);
        if mode == DimensionMode::Exact && members.len() <= EXACT_THRESHOLD {
            let chosen = exact_set_cover(universe, &sets, greedy);
            (chosen.into_iter().map(|s| centers[s]).collect(), false)
        } else {
            (greedy.into_iter().map(|s| centers[s]).collect(), true)
        }
    })
}

/// Distinct coverage masks over `members` of the radius-`half` balls around
/// each subset point, with one center per mask (lowest index).
fn cover_sets(m: &SemimetricMatrix, subset: &[usize], members: &[usize], half: f64) -> (Vec<usize>, Vec<u64>) {
    let mut by_mask: BTreeMap<u64, usize> = BTreeMap::new();
    // Greedy fallback may see balls larger than 64 points; masks then cover
    // only the first 64 and the greedy count stays an upper bound on them.
    for &z in subset {
        let mask = members
            .iter()
            .take(64)
            .enumerate()
            .filter(|(_, &y)| m.get(z, y) < half)
            .fold(0u64, |acc, (i, _)| acc | (1 << i));
        if mask != 0 {
            by_mask
                .entry(mask)
                .and_modify(|c| *c = (*c).min(z))
                .or_insert(z);
        }
    }
    let mut pairs: Vec<(usize, u64)> = by_mask.into_iter().map(|(mask, c)| (c, mask)).collect();
    pairs.sort_unstable();
    pairs.into_iter().unzip()
}

fn greedy_set_cover(universe: u64, sets: &[u64]) -> Vec<usize> {
    let mut uncovered = universe;
    let mut chosen = Vec::new();
    while uncovered != 0 {
        let (best, _) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, (s & uncovered).count_ones()))
            .fold((usize::MAX, 0), |acc, (i, c)| if c > acc.1 { (i, c) } else { acc });
        if best == usize::MAX {
            break;
        }
        chosen.push(best);
        uncovered &= !sets[best];
    }
    chosen
}

fn exact_set_cover(universe: u64, sets: &[u64], upper: Vec<usize>) -> Vec<usize> {
    let mut best = upper;
    let mut chosen = Vec::new();
    set_cover_search(universe, sets, &mut chosen, &mut best);
    best
}

fn set_cover_search(uncovered: u64, sets: &[u64], chosen: &mut Vec<usize>, best: &mut Vec<usize>) {
    if uncovered == 0 {
        if chosen.len() < best.len() {
            *best = chosen.clone();
        }
        return;
    }
    let widest = sets.iter().map(|s| (s & uncovered).count_ones()).max().unwrap_or(0);
    if widest == 0 {
        return;
    }
    let needed = uncovered.count_ones().div_ceil(widest) as usize;
    if chosen.len() + needed >= best.len() {
        return;
    }
    // Branch on the uncovered element with the fewest covering sets.
    let element = bits(uncovered)
        .min_by_key(|&e| sets.iter().filter(|&&s| s & (1 << e) != 0).count())
        .expect("uncovered is non-empty");
    let mut options: Vec<usize> = (0..sets.len()).filter(|&i| sets[i] & (1 << element) != 0).collect();
    options.sort_by_key(|&i| std::cmp::Reverse((sets[i] & uncovered).count_ones()));
    for i in options {
        chosen.push(i);
        set_cover_search(uncovered & !sets[i], sets, chosen, best);
        chosen.pop();
    }
}
