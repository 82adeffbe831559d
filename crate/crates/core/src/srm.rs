//! Structural risk minimization over candidate margins.
//!
//! Every oppositely labelled pair at distance ≤ γ conflicts at margin γ; the
//! fewest points whose removal leaves margin > γ form a minimum vertex cover
//! of that bipartite conflict graph. The exact curve tracks it through an
//! incrementally maintained maximum matching (König), the greedy curve through
//! a maximal matching whose endpoints are removed in pairs.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{q_bound, r_bound, BoundInput, BoundReport, CompressionSize, Formula};
use crate::classifier::{condense_at, condense_consistent, margin, LabeledSample, NNModel};
use crate::geometry::{density_constant, radius, DimensionMode};

/// Vertex limit of [`brute_force_min_cover`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SrmError {
    #[error("sample has a single class; no cross pairs")]
    EmptyCrossSet,
    #[error("matching is not maximum: augmenting path from {0}")]
    NotMaximum(usize),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("edge ({0}, {1}) does not join the two sides")]
    InvalidEdge(usize, usize),
    #[error("{size} vertices exceed the brute-force limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// An oppositely labelled pair with its distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossPair {
    pub distance: f64,
    pub pos: usize,
    pub neg: usize,
}

/// All positive/negative pairs of the active sample by ascending distance,
/// ties broken by (positive, negative) index.
pub fn cross_pairs_sorted(s: &LabeledSample) -> Result<Vec<CrossPair>, SrmError> {
    let pos = s.positives();
    let neg = s.negatives();
    if pos.is_empty() || neg.is_empty() {
        return Err(SrmError::EmptyCrossSet);
    }
    let m = s.matrix();
    let mut pairs: Vec<CrossPair> = pos
        .iter()
        .flat_map(|&p| neg.iter().map(move |&q| CrossPair { distance: m.get(p, q), pos: p, neg: q }))
        .collect();
    pairs.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.pos.cmp(&b.pos))
            .then(a.neg.cmp(&b.neg))
    });
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictEdge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
}

/// Bipartite conflict graph between positive (left) and negative (right)
/// sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub edges: Vec<ConflictEdge>,
    left_pos: HashMap<usize, usize>,
    right_pos: HashMap<usize, usize>,
}

impl ConflictGraph {
    pub fn new(left: Vec<usize>, right: Vec<usize>, edges: Vec<ConflictEdge>) -> Result<Self, SrmError> {
        let left_pos: HashMap<usize, usize> = left.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let right_pos: HashMap<usize, usize> = right.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if left_pos.len() != left.len() || right_pos.len() != right.len() || left.iter().any(|v| right_pos.contains_key(v)) {
            return Err(SrmError::InvalidInput("vertex sides must be disjoint and duplicate-free".into()));
        }
        if let Some(e) = edges
            .iter()
            .find(|e| !left_pos.contains_key(&e.left) || !right_pos.contains_key(&e.right))
        {
            return Err(SrmError::InvalidEdge(e.left, e.right));
        }
        Ok(ConflictGraph { left, right, edges, left_pos, right_pos })
    }

    /// Graph of the sample's classes whose edges are the pairs with
    /// distance ≤ `gamma`; `pairs` must be sorted ascending.
    pub fn at_threshold(s: &LabeledSample, pairs: &[CrossPair], gamma: f64) -> Self {
        let cut = pairs.partition_point(|p| p.distance <= gamma);
        let edges = pairs[..cut]
            .iter()
            .map(|p| ConflictEdge { left: p.pos, right: p.neg, distance: p.distance })
            .collect();
        ConflictGraph::new(s.positives(), s.negatives(), edges).expect("cross pairs join the two classes")
    }

    pub fn vertex_count(&self) -> usize {
        self.left.len() + self.right.len()
    }

    fn local_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.left.len()];
        for e in &self.edges {
            adj[self.left_pos[&e.left]].push(self.right_pos[&e.right]);
        }
        adj
    }
}

/// Matched (left, right) sample-index pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Hopcroft–Karp maximum matching, computed from scratch.
pub fn maximum_matching(g: &ConflictGraph) -> Matching {
    let adj = g.local_adjacency();
    let (nl, nr) = (g.left.len(), g.right.len());
    let mut mate_l = vec![usize::MAX; nl];
    let mut mate_r = vec![usize::MAX; nr];
    let mut dist = vec![usize::MAX; nl];
    loop {
        // Layer the free left vertices and everything reachable by alternating paths.
        let mut queue = VecDeque::new();
        for u in 0..nl {
            if mate_l[u] == usize::MAX {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = mate_r[v];
                if w == usize::MAX {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        for u in 0..nl {
            if mate_l[u] == usize::MAX {
                augment_layered(u, &adj, &mut mate_l, &mut mate_r, &mut dist);
            }
        }
    }
    Matching {
        pairs: (0..nl)
            .filter(|&u| mate_l[u] != usize::MAX)
            .map(|u| (g.left[u], g.right[mate_l[u]]))
            .collect(),
    }
}

fn augment_layered(u: usize, adj: &[Vec<usize>], mate_l: &mut [usize], mate_r: &mut [usize], dist: &mut [usize]) -> bool {
    for &v in &adj[u] {
        let w = mate_r[v];
        let ok = w == usize::MAX || (dist[w] == dist[u] + 1 && augment_layered(w, adj, mate_l, mate_r, dist));
        if ok {
            mate_l[u] = v;
            mate_r[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Maximum matching maintained under edge insertions.
///
/// After each insertion at most one augmenting path can appear, and it must
/// use the new edge, so one search from each endpoint restores maximality.
#[derive(Debug, Clone)]
pub struct IncrementalMatching {
    adj_left: Vec<Vec<usize>>,
    adj_right: Vec<Vec<usize>>,
    mate_left: Vec<Option<usize>>,
    mate_right: Vec<Option<usize>>,
    size: usize,
}

impl IncrementalMatching {
    pub fn new(left: usize, right: usize) -> Self {
        IncrementalMatching {
            adj_left: vec![Vec::new(); left],
            adj_right: vec![Vec::new(); right],
            mate_left: vec![None; left],
            mate_right: vec![None; right],
            size: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Matched (left, right) local index pairs.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.mate_left
            .iter()
            .enumerate()
            .filter_map(|(l, m)| m.map(|r| (l, r)))
            .collect()
    }

    /// Adds edge (l, r); returns whether the matching grew.
    pub fn insert_edge(&mut self, l: usize, r: usize) -> bool {
        self.adj_left[l].push(r);
        self.adj_right[r].push(l);
        if self.size == self.mate_left.len().min(self.mate_right.len()) {
            return false;
        }
        let Some(left_chain) = self.chain_to_free_left(l) else {
            return false;
        };
        let Some(right_chain) = self.chain_to_free_right(r) else {
            return false;
        };
        // left_chain = [l, x1, .., free]: x_{i+1} takes the old mate of x_i.
        let old_left: Vec<usize> = left_chain[..left_chain.len() - 1]
            .iter()
            .map(|&x| self.mate_left[x].expect("interior chain vertices are matched"))
            .collect();
        let old_right: Vec<usize> = right_chain[..right_chain.len() - 1]
            .iter()
            .map(|&y| self.mate_right[y].expect("interior chain vertices are matched"))
            .collect();
        for (i, &mate) in old_left.iter().enumerate() {
            let x = left_chain[i + 1];
            self.mate_left[x] = Some(mate);
            self.mate_right[mate] = Some(x);
        }
        for (j, &mate) in old_right.iter().enumerate() {
            let y = right_chain[j + 1];
            self.mate_right[y] = Some(mate);
            self.mate_left[mate] = Some(y);
        }
        self.mate_left[l] = Some(r);
        self.mate_right[r] = Some(l);
        self.size += 1;
        true
    }

    /// Left vertices of an alternating path ending at `start` from a free left vertex.
    fn chain_to_free_left(&self, start: usize) -> Option<Vec<usize>> {
        if self.mate_left[start].is_none() {
            return Some(vec![start]);
        }
        let mut parent: HashMap<usize, usize> = HashMap::from([(start, start)]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let rx = self.mate_left[x].expect("queued left vertices are matched");
            for &w in &self.adj_right[rx] {
                if parent.contains_key(&w) {
                    continue;
                }
                parent.insert(w, x);
                if self.mate_left[w].is_none() {
                    return Some(unwind(&parent, w, start));
                }
                queue.push_back(w);
            }
        }
        None
    }

    /// Right vertices of an alternating path from `start` to a free right vertex.
    fn chain_to_free_right(&self, start: usize) -> Option<Vec<usize>> {
        if self.mate_right[start].is_none() {
            return Some(vec![start]);
        }
        let mut parent: HashMap<usize, usize> = HashMap::from([(start, start)]);
        let mut queue = VecDeque::from([start]);
        while let Some(y) = queue.pop_front() {
            let ly = self.mate_right[y].expect("queued right vertices are matched");
            for &r2 in &self.adj_left[ly] {
                if parent.contains_key(&r2) {
                    continue;
                }
                parent.insert(r2, y);
                if self.mate_right[r2].is_none() {
                    return Some(unwind(&parent, r2, start));
                }
                queue.push_back(r2);
            }
        }
        None
    }
}

/// Path `[start, .., end]` from a parent map rooted at `start`.
fn unwind(parent: &HashMap<usize, usize>, end: usize, start: usize) -> Vec<usize> {
    let mut chain = vec![end];
    let mut cur = end;
    while cur != start {
        cur = parent[&cur];
        chain.push(cur);
    }
    chain.reverse();
    chain
}

/// König's construction: with Z the vertices reachable from unmatched left
/// vertices along alternating paths, `(L \ Z) ∪ (R ∩ Z)` is a minimum cover.
pub fn vertex_cover_from_matching(g: &ConflictGraph, matching: &Matching) -> Result<BTreeSet<usize>, SrmError> {
    let (nl, nr) = (g.left.len(), g.right.len());
    let mut mate_l = vec![usize::MAX; nl];
    let mut mate_r = vec![usize::MAX; nr];
    let adj = g.local_adjacency();
    for &(a, b) in &matching.pairs {
        let (Some(&u), Some(&v)) = (g.left_pos.get(&a), g.right_pos.get(&b)) else {
            return Err(SrmError::InvalidMatching(format!("({a}, {b}) is not a left/right pair")));
        };
        if !adj[u].contains(&v) {
            return Err(SrmError::InvalidMatching(format!("({a}, {b}) is not an edge")));
        }
        if mate_l[u] != usize::MAX || mate_r[v] != usize::MAX {
            return Err(SrmError::InvalidMatching(format!("vertex of ({a}, {b}) matched twice")));
        }
        mate_l[u] = v;
        mate_r[v] = u;
    }
    let mut seen_l = vec![false; nl];
    let mut seen_r = vec![false; nr];
    let mut queue: VecDeque<usize> = (0..nl).filter(|&u| mate_l[u] == usize::MAX).collect();
    for &u in &queue {
        seen_l[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if v == mate_l[u] || seen_r[v] {
                continue;
            }
            seen_r[v] = true;
            let w = mate_r[v];
            if w == usize::MAX {
                return Err(SrmError::NotMaximum(g.right[v]));
            }
            if !seen_l[w] {
                seen_l[w] = true;
                queue.push_back(w);
            }
        }
    }
    let cover = (0..nl)
        .filter(|&u| !seen_l[u])
        .map(|u| g.left[u])
        .chain((0..nr).filter(|&v| seen_r[v]).map(|v| g.right[v]))
        .collect();
    Ok(cover)
}

/// Exhaustive minimum vertex cover for graphs of at most
/// [`BRUTE_FORCE_LIMIT`] vertices.
///
/// Enumerates every subset of the smaller side; the rest of the cover is then
/// forced to be the neighbourhood of the unchosen vertices.
pub fn brute_force_min_cover(g: &ConflictGraph) -> Result<BTreeSet<usize>, SrmError> {
    let size = g.vertex_count();
    if size > BRUTE_FORCE_LIMIT {
        return Err(SrmError::TooLarge { size, limit: BRUTE_FORCE_LIMIT });
    }
    let flip = g.left.len() > g.right.len();
    let (small, large) = if flip { (&g.right, &g.left) } else { (&g.left, &g.right) };
    let small_pos: HashMap<usize, usize> = small.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let large_pos: HashMap<usize, usize> = large.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut nbr = vec![0u32; small.len()];
    for e in &g.edges {
        let (a, b) = if flip { (e.right, e.left) } else { (e.left, e.right) };
        nbr[small_pos[&a]] |= 1 << large_pos[&b];
    }
    let mut best: Option<(u32, u32, u32)> = None;
    for chosen in 0u32..(1 << small.len()) {
        let forced = (0..small.len())
            .filter(|&i| chosen & (1 << i) == 0)
            .fold(0u32, |acc, i| acc | nbr[i]);
        let cost = chosen.count_ones() + forced.count_ones();
        if best.is_none_or(|b| cost < b.0) {
            best = Some((cost, chosen, forced));
        }
    }
    let (_, chosen, forced) = best.expect("at least the empty choice is enumerated");
    Ok((0..small.len())
        .filter(|&i| chosen & (1 << i) != 0)
        .map(|i| small[i])
        .chain((0..large.len()).filter(|&j| forced & (1 << j) != 0).map(|j| large[j]))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMode {
    /// Minimum vertex cover through maximum matching.
    Exact,
    /// Both endpoints of a greedy maximal matching; within a factor 2.
    Greedy2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Conflicts are the pairs at distance ≤ gamma.
    pub gamma: f64,
    /// Points removed to leave margin > gamma.
    pub k: usize,
    pub mode: CoverMode,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CoverCurve {
    pub points: Vec<CurvePoint>,
}

/// Indices where the distance changes, as `(end, distance)` of each run.
fn distance_runs(pairs: &[CrossPair]) -> impl Iterator<Item = (usize, f64)> + '_ {
    (0..pairs.len())
        .filter(move |&i| i + 1 == pairs.len() || pairs[i + 1].distance != pairs[i].distance)
        .map(move |i| (i + 1, pairs[i].distance))
}

/// Minimum cover size at every distinct cross distance.
pub fn exact_cover_curve(s: &LabeledSample) -> Result<CoverCurve, SrmError> {
    let pairs = cross_pairs_sorted(s)?;
    Ok(exact_curve_from_pairs(s, &pairs))
}

fn exact_curve_from_pairs(s: &LabeledSample, pairs: &[CrossPair]) -> CoverCurve {
    let left: HashMap<usize, usize> = s.positives().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    let right: HashMap<usize, usize> = s.negatives().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut matching = IncrementalMatching::new(left.len(), right.len());
    let mut points = Vec::new();
    let mut next = 0;
    for (end, gamma) in distance_runs(pairs) {
        for p in &pairs[next..end] {
            matching.insert_edge(left[&p.pos], right[&p.neg]);
        }
        next = end;
        points.push(CurvePoint { gamma, k: matching.size(), mode: CoverMode::Exact });
    }
    CoverCurve { points }
}

/// Greedy removal count at every distinct cross distance.
pub fn greedy_cover_curve(s: &LabeledSample) -> Result<CoverCurve, SrmError> {
    let pairs = cross_pairs_sorted(s)?;
    Ok(greedy_curve_from_pairs(&pairs))
}

fn greedy_curve_from_pairs(pairs: &[CrossPair]) -> CoverCurve {
    let mut removed: BTreeSet<usize> = BTreeSet::new();
    let mut points = Vec::new();
    let mut next = 0;
    for (end, gamma) in distance_runs(pairs) {
        for p in &pairs[next..end] {
            if !removed.contains(&p.pos) && !removed.contains(&p.neg) {
                removed.insert(p.pos);
                removed.insert(p.neg);
            }
        }
        next = end;
        points.push(CurvePoint { gamma, k: removed.len(), mode: CoverMode::Greedy2 });
    }
    CoverCurve { points }
}

/// Greedy 2-approximate cover: scans the edges in order and takes both
/// endpoints of every edge not yet covered.
pub fn greedy_cover(g: &ConflictGraph) -> BTreeSet<usize> {
    let mut cover = BTreeSet::new();
    for e in &g.edges {
        if !cover.contains(&e.left) && !cover.contains(&e.right) {
            cover.insert(e.left);
            cover.insert(e.right);
        }
    }
    cover
}

/// Points in the order the greedy scan removes them; the removal at any
/// threshold is a prefix of this list.
fn greedy_removal_order(pairs: &[CrossPair]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for p in pairs {
        if !seen.contains(&p.pos) && !seen.contains(&p.neg) {
            seen.insert(p.pos);
            seen.insert(p.neg);
            order.extend([p.pos, p.neg]);
        }
    }
    order
}

/// König cover of every threshold prefix, as (threshold where it first holds,
/// cover). The cover is grown from unmatched positives by alternating
/// reachability; that set does not depend on which maximum matching seeds
/// it, so these equal covers built from a from-scratch matching. Between
/// augmentations the matching is fixed and reachability only grows, so it is
/// extended edge by edge and rebuilt only when the matching grows.
fn exact_removals(s: &LabeledSample, pairs: &[CrossPair]) -> Vec<(f64, BTreeSet<usize>)> {
    let pos = s.positives();
    let neg = s.negatives();
    let left: HashMap<usize, usize> = pos.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let right: HashMap<usize, usize> = neg.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut m = IncrementalMatching::new(pos.len(), neg.len());
    let mut reach = Reach { seen_l: vec![true; pos.len()], seen_r: vec![false; neg.len()] };
    let mut versions = vec![(f64::NEG_INFINITY, BTreeSet::new())];
    let mut next = 0;
    for (end, gamma) in distance_runs(pairs) {
        let mut grew = false;
        let mut changed = false;
        for p in &pairs[next..end] {
            let (u, v) = (left[&p.pos], right[&p.neg]);
            grew |= m.insert_edge(u, v);
            if !grew && reach.seen_l[u] && !reach.seen_r[v] {
                reach.extend_from_right(&m, v);
                changed = true;
            }
        }
        next = end;
        if grew {
            reach = Reach::from_free_left(&m);
        }
        if grew || changed {
            let cover = (0..pos.len())
                .filter(|&u| !reach.seen_l[u])
                .map(|u| pos[u])
                .chain((0..neg.len()).filter(|&v| reach.seen_r[v]).map(|v| neg[v]))
                .collect();
            versions.push((gamma, cover));
        }
    }
    versions
}

struct Reach {
    seen_l: Vec<bool>,
    seen_r: Vec<bool>,
}

impl Reach {
    fn from_free_left(m: &IncrementalMatching) -> Self {
        let mut reach = Reach { seen_l: vec![false; m.mate_left.len()], seen_r: vec![false; m.mate_right.len()] };
        let free: Vec<usize> = (0..m.mate_left.len()).filter(|&u| m.mate_left[u].is_none()).collect();
        for &u in &free {
            reach.seen_l[u] = true;
        }
        reach.search(m, free);
        reach
    }

    fn extend_from_right(&mut self, m: &IncrementalMatching, v: usize) {
        self.seen_r[v] = true;
        let w = m.mate_right[v].expect("matching is maximum");
        if !self.seen_l[w] {
            self.seen_l[w] = true;
            self.search(m, vec![w]);
        }
    }

    fn search(&mut self, m: &IncrementalMatching, mut stack: Vec<usize>) {
        while let Some(u) = stack.pop() {
            for &v in &m.adj_left[u] {
                if self.seen_r[v] || m.mate_left[u] == Some(v) {
                    continue;
                }
                self.seen_r[v] = true;
                let w = m.mate_right[v].expect("matching is maximum");
                if !self.seen_l[w] {
                    self.seen_l[w] = true;
                    stack.push(w);
                }
            }
        }
    }
}

/// How [`srm_select`] sizes the compression set of each candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeSource {
    /// Cardinality of the extracted net.
    #[default]
    ActualNetSize,
    /// `μ(S')^⌈log₂(2·rad(S')/γ)⌉` with μ computed on the survivors.
    MuFormula,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrmSolution {
    pub k_star: usize,
    /// Conflicts at distance ≤ gamma_star were removed; zero when nothing was.
    pub gamma_star: f64,
    /// Margin of the surviving sample, strictly above `gamma_star`.
    pub margin: f64,
    pub removed: Vec<usize>,
    #[serde(skip)]
    pub model: NNModel,
    pub bound: BoundReport,
    pub curve: CoverCurve,
    pub mode: CoverMode,
    /// No candidate was within the bound's regime; the consistent model was returned.
    pub fallback: bool,
}

struct Candidate {
    gamma: f64,
    k: usize,
    lower: f64,
}

struct Evaluated {
    gamma: f64,
    k: usize,
    margin: f64,
    removed: BTreeSet<usize>,
    model: NNModel,
    bound: BoundReport,
}

/// Margin, model and bound of the points surviving `removed`; `None` when
/// the bound is out of regime.
fn evaluate(
    s: &LabeledSample,
    pairs: &[CrossPair],
    removed: &BTreeSet<usize>,
    k: usize,
    source: SizeSource,
    delta: f64,
) -> Option<(f64, NNModel, BoundReport)> {
    let survivors: Vec<usize> = s.active().iter().copied().filter(|i| !removed.contains(i)).collect();
    let achieved = pairs
        .iter()
        .find(|p| !removed.contains(&p.pos) && !removed.contains(&p.neg))
        .map_or(f64::INFINITY, |p| p.distance);
    debug_assert_eq!(achieved, margin(s, &survivors));
    let model = condense_at(s, &survivors, achieved);
    let size = match source {
        SizeSource::ActualNetSize => CompressionSize::ActualNetSize(model.prototypes.len()),
        SizeSource::MuFormula => {
            let mu = density_constant(s.matrix(), &survivors, DimensionMode::Exact)
                .expect("survivors are non-empty")
                .constant;
            CompressionSize::MuFormula(mu)
        }
    };
    let rad = radius(s.matrix(), &survivors).expect("survivors are non-empty").0;
    let bound = r_bound(s.len(), k, achieved, rad, size, delta).ok()?;
    Some((achieved, model, bound))
}

/// Lower value wins; ties prefer the larger γ, then the smaller k.
fn better(a: &Evaluated, b: &Evaluated) -> bool {
    match a.bound.unclamped.total_cmp(&b.bound.unclamped) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => match a.gamma.total_cmp(&b.gamma) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => a.k < b.k,
        },
    }
}

/// Picks the (k, γ) trade-off minimizing the margin bound and trains the
/// condensed classifier on the surviving points.
pub fn srm_select(s: &LabeledSample, delta: f64, mode: CoverMode) -> Result<SrmSolution, SrmError> {
    srm_select_with(s, delta, mode, SizeSource::ActualNetSize)
}

pub fn srm_select_with(s: &LabeledSample, delta: f64, mode: CoverMode, source: SizeSource) -> Result<SrmSolution, SrmError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SrmError::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    let pairs = cross_pairs_sorted(s)?;
    let n = s.len();
    let curve = match mode {
        CoverMode::Exact => exact_curve_from_pairs(s, &pairs),
        CoverMode::Greedy2 => greedy_curve_from_pairs(&pairs),
    };

    // Q is nondecreasing in d, so Q(1, k/n) lower-bounds every candidate.
    let mut candidates: Vec<Candidate> = std::iter::once((0.0, 0))
        .chain(curve.points.iter().map(|p| (p.gamma, p.k)))
        .filter(|&(_, k)| 2 * k <= n)
        .filter_map(|(gamma, k)| {
            let lower = q_bound(n, 1, k as f64 / n as f64, delta).ok()?.unclamped;
            Some(Candidate { gamma, k, lower })
        })
        .collect();
    candidates.sort_by(|a, b| a.lower.total_cmp(&b.lower));

    let greedy_order = greedy_removal_order(&pairs);
    let covers = match mode {
        CoverMode::Exact => exact_removals(s, &pairs),
        CoverMode::Greedy2 => Vec::new(),
    };
    let mut cache: HashMap<BTreeSet<usize>, Option<(f64, NNModel, BoundReport)>> = HashMap::new();
    let mut best: Option<Evaluated> = None;
    for c in &candidates {
        if best.as_ref().is_some_and(|b| c.lower > b.bound.unclamped) {
            break;
        }
        let removed: BTreeSet<usize> = match mode {
            _ if c.k == 0 => BTreeSet::new(),
            CoverMode::Exact => covers[covers.partition_point(|v| v.0 <= c.gamma) - 1].1.clone(),
            CoverMode::Greedy2 => greedy_order[..c.k].iter().copied().collect(),
        };
        debug_assert_eq!(removed.len(), c.k);
        let evaluated = match cache.get(&removed) {
            Some(hit) => hit.clone(),
            None => {
                let fresh = evaluate(s, &pairs, &removed, c.k, source, delta);
                cache.insert(removed.clone(), fresh.clone());
                fresh
            }
        };
        let Some((achieved, model, bound)) = evaluated else {
            continue;
        };
        if achieved <= c.gamma {
            return Err(SrmError::InvalidInput(format!(
                "removal at {} left margin {achieved}",
                c.gamma
            )));
        }
        let ev = Evaluated { gamma: c.gamma, k: c.k, margin: achieved, removed, model, bound };
        if best.as_ref().is_none_or(|b| better(&ev, b)) {
            best = Some(ev);
        }
    }

    Ok(match best {
        Some(ev) => SrmSolution {
            k_star: ev.k,
            gamma_star: ev.gamma,
            margin: ev.margin,
            removed: ev.removed.into_iter().collect(),
            model: ev.model,
            bound: ev.bound,
            curve,
            mode,
            fallback: false,
        },
        None => {
            let model = condense_consistent(s);
            let d = model.prototypes.len();
            let bound = q_bound(n, d, 0.0, delta).unwrap_or_else(|_| {
                BoundReport::trivial(
                    Formula::Fast,
                    BoundInput { n, d, eps: 0.0, delta, k: Some(0), gamma: None },
                )
            });
            SrmSolution {
                k_star: 0,
                gamma_star: 0.0,
                margin: model.margin_used,
                removed: Vec::new(),
                model,
                bound,
                curve,
                mode,
                fallback: true,
            }
        }
    })
}
