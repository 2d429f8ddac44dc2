//! Lateration orderings: validation, discovery and attachment selection.
//!
//! An ordering is a permutation `perm` with `perm[p]` the vertex placed at
//! position `p`. The first `d+1` positions must form a clique and every later
//! vertex must be adjacent to at least `d+1` earlier ones.

use serde::Serialize;

use crate::framework::for_each_subset;
use crate::numerics::{self, Matrix, Scalar, Tolerances};

/// Dense adjacency for simple undirected graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![false; n * n];
        for &(a, b) in edges {
            adj[a * n + b] = true;
            adj[b * n + a] = true;
        }
        Self { n, adj }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.n + b]
    }

    fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &a)| vertices[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }
}

/// `N(k)`: predecessors of the vertex at position `k` adjacent to it, listed
/// in ordering sequence.
pub fn neighbors_before(graph: &Graph, perm: &[usize], k: usize) -> Vec<usize> {
    let v = perm[k];
    perm[..k].iter().copied().filter(|&u| graph.has_edge(u, v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderFailure {
    NotAPermutation,
    SeedNotClique,
    TooFewPredecessors,
    AnchorsNotFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderValidation {
    pub valid: bool,
    /// 1-based vertex where the first violation occurs.
    pub failing_vertex: Option<usize>,
    pub failure: Option<OrderFailure>,
    /// Every later vertex has exactly `d+1` earlier neighbours.
    pub exact_attachment: bool,
}

impl OrderValidation {
    fn fail(vertex: Option<usize>, failure: OrderFailure) -> Self {
        Self {
            valid: false,
            failing_vertex: vertex.map(|v| v + 1),
            failure: Some(failure),
            exact_attachment: false,
        }
    }
}

pub fn validate_lateration_order(graph: &Graph, perm: &[usize], d: usize) -> OrderValidation {
    let n = graph.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return OrderValidation::fail(None, OrderFailure::NotAPermutation);
    }
    let seed = (d + 1).min(n);
    for p in 1..seed {
        if let Some(&u) = perm[..p].iter().find(|&&u| !graph.has_edge(u, perm[p])) {
            let _ = u;
            return OrderValidation::fail(Some(perm[p]), OrderFailure::SeedNotClique);
        }
    }
    let mut exact = true;
    for k in seed..n {
        let count = neighbors_before(graph, perm, k).len();
        if count < d + 1 {
            return OrderValidation::fail(Some(perm[k]), OrderFailure::TooFewPredecessors);
        }
        exact &= count == d + 1;
    }
    OrderValidation {
        valid: true,
        failing_vertex: None,
        failure: None,
        exact_attachment: exact,
    }
}

/// Validation for anchored networks: the combined graph over `m + n` points
/// must be a lateration with the `m` anchors (indices `0..m`) placed first and
/// at least `d + 1` anchors.
pub fn validate_anchored_order(graph: &Graph, perm: &[usize], anchors: usize, d: usize) -> OrderValidation {
    if anchors < d + 1 {
        let first_sensor = perm.iter().copied().find(|&v| v >= anchors);
        return OrderValidation::fail(first_sensor, OrderFailure::AnchorsNotFirst);
    }
    if let Some(&v) = perm.iter().take(anchors).find(|&&v| v >= anchors) {
        return OrderValidation::fail(Some(v), OrderFailure::AnchorsNotFirst);
    }
    validate_lateration_order(graph, perm, d)
}

/// `N(k)` is a clique for every `k > d+1`.
pub fn is_dplus1_tree(graph: &Graph, perm: &[usize], d: usize) -> bool {
    (d + 1..perm.len()).all(|k| graph.is_clique(&neighbors_before(graph, perm, k)))
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("no lateration ordering of a spanning subgraph exists")]
    NotFound,
    #[error("ordering search exceeded its budget of {budget} states")]
    BudgetExhausted { budget: u64 },
}

/// Deterministic search: clique seeds in lexicographic order, each completed
/// greedily by the smallest eligible vertex. Eligibility only grows as the
/// placed set grows, so the greedy completion succeeds for a seed iff any
/// completion does; backtracking is needed over seeds alone.
pub fn find_lateration_order(graph: &Graph, d: usize, budget: u64) -> Result<Vec<usize>, SearchError> {
    let n = graph.len();
    if d + 1 > n {
        return Err(SearchError::NotFound);
    }
    let mut states = 0u64;
    let mut result = None;
    let mut exhausted = false;
    let mut seed = Vec::with_capacity(d + 1);
    enumerate_cliques(graph, d + 1, 0, &mut seed, &mut |seed| {
        states += 1;
        if states > budget {
            exhausted = true;
            return false;
        }
        match complete_greedily(graph, seed, d, &mut states, budget) {
            Some(Ok(perm)) => {
                result = Some(perm);
                false
            }
            Some(Err(())) => {
                exhausted = true;
                false
            }
            None => true,
        }
    });
    match result {
        Some(perm) => Ok(perm),
        None if exhausted => Err(SearchError::BudgetExhausted { budget }),
        None => Err(SearchError::NotFound),
    }
}

/// Anchored variant: the anchors `0..m` are the seed, sensors follow greedily.
pub fn find_anchored_order(graph: &Graph, anchors: usize, d: usize) -> Result<Vec<usize>, SearchError> {
    if anchors < d + 1 {
        return Err(SearchError::NotFound);
    }
    let seed: Vec<usize> = (0..anchors).collect();
    if !graph.is_clique(&seed) {
        return Err(SearchError::NotFound);
    }
    let mut states = 0;
    match complete_greedily(graph, &seed, d, &mut states, u64::MAX) {
        Some(Ok(perm)) => Ok(perm),
        _ => Err(SearchError::NotFound),
    }
}

/// `None` if stuck, `Some(Err)` on budget exhaustion.
fn complete_greedily(
    graph: &Graph,
    seed: &[usize],
    d: usize,
    states: &mut u64,
    budget: u64,
) -> Option<Result<Vec<usize>, ()>> {
    let n = graph.len();
    let mut placed = vec![false; n];
    let mut count = vec![0usize; n];
    let mut perm = Vec::with_capacity(n);
    let place = |v: usize, placed: &mut Vec<bool>, count: &mut Vec<usize>, perm: &mut Vec<usize>| {
        placed[v] = true;
        perm.push(v);
        for u in 0..n {
            if graph.has_edge(u, v) {
                count[u] += 1;
            }
        }
    };
    for &v in seed {
        place(v, &mut placed, &mut count, &mut perm);
    }
    while perm.len() < n {
        *states += 1;
        if *states > budget {
            return Some(Err(()));
        }
        let next = (0..n).find(|&v| !placed[v] && count[v] > d)?;
        place(next, &mut placed, &mut count, &mut perm);
    }
    Some(Ok(perm))
}

/// Visits `size`-cliques in lexicographic order until `f` returns false.
/// Returns false once stopped.
fn enumerate_cliques(
    graph: &Graph,
    size: usize,
    start: usize,
    current: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if current.len() == size {
        return f(current);
    }
    for v in start..graph.len() {
        if graph.len() - v < size - current.len() {
            break;
        }
        if current.iter().all(|&u| graph.has_edge(u, v)) {
            current.push(v);
            let go_on = enumerate_cliques(graph, size, v + 1, current, f);
            current.pop();
            if !go_on {
                return false;
            }
        }
    }
    true
}

/// The `d+1` predecessors used by each position `k >= d+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachments {
    /// `sets[k - (d+1)]` lists vertices in ordering sequence.
    sets: Vec<Vec<usize>>,
    seed: usize,
    /// Positions where a later subset had to be used because the
    /// lexicographically first one was singular.
    pub reselected: Vec<usize>,
}

impl Attachments {
    pub fn at(&self, k: usize) -> &[usize] {
        &self.sets[k - self.seed]
    }

    pub fn seed_size(&self) -> usize {
        self.seed
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.sets.iter().enumerate().map(move |(c, s)| (c + self.seed, s.as_slice()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no nonsingular attachment for vertex {} at position {}; first candidate subset {{{}}} is affinely dependent",
    vertex + 1, position + 1, subset.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(", "))]
pub struct SingularAttachment {
    pub position: usize,
    pub vertex: usize,
    pub subset: Vec<usize>,
}

impl SingularAttachment {
    pub fn subset_one_based(&self) -> Vec<usize> {
        self.subset.iter().map(|v| v + 1).collect()
    }
}

/// Picks, for each later vertex, the lexicographically first `(d+1)`-subset
/// of `N(k)` whose columns of `a` are independent. `perm` must be valid.
pub fn select_attachments<T: Scalar>(
    a: &Matrix<T>,
    graph: &Graph,
    perm: &[usize],
    tol: &Tolerances,
) -> Result<Attachments, SingularAttachment> {
    let d1 = a.rows();
    let mut sets = Vec::new();
    let mut reselected = Vec::new();
    for k in d1..perm.len() {
        let nbrs = neighbors_before(graph, perm, k);
        let mut chosen = None;
        let mut tried = 0usize;
        for_each_subset(nbrs.len(), d1, &mut |idx| {
            tried += 1;
            let cols: Vec<usize> = idx.iter().map(|&i| nbrs[i]).collect();
            if numerics::rank(&a.select_columns(&cols), tol) == d1 {
                chosen = Some(cols);
                return false;
            }
            true
        });
        match chosen {
            Some(cols) => {
                if tried > 1 {
                    log::warn!(
                        "vertex {}: first attachment subset is singular, using subset #{tried}",
                        perm[k] + 1
                    );
                    reselected.push(k);
                }
                sets.push(cols);
            }
            None => {
                return Err(SingularAttachment {
                    position: k,
                    vertex: perm[k],
                    subset: nbrs.into_iter().take(d1).collect(),
                })
            }
        }
    }
    Ok(Attachments {
        sets,
        seed: d1,
        reselected,
    })
}
