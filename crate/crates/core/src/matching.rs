//! Maximum bipartite matching with deficiency certificates.
//!
//! [`max_matching`] runs the layered augmenting-path algorithm of Hopcroft
//! and Karp; adjacency lists are kept sorted and vertices are processed in
//! index order, so the returned matching is a deterministic function of the
//! graph. When the matching leaves left vertices exposed, [`hall_violator`]
//! produces a set `S` with `|N(S)| < |S|` witnessing that no perfect matching
//! exists. A tiny exponential [`brute_force_max_matching`] serves as an
//! independent oracle for the maximum size.

use std::collections::VecDeque;

use crate::MatchingError;

/// Left vertices above this count are refused by the brute-force oracle.
pub const BRUTE_FORCE_LEFT_LIMIT: usize = 10;

const UNMATCHED: usize = usize::MAX;

/// A bipartite graph on left vertices `0..left_size` and right vertices
/// `0..right_size`, with sorted, deduplicated adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    right_size: usize,
    adjacency: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// Builds a graph, sorting and deduplicating each adjacency list and
    /// rejecting neighbors outside `0..right_size`.
    pub fn new(
        right_size: usize,
        adjacency: Vec<Vec<usize>>,
    ) -> Result<Self, MatchingError> {
        let mut adjacency = adjacency;
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&v) = list.last() {
                if v >= right_size {
                    return Err(MatchingError::InvalidNeighbor {
                        left: u,
                        right: v,
                        right_size,
                    });
                }
            }
        }
        Ok(BipartiteGraph {
            right_size,
            adjacency,
        })
    }

    pub fn left_size(&self) -> usize {
        self.adjacency.len()
    }

    pub fn right_size(&self) -> usize {
        self.right_size
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }
}

/// A matching, stored as the right partner of each left vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    left_to_right: Vec<Option<usize>>,
    size: usize,
}

impl Matching {
    fn from_internal(match_l: Vec<usize>) -> Self {
        let size = match_l.iter().filter(|&&v| v != UNMATCHED).count();
        Matching {
            left_to_right: match_l
                .into_iter()
                .map(|v| (v != UNMATCHED).then_some(v))
                .collect(),
            size,
        }
    }

    /// Builds a matching from explicit `(left, right)` pairs, rejecting
    /// non-edges and repeated endpoints.
    pub fn from_pairs(
        graph: &BipartiteGraph,
        pairs: &[(usize, usize)],
    ) -> Result<Self, MatchingError> {
        let mut left_to_right = vec![None; graph.left_size()];
        let mut right_used = vec![false; graph.right_size()];
        for &(u, v) in pairs {
            if u >= graph.left_size() || v >= graph.right_size() || !graph.has_edge(u, v) {
                return Err(MatchingError::InvalidMatching { left: u, right: v });
            }
            if left_to_right[u].is_some() || right_used[v] {
                return Err(MatchingError::InvalidMatching { left: u, right: v });
            }
            left_to_right[u] = Some(v);
            right_used[v] = true;
        }
        Ok(Matching {
            size: pairs.len(),
            left_to_right,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn right_of(&self, u: usize) -> Option<usize> {
        self.left_to_right[u]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left_to_right
            .iter()
            .enumerate()
            .filter_map(|(u, v)| v.map(|v| (u, v)))
    }

    pub fn is_perfect_on_left(&self) -> bool {
        self.size == self.left_to_right.len()
    }
}

/// Maximum matching via Hopcroft-Karp. Deterministic: augmenting paths are
/// explored in sorted vertex order.
pub fn max_matching(graph: &BipartiteGraph) -> Matching {
    let left = graph.left_size();
    let nil = left;
    let mut match_l = vec![UNMATCHED; left];
    let mut match_r = vec![UNMATCHED; graph.right_size()];
    let mut dist = vec![usize::MAX; left + 1];

    loop {
        // BFS phase: layer left vertices by alternating-path depth, with the
        // sentinel `nil` standing in for any exposed right vertex.
        let mut queue = VecDeque::new();
        for u in 0..left {
            if match_l[u] == UNMATCHED {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        dist[nil] = usize::MAX;
        while let Some(u) = queue.pop_front() {
            if dist[u] < dist[nil] {
                for &v in graph.neighbors(u) {
                    let w = if match_r[v] == UNMATCHED { nil } else { match_r[v] };
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        if w != nil {
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        if dist[nil] == usize::MAX {
            break;
        }
        // DFS phase: harvest a maximal set of disjoint shortest augmenting paths.
        let mut augmented = false;
        for u in 0..left {
            if match_l[u] == UNMATCHED {
                augmented |= augment(graph, u, nil, &mut match_l, &mut match_r, &mut dist);
            }
        }
        if !augmented {
            break;
        }
    }
    Matching::from_internal(match_l)
}

fn augment(
    graph: &BipartiteGraph,
    u: usize,
    nil: usize,
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &v in graph.neighbors(u) {
        let w = if match_r[v] == UNMATCHED { nil } else { match_r[v] };
        if dist[w] == dist[u] + 1
            && (w == nil || augment(graph, w, nil, match_l, match_r, dist))
        {
            match_l[u] = v;
            match_r[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Exhaustive maximum-matching size for graphs with at most
/// [`BRUTE_FORCE_LEFT_LIMIT`] left vertices.
pub fn brute_force_max_matching(graph: &BipartiteGraph) -> Result<usize, MatchingError> {
    if graph.left_size() > BRUTE_FORCE_LEFT_LIMIT {
        return Err(MatchingError::TooLarge {
            left: graph.left_size(),
            limit: BRUTE_FORCE_LEFT_LIMIT,
        });
    }
    let mut used = vec![false; graph.right_size()];
    fn best_from(graph: &BipartiteGraph, u: usize, used: &mut [bool]) -> usize {
        if u == graph.left_size() {
            return 0;
        }
        let mut best = best_from(graph, u + 1, used);
        for &v in graph.neighbors(u) {
            if !used[v] {
                used[v] = true;
                best = best.max(1 + best_from(graph, u + 1, used));
                used[v] = false;
            }
        }
        best
    }
    Ok(best_from(graph, 0, &mut used))
}

/// A Hall-condition violator: a left set strictly larger than its
/// neighborhood.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallViolator {
    pub left_set: Vec<usize>,
    pub neighborhood: Vec<usize>,
}

/// For a maximum matching that exposes some left vertex, returns the set of
/// left vertices reachable from exposed ones along alternating paths; its
/// neighborhood is strictly smaller, certifying that no perfect matching
/// exists. Returns `Ok(None)` for a left-perfect matching and
/// `Err(NotMaximum)` if an augmenting path shows the matching is not maximum.
pub fn hall_violator(
    graph: &BipartiteGraph,
    matching: &Matching,
) -> Result<Option<HallViolator>, MatchingError> {
    for (u, v) in matching.pairs() {
        if !graph.has_edge(u, v) {
            return Err(MatchingError::InvalidMatching { left: u, right: v });
        }
    }
    if matching.is_perfect_on_left() {
        return Ok(None);
    }
    let mut left_of = vec![None; graph.right_size()];
    for (u, v) in matching.pairs() {
        left_of[v] = Some(u);
    }
    let mut left_seen = vec![false; graph.left_size()];
    let mut right_seen = vec![false; graph.right_size()];
    let mut queue = VecDeque::new();
    for u in 0..graph.left_size() {
        if matching.right_of(u).is_none() {
            left_seen[u] = true;
            queue.push_back(u);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if right_seen[v] {
                continue;
            }
            right_seen[v] = true;
            match left_of[v] {
                Some(u2) => {
                    if !left_seen[u2] {
                        left_seen[u2] = true;
                        queue.push_back(u2);
                    }
                }
                // An exposed right vertex reachable by an alternating path
                // means the matching can still be augmented.
                None => return Err(MatchingError::NotMaximum),
            }
        }
    }
    let left_set: Vec<usize> = (0..graph.left_size()).filter(|&u| left_seen[u]).collect();
    let neighborhood: Vec<usize> = (0..graph.right_size())
        .filter(|&v| right_seen[v])
        .collect();
    debug_assert!(neighborhood.len() < left_set.len());
    Ok(Some(HallViolator {
        left_set,
        neighborhood,
    }))
}
