//! Bipartite matchings over index-labelled nodes.
//!
//! Left nodes are `0..left`, right nodes `0..right`. Adjacency lists are kept
//! sorted so that every search visits neighbours in index order and the
//! resulting matchings are deterministic.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("edge ({0}, {1}) is not in the graph")]
    UnknownEdge(usize, usize),
    #[error("edge set is not a matching: node {side} {node} is used twice")]
    NotAMatching { side: &'static str, node: usize },
    #[error("matching does not cover {side} node {node}")]
    NotCovering { side: &'static str, node: usize },
    #[error("component starting at {side} node {node} cannot be matched")]
    Unmatchable { side: &'static str, node: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut sets = vec![BTreeSet::new(); left];
        for (l, r) in edges {
            assert!(l < left && r < right, "edge ({l}, {r}) out of range");
            sets[l].insert(r);
        }
        BipartiteGraph {
            left,
            right,
            adj: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn left_len(&self) -> usize {
        self.left
    }

    pub fn right_len(&self) -> usize {
        self.right
    }

    pub fn has_edge(&self, l: usize, r: usize) -> bool {
        l < self.left && self.adj[l].binary_search(&r).is_ok()
    }

    pub fn neighbours(&self, l: usize) -> &[usize] {
        &self.adj[l]
    }

    pub fn transposed(&self) -> BipartiteGraph {
        BipartiteGraph::new(
            self.right,
            self.left,
            self.adj
                .iter()
                .enumerate()
                .flat_map(|(l, rs)| rs.iter().map(move |&r| (r, l))),
        )
    }
}

/// A set of pairwise non-adjacent edges `(left, right)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    edges: BTreeSet<(usize, usize)>,
}

impl Matching {
    pub fn from_edges(
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, MatchingError> {
        let edges: BTreeSet<_> = edges.into_iter().collect();
        let mut ls = BTreeSet::new();
        let mut rs = BTreeSet::new();
        for &(l, r) in &edges {
            if !ls.insert(l) {
                return Err(MatchingError::NotAMatching {
                    side: "left",
                    node: l,
                });
            }
            if !rs.insert(r) {
                return Err(MatchingError::NotAMatching {
                    side: "right",
                    node: r,
                });
            }
        }
        Ok(Matching { edges })
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn covers_left(&self, l: usize) -> bool {
        self.edges.iter().any(|&(a, _)| a == l)
    }

    pub fn covers_right(&self, r: usize) -> bool {
        self.edges.iter().any(|&(_, b)| b == r)
    }

    fn transposed(&self) -> Matching {
        Matching {
            edges: self.edges.iter().map(|&(l, r)| (r, l)).collect(),
        }
    }
}

/// Maximum-cardinality matching by augmenting paths (Kuhn's algorithm).
pub fn max_bipartite_matching(graph: &BipartiteGraph) -> Matching {
    let all: Vec<usize> = (0..graph.left).collect();
    max_matching_from(graph, &all)
}

/// Maximum matching in which only the listed left nodes may be matched.
pub fn max_matching_from(graph: &BipartiteGraph, left_nodes: &[usize]) -> Matching {
    let mut owner: Vec<Option<usize>> = vec![None; graph.right];
    for &l in left_nodes {
        let mut visited = vec![false; graph.right];
        augment(graph, l, &mut visited, &mut owner);
    }
    Matching {
        edges: owner
            .iter()
            .enumerate()
            .filter_map(|(r, l)| l.map(|l| (l, r)))
            .collect(),
    }
}

fn augment(
    graph: &BipartiteGraph,
    l: usize,
    visited: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for &r in &graph.adj[l] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        let free = match owner[r] {
            None => true,
            Some(other) => augment(graph, other, visited, owner),
        };
        if free {
            owner[r] = Some(l);
            return true;
        }
    }
    false
}

/// Maximum matching in which only the listed right nodes may be matched.
pub fn max_matching_into(graph: &BipartiteGraph, right_nodes: &[usize]) -> Matching {
    max_matching_from(&graph.transposed(), right_nodes).transposed()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    L(usize),
    R(usize),
}

/// Merges a matching covering `left_cover` with one covering `right_cover`
/// into a single matching covering both.
///
/// The union of the two matchings splits into shared edges, alternating
/// cycles and alternating paths; each component is matched on its own. An
/// alternating path with an odd number of nodes has one end outside the two
/// cover sets, and that end is the one left unmatched.
pub fn combine_matchings(
    graph: &BipartiteGraph,
    m_left: &Matching,
    left_cover: &[usize],
    m_right: &Matching,
    right_cover: &[usize],
) -> Result<Matching, MatchingError> {
    for m in [m_left, m_right] {
        for (l, r) in m.edges() {
            if !graph.has_edge(l, r) {
                return Err(MatchingError::UnknownEdge(l, r));
            }
        }
    }
    for &l in left_cover {
        if !m_left.covers_left(l) {
            return Err(MatchingError::NotCovering {
                side: "left",
                node: l,
            });
        }
    }
    for &r in right_cover {
        if !m_right.covers_right(r) {
            return Err(MatchingError::NotCovering {
                side: "right",
                node: r,
            });
        }
    }
    let required: BTreeSet<Node> = left_cover
        .iter()
        .map(|&l| Node::L(l))
        .chain(right_cover.iter().map(|&r| Node::R(r)))
        .collect();

    let mut adj: BTreeMap<Node, BTreeSet<Node>> = BTreeMap::new();
    for (l, r) in m_left.edges().chain(m_right.edges()) {
        adj.entry(Node::L(l)).or_default().insert(Node::R(r));
        adj.entry(Node::R(r)).or_default().insert(Node::L(l));
    }

    let mut result = BTreeSet::new();
    let mut seen: BTreeSet<Node> = BTreeSet::new();
    // Paths first (start from degree-1 nodes), then whatever remains is a cycle.
    let starts: Vec<Node> = adj
        .iter()
        .filter(|(_, ns)| ns.len() == 1)
        .map(|(n, _)| *n)
        .chain(adj.keys().copied())
        .collect();
    for start in starts {
        if seen.contains(&start) {
            continue;
        }
        let is_path = adj[&start].len() == 1;
        let mut walk = vec![start];
        seen.insert(start);
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|n| !seen.contains(n));
            match next {
                Some(n) => {
                    seen.insert(n);
                    walk.push(n);
                    cur = n;
                }
                None => break,
            }
        }
        let pick_from = if is_path && walk.len() % 2 == 1 {
            let first = walk[0];
            let last = *walk.last().expect("non-empty walk");
            if !required.contains(&first) {
                1
            } else if !required.contains(&last) {
                0
            } else {
                return Err(match first {
                    Node::L(l) => MatchingError::Unmatchable {
                        side: "left",
                        node: l,
                    },
                    Node::R(r) => MatchingError::Unmatchable {
                        side: "right",
                        node: r,
                    },
                });
            }
        } else {
            0
        };
        let mut i = pick_from;
        while i + 1 < walk.len() {
            result.insert(match (walk[i], walk[i + 1]) {
                (Node::L(l), Node::R(r)) | (Node::R(r), Node::L(l)) => (l, r),
                _ => unreachable!("bipartite walk alternates sides"),
            });
            i += 2;
        }
    }
    Matching::from_edges(result)
}
