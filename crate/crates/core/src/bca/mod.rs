//! Blind counter automata with data: a finite automaton whose edges add
//! data vectors, renamed by an arbitrary injection at every step, to an
//! unconstrained `Z^k`-valued data store.
//!
//! Reachability reduces to expressibility. A run's edge multiset is a walk
//! `q0 → qf`; stripping closed sub-walks that revisit only already-visited
//! states leaves a short skeleton walk, and the stripped part is a balanced
//! edge multiset over the skeleton's states. Balance is encoded by
//! augmenting every label with `e_q − e_p` on `|Q|` auxiliary coordinates at
//! one extra data value and requiring those coordinates to sum to zero.

mod oracle;
mod parse;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::expressibility::{
    is_permutation_sum_with_degrees, DegreeMode, ExpressibilityError, ExpressibilityInstance,
    PermutationSumWitness,
};
use crate::linalg::SolverStats;
use crate::text::ParseError;
use crate::vector::{fresh_values, DataValue, DataVector, FiniteInjection, Tuple, VectorError};

pub use oracle::{bfs_oracle, random_bca, BcaShape, OracleBounds, OracleVerdict};

/// Skeleton enumeration stops after this many distinct skeletons by default.
pub const DEFAULT_SKELETON_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BcaError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("an automaton needs at least one state")]
    NoStates,
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state index {0}")]
    UnknownState(usize),
    #[error("unknown edge index {0}")]
    UnknownEdge(usize),
    #[error("edge {edge} starts in state {expected}, the configuration is in state {found}")]
    EdgeMismatch {
        edge: usize,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("explored more than {0} configurations")]
    StateCapExceeded(usize),
    #[error("reconstructed run does not reach the target configuration")]
    RunMismatch,
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Expressibility(#[from] ExpressibilityError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: DataVector,
}

/// States, and labelled edges identified by their index (parallel edges allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bca {
    dim: usize,
    states: Vec<String>,
    edges: Vec<Edge>,
}

impl Bca {
    pub fn new(dim: usize, states: Vec<String>) -> Result<Self, BcaError> {
        if dim == 0 {
            return Err(VectorError::ZeroDimension.into());
        }
        if states.is_empty() {
            return Err(BcaError::NoStates);
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s) {
                return Err(BcaError::DuplicateState(s.clone()));
            }
        }
        Ok(Bca {
            dim,
            states,
            edges: Vec::new(),
        })
    }

    pub fn add_edge(
        &mut self,
        from: usize,
        to: usize,
        label: DataVector,
    ) -> Result<usize, BcaError> {
        for s in [from, to] {
            if s >= self.states.len() {
                return Err(BcaError::UnknownState(s));
            }
        }
        if label.dim() != self.dim {
            return Err(BcaError::DimensionMismatch {
                expected: self.dim,
                found: label.dim(),
            });
        }
        self.edges.push(Edge { from, to, label });
        Ok(self.edges.len() - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn check_config(&self, c: &Configuration) -> Result<(), BcaError> {
        if c.state >= self.states.len() {
            return Err(BcaError::UnknownState(c.state));
        }
        if c.vector.dim() != self.dim {
            return Err(BcaError::DimensionMismatch {
                expected: self.dim,
                found: c.vector.dim(),
            });
        }
        Ok(())
    }

    /// `(q′, v + L(e) ∘ θ⁻¹)`; `θ` must cover the label's support and may
    /// bind more values.
    pub fn step(
        &self,
        c: &Configuration,
        edge: usize,
        theta: &FiniteInjection,
    ) -> Result<Configuration, BcaError> {
        self.check_config(c)?;
        let e = self.edges.get(edge).ok_or(BcaError::UnknownEdge(edge))?;
        if e.from != c.state {
            return Err(BcaError::EdgeMismatch {
                edge,
                expected: e.from,
                found: c.state,
            });
        }
        let moved = e
            .label
            .apply_injection(&theta.restrict(&e.label.support_set()))?;
        Ok(Configuration {
            state: e.to,
            vector: c.vector.add(&moved)?,
        })
    }

    /// Applies a whole run, checking every step.
    pub fn replay(&self, c: &Configuration, run: &Run) -> Result<Configuration, BcaError> {
        let mut cur = c.clone();
        for (edge, theta) in &run.steps {
            cur = self.step(&cur, *edge, theta)?;
        }
        Ok(cur)
    }

    /// Every data value in some label.
    pub fn label_values(&self) -> BTreeSet<DataValue> {
        self.edges.iter().flat_map(|e| e.label.support()).collect()
    }
}

/// A control state with a data vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: usize,
    pub vector: DataVector,
}

/// A sequence of edges with the injection used at each step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Run {
    pub steps: Vec<(usize, FiniteInjection)>,
}

/// The counter-augmented automaton and the shared extra data value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Augmented {
    pub bca: Bca,
    pub marker: DataValue,
}

/// Adds `|Q|` coordinates; the label of `(p, q)` gains `e_q − e_p` there at
/// `marker`, the smallest value used by no label.
pub fn augment_counters(a: &Bca) -> Augmented {
    let marker = fresh_values(&a.label_values(), 1)[0];
    let n = a.states.len();
    let k = a.dim;
    let mut bca = Bca::new(k + n, a.states.clone()).expect("states already validated");
    for e in &a.edges {
        let mut label = pad(&e.label, n);
        if e.from != e.to {
            let mut aux = vec![0i64; k + n];
            aux[k + e.to] = 1;
            aux[k + e.from] = -1;
            label
                .add_assign(&DataVector::lift(&Tuple::from_i64s(&aux), marker))
                .expect("dimensions agree");
        }
        bca.edges.push(Edge {
            from: e.from,
            to: e.to,
            label,
        });
    }
    Augmented { bca, marker }
}

/// The same vector with `extra` zero coordinates appended.
fn pad(v: &DataVector, extra: usize) -> DataVector {
    let dim = v.dim() + extra;
    DataVector::from_entries(
        dim,
        v.iter().map(|(a, t)| {
            let mut e = t.entries().to_vec();
            e.resize(dim, Default::default());
            (a, Tuple::new(e))
        }),
    )
    .expect("dimension is positive")
}

/// A walk from `q0` to `qf` from which no closed sub-walk can be removed
/// without losing a visited state. Its length is at most `|Q|²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonPath {
    /// `q0, …, qf`, one longer than `edges`.
    pub states: Vec<usize>,
    pub edges: Vec<usize>,
}

impl SkeletonPath {
    pub fn visited(&self) -> BTreeSet<usize> {
        self.states.iter().copied().collect()
    }

    /// Occurrences per edge.
    pub fn edge_counts(&self) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for e in &self.edges {
            *out.entry(*e).or_insert(0) += 1;
        }
        out
    }
}

/// Skeleton enumeration outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Skeletons {
    Complete(Vec<SkeletonPath>),
    /// More than the cap exist; the listed ones are the first found.
    Capped(Vec<SkeletonPath>),
}

/// All skeletons from `q0` to `qf`, one per edge multiset, in depth-first
/// order over edge indices.
pub fn skeletons(a: &Bca, q0: usize, qf: usize, cap: usize) -> Result<Skeletons, BcaError> {
    for s in [q0, qf] {
        if s >= a.states.len() {
            return Err(BcaError::UnknownState(s));
        }
    }
    let mut search = SkeletonSearch {
        a,
        qf,
        cap,
        seen: BTreeSet::new(),
        found: Vec::new(),
        capped: false,
        max_len: a.states.len() * a.states.len(),
    };
    let mut walk = SkeletonPath {
        states: vec![q0],
        edges: Vec::new(),
    };
    search.extend(&mut walk);
    Ok(if search.capped {
        Skeletons::Capped(search.found)
    } else {
        Skeletons::Complete(search.found)
    })
}

struct SkeletonSearch<'a> {
    a: &'a Bca,
    qf: usize,
    cap: usize,
    seen: BTreeSet<Vec<usize>>,
    found: Vec<SkeletonPath>,
    capped: bool,
    max_len: usize,
}

impl SkeletonSearch<'_> {
    fn extend(&mut self, walk: &mut SkeletonPath) {
        if self.capped {
            return;
        }
        let here = *walk.states.last().expect("walks are nonempty");
        if here == self.qf {
            let mut key = walk.edges.clone();
            key.sort_unstable();
            if self.seen.insert(key) {
                if self.found.len() == self.cap {
                    self.capped = true;
                    return;
                }
                self.found.push(walk.clone());
            }
        }
        if walk.edges.len() >= self.max_len {
            return;
        }
        for (i, e) in self.a.edges.iter().enumerate() {
            if e.from != here {
                continue;
            }
            walk.edges.push(i);
            walk.states.push(e.to);
            if !has_removable_loop(&walk.states) {
                self.extend(walk);
            }
            walk.edges.pop();
            walk.states.pop();
        }
    }
}

/// Whether the closed sub-walk ending at the last position can be cut out
/// while every state stays visited. Earlier positions were checked when
/// they were appended, and cutting never becomes impossible by extension.
fn has_removable_loop(states: &[usize]) -> bool {
    let j = states.len() - 1;
    let last = states[j];
    (0..j).filter(|&i| states[i] == last).any(|i| {
        let mut kept: BTreeSet<usize> = states[..=i].iter().copied().collect();
        kept.extend(states[j..].iter().copied());
        states[i + 1..j].iter().all(|s| kept.contains(s))
    })
}

/// Decision of [`reachable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reachability {
    /// With a run that replays from the source to the target.
    Reachable(Run),
    Unreachable,
    /// Skeleton enumeration hit its cap before any skeleton succeeded.
    InconclusiveCapped,
}

impl Reachability {
    pub fn is_reachable(&self) -> bool {
        matches!(self, Reachability::Reachable(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachOptions {
    pub skeleton_cap: usize,
    /// Decide skeletons on the rayon pool; the verdict and the run returned
    /// are the same as sequentially.
    pub parallel: bool,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            skeleton_cap: DEFAULT_SKELETON_CAP,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachOutcome {
    pub verdict: Reachability,
    pub skeletons_tried: usize,
    pub stats: SolverStats,
}

pub fn reachable(
    a: &Bca,
    from: &Configuration,
    to: &Configuration,
) -> Result<ReachOutcome, BcaError> {
    reachable_with(a, from, to, &ReachOptions::default())
}

/// Decides whether `to` is reachable from `from`.
///
/// For each skeleton with visited states `S`, one expressibility instance
/// asks for `xf − x0` (zero on the auxiliary coordinates) as a sum of
/// exactly the skeleton's labels, renamed freely, plus any number of
/// augmented labels of edges starting in `S`.
pub fn reachable_with(
    a: &Bca,
    from: &Configuration,
    to: &Configuration,
    opts: &ReachOptions,
) -> Result<ReachOutcome, BcaError> {
    a.check_config(from)?;
    a.check_config(to)?;
    let (list, capped) = match skeletons(a, from.state, to.state, opts.skeleton_cap)? {
        Skeletons::Complete(l) => (l, false),
        Skeletons::Capped(l) => (l, true),
    };
    log::debug!(
        "{} skeletons{}",
        list.len(),
        if capped { " (capped)" } else { "" }
    );
    let aug = augment_counters(a);
    let target = pad(&to.vector.sub(&from.vector)?, a.states.len());
    let decide = |s: &SkeletonPath| decide_skeleton(a, &aug, s, &target);

    let mut stats = SolverStats::default();
    let mut tried = 0;
    let mut found = None;
    if opts.parallel {
        let results: Vec<_> = list.par_iter().map(decide).collect();
        for (s, r) in list.iter().zip(results) {
            tried += 1;
            let (witness, st) = r?;
            stats.absorb(&st);
            if let Some(w) = witness {
                found = Some((s, w));
                break;
            }
        }
    } else {
        for s in &list {
            tried += 1;
            let (witness, st) = decide(s)?;
            stats.absorb(&st);
            if let Some(w) = witness {
                found = Some((s, w));
                break;
            }
        }
    }
    let verdict = match found {
        Some((s, w)) => {
            let run = reconstruct_run(a, s, &w, from.state)?;
            if a.replay(from, &run)? != *to {
                return Err(BcaError::RunMismatch);
            }
            Reachability::Reachable(run)
        }
        None if capped => Reachability::InconclusiveCapped,
        None => Reachability::Unreachable,
    };
    Ok(ReachOutcome {
        verdict,
        skeletons_tried: tried,
        stats,
    })
}

/// Which edge a base vector of the per-skeleton instance stands for.
#[derive(Debug, Clone, Copy)]
enum Role {
    Loop(usize),
    Skeleton(usize),
}

/// `(edge, injection on its label's support)` per term, if the skeleton works.
type EdgeTerms = Vec<(usize, FiniteInjection)>;

fn decide_skeleton(
    a: &Bca,
    aug: &Augmented,
    s: &SkeletonPath,
    target: &DataVector,
) -> Result<(Option<EdgeTerms>, SolverStats), BcaError> {
    let visited = s.visited();
    let k_aux = a.states.len();
    let mut roles = Vec::new();
    let mut base = Vec::new();
    let mut modes = Vec::new();
    for (i, e) in aug.bca.edges.iter().enumerate() {
        if visited.contains(&e.from) && !e.label.is_zero() {
            roles.push(Role::Loop(i));
            base.push(e.label.clone());
            modes.push(DegreeMode::Free);
        }
    }
    for (edge, count) in s.edge_counts() {
        roles.push(Role::Skeleton(edge));
        base.push(pad(&a.edges[edge].label, k_aux));
        modes.push(DegreeMode::Exact(count));
    }
    let inst = ExpressibilityInstance::new(base, target.clone())?;
    let out = is_permutation_sum_with_degrees(&inst, &modes)?;
    let terms = out.witness.map(|w| edge_terms(a, &roles, &w));
    Ok((terms, out.stats))
}

fn edge_terms(a: &Bca, roles: &[Role], w: &PermutationSumWitness) -> EdgeTerms {
    w.terms
        .iter()
        .map(|t| {
            let edge = match roles[t.base] {
                Role::Loop(e) | Role::Skeleton(e) => e,
            };
            (edge, t.map.restrict(&a.edges[edge].label.support_set()))
        })
        .collect()
}

/// Orders the skeleton's edges plus the balanced loop edges into a walk from
/// `q0` (Hierholzer), attaching the witness injections. Skeleton edges with
/// zero labels carry no witness term and are added here.
fn reconstruct_run(
    a: &Bca,
    s: &SkeletonPath,
    terms: &EdgeTerms,
    q0: usize,
) -> Result<Run, BcaError> {
    let mut occurrences: Vec<(usize, FiniteInjection)> = terms.clone();
    let mut counted: BTreeMap<usize, u64> = BTreeMap::new();
    for (e, _) in &occurrences {
        *counted.entry(*e).or_insert(0) += 1;
    }
    for (e, need) in s.edge_counts() {
        let have = counted.get(&e).copied().unwrap_or(0);
        for _ in have..need {
            occurrences.push((e, FiniteInjection::default()));
        }
    }
    occurrences.sort();

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); a.states.len()];
    for (i, (e, _)) in occurrences.iter().enumerate().rev() {
        adjacency[a.edges[*e].from].push(i);
    }
    let mut stack: Vec<(usize, Option<usize>)> = vec![(q0, None)];
    let mut order = Vec::with_capacity(occurrences.len());
    while let Some(&(v, _)) = stack.last() {
        if let Some(i) = adjacency[v].pop() {
            stack.push((a.edges[occurrences[i].0].to, Some(i)));
        } else if let Some((_, Some(i))) = stack.pop() {
            order.push(i);
        }
    }
    if order.len() != occurrences.len() {
        return Err(BcaError::RunMismatch);
    }
    order.reverse();
    Ok(Run {
        steps: order.into_iter().map(|i| occurrences[i].clone()).collect(),
    })
}

#[cfg(test)]
mod tests;
