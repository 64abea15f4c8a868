//! Unordered data Petri nets: places hold multisets of data-carrying tokens,
//! and a transition consumes and produces tokens through multisets of
//! variables that a mode instantiates injectively.
//!
//! A marking is a data vector of dimension `|P|` with nonnegative entries.
//! Firing `t` in mode `σ` adds `Δ(t) ∘ σ⁻¹`, so reachability implies that
//! the marking difference is a permutation sum of the displacements (the
//! state equation). The converse fails: intermediate markings may need to
//! go negative.

mod parse;
mod random;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Signed;
use thiserror::Error;

use crate::expressibility::{
    fast_is_permutation_sum, is_permutation_sum, ExpressibilityError, ExpressibilityInstance,
    PermutationSumWitness,
};
use crate::linalg::SolverStats;
use crate::reversibility::ReversibleSet;
use crate::text::ParseError;
use crate::vector::{fresh_values, DataValue, DataVector, FiniteInjection, Tuple, VectorError};

pub use random::{
    random_firings, random_marking, random_net, random_reversible_net, random_walk, Firing,
    NetShape,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdnError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("a net needs at least one place")]
    NoPlaces,
    #[error("duplicate place `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(String),
    #[error("unknown transition index {0}")]
    UnknownTransition(usize),
    #[error("place index {0} out of range")]
    UnknownPlace(usize),
    #[error("marking has dimension {found}, the net has {expected} places")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("marking has a negative token count at {0}")]
    NegativeMarking(DataValue),
    #[error("mode does not bind variable {0}")]
    UnboundVariable(DataValue),
    #[error("transition `{0}` is not enabled in this mode")]
    NotEnabled(String),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Expressibility(#[from] ExpressibilityError),
}

/// A multiset of variables.
pub type Flow = BTreeMap<DataValue, u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    name: String,
    /// `F(p, t)` per place.
    input: Vec<Flow>,
    /// `F(t, p)` per place.
    output: Vec<Flow>,
}

impl Transition {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input(&self, place: usize) -> &Flow {
        &self.input[place]
    }

    pub fn output(&self, place: usize) -> &Flow {
        &self.output[place]
    }

    /// Every variable occurring in some flow of the transition.
    pub fn variables(&self) -> BTreeSet<DataValue> {
        self.input
            .iter()
            .chain(&self.output)
            .flat_map(|f| f.keys().copied())
            .collect()
    }

    fn input_variables(&self) -> BTreeSet<DataValue> {
        self.input.iter().flat_map(|f| f.keys().copied()).collect()
    }
}

/// A net: ordered places and named transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Updn {
    places: Vec<String>,
    transitions: Vec<Transition>,
}

impl Updn {
    pub fn new(places: Vec<String>) -> Result<Self, UpdnError> {
        if places.is_empty() {
            return Err(UpdnError::NoPlaces);
        }
        let mut seen = BTreeSet::new();
        for p in &places {
            if !seen.insert(p) {
                return Err(UpdnError::DuplicatePlace(p.clone()));
            }
        }
        Ok(Updn {
            places,
            transitions: Vec::new(),
        })
    }

    /// Adds a transition from `(place, variable, multiplicity)` triples;
    /// repeated triples accumulate.
    pub fn add_transition(
        &mut self,
        name: &str,
        input: &[(usize, DataValue, u64)],
        output: &[(usize, DataValue, u64)],
    ) -> Result<usize, UpdnError> {
        if self.transition_index(name).is_some() {
            return Err(UpdnError::DuplicateTransition(name.to_string()));
        }
        let n = self.places.len();
        let collect = |arcs: &[(usize, DataValue, u64)]| -> Result<Vec<Flow>, UpdnError> {
            let mut flows = vec![Flow::new(); n];
            for &(p, x, k) in arcs {
                let flow = flows.get_mut(p).ok_or(UpdnError::UnknownPlace(p))?;
                if k > 0 {
                    *flow.entry(x).or_insert(0) += k;
                }
            }
            Ok(flows)
        };
        self.transitions.push(Transition {
            name: name.to_string(),
            input: collect(input)?,
            output: collect(output)?,
        });
        Ok(self.transitions.len() - 1)
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p == name)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t.name == name)
    }

    fn transition(&self, t: usize) -> Result<&Transition, UpdnError> {
        self.transitions
            .get(t)
            .ok_or(UpdnError::UnknownTransition(t))
    }

    /// `Δ(t) = F(t, ·) − F(·, t)` as a vector over variables.
    pub fn displacement(&self, t: usize) -> Result<DataVector, UpdnError> {
        let tr = self.transition(t)?;
        let n = self.num_places();
        let mut entries = Vec::new();
        for x in tr.variables() {
            let tuple: Vec<BigInt> = (0..n)
                .map(|p| {
                    let out = tr.output[p].get(&x).copied().unwrap_or(0);
                    let inp = tr.input[p].get(&x).copied().unwrap_or(0);
                    BigInt::from(out) - BigInt::from(inp)
                })
                .collect();
            entries.push((x, Tuple::new(tuple)));
        }
        Ok(DataVector::from_entries(n, entries)?)
    }

    /// Displacements of all transitions, in transition order.
    pub fn displacements(&self) -> Vec<DataVector> {
        (0..self.transitions.len())
            .map(|t| self.displacement(t).expect("index in range"))
            .collect()
    }

    fn check_marking(&self, m: &Marking) -> Result<(), UpdnError> {
        if m.0.dim() != self.num_places() {
            return Err(UpdnError::DimensionMismatch {
                expected: self.num_places(),
                found: m.0.dim(),
            });
        }
        Ok(())
    }

    fn check_mode(&self, tr: &Transition, mode: &FiniteInjection) -> Result<(), UpdnError> {
        match tr.variables().into_iter().find(|x| mode.get(*x).is_none()) {
            Some(x) => Err(UpdnError::UnboundVariable(x)),
            None => Ok(()),
        }
    }

    /// Whether `σ(F(p, t)) ≤ M(p)` for every place `p`.
    pub fn enabled(
        &self,
        m: &Marking,
        t: usize,
        mode: &FiniteInjection,
    ) -> Result<bool, UpdnError> {
        let tr = self.transition(t)?;
        self.check_marking(m)?;
        self.check_mode(tr, mode)?;
        Ok(guard_holds(tr, m, mode))
    }

    /// The successor `M ⊖ σ(F(·, t)) ⊕ σ(F(t, ·))`.
    pub fn fire(
        &self,
        m: &Marking,
        t: usize,
        mode: &FiniteInjection,
    ) -> Result<Marking, UpdnError> {
        if !self.enabled(m, t, mode)? {
            return Err(UpdnError::NotEnabled(self.transitions[t].name.clone()));
        }
        let tr = &self.transitions[t];
        let n = self.num_places();
        let mut next = m.0.clone();
        for p in 0..n {
            for (x, k) in &tr.input[p] {
                next.sub_at(mode.get(*x).expect("mode checked"), &unit(n, p, *k));
            }
            for (x, k) in &tr.output[p] {
                next.add_at(mode.get(*x).expect("mode checked"), &unit(n, p, *k));
            }
        }
        Ok(Marking(next))
    }
}

fn unit(n: usize, p: usize, k: u64) -> Tuple {
    let mut e = vec![BigInt::from(0); n];
    e[p] = BigInt::from(k);
    Tuple::new(e)
}

fn guard_holds(tr: &Transition, m: &Marking, mode: &FiniteInjection) -> bool {
    tr.input.iter().enumerate().all(|(p, flow)| {
        flow.iter().all(|(x, k)| {
            let alpha = mode.get(*x).expect("mode checked");
            m.count(p, alpha) >= BigInt::from(*k)
        })
    })
}

/// Tokens per place and data value: a data vector with nonnegative entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(DataVector);

impl Marking {
    pub fn new(v: DataVector) -> Result<Self, UpdnError> {
        for (alpha, t) in v.iter() {
            if t.entries().iter().any(Signed::is_negative) {
                return Err(UpdnError::NegativeMarking(alpha));
            }
        }
        Ok(Marking(v))
    }

    pub fn empty(places: usize) -> Self {
        Marking(DataVector::zero(places))
    }

    pub fn vector(&self) -> &DataVector {
        &self.0
    }

    /// Number of tokens carrying `alpha` in place `p`.
    pub fn count(&self, p: usize, alpha: DataValue) -> BigInt {
        self.0
            .get(alpha)
            .map_or_else(|| BigInt::from(0), |t| t.entries()[p].clone())
    }
}

/// One firing in a state-equation witness: a transition and an injective mode
/// defined on all of its variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateEquationTerm {
    pub transition: usize,
    pub mode: FiniteInjection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateEquationOutcome {
    /// `Some` exactly when the state equation holds.
    pub witness: Option<Vec<StateEquationTerm>>,
    pub stats: SolverStats,
}

impl StateEquationOutcome {
    pub fn holds(&self) -> bool {
        self.witness.is_some()
    }
}

/// The expressibility instance `M′ − M` over the displacements.
pub fn state_equation_instance(
    net: &Updn,
    from: &Marking,
    to: &Marking,
) -> Result<ExpressibilityInstance, UpdnError> {
    net.check_marking(from)?;
    net.check_marking(to)?;
    let target = to.0.sub(&from.0)?;
    Ok(ExpressibilityInstance::new(net.displacements(), target)?)
}

/// Decides whether `M′ − M` is a permutation sum of `{Δ(t)}`. Nonnegativity
/// of intermediate markings is not considered.
pub fn state_equation(
    net: &Updn,
    from: &Marking,
    to: &Marking,
) -> Result<StateEquationOutcome, UpdnError> {
    let inst = state_equation_instance(net, from, to)?;
    let out = is_permutation_sum(&inst)?;
    Ok(StateEquationOutcome {
        witness: out.witness.map(|w| modes_from_witness(net, &w)),
        stats: out.stats,
    })
}

/// The polynomial route, for nets whose displacements form a reversible set.
pub fn state_equation_fast(
    net: &Updn,
    from: &Marking,
    to: &Marking,
    effects: &ReversibleSet,
) -> Result<bool, UpdnError> {
    let inst = state_equation_instance(net, from, to)?;
    Ok(fast_is_permutation_sum(&inst, effects)?)
}

/// Certificate that the displacements form a reversible set, if they do.
pub fn effects_certificate(net: &Updn) -> Option<ReversibleSet> {
    ReversibleSet::certify(net.displacements()).ok()
}

pub fn effects_reversible(net: &Updn) -> bool {
    effects_certificate(net).is_some()
}

/// Turns witness injections (defined on displacement supports) into modes on
/// every variable; variables with zero net effect get the smallest values
/// not otherwise used by the term.
pub fn modes_from_witness(net: &Updn, w: &PermutationSumWitness) -> Vec<StateEquationTerm> {
    w.terms
        .iter()
        .map(|term| {
            let tr = &net.transitions[term.base];
            let mut pairs: BTreeMap<DataValue, DataValue> = term.map.pairs().collect();
            let missing: Vec<DataValue> = tr
                .variables()
                .into_iter()
                .filter(|x| !pairs.contains_key(x))
                .collect();
            let used: BTreeSet<DataValue> = pairs.values().copied().collect();
            for (x, alpha) in missing.iter().zip(fresh_values(&used, missing.len())) {
                pairs.insert(*x, alpha);
            }
            StateEquationTerm {
                transition: term.base,
                mode: FiniteInjection::new(pairs).expect("fresh values avoid the range"),
            }
        })
        .collect()
}

/// `M + Σ Δ(tᵢ) ∘ σᵢ⁻¹` for a state-equation witness.
pub fn apply_terms(
    net: &Updn,
    from: &Marking,
    terms: &[StateEquationTerm],
) -> Result<DataVector, UpdnError> {
    let mut out = from.0.clone();
    for term in terms {
        let tr = net.transition(term.transition)?;
        net.check_mode(tr, &term.mode)?;
        let delta = net.displacement(term.transition)?;
        out.add_assign(&delta.apply_injection(&term.mode.restrict(&delta.support_set()))?)?;
    }
    Ok(out)
}
