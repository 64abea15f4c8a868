//! Deciding whether a target vector is a permutation sum of base vectors.
//!
//! The general procedure reduces to integer feasibility of a histogram
//! system over a column set of bounded size. For reversible base sets a
//! polynomial procedure based on subgroup membership is available in
//! [`fast`], together with an explicit witness construction.

pub mod fast;
mod reduction;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::histogram::{decompose, Histogram, HistogramError};
use crate::linalg::{
    ilp_feasible_with_stats, lattice_relaxation_feasible, lp_feasible_with_stats, LinalgError,
    Relation, SolverStats,
};
use crate::reversibility::ReversibilityError;
use crate::vector::{DataValue, DataVector, FiniteInjection, VectorError};

pub use fast::{fast_is_permutation_sum, synthesize_reversible_witness};
pub use reduction::{build_ilp, build_ilp_with_fresh, IlpLegend};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpressibilityError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("witness term {term} refers to base vector {base}, but only {len} exist")]
    BaseIndexOutOfRange {
        term: usize,
        base: usize,
        len: usize,
    },
    #[error(
        "witness term {term}: injection domain differs from the support of base vector {base}"
    )]
    DomainMismatch { term: usize, base: usize },
    #[error("degree modes given for {found} base vectors, expected {expected}")]
    ModeCountMismatch { expected: usize, found: usize },
    #[error("the reversibility certificate was issued for a different base set")]
    CertificateMismatch,
    #[error("witness would exceed {0} terms")]
    WitnessTooLarge(u64),
    #[error("target is not a permutation sum of the base set")]
    NotExpressible,
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Reversibility(#[from] ReversibilityError),
}

/// A finite list of base vectors (duplicates allowed) and a target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpressibilityInstance {
    dim: usize,
    base: Vec<DataVector>,
    target: DataVector,
}

impl ExpressibilityInstance {
    pub fn new(base: Vec<DataVector>, target: DataVector) -> Result<Self, ExpressibilityError> {
        let dim = target.dim();
        for v in &base {
            if v.dim() != dim {
                return Err(ExpressibilityError::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
        }
        Ok(ExpressibilityInstance { dim, base, target })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> &[DataVector] {
        &self.base
    }

    pub fn target(&self) -> &DataVector {
        &self.target
    }

    /// Every data value mentioned by the base set or the target.
    pub fn data_values(&self) -> BTreeSet<DataValue> {
        let mut out = self.target.support_set();
        for v in &self.base {
            out.extend(v.support());
        }
        out
    }
}

/// One summand `V[base] ∘ map⁻¹` of a permutation sum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WitnessTerm {
    pub base: usize,
    pub map: FiniteInjection,
}

/// A certificate `x = Σ V[bᵢ] ∘ πᵢ⁻¹`; each `πᵢ` is an injection defined on
/// the support of its base vector.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PermutationSumWitness {
    pub terms: Vec<WitnessTerm>,
}

impl PermutationSumWitness {
    pub fn new(terms: Vec<WitnessTerm>) -> Self {
        PermutationSumWitness { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The sum the witness denotes over `base`.
    pub fn evaluate(
        &self,
        base: &[DataVector],
        dim: usize,
    ) -> Result<DataVector, ExpressibilityError> {
        let mut sum = DataVector::zero(dim);
        for (i, term) in self.terms.iter().enumerate() {
            let v = base
                .get(term.base)
                .ok_or(ExpressibilityError::BaseIndexOutOfRange {
                    term: i,
                    base: term.base,
                    len: base.len(),
                })?;
            if !term.map.domain().eq(v.support()) {
                return Err(ExpressibilityError::DomainMismatch {
                    term: i,
                    base: term.base,
                });
            }
            if v.dim() != dim {
                return Err(ExpressibilityError::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            sum.add_assign(&v.apply_injection(&term.map)?)?;
        }
        Ok(sum)
    }

    /// Distinct data values in the ranges of all injections.
    pub fn data_values(&self) -> BTreeSet<DataValue> {
        self.terms.iter().flat_map(|t| t.map.range()).collect()
    }
}

/// `|supp x| + 1 + Σ_v (2|supp v| − 1)`, with empty base vectors counting 0.
pub fn support_bound(inst: &ExpressibilityInstance) -> usize {
    inst.target.support_len()
        + 1
        + inst
            .base
            .iter()
            .map(|v| (2 * v.support_len()).saturating_sub(1))
            .sum::<usize>()
}

/// Whether the witness sums exactly to the target.
pub fn verify_witness(
    inst: &ExpressibilityInstance,
    w: &PermutationSumWitness,
) -> Result<bool, ExpressibilityError> {
    Ok(first_mismatch(inst, w)?.is_none())
}

/// The smallest data value at which the witness sum differs from the target.
pub fn first_mismatch(
    inst: &ExpressibilityInstance,
    w: &PermutationSumWitness,
) -> Result<Option<DataValue>, ExpressibilityError> {
    let diff = w.evaluate(&inst.base, inst.dim)?.sub(&inst.target)?;
    let first = diff.support().next();
    Ok(first)
}

/// How the number of copies of one base vector is constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    /// Any number of copies.
    Free,
    /// Exactly this many copies.
    Exact(u64),
}

/// Result of the general decision procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// `Some` exactly when the target is a permutation sum.
    pub witness: Option<PermutationSumWitness>,
    pub stats: SolverStats,
    /// Number of fresh columns of the system that settled the question.
    pub fresh_columns: usize,
}

impl Outcome {
    pub fn is_yes(&self) -> bool {
        self.witness.is_some()
    }
}

/// Decides whether the target is a permutation sum of the base set, returning
/// a witness on success. Sound and complete.
pub fn is_permutation_sum(inst: &ExpressibilityInstance) -> Result<Outcome, ExpressibilityError> {
    is_permutation_sum_with_degrees(inst, &vec![DegreeMode::Free; inst.base.len()])
}

/// Like [`is_permutation_sum`], with a multiplicity constraint per base vector.
///
/// Systems are tried in stages with a growing number of fresh columns
/// (0, 1, 2, 4, …) up to the full support bound, and with a budget on the
/// total number of free copies (2, 4, 8, …) that is dropped once the full
/// column set has been tried with a budget of at least [`BUDGET_LIMIT`].
/// Budgeted stages are finite searches, so small witnesses are found
/// quickly; a feasible stage already yields a witness, and only the final
/// unbudgeted system over the full column set can prove infeasibility.
///
/// The full system's lattice relaxation is checked first and its rational
/// relaxation after the first stage, which refutes most negative instances
/// without any integer search.
pub fn is_permutation_sum_with_degrees(
    inst: &ExpressibilityInstance,
    modes: &[DegreeMode],
) -> Result<Outcome, ExpressibilityError> {
    if modes.len() != inst.base.len() {
        return Err(ExpressibilityError::ModeCountMismatch {
            expected: inst.base.len(),
            found: modes.len(),
        });
    }
    let mut stats = SolverStats::default();
    let full_fresh = reduction::full_fresh_count(inst);
    let (full, _) = build_ilp_with_fresh(inst, modes, full_fresh);
    let no = |stats, fresh_columns| Outcome {
        witness: None,
        stats,
        fresh_columns,
    };
    if !lattice_relaxation_feasible(&full.system) {
        log::debug!("lattice relaxation infeasible with {full_fresh} fresh columns");
        return Ok(no(stats, full_fresh));
    }
    let has_free = modes
        .iter()
        .zip(&inst.base)
        .any(|(m, v)| *m == DegreeMode::Free && !v.is_zero());
    let mut fresh = 0;
    let mut budget: Option<u64> = has_free.then_some(2);
    let mut first = true;
    loop {
        let (mut ilp, legend) = build_ilp_with_fresh(inst, modes, fresh);
        if let Some(k) = budget {
            let free = (0..inst.base.len())
                .filter(|i| modes[*i] == DegreeMode::Free)
                .filter_map(|i| legend.degree_var(i))
                .map(|j| (j, BigInt::one()));
            ilp.system
                .add_int_row(free, Relation::Le, BigInt::from(k))
                .expect("degree unknowns are in range");
        }
        log::debug!(
            "integer search with {fresh} of {full_fresh} fresh columns, {} unknowns, budget {budget:?}",
            legend.num_vars()
        );
        if let Some(solution) = ilp_feasible_with_stats(&ilp, &mut stats) {
            let witness = witness_from_solution(inst, modes, &legend, &solution)?;
            return Ok(Outcome {
                witness: Some(witness),
                stats,
                fresh_columns: fresh,
            });
        }
        if fresh == full_fresh && budget.is_none() {
            return Ok(no(stats, fresh));
        }
        if first && lp_feasible_with_stats(&full.system, &mut stats).is_none() {
            log::debug!("rational relaxation infeasible");
            return Ok(no(stats, full_fresh));
        }
        first = false;
        budget = match budget {
            Some(k) if fresh == full_fresh && k >= BUDGET_LIMIT => None,
            Some(k) => Some(k.saturating_mul(2)),
            None => None,
        };
        fresh = if fresh == 0 {
            1
        } else {
            (fresh * 2).min(full_fresh)
        }
        .min(full_fresh);
    }
}

/// Budget on free copies beyond which the staged search stops budgeting.
pub const BUDGET_LIMIT: u64 = 64;

fn witness_from_solution(
    inst: &ExpressibilityInstance,
    modes: &[DegreeMode],
    legend: &IlpLegend,
    solution: &[BigInt],
) -> Result<PermutationSumWitness, ExpressibilityError> {
    let mut terms = Vec::new();
    for (i, v) in inst.base.iter().enumerate() {
        if v.is_zero() {
            if let DegreeMode::Exact(m) = modes[i] {
                terms.extend((0..m).map(|_| WitnessTerm {
                    base: i,
                    map: FiniteInjection::default(),
                }));
            }
            continue;
        }
        let entries = legend
            .histogram_entries(i, solution)
            .into_iter()
            .map(|(a, b, k)| {
                k.to_u64()
                    .map(|k| (a, b, k))
                    .ok_or(ExpressibilityError::Histogram(HistogramError::Overflow))
            });
        let entries: Vec<_> = entries.collect::<Result<_, _>>()?;
        let h = Histogram::validate(v.support(), entries)?;
        for part in decompose(&h)? {
            terms.push(WitnessTerm {
                base: i,
                map: part.to_injection(),
            });
        }
    }
    Ok(PermutationSumWitness { terms })
}
