//! Reversibility: `v` is reversible in `V` when `−v` is also a permutation
//! sum of `V`. This holds exactly when `−weight(v)` is a nonnegative rational
//! combination of the weights of `V`, which a single LP decides.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::expressibility::{PermutationSumWitness, WitnessTerm};
use crate::linalg::{lp_feasible, LinearSystem, Rational, Relation};
use crate::vector::{DataValue, DataVector, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReversibilityError {
    #[error("vector {0} is not a member of the base set")]
    NotMember(DataVector),
    #[error("base vector {0} is not reversible in the set")]
    NotReversible(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("reversal witness would need more than {0} copies")]
    TooLarge(BigInt),
}

fn member_index(v: &DataVector, base: &[DataVector]) -> Result<usize, ReversibilityError> {
    for w in base {
        if w.dim() != v.dim() {
            return Err(ReversibilityError::DimensionMismatch {
                expected: v.dim(),
                found: w.dim(),
            });
        }
    }
    base.iter()
        .position(|w| w == v)
        .ok_or_else(|| ReversibilityError::NotMember(v.clone()))
}

/// Nonnegative rationals `λ` with `−weight(v) = Σ λᵢ·weight(Vᵢ)`, if any.
fn weight_combination(v: &DataVector, base: &[DataVector]) -> Option<Vec<Rational>> {
    let target = v.weight();
    let weights: Vec<_> = base.iter().map(DataVector::weight).collect();
    let mut sys = LinearSystem::new(base.len());
    for k in 0..v.dim() {
        let row = weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i, Rational::from_integer(w.entries()[k].clone())));
        sys.add_row(
            row,
            Relation::Eq,
            Rational::from_integer(-&target.entries()[k]),
        )
        .expect("indices in range");
    }
    lp_feasible(&sys)
}

/// Whether `v` (a member of `base`) is reversible in `base`.
pub fn is_reversible_in(v: &DataVector, base: &[DataVector]) -> Result<bool, ReversibilityError> {
    member_index(v, base)?;
    Ok(v.weight().is_zero() || weight_combination(v, base).is_some())
}

/// Per-member verdicts for a base set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetVerdict {
    pub per_vector: Vec<bool>,
}

impl SetVerdict {
    pub fn is_reversible(&self) -> bool {
        self.per_vector.iter().all(|b| *b)
    }

    /// Indices of the members that are not reversible.
    pub fn culprits(&self) -> Vec<usize> {
        self.per_vector
            .iter()
            .enumerate()
            .filter(|(_, b)| !**b)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn is_reversible_set(base: &[DataVector]) -> Result<SetVerdict, ReversibilityError> {
    let per_vector = base
        .iter()
        .map(|v| is_reversible_in(v, base))
        .collect::<Result<_, _>>()?;
    Ok(SetVerdict { per_vector })
}

/// Copies beyond this count are refused when building reversal witnesses.
const MAX_COPIES: u64 = 1 << 20;

/// A witness that `−v` is a permutation sum of `base`.
///
/// With `pλ` integral, the multiset `M` of `pλⱼ` copies of each `Vⱼ` and
/// `p − 1` copies of `v` has total weight `−weight(v)`. Over the union `S` of
/// the supports involved, `R_S(v) + Σ_{u∈M} R_S(u) = 0`, so
/// `−v = Σ_{i=1}^{|S|−1} rot_S^i(v) + Σ_{u∈M} R_S(u)`.
pub fn reversal_witness(
    v: &DataVector,
    base: &[DataVector],
) -> Result<PermutationSumWitness, ReversibilityError> {
    let own = member_index(v, base)?;
    let lambda = if v.weight().is_zero() {
        vec![Rational::zero(); base.len()]
    } else {
        weight_combination(v, base).ok_or(ReversibilityError::NotReversible(own))?
    };
    let p = lambda.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
    let copies = |k: &BigInt| -> Result<u64, ReversibilityError> {
        k.to_u64()
            .filter(|c| *c <= MAX_COPIES)
            .ok_or_else(|| ReversibilityError::TooLarge(BigInt::from(MAX_COPIES)))
    };
    let mut multiset: Vec<(usize, u64)> = Vec::new();
    for (j, l) in lambda.iter().enumerate() {
        let m = (l * Rational::from_integer(p.clone())).to_integer();
        if m.is_positive() && !base[j].is_zero() {
            multiset.push((j, copies(&m)?));
        }
    }
    let own_extra = copies(&(&p - 1))?;
    if own_extra > 0 && !v.is_zero() {
        multiset.push((own, own_extra));
    }

    let mut set: BTreeSet<DataValue> = v.support_set();
    for (j, _) in &multiset {
        set.extend(base[*j].support());
    }
    let rotations: Vec<Permutation> = (0..set.len())
        .map(|i| Permutation::rotation(&set, i))
        .collect();
    let identity = crate::vector::FiniteInjection::identity;
    let mut terms = Vec::new();
    for rot in rotations.iter().skip(1) {
        terms.push(WitnessTerm {
            base: own,
            map: identity(v.support()).then(rot),
        });
    }
    for (j, count) in multiset {
        for _ in 0..count {
            for rot in &rotations {
                terms.push(WitnessTerm {
                    base: j,
                    map: identity(base[j].support()).then(rot),
                });
            }
        }
    }
    Ok(PermutationSumWitness { terms })
}

/// A base set whose members were all checked reversible.
///
/// Holding one is proof of the check; the polynomial expressibility
/// procedure requires it. Reversal witnesses are built on demand since they
/// can be far larger than the set itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibleSet {
    base: Vec<DataVector>,
}

impl ReversibleSet {
    pub fn certify(base: Vec<DataVector>) -> Result<Self, ReversibilityError> {
        let verdict = is_reversible_set(&base)?;
        if let Some(&i) = verdict.culprits().first() {
            return Err(ReversibilityError::NotReversible(i));
        }
        Ok(ReversibleSet { base })
    }

    pub fn base(&self) -> &[DataVector] {
        &self.base
    }

    /// Witness that `−base[i]` is a permutation sum of the base set.
    pub fn reversal(&self, i: usize) -> Result<PermutationSumWitness, ReversibilityError> {
        reversal_witness(&self.base[i], &self.base)
    }
}
