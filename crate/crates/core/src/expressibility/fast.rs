//! Polynomial expressibility for reversible base sets.
//!
//! Over an infinite domain, a target `x` is a permutation sum of a reversible
//! set `V` iff `weight(x)` lies in the subgroup generated by the weights of
//! `V` and every value `x(α)` lies in the subgroup generated by all values
//! `v(δ)` of members of `V`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{ExpressibilityError, ExpressibilityInstance, PermutationSumWitness, WitnessTerm};
use crate::linalg::{subgroup_form, HermiteForm};
use crate::reversibility::ReversibleSet;
use crate::vector::{fresh_values, DataValue, DataVector, FiniteInjection, Permutation, Tuple};

/// Expansions beyond this many terms are refused.
const MAX_TERMS: u64 = 1 << 22;

struct Subgroups {
    weight_form: HermiteForm,
    /// Distinct nonzero values `v(δ)` with one `(base, δ)` occurrence each.
    values: Vec<(Tuple, usize, DataValue)>,
    value_form: HermiteForm,
}

impl Subgroups {
    fn new(
        inst: &ExpressibilityInstance,
        track_transform: bool,
    ) -> Result<Self, ExpressibilityError> {
        let weights: Vec<Tuple> = inst.base().iter().map(DataVector::weight).collect();
        let weight_form = subgroup_form(inst.dim(), &weights, track_transform)?;
        let mut seen: BTreeMap<Tuple, (usize, DataValue)> = BTreeMap::new();
        for (j, v) in inst.base().iter().enumerate() {
            for (delta, t) in v.iter() {
                seen.entry(t.clone()).or_insert((j, delta));
            }
        }
        let values: Vec<(Tuple, usize, DataValue)> =
            seen.into_iter().map(|(t, (j, d))| (t, j, d)).collect();
        let gens: Vec<Tuple> = values.iter().map(|(t, _, _)| t.clone()).collect();
        let value_form = subgroup_form(inst.dim(), &gens, track_transform)?;
        Ok(Subgroups {
            weight_form,
            values,
            value_form,
        })
    }

    fn holds(&self, x: &DataVector) -> bool {
        self.weight_form.contains(x.weight().entries())
            && x.iter().all(|(_, t)| self.value_form.contains(t.entries()))
    }
}

fn check_certificate(
    inst: &ExpressibilityInstance,
    cert: &ReversibleSet,
) -> Result<(), ExpressibilityError> {
    if cert.base() != inst.base() {
        return Err(ExpressibilityError::CertificateMismatch);
    }
    Ok(())
}

/// Decides expressibility for a certified reversible base set via two
/// subgroup-membership conditions.
pub fn fast_is_permutation_sum(
    inst: &ExpressibilityInstance,
    cert: &ReversibleSet,
) -> Result<bool, ExpressibilityError> {
    check_certificate(inst, cert)?;
    Ok(Subgroups::new(inst, false)?.holds(inst.target()))
}

/// Signed multiset of renamed base vectors.
#[derive(Default)]
struct SignedSum {
    counts: BTreeMap<(usize, FiniteInjection), BigInt>,
}

impl SignedSum {
    fn add(&mut self, base: usize, map: FiniteInjection, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        let slot = self.counts.entry((base, map)).or_insert_with(BigInt::zero);
        *slot += k;
    }

    /// `k · Σ_{i<|set|} rot_set^i(Σ_j z_j V_j)`, the rotation sum `R_set`.
    fn add_equalized(
        &mut self,
        base: &[DataVector],
        z: &[BigInt],
        set: &BTreeSet<DataValue>,
        k: &BigInt,
    ) {
        for i in 0..set.len() {
            let rot = Permutation::rotation(set, i);
            for (j, zj) in z.iter().enumerate() {
                if !zj.is_zero() && !base[j].is_zero() {
                    self.add(
                        j,
                        FiniteInjection::identity(base[j].support()).then(&rot),
                        &(zj * k),
                    );
                }
            }
        }
    }
}

/// An explicit witness for a target accepted by [`fast_is_permutation_sum`].
///
/// With `δ` fresh and `T` the union of base supports, the target splits as
/// `Σ_α (⟦α↦x(α)⟧ − ⟦δ↦x(α)⟧) + ⟦δ↦weight(x)⟧`. The last summand is
/// `R_{T∪{δ}}(y) − R_T(y)` for an integer combination `y` of base vectors
/// with weight `weight(x)`. Each other summand is `x' − x'∘(α δ)` for a
/// combination `x'` of base vectors renamed to carry `x(α)` at `α`. Negative
/// coefficients are expanded with the certified reversal witnesses.
pub fn synthesize_reversible_witness(
    inst: &ExpressibilityInstance,
    cert: &ReversibleSet,
) -> Result<PermutationSumWitness, ExpressibilityError> {
    check_certificate(inst, cert)?;
    let x = inst.target();
    if x.is_zero() {
        return Ok(PermutationSumWitness::default());
    }
    let groups = Subgroups::new(inst, true)?;
    if !groups.holds(x) {
        return Err(ExpressibilityError::NotExpressible);
    }
    let base = inst.base();
    let mut t_set: BTreeSet<DataValue> = BTreeSet::new();
    for v in base {
        t_set.extend(v.support());
    }
    let mut used = t_set.clone();
    used.extend(x.support());
    let delta = fresh_values(&used, 1)[0];

    let mut sum = SignedSum::default();
    let one = BigInt::from(1);

    let z = groups
        .weight_form
        .solve(x.weight().entries())
        .ok_or(ExpressibilityError::NotExpressible)?;
    let mut t_delta = t_set.clone();
    t_delta.insert(delta);
    sum.add_equalized(base, &z, &t_delta, &one);
    sum.add_equalized(base, &z, &t_set, &-&one);

    for (alpha, value) in x.iter() {
        let coeffs = groups
            .value_form
            .solve(value.entries())
            .ok_or(ExpressibilityError::NotExpressible)?;
        let out = Permutation::swap(alpha, delta);
        for ((_, j, d), c) in groups.values.iter().zip(&coeffs) {
            if c.is_zero() {
                continue;
            }
            let to_alpha =
                FiniteInjection::identity(base[*j].support()).then(&Permutation::swap(*d, alpha));
            sum.add(*j, to_alpha.then(&out), &-c);
            sum.add(*j, to_alpha, c);
        }
    }

    let mut reversals: BTreeMap<usize, PermutationSumWitness> = BTreeMap::new();
    let mut terms = Vec::new();
    for ((j, map), k) in sum.counts {
        if k.is_zero() {
            continue;
        }
        let n = k
            .abs()
            .to_u64()
            .filter(|n| *n <= MAX_TERMS)
            .ok_or(ExpressibilityError::WitnessTooLarge(MAX_TERMS))?;
        if k.is_positive() {
            terms.extend((0..n).map(|_| WitnessTerm {
                base: j,
                map: map.clone(),
            }));
        } else {
            let extend = Permutation::extending(&map);
            let reversal = match reversals.entry(j) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => e.insert(cert.reversal(j)?),
            };
            for _ in 0..n {
                for t in &reversal.terms {
                    terms.push(WitnessTerm {
                        base: t.base,
                        map: t.map.then(&extend),
                    });
                }
            }
        }
        if terms.len() as u64 > MAX_TERMS {
            return Err(ExpressibilityError::WitnessTooLarge(MAX_TERMS));
        }
    }
    let witness = PermutationSumWitness { terms };
    debug_assert!(super::verify_witness(inst, &witness).unwrap_or(false));
    Ok(witness)
}
