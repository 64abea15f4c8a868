//! Brute-force ground truth: bounded search for permutation sums.
//!
//! Pool values outside the target's support are interchangeable, since
//! renaming them fixes the target. The search therefore introduces such
//! values in ascending order only: a term may use a new one only if every
//! smaller one is already in use, and the new values of a single term are
//! assigned in the id order of the domain elements receiving them.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expressibility::{
    support_bound, ExpressibilityInstance, PermutationSumWitness, WitnessTerm,
};
use crate::linalg::{ilp_feasible, IlpInstance, LinearSystem, Relation};
use crate::vector::{fresh_values, DataValue, DataVector, FiniteInjection, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search exceeded the cap of {0} nodes")]
    NodeCapExceeded(u64),
    #[error("the pool does not contain target value {0}")]
    PoolMissesTarget(DataValue),
    #[error("{0} renamings exceed the enumeration cap")]
    TooManyRenamings(usize),
}

/// Search limits: at most `max_terms` summands with images in `pool`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_terms: usize,
    pub pool: Vec<DataValue>,
    /// Search nodes allowed before giving up with an error.
    pub node_cap: u64,
}

/// Default node cap of [`OracleBudget::for_instance`].
pub const DEFAULT_NODE_CAP: u64 = 5_000_000;

impl OracleBudget {
    /// Pool of every instance value plus enough fresh values for `max_terms`
    /// terms and for the support bound.
    pub fn for_instance(inst: &ExpressibilityInstance, max_terms: usize) -> Self {
        let known = inst.data_values();
        let target = inst.target().support_len();
        let max_support = inst
            .base()
            .iter()
            .map(DataVector::support_len)
            .max()
            .unwrap_or(0);
        let outside_needed = (max_terms * max_support).max(support_bound(inst) - target);
        let outside_known = known.len() - target;
        let extra = outside_needed.saturating_sub(outside_known);
        let mut pool: Vec<DataValue> = known.iter().copied().collect();
        pool.extend(fresh_values(&known, extra));
        pool.sort();
        OracleBudget {
            max_terms,
            pool,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    Yes(PermutationSumWitness),
    /// No sum of at most `max_terms` terms over the pool; inconclusive.
    NoUpToBudget,
}

impl OracleResult {
    pub fn is_yes(&self) -> bool {
        matches!(self, OracleResult::Yes(_))
    }
}

struct Search<'a> {
    base: &'a [DataVector],
    /// Pool values in the target support.
    anchored: Vec<DataValue>,
    /// Interchangeable pool values, ascending.
    free: Vec<DataValue>,
    max_support: usize,
    nodes: u64,
    node_cap: u64,
    failed: HashSet<(DataVector, usize, usize)>,
    terms: Vec<WitnessTerm>,
}

/// Searches for a permutation sum within `budget`. Every YES carries a
/// witness; NO is only relative to the budget.
pub fn oracle_decide(
    inst: &ExpressibilityInstance,
    budget: &OracleBudget,
) -> Result<OracleResult, OracleError> {
    let target = inst.target();
    let pool: BTreeSet<DataValue> = budget.pool.iter().copied().collect();
    if let Some(a) = target.support().find(|a| !pool.contains(a)) {
        return Err(OracleError::PoolMissesTarget(a));
    }
    let anchored: Vec<DataValue> = target.support().collect();
    let free: Vec<DataValue> = pool
        .iter()
        .copied()
        .filter(|a| target.get(*a).is_none())
        .collect();
    let mut search = Search {
        base: inst.base(),
        anchored,
        free,
        max_support: inst
            .base()
            .iter()
            .map(DataVector::support_len)
            .max()
            .unwrap_or(0),
        nodes: 0,
        node_cap: budget.node_cap,
        failed: HashSet::new(),
        terms: Vec::new(),
    };
    if search.dfs(target, budget.max_terms, 0)? {
        Ok(OracleResult::Yes(PermutationSumWitness::new(search.terms)))
    } else {
        Ok(OracleResult::NoUpToBudget)
    }
}

impl Search<'_> {
    /// Whether `residual` is a sum of at most `remaining` further terms, given
    /// that the first `used_free` interchangeable values have appeared.
    fn dfs(
        &mut self,
        residual: &DataVector,
        remaining: usize,
        used_free: usize,
    ) -> Result<bool, OracleError> {
        let Some(beta) = residual.support().next() else {
            return Ok(true);
        };
        if remaining == 0 || residual.support_len() > remaining * self.max_support {
            return Ok(false);
        }
        let key = (residual.clone(), remaining, used_free);
        if self.failed.contains(&key) {
            return Ok(false);
        }
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(OracleError::NodeCapExceeded(self.node_cap));
        }
        for j in 0..self.base.len() {
            let v = &self.base[j];
            let domain: Vec<DataValue> = v.support().collect();
            for k in 0..domain.len() {
                let mut maps = Vec::new();
                self.extend_maps(&domain, k, beta, used_free, &mut Vec::new(), &mut maps);
                for (map, new_used) in maps {
                    let term = v.apply_injection(&map).expect("domain is the support");
                    let next = residual.sub(&term).expect("dimensions agree");
                    self.terms.push(WitnessTerm { base: j, map });
                    if self.dfs(&next, remaining - 1, new_used)? {
                        return Ok(true);
                    }
                    self.terms.pop();
                }
            }
        }
        self.failed.insert(key);
        Ok(false)
    }

    /// All canonical injections of `domain` sending `domain[pinned]` to
    /// `beta`, each with the resulting count of used interchangeable values.
    fn extend_maps(
        &self,
        domain: &[DataValue],
        pinned: usize,
        beta: DataValue,
        used_free: usize,
        image: &mut Vec<DataValue>,
        out: &mut Vec<(FiniteInjection, usize)>,
    ) {
        let pos = image.len();
        if pos == domain.len() {
            let map = FiniteInjection::new(domain.iter().copied().zip(image.iter().copied()))
                .expect("images are distinct");
            out.push((map, used_free));
            return;
        }
        let try_value =
            |b: DataValue, used: usize, image: &mut Vec<DataValue>, out: &mut Vec<_>| {
                if (pos == pinned) != (b == beta) || image.contains(&b) {
                    return;
                }
                image.push(b);
                self.extend_maps(domain, pinned, beta, used, image, out);
                image.pop();
            };
        for &a in &self.anchored {
            try_value(a, used_free, image, out);
        }
        // Interchangeable values already in use, then the next new one.
        for i in 0..used_free {
            try_value(self.free[i], used_free, image, out);
        }
        // An interchangeable `beta` is nonzero in the residual, so it is
        // already in use and never the next new value.
        if let Some(&b) = self.free.get(used_free) {
            try_value(b, used_free + 1, image, out);
        }
    }
}

/// All term sequences of length `len` over `pool` in canonical form: values
/// outside the target support are introduced in ascending order, term by
/// term and within a term by domain order.
pub fn canonical_sequences(
    inst: &ExpressibilityInstance,
    pool: &[DataValue],
    len: usize,
) -> Vec<Vec<WitnessTerm>> {
    let target: BTreeSet<DataValue> = inst.target().support_set();
    let anchored: Vec<DataValue> = pool
        .iter()
        .copied()
        .filter(|a| target.contains(a))
        .collect();
    let free: Vec<DataValue> = pool
        .iter()
        .copied()
        .filter(|a| !target.contains(a))
        .collect();
    let mut out = Vec::new();
    let mut seq = Vec::new();
    sequences(inst.base(), &anchored, &free, len, 0, &mut seq, &mut out);
    out
}

fn sequences(
    base: &[DataVector],
    anchored: &[DataValue],
    free: &[DataValue],
    len: usize,
    used: usize,
    seq: &mut Vec<WitnessTerm>,
    out: &mut Vec<Vec<WitnessTerm>>,
) {
    if seq.len() == len {
        out.push(seq.clone());
        return;
    }
    for (j, v) in base.iter().enumerate() {
        let domain: Vec<DataValue> = v.support().collect();
        let mut maps = Vec::new();
        term_maps(&domain, anchored, free, used, &mut Vec::new(), &mut maps);
        for (map, next_used) in maps {
            seq.push(WitnessTerm { base: j, map });
            sequences(base, anchored, free, len, next_used, seq, out);
            seq.pop();
        }
    }
}

fn term_maps(
    domain: &[DataValue],
    anchored: &[DataValue],
    free: &[DataValue],
    used: usize,
    image: &mut Vec<DataValue>,
    out: &mut Vec<(FiniteInjection, usize)>,
) {
    if image.len() == domain.len() {
        let map = FiniteInjection::new(domain.iter().copied().zip(image.iter().copied()))
            .expect("distinct images");
        out.push((map, used));
        return;
    }
    let candidates = anchored
        .iter()
        .map(|a| (*a, used))
        .chain(free[..used].iter().map(|a| (*a, used)))
        .chain(free.get(used).map(|a| (*a, used + 1)));
    for (b, next_used) in candidates.collect::<Vec<_>>() {
        if image.contains(&b) {
            continue;
        }
        image.push(b);
        term_maps(domain, anchored, free, next_used, image, out);
        image.pop();
    }
}

/// Exact decision when the whole data domain is the finite set `domain`.
///
/// Every renaming of a base vector inside `domain` is enumerated, and the
/// target is tested for being a nonnegative integer combination of them.
pub fn finite_domain_decide(
    inst: &ExpressibilityInstance,
    domain: &BTreeSet<DataValue>,
) -> Result<Option<PermutationSumWitness>, OracleError> {
    const MAX_RENAMINGS: usize = 100_000;
    if let Some(a) = inst.target().support().find(|a| !domain.contains(a)) {
        return Err(OracleError::PoolMissesTarget(a));
    }
    let pool: Vec<DataValue> = domain.iter().copied().collect();
    let mut renamed: BTreeMap<DataVector, WitnessTerm> = BTreeMap::new();
    for (j, v) in inst.base().iter().enumerate() {
        let support: Vec<DataValue> = v.support().collect();
        let mut maps = Vec::new();
        all_injections(&support, &pool, &mut Vec::new(), &mut maps, MAX_RENAMINGS)?;
        for map in maps {
            let w = v.apply_injection(&map).expect("domain is the support");
            if !w.is_zero() {
                renamed.entry(w).or_insert(WitnessTerm { base: j, map });
            }
        }
    }
    let generators: Vec<(&DataVector, &WitnessTerm)> = renamed.iter().collect();
    let mut sys = LinearSystem::new(generators.len());
    for &a in &pool {
        for k in 0..inst.dim() {
            let row: Vec<(usize, BigInt)> = generators
                .iter()
                .enumerate()
                .map(|(i, (w, _))| (i, w.value(a).entries()[k].clone()))
                .collect();
            sys.add_int_row(
                row,
                Relation::Eq,
                inst.target().value(a).entries()[k].clone(),
            )
            .expect("indices in range");
        }
    }
    let Some(counts) = ilp_feasible(&IlpInstance::new(sys)) else {
        return Ok(None);
    };
    let mut terms = Vec::new();
    for ((_, term), n) in generators.iter().zip(counts) {
        let n: u64 = n.try_into().expect("solution entries fit");
        terms.extend((0..n).map(|_| (*term).clone()));
    }
    Ok(Some(PermutationSumWitness::new(terms)))
}

fn all_injections(
    domain: &[DataValue],
    pool: &[DataValue],
    image: &mut Vec<DataValue>,
    out: &mut Vec<FiniteInjection>,
    cap: usize,
) -> Result<(), OracleError> {
    if image.len() == domain.len() {
        out.push(
            FiniteInjection::new(domain.iter().copied().zip(image.iter().copied()))
                .expect("distinct images"),
        );
        if out.len() > cap {
            return Err(OracleError::TooManyRenamings(out.len()));
        }
        return Ok(());
    }
    for &b in pool {
        if !image.contains(&b) {
            image.push(b);
            all_injections(domain, pool, image, out, cap)?;
            image.pop();
        }
    }
    Ok(())
}

/// Shape of generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceShape {
    /// Tuple dimension `d ≥ 1`.
    pub dim: usize,
    /// Number of base vectors, drawn uniformly from `1..=max_base`.
    pub max_base: usize,
    /// Support size of each vector, drawn uniformly from `1..=max_support`.
    pub max_support: usize,
    /// Entries are drawn uniformly from `[-entry_bound, entry_bound]`,
    /// redrawing tuples that come out zero.
    pub entry_bound: i64,
    /// Support values are drawn from the ids `0..data_range`.
    pub data_range: u64,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            dim: 1,
            max_base: 3,
            max_support: 3,
            entry_bound: 2,
            data_range: 6,
        }
    }
}

fn random_tuple(rng: &mut ChaCha8Rng, shape: &InstanceShape) -> Tuple {
    loop {
        let xs: Vec<i64> = (0..shape.dim)
            .map(|_| rng.gen_range(-shape.entry_bound..=shape.entry_bound))
            .collect();
        if xs.iter().any(|x| *x != 0) {
            return Tuple::from_i64s(&xs);
        }
    }
}

/// A vector with a uniform support size in `1..=max_support` over the data range.
pub fn random_vector(rng: &mut ChaCha8Rng, shape: &InstanceShape) -> DataVector {
    let size = rng.gen_range(1..=shape.max_support.min(shape.data_range as usize).max(1));
    let mut support = BTreeSet::new();
    while support.len() < size {
        support.insert(DataValue::new(rng.gen_range(0..shape.data_range)));
    }
    DataVector::from_entries(
        shape.dim,
        support.into_iter().map(|a| (a, random_tuple(rng, shape))),
    )
    .expect("dimension is positive")
}

/// A deterministic instance with independent random base vectors and target.
pub fn random_instance(seed: u64, shape: &InstanceShape) -> ExpressibilityInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=shape.max_base);
    let base: Vec<DataVector> = (0..count).map(|_| random_vector(&mut rng, shape)).collect();
    let target = random_vector(&mut rng, shape);
    ExpressibilityInstance::new(base, target).expect("dimensions agree")
}

/// A deterministic instance whose target is a sum of `1..=max_terms` random
/// renamings of random base vectors into the data range, hence a YES instance.
pub fn random_planted_instance(
    seed: u64,
    shape: &InstanceShape,
    max_terms: usize,
) -> ExpressibilityInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=shape.max_base);
    let base: Vec<DataVector> = (0..count).map(|_| random_vector(&mut rng, shape)).collect();
    let mut target = DataVector::zero(shape.dim);
    let terms = rng.gen_range(1..=max_terms.max(1));
    for _ in 0..terms {
        let v = &base[rng.gen_range(0..base.len())];
        let map = random_injection(&mut rng, v, shape.data_range);
        target
            .add_assign(&v.apply_injection(&map).expect("domain is the support"))
            .expect("dimensions agree");
    }
    ExpressibilityInstance::new(base, target).expect("dimensions agree")
}

/// A deterministic instance over a reversible base set.
///
/// `1..max_base` random vectors are closed off by one more vector, the
/// negated sum of random renamings of them, so the weights sum to zero with
/// positive coefficients and every member is reversible. Even seeds get a
/// random target and odd seeds a planted one (a sum of at most `max_terms`
/// renamed base vectors).
pub fn random_reversible_instance(
    seed: u64,
    shape: &InstanceShape,
    max_terms: usize,
) -> ExpressibilityInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..shape.max_base.max(2));
    let mut base: Vec<DataVector> = (0..count).map(|_| random_vector(&mut rng, shape)).collect();
    let mut closing = DataVector::zero(shape.dim);
    for v in &base {
        let map = random_injection(&mut rng, v, shape.data_range);
        closing
            .add_assign(&v.apply_injection(&map).expect("domain is the support"))
            .expect("dimensions agree");
    }
    base.push(closing.neg());
    let target = if seed % 2 == 0 {
        random_vector(&mut rng, shape)
    } else {
        let mut t = DataVector::zero(shape.dim);
        for _ in 0..rng.gen_range(1..=max_terms.max(1)) {
            let v = &base[rng.gen_range(0..base.len())];
            let map = random_injection(&mut rng, v, shape.data_range);
            t.add_assign(&v.apply_injection(&map).expect("domain is the support"))
                .expect("dimensions agree");
        }
        t
    };
    ExpressibilityInstance::new(base, target).expect("dimensions agree")
}

fn random_injection(rng: &mut ChaCha8Rng, v: &DataVector, range: u64) -> FiniteInjection {
    let mut images: Vec<DataValue> = Vec::new();
    while images.len() < v.support_len() {
        let b = DataValue::new(rng.gen_range(0..range.max(v.support_len() as u64)));
        if !images.contains(&b) {
            images.push(b);
        }
    }
    FiniteInjection::new(v.support().zip(images)).expect("distinct images")
}
