//! Data values, integer tuples, finitely-supported data vectors and the
//! injection/permutation layer used to rename them.
//!
//! A [`DataVector`] maps finitely many [`DataValue`]s to nonzero [`Tuple`]s
//! in `Z^d`. Permutations of the (infinite) domain never appear as total
//! functions: renaming a vector is done through a [`FiniteInjection`] of its
//! support, which realizes exactly the vectors `v ∘ θ` for permutations `θ`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("injection domain does not cover support value {0}")]
    DomainNotCovered(DataValue),
    #[error("support value {0} lies outside the rotation set")]
    SupportNotContained(DataValue),
    #[error("mapping is not injective: {0} is hit twice")]
    NotInjective(DataValue),
}

/// An element of the countable data domain, identified by an interned id.
///
/// The total order on the domain is the id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataValue(u64);

impl DataValue {
    pub const fn new(id: u64) -> Self {
        DataValue(id)
    }

    pub const fn id(self) -> u64 {
        self.0
    }
}

/// Prints the name from the global interner, or `#<id>` for unnamed values.
impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match Interner::global().name(*self) {
            Some(name) => f.write_str(&name),
            None => write!(f, "#{}", self.0),
        }
    }
}

#[derive(Default)]
struct InternerState {
    by_name: HashMap<String, DataValue>,
    names: HashMap<DataValue, String>,
    next: u64,
}

/// Thread-safe name table for data values.
///
/// Names are assigned ids in order of first interning. The spelling `#<id>`
/// is reserved and denotes the raw id, which is how unnamed (fresh) values
/// are printed and read back.
#[derive(Default)]
pub struct Interner {
    state: RwLock<InternerState>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide interner used by the file formats.
    pub fn global() -> &'static Interner {
        static GLOBAL: OnceLock<Interner> = OnceLock::new();
        GLOBAL.get_or_init(Interner::new)
    }

    pub fn intern(&self, name: &str) -> DataValue {
        if let Some(raw) = parse_raw_id(name) {
            // Names are never given an id that was already spelled raw.
            let mut state = self.state.write().expect("interner poisoned");
            state.next = state.next.max(raw.0.saturating_add(1));
            return raw;
        }
        if let Some(v) = self
            .state
            .read()
            .expect("interner poisoned")
            .by_name
            .get(name)
        {
            return *v;
        }
        let mut state = self.state.write().expect("interner poisoned");
        if let Some(v) = state.by_name.get(name) {
            return *v;
        }
        let mut id = state.next;
        while state.names.contains_key(&DataValue(id)) {
            id += 1;
        }
        let value = DataValue(id);
        state.next = id + 1;
        state.by_name.insert(name.to_string(), value);
        state.names.insert(value, name.to_string());
        value
    }

    pub fn name(&self, value: DataValue) -> Option<String> {
        self.state
            .read()
            .expect("interner poisoned")
            .names
            .get(&value)
            .cloned()
    }

    /// The interned name, or `#<id>` for values that never received one.
    pub fn display(&self, value: DataValue) -> String {
        self.name(value).unwrap_or_else(|| format!("#{}", value.0))
    }
}

fn parse_raw_id(name: &str) -> Option<DataValue> {
    let digits = name.strip_prefix('#')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().map(DataValue)
}

/// The `count` smallest ids that do not occur in `used`.
pub fn fresh_values(used: &BTreeSet<DataValue>, count: usize) -> Vec<DataValue> {
    let mut out = Vec::with_capacity(count);
    let mut id = 0u64;
    while out.len() < count {
        let candidate = DataValue(id);
        if !used.contains(&candidate) {
            out.push(candidate);
        }
        id += 1;
    }
    out
}

/// An element of `Z^d` with arbitrary-precision entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple(Vec<BigInt>);

impl Tuple {
    pub fn new(entries: Vec<BigInt>) -> Self {
        Tuple(entries)
    }

    pub fn zero(dim: usize) -> Self {
        Tuple(vec![BigInt::zero(); dim])
    }

    pub fn from_i64s(entries: &[i64]) -> Self {
        Tuple(entries.iter().map(|&e| BigInt::from(e)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, k: &BigInt) -> Tuple {
        Tuple(self.0.iter().map(|e| e * k).collect())
    }

    pub fn max_abs(&self) -> BigInt {
        self.0.iter().map(|e| e.abs()).max().unwrap_or_default()
    }

    pub(crate) fn add_assign_ref(&mut self, other: &Tuple) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub(crate) fn sub_assign_ref(&mut self, other: &Tuple) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a -= b;
        }
    }
}

impl Add for &Tuple {
    type Output = Tuple;
    fn add(self, rhs: &Tuple) -> Tuple {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for &Tuple {
    type Output = Tuple;
    fn sub(self, rhs: &Tuple) -> Tuple {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Neg for &Tuple {
    type Output = Tuple;
    fn neg(self) -> Tuple {
        Tuple(self.0.iter().map(|e| -e).collect())
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A finitely-supported map from data values to `Z^d`.
///
/// Zero tuples are never stored, so the key set is exactly the support.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataVector {
    dim: usize,
    entries: BTreeMap<DataValue, Tuple>,
}

impl DataVector {
    pub fn zero(dim: usize) -> Self {
        DataVector {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a vector from `(value, tuple)` pairs. Repeated values are summed.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, VectorError>
    where
        I: IntoIterator<Item = (DataValue, Tuple)>,
    {
        if dim == 0 {
            return Err(VectorError::ZeroDimension);
        }
        let mut v = DataVector::zero(dim);
        for (alpha, t) in entries {
            if t.dim() != dim {
                return Err(VectorError::DimensionMismatch {
                    expected: dim,
                    found: t.dim(),
                });
            }
            v.add_at(alpha, &t);
        }
        Ok(v)
    }

    /// Convenience constructor from small integers.
    pub fn from_i64s(dim: usize, entries: &[(DataValue, &[i64])]) -> Result<Self, VectorError> {
        Self::from_entries(dim, entries.iter().map(|(a, t)| (*a, Tuple::from_i64s(t))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, alpha: DataValue) -> Option<&Tuple> {
        self.entries.get(&alpha)
    }

    /// `v(α)`, the zero tuple outside the support.
    pub fn value(&self, alpha: DataValue) -> Tuple {
        self.entries
            .get(&alpha)
            .cloned()
            .unwrap_or_else(|| Tuple::zero(self.dim))
    }

    pub fn support(&self) -> impl Iterator<Item = DataValue> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_set(&self) -> BTreeSet<DataValue> {
        self.entries.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DataValue, &Tuple)> + '_ {
        self.entries.iter().map(|(a, t)| (*a, t))
    }

    pub(crate) fn add_at(&mut self, alpha: DataValue, t: &Tuple) {
        if t.is_zero() {
            return;
        }
        match self.entries.get_mut(&alpha) {
            Some(cur) => {
                cur.add_assign_ref(t);
                if cur.is_zero() {
                    self.entries.remove(&alpha);
                }
            }
            None => {
                self.entries.insert(alpha, t.clone());
            }
        }
    }

    pub(crate) fn sub_at(&mut self, alpha: DataValue, t: &Tuple) {
        self.add_at(alpha, &-t);
    }

    fn check_dim(&self, other: &DataVector) -> Result<(), VectorError> {
        if self.dim != other.dim {
            return Err(VectorError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &DataVector) -> Result<DataVector, VectorError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (alpha, t) in &other.entries {
            out.add_at(*alpha, t);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DataVector) -> Result<DataVector, VectorError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (alpha, t) in &other.entries {
            out.sub_at(*alpha, t);
        }
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &DataVector) -> Result<(), VectorError> {
        self.check_dim(other)?;
        for (alpha, t) in &other.entries {
            self.add_at(*alpha, t);
        }
        Ok(())
    }

    pub fn neg(&self) -> DataVector {
        DataVector {
            dim: self.dim,
            entries: self.entries.iter().map(|(a, t)| (*a, -t)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> DataVector {
        if k.is_zero() {
            return DataVector::zero(self.dim);
        }
        DataVector {
            dim: self.dim,
            entries: self.entries.iter().map(|(a, t)| (*a, t.scale(k))).collect(),
        }
    }

    /// Sum of all values, invariant under renaming.
    pub fn weight(&self) -> Tuple {
        let mut w = Tuple::zero(self.dim);
        for t in self.entries.values() {
            w.add_assign_ref(t);
        }
        w
    }

    /// `v ∘ π⁻¹`: moves the value at `α` to `π(α)`.
    pub fn apply_injection(&self, pi: &FiniteInjection) -> Result<DataVector, VectorError> {
        let mut entries = BTreeMap::new();
        for (alpha, t) in &self.entries {
            let beta = pi
                .get(*alpha)
                .ok_or(VectorError::DomainNotCovered(*alpha))?;
            entries.insert(beta, t.clone());
        }
        Ok(DataVector {
            dim: self.dim,
            entries,
        })
    }

    /// Renames by a finite permutation (values outside its moved set stay put).
    pub fn permute(&self, theta: &Permutation) -> DataVector {
        DataVector {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(a, t)| (theta.apply(*a), t.clone()))
                .collect(),
        }
    }

    fn check_within(&self, set: &BTreeSet<DataValue>) -> Result<(), VectorError> {
        match self.support().find(|a| !set.contains(a)) {
            Some(a) => Err(VectorError::SupportNotContained(a)),
            None => Ok(()),
        }
    }

    /// Applies the `i`-fold rotation of `set` (each element moves to its
    /// successor in id order, the maximum wraps to the minimum).
    pub fn rotate(&self, set: &BTreeSet<DataValue>, i: usize) -> Result<DataVector, VectorError> {
        self.check_within(set)?;
        Ok(self.permute(&Permutation::rotation(set, i)))
    }

    /// Sum of all `|set|` rotations: equals `weight(v)` on `set` and zero elsewhere.
    pub fn equalize(&self, set: &BTreeSet<DataValue>) -> Result<DataVector, VectorError> {
        self.check_within(set)?;
        let mut out = DataVector::zero(self.dim);
        for i in 0..set.len() {
            out.add_assign(&self.permute(&Permutation::rotation(set, i)))?;
        }
        Ok(out)
    }

    /// The vector `⟦α ↦ g⟧`.
    pub fn lift(g: &Tuple, alpha: DataValue) -> DataVector {
        let mut v = DataVector::zero(g.dim());
        v.add_at(alpha, g);
        v
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.entries
            .values()
            .map(Tuple::max_abs)
            .max()
            .unwrap_or_default()
    }
}

impl fmt::Display for DataVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, t)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}:{t}")?;
        }
        write!(f, "}}")
    }
}

/// An injective map on a finite set of data values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FiniteInjection {
    map: BTreeMap<DataValue, DataValue>,
}

impl FiniteInjection {
    pub fn new<I>(pairs: I) -> Result<Self, VectorError>
    where
        I: IntoIterator<Item = (DataValue, DataValue)>,
    {
        let mut map = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (a, b) in pairs {
            if !seen.insert(b) {
                return Err(VectorError::NotInjective(b));
            }
            if map.insert(a, b).is_some() {
                return Err(VectorError::NotInjective(b));
            }
        }
        Ok(FiniteInjection { map })
    }

    pub fn identity<I: IntoIterator<Item = DataValue>>(domain: I) -> Self {
        FiniteInjection {
            map: domain.into_iter().map(|a| (a, a)).collect(),
        }
    }

    pub fn get(&self, alpha: DataValue) -> Option<DataValue> {
        self.map.get(&alpha).copied()
    }

    pub fn domain(&self) -> impl Iterator<Item = DataValue> + '_ {
        self.map.keys().copied()
    }

    pub fn range(&self) -> impl Iterator<Item = DataValue> + '_ {
        self.map.values().copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (DataValue, DataValue)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn restrict(&self, domain: &BTreeSet<DataValue>) -> FiniteInjection {
        FiniteInjection {
            map: self
                .map
                .iter()
                .filter(|(a, _)| domain.contains(a))
                .map(|(a, b)| (*a, *b))
                .collect(),
        }
    }

    /// `θ ∘ π`: first this injection, then the permutation.
    pub fn then(&self, theta: &Permutation) -> FiniteInjection {
        FiniteInjection {
            map: self
                .map
                .iter()
                .map(|(a, b)| (*a, theta.apply(*b)))
                .collect(),
        }
    }
}

/// A permutation of the data domain that moves only finitely many values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Permutation {
    moved: BTreeMap<DataValue, DataValue>,
}

impl Permutation {
    pub fn identity() -> Self {
        Self::default()
    }

    fn from_map(map: BTreeMap<DataValue, DataValue>) -> Self {
        Permutation {
            moved: map.into_iter().filter(|(a, b)| a != b).collect(),
        }
    }

    pub fn apply(&self, alpha: DataValue) -> DataValue {
        self.moved.get(&alpha).copied().unwrap_or(alpha)
    }

    pub fn swap(a: DataValue, b: DataValue) -> Self {
        Self::from_map([(a, b), (b, a)].into_iter().collect())
    }

    /// `i`-fold successor rotation of a finite set in id order.
    pub fn rotation(set: &BTreeSet<DataValue>, i: usize) -> Self {
        let elems: Vec<DataValue> = set.iter().copied().collect();
        let k = elems.len();
        if k == 0 {
            return Self::identity();
        }
        Self::from_map(
            elems
                .iter()
                .enumerate()
                .map(|(j, a)| (*a, elems[(j + i) % k]))
                .collect(),
        )
    }

    /// A permutation agreeing with `pi` on its domain; values of the range
    /// outside the domain are sent back onto the vacated domain values.
    pub fn extending(pi: &FiniteInjection) -> Self {
        let domain: BTreeSet<DataValue> = pi.domain().collect();
        let range: BTreeSet<DataValue> = pi.range().collect();
        let mut map: BTreeMap<DataValue, DataValue> = pi.pairs().collect();
        let vacated = domain.difference(&range);
        let incoming = range.difference(&domain);
        for (y, x) in incoming.zip(vacated) {
            map.insert(*y, *x);
        }
        Self::from_map(map)
    }

    pub fn moved(&self) -> impl Iterator<Item = DataValue> + '_ {
        self.moved.keys().copied()
    }
}
