//! Histograms: nonnegative integer tables over rows `S` whose rows all sum to
//! the degree `n` and whose columns sum to at most `n`.
//!
//! A histogram of degree `n` is exactly a sum of `n` simple (degree one)
//! histograms; [`decompose`] computes such a sum by repeatedly extracting a
//! simple histogram that covers every saturated column.

pub mod matching;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use thiserror::Error;

use crate::vector::{DataValue, DataVector, FiniteInjection, Tuple};
use matching::{combine_matchings, max_matching_from, max_matching_into, BipartiteGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistogramError {
    #[error("histogram has no rows")]
    EmptyRows,
    #[error("row {0} is listed twice")]
    DuplicateRow(DataValue),
    #[error("entry refers to row {0}, which is not in the row set")]
    UnknownRow(DataValue),
    #[error("row {row} sums to {sum}, expected {expected}")]
    UnequalRowSums {
        row: DataValue,
        sum: u64,
        expected: u64,
    },
    #[error("column {column} sums to {sum}, exceeding the degree {degree}")]
    ColumnOverflow {
        column: DataValue,
        sum: u64,
        degree: u64,
    },
    #[error("row sets differ")]
    RowMismatch,
    #[error("histogram rows do not match the vector support")]
    SupportMismatch,
    #[error("expected a simple histogram, found degree {0}")]
    NotSimple(u64),
    #[error("cannot extract from a histogram of degree 0")]
    DegreeZero,
    #[error("entry overflow")]
    Overflow,
}

/// A validated histogram over a finite, sorted row set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    rows: Vec<DataValue>,
    entries: BTreeMap<(DataValue, DataValue), u64>,
    degree: u64,
}

impl Histogram {
    /// Checks both histogram conditions and derives the degree from the row sums.
    pub fn validate<R, E>(rows: R, entries: E) -> Result<Histogram, HistogramError>
    where
        R: IntoIterator<Item = DataValue>,
        E: IntoIterator<Item = (DataValue, DataValue, u64)>,
    {
        let mut row_set = BTreeSet::new();
        for r in rows {
            if !row_set.insert(r) {
                return Err(HistogramError::DuplicateRow(r));
            }
        }
        if row_set.is_empty() {
            return Err(HistogramError::EmptyRows);
        }
        let mut table: BTreeMap<(DataValue, DataValue), u64> = BTreeMap::new();
        for (a, b, k) in entries {
            if !row_set.contains(&a) {
                return Err(HistogramError::UnknownRow(a));
            }
            if k == 0 {
                continue;
            }
            let slot = table.entry((a, b)).or_insert(0);
            *slot = slot.checked_add(k).ok_or(HistogramError::Overflow)?;
        }
        let h = Histogram {
            rows: row_set.into_iter().collect(),
            entries: table,
            degree: 0,
        };
        h.with_checked_degree()
    }

    fn with_checked_degree(mut self) -> Result<Histogram, HistogramError> {
        let sums = self.row_sums()?;
        let expected = sums[0].1;
        for &(row, sum) in &sums {
            if sum != expected {
                return Err(HistogramError::UnequalRowSums { row, sum, expected });
            }
        }
        for (column, sum) in self.column_sums()? {
            if sum > expected {
                return Err(HistogramError::ColumnOverflow {
                    column,
                    sum,
                    degree: expected,
                });
            }
        }
        self.degree = expected;
        Ok(self)
    }

    /// The degree-0 histogram over `rows`.
    pub fn zero<R: IntoIterator<Item = DataValue>>(rows: R) -> Result<Histogram, HistogramError> {
        Self::validate(rows, std::iter::empty())
    }

    pub fn rows(&self) -> &[DataValue] {
        &self.rows
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn get(&self, row: DataValue, column: DataValue) -> u64 {
        self.entries.get(&(row, column)).copied().unwrap_or(0)
    }

    /// Nonzero entries in (row, column) order.
    pub fn entries(&self) -> impl Iterator<Item = (DataValue, DataValue, u64)> + '_ {
        self.entries.iter().map(|(&(a, b), &k)| (a, b, k))
    }

    fn row_sums(&self) -> Result<Vec<(DataValue, u64)>, HistogramError> {
        let mut sums: BTreeMap<DataValue, u64> = self.rows.iter().map(|r| (*r, 0)).collect();
        for (&(a, _), &k) in &self.entries {
            let s = sums.get_mut(&a).expect("rows validated");
            *s = s.checked_add(k).ok_or(HistogramError::Overflow)?;
        }
        Ok(sums.into_iter().collect())
    }

    pub fn column_sums(&self) -> Result<BTreeMap<DataValue, u64>, HistogramError> {
        let mut sums: BTreeMap<DataValue, u64> = BTreeMap::new();
        for (&(_, b), &k) in &self.entries {
            let s = sums.entry(b).or_insert(0);
            *s = s.checked_add(k).ok_or(HistogramError::Overflow)?;
        }
        Ok(sums)
    }

    /// Columns with a positive sum.
    pub fn support(&self) -> BTreeSet<DataValue> {
        self.entries.keys().map(|&(_, b)| b).collect()
    }

    pub fn add(&self, other: &Histogram) -> Result<Histogram, HistogramError> {
        if self.rows != other.rows {
            return Err(HistogramError::RowMismatch);
        }
        let mut entries = self.entries.clone();
        for (&key, &k) in &other.entries {
            let slot = entries.entry(key).or_insert(0);
            *slot = slot.checked_add(k).ok_or(HistogramError::Overflow)?;
        }
        Ok(Histogram {
            rows: self.rows.clone(),
            entries,
            degree: self
                .degree
                .checked_add(other.degree)
                .ok_or(HistogramError::Overflow)?,
        })
    }

    /// `self - x` for a simple `x ≤ self`, without revalidation.
    fn minus_simple(&self, x: &SimpleHistogram) -> Histogram {
        let mut entries = self.entries.clone();
        for (a, b, _) in x.0.entries() {
            let slot = entries.get_mut(&(a, b)).expect("x is below self");
            *slot -= 1;
            if *slot == 0 {
                entries.remove(&(a, b));
            }
        }
        Histogram {
            rows: self.rows.clone(),
            entries,
            degree: self.degree - 1,
        }
    }
}

/// A histogram of degree one: one unit per row, at most one per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleHistogram(Histogram);

impl SimpleHistogram {
    pub fn new(h: Histogram) -> Result<Self, HistogramError> {
        if h.degree != 1 {
            return Err(HistogramError::NotSimple(h.degree));
        }
        Ok(SimpleHistogram(h))
    }

    /// `H_π`, with a one at `(α, π(α))`.
    pub fn from_injection(pi: &FiniteInjection) -> Result<Self, HistogramError> {
        let h = Histogram::validate(pi.domain(), pi.pairs().map(|(a, b)| (a, b, 1)))?;
        Self::new(h)
    }

    /// `π_H`, the unique injection with `H(α, π_H(α)) = 1`.
    pub fn to_injection(&self) -> FiniteInjection {
        FiniteInjection::new(self.0.entries().map(|(a, b, _)| (a, b)))
            .expect("simple histograms have at most one unit per column")
    }

    pub fn histogram(&self) -> &Histogram {
        &self.0
    }

    pub fn into_histogram(self) -> Histogram {
        self.0
    }
}

/// `⟨v, H⟩(β) = Σ_α v(α)·H(α, β)`.
pub fn eval(v: &DataVector, h: &Histogram) -> Result<DataVector, HistogramError> {
    if !v.support().eq(h.rows().iter().copied()) {
        return Err(HistogramError::SupportMismatch);
    }
    let mut out = DataVector::zero(v.dim());
    for (a, b, k) in h.entries() {
        let t: Tuple = v
            .get(a)
            .expect("rows equal support")
            .scale(&BigInt::from(k));
        out.add_at(b, &t);
    }
    Ok(out)
}

/// Splits off a simple `X ≤ H` that has a unit in every column whose sum
/// equals the degree, so that `H - X` is a histogram of degree `n - 1`.
pub fn extract_simple(h: &Histogram) -> Result<(SimpleHistogram, Histogram), HistogramError> {
    if h.degree == 0 {
        return Err(HistogramError::DegreeZero);
    }
    let columns: Vec<DataValue> = h.support().into_iter().collect();
    let col_index: BTreeMap<DataValue, usize> =
        columns.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let row_index: BTreeMap<DataValue, usize> =
        h.rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let graph = BipartiteGraph::new(
        h.rows.len(),
        columns.len(),
        h.entries().map(|(a, b, _)| (row_index[&a], col_index[&b])),
    );
    let saturated: Vec<usize> = h
        .column_sums()?
        .into_iter()
        .filter(|&(_, s)| s == h.degree)
        .map(|(c, _)| col_index[&c])
        .collect();
    let all_rows: Vec<usize> = (0..h.rows.len()).collect();

    // Both matchings exist by Hall's condition, which the histogram
    // conditions guarantee.
    let m_rows = max_matching_from(&graph, &all_rows);
    let m_cols = max_matching_into(&graph, &saturated);
    let merged = combine_matchings(&graph, &m_rows, &all_rows, &m_cols, &saturated)
        .expect("histogram conditions imply Hall's condition on rows and saturated columns");

    let x = Histogram::validate(
        h.rows.iter().copied(),
        merged.edges().map(|(l, r)| (h.rows[l], columns[r], 1)),
    )?;
    let x = SimpleHistogram::new(x)?;
    let rest = h.minus_simple(&x);
    Ok((x, rest))
}

/// Writes `H` as a sum of exactly `degree(H)` simple histograms.
pub fn decompose(h: &Histogram) -> Result<Vec<SimpleHistogram>, HistogramError> {
    let mut parts = Vec::with_capacity(h.degree as usize);
    let mut rest = h.clone();
    while rest.degree > 0 {
        let (x, r) = extract_simple(&rest)?;
        parts.push(x);
        rest = r;
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(id: u64) -> DataValue {
        DataValue::new(id)
    }

    // Rows α1 = 1, α2 = 2; columns β1..β5 = 11..15.
    fn degree_four_example() -> Histogram {
        Histogram::validate(
            [d(1), d(2)],
            [
                (d(1), d(12), 2),
                (d(1), d(13), 1),
                (d(1), d(15), 1),
                (d(2), d(11), 3),
                (d(2), d(13), 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn degree_four_example_validates() {
        let h = degree_four_example();
        assert_eq!(h.degree(), 4);
        assert_eq!(
            h.support(),
            [d(11), d(12), d(13), d(15)].into_iter().collect()
        );
    }

    #[test]
    fn single_unit_is_simple() {
        let h = Histogram::validate([d(0)], [(d(0), d(1), 1)]).unwrap();
        assert_eq!(h.degree(), 1);
        assert!(SimpleHistogram::new(h).is_ok());
    }

    #[test]
    fn validation_errors() {
        let unequal = Histogram::validate([d(1), d(2)], [(d(1), d(5), 2), (d(2), d(6), 3)]);
        assert!(matches!(
            unequal,
            Err(HistogramError::UnequalRowSums { .. })
        ));
        let overflow = Histogram::validate([d(1), d(2)], [(d(1), d(5), 1), (d(2), d(5), 1)]);
        assert!(matches!(
            overflow,
            Err(HistogramError::ColumnOverflow { .. })
        ));
        assert_eq!(
            Histogram::validate([], [(d(1), d(5), 1)]),
            Err(HistogramError::EmptyRows)
        );
        assert_eq!(
            Histogram::validate([d(1)], [(d(2), d(5), 1)]),
            Err(HistogramError::UnknownRow(d(2)))
        );
    }

    #[test]
    fn eval_of_degree_four_example_gives_column_sums() {
        let v = DataVector::from_i64s(1, &[(d(1), &[1]), (d(2), &[1])]).unwrap();
        let out = eval(&v, &degree_four_example()).unwrap();
        let expected = DataVector::from_i64s(
            1,
            &[(d(11), &[3]), (d(12), &[2]), (d(13), &[2]), (d(15), &[1])],
        )
        .unwrap();
        assert_eq!(out, expected);
        let wrong = DataVector::from_i64s(1, &[(d(1), &[1])]).unwrap();
        assert_eq!(
            eval(&wrong, &degree_four_example()),
            Err(HistogramError::SupportMismatch)
        );
    }

    #[test]
    fn addition_adds_degrees() {
        let a = Histogram::validate([d(0)], [(d(0), d(1), 2)]).unwrap();
        let b = Histogram::validate([d(0)], [(d(0), d(2), 3)]).unwrap();
        assert_eq!(a.add(&b).unwrap().degree(), 5);
        let zero = Histogram::zero([d(0)]).unwrap();
        assert_eq!(a.add(&zero).unwrap(), a);
        let other_rows = Histogram::zero([d(9)]).unwrap();
        assert_eq!(a.add(&other_rows), Err(HistogramError::RowMismatch));
    }

    #[test]
    fn degree_four_example_decomposes_into_four() {
        let h = degree_four_example();
        let parts = decompose(&h).unwrap();
        assert_eq!(parts.len(), 4);
        let mut sum = Histogram::zero(h.rows().iter().copied()).unwrap();
        for p in &parts {
            sum = sum.add(p.histogram()).unwrap();
        }
        assert_eq!(sum, h);
    }

    #[test]
    fn extraction_covers_saturated_columns() {
        // Column 10 is saturated (sum 2 = degree).
        let h = Histogram::validate(
            [d(1), d(2)],
            [
                (d(1), d(10), 1),
                (d(1), d(11), 1),
                (d(2), d(10), 1),
                (d(2), d(12), 1),
            ],
        )
        .unwrap();
        let (x, rest) = extract_simple(&h).unwrap();
        let cols = x.histogram().column_sums().unwrap();
        assert_eq!(cols.get(&d(10)), Some(&1));
        assert_eq!(rest.degree(), 1);
        assert!(Histogram::validate(rest.rows().iter().copied(), rest.entries()).is_ok());
    }

    #[test]
    fn simple_histogram_extracts_to_itself() {
        let h = Histogram::validate([d(0), d(1)], [(d(0), d(3), 1), (d(1), d(0), 1)]).unwrap();
        let (x, rest) = extract_simple(&h).unwrap();
        assert_eq!(x.histogram(), &h);
        assert_eq!(rest.degree(), 0);
        assert_eq!(decompose(&h).unwrap(), vec![x]);
    }

    #[test]
    fn injection_round_trip() {
        let pi = FiniteInjection::new([(d(0), d(1))]).unwrap();
        let h = SimpleHistogram::from_injection(&pi).unwrap();
        assert_eq!(h.histogram().get(d(0), d(1)), 1);
        assert_eq!(h.to_injection(), pi);
        let not_simple = Histogram::validate([d(0)], [(d(0), d(1), 2)]).unwrap();
        assert_eq!(
            SimpleHistogram::new(not_simple),
            Err(HistogramError::NotSimple(2))
        );
    }
}
