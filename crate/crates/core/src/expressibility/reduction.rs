//! The histogram system: one nonnegative integer unknown per cell
//! `H_v(α, β)` with `α ∈ supp(v)` and `β` in a finite column set, plus one
//! degree unknown `n_v` per nonzero base vector.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{support_bound, DegreeMode, ExpressibilityInstance};
use crate::linalg::{IlpInstance, LinearSystem, Relation};
use crate::vector::{fresh_values, DataValue};

/// Names the unknowns of a histogram system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpLegend {
    columns: Vec<DataValue>,
    fresh: Vec<DataValue>,
    /// `(base index, row, column)` for each cell unknown, in variable order.
    cells: Vec<(usize, DataValue, DataValue)>,
    /// Degree unknown of each base vector; `None` for zero vectors.
    degree_vars: Vec<Option<usize>>,
}

impl IlpLegend {
    /// The column set: target support first, then fresh values.
    pub fn columns(&self) -> &[DataValue] {
        &self.columns
    }

    pub fn fresh_columns(&self) -> &[DataValue] {
        &self.fresh
    }

    pub fn num_vars(&self) -> usize {
        self.cells.len() + self.degree_vars.iter().flatten().count()
    }

    pub fn degree_var(&self, base: usize) -> Option<usize> {
        self.degree_vars.get(base).copied().flatten()
    }

    /// Human-readable name of unknown `var`.
    pub fn describe(&self, var: usize) -> String {
        if let Some((i, a, b)) = self.cells.get(var) {
            return format!("H{i}({a},{b})");
        }
        match self.degree_vars.iter().position(|d| *d == Some(var)) {
            Some(i) => format!("n{i}"),
            None => format!("?{var}"),
        }
    }

    /// One line per unknown: index and name.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for var in 0..self.num_vars() {
            let _ = writeln!(out, "{var} {}", self.describe(var));
        }
        out
    }

    /// Positive cells of base vector `base` in a solution.
    pub fn histogram_entries(
        &self,
        base: usize,
        solution: &[BigInt],
    ) -> Vec<(DataValue, DataValue, BigInt)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(j, (i, _, _))| *i == base && !solution[*j].is_zero())
            .map(|(j, (_, a, b))| (*a, *b, solution[j].clone()))
            .collect()
    }
}

pub(crate) fn full_fresh_count(inst: &ExpressibilityInstance) -> usize {
    support_bound(inst) - inst.target().support_len()
}

/// The histogram system at the full support bound, with every degree free.
pub fn build_ilp(inst: &ExpressibilityInstance) -> (IlpInstance, IlpLegend) {
    let modes = vec![DegreeMode::Free; inst.base().len()];
    build_ilp_with_fresh(inst, &modes, full_fresh_count(inst))
}

/// The histogram system over `supp(x)` plus `fresh` fresh columns.
///
/// Fresh columns are interchangeable, so their total column sums are
/// required to be non-increasing in id order.
pub fn build_ilp_with_fresh(
    inst: &ExpressibilityInstance,
    modes: &[DegreeMode],
    fresh: usize,
) -> (IlpInstance, IlpLegend) {
    let target = inst.target();
    let fresh_cols = fresh_values(&inst.data_values(), fresh);
    let columns: Vec<DataValue> = target.support().chain(fresh_cols.iter().copied()).collect();

    let mut cells = Vec::new();
    for (i, v) in inst.base().iter().enumerate() {
        for a in v.support() {
            for &b in &columns {
                cells.push((i, a, b));
            }
        }
    }
    let mut degree_vars = Vec::with_capacity(inst.base().len());
    let mut next = cells.len();
    for v in inst.base() {
        if v.is_zero() {
            degree_vars.push(None);
        } else {
            degree_vars.push(Some(next));
            next += 1;
        }
    }
    let legend = IlpLegend {
        columns,
        fresh: fresh_cols,
        cells,
        degree_vars,
    };
    let mut sys = LinearSystem::new(legend.num_vars());
    let one = BigInt::one();
    let ncols = legend.columns.len();
    let cell = |base_offset: usize, row: usize, col: usize| base_offset + row * ncols + col;

    let mut offsets = Vec::with_capacity(inst.base().len());
    let mut offset = 0;
    for v in inst.base() {
        offsets.push(offset);
        offset += v.support_len() * ncols;
    }

    for (i, v) in inst.base().iter().enumerate() {
        let Some(n) = legend.degree_vars[i] else {
            continue;
        };
        for r in 0..v.support_len() {
            let mut row: Vec<(usize, BigInt)> = (0..ncols)
                .map(|c| (cell(offsets[i], r, c), one.clone()))
                .collect();
            row.push((n, -&one));
            sys.add_int_row(row, Relation::Eq, BigInt::zero())
                .expect("indices in range");
        }
        for c in 0..ncols {
            let mut row: Vec<(usize, BigInt)> = (0..v.support_len())
                .map(|r| (cell(offsets[i], r, c), one.clone()))
                .collect();
            row.push((n, -&one));
            sys.add_int_row(row, Relation::Le, BigInt::zero())
                .expect("indices in range");
        }
        if let DegreeMode::Exact(m) = modes[i] {
            sys.add_int_row([(n, one.clone())], Relation::Eq, BigInt::from(m))
                .expect("indices in range");
        }
    }

    for (c, &beta) in legend.columns.iter().enumerate() {
        let x_beta = target.value(beta);
        for k in 0..inst.dim() {
            let mut row = Vec::new();
            for (i, v) in inst.base().iter().enumerate() {
                for (r, (_, t)) in v.iter().enumerate() {
                    let coeff = &t.entries()[k];
                    if !coeff.is_zero() {
                        row.push((cell(offsets[i], r, c), coeff.clone()));
                    }
                }
            }
            let rhs = x_beta.entries()[k].clone();
            if row.is_empty() && rhs.is_zero() {
                continue;
            }
            sys.add_int_row(row, Relation::Eq, rhs)
                .expect("indices in range");
        }
    }

    let first_fresh = target.support_len();
    for c in first_fresh..ncols.saturating_sub(1) {
        let mut row = Vec::new();
        for (i, v) in inst.base().iter().enumerate() {
            for r in 0..v.support_len() {
                row.push((cell(offsets[i], r, c), one.clone()));
                row.push((cell(offsets[i], r, c + 1), -&one));
            }
        }
        if !row.is_empty() {
            sys.add_int_row(row, Relation::Ge, BigInt::zero())
                .expect("indices in range");
        }
    }

    (IlpInstance::new(sys), legend)
}
