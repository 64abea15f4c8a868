//! Exact-arithmetic kernels: rational LP feasibility, nonnegative integer
//! feasibility, Hermite normal form and integer subgroup membership.
//!
//! Nothing here touches floating point. Rational rows are scaled to
//! primitive integer rows before any elimination.

mod hnf;
mod ilp;
mod lp;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use hnf::{
    hnf, integer_solution, subgroup_contains, subgroup_form, subgroup_member, HermiteForm,
};
pub use ilp::{
    ilp_feasible, ilp_feasible_with_stats, lattice_relaxation_feasible, minimal_solution_bound,
    IlpInstance,
};
pub use lp::{lp_feasible, lp_feasible_with_stats};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable index {0} out of range")]
    VariableOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        })
    }
}

/// One row `Σ coeff·x (rel) rhs`, stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A linear system over variables `x_j ≥ lower_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    num_vars: usize,
    rows: Vec<Constraint>,
    lower: Vec<Rational>,
}

impl LinearSystem {
    /// A system with `num_vars` variables, all bounded below by zero.
    pub fn new(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            rows: Vec::new(),
            lower: vec![Rational::zero(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn lower_bounds(&self) -> &[Rational] {
        &self.lower
    }

    pub fn set_lower(&mut self, var: usize, bound: Rational) -> Result<(), LinalgError> {
        *self
            .lower
            .get_mut(var)
            .ok_or(LinalgError::VariableOutOfRange(var))? = bound;
        Ok(())
    }

    /// Adds a row; repeated variable indices are summed and zeros dropped.
    pub fn add_row<I>(
        &mut self,
        coeffs: I,
        relation: Relation,
        rhs: Rational,
    ) -> Result<(), LinalgError>
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut merged: std::collections::BTreeMap<usize, Rational> = Default::default();
        for (j, c) in coeffs {
            if j >= self.num_vars {
                return Err(LinalgError::VariableOutOfRange(j));
            }
            *merged.entry(j).or_insert_with(Rational::zero) += c;
        }
        self.rows.push(Constraint {
            coeffs: merged.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            relation,
            rhs,
        });
        Ok(())
    }

    /// Integer-coefficient convenience wrapper around [`Self::add_row`].
    pub fn add_int_row<I>(
        &mut self,
        coeffs: I,
        relation: Relation,
        rhs: BigInt,
    ) -> Result<(), LinalgError>
    where
        I: IntoIterator<Item = (usize, BigInt)>,
    {
        self.add_row(
            coeffs
                .into_iter()
                .map(|(j, c)| (j, Rational::from_integer(c))),
            relation,
            Rational::from_integer(rhs),
        )
    }

    pub fn dense_row(&self, i: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.num_vars];
        for (j, c) in &self.rows[i].coeffs {
            out[*j] = c.clone();
        }
        out
    }

    /// Whether `x` satisfies every row and lower bound exactly.
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        if x.iter().zip(&self.lower).any(|(v, l)| v < l) {
            return false;
        }
        self.rows.iter().all(|row| {
            let lhs: Rational = row
                .coeffs
                .iter()
                .map(|(j, c)| c * &x[*j])
                .fold(Rational::zero(), |a, b| a + b);
            match row.relation {
                Relation::Eq => lhs == row.rhs,
                Relation::Le => lhs <= row.rhs,
                Relation::Ge => lhs >= row.rhs,
            }
        })
    }

    /// Plain-text dump: one row per line, rationals as `p/q`.
    pub fn to_matrix_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows.len() {
            let cells: Vec<String> = self.dense_row(i).iter().map(format_rational).collect();
            out.push_str(&cells.join(" "));
            out.push_str(&format!(
                " {} {}\n",
                self.rows[i].relation,
                format_rational(&self.rows[i].rhs)
            ));
        }
        out
    }
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Counters reported by the solvers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub lp_solves: u64,
    pub lp_pivots: u64,
    pub branches: u64,
}

impl SolverStats {
    pub fn absorb(&mut self, other: &SolverStats) {
        self.lp_solves += other.lp_solves;
        self.lp_pivots += other.lp_pivots;
        self.branches += other.branches;
    }
}

/// Scales a rational row (coefficients and rhs) to a primitive integer row.
pub(crate) fn integer_row(
    coeffs: &[(usize, Rational)],
    rhs: &Rational,
) -> (Vec<(usize, BigInt)>, BigInt) {
    let mut l = rhs.denom().clone();
    for (_, c) in coeffs {
        l = l.lcm(c.denom());
    }
    let scale = |q: &Rational| q.numer() * (&l / q.denom());
    let mut ints: Vec<(usize, BigInt)> = coeffs.iter().map(|(j, c)| (*j, scale(c))).collect();
    let mut b = scale(rhs);
    let mut g = b.abs();
    for (_, c) in &ints {
        g = g.gcd(c);
    }
    if !g.is_zero() && !g.is_one() {
        for (_, c) in ints.iter_mut() {
            *c /= &g;
        }
        b /= &g;
    }
    (ints, b)
}
