//! Phase-one simplex over the integers.
//!
//! Every tableau row is kept as a primitive integer vector. A row is an
//! equation, so scaling it by a positive constant changes nothing; after each
//! pivot the updated rows are divided by their content. The basic variable of
//! a row has a positive (not necessarily unit) coefficient there. The entering
//! variable has the largest objective coefficient, except during a run of
//! degenerate pivots, where Bland's rule takes over so that cycling cannot
//! occur. Ties in the ratio test go to the smallest basic variable.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{integer_row, LinearSystem, Rational, Relation, SolverStats};

/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_PATIENCE: usize = 8;

/// A row over variables `y ≥ 0` with integer data.
#[derive(Debug, Clone)]
pub(crate) struct IntRow {
    pub coeffs: Vec<(usize, BigInt)>,
    pub relation: Relation,
    pub rhs: BigInt,
}

/// Returns a nonnegative rational point satisfying every row of `sys`
/// (including its lower bounds), or `None` if there is none.
pub fn lp_feasible(sys: &LinearSystem) -> Option<Vec<Rational>> {
    lp_feasible_with_stats(sys, &mut SolverStats::default())
}

pub fn lp_feasible_with_stats(
    sys: &LinearSystem,
    stats: &mut SolverStats,
) -> Option<Vec<Rational>> {
    let lower = sys.lower_bounds();
    let rows: Vec<IntRow> = sys
        .rows()
        .iter()
        .map(|row| {
            let shift: Rational = row
                .coeffs
                .iter()
                .map(|(j, c)| c * &lower[*j])
                .fold(Rational::zero(), |a, b| a + b);
            let (coeffs, rhs) = integer_row(&row.coeffs, &(&row.rhs - shift));
            IntRow {
                coeffs,
                relation: row.relation,
                rhs,
            }
        })
        .collect();
    let y = solve_nonnegative(&rows, sys.num_vars(), stats)?;
    Some(y.into_iter().zip(lower).map(|(v, l)| v + l).collect())
}

/// Phase one of the simplex method on `rows` over `num_vars` variables `≥ 0`.
pub(crate) fn solve_nonnegative(
    rows: &[IntRow],
    num_vars: usize,
    stats: &mut SolverStats,
) -> Option<Vec<Rational>> {
    WarmLp::solve(rows, num_vars, stats).map(|(_, x)| x)
}

/// A feasible final tableau, kept so that rows can be added later without
/// solving from scratch.
///
/// Tableaux run on `i128` entries and switch to `BigInt` entries if an
/// intermediate value would not fit, redoing the interrupted solve from the
/// original rows.
#[derive(Clone)]
pub(crate) enum WarmLp {
    Small(Tableau<i128>),
    Big(Tableau<BigInt>),
}

impl WarmLp {
    /// Solves `rows` from scratch; `None` when infeasible.
    pub(crate) fn solve(
        rows: &[IntRow],
        num_vars: usize,
        stats: &mut SolverStats,
    ) -> Option<(WarmLp, Vec<Rational>)> {
        stats.lp_solves += 1;
        match Tableau::<i128>::solve(rows, num_vars, stats) {
            Ok(out) => out.map(|(t, x)| (WarmLp::Small(t), x)),
            Err(Overflow) => Tableau::<BigInt>::solve(rows, num_vars, stats)
                .expect("big integers do not overflow")
                .map(|(t, x)| (WarmLp::Big(t), x)),
        }
    }

    /// Adds `extra` to this feasible system and resumes phase one. `all`
    /// must produce the whole new system, for the overflow fallback.
    pub(crate) fn extend(
        &self,
        extra: &[IntRow],
        num_vars: usize,
        all: impl FnOnce() -> Vec<IntRow>,
        stats: &mut SolverStats,
    ) -> Option<(WarmLp, Vec<Rational>)> {
        stats.lp_solves += 1;
        match self {
            WarmLp::Small(t) => match t.clone().resume(extra, num_vars, stats) {
                Ok(out) => out.map(|(t, x)| (WarmLp::Small(t), x)),
                Err(Overflow) => {
                    let rows = all();
                    Tableau::<BigInt>::solve(&rows, num_vars, stats)
                        .expect("big integers do not overflow")
                        .map(|(t, x)| (WarmLp::Big(t), x))
                }
            },
            WarmLp::Big(t) => t
                .clone()
                .resume(extra, num_vars, stats)
                .expect("big integers do not overflow")
                .map(|(t, x)| (WarmLp::Big(t), x)),
        }
    }
}

#[derive(Debug)]
pub(crate) struct Overflow;

/// Exact integer arithmetic for tableau entries, failing on overflow.
pub(crate) trait Entry: Clone + Ord + Integer + Signed {
    fn from_big(x: &BigInt) -> Result<Self, Overflow>;
    fn to_big(&self) -> BigInt;
    fn exact_add(&self, other: &Self) -> Result<Self, Overflow>;
    fn exact_sub(&self, other: &Self) -> Result<Self, Overflow>;
    fn exact_mul(&self, other: &Self) -> Result<Self, Overflow>;
}

impl Entry for BigInt {
    fn from_big(x: &BigInt) -> Result<Self, Overflow> {
        Ok(x.clone())
    }

    fn to_big(&self) -> BigInt {
        self.clone()
    }

    fn exact_add(&self, other: &Self) -> Result<Self, Overflow> {
        Ok(self + other)
    }

    fn exact_sub(&self, other: &Self) -> Result<Self, Overflow> {
        Ok(self - other)
    }

    fn exact_mul(&self, other: &Self) -> Result<Self, Overflow> {
        Ok(self * other)
    }
}

/// `i128::MIN` is rejected too, so that negation, `abs` and `gcd` never
/// overflow.
fn fits(x: Option<i128>) -> Result<i128, Overflow> {
    match x {
        Some(v) if v != i128::MIN => Ok(v),
        _ => Err(Overflow),
    }
}

impl Entry for i128 {
    fn from_big(x: &BigInt) -> Result<Self, Overflow> {
        fits(x.to_i128())
    }

    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }

    fn exact_add(&self, other: &Self) -> Result<Self, Overflow> {
        fits(self.checked_add(*other))
    }

    fn exact_sub(&self, other: &Self) -> Result<Self, Overflow> {
        fits(self.checked_sub(*other))
    }

    fn exact_mul(&self, other: &Self) -> Result<Self, Overflow> {
        fits(self.checked_mul(*other))
    }
}

/// Basis entries at or above this mark are artificial variables.
const ARTIFICIAL: usize = usize::MAX / 2;

#[derive(Clone)]
pub(crate) struct Tableau<T> {
    /// Each row holds `width` coefficients followed by the right-hand side.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// Phase-one objective `scale·w + Σ obj_j·x_j = obj_rhs`.
    obj: Vec<T>,
    obj_scale: T,
    /// Artificial variables are not stored: once they leave the basis they
    /// never re-enter, so their columns are never read. A basic artificial
    /// is recorded by an index from `ARTIFICIAL` on.
    width: usize,
    artificials: usize,
}

impl<T: Entry> Tableau<T> {
    fn solve(
        rows: &[IntRow],
        num_vars: usize,
        stats: &mut SolverStats,
    ) -> Result<Option<(Self, Vec<Rational>)>, Overflow> {
        let tableau = Self::build(rows, num_vars)?;
        tableau.finish(num_vars, stats)
    }

    fn finish(
        mut self,
        num_vars: usize,
        stats: &mut SolverStats,
    ) -> Result<Option<(Self, Vec<Rational>)>, Overflow> {
        Ok(if self.run(stats)? {
            let x = self.structural_values(num_vars);
            Some((self, x))
        } else {
            None
        })
    }

    /// Appends rows to a feasible final tableau and resumes phase one.
    fn resume(
        mut self,
        extra: &[IntRow],
        num_vars: usize,
        stats: &mut SolverStats,
    ) -> Result<Option<(Self, Vec<Rational>)>, Overflow> {
        for row in extra {
            self.add_row(row)?;
        }
        self.finish(num_vars, stats)
    }

    /// Adds one row, with a new slack column for an inequality, expressed in
    /// the current basis. If the current point violates it, the row gets an
    /// artificial that joins the objective.
    fn add_row(&mut self, row: &IntRow) -> Result<(), Overflow> {
        let slack = match row.relation {
            Relation::Eq => None,
            Relation::Le => Some(T::one()),
            Relation::Ge => Some(-T::one()),
        };
        if slack.is_some() {
            for r in self.rows.iter_mut().chain(std::iter::once(&mut self.obj)) {
                r.insert(self.width, T::zero());
            }
            self.width += 1;
        }
        let width = self.width;
        let mut dense = vec![T::zero(); width + 1];
        for (j, c) in &row.coeffs {
            dense[*j] = T::from_big(c)?;
        }
        dense[width] = T::from_big(&row.rhs)?;
        let slack_col = width - 1;
        if let Some(s) = &slack {
            dense[slack_col] = s.clone();
        }
        for (i, basic) in self.rows.iter().enumerate() {
            let b = self.basis[i];
            if b < width && !dense[b].is_zero() {
                let p = basic[b].clone();
                let nonzero: Vec<usize> = (0..=width).filter(|&j| !basic[j].is_zero()).collect();
                eliminate(&mut dense, basic, &p, b, &nonzero)?;
            }
        }
        if dense[width].is_negative() {
            for x in dense.iter_mut() {
                *x = -x.clone();
            }
        }
        if slack.is_some() && dense[slack_col].is_positive() {
            self.basis.push(slack_col);
        } else {
            self.basis.push(ARTIFICIAL + self.artificials);
            self.artificials += 1;
            for (o, x) in self.obj.iter_mut().zip(&dense) {
                if !x.is_zero() {
                    *o = o.exact_add(&x.exact_mul(&self.obj_scale)?)?;
                }
            }
            self.reduce_objective();
        }
        self.rows.push(dense);
        Ok(())
    }

    fn reduce_objective(&mut self) {
        let g = content(&self.obj).gcd(&self.obj_scale);
        if g > T::one() {
            for x in self.obj.iter_mut() {
                *x = x.clone() / g.clone();
            }
            self.obj_scale = self.obj_scale.clone() / g;
        }
    }

    fn build(rows: &[IntRow], num_vars: usize) -> Result<Self, Overflow> {
        let num_slacks = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let width = num_vars + num_slacks;
        let mut table = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut obj = vec![T::zero(); width + 1];
        let mut slack_col = num_vars;
        let mut artificials = 0;
        for row in rows {
            let mut dense = vec![T::zero(); width + 1];
            for (j, c) in &row.coeffs {
                dense[*j] = T::from_big(c)?;
            }
            dense[width] = T::from_big(&row.rhs)?;
            let slack = match row.relation {
                Relation::Eq => None,
                Relation::Le => Some((slack_col, T::one())),
                Relation::Ge => Some((slack_col, -T::one())),
            };
            if let Some((j, s)) = &slack {
                dense[*j] = s.clone();
                slack_col += 1;
            }
            // Orient the row so its rhs is nonnegative.
            if dense[width].is_negative() {
                for x in dense.iter_mut() {
                    *x = -x.clone();
                }
            }
            // A slack with coefficient +1 can start in the basis; otherwise
            // the row gets an artificial.
            match slack {
                Some((j, _)) if dense[j].is_positive() => basis.push(j),
                _ => {
                    basis.push(ARTIFICIAL + artificials);
                    artificials += 1;
                    for (o, x) in obj.iter_mut().zip(&dense) {
                        if !x.is_zero() {
                            *o = o.exact_add(x)?;
                        }
                    }
                }
            }
            table.push(dense);
        }
        Ok(Tableau {
            rows: table,
            basis,
            obj,
            obj_scale: T::one(),
            width,
            artificials,
        })
    }

    /// Drives the phase-one objective to its minimum; true iff it reaches zero.
    fn run(&mut self, stats: &mut SolverStats) -> Result<bool, Overflow> {
        let mut degenerate_run = 0usize;
        loop {
            if self.obj[self.width].is_zero() {
                return Ok(true);
            }
            let entering = if degenerate_run < DEGENERATE_PATIENCE {
                (0..self.width).filter(|&j| self.obj[j].is_positive()).fold(
                    None,
                    |best: Option<usize>, j| match best {
                        Some(b) if self.obj[b] >= self.obj[j] => Some(b),
                        _ => Some(j),
                    },
                )
            } else {
                (0..self.width).find(|&j| self.obj[j].is_positive())
            };
            let Some(e) = entering else {
                return Ok(false);
            };
            let Some(r) = self.ratio_test(e)? else {
                // The objective is a sum of nonnegative artificials, so it is
                // bounded below; an unbounded ray cannot occur.
                unreachable!("phase-one objective is bounded below");
            };
            if self.rows[r][self.width].is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e)?;
            stats.lp_pivots += 1;
        }
    }

    fn ratio_test(&self, e: usize) -> Result<Option<usize>, Overflow> {
        let mut best: Option<usize> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !row[e].is_positive() {
                continue;
            }
            best = Some(match best {
                None => i,
                Some(b) => {
                    // rhs_i / a_i  vs  rhs_b / a_b with positive denominators.
                    let lhs = row[self.width].exact_mul(&self.rows[b][e])?;
                    let rhs = self.rows[b][self.width].exact_mul(&row[e])?;
                    if lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[b]) {
                        i
                    } else {
                        b
                    }
                }
            });
        }
        Ok(best)
    }

    fn pivot(&mut self, r: usize, e: usize) -> Result<(), Overflow> {
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let p = pivot_row[e].clone();
        let nonzero: Vec<usize> = (0..=self.width)
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[e].is_zero() {
                continue;
            }
            eliminate(row, &pivot_row, &p, e, &nonzero)?;
        }
        if !self.obj[e].is_zero() {
            let c = self.obj[e].clone();
            for x in self.obj.iter_mut() {
                if !x.is_zero() {
                    *x = x.exact_mul(&p)?;
                }
            }
            for &j in &nonzero {
                self.obj[j] = self.obj[j].exact_sub(&c.exact_mul(&pivot_row[j])?)?;
            }
            self.obj_scale = self.obj_scale.exact_mul(&p)?;
            self.reduce_objective();
        }
        self.rows[r] = pivot_row;
        self.basis[r] = e;
        Ok(())
    }

    fn structural_values(&self, num_vars: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < num_vars {
                out[b] = Rational::new(self.rows[i][self.width].to_big(), self.rows[i][b].to_big());
            }
        }
        out
    }
}

/// `row ← (p/g)·row − (row[e]/g)·pivot_row` with `g = gcd(p, row[e])`,
/// which clears column `e`. The row is renormalized only if it was scaled.
fn eliminate<T: Entry>(
    row: &mut [T],
    pivot_row: &[T],
    p: &T,
    e: usize,
    nonzero: &[usize],
) -> Result<(), Overflow> {
    let g = p.gcd(&row[e]);
    let scale = p.clone() / g.clone();
    let c = row[e].clone() / g;
    let scaled = !scale.is_one();
    if scaled {
        for x in row.iter_mut() {
            if !x.is_zero() {
                *x = x.exact_mul(&scale)?;
            }
        }
    }
    for &j in nonzero {
        row[j] = row[j].exact_sub(&c.exact_mul(&pivot_row[j])?)?;
    }
    if scaled {
        normalize(row);
    }
    Ok(())
}

fn content<T: Entry>(values: &[T]) -> T {
    let mut g = T::zero();
    for v in values {
        if !v.is_zero() {
            g = g.gcd(v);
            if g.is_one() {
                break;
            }
        }
    }
    g
}

fn normalize<T: Entry>(row: &mut [T]) {
    let g = content(row);
    if g > T::one() {
        for x in row.iter_mut() {
            if !x.is_zero() {
                *x = x.clone() / g.clone();
            }
        }
    }
}
