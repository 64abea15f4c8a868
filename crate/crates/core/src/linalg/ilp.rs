//! Nonnegative integer feasibility by depth-first branch-and-bound.
//!
//! Rows are scaled to primitive integer rows. Equality rows are first checked
//! for integer solvability over ℤ with a Hermite form, which settles gcd and
//! parity obstructions without any search. Without caller-supplied bounds the
//! search is confined to `[0, minimal_solution_bound]` per variable; the caps
//! enter the LP only once a relaxation actually exceeds them.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::hnf::HermiteForm;
use super::lp::{IntRow, WarmLp};
use super::{integer_row, LinalgError, LinearSystem, Rational, Relation, SolverStats};

/// A linear system whose variables must all take integer values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpInstance {
    pub system: LinearSystem,
    /// Optional inclusive upper bound per variable.
    pub upper_bounds: Option<Vec<BigInt>>,
}

impl IlpInstance {
    pub fn new(system: LinearSystem) -> Self {
        IlpInstance {
            system,
            upper_bounds: None,
        }
    }

    pub fn with_upper_bounds(
        system: LinearSystem,
        bounds: Vec<BigInt>,
    ) -> Result<Self, LinalgError> {
        if bounds.len() != system.num_vars() {
            return Err(LinalgError::DimensionMismatch {
                expected: system.num_vars(),
                found: bounds.len(),
            });
        }
        Ok(IlpInstance {
            system,
            upper_bounds: Some(bounds),
        })
    }
}

pub fn ilp_feasible(inst: &IlpInstance) -> Option<Vec<BigInt>> {
    ilp_feasible_with_stats(inst, &mut SolverStats::default())
}

/// An integer point of `inst` (respecting lower and upper bounds), or `None`
/// when there is none. Always conclusive.
pub fn ilp_feasible_with_stats(inst: &IlpInstance, stats: &mut SolverStats) -> Option<Vec<BigInt>> {
    let sys = &inst.system;
    let n = sys.num_vars();
    let shift: Vec<BigInt> = sys
        .lower_bounds()
        .iter()
        .map(Rational::ceil)
        .map(|q| q.to_integer())
        .collect();
    let base = shifted_rows(sys, &shift);

    if !lattice_feasible(&base, n) {
        return None;
    }

    let mut fixed_caps: Vec<Option<BigInt>> = vec![None; n];
    if let Some(bounds) = &inst.upper_bounds {
        for (j, u) in bounds.iter().enumerate() {
            let cap = u - &shift[j];
            if cap.is_negative() {
                return None;
            }
            fixed_caps[j] = Some(cap);
        }
    }
    let global_cap = if inst.upper_bounds.is_none() {
        Some(standard_form_bound(&base, n))
    } else {
        None
    };

    let mut search = Search {
        base: &base,
        num_vars: n,
        global_cap,
        stats,
    };
    let root = Node {
        lower: vec![BigInt::zero(); n],
        upper: fixed_caps,
    };
    let y = search.explore(root, None, Vec::new())?;
    Some(y.into_iter().zip(shift).map(|(v, s)| v + s).collect())
}

/// The classical bound `n·(m·a+1)^(2m+1)` on some solution of a feasible
/// system `A·x = b, x ≥ 0` in standard form, where `a` bounds every entry of
/// `A` and `b` after integer scaling. Inequality rows count one slack each.
pub fn minimal_solution_bound(sys: &LinearSystem) -> BigInt {
    let shift: Vec<BigInt> = sys
        .lower_bounds()
        .iter()
        .map(Rational::ceil)
        .map(|q| q.to_integer())
        .collect();
    standard_form_bound(&shifted_rows(sys, &shift), sys.num_vars())
}

fn standard_form_bound(rows: &[IntRow], num_vars: usize) -> BigInt {
    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let n = BigInt::from(num_vars + slacks);
    let mut a = BigInt::one();
    for row in rows {
        for (_, c) in &row.coeffs {
            a = a.max(c.abs());
        }
        a = a.max(row.rhs.abs());
    }
    let base = BigInt::from(m) * a + 1;
    n.max(BigInt::one()) * num_traits::pow(base, 2 * m + 1)
}

fn shifted_rows(sys: &LinearSystem, shift: &[BigInt]) -> Vec<IntRow> {
    sys.rows()
        .iter()
        .map(|row| {
            let moved: Rational = row
                .coeffs
                .iter()
                .filter(|(j, _)| !shift[*j].is_zero())
                .map(|(j, c)| c * Rational::from_integer(shift[*j].clone()))
                .fold(Rational::zero(), |a, b| a + b);
            let (coeffs, rhs) = integer_row(&row.coeffs, &(&row.rhs - moved));
            IntRow {
                coeffs,
                relation: row.relation,
                rhs,
            }
        })
        .collect()
}

/// Whether the equality rows of `sys` (shifted by the rounded-up lower
/// bounds) have an integer solution, ignoring signs and inequalities.
pub fn lattice_relaxation_feasible(sys: &LinearSystem) -> bool {
    let shift: Vec<BigInt> = sys
        .lower_bounds()
        .iter()
        .map(Rational::ceil)
        .map(|q| q.to_integer())
        .collect();
    lattice_feasible(&shifted_rows(sys, &shift), sys.num_vars())
}

/// Whether the equality rows admit an integer (not necessarily nonnegative)
/// solution. Inequality rows never obstruct: their slacks are integers.
fn lattice_feasible(rows: &[IntRow], num_vars: usize) -> bool {
    let eq: Vec<&IntRow> = rows.iter().filter(|r| r.relation == Relation::Eq).collect();
    if eq.is_empty() {
        return true;
    }
    let matrix: Vec<Vec<BigInt>> = eq
        .iter()
        .map(|r| {
            let mut dense = vec![BigInt::zero(); num_vars];
            for (j, c) in &r.coeffs {
                dense[*j] = c.clone();
            }
            dense
        })
        .collect();
    let rhs: Vec<BigInt> = eq.iter().map(|r| r.rhs.clone()).collect();
    HermiteForm::compute(&matrix, num_vars, false)
        .solve_echelon(&rhs)
        .is_some()
}

#[derive(Clone)]
struct Node {
    lower: Vec<BigInt>,
    upper: Vec<Option<BigInt>>,
}

struct Search<'a> {
    base: &'a [IntRow],
    num_vars: usize,
    global_cap: Option<BigInt>,
    stats: &'a mut SolverStats,
}

impl Search<'_> {
    /// Depth-first branch and bound. Each node's relaxation starts from its
    /// parent's final tableau plus the `pending` bound rows.
    fn explore(
        &mut self,
        mut node: Node,
        mut warm: Option<WarmLp>,
        mut pending: Vec<IntRow>,
    ) -> Option<Vec<BigInt>> {
        loop {
            if (0..self.num_vars).any(|j| matches!(&node.upper[j], Some(u) if *u < node.lower[j])) {
                return None;
            }
            let (lp, x) = match &warm {
                None => WarmLp::solve(&self.rows_for(&node), self.num_vars, self.stats)?,
                Some(w) => {
                    let base = self.base;
                    w.extend(
                        &pending,
                        self.num_vars,
                        || rows_for(base, &node),
                        self.stats,
                    )?
                }
            };
            warm = Some(lp);
            pending.clear();
            // Activate the global cap on any variable whose relaxation exceeds it.
            if let Some(cap) = &self.global_cap {
                let cap_q = Rational::from_integer(cap.clone());
                for (j, v) in x.iter().enumerate() {
                    if node.upper[j].is_none() && *v > cap_q {
                        node.upper[j] = Some(cap.clone());
                        pending.push(bound_row(j, Relation::Le, cap.clone()));
                    }
                }
                if !pending.is_empty() {
                    continue;
                }
            }
            let Some(j) = most_fractional(&x) else {
                return Some(x.into_iter().map(|v| v.to_integer()).collect());
            };
            self.stats.branches += 1;
            let floor = x[j].floor().to_integer();

            let mut down = node.clone();
            down.upper[j] = Some(match &node.upper[j] {
                Some(u) => u.clone().min(floor.clone()),
                None => floor.clone(),
            });
            let down_row = bound_row(j, Relation::Le, floor.clone());
            if let Some(found) = self.explore(down, warm.clone(), vec![down_row]) {
                return Some(found);
            }
            node.lower[j] = node.lower[j].clone().max(&floor + 1);
            pending.push(bound_row(j, Relation::Ge, floor + 1));
        }
    }

    fn rows_for(&self, node: &Node) -> Vec<IntRow> {
        rows_for(self.base, node)
    }
}

/// The base system plus every bound recorded in `node`.
fn rows_for(base: &[IntRow], node: &Node) -> Vec<IntRow> {
    let mut rows = base.to_vec();
    for j in 0..node.lower.len() {
        if node.lower[j].is_positive() {
            rows.push(bound_row(j, Relation::Ge, node.lower[j].clone()));
        }
        if let Some(u) = &node.upper[j] {
            rows.push(bound_row(j, Relation::Le, u.clone()));
        }
    }
    rows
}

fn bound_row(j: usize, relation: Relation, rhs: BigInt) -> IntRow {
    IntRow {
        coeffs: vec![(j, BigInt::one())],
        relation,
        rhs,
    }
}

/// Index whose fractional part is closest to one half; ties go to the
/// smallest index. `None` when every entry is integral.
fn most_fractional(x: &[Rational]) -> Option<usize> {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut best: Option<(usize, Rational)> = None;
    for (j, v) in x.iter().enumerate() {
        if v.is_integer() {
            continue;
        }
        let frac = v - v.floor();
        let dist = (&frac - &half).abs();
        if best.as_ref().map_or(true, |(_, d)| dist < *d) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}
