//! Column Hermite normal form and integer lattice membership.
//!
//! `hnf(M)` returns `(H, U)` with `M·U = H`, `U` unimodular and `H` in lower
//! column-echelon form: pivots have strictly increasing rows, are positive,
//! and every entry left of a pivot lies in `[0, pivot)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::LinalgError;
use crate::vector::Tuple;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermiteForm {
    /// Row-major `m × n` matrix in Hermite form.
    pub h: Vec<Vec<BigInt>>,
    /// Row-major `n × n` unimodular transform, when tracked.
    pub u: Option<Vec<Vec<BigInt>>>,
    /// `(row, column)` of each pivot, in column order.
    pub pivots: Vec<(usize, usize)>,
}

impl HermiteForm {
    pub fn compute(m: &[Vec<BigInt>], num_cols: usize, track_transform: bool) -> Self {
        let rows = m.len();
        let mut h: Vec<Vec<BigInt>> = m.to_vec();
        for row in &h {
            assert_eq!(row.len(), num_cols, "ragged matrix");
        }
        let mut u = track_transform.then(|| identity(num_cols));
        let mut pivots = Vec::new();
        let mut k = 0;
        for i in 0..rows {
            if k == num_cols {
                break;
            }
            for j in (k + 1)..num_cols {
                if h[i][j].is_zero() {
                    continue;
                }
                if h[i][k].is_zero() {
                    swap_cols(&mut h, k, j);
                    if let Some(u) = u.as_mut() {
                        swap_cols(u, k, j);
                    }
                    continue;
                }
                let a = h[i][k].clone();
                let b = h[i][j].clone();
                let eg = a.extended_gcd(&b);
                let (g, s, t) = (eg.gcd, eg.x, eg.y);
                let a_g = &a / &g;
                let b_g = &b / &g;
                combine_cols(&mut h, k, j, &s, &t, &-&b_g, &a_g);
                if let Some(u) = u.as_mut() {
                    combine_cols(u, k, j, &s, &t, &-&b_g, &a_g);
                }
            }
            if h[i][k].is_zero() {
                continue;
            }
            if h[i][k].is_negative() {
                negate_col(&mut h, k);
                if let Some(u) = u.as_mut() {
                    negate_col(u, k);
                }
            }
            let pivot = h[i][k].clone();
            for j in 0..k {
                let q = h[i][j].div_floor(&pivot);
                if !q.is_zero() {
                    sub_col_multiple(&mut h, j, k, &q);
                    if let Some(u) = u.as_mut() {
                        sub_col_multiple(u, j, k, &q);
                    }
                }
            }
            pivots.push((i, k));
            k += 1;
        }
        HermiteForm { h, u, pivots }
    }

    /// An integer `x` with `M·x = b`; requires the transform to be tracked.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let y = self.solve_echelon(b)?;
        let u = self
            .u
            .as_ref()
            .expect("solve needs the unimodular transform");
        Some(
            u.iter()
                .map(|row| {
                    row.iter()
                        .zip(&y)
                        .filter(|(_, yj)| !yj.is_zero())
                        .map(|(uij, yj)| uij * yj)
                        .sum()
                })
                .collect(),
        )
    }

    /// Whether `M·x = b` has an integer solution.
    pub fn contains(&self, b: &[BigInt]) -> bool {
        self.solve_echelon(b).is_some()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solves `H·y = b` over the integers with `y` zero beyond the rank.
    pub(crate) fn solve_echelon(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let n = self.h.first().map_or(0, Vec::len);
        let mut y = vec![BigInt::zero(); n];
        let mut next_pivot = 0;
        for (i, bi) in b.iter().enumerate() {
            let mut residual = bi.clone();
            for j in 0..next_pivot {
                residual -= &self.h[i][j] * &y[j];
            }
            match self.pivots.get(next_pivot) {
                Some(&(row, col)) if row == i => {
                    let (q, r) = residual.div_rem(&self.h[i][col]);
                    if !r.is_zero() {
                        return None;
                    }
                    y[col] = q;
                    next_pivot += 1;
                }
                _ => {
                    if !residual.is_zero() {
                        return None;
                    }
                }
            }
        }
        Some(y)
    }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn negate_col(m: &mut [Vec<BigInt>], c: usize) {
    for row in m.iter_mut() {
        row[c] = -&row[c];
    }
}

/// `col_j ← col_j − q·col_k`.
fn sub_col_multiple(m: &mut [Vec<BigInt>], j: usize, k: usize, q: &BigInt) {
    for row in m.iter_mut() {
        if !row[k].is_zero() {
            let d = q * &row[k];
            row[j] -= d;
        }
    }
}

/// `(col_k, col_j) ← (s·col_k + t·col_j, p·col_k + q·col_j)`.
fn combine_cols(
    m: &mut [Vec<BigInt>],
    k: usize,
    j: usize,
    s: &BigInt,
    t: &BigInt,
    p: &BigInt,
    q: &BigInt,
) {
    for row in m.iter_mut() {
        if row[k].is_zero() && row[j].is_zero() {
            continue;
        }
        let a = std::mem::take(&mut row[k]);
        let b = std::mem::take(&mut row[j]);
        row[k] = s * &a + t * &b;
        row[j] = p * &a + q * &b;
    }
}

/// Column Hermite form of `m` together with its unimodular transform.
pub fn hnf(m: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let cols = m.first().map_or(0, Vec::len);
    let form = HermiteForm::compute(m, cols, true);
    (form.h, form.u.expect("transform tracked"))
}

/// An integer `x` with `A·x = b`, or `None`. `a` has `num_cols` columns.
pub fn integer_solution(a: &[Vec<BigInt>], num_cols: usize, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    HermiteForm::compute(a, num_cols, true).solve(b)
}

fn generator_matrix(target: &Tuple, generators: &[Tuple]) -> Result<Vec<Vec<BigInt>>, LinalgError> {
    let d = target.dim();
    for g in generators {
        if g.dim() != d {
            return Err(LinalgError::DimensionMismatch {
                expected: d,
                found: g.dim(),
            });
        }
    }
    Ok((0..d)
        .map(|i| generators.iter().map(|g| g.entries()[i].clone()).collect())
        .collect())
}

/// Integer coefficients `z` with `Σ zᵢ·genᵢ = target`, if the target lies in
/// the subgroup generated by `generators`.
pub fn subgroup_member(
    target: &Tuple,
    generators: &[Tuple],
) -> Result<Option<Vec<BigInt>>, LinalgError> {
    let m = generator_matrix(target, generators)?;
    Ok(integer_solution(&m, generators.len(), target.entries()))
}

/// Membership only; skips the transform, which matters for long generator lists.
pub fn subgroup_contains(target: &Tuple, generators: &[Tuple]) -> Result<bool, LinalgError> {
    Ok(subgroup_form(target.dim(), generators, false)?.contains(target.entries()))
}

/// Hermite form of the `dim × |generators|` matrix whose columns are the
/// generators, for repeated membership queries against one subgroup.
pub fn subgroup_form(
    dim: usize,
    generators: &[Tuple],
    track_transform: bool,
) -> Result<HermiteForm, LinalgError> {
    let m = generator_matrix(&Tuple::zero(dim), generators)?;
    Ok(HermiteForm::compute(&m, generators.len(), track_transform))
}
