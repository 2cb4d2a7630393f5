//! Exact null-space computation for small dense integer/rational matrices.

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Basis of `{v : v·A = 0}` for a row-major matrix `a` (rows × cols).
///
/// For a stoichiometry matrix (species × reactions) these are the linear
/// conservation laws: weightings of species left invariant by every
/// reaction.
pub fn left_null_space(a: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    // Null space of A^T: transpose and reduce.
    let t: Vec<Vec<Rational>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[i][j].clone()).collect())
        .collect();
    null_space(&t, rows)
}

/// Basis of `{x : M x = 0}` where `m` has `width` columns.
pub fn null_space(m: &[Vec<Rational>], width: usize) -> Vec<Vec<Rational>> {
    let mut r: Vec<Vec<Rational>> = m.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..width {
        let Some(p) = (row..r.len()).find(|&i| !r[i][col].is_zero()) else {
            continue;
        };
        r.swap(row, p);
        let inv = Rational::one() / &r[row][col];
        for v in r[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = r[row].clone();
        for (i, other) in r.iter_mut().enumerate() {
            if i == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (v, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == r.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..width).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); width];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r[i][f].clone();
            }
            v
        })
        .collect()
}
