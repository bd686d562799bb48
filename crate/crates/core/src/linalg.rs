//! Exact linear algebra over an integral domain.
//!
//! Elimination prefers unit pivots and falls back to fraction-free row
//! operations (`row ← p·row − a·pivot_row`) when a column has no unit entry,
//! so ranks are ranks over the fraction field. Division only happens at
//! back-substitution, via [`Ring::try_div`].

use thiserror::Error;

use crate::scalars::Ring;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("linear system has no unique solution (rank {rank} < {unknowns} unknowns)")]
    NonUnique { rank: usize, unknowns: usize },
    #[error("solution is not representable in the coefficient ring")]
    NotRepresentable,
}

/// Row-reduces `rows` in place, searching for pivots in the first
/// `pivot_cols` columns. Returns the pivot column of each leading row.
///
/// Unit pivots are normalised to one and cleared above and below; non-unit
/// pivots are kept as they are and cleared fraction-free.
pub fn echelonize<S: Ring>(rows: &mut [Vec<S>], pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        let mut best = None;
        for (i, row) in rows.iter().enumerate().skip(r) {
            if row[c].is_negligible() {
                continue;
            }
            if row[c].is_unit() {
                best = Some(i);
                break;
            }
            best.get_or_insert(i);
        }
        let Some(p) = best else { continue };
        rows.swap(r, p);

        let unit = rows[r][c].is_unit();
        if unit {
            let piv = rows[r][c].clone();
            for v in rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.try_div(&piv).expect("unit pivot");
                }
            }
            rows[r][c] = S::one();
        }
        let support: Vec<usize> = (0..rows[r].len()).filter(|&k| !rows[r][k].is_zero()).collect();
        let pivot_row = rows[r].clone();
        let piv = pivot_row[c].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_negligible() {
                if i != r {
                    row[c] = S::zero();
                }
                continue;
            }
            let a = row[c].clone();
            if unit {
                for &k in &support {
                    row[k] = row[k].clone() - a.clone() * pivot_row[k].clone();
                }
            } else {
                for (k, v) in row.iter_mut().enumerate() {
                    let scaled = if v.is_zero() { S::zero() } else { piv.clone() * v.clone() };
                    *v = scaled - a.clone() * pivot_row[k].clone();
                }
            }
            row[c] = S::zero();
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<S: Ring>(mut rows: Vec<Vec<S>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    echelonize(&mut rows, ncols).len()
}

/// A basis of `{x : A x = 0}` for the `ncols`-column matrix `rows`.
pub fn nullspace<S: Ring>(mut rows: Vec<Vec<S>>, ncols: usize) -> Vec<Vec<S>> {
    let pivots = echelonize(&mut rows, ncols);
    let all_unit = pivots.iter().enumerate().all(|(k, &c)| rows[k][c] == S::one());
    let mut basis = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![S::zero(); ncols];
        if all_unit {
            x[f] = S::one();
            for (k, &c) in pivots.iter().enumerate() {
                x[c] = -rows[k][f].clone();
            }
        } else {
            let prod = pivots.iter().enumerate().fold(S::one(), |acc, (k, &c)| acc * rows[k][c].clone());
            x[f] = prod;
            for (k, &c) in pivots.iter().enumerate() {
                let others = pivots
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .fold(S::one(), |acc, (j, &cj)| acc * rows[j][cj].clone());
                x[c] = -(rows[k][f].clone() * others);
            }
        }
        basis.push(x);
    }
    basis
}

/// The unique solution of `A x = b`.
pub fn solve<S: Ring>(a: &[Vec<S>], b: &[S]) -> Result<Vec<S>, LinAlgError> {
    let n = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = echelonize(&mut rows, n);
    if rows.iter().skip(pivots.len()).any(|r| !r[n].is_negligible()) {
        return Err(LinAlgError::Inconsistent);
    }
    if pivots.len() < n {
        return Err(LinAlgError::NonUnique { rank: pivots.len(), unknowns: n });
    }
    let mut x = vec![S::zero(); n];
    for (k, &c) in pivots.iter().enumerate() {
        x[c] = rows[k][n].try_div(&rows[k][c]).ok_or(LinAlgError::NotRepresentable)?;
    }
    Ok(x)
}
