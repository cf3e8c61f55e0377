//! Small dense linear algebra for least-squares fits.

// Dense index loops read closer to the textbook algorithms here.
#![allow(clippy::needless_range_loop)]

use crate::real::Real;

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
/// Returns `None` for an exactly singular matrix.
pub(crate) fn solve<T: Real>(mut m: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot][col] == T::zero() {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != T::zero() {
                for k in col..n {
                    let t = m[col][k];
                    m[row][k] = m[row][k] - f * t;
                }
                rhs[row] = rhs[row] - f * rhs[col];
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc = acc - m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues<T: Real>(mut m: Vec<Vec<T>>) -> Vec<T> {
    let n = m.len();
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off + m[i][j] * m[i][j];
                }
            }
        }
        let diag: T = (0..n).fold(T::zero(), |acc, i| acc + m[i][i] * m[i][i]);
        if off <= T::epsilon() * T::epsilon() * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (T::lit(2.0) * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// 2-norm condition number of a symmetric positive semidefinite matrix.
pub(crate) fn condition_number<T: Real>(m: &[Vec<T>]) -> T {
    let ev = symmetric_eigenvalues(m.to_vec());
    let hi = ev.iter().copied().fold(T::zero(), |a, b| a.max(b.abs()));
    let lo = ev.iter().copied().fold(T::infinity(), |a, b| a.min(b.abs()));
    if lo > T::zero() {
        hi / lo
    } else {
        T::infinity()
    }
}
