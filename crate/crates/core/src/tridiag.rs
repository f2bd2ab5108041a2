//! Symmetric tridiagonal eigensolver.
//!
//! Implicit-shift QL iteration in the classic EISPACK/`tql2` lineage. Every
//! XX-chain quantity in the crate reduces to this kernel, so it is written
//! once, deterministically, with two entry points: the full decomposition
//! and a row-tracked variant that accumulates only the eigenvector rows a
//! boundary-amplitude query needs. The row-tracked form keeps the cost at
//! O(n^2) instead of O(n^3), which is what makes chains of a few thousand
//! sites routine.

use nalgebra::DMatrix;

use crate::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Full eigendecomposition of the symmetric tridiagonal matrix with the
/// given diagonal and off-diagonal. Eigenvalues ascend; eigenvectors are the
/// columns of the returned orthogonal matrix, each sign-fixed so that its
/// first nonzero component is positive.
pub fn eig_sym_tridiag(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = check_input(diag, offdiag)?;
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            let mut row = vec![0.0; n];
            row[r] = 1.0;
            row
        })
        .collect();
    let vals = ql_implicit(diag, offdiag, &mut rows)?;
    let order = sort_order(&vals);
    let vals_sorted: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, col)] = rows[r][k];
        }
    }
    fix_column_signs(&mut vecs);
    Ok((vals_sorted, vecs))
}

/// Eigenvalues plus selected eigenvector rows: `rows_out[i][k]` is component
/// `rows[i]` of the `k`-th eigenvector (eigenvalues ascending). Signs are
/// consistent within each eigenvector but otherwise arbitrary, so only
/// sign-invariant products of tracked rows should be consumed.
pub fn eig_sym_tridiag_rows(
    diag: &[f64],
    offdiag: &[f64],
    rows: &[usize],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = check_input(diag, offdiag)?;
    if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
        return Err(Error::Dimension(format!("tracked row {bad} out of range for n = {n}")));
    }
    let mut tracked: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; n];
            row[r] = 1.0;
            row
        })
        .collect();
    let vals = ql_implicit(diag, offdiag, &mut tracked)?;
    let order = sort_order(&vals);
    let vals_sorted: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    let rows_sorted: Vec<Vec<f64>> = tracked
        .iter()
        .map(|row| order.iter().map(|&k| row[k]).collect())
        .collect();
    Ok((vals_sorted, rows_sorted))
}

fn check_input(diag: &[f64], offdiag: &[f64]) -> Result<usize> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "offdiag length {} does not match diag length {n}",
            offdiag.len()
        )));
    }
    if diag.iter().chain(offdiag.iter()).any(|x| !x.is_finite()) {
        return Err(Error::InvalidSpec("non-finite matrix entry".into()));
    }
    Ok(n)
}

/// Implicit-shift QL on (d, e), rotating the tracked rows along. `e` is the
/// sub-diagonal, `e[i]` coupling `d[i]` and `d[i+1]`.
fn ql_implicit(diag: &[f64], offdiag: &[f64], rows: &mut [Vec<f64>]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::Numerical(format!(
                    "QL did not converge within {MAX_SWEEPS} sweeps at index {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g >= 0.0 { 1.0 } else { -1.0 }));
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0_f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in rows.iter_mut() {
                    f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

fn sort_order(vals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    order
}

pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>) {
    for col in 0..m.ncols() {
        let lead = (0..m.nrows()).find(|&r| m[(r, col)] != 0.0);
        if let Some(r) = lead {
            if m[(r, col)] < 0.0 {
                for i in 0..m.nrows() {
                    m[(i, col)] = -m[(i, col)];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn residual(diag: &[f64], offdiag: &[f64], vals: &[f64], vecs: &DMatrix<f64>) -> f64 {
        let n = diag.len();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                let mut tv = diag[i] * vecs[(i, k)];
                if i > 0 {
                    tv += offdiag[i - 1] * vecs[(i - 1, k)];
                }
                if i + 1 < n {
                    tv += offdiag[i] * vecs[(i + 1, k)];
                }
                worst = worst.max((tv - vals[k] * vecs[(i, k)]).abs());
            }
        }
        worst
    }

    #[test]
    fn uniform_chain_closed_form() {
        let n = 40;
        let diag = vec![0.0; n];
        let offdiag = vec![0.5; n - 1];
        let (vals, vecs) = eig_sym_tridiag(&diag, &offdiag).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let expect = ((n - k) as f64 * PI / (n as f64 + 1.0)).cos();
            assert!((v - expect).abs() < 1e-13, "k={k}: {v} vs {expect}");
        }
        assert!(residual(&diag, &offdiag, &vals, &vecs) < 1e-13);
    }

    #[test]
    fn single_site() {
        let (vals, vecs) = eig_sym_tridiag(&[3.25], &[]).unwrap();
        assert_eq!(vals, vec![3.25]);
        assert_eq!(vecs[(0, 0)], 1.0);
    }

    #[test]
    fn decoupled_sites() {
        let (vals, vecs) = eig_sym_tridiag(&[1.0, 1.0], &[0.0]).unwrap();
        assert_eq!(vals, vec![1.0, 1.0]);
        assert!((vecs - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-15);
    }

    #[test]
    fn random_matrix_contract() {
        // deterministic LCG input; checks the op's tolerance contract
        let n = 120;
        let mut state = 0x2545f4914f6cdd1d_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let diag: Vec<f64> = (0..n).map(|_| 2.0 * next()).collect();
        let offdiag: Vec<f64> = (0..n - 1).map(|_| next()).collect();
        let (vals, vecs) = eig_sym_tridiag(&diag, &offdiag).unwrap();
        let scale = diag
            .iter()
            .chain(offdiag.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(residual(&diag, &offdiag, &vals, &vecs) <= 1e-11 * scale);
        // orthonormality
        let gram = vecs.transpose() * &vecs;
        assert!((gram - DMatrix::<f64>::identity(n, n)).abs().max() < 1e-11);
        // ascending
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        // determinism
        let (vals2, vecs2) = eig_sym_tridiag(&diag, &offdiag).unwrap();
        assert_eq!(vals, vals2);
        assert_eq!(vecs, vecs2);
    }

    #[test]
    fn tracked_rows_match_full() {
        let n = 60;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 0.2).collect();
        let offdiag: Vec<f64> = (0..n - 1).map(|i| 0.4 + 0.3 * (i as f64 * 0.11).cos()).collect();
        let (vals, vecs) = eig_sym_tridiag(&diag, &offdiag).unwrap();
        let tracked = [0usize, 1, n - 2, n - 1];
        let (vals_r, rows) = eig_sym_tridiag_rows(&diag, &offdiag, &tracked).unwrap();
        for (a, b) in vals.iter().zip(&vals_r) {
            assert!((a - b).abs() < 1e-13);
        }
        // products of tracked rows are sign-invariant
        for k in 0..n {
            let full = vecs[(0, k)] * vecs[(n - 1, k)];
            let part = rows[0][k] * rows[3][k];
            assert!((full - part).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(eig_sym_tridiag(&[], &[]).is_err());
        assert!(eig_sym_tridiag(&[1.0, 2.0], &[]).is_err());
        assert!(eig_sym_tridiag(&[f64::NAN], &[]).is_err());
    }
}
