//! Small dense linear algebra used by the data generator and the tuner.
//!
//! Matrices here are tiny (tens of rows), so plain `Vec<Vec<f64>>` row-major
//! storage is enough.

use crate::error::{Error, Result};

pub type Dense = Vec<Vec<f64>>;

const PSD_TOL: f64 = 1e-10;

/// Lower-triangular factor `L` with `L Lᵀ = a` for symmetric positive
/// semi-definite `a`.
///
/// Zero pivots are accepted when the rest of the column vanishes too, which
/// covers singular but valid covariance matrices.
pub fn cholesky(a: &Dense) -> Result<Dense> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::Decomposition("matrix is not square".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if (a[i][j] - a[j][i]).abs() > PSD_TOL * (1.0 + a[i][j].abs()) {
                return Err(Error::Decomposition(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        let scale = a[j][j].abs().max(1.0);
        if d < -PSD_TOL * scale {
            return Err(Error::Decomposition(format!(
                "matrix is not positive semi-definite (pivot {j} = {d:e})"
            )));
        }
        if d <= PSD_TOL * scale {
            // Singular direction: the remaining entries of the column must vanish.
            for i in j + 1..n {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if s.abs() > 1e-8 * scale {
                    return Err(Error::Decomposition(format!(
                        "matrix is not positive semi-definite (column {j})"
                    )));
                }
            }
            continue;
        }
        let djj = d.sqrt();
        l[j][j] = djj;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L` with non-zero diagonal.
pub fn solve_lower(l: &Dense, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L` with non-zero diagonal.
pub fn solve_upper_transposed(l: &Dense, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Solves the symmetric positive definite system `a x = b`.
pub fn solve_spd(a: &Dense, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a)?;
    if l.iter().enumerate().any(|(i, row)| row[i] == 0.0) {
        return Err(Error::Decomposition("matrix is singular".into()));
    }
    Ok(solve_upper_transposed(&l, &solve_lower(&l, b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reconstructs_matrix() {
        let a = vec![vec![4.0, 2.0, 0.4], vec![2.0, 3.0, 0.5], vec![0.4, 0.5, 2.0]];
        let l = cholesky(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                assert!((v - a[i][j]).abs() < 1e-12);
            }
        }
        let x = solve_spd(&a, &[1.0, 2.0, 3.0]).unwrap();
        for i in 0..3 {
            let v: f64 = (0..3).map(|k| a[i][k] * x[k]).sum();
            assert!((v - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_psd_is_accepted_and_indefinite_rejected() {
        let singular = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let l = cholesky(&singular).unwrap();
        assert_eq!(l[1][1], 0.0);
        let indefinite = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(matches!(cholesky(&indefinite), Err(Error::Decomposition(_))));
        let asym = vec![vec![1.0, 0.2], vec![0.1, 1.0]];
        assert!(cholesky(&asym).is_err());
    }
}
