use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    let lu = a.clone().lu();
    match lu.solve(b) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x),
        _ => Err(Error::SingularMatrix),
    }
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    a.clone().try_inverse().ok_or(Error::SingularMatrix)
}

/// Real eigen-decomposition of a matrix assumed to have real, distinct
/// eigenvalues. Returns eigenvalues in increasing order, right eigenvectors
/// as columns of `R` (unit length, first significant component positive) and
/// left eigenvectors as rows of `L = R^{-1}`.
pub fn dense_eigen(a: &Matrix, gap_tol: f64) -> Result<(Vec<f64>, Matrix, Matrix)> {
    let n = a.nrows();
    let scale = a.amax().max(1.0);
    let complex = a.clone().complex_eigenvalues();
    let mut values = Vec::with_capacity(n);
    for c in complex.iter() {
        if c.im.abs() > gap_tol * scale {
            return Err(Error::NotStrictlyHyperbolic { gap: 0.0 });
        }
        values.push(c.re);
    }
    values.sort_by(|x, y| x.total_cmp(y));
    for w in values.windows(2) {
        let gap = w[1] - w[0];
        if gap < gap_tol * scale {
            return Err(Error::NotStrictlyHyperbolic { gap });
        }
    }
    let mut right = Matrix::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        let shifted = a - Matrix::identity(n, n) * lam;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or(Error::SingularMatrix)?;
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty");
        let mut r: Vector = v_t.row(imin).transpose();
        let pivot = r.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(1.0);
        if pivot < 0.0 {
            r = -r;
        }
        right.set_column(k, &r.normalize());
    }
    let left = inverse(&right)?;
    Ok((values, right, left))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_symmetric_matrix() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let (vals, r, l) = dense_eigen(&a, 1e-9).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        let id = &l * &r;
        assert!((id - Matrix::identity(2, 2)).amax() < 1e-12);
        for k in 0..2 {
            let res = &a * r.column(k) - r.column(k) * vals[k];
            assert!(res.amax() < 1e-12);
        }
    }

    #[test]
    fn complex_spectrum_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(matches!(
            dense_eigen(&a, 1e-9),
            Err(Error::NotStrictlyHyperbolic { .. })
        ));
    }

    #[test]
    fn singular_solve_reported() {
        let a = Matrix::zeros(2, 2);
        assert_eq!(solve(&a, &Vector::zeros(2)), Err(Error::SingularMatrix));
    }
}
