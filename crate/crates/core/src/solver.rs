//! Dense Cholesky solution of the Galerkin system and energy products.

use crate::assembly::{LoadVector, StiffnessMatrix};
use crate::error::{Error, Result};
use crate::polynomials::dot;

/// Coefficients of `ũ = Σ x_i φ_i` and the quadrature order of the matrix
/// they were computed with.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    pub coeffs: Vec<f64>,
    pub quad_order: usize,
}

/// Lower triangular factor `L` with `A = L Lᵀ`, row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factorizes without pivoting; fails on the first nonpositive pivot.
    pub fn factor(a: &StiffnessMatrix) -> Result<Self> {
        let dim = a.dim();
        let mut l = vec![0.0; dim * dim];
        for j in 0..dim {
            let row_j = &l[j * dim..j * dim + j];
            let pivot = a.get(j, j) - dot(row_j, row_j);
            if !(pivot > 0.0) {
                return Err(Error::NotPositiveDefinite { row: j, pivot });
            }
            let d = pivot.sqrt();
            l[j * dim + j] = d;
            for i in j + 1..dim {
                let sum = dot(&l[i * dim..i * dim + j], &l[j * dim..j * dim + j]);
                l[i * dim + j] = (a.get(i, j) - sum) / d;
            }
        }
        Ok(Self { dim, lower: l })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let l = &self.lower;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = (b[i] - dot(&l[i * n..i * n + i], &y[..i])) / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= l[k * n + i] * x[k];
            }
            x[i] = sum / l[i * n + i];
        }
        Ok(x)
    }
}

pub fn cholesky_solve(a: &StiffnessMatrix, b: &LoadVector) -> Result<DiscreteSolution> {
    let coeffs = Cholesky::factor(a)?.solve(b.as_slice())?;
    Ok(DiscreteSolution { coeffs, quad_order: a.quad_order() })
}

/// `xᵀ A y`.
pub fn energy(a: &StiffnessMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: x.len() });
    }
    let ay = a.matvec(y)?;
    Ok(dot(x, &ay))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, entries: Vec<f64>) -> StiffnessMatrix {
        StiffnessMatrix::from_entries(n, entries, 1, 0.5).unwrap()
    }

    #[test]
    fn identity_solve() {
        let a = matrix(3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let b = LoadVector::new(vec![0.5, -2.0, 3.0]);
        assert_eq!(cholesky_solve(&a, &b).unwrap().coeffs, vec![0.5, -2.0, 3.0]);
    }

    #[test]
    fn two_by_two() {
        let a = matrix(2, vec![4.0, 1.0, 1.0, 3.0]);
        let x = cholesky_solve(&a, &LoadVector::new(vec![1.0, 2.0])).unwrap().coeffs;
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_is_reported() {
        let a = matrix(2, vec![1.0, 2.0, 2.0, 1.0]);
        match Cholesky::factor(&a) {
            Err(Error::NotPositiveDefinite { row, pivot }) => {
                assert_eq!(row, 1);
                assert!((pivot + 3.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn energy_products() {
        let a = matrix(2, vec![4.0, 1.0, 1.0, 3.0]);
        assert_eq!(energy(&a, &[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        let e1 = energy(&a, &[1.0, -2.0], &[0.3, 2.0]).unwrap();
        let e2 = energy(&a, &[0.3, 2.0], &[1.0, -2.0]).unwrap();
        assert!((e1 - e2).abs() < 1e-14);
        assert!(energy(&a, &[1.0], &[1.0, 2.0]).is_err());
        let id = matrix(2, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(energy(&id, &[3.0, 4.0], &[3.0, 4.0]).unwrap(), 25.0);
    }
}
