use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{Operator, C64};
use crate::error::{Error, Result};
use crate::tol;

/// Spectral decomposition of a Hermitian operator, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        let n = self.vectors.first().map_or(0, |v| v.len());
        let mut m = DMatrix::zeros(n, n);
        for (v, &l) in self.vectors.iter().zip(&self.values) {
            m += v * v.adjoint() * C64::from(l);
        }
        m
    }
}

pub fn eig_hermitian(h: &Operator) -> Result<HermitianEigen> {
    let residual = h.hermiticity_residual();
    if residual > tol::HERM {
        return Err(Error::NotHermitian { residual });
    }
    Ok(eig_hermitian_matrix(h.matrix()))
}

/// Callers guarantee Hermiticity; the matrix is symmetrized before solving.
pub(crate) fn eig_hermitian_matrix(m: &DMatrix<C64>) -> HermitianEigen {
    let sym = (m + m.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    HermitianEigen {
        values: idx.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn op(rows: usize, data: &[C64]) -> Operator {
        Operator::new(DMatrix::from_row_slice(rows, rows, data), vec![rows]).unwrap()
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = eig_hermitian(&op(2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_spectrum() {
        let e = eig_hermitian(&Operator::identity(&[3])).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn plus_projector_spectrum() {
        // (1 + X)/2 has eigenvalues 1 and 0 by hand.
        let e = eig_hermitian(&op(2, &[c(0.5), c(0.5), c(0.5), c(0.5)])).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = op(
            3,
            &[
                c(2.0),
                C64::new(0.0, 1.0),
                C64::new(0.5, -0.5),
                C64::new(0.0, -1.0),
                c(-1.0),
                c(0.3),
                C64::new(0.5, 0.5),
                c(0.3),
                c(0.7),
            ],
        );
        let e = eig_hermitian(&m).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        assert!((e.reconstruct() - m.matrix()).norm() <= tol::RECON);
        for (i, vi) in e.vectors.iter().enumerate() {
            for (j, vj) in e.vectors.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((vi.dotc(vj) - c(expected)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = op(2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }
}
