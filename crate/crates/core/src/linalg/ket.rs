use nalgebra::DVector;

use super::{check_dims, check_order, permutation_map, Operator, Tensor, C64};
use crate::error::{Error, Result};
use crate::tol;

/// A normalized pure state on a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: DVector<C64>,
    dims: Vec<usize>,
}

impl Ket {
    /// Validates the factor list and requires unit norm within [`tol::NORM`].
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes), dims)
    }

    pub fn from_vector(amplitudes: DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::NORM {
            return Err(Error::NonUnitNorm { norm });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        check_dims(&dims, v.len())?;
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonUnitNorm { norm });
        }
        Ok(Self { amplitudes: v / C64::from(norm), dims })
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        check_dims(&dims, total)?;
        if index >= total {
            return Err(Error::InvalidDims(format!("basis index {index} out of range {total}")));
        }
        let mut v = DVector::zeros(total);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v, dims })
    }

    /// Callers guarantee unit norm and a consistent factor list.
    pub(crate) fn from_parts(amplitudes: DVector<C64>, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), amplitudes.len());
        Self { amplitudes, dims }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|self><self|`.
    pub fn projector(&self) -> Operator {
        Operator::from_parts(&self.amplitudes * self.amplitudes.adjoint(), self.dims.clone())
    }

    /// Reorders tensor factors: position `i` of the result holds factor `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Ket> {
        check_order(order, self.dims.len())?;
        let map = permutation_map(&self.dims, order);
        let v = DVector::from_iterator(map.len(), map.iter().map(|&old| self.amplitudes[old]));
        Ok(Self::from_parts(v, order.iter().map(|&o| self.dims[o]).collect()))
    }

    /// Comparison modulo a global phase: `|<a|b>| >= 1 - TOL_RECON`.
    pub fn equals_up_to_phase(&self, other: &Ket) -> bool {
        self.dims == other.dims && self.inner(other).norm() >= 1.0 - tol::RECON
    }
}

impl Tensor for Ket {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts(self.amplitudes.kronecker(&other.amplitudes), dims)
    }
}
