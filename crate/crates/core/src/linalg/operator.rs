use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use super::{check_dims, check_order, eig_hermitian, permutation_map, Ket, Tensor, C64};
use crate::error::{Error, Result};
use crate::tol;

/// Square complex matrix acting on a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    dims: Vec<usize>,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDims(format!("operator matrix is {}x{}", matrix.nrows(), matrix.ncols())));
        }
        check_dims(&dims, matrix.nrows())?;
        Ok(Self { matrix, dims })
    }

    pub(crate) fn from_parts(matrix: DMatrix<C64>, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        Self { matrix, dims }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self::from_parts(DMatrix::identity(n, n), dims.to_vec())
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self::from_parts(DMatrix::zeros(n, n), dims.to_vec())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.matrix.adjoint(), self.dims.clone())
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Frobenius distance `||self - other||_F`.
    pub fn distance(&self, other: &Operator) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(&self.matrix * C64::from(factor), self.dims.clone())
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn apply(&self, ket: &Ket) -> DVector<C64> {
        &self.matrix * ket.amplitudes()
    }

    /// `<ket|self|ket>`.
    pub fn expectation(&self, ket: &Ket) -> C64 {
        ket.amplitudes().dotc(&self.apply(ket))
    }

    /// `||self - self^dagger||_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    /// Reorders tensor factors: position `i` of the result holds factor `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Operator> {
        check_order(order, self.dims.len())?;
        let map = permutation_map(&self.dims, order);
        let n = map.len();
        let m = DMatrix::from_fn(n, n, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self::from_parts(m, order.iter().map(|&o| self.dims[o]).collect()))
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts(self.matrix.kronecker(&other.matrix), dims)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;

            fn $method(self, rhs: &Operator) -> Operator {
                assert_eq!(self.dims, rhs.dims, "operator factor lists differ");
                Operator::from_parts(&self.matrix $op &rhs.matrix, self.dims.clone())
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

/// True iff `||p^2 - p||_F <= TOL_PROJ` and `||p - p^dagger||_F <= TOL_HERM`.
pub fn is_projector(p: &Operator) -> bool {
    let idempotence = (&p.matrix * &p.matrix - &p.matrix).norm();
    idempotence <= tol::PROJ && p.hermiticity_residual() <= tol::HERM
}

/// Number of eigenvalues at or above one half.
pub fn projector_rank(p: &Operator) -> Result<usize> {
    Ok(eig_hermitian(p)?.values.iter().filter(|&&v| v >= 0.5).count())
}

/// A validated mixed state: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_residual();
        if herm > tol::HERM {
            return Err(Error::NotHermitian { residual: herm });
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::NotDensityMatrix(format!("trace {tr} is not 1")));
        }
        let min = eig_hermitian(&op)?.values.last().copied().unwrap_or(0.0);
        if min < -tol::PSD {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { op })
    }

    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn pure(ket: &Ket) -> Self {
        Self { op: ket.projector() }
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self { op: Operator::identity(dims).scale(1.0 / n as f64) }
    }

    /// `(1 - weight) * self + weight * other`.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<Self> {
        if self.op.dims != other.op.dims {
            return Err(Error::DimensionMismatch(format!(
                "cannot mix states on {:?} and {:?}",
                self.op.dims, other.op.dims
            )));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidParameters(format!("mixing weight {weight} not in [0,1]")));
        }
        Ok(Self { op: &self.op.scale(1.0 - weight) + &other.op.scale(weight) })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.op.matrix()
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `Re tr(rho * a)`; callers pass Hermitian observables.
    pub fn expectation(&self, a: &Operator) -> Result<f64> {
        if a.dims() != self.dims() {
            return Err(Error::DimensionMismatch(format!("state on {:?}, observable on {:?}", self.dims(), a.dims())));
        }
        // tr(rho a) = sum_ij rho_ij a_ji
        let m = self.op.matrix();
        let am = a.matrix();
        let n = m.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += m[(i, j)] * am[(j, i)];
            }
        }
        Ok(acc.re)
    }

    /// `tr(rho |psi><psi|)`, the squared fidelity with a pure target.
    pub fn fidelity_squared(&self, psi: &Ket) -> Result<f64> {
        if psi.dims() != self.dims() {
            return Err(Error::DimensionMismatch(format!("state on {:?}, target on {:?}", self.dims(), psi.dims())));
        }
        Ok(self.op.expectation(psi).re)
    }

    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        Ok(Self { op: self.op.permute(order)? })
    }
}
