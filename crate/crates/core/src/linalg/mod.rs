//! Dense complex linear algebra on tensor-product spaces.
//!
//! Every vector and operator carries the list of tensor-factor dimensions of
//! the space it lives on, so that Kronecker products, factor permutations and
//! bipartite cuts can be checked rather than assumed.

mod eigen;
mod ket;
mod operator;
mod schmidt;

pub use eigen::{eig_hermitian, HermitianEigen};
pub use ket::Ket;
pub use operator::{is_projector, projector_rank, DensityMatrix, Operator};
pub use schmidt::{schmidt_decompose, SchmidtForm};

pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Kronecker product that concatenates the factor lists of its operands.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

pub(crate) fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("factor list is empty".into()));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidDims(format!("zero-dimensional factor in {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != len {
        return Err(Error::InvalidDims(format!("factors {dims:?} span dimension {total}, data has length {len}")));
    }
    Ok(())
}

pub(crate) fn check_order(order: &[usize], parties: usize) -> Result<()> {
    if order.len() != parties {
        return Err(Error::InvalidOrder(format!("order {order:?} has {} entries for {parties} parties", order.len())));
    }
    let mut seen = vec![false; parties];
    for &p in order {
        if p >= parties || seen[p] {
            return Err(Error::InvalidOrder(format!("{order:?} is not a permutation of 0..{parties}")));
        }
        seen[p] = true;
    }
    Ok(())
}

pub(crate) fn inverse_order(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Maps every flat index of the permuted space to the flat index of the
/// original space. Position `i` of the permuted space holds factor `order[i]`.
pub(crate) fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut old_strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        old_strides[k] = old_strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let old: usize = digits.iter().zip(order).map(|(&digit, &o)| digit * old_strides[o]).sum();
        map.push(old);
        for k in (0..n).rev() {
            digits[k] += 1;
            if digits[k] < new_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_map_swaps_two_qubits() {
        // |ab> -> |ba>: index 1 = |01> in the new space is |10> = 2 in the old one.
        assert_eq!(permutation_map(&[2, 2], &[1, 0]), vec![0, 2, 1, 3]);
    }

    #[test]
    fn permutation_map_identity() {
        assert_eq!(permutation_map(&[2, 3], &[0, 1]), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn order_validation() {
        assert!(check_order(&[2, 0, 1], 3).is_ok());
        assert!(matches!(check_order(&[0, 0, 1], 3), Err(Error::InvalidOrder(_))));
        assert!(matches!(check_order(&[0, 1], 3), Err(Error::InvalidOrder(_))));
        assert_eq!(inverse_order(&[2, 0, 1]), vec![1, 2, 0]);
    }

    #[test]
    fn dims_validation() {
        assert!(check_dims(&[2, 3], 6).is_ok());
        assert!(check_dims(&[], 1).is_err());
        assert!(check_dims(&[2, 0], 0).is_err());
        assert!(check_dims(&[2, 2], 5).is_err());
    }
}
