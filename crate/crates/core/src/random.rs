//! Seeded random states, mixed states and channels.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{eig_hermitian, DensityMatrix, Ket, Operator, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random pure state on the given factors.
pub fn random_ket<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Ket {
    let n: usize = dims.iter().product();
    loop {
        let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        if let Ok(k) = Ket::normalized(v, dims.to_vec()) {
            return k;
        }
    }
}

/// Random mixed state `G G^dagger / tr` with a Ginibre matrix `G` of `rank` columns.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = ginibre(n, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m / C64::from(tr);
    let m = (&m + m.adjoint()) * C64::from(0.5);
    DensityMatrix::from_operator_unchecked(Operator::from_parts(m, dims.to_vec()))
}

/// A random state with substantial overlap with `target`: `(1-w) |target><target| + w sigma`.
pub fn random_noisy_state<R: Rng + ?Sized>(target: &Ket, rng: &mut R) -> DensityMatrix {
    let sigma = random_density(target.dims(), target.dim(), rng);
    let w: f64 = rng.random();
    DensityMatrix::pure(target).mix(&sigma, w).expect("weight in [0,1] and matching factors")
}

/// `k` Kraus operators on dimension `d`: the blocks of `G (G^dagger G)^{-1/2}` for a
/// `kd x d` Ginibre matrix `G`, which is an isometry.
pub fn random_kraus<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Vec<DMatrix<C64>> {
    let k = k.max(1);
    let g = ginibre(k * d, d, rng);
    let gram = Operator::from_parts(g.adjoint() * &g, vec![d]);
    let eig = eig_hermitian(&gram).expect("Gram matrix is Hermitian");
    let mut inv_sqrt = DMatrix::zeros(d, d);
    for (v, &l) in eig.vectors.iter().zip(&eig.values) {
        inv_sqrt += v * v.adjoint() * C64::from(1.0 / l.sqrt());
    }
    let iso = g * inv_sqrt;
    (0..k).map(|i| iso.rows(i * d, d).into_owned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn random_objects_are_valid() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let k = random_ket(&[2, 3], &mut rng);
        assert!((k.norm() - 1.0).abs() < 1e-12);
        let rho = random_density(&[2, 3], 3, &mut rng);
        assert!(DensityMatrix::new(rho.operator().clone()).is_ok());
        let rho = random_noisy_state(&k, &mut rng);
        assert!(DensityMatrix::new(rho.operator().clone()).is_ok());
        let kraus = random_kraus(3, 4, &mut rng);
        let sum = kraus.iter().fold(DMatrix::zeros(3, 3), |acc, m| acc + m.adjoint() * m);
        assert!((sum - DMatrix::identity(3, 3)).norm() <= tol::CPTP);
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = random_ket(&[4], &mut ChaCha20Rng::seed_from_u64(11));
        let b = random_ket(&[4], &mut ChaCha20Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }
}
