use nalgebra::{DMatrix, DVector};

use super::{Ket, C64};
use crate::error::{Error, Result};
use crate::tol;

/// Singular values closer than this are treated as one degenerate block.
const DEGENERACY_GAP: f64 = 1e-11;
/// Singular values at or below this are treated as exact zeros.
const ZERO_SINGULAR: f64 = 1e-12;
/// Minimum residual norm for a standard basis vector to seed a new direction.
const SEED_NORM: f64 = 1e-6;
/// Amplitudes below this magnitude are skipped when fixing the phase.
const PHASE_EPS: f64 = 1e-9;

/// Schmidt coefficients and local bases of a bipartite pure state.
///
/// `coefficients` has length `max(d_A, d_B)`, descending, zero padded.
/// `basis_a` and `basis_b` are complete orthonormal bases of the two local
/// spaces; index `j < min(d_A, d_B)` pairs `basis_a[j]` with `basis_b[j]`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    coefficients: Vec<f64>,
    basis_a: Vec<Ket>,
    basis_b: Vec<Ket>,
}

impl SchmidtForm {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis_a(&self) -> &[Ket] {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &[Ket] {
        &self.basis_b
    }

    pub fn dim_a(&self) -> usize {
        self.basis_a.len()
    }

    pub fn dim_b(&self) -> usize {
        self.basis_b.len()
    }

    pub fn dims_a(&self) -> &[usize] {
        self.basis_a[0].dims()
    }

    pub fn dims_b(&self) -> &[usize] {
        self.basis_b[0].dims()
    }

    /// Number of index pairs `(basis_a[j], basis_b[j])`: `min(d_A, d_B)`.
    pub fn pairs(&self) -> usize {
        self.dim_a().min(self.dim_b())
    }

    /// Number of strictly positive coefficients.
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&l| l > 0.0).count()
    }

    /// `sum_j sqrt(lambda_j) |a_j>|b_j>`.
    pub fn reconstruct(&self) -> Ket {
        let mut dims = self.dims_a().to_vec();
        dims.extend_from_slice(self.dims_b());
        let mut v = DVector::zeros(self.dim_a() * self.dim_b());
        for j in 0..self.pairs() {
            let w = self.coefficients[j].sqrt();
            if w > 0.0 {
                v += self.basis_a[j].amplitudes().kronecker(self.basis_b[j].amplitudes()) * C64::from(w);
            }
        }
        Ket::from_parts(v, dims)
    }
}

/// Schmidt decomposition across the cut after the first `cut` factors.
///
/// Degenerate coefficient blocks get a canonical basis (standard basis
/// vectors projected in index order, first nonzero amplitude real positive),
/// and zero-weight directions are completed the same way, so the output is a
/// deterministic function of the state.
pub fn schmidt_decompose(psi: &Ket, cut: usize) -> Result<SchmidtForm> {
    let parties = psi.parties();
    if cut == 0 || cut >= parties {
        return Err(Error::InvalidCut { cut, parties });
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > tol::NORM {
        return Err(Error::NonUnitNorm { norm });
    }
    let dims_a = psi.dims()[..cut].to_vec();
    let dims_b = psi.dims()[cut..].to_vec();
    let da: usize = dims_a.iter().product();
    let db: usize = dims_b.iter().product();

    let amp = psi.amplitudes();
    let m = DMatrix::from_fn(da, db, |a, b| amp[a * db + b]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let mut weights: Vec<f64> = Vec::new();
    let mut a_vecs: Vec<DVector<C64>> = Vec::new();
    let mut b_vecs: Vec<DVector<C64>> = Vec::new();

    let mut start = 0;
    while start < sigma.len() && sigma[start] > ZERO_SINGULAR {
        let mut end = start + 1;
        while end < sigma.len() && sigma[end] > ZERO_SINGULAR && sigma[end - 1] - sigma[end] <= DEGENERACY_GAP {
            end += 1;
        }
        let block = &order[start..end];
        let u_block = DMatrix::from_columns(&block.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
        let b_block =
            DMatrix::from_columns(&block.iter().map(|&i| vt.row(i).transpose().into_owned()).collect::<Vec<_>>());
        if block.len() == 1 {
            let mut a = u_block.column(0).into_owned();
            let phase = leading_phase(&a);
            a *= phase.conj();
            a_vecs.push(a);
            b_vecs.push(b_block.column(0) * phase);
            weights.push(sigma[start]);
        } else {
            // Rotate the block to its canonical basis; the B side follows
            // with the conjugate rotation so that sum_j a_j (x) b_j is unchanged.
            let canon = canonical_span_basis(&u_block);
            let w = u_block.adjoint() * DMatrix::from_columns(&canon);
            let b_rot = &b_block * w.map(|z| z.conj());
            let mean = sigma[start..end].iter().sum::<f64>() / block.len() as f64;
            for (j, a) in canon.into_iter().enumerate() {
                a_vecs.push(a);
                b_vecs.push(b_rot.column(j).into_owned());
                weights.push(mean);
            }
        }
        start = end;
    }

    let rank = weights.len();
    let total: f64 = weights.iter().map(|w| w * w).sum();
    let mut coefficients: Vec<f64> = weights.iter().map(|w| w * w / total).collect();
    coefficients.resize(da.max(db), 0.0);

    complete_basis(&mut a_vecs, da);
    complete_basis(&mut b_vecs, db);
    debug_assert!(a_vecs.len() == da && b_vecs.len() == db && rank <= da.min(db));

    Ok(SchmidtForm {
        coefficients,
        basis_a: a_vecs.into_iter().map(|v| Ket::from_parts(v, dims_a.clone())).collect(),
        basis_b: b_vecs.into_iter().map(|v| Ket::from_parts(v, dims_b.clone())).collect(),
    })
}

/// Unit phase of the first amplitude with magnitude above `PHASE_EPS`.
fn leading_phase(v: &DVector<C64>) -> C64 {
    v.iter().find(|z| z.norm() > PHASE_EPS).map_or(C64::new(1.0, 0.0), |z| z / z.norm())
}

fn fix_phase(mut v: DVector<C64>) -> DVector<C64> {
    let phase = leading_phase(&v);
    v *= phase.conj();
    v
}

fn unit(dim: usize, k: usize) -> DVector<C64> {
    let mut e = DVector::zeros(dim);
    e[k] = C64::new(1.0, 0.0);
    e
}

fn orthogonalize(mut v: DVector<C64>, against: &[DVector<C64>]) -> DVector<C64> {
    // Two passes of modified Gram-Schmidt.
    for _ in 0..2 {
        for q in against {
            let c = q.dotc(&v);
            v -= q * c;
        }
    }
    v
}

/// Canonical orthonormal basis of the column span of `cols` (orthonormal columns).
fn canonical_span_basis(cols: &DMatrix<C64>) -> Vec<DVector<C64>> {
    let dim = cols.nrows();
    let want = cols.ncols();
    let mut chosen: Vec<DVector<C64>> = Vec::with_capacity(want);
    for k in 0..dim {
        if chosen.len() == want {
            break;
        }
        let projected = cols * cols.row(k).adjoint();
        let v = orthogonalize(projected, &chosen);
        let n = v.norm();
        if n > SEED_NORM {
            chosen.push(fix_phase(v / C64::from(n)));
        }
    }
    chosen
}

/// Extends an orthonormal set to a basis of `C^dim` from standard vectors in index order.
fn complete_basis(vecs: &mut Vec<DVector<C64>>, dim: usize) {
    for k in 0..dim {
        if vecs.len() >= dim {
            break;
        }
        let v = orthogonalize(unit(dim, k), vecs);
        let n = v.norm();
        if n > SEED_NORM {
            vecs.push(fix_phase(v / C64::from(n)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ket(amps: &[f64], dims: &[usize]) -> Ket {
        Ket::normalized(amps.iter().map(|&a| c(a)).collect(), dims.to_vec()).unwrap()
    }

    fn assert_orthonormal(basis: &[Ket]) {
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((x.inner(y) - c(expected)).norm() <= tol::ORTHO, "<{i}|{j}>");
            }
        }
    }

    #[test]
    fn bell_state_has_flat_spectrum_and_standard_bases() {
        let bell = ket(&[1.0, 0.0, 0.0, 1.0], &[2, 2]);
        let s = schmidt_decompose(&bell, 1).unwrap();
        assert!((s.coefficients()[0] - 0.5).abs() < 1e-14);
        assert!((s.coefficients()[1] - 0.5).abs() < 1e-14);
        // Canonical choice in the degenerate block is the computational basis.
        for j in 0..2 {
            let e = Ket::basis(vec![2], j).unwrap();
            assert!((s.basis_a()[j].inner(&e) - c(1.0)).norm() < 1e-14);
            assert!((s.basis_b()[j].inner(&e) - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn product_state_completes_bases() {
        let s = schmidt_decompose(&ket(&[1.0, 0.0, 0.0, 0.0], &[2, 2]), 1).unwrap();
        assert_eq!(s.coefficients(), &[1.0, 0.0]);
        assert_eq!(s.rank(), 1);
        assert_orthonormal(s.basis_a());
        assert_orthonormal(s.basis_b());
        assert!((s.basis_a()[1].inner(&Ket::basis(vec![2], 1).unwrap()) - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn unequal_weights() {
        let psi = ket(&[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()], &[2, 2]);
        let s = schmidt_decompose(&psi, 1).unwrap();
        // 2x2 amplitude matrix is diag(sqrt 0.9, sqrt 0.1): singular values are the diagonal.
        assert!((s.coefficients()[0] - 0.9).abs() < 1e-12);
        assert!((s.coefficients()[1] - 0.1).abs() < 1e-12);
        assert!(s.reconstruct().equals_up_to_phase(&psi));
    }

    #[test]
    fn unequal_local_dimensions_pad_coefficients() {
        // qubit (x) qutrit: (|0,0> + |1,2>)/sqrt 2
        let psi = ket(&[1.0, 0.0, 0.0, 0.0, 0.0, 1.0], &[2, 3]);
        let s = schmidt_decompose(&psi, 1).unwrap();
        assert_eq!(s.coefficients().len(), 3);
        assert_eq!(s.dim_a(), 2);
        assert_eq!(s.dim_b(), 3);
        assert_eq!(s.pairs(), 2);
        assert!(s.coefficients()[2] == 0.0);
        assert_orthonormal(s.basis_a());
        assert_orthonormal(s.basis_b());
        assert!((s.reconstruct().amplitudes() - psi.amplitudes()).norm() <= tol::RECON);

        let swapped = psi.permute(&[1, 0]).unwrap();
        let s2 = schmidt_decompose(&swapped, 1).unwrap();
        assert_eq!(s2.dim_a(), 3);
        assert!((s2.reconstruct().amplitudes() - swapped.amplitudes()).norm() <= tol::RECON);
    }

    #[test]
    fn multi_factor_cut() {
        // GHZ_3 across A:BC has two equal coefficients.
        let ghz = ket(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], &[2, 2, 2]);
        let s = schmidt_decompose(&ghz, 1).unwrap();
        assert_eq!(s.dims_b(), &[2, 2]);
        assert_eq!(s.coefficients().len(), 4);
        assert!((s.coefficients()[0] - 0.5).abs() < 1e-14);
        assert!((s.coefficients()[1] - 0.5).abs() < 1e-14);
        assert!((s.basis_b()[1].inner(&Ket::basis(vec![2, 2], 3).unwrap()) - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn errors() {
        let bell = ket(&[1.0, 0.0, 0.0, 1.0], &[2, 2]);
        assert!(matches!(schmidt_decompose(&bell, 0), Err(Error::InvalidCut { .. })));
        assert!(matches!(schmidt_decompose(&bell, 2), Err(Error::InvalidCut { .. })));
        let unnormalized = Ket::from_parts(DVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(1.0)]), vec![2, 2]);
        assert!(matches!(schmidt_decompose(&unnormalized, 1), Err(Error::NonUnitNorm { .. })));
    }

    #[test]
    fn degenerate_block_is_basis_independent() {
        // sum_j |f_j>|conj f_j> over the 3x3 Fourier vectors is the maximally
        // entangled state; the canonical decomposition recovers the standard basis.
        let d = 3;
        let f = |j: usize, k: usize| {
            C64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64)
        };
        let mut amps = vec![c(0.0); d * d];
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    amps[a * d + b] += f(j, a) * f(j, b).conj() / C64::from((d as f64).sqrt());
                }
            }
        }
        let psi = Ket::new(amps, vec![d, d]).unwrap();
        let s = schmidt_decompose(&psi, 1).unwrap();
        for j in 0..d {
            assert!((s.coefficients()[j] - 1.0 / 3.0).abs() < 1e-12);
            let e = Ket::basis(vec![d], j).unwrap();
            assert!((s.basis_a()[j].inner(&e) - c(1.0)).norm() < 1e-12);
            assert!((s.basis_b()[j].inner(&e) - c(1.0)).norm() < 1e-12);
        }
    }
}
