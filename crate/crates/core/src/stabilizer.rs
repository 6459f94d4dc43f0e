//! The bipartite separable stabilizer pair.
//!
//! For `|psi> = sum_j sqrt(l_j) |a_j>|b_j>` and a basis `{|alpha>}` of A that
//! is unbiased with respect to `{|a_j>}`, the two projectors
//!
//! ```text
//! P = sum_j     |a_j><a_j|     (x) |b_j><b_j|
//! Q = sum_alpha |alpha><alpha| (x) |psi_alpha><psi_alpha|,
//! |psi_alpha> = sum_j sqrt(l_j) e^{-i phi(j, alpha)} |b_j>
//! ```
//!
//! are separable and satisfy `PQ = QP = |psi><psi|`.
//!
//! Alice's conjugate basis always spans her full local space, so `Q` has
//! rank `d_A`. `P` has rank `min(d_A, d_B)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, is_projector, schmidt_decompose, Ket, Operator, SchmidtForm, C64};
use crate::tol;

/// Phase table `phi(j, alpha)` of a basis unbiased to the computational one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateBasis {
    phases: DMatrix<f64>,
}

impl ConjugateBasis {
    pub fn dim(&self) -> usize {
        self.phases.nrows()
    }

    /// `phi(j, alpha)` in radians.
    pub fn phase(&self, j: usize, alpha: usize) -> f64 {
        self.phases[(j, alpha)]
    }

    pub fn phases(&self) -> &DMatrix<f64> {
        &self.phases
    }

    /// Rows as nested vectors, `rows[j][alpha]`.
    pub fn phase_rows(&self) -> Vec<Vec<f64>> {
        self.phases.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Coordinates of `|alpha>` in the computational basis: `e^{i phi(j,alpha)}/sqrt d`.
    pub fn vector(&self, alpha: usize) -> DVector<C64> {
        let d = self.dim();
        let amp = 1.0 / (d as f64).sqrt();
        DVector::from_fn(d, |j, _| C64::from_polar(amp, self.phases[(j, alpha)]))
    }

    /// Unitary whose columns are the basis vectors.
    pub fn unitary(&self) -> DMatrix<C64> {
        let d = self.dim();
        let amp = 1.0 / (d as f64).sqrt();
        DMatrix::from_fn(d, d, |j, alpha| C64::from_polar(amp, self.phases[(j, alpha)]))
    }

    /// Largest entry of `|H^dagger H - 1|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let h = self.unitary();
        let g = h.adjoint() * &h - DMatrix::identity(self.dim(), self.dim());
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// The discrete Fourier basis, `phi(j, alpha) = 2 pi j alpha / d`.
pub fn fourier_conjugate_basis(d: usize) -> ConjugateBasis {
    assert!(d >= 1, "conjugate basis dimension must be positive");
    let phases = DMatrix::from_fn(d, d, |j, alpha| 2.0 * PI * ((j * alpha) % d) as f64 / d as f64);
    ConjugateBasis { phases }
}

/// Validates an arbitrary phase table (a complex Hadamard matrix up to scale).
pub fn custom_conjugate_basis(phases: &[Vec<f64>]) -> Result<ConjugateBasis> {
    let d = phases.len();
    if d == 0 || phases.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidDims(format!("phase table must be square and nonempty, got {d} rows")));
    }
    if phases.iter().flatten().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameters("phase table has non-finite entries".into()));
    }
    let basis = ConjugateBasis { phases: DMatrix::from_fn(d, d, |j, a| phases[j][a]) };
    let residual = basis.orthonormality_residual();
    if residual > tol::ORTHO {
        return Err(Error::NotUnbiasedBasis { residual });
    }
    Ok(basis)
}

fn check_basis_dim(schmidt: &SchmidtForm, conj: &ConjugateBasis) -> Result<()> {
    if conj.dim() != schmidt.dim_a() {
        return Err(Error::DimensionMismatch(format!(
            "conjugate basis has dimension {}, local space A has dimension {}",
            conj.dim(),
            schmidt.dim_a()
        )));
    }
    Ok(())
}

/// `|alpha>` expressed in the ambient basis of A: `sum_j H[j,alpha] |a_j>`.
pub fn conjugate_vectors(schmidt: &SchmidtForm, conj: &ConjugateBasis) -> Result<Vec<Ket>> {
    check_basis_dim(schmidt, conj)?;
    let dims = schmidt.dims_a().to_vec();
    Ok((0..conj.dim())
        .map(|alpha| {
            let coords = conj.vector(alpha);
            let mut v = DVector::zeros(schmidt.dim_a());
            for (j, a) in schmidt.basis_a().iter().enumerate() {
                v += a.amplitudes() * coords[j];
            }
            Ket::from_parts(v, dims.clone())
        })
        .collect())
}

/// `|psi_alpha> = sum_j sqrt(l_j) e^{-i phi(j,alpha)} |b_j>` in the ambient basis of B.
pub fn build_psi_alpha(schmidt: &SchmidtForm, conj: &ConjugateBasis) -> Result<Vec<Ket>> {
    check_basis_dim(schmidt, conj)?;
    let dims = schmidt.dims_b().to_vec();
    Ok((0..conj.dim())
        .map(|alpha| {
            let mut v = DVector::zeros(schmidt.dim_b());
            for j in 0..schmidt.pairs() {
                let w = schmidt.coefficients()[j].sqrt();
                if w > 0.0 {
                    v += schmidt.basis_b()[j].amplitudes() * C64::from_polar(w, -conj.phase(j, alpha));
                }
            }
            Ket::from_parts(v, dims.clone())
        })
        .collect())
}

/// A separable operator stored as its rank-one product terms
/// `sum_k |x_k><x_k| (x) |y_k><y_k|`.
#[derive(Debug, Clone)]
pub struct ProductTerms(pub Vec<(Ket, Ket)>);

impl ProductTerms {
    pub fn to_operator(&self) -> Operator {
        let (x0, y0) = &self.0[0];
        let mut dims = x0.dims().to_vec();
        dims.extend_from_slice(y0.dims());
        let n = x0.dim() * y0.dim();
        let mut m = DMatrix::zeros(n, n);
        for (x, y) in &self.0 {
            let v = x.amplitudes().kronecker(y.amplitudes());
            m += &v * v.adjoint();
        }
        Operator::new(m, dims).expect("product terms share factor lists")
    }
}

fn p_terms(schmidt: &SchmidtForm) -> ProductTerms {
    ProductTerms((0..schmidt.pairs()).map(|j| (schmidt.basis_a()[j].clone(), schmidt.basis_b()[j].clone())).collect())
}

/// `P = sum_j |a_j><a_j| (x) |b_j><b_j|`.
pub fn build_p(schmidt: &SchmidtForm) -> Operator {
    p_terms(schmidt).to_operator()
}

/// `Q = sum_alpha |alpha><alpha| (x) |psi_alpha><psi_alpha|`.
pub fn build_q(schmidt: &SchmidtForm, conj: &ConjugateBasis) -> Result<Operator> {
    let alphas = conjugate_vectors(schmidt, conj)?;
    let psis = build_psi_alpha(schmidt, conj)?;
    Ok(ProductTerms(alphas.into_iter().zip(psis).collect()).to_operator())
}

/// The pair `(P, Q)` for a target state, with the data both tests need.
#[derive(Debug, Clone)]
pub struct BipartiteStabilizer {
    target: Ket,
    cut: usize,
    schmidt: SchmidtForm,
    conj: ConjugateBasis,
    alice_conjugate: Vec<Ket>,
    psi_alpha: Vec<Ket>,
    p: Operator,
    q: Operator,
    p_terms: ProductTerms,
    q_terms: ProductTerms,
}

impl BipartiteStabilizer {
    /// Uses the Fourier basis of dimension `d_A`.
    pub fn new(target: &Ket, cut: usize) -> Result<Self> {
        let schmidt = schmidt_decompose(target, cut)?;
        let conj = fourier_conjugate_basis(schmidt.dim_a());
        Self::assemble(target, cut, schmidt, conj)
    }

    pub fn with_basis(target: &Ket, cut: usize, conj: ConjugateBasis) -> Result<Self> {
        let schmidt = schmidt_decompose(target, cut)?;
        Self::assemble(target, cut, schmidt, conj)
    }

    fn assemble(target: &Ket, cut: usize, schmidt: SchmidtForm, conj: ConjugateBasis) -> Result<Self> {
        let alice_conjugate = conjugate_vectors(&schmidt, &conj)?;
        let psi_alpha = build_psi_alpha(&schmidt, &conj)?;
        let p_terms = p_terms(&schmidt);
        let q_terms = ProductTerms(alice_conjugate.iter().cloned().zip(psi_alpha.iter().cloned()).collect());
        Ok(Self {
            target: target.clone(),
            cut,
            p: p_terms.to_operator(),
            q: q_terms.to_operator(),
            schmidt,
            conj,
            alice_conjugate,
            psi_alpha,
            p_terms,
            q_terms,
        })
    }

    pub fn target(&self) -> &Ket {
        &self.target
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn schmidt(&self) -> &SchmidtForm {
        &self.schmidt
    }

    pub fn conjugate_basis(&self) -> &ConjugateBasis {
        &self.conj
    }

    /// Alice's conjugate basis vectors in the ambient basis of A.
    pub fn alice_conjugate(&self) -> &[Ket] {
        &self.alice_conjugate
    }

    pub fn psi_alpha(&self) -> &[Ket] {
        &self.psi_alpha
    }

    pub fn p(&self) -> &Operator {
        &self.p
    }

    pub fn q(&self) -> &Operator {
        &self.q
    }

    pub fn p_terms(&self) -> &ProductTerms {
        &self.p_terms
    }

    pub fn q_terms(&self) -> &ProductTerms {
        &self.q_terms
    }

    pub fn dim_a(&self) -> usize {
        self.schmidt.dim_a()
    }

    pub fn dim_b(&self) -> usize {
        self.schmidt.dim_b()
    }
}

/// Residuals of the stabilizer identities; every entry must be `<= TOL_STAB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizerResiduals {
    /// `||P|psi> - |psi>||`
    pub p_psi: f64,
    /// `||Q|psi> - |psi>||`
    pub q_psi: f64,
    /// `||PQ - psi||_F`
    pub pq_minus_psi: f64,
    /// `||QP - psi||_F`
    pub qp_minus_psi: f64,
    /// `||[P, Q]||_F`
    pub commutator: f64,
    /// `||PQP - psi||_F`
    pub pqp_minus_psi: f64,
    /// `max(||P^2 - P||_F, ||Q^2 - Q||_F)`
    pub idempotence: f64,
}

impl StabilizerResiduals {
    pub fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("P_psi", self.p_psi),
            ("Q_psi", self.q_psi),
            ("PQ_minus_psi", self.pq_minus_psi),
            ("QP_minus_psi", self.qp_minus_psi),
            ("commutator", self.commutator),
            ("PQP_minus_psi", self.pqp_minus_psi),
            ("idempotence", self.idempotence),
        ]
    }

    pub fn max(&self) -> f64 {
        self.named().iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.named().iter().all(|(_, v)| *v <= tol::STAB)
    }
}

/// Residuals for an arbitrary candidate pair; [`verify_stabilizer`] applies it to a built one.
pub fn stabilizer_residuals(psi: &Ket, p: &Operator, q: &Operator) -> Result<StabilizerResiduals> {
    if p.dims() != psi.dims() || q.dims() != psi.dims() {
        return Err(Error::DimensionMismatch(format!(
            "target on {:?}, P on {:?}, Q on {:?}",
            psi.dims(),
            p.dims(),
            q.dims()
        )));
    }
    let target = psi.projector();
    let pq = p * q;
    let qp = q * p;
    let idem = |x: &Operator| (x * x).distance(x);
    Ok(StabilizerResiduals {
        p_psi: (p.apply(psi) - psi.amplitudes()).norm(),
        q_psi: (q.apply(psi) - psi.amplitudes()).norm(),
        pq_minus_psi: pq.distance(&target),
        qp_minus_psi: qp.distance(&target),
        commutator: pq.distance(&qp),
        pqp_minus_psi: (&pq * p).distance(&target),
        idempotence: idem(p).max(idem(q)),
    })
}

pub fn verify_stabilizer(stab: &BipartiteStabilizer) -> StabilizerResiduals {
    stabilizer_residuals(&stab.target, &stab.p, &stab.q).expect("stabilizer operators share the target's factors")
}

/// Smallest eigenvalue of `(1 - P) + (1 - Q) - (1 - psi)`; nonnegative when
/// the operator inequality behind the fidelity bound holds.
pub fn inequality_gap(stab: &BipartiteStabilizer) -> Result<f64> {
    let id = Operator::identity(stab.target.dims());
    let gap = &(&(&id - &stab.p) + &(&id - &stab.q)) - &(&id - &stab.target.projector());
    Ok(eig_hermitian(&gap)?.min())
}

/// Whether both operators pass [`is_projector`].
pub fn projectors_valid(stab: &BipartiteStabilizer) -> bool {
    is_projector(&stab.p) && is_projector(&stab.q)
}

/// Bob's rescaled effects `M_alpha = c |psi_alpha><psi_alpha|` with a uniform
/// `c = 1 / ||sum_alpha |psi_alpha><psi_alpha|||_op`, so that `sum M_alpha <= 1`
/// with operator norm exactly one.
pub fn rescale_bob_effects(psi_alpha: &[Ket]) -> Result<(f64, Vec<Operator>)> {
    let first = psi_alpha.first().ok_or_else(|| Error::InvalidParameters("no states to rescale".into()))?;
    if psi_alpha.iter().any(|k| k.dims() != first.dims()) {
        return Err(Error::DimensionMismatch("states live on different spaces".into()));
    }
    let projectors: Vec<Operator> = psi_alpha.iter().map(Ket::projector).collect();
    let sum = projectors.iter().skip(1).fold(projectors[0].clone(), |acc, p| &acc + p);
    let c = 1.0 / eig_hermitian(&sum)?.max();
    Ok((c, projectors.iter().map(|p| p.scale(c)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{projector_rank, tensor};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ket(amps: &[f64], dims: &[usize]) -> Ket {
        Ket::normalized(amps.iter().map(|&a| c(a)).collect(), dims.to_vec()).unwrap()
    }

    fn bell() -> Ket {
        ket(&[1.0, 0.0, 0.0, 1.0], &[2, 2])
    }

    fn pauli(name: char) -> Operator {
        let m = match name {
            'X' => [c(0.0), c(1.0), c(1.0), c(0.0)],
            'Z' => [c(1.0), c(0.0), c(0.0), c(-1.0)],
            _ => unreachable!(),
        };
        Operator::new(DMatrix::from_row_slice(2, 2, &m), vec![2]).unwrap()
    }

    fn pauli_projector(name: char) -> Operator {
        let g = tensor(&pauli(name), &pauli(name));
        (&Operator::identity(&[2, 2]) + &g).scale(0.5)
    }

    #[test]
    fn fourier_basis_small_dimensions() {
        let b1 = fourier_conjugate_basis(1);
        assert_eq!(b1.phase(0, 0), 0.0);
        assert!((b1.vector(0)[0] - c(1.0)).norm() < 1e-15);

        let b2 = fourier_conjugate_basis(2);
        let h = 1.0 / 2f64.sqrt();
        let plus = b2.vector(0);
        let minus = b2.vector(1);
        assert!((plus[0] - c(h)).norm() < 1e-15 && (plus[1] - c(h)).norm() < 1e-15);
        assert!((minus[0] - c(h)).norm() < 1e-15 && (minus[1] - c(-h)).norm() < 1e-15);

        // 3x3 DFT matrix is unitary.
        assert!(fourier_conjugate_basis(3).orthonormality_residual() <= tol::ORTHO);
    }

    #[test]
    fn custom_bases() {
        let fourier = fourier_conjugate_basis(2);
        assert_eq!(custom_conjugate_basis(&fourier.phase_rows()).unwrap(), fourier);
        assert!(matches!(
            custom_conjugate_basis(&[vec![0.0, 0.0], vec![0.0, 0.0]]),
            Err(Error::NotUnbiasedBasis { .. })
        ));
        assert!(custom_conjugate_basis(&[vec![0.0, 0.0], vec![0.0]]).is_err());

        // Tensor square of the d=2 Fourier table: phi((j1 j2), (a1 a2)) = pi (j1 a1 + j2 a2).
        let square: Vec<Vec<f64>> = (0..4)
            .map(|j| (0..4).map(|a| PI * (((j >> 1) * (a >> 1)) + ((j & 1) * (a & 1))) as f64).collect())
            .collect();
        let b4 = custom_conjugate_basis(&square).unwrap();
        assert!(b4.unitary().iter().all(|z| (z.norm() - 0.5).abs() < 1e-15));
        assert_ne!(b4, fourier_conjugate_basis(4));
    }

    #[test]
    fn psi_alpha_examples() {
        let h = 1.0 / 2f64.sqrt();
        let s = schmidt_decompose(&bell(), 1).unwrap();
        let psi = build_psi_alpha(&s, &fourier_conjugate_basis(2)).unwrap();
        assert!((psi[0].amplitudes() - ket(&[h, h], &[2]).amplitudes()).norm() < 1e-14);
        assert!((psi[1].amplitudes() - ket(&[h, -h], &[2]).amplitudes()).norm() < 1e-14);

        let s = schmidt_decompose(&ket(&[1.0, 0.0, 0.0, 0.0], &[2, 2]), 1).unwrap();
        for p in build_psi_alpha(&s, &fourier_conjugate_basis(2)).unwrap() {
            assert!(p.equals_up_to_phase(&Ket::basis(vec![2], 0).unwrap()));
        }

        let (a, b) = (0.9f64.sqrt(), 0.1f64.sqrt());
        let s = schmidt_decompose(&ket(&[a, 0.0, 0.0, b], &[2, 2]), 1).unwrap();
        let psi = build_psi_alpha(&s, &fourier_conjugate_basis(2)).unwrap();
        assert!((psi[0].amplitudes()[0] - c(a)).norm() < 1e-12);
        assert!((psi[0].amplitudes()[1] - c(b)).norm() < 1e-12);
        assert!((psi[1].amplitudes()[0] - c(a)).norm() < 1e-12);
        assert!((psi[1].amplitudes()[1] - c(-b)).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let s = schmidt_decompose(&bell(), 1).unwrap();
        assert!(matches!(build_psi_alpha(&s, &fourier_conjugate_basis(3)), Err(Error::DimensionMismatch(_))));
        assert!(matches!(build_q(&s, &fourier_conjugate_basis(3)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn bell_reproduces_pauli_stabilizer_projectors() {
        let stab = BipartiteStabilizer::new(&bell(), 1).unwrap();
        assert!(stab.p().distance(&pauli_projector('Z')) < 1e-12);
        assert!(stab.q().distance(&pauli_projector('X')) < 1e-12);
        let r = verify_stabilizer(&stab);
        assert!(r.max() <= 1e-12, "{r:?}");
        assert!(inequality_gap(&stab).unwrap() >= -tol::PSD);
    }

    #[test]
    fn product_state_projectors() {
        let zero_zero = ket(&[1.0, 0.0, 0.0, 0.0], &[2, 2]);
        let stab = BipartiteStabilizer::new(&zero_zero, 1).unwrap();
        let expected_p =
            &Ket::basis(vec![2, 2], 0).unwrap().projector() + &Ket::basis(vec![2, 2], 3).unwrap().projector();
        assert!(stab.p().distance(&expected_p) < 1e-14);
        let expected_q = tensor(&Operator::identity(&[2]), &Ket::basis(vec![2], 0).unwrap().projector());
        assert!(stab.q().distance(&expected_q) < 1e-14);
        assert!(verify_stabilizer(&stab).passed());
        assert_eq!(projector_rank(stab.p()).unwrap(), 2);
        assert_eq!(projector_rank(stab.q()).unwrap(), 2);
    }

    #[test]
    fn qutrit_maximally_entangled_rank() {
        let psi = ket(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], &[3, 3]);
        let stab = BipartiteStabilizer::new(&psi, 1).unwrap();
        assert_eq!(projector_rank(stab.p()).unwrap(), 3);
        assert_eq!(projector_rank(stab.q()).unwrap(), 3);
        assert!(verify_stabilizer(&stab).passed());
    }

    #[test]
    fn unequal_weights_q_is_rank_two_projector() {
        let psi = ket(&[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()], &[2, 2]);
        let stab = BipartiteStabilizer::new(&psi, 1).unwrap();
        assert!(is_projector(stab.q()));
        assert_eq!(projector_rank(stab.q()).unwrap(), 2);
    }

    #[test]
    fn unequal_local_dimensions() {
        let psi = ket(&[1.0, 0.0, 0.3, 0.0, 0.5, 0.0], &[2, 3]);
        let stab = BipartiteStabilizer::new(&psi, 1).unwrap();
        assert!(verify_stabilizer(&stab).passed());
        assert_eq!(projector_rank(stab.q()).unwrap(), 2);

        let swapped = psi.permute(&[1, 0]).unwrap();
        let stab = BipartiteStabilizer::new(&swapped, 1).unwrap();
        assert!(verify_stabilizer(&stab).passed());
        assert_eq!(projector_rank(stab.q()).unwrap(), 3);
        assert_eq!(projector_rank(stab.p()).unwrap(), 2);
        assert!(inequality_gap(&stab).unwrap() >= -tol::PSD);
    }

    #[test]
    fn identity_in_place_of_p_is_flagged() {
        let stab = BipartiteStabilizer::new(&bell(), 1).unwrap();
        let id = Operator::identity(&[2, 2]);
        let r = stabilizer_residuals(stab.target(), &id, stab.q()).unwrap();
        assert!(!r.passed());
        assert!((r.pq_minus_psi - stab.q().distance(&stab.target().projector())).abs() < 1e-14);
        assert!(r.pq_minus_psi > 0.5);
    }

    #[test]
    fn stored_terms_rebuild_projectors() {
        let psi = ket(&[0.3, 0.1, -0.4, 0.2, 0.5, 0.6, 0.1, 0.0, 0.25], &[3, 3]);
        let stab = BipartiteStabilizer::new(&psi, 1).unwrap();
        assert_eq!(stab.p_terms().to_operator(), stab.p().clone());
        assert_eq!(stab.q_terms().to_operator(), stab.q().clone());
    }

    #[test]
    fn rescaling_examples() {
        let stab = BipartiteStabilizer::new(&bell(), 1).unwrap();
        let (c_bell, effects) = rescale_bob_effects(stab.psi_alpha()).unwrap();
        assert!((c_bell - 1.0).abs() < 1e-12);
        let sum = &effects[0] + &effects[1];
        assert!(sum.distance(&Operator::identity(&[2])) < 1e-12);

        let zero = Ket::basis(vec![2], 0).unwrap();
        let (c_prod, _) = rescale_bob_effects(&[zero.clone(), zero.clone()]).unwrap();
        assert!((c_prod - 0.5).abs() < 1e-12);

        let (c_one, _) = rescale_bob_effects(&[zero]).unwrap();
        assert!((c_one - 1.0).abs() < 1e-12);
        assert!(rescale_bob_effects(&[]).is_err());
    }
}
