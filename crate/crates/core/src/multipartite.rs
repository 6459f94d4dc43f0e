//! The recursive family of `2^(n-1)` fully separable projectors for an
//! `n`-party pure state.
//!
//! The first party is split from the rest and the bipartite pair is built on
//! that cut. Every conditional state of the remaining parties (the Schmidt
//! vectors `|b_j>` on the `P` side, the `|psi_alpha>` on the `Q` side) is then
//! treated the same way, one party at a time. Bit `k` of a word picks the `P`
//! branch (0) or the `Q` branch (1) at party `k`, so that
//!
//! ```text
//! P^()  = |psi><psi|
//! P^(u) = P^(u0) P^(u1),   [P^(u0), P^(u1)] = 0
//! ```
//!
//! and the leaves (words of length `n - 1`) multiply to `|psi><psi|` in
//! lexicographic order.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, inverse_order, schmidt_decompose, DensityMatrix, Ket, Operator, SchmidtForm, C64};
use crate::stabilizer::{build_psi_alpha, conjugate_vectors, fourier_conjugate_basis, ConjugateBasis};
use crate::tol;

/// Default cap on the total Hilbert-space dimension of a family.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// A word over `{0, 1}`; the empty word is allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BinaryWord(Vec<bool>);

impl BinaryWord {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut bits = self.0.clone();
        bits.push(bit);
        Self(bits)
    }

    /// All words of length `len` in lexicographic order.
    pub fn all(len: usize) -> Vec<Self> {
        (0..1usize << len).map(|m| Self((0..len).map(|k| (m >> (len - 1 - k)) & 1 == 1).collect())).collect()
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidParameters(format!("'{s}' is not a binary word"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Construction knobs for [`build_family`].
#[derive(Debug, Clone)]
pub struct FamilyOptions {
    pub dim_cap: usize,
    /// Conjugate basis for the party at each level; `None` (or a missing
    /// entry) means the Fourier basis of that party's dimension.
    pub level_bases: Vec<Option<ConjugateBasis>>,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self { dim_cap: DEFAULT_DIM_CAP, level_bases: Vec::new() }
    }
}

/// One conditional state in the recursion, on the parties from its level on.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub(crate) state: Ket,
    pub(crate) split: Option<Box<Split>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub(crate) schmidt: SchmidtForm,
    /// The conjugate basis of the first party, in its ambient basis.
    pub(crate) conj: Vec<Ket>,
    /// Children for `|b_j>`, `j < pairs`.
    pub(crate) p_children: Vec<Node>,
    /// Children for `|psi_alpha>`.
    pub(crate) q_children: Vec<Node>,
}

impl Node {
    fn build(state: Ket, level: usize, opts: &FamilyOptions) -> Result<Self> {
        if state.parties() == 1 {
            return Ok(Self { state, split: None });
        }
        let schmidt = schmidt_decompose(&state, 1)?;
        let basis = match opts.level_bases.get(level) {
            Some(Some(b)) => b.clone(),
            _ => fourier_conjugate_basis(schmidt.dim_a()),
        };
        let conj = conjugate_vectors(&schmidt, &basis)?;
        let psi_alpha = build_psi_alpha(&schmidt, &basis)?;
        let p_children = schmidt.basis_b()[..schmidt.pairs()]
            .iter()
            .map(|b| Node::build(b.clone(), level + 1, opts))
            .collect::<Result<_>>()?;
        let q_children = psi_alpha.into_iter().map(|s| Node::build(s, level + 1, opts)).collect::<Result<_>>()?;
        Ok(Self { state, split: Some(Box::new(Split { schmidt, conj, p_children, q_children })) })
    }

    /// Local basis of this node's first party and the children it selects.
    pub(crate) fn branch(&self, bit: bool) -> (&[Ket], &[Node]) {
        let s = self.split.as_ref().expect("branching at a single-party node");
        if bit {
            (&s.conj, &s.q_children)
        } else {
            (s.schmidt.basis_a(), &s.p_children)
        }
    }

    fn projector(&self, word: &[bool]) -> DMatrix<C64> {
        let Some((&bit, rest)) = word.split_first() else {
            return self.state.projector().into_matrix();
        };
        let (local, children) = self.branch(bit);
        let n = self.state.dim();
        let mut m = DMatrix::zeros(n, n);
        for (x, child) in local.iter().zip(children) {
            let px = x.amplitudes() * x.amplitudes().adjoint();
            m += px.kronecker(&child.projector(rest));
        }
        m
    }

    fn product_terms(&self, word: &[bool], prefix: &mut Vec<Ket>, out: &mut Vec<Vec<Ket>>) {
        let Some((&bit, rest)) = word.split_first() else {
            prefix.push(self.state.clone());
            out.push(prefix.clone());
            prefix.pop();
            return;
        };
        let (local, children) = self.branch(bit);
        for (x, child) in local.iter().zip(children) {
            prefix.push(x.clone());
            child.product_terms(rest, prefix, out);
            prefix.pop();
        }
    }
}

/// The binary-word family `P^(u)` of a target state.
#[derive(Debug, Clone)]
pub struct StabilizerFamily {
    target: Ket,
    order: Vec<usize>,
    leaves: BTreeMap<BinaryWord, Operator>,
    internal: BTreeMap<BinaryWord, Operator>,
    separability: BTreeMap<BinaryWord, Vec<Vec<Ket>>>,
    root: Node,
}

/// Builds the family along `order`: position `i` of the chain is party `order[i]`.
pub fn build_family(psi: &Ket, order: &[usize], opts: &FamilyOptions) -> Result<StabilizerFamily> {
    let n = psi.parties();
    if n < 2 {
        return Err(Error::InvalidDims(format!("a family needs at least two parties, got {n}")));
    }
    if psi.dim() > opts.dim_cap {
        return Err(Error::DimensionCap { dim: psi.dim(), cap: opts.dim_cap });
    }
    let chain = psi.permute(order)?;
    for (level, basis) in opts.level_bases.iter().enumerate() {
        if let Some(b) = basis {
            if level + 1 >= n || b.dim() != chain.dims()[level] {
                return Err(Error::DimensionMismatch(format!(
                    "conjugate basis of dimension {} given for level {level} of {:?}",
                    b.dim(),
                    chain.dims()
                )));
            }
        }
    }
    let root = Node::build(chain, 0, opts)?;
    let back = inverse_order(order);
    let original = |m: DMatrix<C64>| {
        Operator::from_parts(m, root.state.dims().to_vec()).permute(&back).expect("inverse of a valid order")
    };

    let mut leaves = BTreeMap::new();
    let mut separability = BTreeMap::new();
    for word in BinaryWord::all(n - 1) {
        leaves.insert(word.clone(), original(root.projector(word.bits())));
        let mut terms = Vec::new();
        root.product_terms(word.bits(), &mut Vec::new(), &mut terms);
        let terms =
            terms.into_iter().map(|chain_kets| back.iter().map(|&pos| chain_kets[pos].clone()).collect()).collect();
        separability.insert(word, terms);
    }
    let mut internal = BTreeMap::new();
    for len in 0..n - 1 {
        for word in BinaryWord::all(len) {
            internal.insert(word.clone(), original(root.projector(word.bits())));
        }
    }
    Ok(StabilizerFamily { target: psi.clone(), order: order.to_vec(), leaves, internal, separability, root })
}

impl StabilizerFamily {
    pub fn target(&self) -> &Ket {
        &self.target
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn parties(&self) -> usize {
        self.target.parties()
    }

    /// Leaf projectors keyed by words of length `n - 1`, iterated lexicographically.
    pub fn leaves(&self) -> &BTreeMap<BinaryWord, Operator> {
        &self.leaves
    }

    /// Projectors of all shorter words, including `P^() = |psi><psi|`.
    pub fn internal(&self) -> &BTreeMap<BinaryWord, Operator> {
        &self.internal
    }

    /// `P^(u)` for a word of any length up to `n - 1`.
    pub fn projector(&self, word: &BinaryWord) -> Option<&Operator> {
        self.leaves.get(word).or_else(|| self.internal.get(word))
    }

    /// Product terms of a leaf: each entry lists one local ket per party, in
    /// the target's party order.
    pub fn product_terms(&self, word: &BinaryWord) -> Option<&[Vec<Ket>]> {
        self.separability.get(word).map(Vec::as_slice)
    }

    pub(crate) fn root(&self) -> &Node {
        &self.root
    }

    /// A copy with one leaf swapped for an arbitrary operator; the
    /// separability data and the internal nodes are left as they were.
    pub fn with_leaf(&self, word: &BinaryWord, op: Operator) -> Result<Self> {
        if !self.leaves.contains_key(word) {
            return Err(Error::InvalidParameters(format!("{word} is not a leaf word")));
        }
        if op.dims() != self.target.dims() {
            return Err(Error::DimensionMismatch(format!(
                "leaf on {:?}, target on {:?}",
                op.dims(),
                self.target.dims()
            )));
        }
        let mut out = self.clone();
        out.leaves.insert(word.clone(), op);
        Ok(out)
    }
}

/// Residuals of the family identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyReport {
    /// `||prod_u P^(u) - |psi><psi|||_F` over the leaves in lexicographic order.
    pub product: f64,
    /// Largest `||[P^(u0), P^(u1)]||_F` over internal words.
    pub sibling_commutator: f64,
    /// Largest `||P^(u) - P^(u0) P^(u1)||_F` over internal words.
    pub split: f64,
    /// Smallest eigenvalue of `sum_u (1 - P^(u)) - (1 - |psi><psi|)`.
    pub inequality_min_eigenvalue: f64,
    /// Largest distance between a leaf and the sum of its product terms.
    pub separability: f64,
    /// Largest `max(||P^2 - P||_F, ||P - P^dagger||_F)` over stored operators.
    pub projector: f64,
}

impl FamilyReport {
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("product_minus_psi", self.product),
            ("sibling_commutator", self.sibling_commutator),
            ("split", self.split),
            ("inequality_min_eigenvalue", self.inequality_min_eigenvalue),
            ("separability", self.separability),
            ("projector", self.projector),
        ]
    }

    pub fn passed(&self) -> bool {
        self.product <= tol::STAB
            && self.sibling_commutator <= tol::STAB
            && self.split <= tol::STAB
            && self.inequality_min_eigenvalue >= -tol::PSD
            && self.separability <= tol::STAB
            && self.projector <= tol::PROJ
    }
}

fn product_of_terms(terms: &[Vec<Ket>], dims: &[usize]) -> Operator {
    let n: usize = dims.iter().product();
    let mut m = DMatrix::zeros(n, n);
    for term in terms {
        let v = term[1..].iter().fold(term[0].amplitudes().clone(), |acc, k| acc.kronecker(k.amplitudes()));
        m += &v * v.adjoint();
    }
    Operator::from_parts(m, dims.to_vec())
}

pub fn verify_family(fam: &StabilizerFamily) -> FamilyReport {
    let dims = fam.target.dims();
    let psi = fam.target.projector();
    let id = Operator::identity(dims);

    let product = fam.leaves.values().skip(1).fold(fam.leaves.values().next().unwrap().clone(), |acc, p| &acc * p);

    let mut sibling_commutator = 0.0f64;
    let mut split = 0.0f64;
    for (word, p) in &fam.internal {
        let p0 = fam.projector(&word.child(false)).expect("child of an internal word");
        let p1 = fam.projector(&word.child(true)).expect("child of an internal word");
        let p01 = p0 * p1;
        sibling_commutator = sibling_commutator.max(p01.distance(&(p1 * p0)));
        split = split.max(p.distance(&p01));
    }

    let mut gap = &psi - &id;
    for p in fam.leaves.values() {
        gap = &gap + &(&id - p);
    }
    let inequality_min_eigenvalue = eig_hermitian(&gap).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY);

    let separability =
        fam.leaves.iter().map(|(w, p)| product_of_terms(&fam.separability[w], dims).distance(p)).fold(0.0, f64::max);

    let projector = fam
        .leaves
        .values()
        .chain(fam.internal.values())
        .map(|p| (p * p).distance(p).max(p.hermiticity_residual()))
        .fold(0.0, f64::max);

    FamilyReport {
        product: product.distance(&psi),
        sibling_commutator,
        split,
        inequality_min_eigenvalue,
        separability,
        projector,
    }
}

/// `sum_u tr(rho P^(u)) - (2^(n-1) - 1)`, a lower bound on `tr(rho psi)`.
pub fn fidelity_bound_multipartite(rho: &DensityMatrix, fam: &StabilizerFamily) -> Result<f64> {
    let mut sum = 0.0;
    for p in fam.leaves.values() {
        sum += rho.expectation(p)?;
    }
    Ok(sum - (fam.leaves.len() as f64 - 1.0))
}

/// Number of distinct local measurements each party needs along the chain:
/// `2` for the first, `2 (2d)^(k-1)` for the `k`-th, and `(2d)^(n-1)` binary
/// measurements for the last.
pub fn measurement_count(n: usize, d: usize) -> Result<Vec<u64>> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidParameters(format!("need n >= 2 and d >= 2, got n={n}, d={d}")));
    }
    let overflow = || Error::InvalidParameters(format!("measurement count overflows for n={n}, d={d}"));
    let base = 2u64.checked_mul(d as u64).ok_or_else(overflow)?;
    let mut counts = vec![2u64];
    for k in 2..n {
        let c = base.checked_pow((k - 1) as u32).and_then(|x| x.checked_mul(2)).ok_or_else(overflow)?;
        counts.push(c);
    }
    counts.push(base.checked_pow((n - 1) as u32).ok_or_else(overflow)?);
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{projector_rank, tensor};
    use crate::random::random_ket;
    use crate::stabilizer::BipartiteStabilizer;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ghz3() -> Ket {
        let mut v = vec![c(0.0); 8];
        v[0] = c(1.0);
        v[7] = c(1.0);
        Ket::normalized(v, vec![2, 2, 2]).unwrap()
    }

    fn basis(dims: &[usize], i: usize) -> Ket {
        Ket::basis(dims.to_vec(), i).unwrap()
    }

    fn w(s: &str) -> BinaryWord {
        BinaryWord::parse(s).unwrap()
    }

    #[test]
    fn words() {
        let all: Vec<String> = BinaryWord::all(2).iter().map(ToString::to_string).collect();
        assert_eq!(all, ["00", "01", "10", "11"]);
        assert_eq!(BinaryWord::all(0), vec![BinaryWord::empty()]);
        assert_eq!(BinaryWord::empty().to_string(), "()");
        assert!(BinaryWord::parse("012").is_err());
    }

    #[test]
    fn two_parties_give_the_bipartite_pair() {
        let bell = Ket::normalized(vec![c(1.0), c(0.0), c(0.0), c(1.0)], vec![2, 2]).unwrap();
        let fam = build_family(&bell, &[0, 1], &FamilyOptions::default()).unwrap();
        let stab = BipartiteStabilizer::new(&bell, 1).unwrap();
        assert_eq!(fam.leaves().len(), 2);
        assert!(fam.leaves()[&w("0")].distance(stab.p()) < 1e-14);
        assert!(fam.leaves()[&w("1")].distance(stab.q()) < 1e-14);
        let r = verify_family(&fam);
        assert!(r.passed(), "{r:?}");
        assert!(r.inequality_min_eigenvalue >= -1e-12);
    }

    #[test]
    fn ghz3_leaf_00_by_hand() {
        let fam = build_family(&ghz3(), &[0, 1, 2], &FamilyOptions::default()).unwrap();
        assert_eq!(fam.leaves().len(), 4);
        assert_eq!(fam.internal().len(), 3);
        // P_{|00>} = |00><00| + |11><11| on BC.
        let p00_bc = &basis(&[2, 2], 0).projector() + &basis(&[2, 2], 3).projector();
        let expected = &tensor(&basis(&[2], 0).projector(), &p00_bc) + &tensor(&basis(&[2], 1).projector(), &p00_bc);
        assert!(fam.leaves()[&w("00")].distance(&expected) < 1e-13);
        assert!(fam.internal()[&BinaryWord::empty()].distance(&ghz3().projector()) < 1e-14);

        let r = verify_family(&fam);
        assert!(r.passed(), "{r:?}");
        assert!(r.inequality_min_eigenvalue >= -1e-9);
    }

    #[test]
    fn ghz3_bounds() {
        let psi = ghz3();
        let fam = build_family(&psi, &[0, 1, 2], &FamilyOptions::default()).unwrap();
        let pure = DensityMatrix::pure(&psi);
        assert!((fidelity_bound_multipartite(&pure, &fam).unwrap() - 1.0).abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(&[2, 2, 2]);
        let ranks: usize = fam.leaves().values().map(|p| projector_rank(p).unwrap()).sum();
        let bound = fidelity_bound_multipartite(&mixed, &fam).unwrap();
        assert!((bound - (ranks as f64 / 8.0 - 3.0)).abs() < 1e-12);
        assert!(bound <= 1.0 / 8.0);

        let noisy = pure.mix(&mixed, 0.1).unwrap();
        let b = fidelity_bound_multipartite(&noisy, &fam).unwrap();
        assert!((b - (0.9 + 0.1 * bound)).abs() < 1e-12);
        assert!(b <= 0.9 + 0.1 / 8.0);
    }

    #[test]
    fn corrupted_leaf_breaks_product() {
        let psi = ghz3();
        let fam = build_family(&psi, &[0, 1, 2], &FamilyOptions::default()).unwrap();
        let bad = fam.with_leaf(&w("11"), Operator::identity(&[2, 2, 2])).unwrap();
        let r = verify_family(&bad);
        assert!(!r.passed());
        let head = &(&fam.leaves()[&w("00")] * &fam.leaves()[&w("01")]) * &fam.leaves()[&w("10")];
        assert!((r.product - head.distance(&psi.projector())).abs() < 1e-12);
        assert!(r.product > 0.1);
    }

    #[test]
    fn random_four_qubits() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let psi = random_ket(&[2, 2, 2, 2], &mut rng);
        let fam = build_family(&psi, &[0, 1, 2, 3], &FamilyOptions::default()).unwrap();
        assert_eq!(fam.leaves().len(), 8);
        assert_eq!(fam.internal().len(), 7);
        assert!(verify_family(&fam).passed());
    }

    #[test]
    fn other_orders_and_mixed_dimensions() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let psi = random_ket(&[2, 3, 2], &mut rng);
        let a = build_family(&psi, &[0, 1, 2], &FamilyOptions::default()).unwrap();
        let b = build_family(&psi, &[2, 0, 1], &FamilyOptions::default()).unwrap();
        assert!(verify_family(&a).passed());
        assert!(verify_family(&b).passed());
        assert!(a.leaves()[&w("00")].distance(&b.leaves()[&w("00")]) > 1e-6);
        assert_eq!(b.product_terms(&w("10")).unwrap()[0].iter().map(Ket::dim).collect::<Vec<_>>(), [2, 3, 2]);
    }

    #[test]
    fn errors() {
        let psi = ghz3();
        assert!(matches!(build_family(&psi, &[0, 0, 1], &FamilyOptions::default()), Err(Error::InvalidOrder(_))));
        let opts = FamilyOptions { dim_cap: 4, ..Default::default() };
        assert!(matches!(build_family(&psi, &[0, 1, 2], &opts), Err(Error::DimensionCap { dim: 8, cap: 4 })));
        let opts = FamilyOptions { level_bases: vec![Some(fourier_conjugate_basis(3))], ..Default::default() };
        assert!(matches!(build_family(&psi, &[0, 1, 2], &opts), Err(Error::DimensionMismatch(_))));
        let single = basis(&[2], 0);
        assert!(build_family(&single, &[0], &FamilyOptions::default()).is_err());
    }

    #[test]
    fn measurement_counts() {
        assert_eq!(measurement_count(2, 2).unwrap(), [2, 4]);
        assert_eq!(measurement_count(3, 2).unwrap(), [2, 8, 16]);
        assert_eq!(measurement_count(4, 3).unwrap(), [2, 12, 72, 216]);
        assert!(measurement_count(1, 2).is_err());
        assert!(measurement_count(80, 64).is_err());
    }
}
