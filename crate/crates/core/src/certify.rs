//! One-way LOCC tests, their exact outcome distributions, and Hoeffding
//! certificates built from sampled pass rates.
//!
//! The `P` test has both parties measure their Schmidt bases and accept on
//! coinciding outcomes. The `Q` test has Alice measure her conjugate basis and
//! announce `alpha`, after which Bob tests for `|psi_alpha>`. A leaf `P^(u)` of
//! a multipartite family is tested by a cascade along the party chain: party
//! `k` measures the basis selected by bit `k` of `u` in the node reached so far,
//! and the last party runs a binary test for the remaining conditional state.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Ket, Operator, C64};
use crate::multipartite::{BinaryWord, Node, StabilizerFamily};
use crate::stabilizer::{rescale_bob_effects, BipartiteStabilizer};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestKind {
    P,
    Q,
    Leaf(BinaryWord),
}

impl TestKind {
    pub fn label(&self) -> String {
        match self {
            TestKind::P => "P".into(),
            TestKind::Q => "Q".into(),
            TestKind::Leaf(w) => w.to_string(),
        }
    }
}

/// One run of a test. `outcomes[0]` is Alice's basis index; the last entry
/// is the final party's basis index (`P` test) or accept bit (all others).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolOutcome {
    pub test: TestKind,
    pub outcomes: Vec<usize>,
    pub accepted: bool,
}

impl ProtocolOutcome {
    pub fn alice(&self) -> usize {
        self.outcomes[0]
    }

    pub fn bob(&self) -> usize {
        *self.outcomes.last().unwrap()
    }
}

/// Every outcome record of a test with its Born probability.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    test: TestKind,
    entries: Vec<(Vec<usize>, bool, f64)>,
    cumulative: Vec<f64>,
}

impl OutcomeDistribution {
    fn new(test: TestKind, entries: Vec<(Vec<usize>, bool, f64)>) -> Self {
        let mut acc = 0.0;
        let cumulative = entries
            .iter()
            .map(|(_, _, p)| {
                acc += p.max(0.0);
                acc
            })
            .collect();
        Self { test, entries, cumulative }
    }

    pub fn test(&self) -> &TestKind {
        &self.test
    }

    /// `(outcomes, accepted, probability)` triples.
    pub fn entries(&self) -> &[(Vec<usize>, bool, f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    pub fn accept_probability(&self) -> f64 {
        self.entries.iter().filter(|e| e.1).map(|e| e.2).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ProtocolOutcome {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.entries.len() - 1);
        let (outcomes, accepted, _) = &self.entries[i];
        ProtocolOutcome { test: self.test.clone(), outcomes: outcomes.clone(), accepted: *accepted }
    }
}

fn check_dims(rho: &DensityMatrix, target: &Ket) -> Result<()> {
    if rho.dims() != target.dims() {
        return Err(Error::DimensionMismatch(format!("state on {:?}, target on {:?}", rho.dims(), target.dims())));
    }
    Ok(())
}

/// `tr(rho proj)` clamped to `[0, 1]`.
pub fn pass_probability(rho: &DensityMatrix, proj: &Operator) -> Result<f64> {
    Ok(rho.expectation(proj)?.clamp(0.0, 1.0))
}

/// `tr(rho P) + tr(rho Q) - 1`, never above `tr(rho psi)`.
pub fn fidelity_lower_bound(rho: &DensityMatrix, stab: &BipartiteStabilizer) -> Result<f64> {
    check_dims(rho, stab.target())?;
    Ok(rho.expectation(stab.p())? + rho.expectation(stab.q())? - 1.0)
}

/// `(x^dagger (x) 1) sigma (x (x) 1)` for a vector `x` on the first factor.
fn condition(sigma: &DMatrix<C64>, x: &Ket) -> DMatrix<C64> {
    let d = x.dim();
    let r = sigma.nrows() / d;
    let mut y = DMatrix::zeros(r, d * r);
    for (a, xa) in x.amplitudes().iter().enumerate() {
        for i in 0..r {
            y[(i, a * r + i)] = xa.conj();
        }
    }
    &y * sigma * y.adjoint()
}

fn expect(sigma: &DMatrix<C64>, x: &Ket) -> f64 {
    x.amplitudes().dotc(&(sigma * x.amplitudes())).re
}

/// Exact outcome distribution of the coincidence test.
pub fn p_test_distribution(rho: &DensityMatrix, stab: &BipartiteStabilizer) -> Result<OutcomeDistribution> {
    check_dims(rho, stab.target())?;
    let s = stab.schmidt();
    let mut entries = Vec::with_capacity(s.dim_a() * s.dim_b());
    for (ja, a) in s.basis_a().iter().enumerate() {
        let sigma = condition(rho.matrix(), a);
        for (jb, b) in s.basis_b().iter().enumerate() {
            entries.push((vec![ja, jb], ja == jb, expect(&sigma, b)));
        }
    }
    Ok(OutcomeDistribution::new(TestKind::P, entries))
}

/// Exact outcome distribution of the conjugate-basis test; with `rescaled`
/// Bob's effects are `c |psi_alpha><psi_alpha|`.
pub fn q_test_distribution(
    rho: &DensityMatrix,
    stab: &BipartiteStabilizer,
    rescaled: bool,
) -> Result<OutcomeDistribution> {
    check_dims(rho, stab.target())?;
    let c = if rescaled { rescale_bob_effects(stab.psi_alpha())?.0 } else { 1.0 };
    let mut entries = Vec::with_capacity(2 * stab.alice_conjugate().len());
    for (alpha, (x, psi)) in stab.alice_conjugate().iter().zip(stab.psi_alpha()).enumerate() {
        let sigma = condition(rho.matrix(), x);
        let marginal = sigma.trace().re;
        let accept = c * expect(&sigma, psi);
        entries.push((vec![alpha, 1], true, accept));
        entries.push((vec![alpha, 0], false, marginal - accept));
    }
    Ok(OutcomeDistribution::new(TestKind::Q, entries))
}

fn cascade(
    node: &Node,
    word: &[bool],
    sigma: &DMatrix<C64>,
    prefix: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, bool, f64)>,
) {
    let Some((&bit, rest)) = word.split_first() else {
        let accept = expect(sigma, &node.state);
        let total = sigma.trace().re;
        prefix.push(1);
        out.push((prefix.clone(), true, accept));
        prefix.pop();
        prefix.push(0);
        out.push((prefix.clone(), false, total - accept));
        prefix.pop();
        return;
    };
    let (local, children) = node.branch(bit);
    for (m, x) in local.iter().enumerate() {
        let next = condition(sigma, x);
        prefix.push(m);
        match children.get(m) {
            Some(child) => cascade(child, rest, &next, prefix, out),
            None => out.push((prefix.clone(), false, next.trace().re)),
        }
        prefix.pop();
    }
}

/// Exact outcome distribution of the sequential test for the leaf `word`.
pub fn leaf_test_distribution(
    rho: &DensityMatrix,
    fam: &StabilizerFamily,
    word: &BinaryWord,
) -> Result<OutcomeDistribution> {
    check_dims(rho, fam.target())?;
    if word.len() + 1 != fam.parties() {
        return Err(Error::InvalidParameters(format!("leaf words have length {}, got '{word}'", fam.parties() - 1)));
    }
    let chain = rho.permute(fam.order())?;
    let mut entries = Vec::new();
    cascade(fam.root(), word.bits(), chain.matrix(), &mut Vec::new(), &mut entries);
    Ok(OutcomeDistribution::new(TestKind::Leaf(word.clone()), entries))
}

pub fn simulate_p_test<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    stab: &BipartiteStabilizer,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    Ok(p_test_distribution(rho, stab)?.sample(rng))
}

pub fn simulate_q_test<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    stab: &BipartiteStabilizer,
    rng: &mut R,
    rescaled: bool,
) -> Result<ProtocolOutcome> {
    Ok(q_test_distribution(rho, stab, rescaled)?.sample(rng))
}

pub fn simulate_leaf_test<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    fam: &StabilizerFamily,
    word: &BinaryWord,
    rng: &mut R,
) -> Result<ProtocolOutcome> {
    Ok(leaf_test_distribution(rho, fam, word)?.sample(rng))
}

/// A set of projector tests whose pass probabilities bound the fidelity
/// through `sum_i tr(rho P_i) - (T - 1)`.
pub trait CertificationTests {
    fn target(&self) -> &Ket;
    fn test_count(&self) -> usize;
    fn test_kind(&self, i: usize) -> TestKind;
    fn projector(&self, i: usize) -> &Operator;
    fn distribution(&self, rho: &DensityMatrix, i: usize) -> Result<OutcomeDistribution>;
}

impl CertificationTests for BipartiteStabilizer {
    fn target(&self) -> &Ket {
        BipartiteStabilizer::target(self)
    }

    fn test_count(&self) -> usize {
        2
    }

    fn test_kind(&self, i: usize) -> TestKind {
        if i == 0 {
            TestKind::P
        } else {
            TestKind::Q
        }
    }

    fn projector(&self, i: usize) -> &Operator {
        if i == 0 {
            self.p()
        } else {
            self.q()
        }
    }

    fn distribution(&self, rho: &DensityMatrix, i: usize) -> Result<OutcomeDistribution> {
        if i == 0 {
            p_test_distribution(rho, self)
        } else {
            q_test_distribution(rho, self, false)
        }
    }
}

impl CertificationTests for StabilizerFamily {
    fn target(&self) -> &Ket {
        StabilizerFamily::target(self)
    }

    fn test_count(&self) -> usize {
        self.leaves().len()
    }

    fn test_kind(&self, i: usize) -> TestKind {
        TestKind::Leaf(self.leaves().keys().nth(i).expect("test index in range").clone())
    }

    fn projector(&self, i: usize) -> &Operator {
        self.leaves().values().nth(i).expect("test index in range")
    }

    fn distribution(&self, rho: &DensityMatrix, i: usize) -> Result<OutcomeDistribution> {
        let word = self.leaves().keys().nth(i).expect("test index in range");
        leaf_test_distribution(rho, self, word)
    }
}

/// `ceil(ln(2 T / delta) / (2 epsilon^2))`: with this many samples per test,
/// all `T` empirical rates are within `epsilon` of their means except with
/// probability at most `delta`.
pub fn hoeffding_samples(epsilon: f64, delta: f64, tests: usize) -> Result<u64> {
    check_confidence(epsilon, delta)?;
    if tests == 0 {
        return Err(Error::InvalidParameters("at least one test is required".into()));
    }
    Ok(((2.0 * tests as f64 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

pub(crate) fn check_confidence(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameters(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameters(format!("delta must lie in (0,1), got {delta}")));
    }
    Ok(())
}

/// Independent substream `index` of the generator seeded by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestEstimate {
    pub label: String,
    pub exact: f64,
    pub accepted: u64,
    pub pass_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub tests: Vec<TestEstimate>,
    pub samples_per_test: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// `sum rate - (T - 1)`.
    pub fidelity_lower_bound: f64,
    /// `sum rate - (T - 1) - T epsilon`.
    pub confidence_adjusted_bound: f64,
    /// The bound with exact pass probabilities in place of the rates.
    pub exact_bound: f64,
    /// `tr(rho psi)`.
    pub fidelity_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Samples per test; must not be below the Hoeffding count.
    pub samples: Option<u64>,
}

/// Samples every test and turns the rates into a certificate.
pub fn certify<T: CertificationTests + ?Sized>(
    rho: &DensityMatrix,
    tests: &T,
    opts: &CertifyOptions,
) -> Result<EstimateReport> {
    let t = tests.test_count();
    let required = hoeffding_samples(opts.epsilon, opts.delta, t)?;
    let n = match opts.samples {
        Some(s) if s < required => {
            return Err(Error::InvalidParameters(format!(
                "{s} samples per test is below the {required} required for epsilon={}, delta={}",
                opts.epsilon, opts.delta
            )))
        }
        Some(s) => s,
        None => required,
    };
    let fidelity_squared = rho.fidelity_squared(tests.target())?;
    let mut estimates = Vec::with_capacity(t);
    for i in 0..t {
        let dist = tests.distribution(rho, i)?;
        let mut rng = substream(opts.seed, i as u64);
        let accepted = (0..n).filter(|_| dist.sample(&mut rng).accepted).count() as u64;
        estimates.push(TestEstimate {
            label: tests.test_kind(i).label(),
            exact: pass_probability(rho, tests.projector(i))?,
            accepted,
            pass_rate: accepted as f64 / n as f64,
        });
    }
    let slack = t as f64 - 1.0;
    let plug_in = estimates.iter().map(|e| e.pass_rate).sum::<f64>() - slack;
    let exact_bound = estimates.iter().map(|e| e.exact).sum::<f64>() - slack;
    Ok(EstimateReport {
        tests: estimates,
        samples_per_test: n,
        epsilon: opts.epsilon,
        delta: opts.delta,
        fidelity_lower_bound: plug_in,
        confidence_adjusted_bound: plug_in - t as f64 * opts.epsilon,
        exact_bound,
        fidelity_squared,
    })
}

/// Largest gap between an exactly enumerated accept probability and `tr(rho P_i)`.
pub fn simulation_residual<T: CertificationTests + ?Sized>(rho: &DensityMatrix, tests: &T) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..tests.test_count() {
        let dist = tests.distribution(rho, i)?;
        let exact = rho.expectation(tests.projector(i))?;
        worst = worst.max((dist.accept_probability() - exact).abs()).max((dist.total() - 1.0).abs());
    }
    Ok(worst)
}

/// Whether `bound <= fidelity + TOL_STAB`.
pub fn is_sound(bound: f64, fidelity_squared: f64) -> bool {
    bound <= fidelity_squared + tol::STAB
}
