//! Kraus channels and lower bounds on their entanglement fidelity.
//!
//! For a channel `T` on B and the target `|psi>`, the pass probabilities of
//! `P` and `Q` on `(id (x) T)(psi)` are ensemble fidelities,
//!
//! ```text
//! tr(rho P) = sum_j     l_j   F(|b_j>; T)^2
//! tr(rho Q) = sum_alpha 1/d_A F(|psi_alpha>; T)^2
//! ```
//!
//! so their sum minus one bounds `F(|psi>; T)^2` from below, and each term
//! can be estimated by sending single pure probe states through `T`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;

use crate::certify::{check_confidence, hoeffding_samples, substream};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Ket, Operator, C64};
use crate::stabilizer::BipartiteStabilizer;
use crate::tol;

/// A CPTP map `X -> sum_k K_k X K_k^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<DMatrix<C64>>,
    dim_in: usize,
    dim_out: usize,
}

impl KrausChannel {
    /// Requires `||sum_k K_k^dagger K_k - 1||_F <= TOL_CPTP`.
    pub fn new(kraus: Vec<DMatrix<C64>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameters("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidDims("empty Kraus operator".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operators of shapes {:?} and {:?}",
                (dim_out, dim_in),
                k.shape()
            )));
        }
        let sum = kraus.iter().fold(DMatrix::zeros(dim_in, dim_in), |acc, k| acc + k.adjoint() * k);
        let residual = (sum - DMatrix::identity(dim_in, dim_in)).norm();
        if residual.is_nan() || residual > tol::CPTP {
            return Err(Error::NotCptp { residual });
        }
        Ok(Self { kraus, dim_in, dim_out })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![DMatrix::identity(d, d)], dim_in: d, dim_out: d }
    }

    pub fn kraus(&self) -> &[DMatrix<C64>] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// `T(x)` for a matrix on the input space.
    pub fn apply_matrix(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        self.kraus.iter().fold(DMatrix::zeros(self.dim_out, self.dim_out), |acc, k| acc + k * x * k.adjoint())
    }

    /// The dual map `T*(y) = sum_k K_k^dagger y K_k`.
    pub fn dual_matrix(&self, y: &DMatrix<C64>) -> DMatrix<C64> {
        self.kraus.iter().fold(DMatrix::zeros(self.dim_in, self.dim_in), |acc, k| acc + k.adjoint() * y * k)
    }

    fn require_square(&self) -> Result<()> {
        if self.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "fidelity needs matching input and output, channel maps {} to {}",
                self.dim_in, self.dim_out
            )));
        }
        Ok(())
    }
}

/// Applies `chan` to the contiguous factors `start..end` of `rho`.
pub fn apply_channel_to_factors(
    chan: &KrausChannel,
    rho: &DensityMatrix,
    start: usize,
    end: usize,
) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if start >= end || end > dims.len() {
        return Err(Error::InvalidParameters(format!(
            "factor range {start}..{end} invalid for {} factors",
            dims.len()
        )));
    }
    let before: usize = dims[..start].iter().product();
    let target: usize = dims[start..end].iter().product();
    let after: usize = dims[end..].iter().product();
    if target != chan.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "channel input {} does not match factors {start}..{end} of {dims:?}",
            chan.dim_in
        )));
    }
    let id_before = DMatrix::<C64>::identity(before, before);
    let id_after = DMatrix::<C64>::identity(after, after);
    let n_out = before * chan.dim_out * after;
    let mut out = DMatrix::zeros(n_out, n_out);
    for k in &chan.kraus {
        let lifted = id_before.kronecker(k).kronecker(&id_after);
        out += &lifted * rho.matrix() * lifted.adjoint();
    }
    let mut out_dims = dims[..start].to_vec();
    if end - start == 1 || chan.dim_in != chan.dim_out {
        out_dims.push(chan.dim_out);
    } else {
        out_dims.extend_from_slice(&dims[start..end]);
    }
    out_dims.extend_from_slice(&dims[end..]);
    let op = Operator::new(out, out_dims)?;
    DensityMatrix::new(op)
}

/// `sum_k (1 (x) K_k) rho (1 (x) K_k)^dagger` with `K_k` on one factor.
pub fn apply_channel(chan: &KrausChannel, rho: &DensityMatrix, on_factor: usize) -> Result<DensityMatrix> {
    apply_channel_to_factors(chan, rho, on_factor, on_factor + 1)
}

/// `<phi| T(|phi><phi|) |phi> = sum_k |<phi|K_k|phi>|^2`.
pub fn state_fidelity_through(chan: &KrausChannel, phi: &Ket) -> Result<f64> {
    chan.require_square()?;
    if phi.dim() != chan.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "probe of dimension {} for a channel on dimension {}",
            phi.dim(),
            chan.dim_in
        )));
    }
    let v = phi.amplitudes();
    Ok(chan.kraus.iter().map(|k| v.dotc(&(k * v)).norm_sqr()).sum())
}

/// `<psi| (id (x) T)(|psi><psi|) |psi>` with `T` acting on the factors from `cut` on.
pub fn entanglement_fidelity(chan: &KrausChannel, psi: &Ket, cut: usize) -> Result<f64> {
    chan.require_square()?;
    let dims = psi.dims();
    if cut == 0 || cut >= dims.len() {
        return Err(Error::InvalidCut { cut, parties: dims.len() });
    }
    let db: usize = dims[cut..].iter().product();
    if db != chan.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "channel on dimension {} for a B side of dimension {db}",
            chan.dim_in
        )));
    }
    let da = psi.dim() / db;
    // <psi|(1 (x) K)|psi> = sum_a <row_a| K |row_a> with psi reshaped to da x db.
    let m = DMatrix::from_fn(da, db, |a, b| psi.amplitudes()[a * db + b]);
    Ok(chan
        .kraus
        .iter()
        .map(|k| {
            let mk = &m * k.transpose();
            m.iter().zip(mk.iter()).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledEstimate {
    pub samples_per_term: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub mean_schmidt: f64,
    pub mean_conj: f64,
    /// `mean_schmidt + mean_conj - 2 epsilon - 1`.
    pub adjusted_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBoundReport {
    /// `F(|psi>; T)^2`.
    pub ent_fidelity_sq: f64,
    /// `sum_j l_j F(|b_j>; T)^2`.
    pub ensemble_term_schmidt: f64,
    /// `sum_alpha F(|psi_alpha>; T)^2 / d_A`.
    pub ensemble_term_conj: f64,
    /// `ensemble_term_schmidt + ensemble_term_conj - 1`.
    pub bound: f64,
    /// `|tr(rho P) - ensemble_term_schmidt|` with `rho = (id (x) T)(psi)`.
    pub identity_residual_p: f64,
    /// `|tr(rho Q) - ensemble_term_conj|`.
    pub identity_residual_q: f64,
    pub sampled: Option<SampledEstimate>,
}

impl ChannelBoundReport {
    pub fn passed(&self) -> bool {
        self.bound <= self.ent_fidelity_sq + tol::STAB
            && self.identity_residual_p <= tol::STAB
            && self.identity_residual_q <= tol::STAB
    }
}

fn schmidt_probes(stab: &BipartiteStabilizer) -> (Vec<f64>, Vec<&Ket>) {
    let s = stab.schmidt();
    (s.coefficients()[..s.pairs()].to_vec(), s.basis_b()[..s.pairs()].iter().collect())
}

/// Both ensemble terms by direct summation over the probe states, plus the
/// exact entanglement fidelity and the cross-check against `tr(rho P)` and
/// `tr(rho Q)` on the channel output.
pub fn channel_bound_exact(chan: &KrausChannel, stab: &BipartiteStabilizer) -> Result<ChannelBoundReport> {
    let target = stab.target();
    let cut = stab.cut();
    let ent = entanglement_fidelity(chan, target, cut)?;

    let (weights, probes) = schmidt_probes(stab);
    let mut term_p = 0.0;
    for (w, b) in weights.iter().zip(probes) {
        term_p += w * state_fidelity_through(chan, b)?;
    }
    let da = stab.dim_a() as f64;
    let mut term_q = 0.0;
    for psi in stab.psi_alpha() {
        term_q += state_fidelity_through(chan, psi)? / da;
    }

    let rho = apply_channel_to_factors(chan, &DensityMatrix::pure(target), cut, target.parties())?;
    let tr_p = rho.expectation(stab.p())?;
    let tr_q = rho.expectation(stab.q())?;

    Ok(ChannelBoundReport {
        ent_fidelity_sq: ent,
        ensemble_term_schmidt: term_p,
        ensemble_term_conj: term_q,
        bound: term_p + term_q - 1.0,
        identity_residual_p: (tr_p - term_p).abs(),
        identity_residual_q: (tr_q - term_q).abs(),
        sampled: None,
    })
}

/// Estimates both ensemble terms from `n` probe states each, `j ~ l` and
/// `alpha` uniform, with a coin of bias `F(probe; T)^2` per probe.
/// `n = ceil(ln(4/delta) / (2 epsilon^2))` does not depend on the dimension.
pub fn channel_bound_sampled(
    chan: &KrausChannel,
    stab: &BipartiteStabilizer,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<ChannelBoundReport> {
    check_confidence(epsilon, delta)?;
    let n = hoeffding_samples(epsilon, delta, 2)?;
    let mut report = channel_bound_exact(chan, stab)?;

    let (weights, probes) = schmidt_probes(stab);
    let fid_p = probes.iter().map(|b| state_fidelity_through(chan, b)).collect::<Result<Vec<_>>>()?;
    let fid_q = stab.psi_alpha().iter().map(|p| state_fidelity_through(chan, p)).collect::<Result<Vec<_>>>()?;

    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut rng = substream(seed, 0);
    let mut hits_p = 0u64;
    for _ in 0..n {
        let u = rng.random::<f64>() * acc;
        let j = cumulative.partition_point(|&c| c <= u).min(weights.len() - 1);
        if rng.random::<f64>() < fid_p[j] {
            hits_p += 1;
        }
    }
    let mut rng = substream(seed, 1);
    let mut hits_q = 0u64;
    for _ in 0..n {
        let alpha = rng.random_range(0..fid_q.len());
        if rng.random::<f64>() < fid_q[alpha] {
            hits_q += 1;
        }
    }
    let mean_schmidt = hits_p as f64 / n as f64;
    let mean_conj = hits_q as f64 / n as f64;
    report.sampled = Some(SampledEstimate {
        samples_per_term: n,
        epsilon,
        delta,
        mean_schmidt,
        mean_conj,
        adjusted_bound: mean_schmidt + mean_conj - 2.0 * epsilon - 1.0,
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Identity,
    Depolarizing,
    Dephasing,
    AmplitudeDamping,
    BitFlip,
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Identity => "identity",
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::AmplitudeDamping => "amplitude-damping",
            NoiseKind::BitFlip => "bit-flip",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(NoiseKind::Identity),
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            "dephasing" => Ok(NoiseKind::Dephasing),
            "amplitude-damping" => Ok(NoiseKind::AmplitudeDamping),
            "bit-flip" => Ok(NoiseKind::BitFlip),
            other => Err(Error::InvalidParameters(format!("unknown noise model '{other}'"))),
        }
    }
}

/// Cyclic shift `|k> -> |k+1 mod d>`.
fn shift(d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

fn clock(d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / d as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Standard Kraus sets; zero-weight operators are dropped.
///
/// - depolarizing: `(1-p) X + p tr(X) 1/d`, via the `d^2` Weyl operators
/// - dephasing: `(1-p) X + p diag(X)`
/// - amplitude-damping (`d = 2`): `|1>` decays to `|0>` with probability `p`
/// - bit-flip: the cyclic shift applied with probability `p`
pub fn builtin_noise(kind: NoiseKind, d: usize, p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameters(format!("noise strength {p} not in [0,1]")));
    }
    if d < 2 {
        return Err(Error::UnsupportedDimension(format!("{kind} needs d >= 2, got {d}")));
    }
    let id = DMatrix::<C64>::identity(d, d);
    let scaled = |m: &DMatrix<C64>, w: f64| m * C64::from(w.sqrt());
    let mut kraus = Vec::new();
    match kind {
        NoiseKind::Identity => kraus.push(id),
        NoiseKind::Depolarizing => {
            let dd = (d * d) as f64;
            kraus.push(scaled(&id, 1.0 - p + p / dd));
            if p > 0.0 {
                let (x, z) = (shift(d), clock(d));
                let mut xa = id.clone();
                for a in 0..d {
                    let mut w = xa.clone();
                    for b in 0..d {
                        if a + b > 0 {
                            kraus.push(scaled(&w, p / dd));
                        }
                        w = &w * &z;
                    }
                    xa = &xa * &x;
                }
            }
        }
        NoiseKind::Dephasing => {
            kraus.push(scaled(&id, 1.0 - p));
            if p > 0.0 {
                for k in 0..d {
                    let mut m = DMatrix::zeros(d, d);
                    m[(k, k)] = C64::new(p.sqrt(), 0.0);
                    kraus.push(m);
                }
            }
        }
        NoiseKind::AmplitudeDamping => {
            if d != 2 {
                return Err(Error::UnsupportedDimension(format!("amplitude-damping is defined for d = 2, got {d}")));
            }
            let z = C64::new(0.0, 0.0);
            kraus.push(DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), z, z, C64::new((1.0 - p).sqrt(), 0.0)]));
            if p > 0.0 {
                kraus.push(DMatrix::from_row_slice(2, 2, &[z, C64::new(p.sqrt(), 0.0), z, z]));
            }
        }
        NoiseKind::BitFlip => {
            kraus.push(scaled(&id, 1.0 - p));
            if p > 0.0 {
                kraus.push(scaled(&shift(d), p));
            }
        }
    }
    kraus.retain(|k| k.norm() > 0.0);
    KrausChannel::new(kraus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_ket, random_kraus};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> Ket {
        Ket::normalized(vec![c(1.0), c(0.0), c(0.0), c(1.0)], vec![2, 2]).unwrap()
    }

    fn max_entangled(d: usize) -> Ket {
        let v = (0..d * d).map(|i| if i % (d + 1) == 0 { c(1.0) } else { c(0.0) }).collect();
        Ket::normalized(v, vec![d, d]).unwrap()
    }

    #[test]
    fn rejects_non_cptp() {
        let half = DMatrix::identity(2, 2) * c(0.5);
        assert!(matches!(KrausChannel::new(vec![half]), Err(Error::NotCptp { .. })));
        let bad_shape = vec![DMatrix::identity(2, 2), DMatrix::identity(3, 3)];
        assert!(matches!(KrausChannel::new(bad_shape), Err(Error::DimensionMismatch(_))));
        assert!(KrausChannel::new(vec![]).is_err());
    }

    #[test]
    fn identity_channel_leaves_states_alone() {
        let rho = DensityMatrix::pure(&bell());
        let out = apply_channel(&KrausChannel::identity(2), &rho, 1).unwrap();
        assert!(out.operator().distance(rho.operator()) < 1e-15);
        let phi = Ket::normalized(vec![c(0.3), C64::new(0.1, 0.4)], vec![2]).unwrap();
        assert!((state_fidelity_through(&KrausChannel::identity(2), &phi).unwrap() - 1.0).abs() < 1e-12);
        assert!((entanglement_fidelity(&KrausChannel::identity(2), &bell(), 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_depolarization_of_half_a_bell_pair() {
        let chan = builtin_noise(NoiseKind::Depolarizing, 2, 1.0).unwrap();
        let out = apply_channel(&chan, &DensityMatrix::pure(&bell()), 1).unwrap();
        assert!(out.operator().distance(DensityMatrix::maximally_mixed(&[2, 2]).operator()) < 1e-12);
    }

    #[test]
    fn dephasing_on_bell() {
        let p = 0.3;
        let chan = builtin_noise(NoiseKind::Dephasing, 2, p).unwrap();
        let psi = DensityMatrix::pure(&bell());
        let out = apply_channel(&chan, &psi, 1).unwrap();
        let z1 = Operator::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(1.0), c(-1.0), c(-1.0)])),
            vec![2, 2],
        )
        .unwrap();
        let flipped = &(&z1 * psi.operator()) * &z1;
        let expected = &psi.operator().scale(1.0 - p / 2.0) + &flipped.scale(p / 2.0);
        assert!(out.operator().distance(&expected) < 1e-12);
        assert!((out.operator().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_fidelity_examples() {
        let p = 0.3;
        let chan = builtin_noise(NoiseKind::Depolarizing, 2, p).unwrap();
        let phi = Ket::normalized(vec![c(0.6), C64::new(0.0, 0.8)], vec![2]).unwrap();
        assert!((state_fidelity_through(&chan, &phi).unwrap() - (1.0 - p + p / 2.0)).abs() < 1e-12);
        let flip = builtin_noise(NoiseKind::BitFlip, 2, 1.0).unwrap();
        assert!(state_fidelity_through(&flip, &Ket::basis(vec![2], 0).unwrap()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn depolarizing_entanglement_fidelity() {
        for d in 2..=4 {
            let p = 0.37;
            let chan = builtin_noise(NoiseKind::Depolarizing, d, p).unwrap();
            let f = entanglement_fidelity(&chan, &max_entangled(d), 1).unwrap();
            assert!((f - (1.0 - p + p / (d * d) as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_bound_on_bell() {
        let stab = BipartiteStabilizer::new(&bell(), 1).unwrap();
        let r = channel_bound_exact(&KrausChannel::identity(2), &stab).unwrap();
        assert!((r.bound - 1.0).abs() < 1e-12 && (r.ent_fidelity_sq - 1.0).abs() < 1e-12);

        let chan = builtin_noise(NoiseKind::Depolarizing, 2, 0.1).unwrap();
        let r = channel_bound_exact(&chan, &stab).unwrap();
        assert!((r.ensemble_term_schmidt - 0.95).abs() < 1e-12);
        assert!((r.ensemble_term_conj - 0.95).abs() < 1e-12);
        assert!((r.bound - 0.9).abs() < 1e-12);
        assert!((r.ent_fidelity_sq - 0.925).abs() < 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn channel_bound_on_random_channels() {
        let mut rng = substream(17, 0);
        for _ in 0..20 {
            let psi = random_ket(&[3, 3], &mut rng);
            let stab = BipartiteStabilizer::new(&psi, 1).unwrap();
            let chan = KrausChannel::new(random_kraus(3, 4, &mut rng)).unwrap();
            let r = channel_bound_exact(&chan, &stab).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn sampled_identity() {
        let stab = BipartiteStabilizer::new(&bell(), 1).unwrap();
        let r = channel_bound_sampled(&KrausChannel::identity(2), &stab, 0.05, 0.01, 3).unwrap();
        let s = r.sampled.unwrap();
        assert_eq!(s.samples_per_term, 1199);
        assert_eq!((s.mean_schmidt, s.mean_conj), (1.0, 1.0));
        assert!((s.adjusted_bound - 0.9).abs() < 1e-12);
        assert!(channel_bound_sampled(&KrausChannel::identity(2), &stab, 0.05, 0.0, 3).is_err());
    }

    #[test]
    fn builtin_sets() {
        let d0 = builtin_noise(NoiseKind::Depolarizing, 3, 0.0).unwrap();
        assert_eq!(d0, KrausChannel::identity(3));
        assert_eq!(builtin_noise(NoiseKind::Depolarizing, 3, 0.5).unwrap().kraus().len(), 9);

        let deph = builtin_noise(NoiseKind::Dephasing, 2, 1.0).unwrap();
        let plus = Ket::normalized(vec![c(1.0), c(1.0)], vec![2]).unwrap();
        let out = deph.apply_matrix(&plus.projector().into_matrix());
        assert!(out[(0, 1)].norm() < 1e-15 && out[(1, 0)].norm() < 1e-15);

        let ad = builtin_noise(NoiseKind::AmplitudeDamping, 2, 1.0).unwrap();
        let out = ad.apply_matrix(&Ket::basis(vec![2], 1).unwrap().projector().into_matrix());
        assert!((out[(0, 0)] - c(1.0)).norm() < 1e-15 && out[(1, 1)].norm() < 1e-15);

        assert!(matches!(builtin_noise(NoiseKind::AmplitudeDamping, 3, 0.1), Err(Error::UnsupportedDimension(_))));
        assert!(builtin_noise(NoiseKind::BitFlip, 2, 1.5).is_err());
        assert_eq!("bit-flip".parse::<NoiseKind>().unwrap(), NoiseKind::BitFlip);
        assert!("nope".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn dual_map_is_adjoint() {
        let mut rng = substream(23, 0);
        let chan = KrausChannel::new(random_kraus(3, 2, &mut rng)).unwrap();
        let x = DMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64));
        let y = DMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, 1.0));
        let lhs = (y.adjoint() * chan.apply_matrix(&x)).trace();
        let rhs = (chan.dual_matrix(&y).adjoint() * x).trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
