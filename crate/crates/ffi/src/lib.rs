//! C ABI over the `sepstab` library.
//!
//! Objects are opaque heap handles created by `sepstab_*_new`-style calls and
//! released with the matching `sepstab_*_free`. Every fallible call returns a
//! [`SepstabStatus`]; on failure a message is kept per thread and can be read
//! with [`sepstab_last_error`].
//!
//! Complex data crosses the boundary as interleaved `re, im` doubles.
//! Matrices are row-major. Buffer-filling calls take a capacity and always
//! write the required length, returning `SEPSTAB_STATUS_BUFFER_TOO_SMALL`
//! when the capacity is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sepstab::certify::{certify, fidelity_lower_bound, hoeffding_samples, CertifyOptions, EstimateReport};
use sepstab::channels::{
    apply_channel, builtin_noise, channel_bound_exact, channel_bound_sampled, ChannelBoundReport, KrausChannel,
    NoiseKind,
};
use sepstab::linalg::{DensityMatrix, Ket, Operator, C64};
use sepstab::multipartite::{
    build_family, fidelity_bound_multipartite, measurement_count, verify_family, FamilyOptions, StabilizerFamily,
    DEFAULT_DIM_CAP,
};
use sepstab::random::random_ket;
use sepstab::stabilizer::{custom_conjugate_basis, inequality_gap, verify_stabilizer, BipartiteStabilizer};
use sepstab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepstabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BufferTooSmall = 3,
    Panic = 4,
    NonUnitNorm = 10,
    InvalidDims = 11,
    DimensionMismatch = 12,
    NotHermitian = 13,
    NotDensityMatrix = 14,
    NotUnbiasedBasis = 15,
    NotCptp = 16,
    InvalidParameters = 17,
    UnsupportedDimension = 18,
    DimensionCap = 19,
    InvalidOrder = 20,
    InvalidCut = 21,
    ParseError = 22,
    ValidationError = 23,
    IoError = 24,
}

impl From<&Error> for SepstabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonUnitNorm { .. } => Self::NonUnitNorm,
            Error::InvalidDims(_) => Self::InvalidDims,
            Error::DimensionMismatch(_) => Self::DimensionMismatch,
            Error::NotHermitian { .. } => Self::NotHermitian,
            Error::NotDensityMatrix(_) => Self::NotDensityMatrix,
            Error::NotUnbiasedBasis { .. } => Self::NotUnbiasedBasis,
            Error::NotCptp { .. } => Self::NotCptp,
            Error::InvalidParameters(_) => Self::InvalidParameters,
            Error::UnsupportedDimension(_) => Self::UnsupportedDimension,
            Error::DimensionCap { .. } => Self::DimensionCap,
            Error::InvalidOrder(_) => Self::InvalidOrder,
            Error::InvalidCut { .. } => Self::InvalidCut,
            Error::Parse(_) => Self::ParseError,
            Error::Validation(_) => Self::ValidationError,
            Error::Io(_) => Self::IoError,
        }
    }
}

/// Which projector of a bipartite pair to read.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepstabProjector {
    P = 0,
    Q = 1,
}

pub struct SepstabKet(Ket);
pub struct SepstabDensity(DensityMatrix);
pub struct SepstabStabilizer(BipartiteStabilizer);
pub struct SepstabFamily(StabilizerFamily);
pub struct SepstabChannel(KrausChannel);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SepstabResiduals {
    pub p_psi: f64,
    pub q_psi: f64,
    pub pq_minus_psi: f64,
    pub qp_minus_psi: f64,
    pub commutator: f64,
    pub pqp_minus_psi: f64,
    pub idempotence: f64,
    /// Smallest eigenvalue of `(1 - P) + (1 - Q) - (1 - psi)`.
    pub inequality_min_eigenvalue: f64,
    pub passed: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SepstabFamilyReport {
    pub product: f64,
    pub sibling_commutator: f64,
    pub split: f64,
    pub inequality_min_eigenvalue: f64,
    pub separability: f64,
    pub projector: f64,
    pub passed: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SepstabCertifyOptions {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Samples per test; 0 selects the Hoeffding count.
    pub samples: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SepstabCertificate {
    pub tests: usize,
    pub samples_per_test: u64,
    pub plug_in_bound: f64,
    pub confidence_adjusted_bound: f64,
    pub exact_bound: f64,
    pub fidelity_squared: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SepstabChannelBound {
    pub ent_fidelity_sq: f64,
    pub ensemble_term_schmidt: f64,
    pub ensemble_term_conj: f64,
    pub bound: f64,
    pub identity_residual_p: f64,
    pub identity_residual_q: f64,
    /// The remaining fields are set only by the sampled variant.
    pub has_sampled: bool,
    pub samples_per_term: u64,
    pub mean_schmidt: f64,
    pub mean_conj: f64,
    pub adjusted_bound: f64,
    pub passed: bool,
}

struct Failure(SepstabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SepstabStatus::from(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> SepstabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SepstabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            SepstabStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SepstabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output handle pointer"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn fill<T: Copy>(data: &[T], out: *mut T, cap: usize, len: *mut usize) -> FfiResult<()> {
    if !len.is_null() {
        len.write(data.len());
    }
    if cap < data.len() {
        return Err(Failure(
            SepstabStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} required", data.len()),
        ));
    }
    if !data.is_empty() {
        if out.is_null() {
            return Err(null("output buffer"));
        }
        std::ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
    }
    Ok(())
}

fn complex_vec(interleaved: &[f64]) -> FfiResult<Vec<C64>> {
    if !interleaved.len().is_multiple_of(2) {
        return Err(Failure(SepstabStatus::InvalidDims, "interleaved complex data has odd length".into()));
    }
    Ok(interleaved.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
}

fn interleave(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)].re);
            v.push(m[(r, c)].im);
        }
    }
    v
}

fn square(values: Vec<C64>, rows: usize, cols: usize) -> FfiResult<DMatrix<C64>> {
    if values.len() != rows * cols {
        return Err(Failure(
            SepstabStatus::InvalidDims,
            format!("{} complex entries do not fill a {rows}x{cols} matrix", values.len()),
        ));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sepstab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sepstab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Hoeffding sample count per test for `tests` tests.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sepstab_hoeffding_samples(
    epsilon: f64,
    delta: f64,
    tests: usize,
    out: *mut u64,
) -> SepstabStatus {
    guard(|| write_out(out, hoeffding_samples(epsilon, delta, tests)?))
}

/// Local measurement settings per party for `n` qudits of dimension `d`.
///
/// # Safety
/// `out` must hold `cap` values; `len` may be null.
#[no_mangle]
pub unsafe extern "C" fn sepstab_measurement_count(
    n: usize,
    d: usize,
    out: *mut u64,
    cap: usize,
    len: *mut usize,
) -> SepstabStatus {
    guard(|| fill(&measurement_count(n, d)?, out, cap, len))
}

/// A pure state from `2 * dim` interleaved amplitudes, `dim` being the
/// product of `dims`. With `normalize` the vector is rescaled; otherwise it
/// must already have unit norm.
///
/// # Safety
/// Array arguments must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn sepstab_ket_new(
    amplitudes: *const f64,
    amplitudes_len: usize,
    dims: *const usize,
    n_dims: usize,
    normalize: bool,
    out: *mut *mut SepstabKet,
) -> SepstabStatus {
    guard(|| {
        let amps = complex_vec(slice(amplitudes, amplitudes_len, "amplitudes")?)?;
        let dims = slice(dims, n_dims, "dims")?.to_vec();
        let ket = if normalize { Ket::normalized(amps, dims)? } else { Ket::new(amps, dims)? };
        emit(out, SepstabKet(ket))
    })
}

/// Haar-random pure state from the ChaCha20 generator seeded with `seed`.
///
/// # Safety
/// `dims` must hold `n_dims` values.
#[no_mangle]
pub unsafe extern "C" fn sepstab_ket_random(
    dims: *const usize,
    n_dims: usize,
    seed: u64,
    out: *mut *mut SepstabKet,
) -> SepstabStatus {
    guard(|| {
        let dims = slice(dims, n_dims, "dims")?;
        if dims.is_empty() || dims.contains(&0) {
            return Err(Failure(SepstabStatus::InvalidDims, format!("invalid dims {dims:?}")));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        emit(out, SepstabKet(random_ket(dims, &mut rng)))
    })
}

/// # Safety
/// `ket` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn sepstab_ket_dim(ket: *const SepstabKet) -> usize {
    ket.as_ref().map_or(0, |k| k.0.dim())
}

/// Interleaved amplitudes, `2 * dim` doubles.
///
/// # Safety
/// `out` must hold `cap` doubles; `len` may be null.
#[no_mangle]
pub unsafe extern "C" fn sepstab_ket_amplitudes(
    ket: *const SepstabKet,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> SepstabStatus {
    guard(|| {
        let k = &borrow(ket, "ket")?.0;
        let v: Vec<f64> = k.amplitudes().iter().flat_map(|a| [a.re, a.im]).collect();
        fill(&v, out, cap, len)
    })
}

/// # Safety
/// `ket` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepstab_ket_free(ket: *mut SepstabKet) {
    if !ket.is_null() {
        drop(Box::from_raw(ket));
    }
}

/// A density matrix from `2 * dim * dim` interleaved row-major entries.
/// Hermiticity, unit trace and positivity are checked.
///
/// # Safety
/// Array arguments must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn sepstab_density_new(
    matrix: *const f64,
    matrix_len: usize,
    dims: *const usize,
    n_dims: usize,
    out: *mut *mut SepstabDensity,
) -> SepstabStatus {
    guard(|| {
        let dims = slice(dims, n_dims, "dims")?.to_vec();
        let n: usize = dims.iter().product();
        let m = square(complex_vec(slice(matrix, matrix_len, "matrix")?)?, n, n)?;
        let rho = DensityMatrix::new(Operator::new(m, dims)?)?;
        emit(out, SepstabDensity(rho))
    })
}

/// `|psi><psi|`.
///
/// # Safety
/// `ket` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sepstab_density_from_ket(
    ket: *const SepstabKet,
    out: *mut *mut SepstabDensity,
) -> SepstabStatus {
    guard(|| {
        let k = &borrow(ket, "ket")?.0;
        emit(out, SepstabDensity(DensityMatrix::pure(k)))
    })
}

/// `(1 - p) |psi><psi| + p 1/dim`.
///
/// # Safety
/// `ket` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sepstab_density_depolarize(
    ket: *const SepstabKet,
    p: f64,
    out: *mut *mut SepstabDensity,
) -> SepstabStatus {
    guard(|| {
        let k = &borrow(ket, "ket")?.0;
        let rho = DensityMatrix::pure(k).mix(&DensityMatrix::maximally_mixed(k.dims()), p)?;
        emit(out, SepstabDensity(rho))
    })
}

/// The channel applied to one tensor factor of `rho`.
///
/// # Safety
/// Handles must be valid.
#[no_mangle]
pub unsafe extern "C" fn sepstab_density_apply_channel(
    rho: *const SepstabDensity,
    channel: *const SepstabChannel,
    factor: usize,
    out: *mut *mut SepstabDensity,
) -> SepstabStatus {
    guard(|| {
        let rho = &borrow(rho, "rho")?.0;
        let chan = &borrow(channel, "channel")?.0;
        emit(out, SepstabDensity(apply_channel(chan, rho, factor)?))
    })
}

/// `tr(rho |psi><psi|)`.
///
/// # Safety
/// Handles must be valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sepstab_density_fidelity_squared(
    rho: *const SepstabDensity,
    ket: *const SepstabKet,
    out: *mut f64,
) -> SepstabStatus {
    guard(|| {
        let rho = &borrow(rho, "rho")?.0;
        let k = &borrow(ket, "ket")?.0;
        write_out(out, rho.fidelity_squared(k)?)
    })
}

/// # Safety
/// `rho` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepstab_density_free(rho: *mut SepstabDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// The `(P, Q)` pair for the cut after the first `cut` factors, with the
/// Fourier conjugate basis, or with the `d_A x d_A` row-major phase table
/// `phases` when it is non-null.
///
/// # Safety
/// `ket` must be a valid handle; `phases` null or holding `phases_dim^2` values.
#[no_mangle]
pub unsafe extern "C" fn sepstab_stabilizer_new(
    ket: *const SepstabKet,
    cut: usize,
    phases: *const f64,
    phases_dim: usize,
    out: *mut *mut SepstabStabilizer,
) -> SepstabStatus {
    guard(|| {
        let k = &borrow(ket, "ket")?.0;
        let stab = if phases.is_null() {
            BipartiteStabilizer::new(k, cut)?
        } else {
            let flat = slice(phases, phases_dim * phases_dim, "phases")?;
            let rows: Vec<Vec<f64>> = flat.chunks(phases_dim.max(1)).map(<[f64]>::to_vec).collect();
            BipartiteStabilizer::with_basis(k, cut, custom_conjugate_basis(&rows)?)?
        };
        emit(out, SepstabStabilizer(stab))
    })
}

/// Total dimension of the space the projectors act on.
///
/// # Safety
/// `stab` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sepstab_stabilizer_dim(stab: *const SepstabStabilizer) -> usize {
    stab.as_ref().map_or(0, |s| s.0.p().dim())
}

/// `P` or `Q` as `2 * dim * dim` interleaved row-major doubles.
///
/// # Safety
/// `out` must hold `cap` doubles; `len` may be null.
#[no_mangle]
pub unsafe extern "C" fn sepstab_stabilizer_projector(
    stab: *const SepstabStabilizer,
    which: SepstabProjector,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> SepstabStatus {
    guard(|| {
        let s = &borrow(stab, "stabilizer")?.0;
        let op = match which {
            SepstabProjector::P => s.p(),
            SepstabProjector::Q => s.q(),
        };
        fill(&interleave(op.matrix()), out, cap, len)
    })
}

/// Schmidt coefficients `lambda_j` in decreasing order, one per Schmidt pair.
///
/// # Safety
/// `out` must hold `cap` doubles; `len` may be null.
#[no_mangle]
pub unsafe extern "C" fn sepstab_stabilizer_schmidt_coefficients(
    stab: *const SepstabStabilizer,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> SepstabStatus {
    guard(|| fill(borrow(stab, "stabilizer")?.0.schmidt().coefficients(), out, cap, len))
}

/// Identity residuals and the operator-inequality gap.
///
/// # Safety
/// `stab` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sepstab_stabilizer_verify(
    stab: *const SepstabStabilizer,
    out: *mut SepstabResiduals,
) -> SepstabStatus {
    guard(|| {
        let s = &borrow(stab, "stabilizer")?.0;
        let r = verify_stabilizer(s);
        let gap = inequality_gap(s)?;
        write_out(
            out,
            SepstabResiduals {
                p_psi: r.p_psi,
                q_psi: r.q_psi,
                pq_minus_psi: r.pq_minus_psi,
                qp_minus_psi: r.qp_minus_psi,
                commutator: r.commutator,
                pqp_minus_psi: r.pqp_minus_psi,
                idempotence: r.idempotence,
                inequality_min_eigenvalue: gap,
                passed: r.passed() && gap >= -sepstab::tol::PSD,
            },
        )
    })
}

/// `tr(rho P) + tr(rho Q) - 1`.
///
/// # Safety
/// Handles must be valid; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sepstab_stabilizer_fidelity_bound(
    stab: *const SepstabStabilizer,
    rho: *const SepstabDensity,
    out: *mut f64,
) -> SepstabStatus {
    guard(|| {
        let s = &borrow(stab, "stabilizer")?.0;
        let rho = &borrow(rho, "rho")?.0;
        write_out(out, fidelity_lower_bound(rho, s)?)
    })
}

/// # Safety
/// `stab` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepstab_stabilizer_free(stab: *mut SepstabStabilizer) {
    if !stab.is_null() {
        drop(Box::from_raw(stab));
    }
}

/// The `2^(n-1)` leaf projectors along `order`; a null `order` means the
/// natural order. `dim_cap` of 0 selects the default cap.
///
/// # Safety
/// `ket` must be a valid handle; `order` null or holding `n_order` values.
#[no_mangle]
pub unsafe extern "C" fn sepstab_family_new(
    ket: *const SepstabKet,
    order: *const usize,
    n_order: usize,
    dim_cap: usize,
    out: *mut *mut SepstabFamily,
) -> SepstabStatus {
    guard(|| {
        let k = &borrow(ket, "ket")?.0;
        let order = if order.is_null() { (0..k.parties()).collect() } else { slice(order, n_order, "order")?.to_vec() };
        let opts =
            FamilyOptions { dim_cap: if dim_cap == 0 { DEFAULT_DIM_CAP } else { dim_cap }, ..Default::default() };
        emit(out, SepstabFamily(build_family(k, &order, &opts)?))
    })
}

/// # Safety
/// `fam` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sepstab_family_leaf_count(fam: *const SepstabFamily) -> usize {
    fam.as_ref().map_or(0, |f| f.0.leaves().len())
}

/// # Safety
/// `fam` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sepstab_family_verify(
    fam: *const SepstabFamily,
    out: *mut SepstabFamilyReport,
) -> SepstabStatus {
    guard(|| {
        let r = verify_family(&borrow(fam, "family")?.0);
        write_out(
            out,
            SepstabFamilyReport {
                product: r.product,
                sibling_commutator: r.sibling_commutator,
                split: r.split,
                inequality_min_eigenvalue: r.inequality_min_eigenvalue,
                separability: r.separability,
                projector: r.projector,
                passed: r.passed(),
            },
        )
    })
}

/// `sum_u tr(rho P^(u)) - (2^(n-1) - 1)`.
///
/// # Safety
/// Handles must be valid; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sepstab_family_fidelity_bound(
    fam: *const SepstabFamily,
    rho: *const SepstabDensity,
    out: *mut f64,
) -> SepstabStatus {
    guard(|| {
        let f = &borrow(fam, "family")?.0;
        let rho = &borrow(rho, "rho")?.0;
        write_out(out, fidelity_bound_multipartite(rho, f)?)
    })
}

/// # Safety
/// `fam` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepstab_family_free(fam: *mut SepstabFamily) {
    if !fam.is_null() {
        drop(Box::from_raw(fam));
    }
}

fn certify_opts(o: &SepstabCertifyOptions) -> CertifyOptions {
    CertifyOptions { epsilon: o.epsilon, delta: o.delta, seed: o.seed, samples: (o.samples > 0).then_some(o.samples) }
}

fn certificate(e: &EstimateReport) -> SepstabCertificate {
    SepstabCertificate {
        tests: e.tests.len(),
        samples_per_test: e.samples_per_test,
        plug_in_bound: e.fidelity_lower_bound,
        confidence_adjusted_bound: e.confidence_adjusted_bound,
        exact_bound: e.exact_bound,
        fidelity_squared: e.fidelity_squared,
    }
}

/// Samples the P and Q tests on `rho` and returns the Hoeffding certificate.
///
/// # Safety
/// Handles and pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sepstab_certify_stabilizer(
    stab: *const SepstabStabilizer,
    rho: *const SepstabDensity,
    options: *const SepstabCertifyOptions,
    out: *mut SepstabCertificate,
) -> SepstabStatus {
    guard(|| {
        let s = &borrow(stab, "stabilizer")?.0;
        let rho = &borrow(rho, "rho")?.0;
        let opts = certify_opts(borrow(options, "options")?);
        write_out(out, certificate(&certify(rho, s, &opts)?))
    })
}

/// Samples every leaf test of the family on `rho`.
///
/// # Safety
/// Handles and pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sepstab_certify_family(
    fam: *const SepstabFamily,
    rho: *const SepstabDensity,
    options: *const SepstabCertifyOptions,
    out: *mut SepstabCertificate,
) -> SepstabStatus {
    guard(|| {
        let f = &borrow(fam, "family")?.0;
        let rho = &borrow(rho, "rho")?.0;
        let opts = certify_opts(borrow(options, "options")?);
        write_out(out, certificate(&certify(rho, f, &opts)?))
    })
}

/// A built-in channel: "identity", "depolarizing", "dephasing",
/// "amplitude-damping" or "bit-flip".
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sepstab_channel_builtin(
    name: *const c_char,
    d: usize,
    p: f64,
    out: *mut *mut SepstabChannel,
) -> SepstabStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|e| Failure(SepstabStatus::InvalidUtf8, e.to_string()))?;
        let kind: NoiseKind = name.parse()?;
        emit(out, SepstabChannel(builtin_noise(kind, d, p)?))
    })
}

/// A channel from `count` Kraus operators of shape `dim_out x dim_in`,
/// stored back to back as interleaved row-major doubles.
///
/// # Safety
/// `kraus` must hold `2 * count * dim_out * dim_in` doubles.
#[no_mangle]
pub unsafe extern "C" fn sepstab_channel_new(
    kraus: *const f64,
    count: usize,
    dim_out: usize,
    dim_in: usize,
    out: *mut *mut SepstabChannel,
) -> SepstabStatus {
    guard(|| {
        let block = dim_out * dim_in;
        let values = complex_vec(slice(kraus, 2 * count * block, "kraus")?)?;
        let ops = values
            .chunks(block.max(1))
            .take(count)
            .map(|c| square(c.to_vec(), dim_out, dim_in))
            .collect::<FfiResult<Vec<_>>>()?;
        emit(out, SepstabChannel(KrausChannel::new(ops)?))
    })
}

/// # Safety
/// `chan` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sepstab_channel_free(chan: *mut SepstabChannel) {
    if !chan.is_null() {
        drop(Box::from_raw(chan));
    }
}

fn channel_bound(r: &ChannelBoundReport) -> SepstabChannelBound {
    let mut out = SepstabChannelBound {
        ent_fidelity_sq: r.ent_fidelity_sq,
        ensemble_term_schmidt: r.ensemble_term_schmidt,
        ensemble_term_conj: r.ensemble_term_conj,
        bound: r.bound,
        identity_residual_p: r.identity_residual_p,
        identity_residual_q: r.identity_residual_q,
        passed: r.passed(),
        ..Default::default()
    };
    if let Some(s) = &r.sampled {
        out.has_sampled = true;
        out.samples_per_term = s.samples_per_term;
        out.mean_schmidt = s.mean_schmidt;
        out.mean_conj = s.mean_conj;
        out.adjusted_bound = s.adjusted_bound;
    }
    out
}

/// Entanglement-fidelity bound of a channel acting on the second side of
/// the stabilizer's cut, from exact probe fidelities.
///
/// # Safety
/// Handles and pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sepstab_channel_bound_exact(
    chan: *const SepstabChannel,
    stab: *const SepstabStabilizer,
    out: *mut SepstabChannelBound,
) -> SepstabStatus {
    guard(|| {
        let c = &borrow(chan, "channel")?.0;
        let s = &borrow(stab, "stabilizer")?.0;
        write_out(out, channel_bound(&channel_bound_exact(c, s)?))
    })
}

/// As [`sepstab_channel_bound_exact`], plus a sampled estimate of both
/// ensemble terms with its confidence-adjusted bound.
///
/// # Safety
/// Handles and pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sepstab_channel_bound_sampled(
    chan: *const SepstabChannel,
    stab: *const SepstabStabilizer,
    epsilon: f64,
    delta: f64,
    seed: u64,
    out: *mut SepstabChannelBound,
) -> SepstabStatus {
    guard(|| {
        let c = &borrow(chan, "channel")?.0;
        let s = &borrow(stab, "stabilizer")?.0;
        write_out(out, channel_bound(&channel_bound_sampled(c, s, epsilon, delta, seed)?))
    })
}
