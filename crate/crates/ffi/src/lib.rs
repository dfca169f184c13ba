//! C ABI for `photonsynth`.
//!
//! Conventions:
//! * every fallible function returns a [`PsStatus`]; on failure a message is
//!   available from [`ps_last_error_message`] on the same thread;
//! * complex numbers travel as interleaved `(re, im)` pairs of `double`;
//! * density operators are opaque [`PsDensity`] handles released with
//!   [`ps_density_free`]; strings returned to the caller are released with
//!   [`ps_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use photonsynth::fock::{fidelity, loss_channel, uhlmann_fidelity, DensityOperator, FockVector};
use photonsynth::herald::{herald, perturbative_output, HeraldConfig, DEFAULT_DIM};
use photonsynth::synth::{solve_displacements, TargetSuperposition};
use photonsynth::tomo::{mle_reconstruct, sample_quadratures, PhaseSchedule, QuadratureRecord, TomoSettings};
use photonsynth::wigner::{count_negative_intervals, wigner_grid, wigner_point, CutSpec, GridSpec};
use photonsynth::{io, Error, C64};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    DegenerateTarget = 4,
    ZeroNorm = 5,
    EmptyRecords = 6,
    InvalidDensity = 7,
    Numerical = 8,
    NoHeraldEvent = 9,
    Serialization = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Opaque density operator.
pub struct PsDensity {
    inner: DensityOperator,
}

/// Heralding parameters; `betas` holds three complex amplitudes as
/// `re₁, im₁, re₂, im₂, re₃, im₃`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PsHeraldConfig {
    pub q: f64,
    pub betas: [f64; 6],
    pub signal_dim: usize,
    pub idler_dim: usize,
    pub eta_signal: f64,
    pub eta_detector: f64,
    pub dark_prob: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PsStatus {
    match err {
        Error::InvalidArgument(_) | Error::ModeOutOfRange { .. } | Error::ZeroState => PsStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => PsStatus::DimensionMismatch,
        Error::DegenerateTarget { .. } => PsStatus::DegenerateTarget,
        Error::ZeroNorm => PsStatus::ZeroNorm,
        Error::EmptyRecords => PsStatus::EmptyRecords,
        Error::InvalidDensity(_) => PsStatus::InvalidDensity,
        Error::Numerical(_) => PsStatus::Numerical,
        Error::NoHeraldEvent => PsStatus::NoHeraldEvent,
        Error::Io(_) | Error::Json(_) => PsStatus::Serialization,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Buffer { needed: usize, given: usize },
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            PsStatus::NullPointer
        }
        Ok(Err(Fail::Buffer { needed, given })) => {
            set_error(format!("buffer holds {given} values, {needed} needed"));
            PsStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".to_string());
            PsStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn handle<'a>(p: *const PsDensity, what: &'static str) -> Result<&'a DensityOperator, Fail> {
    p.as_ref().map(|h| &h.inner).ok_or(Fail::Null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, needed: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len < needed {
        return Err(Fail::Buffer { needed, given: len });
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, needed))
}

fn complexes(pairs: &[f64]) -> Vec<C64> {
    pairs.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect()
}

fn betas_from(pairs: &[f64; 6]) -> [C64; 3] {
    [
        C64::new(pairs[0], pairs[1]),
        C64::new(pairs[2], pairs[3]),
        C64::new(pairs[4], pairs[5]),
    ]
}

fn give(rho: DensityOperator, out: *mut *mut PsDensity) -> Result<(), Fail> {
    let slot = unsafe { out_ref(out, "out")? };
    *slot = Box::into_raw(Box::new(PsDensity { inner: rho }));
    Ok(())
}

/// Message describing the last failure on this thread, or null. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `rho` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_density_free(rho: *mut PsDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Returns 0 for a null handle.
///
/// # Safety
/// `rho` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_density_dim(rho: *const PsDensity) -> usize {
    rho.as_ref().map_or(0, |h| h.inner.dim())
}

/// Builds a density operator from `dim*dim` row-major complex entries
/// (`2*dim*dim` doubles). The matrix must be Hermitian, unit-trace and
/// positive semidefinite.
///
/// # Safety
/// `entries` must point to `2*dim*dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_density_from_entries(
    dim: usize,
    entries: *const f64,
    out: *mut *mut PsDensity,
) -> PsStatus {
    guard(|| {
        let n = dim.checked_mul(dim).and_then(|n| n.checked_mul(2)).ok_or(Error::InvalidArgument("dim too large".into()))?;
        let data = input(entries, n, "entries")?;
        let m = io::MatrixJson {
            dim,
            entries: data.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        };
        let rho = m.to_density()?;
        rho.validate()?;
        give(rho, out)
    })
}

/// `|n⟩⟨n|` in a space of dimension `dim`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_density_fock(n: usize, dim: usize, out: *mut *mut PsDensity) -> PsStatus {
    guard(|| give(DensityOperator::fock(n, dim)?, out))
}

/// `|ψ⟩⟨ψ|` for `dim` complex amplitudes (normalized on the way in).
///
/// # Safety
/// `amps` must point to `2*dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_density_from_pure(dim: usize, amps: *const f64, out: *mut *mut PsDensity) -> PsStatus {
    guard(|| {
        let psi = FockVector::new(complexes(input(amps, 2 * dim, "amps")?))?.normalized()?;
        give(psi.to_density(), out)
    })
}

/// Copies the `dim*dim` row-major entries as `2*dim*dim` doubles.
///
/// # Safety
/// `rho` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ps_density_entries(rho: *const PsDensity, buf: *mut f64, len: usize) -> PsStatus {
    guard(|| {
        let rho = handle(rho, "rho")?;
        let d = rho.dim();
        let out = output(buf, len, 2 * d * d, "buf")?;
        for i in 0..d {
            for j in 0..d {
                let z = rho.element(i, j);
                out[2 * (i * d + j)] = z.re;
                out[2 * (i * d + j) + 1] = z.im;
            }
        }
        Ok(())
    })
}

/// JSON `{"dim", "entries"}` form; free the result with [`ps_string_free`].
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_density_to_json(rho: *const PsDensity, out: *mut *mut c_char) -> PsStatus {
    guard(|| {
        let text = io::density_to_json(handle(rho, "rho")?)?;
        *out_ref(out, "out")? = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_density_from_json(json: *const c_char, out: *mut *mut PsDensity) -> PsStatus {
    guard(|| {
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Error::InvalidArgument("JSON is not UTF-8".into()))?;
        give(io::density_from_json(text)?, out)
    })
}

/// Solves for the three displacements producing
/// `c₀|0⟩ + c₁|1⟩ + c₂|2⟩ + c₃|3⟩` at pump parameter `q`.
/// `coeffs` holds 8 doubles, `betas_out` receives 6.
///
/// # Safety
/// Pointers must reference buffers of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn ps_solve_displacements(coeffs: *const f64, q: f64, betas_out: *mut f64) -> PsStatus {
    guard(|| {
        let c = complexes(input(coeffs, 8, "coeffs")?);
        let target = TargetSuperposition::new([c[0], c[1], c[2], c[3]])?;
        let recipe = solve_displacements(&target, q)?;
        let out = output(betas_out, 6, 6, "betas_out")?;
        for (k, b) in recipe.betas.iter().enumerate() {
            out[2 * k] = b.re;
            out[2 * k + 1] = b.im;
        }
        Ok(())
    })
}

/// Unnormalized lowest-order output amplitudes for `|0⟩..|3⟩` (8 doubles).
///
/// # Safety
/// `betas` must hold 6 doubles and `out` 8.
#[no_mangle]
pub unsafe extern "C" fn ps_perturbative_output(q: f64, betas: *const f64, out: *mut f64) -> PsStatus {
    guard(|| {
        let b: [f64; 6] = input(betas, 6, "betas")?.try_into().expect("length checked");
        let psi = perturbative_output(q, &betas_from(&b));
        let dst = output(out, 8, 8, "out")?;
        for n in 0..4 {
            dst[2 * n] = psi.amp(n).re;
            dst[2 * n + 1] = psi.amp(n).im;
        }
        Ok(())
    })
}

/// Ideal detectors, no loss, default truncations.
#[no_mangle]
pub extern "C" fn ps_herald_config_default(q: f64) -> PsHeraldConfig {
    PsHeraldConfig {
        q,
        betas: [0.0; 6],
        signal_dim: DEFAULT_DIM,
        idler_dim: DEFAULT_DIM,
        eta_signal: 1.0,
        eta_detector: 1.0,
        dark_prob: 0.0,
    }
}

/// Runs triple-click heralding. `probability` and `warnings` may be null.
///
/// # Safety
/// `config` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_herald(
    config: *const PsHeraldConfig,
    out: *mut *mut PsDensity,
    probability: *mut f64,
    warnings: *mut usize,
) -> PsStatus {
    guard(|| {
        let c = config.as_ref().ok_or(Fail::Null("config"))?;
        let cfg = HeraldConfig {
            q: c.q,
            betas: betas_from(&c.betas),
            signal_dim: c.signal_dim,
            idler_dim: c.idler_dim,
            eta_signal: c.eta_signal,
            eta_detector: c.eta_detector,
            dark_prob: c.dark_prob,
        };
        let outcome = herald(&cfg)?;
        if let Some(p) = probability.as_mut() {
            *p = outcome.probability;
        }
        if let Some(w) = warnings.as_mut() {
            *w = outcome.warnings.len();
        }
        give(outcome.rho, out)
    })
}

/// Applies pure loss with transmission `eta`.
///
/// # Safety
/// `rho` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_loss_channel(rho: *const PsDensity, eta: f64, out: *mut *mut PsDensity) -> PsStatus {
    guard(|| give(loss_channel(handle(rho, "rho")?, eta)?, out))
}

/// `⟨ψ|ρ|ψ⟩` for a normalized `ψ` of `dim` amplitudes (`2*dim` doubles).
///
/// # Safety
/// `rho` must be a live handle; `amps` must hold `2*dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn ps_fidelity_pure(
    rho: *const PsDensity,
    amps: *const f64,
    dim: usize,
    out: *mut f64,
) -> PsStatus {
    guard(|| {
        let psi = FockVector::new(complexes(input(amps, 2 * dim, "amps")?))?;
        *out_ref(out, "out")? = fidelity(handle(rho, "rho")?, &psi)?;
        Ok(())
    })
}

/// `(Tr √(√ρ σ √ρ))²`.
///
/// # Safety
/// Both handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_fidelity_mixed(a: *const PsDensity, b: *const PsDensity, out: *mut f64) -> PsStatus {
    guard(|| {
        *out_ref(out, "out")? = uhlmann_fidelity(handle(a, "a")?, handle(b, "b")?)?;
        Ok(())
    })
}

/// # Safety
/// `rho` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_wigner_point(rho: *const PsDensity, x: f64, p: f64, out: *mut f64) -> PsStatus {
    guard(|| {
        *out_ref(out, "out")? = wigner_point(handle(rho, "rho")?, x, p);
        Ok(())
    })
}

/// Fills `buf[i*np + j] = W(x_i, p_j)` on the described grid.
///
/// # Safety
/// `rho` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ps_wigner_grid(
    rho: *const PsDensity,
    x_min: f64,
    x_max: f64,
    p_min: f64,
    p_max: f64,
    nx: usize,
    np: usize,
    buf: *mut f64,
    len: usize,
) -> PsStatus {
    guard(|| {
        let spec = GridSpec {
            x_min,
            x_max,
            p_min,
            p_max,
            nx,
            np,
        };
        let grid = wigner_grid(handle(rho, "rho")?, &spec)?;
        output(buf, len, grid.values.len(), "buf")?.copy_from_slice(&grid.values);
        Ok(())
    })
}

/// Number of separate negative stretches along the cut through the origin
/// at `angle`, with default range, sampling and threshold.
///
/// # Safety
/// `rho` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_wigner_negative_intervals(rho: *const PsDensity, angle: f64, out: *mut usize) -> PsStatus {
    guard(|| {
        *out_ref(out, "out")? = count_negative_intervals(handle(rho, "rho")?, &CutSpec::along(angle))?;
        Ok(())
    })
}

/// Draws `n` homodyne records over `phases` equally spaced phases.
///
/// # Safety
/// `rho` must be a live handle; `theta_out` and `x_out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ps_sample_quadratures(
    rho: *const PsDensity,
    n: usize,
    phases: usize,
    seed: u64,
    theta_out: *mut f64,
    x_out: *mut f64,
) -> PsStatus {
    guard(|| {
        let records = sample_quadratures(handle(rho, "rho")?, n, &PhaseSchedule::UniformScan { phases }, seed)?;
        let t = output(theta_out, n, n, "theta_out")?;
        for (dst, r) in t.iter_mut().zip(&records) {
            *dst = r.theta();
        }
        let x = output(x_out, n, n, "x_out")?;
        for (dst, r) in x.iter_mut().zip(&records) {
            *dst = r.x();
        }
        Ok(())
    })
}

/// Maximum-likelihood reconstruction in dimension `dim`. `max_iters = 0`
/// selects the default. `iterations` and `converged` may be null.
///
/// # Safety
/// `theta` and `x` must hold `n` doubles; `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ps_mle_reconstruct(
    theta: *const f64,
    x: *const f64,
    n: usize,
    dim: usize,
    max_iters: usize,
    out: *mut *mut PsDensity,
    iterations: *mut usize,
    converged: *mut bool,
) -> PsStatus {
    guard(|| {
        let t = input(theta, n, "theta")?;
        let xs = input(x, n, "x")?;
        let records: Vec<QuadratureRecord> = t.iter().zip(xs).map(|(&t, &x)| QuadratureRecord::new(t, x)).collect();
        let mut settings = TomoSettings {
            dim,
            ..TomoSettings::default()
        };
        if max_iters > 0 {
            settings.max_iters = max_iters;
        }
        let recon = mle_reconstruct(&records, &settings)?;
        if let Some(i) = iterations.as_mut() {
            *i = recon.diagnostics.iterations;
        }
        if let Some(c) = converged.as_mut() {
            *c = recon.diagnostics.converged;
        }
        give(recon.rho, out)
    })
}
