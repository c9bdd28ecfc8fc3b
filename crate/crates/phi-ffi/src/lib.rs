//! C ABI for the scoring engine: an opaque scorer handle configured with
//! the EM/prune/eps settings, flat status codes, and a one-call pipeline
//! runner driven by a config file. `include/phi.h` is generated from this
//! file by cbindgen at build time.
//!
//! Thread safety: a `PhiScorer` holds only plain configuration and may be
//! shared across threads; every call is reentrant.

use libc::{c_char, size_t};
use phi_core::config::RunConfig;
use phi_core::error::Error;
use phi_core::gmm::{self, EmConfig};
use phi_core::phi;
use phi_core::stats::{self, GlobalScale, QuantileSet};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientData = 3,
    NumericalError = 4,
    ConfigError = 5,
    IngestError = 6,
    IoError = 7,
}

fn status_of(err: &Error) -> PhiStatus {
    match err {
        Error::Config(_) => PhiStatus::ConfigError,
        Error::Ingest(_) | Error::Csv(_) => PhiStatus::IngestError,
        Error::Numerical(_) => PhiStatus::NumericalError,
        Error::Io(_) | Error::Json(_) => PhiStatus::IoError,
    }
}

/// One supplier's score decomposition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiBreakdown {
    /// Retained mixture component count M.
    pub modality: u32,
    /// Asymmetry component A in [1, 2].
    pub asymmetry: f64,
    /// Tail component T >= 1.
    pub tail: f64,
    /// Structural dispersion D >= 1.
    pub dispersion: f64,
    /// The product M * A * T * D.
    pub phi: f64,
    /// Log-contribution shares in percent; all zero when degenerate.
    pub contrib_modality_pct: f64,
    pub contrib_asymmetry_pct: f64,
    pub contrib_tail_pct: f64,
    pub contrib_dispersion_pct: f64,
    /// 1 when phi <= 1 + 1e-12 and the decomposition is undefined.
    pub degenerate: u8,
}

/// Opaque scorer handle.
pub struct PhiScorer {
    em: EmConfig,
    prune_weight: f64,
    eps: f64,
}

/// Create a scorer with explicit EM and scoring settings. Returns null
/// when a setting is out of range (tol/reg/eps must be positive,
/// max_iter/n_init at least 1, prune_weight in [0, 0.25)).
#[no_mangle]
pub extern "C" fn phi_scorer_new(
    tol: f64,
    max_iter: size_t,
    n_init: size_t,
    seed: u64,
    reg: f64,
    prune_weight: f64,
    eps: f64,
) -> *mut PhiScorer {
    if !(tol > 0.0) || !(reg > 0.0) || !(eps > 0.0) || max_iter == 0 || n_init == 0 {
        return std::ptr::null_mut();
    }
    if !(0.0..0.25).contains(&prune_weight) {
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(PhiScorer {
        em: EmConfig { tol, max_iter, n_init, seed, reg },
        prune_weight,
        eps,
    }))
}

/// Create a scorer with the operational defaults (tol 1e-3, max_iter 100,
/// n_init 1, seed 0, reg 1e-6, prune 0.05, eps 1e-6).
#[no_mangle]
pub extern "C" fn phi_scorer_default() -> *mut PhiScorer {
    Box::into_raw(Box::new(PhiScorer {
        em: EmConfig::default(),
        prune_weight: 0.05,
        eps: 1e-6,
    }))
}

/// Free a scorer created by `phi_scorer_new`/`phi_scorer_default`.
/// Passing null is a no-op.
///
/// # Safety
/// `scorer` must be a pointer previously returned by one of the scorer
/// constructors and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phi_scorer_free(scorer: *mut PhiScorer) {
    if !scorer.is_null() {
        drop(unsafe { Box::from_raw(scorer) });
    }
}

/// Compute the corpus-wide robust scale (median and interquartile range)
/// over the cleaned payment amounts in GBP.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out_median` and
/// `out_iqr` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phi_global_scale(
    values: *const f64,
    len: size_t,
    out_median: *mut f64,
    out_iqr: *mut f64,
) -> PhiStatus {
    if values.is_null() || out_median.is_null() || out_iqr.is_null() {
        return PhiStatus::NullPointer;
    }
    if len == 0 {
        return PhiStatus::InsufficientData;
    }
    let slice = unsafe { std::slice::from_raw_parts(values, len) };
    if slice.iter().any(|v| !v.is_finite()) {
        return PhiStatus::InvalidArgument;
    }
    let mut sorted = slice.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    match GlobalScale::from_sorted(&sorted) {
        Ok(scale) => {
            unsafe {
                *out_median = scale.median;
                *out_iqr = scale.iqr;
            }
            PhiStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Score one supplier's raw GBP payment amounts against a corpus scale:
/// robust-standardise, fit mixtures with BIC selection and pruning, and
/// fill `out` with the component decomposition.
///
/// # Safety
/// `scorer` must be a live scorer handle; `amounts_gbp` must point to
/// `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phi_score_sample(
    scorer: *const PhiScorer,
    amounts_gbp: *const f64,
    len: size_t,
    median: f64,
    iqr: f64,
    out: *mut PhiBreakdown,
) -> PhiStatus {
    if scorer.is_null() || amounts_gbp.is_null() || out.is_null() {
        return PhiStatus::NullPointer;
    }
    if len == 0 {
        return PhiStatus::InsufficientData;
    }
    if !(iqr > 0.0) || !median.is_finite() || !iqr.is_finite() {
        return PhiStatus::InvalidArgument;
    }
    let scorer = unsafe { &*scorer };
    let amounts = unsafe { std::slice::from_raw_parts(amounts_gbp, len) };
    if amounts.iter().any(|v| !v.is_finite()) {
        return PhiStatus::InvalidArgument;
    }

    let scale = GlobalScale { median, iqr };
    let mut standardised: Vec<f64> = match amounts
        .iter()
        .map(|&a| stats::robust_standardise(a, &scale))
        .collect::<phi_core::Result<_>>()
    {
        Ok(v) => v,
        Err(e) => return status_of(&e),
    };
    standardised.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let quantiles = match QuantileSet::from_sorted(&standardised) {
        Ok(q) => q,
        Err(e) => return status_of(&e),
    };
    let model = match gmm::select_and_prune(&standardised, &scorer.em, scorer.prune_weight) {
        Ok(m) => m,
        Err(e) => return status_of(&e),
    };
    let c = phi::compute_phi(&model, &quantiles, scorer.eps);
    unsafe {
        *out = PhiBreakdown {
            modality: c.modality,
            asymmetry: c.asymmetry,
            tail: c.tail,
            dispersion: c.dispersion,
            phi: c.phi,
            contrib_modality_pct: c.contributions.modality,
            contrib_asymmetry_pct: c.contributions.asymmetry,
            contrib_tail_pct: c.contributions.tail,
            contrib_dispersion_pct: c.contributions.dispersion,
            degenerate: u8::from(c.degenerate),
        };
    }
    PhiStatus::Ok
}

/// Run the full scoring pipeline from a TOML config file, writing the
/// report bundle to the configured output directory.
///
/// # Safety
/// `config_path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn phi_run_pipeline(config_path: *const c_char) -> PhiStatus {
    if config_path.is_null() {
        return PhiStatus::NullPointer;
    }
    let path = match unsafe { std::ffi::CStr::from_ptr(config_path) }.to_str() {
        Ok(s) => std::path::PathBuf::from(s),
        Err(_) => return PhiStatus::InvalidArgument,
    };
    let cfg = match RunConfig::load(&path) {
        Ok(cfg) => cfg,
        Err(e) => return status_of(&e),
    };
    match phi_core::pipeline::run_and_write(&cfg) {
        Ok(_) => PhiStatus::Ok,
        Err(e) => status_of(&e),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn phi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static name for a status code.
#[no_mangle]
pub extern "C" fn phi_status_name(status: PhiStatus) -> *const c_char {
    let name: &'static str = match status {
        PhiStatus::Ok => "ok\0",
        PhiStatus::NullPointer => "null pointer\0",
        PhiStatus::InvalidArgument => "invalid argument\0",
        PhiStatus::InsufficientData => "insufficient data\0",
        PhiStatus::NumericalError => "numerical error\0",
        PhiStatus::ConfigError => "config error\0",
        PhiStatus::IngestError => "ingest error\0",
        PhiStatus::IoError => "io error\0",
    };
    name.as_ptr() as *const c_char
}
