//! C interface to the `eeopt` optimizer.
//!
//! A link is created from an [`EeoptLinkParams`] value and used through an
//! opaque [`EeoptLink`] handle. Every function returns an [`EeoptStatus`];
//! results are written through out-pointers only on success. After a
//! failure, [`eeopt_last_error_message`] returns a description of the most
//! recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eeopt::channel::{DEFAULT_QUADRATURE_ORDER, DEFAULT_REL_TOL};
use eeopt::{
    CaseSelector, CircuitPowerModel, Error, ExpectationMethod, ExpectationSpec, GainModel, Link, LinkParams,
    NoiseLimitArgument,
};

/// Constant channel gain, known at the transmitter.
pub const EEOPT_CASE_STATIC_CSIT: u32 = 0;
/// Nakagami fading, transmitter knows only the distribution.
pub const EEOPT_CASE_FADING_CDIT: u32 = 1;
/// Nakagami fading, transmitter knows each realization.
pub const EEOPT_CASE_FADING_CSIT: u32 = 2;

/// Return code of every function in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EeoptStatus {
    Ok = 0,
    NullPointer = 1,
    /// A parameter was rejected when building the link.
    InvalidParameter = 2,
    /// An argument lies outside the domain of the evaluated function.
    Domain = 3,
    /// An inner power or water-level solve failed.
    Solver = 4,
    /// The decision function stayed negative up to the doubling cap.
    UnboundedRoot = 5,
    /// The limit equation has no finite root.
    NoRoot = 6,
    /// An expectation produced a non-finite value.
    NonFinite = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// Parameters of one link.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeoptLinkParams {
    /// Bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Receiver noise power in Watts.
    pub noise_power_w: f64,
    /// Power amplifier efficiency in (0, 1].
    pub pa_efficiency: f64,
    /// Rate-dependent circuit power coefficient.
    pub kappa: f64,
    /// Static circuit power in Watts.
    pub p_static_w: f64,
    /// One of the `EEOPT_CASE_*` constants.
    pub case_id: u32,
    /// Channel gain (static case) or mean gain (fading cases).
    pub mean_gain: f64,
    /// Nakagami shape, >= 0.5. Ignored in the static case.
    pub nakagami_m: f64,
    /// Circuit power exponent: 1 for a linear circuit, > 1 for `R^alpha`.
    pub alpha: f64,
    /// Quadrature node density; 0 selects the default.
    pub quadrature_order: u32,
}

/// Optimum of the energy per bit.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EeoptOptimum {
    /// Optimal spectral efficiency in bits/s/Hz.
    pub c_star: f64,
    /// Energy per bit at the optimum in J/bit.
    pub ee_star: f64,
    /// Decision function evaluations.
    pub iterations: u32,
    pub doublings: u32,
    pub final_bracket_width: f64,
}

/// One sample of the tradeoff curve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EeoptPoint {
    pub c: f64,
    pub total_power_w: f64,
    /// Energy per bit; positive infinity at `c = 0`.
    pub ee: f64,
    pub gamma: f64,
}

/// Opaque link handle.
pub struct EeoptLink {
    inner: Link,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EeoptStatus {
    match e {
        Error::Domain { .. } => EeoptStatus::Domain,
        Error::InvalidParameter { .. } | Error::Config { .. } => EeoptStatus::InvalidParameter,
        Error::NonFinite { .. } => EeoptStatus::NonFinite,
        Error::Solver { .. } | Error::Io(_) => EeoptStatus::Solver,
        Error::UnboundedRoot { .. } => EeoptStatus::UnboundedRoot,
        Error::NoRoot(_) => EeoptStatus::NoRoot,
        Error::SweepPoint { source, .. } | Error::InCase { source, .. } => status_of(source),
    }
}

/// Runs `f`, records its error or panic, and turns the outcome into a status.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> EeoptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EeoptStatus::Ok,
        Ok(Err(e)) => {
            let status = status_of(&e);
            set_last_error(e.to_string());
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            EeoptStatus::Panic
        }
    }
}

fn null_pointer(what: &str) -> EeoptStatus {
    set_last_error(format!("null pointer: {what}"));
    EeoptStatus::NullPointer
}

fn invalid(name: &'static str, value: f64, reason: &str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason: reason.into(),
    }
}

fn link_params(p: &EeoptLinkParams) -> Result<LinkParams, Error> {
    let case = match p.case_id {
        EEOPT_CASE_STATIC_CSIT => CaseSelector::StaticCsit,
        EEOPT_CASE_FADING_CDIT => CaseSelector::FadingCdit,
        EEOPT_CASE_FADING_CSIT => CaseSelector::FadingCsit,
        other => return Err(invalid("case_id", other as f64, "must be 0, 1 or 2")),
    };
    let gain = match case {
        CaseSelector::StaticCsit => GainModel::fixed(p.mean_gain)?,
        _ => GainModel::nakagami(p.nakagami_m, p.mean_gain)?,
    };
    let circuit = if p.alpha == 1.0 {
        CircuitPowerModel::linear()
    } else {
        CircuitPowerModel::power_law(p.alpha)?
    };
    let order = match p.quadrature_order {
        0 => DEFAULT_QUADRATURE_ORDER,
        n => n as usize,
    };
    Ok(LinkParams {
        bandwidth: p.bandwidth_hz,
        noise_power: p.noise_power_w,
        pa_efficiency: p.pa_efficiency,
        kappa: p.kappa,
        p_static: p.p_static_w,
        case,
        gain,
        circuit,
        expectation: ExpectationSpec {
            method: ExpectationMethod::Quadrature { order },
            rel_tol: DEFAULT_REL_TOL,
        },
    })
}

/// Writes the near-link defaults (10 kHz, 1e-15 W noise, 40 % amplifier
/// efficiency, kappa 9e-8, 188 mW static power, gain at 10 m, Rayleigh,
/// linear circuit) for the given case.
///
/// # Safety
/// `out` must be null or point to writable memory for one `EeoptLinkParams`.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_params_default(case_id: u32, out: *mut EeoptLinkParams) -> EeoptStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    guard(|| {
        let cfg = eeopt::config::RunConfig::default();
        let p = EeoptLinkParams {
            bandwidth_hz: cfg.bandwidth_hz,
            noise_power_w: cfg.noise_power(),
            pa_efficiency: cfg.pa_efficiency,
            kappa: cfg.kappa,
            p_static_w: cfg.p_static_w,
            case_id,
            mean_gain: cfg.mean_gain()?,
            nakagami_m: 1.0,
            alpha: 1.0,
            quadrature_order: 0,
        };
        link_params(&p)?;
        *out = p;
        Ok(())
    })
}

/// Validates `params` and creates a link. Release it with
/// [`eeopt_link_free`].
///
/// # Safety
/// `params` must be null or point to a valid `EeoptLinkParams`; `out` must
/// be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_new(params: *const EeoptLinkParams, out: *mut *mut EeoptLink) -> EeoptStatus {
    if params.is_null() {
        return null_pointer("params");
    }
    if out.is_null() {
        return null_pointer("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        let inner = link_params(&*params)?.link()?;
        *out = Box::into_raw(Box::new(EeoptLink { inner }));
        Ok(())
    })
}

/// Releases a link. Null is accepted and ignored.
///
/// # Safety
/// `link` must be null or a handle from [`eeopt_link_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_free(link: *mut EeoptLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

unsafe fn scalar(link: *const EeoptLink, out: *mut f64, f: impl FnOnce(&Link) -> Result<f64, Error>) -> EeoptStatus {
    if link.is_null() {
        return null_pointer("link");
    }
    if out.is_null() {
        return null_pointer("out");
    }
    guard(|| {
        *out = f(&(*link).inner)?;
        Ok(())
    })
}

/// Total consumed power `P(C)` in Watts.
///
/// # Safety
/// `link` must be a live handle; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_total_power(link: *const EeoptLink, c: f64, out: *mut f64) -> EeoptStatus {
    scalar(link, out, |l| l.total_power(c))
}

/// Energy per bit `EE(C)` in J/bit; positive infinity at `c = 0`.
///
/// # Safety
/// `link` must be a live handle; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_ee(link: *const EeoptLink, c: f64, out: *mut f64) -> EeoptStatus {
    scalar(link, out, |l| l.ee(c))
}

/// Decision function `Gamma(C)` in Watts: negative below the optimum,
/// positive above.
///
/// # Safety
/// `link` must be a live handle; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_gamma(link: *const EeoptLink, c: f64, out: *mut f64) -> EeoptStatus {
    scalar(link, out, |l| l.gamma(c))
}

/// Normalized minimum transmit power `psi(C)`; multiply by the noise power
/// for Watts.
///
/// # Safety
/// `link` must be a live handle; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_psi(link: *const EeoptLink, c: f64, out: *mut f64) -> EeoptStatus {
    scalar(link, out, |l| l.engine().psi(c))
}

/// Bracket-and-bisect search for the optimum. `c_max` caps the bracket
/// doubling; pass 0 for the default of 64 bits/s/Hz.
///
/// # Safety
/// `link` must be a live handle; `out` must point to a writable
/// `EeoptOptimum`.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_optimize(
    link: *const EeoptLink,
    delta: f64,
    c_max: f64,
    out: *mut EeoptOptimum,
) -> EeoptStatus {
    if link.is_null() {
        return null_pointer("link");
    }
    if out.is_null() {
        return null_pointer("out");
    }
    guard(|| {
        let cap = if c_max == 0.0 {
            eeopt::optimizer::DEFAULT_C_MAX
        } else {
            c_max
        };
        let r = (*link).inner.optimize_with(delta, cap)?;
        *out = EeoptOptimum {
            c_star: r.c_star,
            ee_star: r.ee_star,
            iterations: r.iterations,
            doublings: r.doublings,
            final_bracket_width: r.final_bracket_width,
        };
        Ok(())
    })
}

/// Optimal spectral efficiency as the rate-dependent circuit power
/// vanishes.
///
/// # Safety
/// `link` must be a live handle; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_limit_kappa_zero(link: *const EeoptLink, out: *mut f64) -> EeoptStatus {
    scalar(link, out, |l| l.limit_se_kappa_zero())
}

/// Optimal spectral efficiency as the noise vanishes. With `bare_argument`
/// nonzero the circuit term is evaluated at `C` instead of `W C`.
///
/// # Safety
/// `link` must be a live handle; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_limit_noise_zero(
    link: *const EeoptLink,
    bare_argument: i32,
    out: *mut f64,
) -> EeoptStatus {
    let arg = if bare_argument != 0 {
        NoiseLimitArgument::Bare
    } else {
        NoiseLimitArgument::Scaled
    };
    scalar(link, out, |l| l.limit_se_noise_zero(arg))
}

/// Evaluates the tradeoff curve at `n` spectral efficiencies. `grid` must
/// be nonnegative and strictly increasing.
///
/// # Safety
/// `link` must be a live handle; `grid` must point to `n` readable doubles
/// and `out` to `n` writable `EeoptPoint` values.
#[no_mangle]
pub unsafe extern "C" fn eeopt_link_tradeoff(
    link: *const EeoptLink,
    grid: *const f64,
    n: usize,
    out: *mut EeoptPoint,
) -> EeoptStatus {
    if link.is_null() {
        return null_pointer("link");
    }
    if n > 0 && (grid.is_null() || out.is_null()) {
        return null_pointer(if grid.is_null() { "grid" } else { "out" });
    }
    if n == 0 {
        return EeoptStatus::Ok;
    }
    guard(|| {
        let grid = std::slice::from_raw_parts(grid, n);
        let points = (*link).inner.tradeoff_curve(grid)?;
        let out = std::slice::from_raw_parts_mut(out, n);
        for (o, p) in out.iter_mut().zip(points) {
            *o = EeoptPoint {
                c: p.c,
                total_power_w: p.total_power,
                ee: p.ee,
                gamma: p.gamma,
            };
        }
        Ok(())
    })
}

/// Mean channel gain `g0 * d^-path_exponent` at distance `distance_m`.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn eeopt_mean_gain_from_distance(
    distance_m: f64,
    g0: f64,
    path_exponent: f64,
    out: *mut f64,
) -> EeoptStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    guard(|| {
        *out = eeopt::mean_gain_from_distance(distance_m, g0, path_exponent)?;
        Ok(())
    })
}

/// Copies the last error message of the calling thread into `buf` (at most
/// `len` bytes, NUL-terminated) and returns the full message length
/// including the terminator, or 0 if no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn eeopt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eeopt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
