//! C ABI over the `confocal` library.
//!
//! Every function returns a [`ConfocalStatus`]; on failure the message is
//! kept per thread and can be read with [`confocal_last_error`]. Handles are
//! opaque and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use confocal::billiard::{caustic_parameters, jr_step, oracle_step, BilliardSpec, ImpactState};
use confocal::dynamics::{integrate, PhaseState, SystemKind, SystemSpec};
use confocal::lax::{det_l, lax_residual, LaxSize};
use confocal::{EllipsoidSpec, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfocalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Singularity = 3,
    SymmetricSpec = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque handle to a flow.
pub struct ConfocalSystem {
    inner: SystemSpec,
}

/// Opaque handle to a billiard table.
pub struct ConfocalBilliard {
    inner: BilliardSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ConfocalStatus {
    if e.is_singularity() {
        ConfocalStatus::Singularity
    } else if matches!(e, Error::SymmetricSpec) {
        ConfocalStatus::SymmetricSpec
    } else {
        ConfocalStatus::InvalidArgument
    }
}

enum Fail {
    Null(&'static str),
    Small(usize),
    Core(Error),
    Arg(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ConfocalStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            ConfocalStatus::Ok
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            ConfocalStatus::NullPointer
        }
        Ok(Err(Fail::Small(need))) => {
            set_error(format!("output buffer too small: {need} entries needed"));
            ConfocalStatus::BufferTooSmall
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Arg(m))) => {
            set_error(m);
            ConfocalStatus::InvalidArgument
        }
        Err(_) => {
            set_error("internal panic".into());
            ConfocalStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or valid for `len` writes.
unsafe fn write_out(p: *mut f64, values: &[f64], name: &'static str) -> Result<(), Fail> {
    if values.is_empty() {
        return Ok(());
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), p, values.len());
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

/// Copy the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn confocal_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn confocal_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a flow. `kind` is one of `jacobi`, `double-jacobi`,
/// `complex-jacobi`, `jacobi-rosochatius`, `separable-hierarchy`,
/// `free-oscillator`, `free-jr`. `sigmas` (length `m`) is used by the
/// hierarchy only; `mu` may be null for all zeros.
///
/// # Safety
/// Pointers must be valid for the given lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn confocal_system_new(
    kind: *const c_char,
    axes: *const f64,
    n: usize,
    sigma: f64,
    sigmas: *const f64,
    m: usize,
    mu: *const f64,
    out: *mut *mut ConfocalSystem,
) -> ConfocalStatus {
    guard(|| {
        if kind.is_null() {
            return Err(Fail::Null("kind"));
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let kind: SystemKind = CStr::from_ptr(kind)
            .to_str()
            .map_err(|_| Fail::Arg("kind is not UTF-8".into()))?
            .parse()?;
        let spec = EllipsoidSpec::new(slice(axes, n, "axes")?.to_vec())?;
        let sigmas = slice(sigmas, m, "sigmas")?.to_vec();
        let mu = if mu.is_null() { vec![] } else { slice(mu, n, "mu")?.to_vec() };
        let inner = match kind {
            SystemKind::Jacobi => SystemSpec::jacobi(spec, sigma),
            SystemKind::DoubleJacobi => SystemSpec::double_jacobi(spec, sigma),
            SystemKind::ComplexJacobi => SystemSpec::complex_jacobi(spec, sigma),
            SystemKind::JacobiRosochatius => SystemSpec::jacobi_rosochatius(spec, sigma, mu),
            SystemKind::SeparableHierarchy => SystemSpec::separable(spec, sigmas, mu),
            SystemKind::FreeOscillator => SystemSpec::free_oscillator(spec, sigma),
            SystemKind::FreeJR => SystemSpec::free_jr(spec, sigma, mu),
        }?;
        *out = Box::into_raw(Box::new(ConfocalSystem { inner }));
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from [`confocal_system_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn confocal_system_free(sys: *mut ConfocalSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Length of the `x` (and `y`) block of a state of this flow.
///
/// # Safety
/// `sys` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn confocal_system_state_len(sys: *const ConfocalSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.state_len())
}

/// Integrate from `(x, y)` over time `t` with step close to `h`; writes the
/// final state to `out_x`, `out_y` (each of the state length).
///
/// # Safety
/// Arrays must be valid for the state length.
#[no_mangle]
pub unsafe extern "C" fn confocal_integrate(
    sys: *const ConfocalSystem,
    x: *const f64,
    y: *const f64,
    t: f64,
    h: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> ConfocalStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.inner;
        let len = sys.state_len();
        let s0 = PhaseState::new(slice(x, len, "x")?.to_vec(), slice(y, len, "y")?.to_vec());
        let traj = integrate(sys, &s0, t, h)?;
        let last = traj.last().expect("trajectory includes the start");
        write_out(out_x, &last.x, "out_x")?;
        write_out(out_y, &last.y, "out_y")
    })
}

/// `det L(λ)` of the 2×2 Lax matrix at `(x, y)`.
///
/// # Safety
/// Arrays must be valid for the state length; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn confocal_det_l(
    sys: *const ConfocalSystem,
    x: *const f64,
    y: *const f64,
    lambda: f64,
    out: *mut f64,
) -> ConfocalStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.inner;
        let len = sys.state_len();
        let s = PhaseState::new(slice(x, len, "x")?.to_vec(), slice(y, len, "y")?.to_vec());
        let v = det_l(sys, &s, lambda)?;
        write_out(out, &[v], "out")
    })
}

/// `‖dL/dt - [L, A]‖` by central differences with step `h`; `big` selects
/// the `(n+1)`-dimensional pair.
///
/// # Safety
/// Arrays must be valid for the state length; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn confocal_lax_residual(
    sys: *const ConfocalSystem,
    x: *const f64,
    y: *const f64,
    big: bool,
    lambda: f64,
    h: f64,
    out: *mut f64,
) -> ConfocalStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.inner;
        let len = sys.state_len();
        let s = PhaseState::new(slice(x, len, "x")?.to_vec(), slice(y, len, "y")?.to_vec());
        let which = if big { LaxSize::Big } else { LaxSize::Small };
        let v = lax_residual(sys, &s, which, lambda, h)?;
        write_out(out, &[v], "out")
    })
}

/// Create a billiard in `<A^-1 x, x> <= 1`; `mu` may be null.
///
/// # Safety
/// Pointers must be valid for `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn confocal_billiard_new(
    axes: *const f64,
    n: usize,
    sigma: f64,
    mu: *const f64,
    out: *mut *mut ConfocalBilliard,
) -> ConfocalStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let axes = slice(axes, n, "axes")?.to_vec();
        let mu = if mu.is_null() { vec![] } else { slice(mu, n, "mu")?.to_vec() };
        let inner = BilliardSpec::new(axes, sigma, mu)?;
        *out = Box::into_raw(Box::new(ConfocalBilliard { inner }));
        Ok(())
    })
}

/// # Safety
/// `b` must be null or a handle from [`confocal_billiard_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn confocal_billiard_free(b: *mut ConfocalBilliard) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

unsafe fn billiard_step(
    b: *const ConfocalBilliard,
    x: *const f64,
    y: *const f64,
    out_x: *mut f64,
    out_y: *mut f64,
    oracle: bool,
) -> ConfocalStatus {
    guard(|| {
        let spec = &handle(b, "billiard")?.inner;
        let n = spec.dim();
        let s = ImpactState::new(slice(x, n, "x")?.to_vec(), slice(y, n, "y")?.to_vec());
        s.validate(spec)?;
        let next = if oracle { oracle_step(spec, &s)? } else { jr_step(spec, &s)? };
        write_out(out_x, &next.x, "out_x")?;
        write_out(out_y, &next.y, "out_y")
    })
}

/// One step of the explicit billiard map from the impact `(x, y)`.
///
/// # Safety
/// Arrays must be valid for the billiard dimension.
#[no_mangle]
pub unsafe extern "C" fn confocal_billiard_step(
    b: *const ConfocalBilliard,
    x: *const f64,
    y: *const f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> ConfocalStatus {
    billiard_step(b, x, y, out_x, out_y, false)
}

/// One bounce computed by integrating the free flight and reflecting.
///
/// # Safety
/// Arrays must be valid for the billiard dimension.
#[no_mangle]
pub unsafe extern "C" fn confocal_billiard_oracle_step(
    b: *const ConfocalBilliard,
    x: *const f64,
    y: *const f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> ConfocalStatus {
    billiard_step(b, x, y, out_x, out_y, true)
}

/// Caustic parameters of the segment leaving `(x, y)`, ascending. Writes
/// the count to `count`; fails with `BufferTooSmall` if `cap` is too small.
///
/// # Safety
/// `x`, `y` must be valid for the billiard dimension, `out` for `cap`
/// entries, and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn confocal_billiard_caustics(
    b: *const ConfocalBilliard,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    cap: usize,
    count: *mut usize,
) -> ConfocalStatus {
    guard(|| {
        let spec = &handle(b, "billiard")?.inner;
        if count.is_null() {
            return Err(Fail::Null("count"));
        }
        let n = spec.dim();
        let s = ImpactState::new(slice(x, n, "x")?.to_vec(), slice(y, n, "y")?.to_vec());
        let eta = caustic_parameters(spec, &s)?;
        *count = eta.len();
        if eta.len() > cap {
            return Err(Fail::Small(eta.len()));
        }
        write_out(out, &eta, "out")
    })
}
