//! C ABI over `sylvenc`.
//!
//! Systems and enclosures are opaque heap handles released with their
//! `*_free` functions. Every fallible call returns a [`SylvencStatus`]; the
//! message of the most recent failure on the calling thread is available from
//! [`sylvenc_last_error`]. Matrices cross the boundary as row-major `double`
//! arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sylvenc::dense::{PMatrix, RMatrix};
use sylvenc::harness::{check_enclosure, generate, Family, GenSpec};
use sylvenc::interval::IMatrix;
use sylvenc::{solve, Enclosure, Error, Method, SolveOptions, System};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SylvencStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    Singular = 4,
    EigenFailed = 5,
    NoInitialEnclosure = 6,
    SizeCap = 7,
    Overflow = 8,
    Inconsistent = 9,
    Io = 10,
    Panic = 11,
}

/// Enclosure methods.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SylvencMethod {
    Mkw = 0,
    Itr = 1,
    Ver = 2,
    Blk = 3,
}

/// Generated problem families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SylvencFamily {
    Kyc31 = 0,
    Sylvester32 = 1,
    Gallery33 = 2,
}

/// Opaque interval system `A X B + C X D = F`.
pub struct SylvencSystem(System);

/// Opaque enclosure result.
pub struct SylvencEnclosure(Enclosure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SylvencStatus {
    match e {
        Error::DimensionMismatch(_) => SylvencStatus::DimensionMismatch,
        Error::IntervalOverflow | Error::KronOverflow => SylvencStatus::Overflow,
        Error::SingularMatrix
        | Error::SingularPreconditioner
        | Error::SingularPreconditionerBlock
        | Error::DivisionByZero => SylvencStatus::Singular,
        Error::EigenFailed => SylvencStatus::EigenFailed,
        Error::InconsistentEnclosure => SylvencStatus::Inconsistent,
        Error::BaselineSizeCap { .. } => SylvencStatus::SizeCap,
        Error::NoInitialEnclosure => SylvencStatus::NoInitialEnclosure,
        Error::InvalidInput(_) => SylvencStatus::InvalidInput,
        Error::Io(_) => SylvencStatus::Io,
    }
}

/// Runs `f`, recording failures and panics in the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), SylvencStatus>) -> SylvencStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SylvencStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            SylvencStatus::Panic
        }
    }
}

fn fail(e: Error) -> SylvencStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> SylvencStatus {
    set_error(format!("null pointer: {what}"));
    SylvencStatus::NullPointer
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, SylvencStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SylvencStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_matrix(rows: usize, cols: usize, mid: *const f64, rad: *const f64, what: &str) -> Result<IMatrix, SylvencStatus> {
    if mid.is_null() {
        return Err(null(what));
    }
    let len = rows.checked_mul(cols).ok_or_else(|| fail(Error::IntervalOverflow))?;
    let mid = std::slice::from_raw_parts(mid, len);
    let pm = PMatrix::from_real(rows, cols, mid).map_err(fail)?;
    let rm = if rad.is_null() {
        RMatrix::zeros(rows, cols)
    } else {
        RMatrix::new(rows, cols, std::slice::from_raw_parts(rad, len).to_vec()).map_err(fail)?
    };
    IMatrix::new(pm, rm).map_err(fail)
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// call into this library from the same thread.
#[no_mangle]
pub extern "C" fn sylvenc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a real system from row-major midpoints and radii. Any radius
/// pointer may be NULL for a point matrix. `A`, `C` are `m x m`, `B`, `D` are
/// `n x n` and `F` is `m x n`.
///
/// # Safety
/// Every non-NULL pointer must reference an array of the stated size.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sylvenc_system_new_real(
    m: usize,
    n: usize,
    a_mid: *const f64,
    a_rad: *const f64,
    b_mid: *const f64,
    b_rad: *const f64,
    c_mid: *const f64,
    c_rad: *const f64,
    d_mid: *const f64,
    d_rad: *const f64,
    f_mid: *const f64,
    f_rad: *const f64,
    out: *mut *mut SylvencSystem,
) -> SylvencStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let sys = System::new(
            read_matrix(m, m, a_mid, a_rad, "A")?,
            read_matrix(n, n, b_mid, b_rad, "B")?,
            read_matrix(m, m, c_mid, c_rad, "C")?,
            read_matrix(n, n, d_mid, d_rad, "D")?,
            read_matrix(m, n, f_mid, f_rad, "F")?,
        )
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(SylvencSystem(sys)));
        Ok(())
    })
}

/// Parses a system from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_system_from_json(json: *const c_char, out: *mut *mut SylvencSystem) -> SylvencStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(Error::InvalidInput(e.to_string())))?;
        let sys: System = serde_json::from_str(text).map_err(|e| fail(e.into()))?;
        sys.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(SylvencSystem(sys)));
        Ok(())
    })
}

/// Generates a seeded test system. `n` is ignored for `Gallery33`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_system_generate(
    family: SylvencFamily,
    m: usize,
    n: usize,
    alpha: f64,
    seed: u64,
    out: *mut *mut SylvencSystem,
) -> SylvencStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let family = match family {
            SylvencFamily::Kyc31 => Family::Kyc31,
            SylvencFamily::Sylvester32 => Family::Sylvester32,
            SylvencFamily::Gallery33 => Family::Gallery33,
        };
        let n = if family == Family::Gallery33 { m } else { n };
        let sys = generate(&GenSpec {
            family,
            m,
            n,
            alpha,
            seed,
        })
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(SylvencSystem(sys)));
        Ok(())
    })
}

/// Writes the unknown's shape.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_system_shape(sys: *const SylvencSystem, m: *mut usize, n: *mut usize) -> SylvencStatus {
    guard(|| {
        let sys = &borrow(sys, "sys")?.0;
        *out_ptr(m, "m")? = sys.m();
        *out_ptr(n, "n")? = sys.n();
        Ok(())
    })
}

/// # Safety
/// `sys` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_system_free(sys: *mut SylvencSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Encloses the solution set with default options. An unverified result is
/// still returned with `SYLVENC_STATUS_OK`; query it with
/// [`sylvenc_enclosure_verified`].
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_solve(
    sys: *const SylvencSystem,
    method: SylvencMethod,
    out: *mut *mut SylvencEnclosure,
) -> SylvencStatus {
    guard(|| {
        let sys = &borrow(sys, "sys")?.0;
        let out = out_ptr(out, "out")?;
        let method = match method {
            SylvencMethod::Mkw => Method::Mkw,
            SylvencMethod::Itr => Method::Itr,
            SylvencMethod::Ver => Method::Ver,
            SylvencMethod::Blk => Method::Blk,
        };
        let enc = solve(sys, method, &SolveOptions::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(SylvencEnclosure(enc)));
        Ok(())
    })
}

/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_enclosure_verified(enc: *const SylvencEnclosure, out: *mut bool) -> SylvencStatus {
    guard(|| {
        *out_ptr(out, "out")? = borrow(enc, "enc")?.0.verified;
        Ok(())
    })
}

/// Copies the evaluated enclosure into row-major arrays of length `m n`.
/// `mid_im` may be NULL.
///
/// # Safety
/// Non-NULL arrays must hold `m n` doubles.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_enclosure_bounds(
    enc: *const SylvencEnclosure,
    mid_re: *mut f64,
    mid_im: *mut f64,
    rad: *mut f64,
) -> SylvencStatus {
    guard(|| {
        let e = &borrow(enc, "enc")?.0.evaluated;
        if mid_re.is_null() || rad.is_null() {
            return Err(null("mid_re or rad"));
        }
        for (k, d) in e.entries().into_iter().enumerate() {
            *mid_re.add(k) = d.mid.re;
            if !mid_im.is_null() {
                *mid_im.add(k) = d.mid.im;
            }
            *rad.add(k) = d.rad;
        }
        Ok(())
    })
}

/// Serializes the enclosure; free the string with [`sylvenc_string_free`].
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_enclosure_to_json(enc: *const SylvencEnclosure, out: *mut *mut c_char) -> SylvencStatus {
    guard(|| {
        let enc = &borrow(enc, "enc")?.0;
        let out = out_ptr(out, "out")?;
        let text = serde_json::to_string(enc).map_err(|e| fail(e.into()))?;
        *out = CString::new(text).map_err(|e| fail(Error::InvalidInput(e.to_string())))?.into_raw();
        Ok(())
    })
}

/// Samples `samples` member solutions and counts those inside the enclosure.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_check(
    sys: *const SylvencSystem,
    enc: *const SylvencEnclosure,
    samples: usize,
    seed: u64,
    contained: *mut usize,
    total: *mut usize,
) -> SylvencStatus {
    guard(|| {
        let rep = check_enclosure(&borrow(sys, "sys")?.0, &borrow(enc, "enc")?.0, samples, seed).map_err(fail)?;
        *out_ptr(contained, "contained")? = rep.contained;
        *out_ptr(total, "total")? = rep.samples;
        Ok(())
    })
}

/// # Safety
/// `enc` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_enclosure_free(enc: *mut SylvencEnclosure) {
    if !enc.is_null() {
        drop(Box::from_raw(enc));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sylvenc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
