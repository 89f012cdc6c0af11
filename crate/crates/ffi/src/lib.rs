//! C ABI over the `mlsys` toolkit.
//!
//! Every function returns an [`MlsysStatus`]. On failure a thread-local
//! message is available from [`mlsys_last_error`]. Strings handed out by the
//! library are released with [`mlsys_string_free`]; system handles with
//! [`mlsys_system_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mlsys::catalog::{self, ReplicateOptions};
use mlsys::liealgebra::{is_unimodular, VGLieAlgebra};
use mlsys::multisymplectic::invariant_volume;
use mlsys::numeric::{integrate, CompiledExpr, Method, NumError, NumericSystem};
use mlsys::symexpr::RationalExpr;
use mlsys::system::LieSystemDef;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlsysStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidInput = 2,
    CheckFailed = 3,
    Numeric = 4,
    Panic = 5,
}

/// Opaque handle to a parsed Lie system.
pub struct MlsysSystem {
    def: LieSystemDef,
    alg: VGLieAlgebra,
    scalars: Vec<(String, usize, RationalExpr)>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

struct Fail(MlsysStatus, String);

fn fail(status: MlsysStatus, e: impl ToString) -> Fail {
    Fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MlsysStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MlsysStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MlsysStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(MlsysStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(MlsysStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn sys_arg<'a>(p: *const MlsysSystem) -> Result<&'a MlsysSystem, Fail> {
    p.as_ref().ok_or_else(|| fail(MlsysStatus::NullArgument, "system handle is null"))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(MlsysStatus::NullArgument, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(fail(MlsysStatus::NullArgument, "output pointer is null"));
    }
    *out = CString::new(s).map_err(|e| fail(MlsysStatus::InvalidInput, e))?.into_raw();
    Ok(())
}

fn num_status(e: &NumError) -> MlsysStatus {
    match e {
        NumError::Arity { .. } | NumError::BadOption(_) => MlsysStatus::InvalidInput,
        _ => MlsysStatus::Numeric,
    }
}

/// Message for the last failing call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mlsys_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mlsys_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a system from a JSON file path or a built-in catalog id.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlsys_system_load(source: *const c_char, out: *mut *mut MlsysSystem) -> MlsysStatus {
    guard(|| {
        let source = str_arg(source, "source")?;
        if out.is_null() {
            return Err(fail(MlsysStatus::NullArgument, "output pointer is null"));
        }
        let def = if Path::new(source).is_file() {
            let text = std::fs::read_to_string(source).map_err(|e| fail(MlsysStatus::InvalidInput, e))?;
            LieSystemDef::from_json(&text).map_err(|e| fail(MlsysStatus::InvalidInput, e))?
        } else {
            catalog::load(source).map_err(|e| match e {
                catalog::CatalogError::SelfCheck { .. } => fail(MlsysStatus::CheckFailed, e),
                _ => fail(MlsysStatus::InvalidInput, e),
            })?
        };
        let alg = VGLieAlgebra::new(def.fields.clone()).map_err(|e| fail(MlsysStatus::CheckFailed, e))?;
        let scalars = catalog::symbolic_scalars(&def).map_err(|e| fail(MlsysStatus::CheckFailed, e))?;
        *out = Box::into_raw(Box::new(MlsysSystem { def, alg, scalars }));
        Ok(())
    })
}

/// Release a system handle. Null is ignored.
///
/// # Safety
/// `sys` must come from [`mlsys_system_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mlsys_system_free(sys: *mut MlsysSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Manifold dimension and number of basis fields.
///
/// # Safety
/// `sys` must be a live handle; the output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn mlsys_system_dims(sys: *const MlsysSystem, n_coords: *mut usize, n_fields: *mut usize) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        if let Some(n) = n_coords.as_mut() {
            *n = s.def.chart.dim();
        }
        if let Some(r) = n_fields.as_mut() {
            *r = s.def.fields.len();
        }
        Ok(())
    })
}

/// Bracket of two named fields, as a JSON array of component strings.
///
/// # Safety
/// `sys` must be a live handle, `a` and `b` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mlsys_bracket(sys: *const MlsysSystem, a: *const c_char, b: *const c_char, out: *mut *mut c_char) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        let lookup = |n: &str| -> Result<_, Fail> {
            s.def.field(n).or_else(|_| {
                s.def.symmetry_names.iter().position(|m| m == n).map(|i| &s.def.symmetries[i]).ok_or_else(|| fail(MlsysStatus::InvalidInput, format!("unknown field `{n}`")))
            })
        };
        let x = lookup(str_arg(a, "a")?)?;
        let y = lookup(str_arg(b, "b")?)?;
        let br = x.bracket(y).map_err(|e| fail(MlsysStatus::CheckFailed, e))?;
        let comps: Vec<String> = br.coeffs().iter().map(|c| mlsys::symexpr::render(c, br.chart())).collect();
        out_string(out, serde_json::to_string(&comps).expect("serializable"))
    })
}

/// Structure constants as JSON `[{"alpha","beta","gamma","value"}, ...]`.
///
/// # Safety
/// `sys` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mlsys_structure_constants(sys: *const MlsysSystem, out: *mut *mut c_char) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        out_string(out, serde_json::to_string(&s.alg.sc().entries()).expect("serializable"))
    })
}

/// Whether every adjoint trace vanishes.
///
/// # Safety
/// `sys` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mlsys_is_unimodular(sys: *const MlsysSystem, out: *mut bool) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        let out = out.as_mut().ok_or_else(|| fail(MlsysStatus::NullArgument, "output pointer is null"))?;
        *out = is_unimodular(s.alg.sc()).unimodular;
        Ok(())
    })
}

/// The invariant volume form, rendered as text. Fails with
/// `CheckFailed` when the algebra is not unimodular.
///
/// # Safety
/// `sys` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mlsys_invariant_volume(sys: *const MlsysSystem, out: *mut *mut c_char) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        let v = invariant_volume(&s.alg).map_err(|e| fail(MlsysStatus::CheckFailed, e))?;
        out_string(out, v.form().render())
    })
}

/// Run every stored check. `failed` receives the failure count and `out`
/// (optional) a JSON report. Returns `Ok` even when checks fail.
///
/// # Safety
/// `sys` must be a live handle; `failed` valid; `out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn mlsys_replicate(sys: *const MlsysSystem, numeric: bool, failed: *mut usize, out: *mut *mut c_char) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        let failed = failed.as_mut().ok_or_else(|| fail(MlsysStatus::NullArgument, "failed is null"))?;
        let checks = catalog::replicate(&s.def, ReplicateOptions { numeric });
        *failed = checks.iter().filter(|c| !c.passed).count();
        if !out.is_null() {
            out_string(out, serde_json::to_string(&checks).expect("serializable"))?;
        }
        Ok(())
    })
}

/// Number of named constants of motion stored with the system.
///
/// # Safety
/// `sys` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mlsys_constant_count(sys: *const MlsysSystem, out: *mut usize) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        *out.as_mut().ok_or_else(|| fail(MlsysStatus::NullArgument, "output pointer is null"))? = s.scalars.len();
        Ok(())
    })
}

/// Evaluate a named constant of motion at a point of the m-fold product.
/// `point` holds the m coordinate blocks followed by the parameter values;
/// `m_out` (optional) receives the number of blocks expected.
///
/// # Safety
/// `sys` must be a live handle, `name` NUL-terminated, `point` readable for
/// `len` values and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mlsys_constant_eval(
    sys: *const MlsysSystem,
    name: *const c_char,
    point: *const f64,
    len: usize,
    m_out: *mut usize,
    out: *mut f64,
) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        let name = str_arg(name, "name")?;
        let (_, m, f) = s.scalars.iter().find(|(n, _, _)| n == name).ok_or_else(|| fail(MlsysStatus::InvalidInput, format!("unknown constant `{name}`")))?;
        if let Some(mo) = m_out.as_mut() {
            *mo = *m;
        }
        let need = s.def.chart_m(*m).map_err(|e| fail(MlsysStatus::InvalidInput, e))?.dim();
        let point = slice_arg(point, len, "point")?;
        if point.len() != need {
            return Err(fail(MlsysStatus::InvalidInput, format!("`{name}` needs {need} values, got {}", point.len())));
        }
        let out = out.as_mut().ok_or_else(|| fail(MlsysStatus::NullArgument, "output pointer is null"))?;
        *out = CompiledExpr::new(f).eval(point).ok_or_else(|| fail(MlsysStatus::Numeric, format!("`{name}` is singular at this point")))?;
        Ok(())
    })
}

/// Fixed-step RK4 from `t0` to `t1`. Writes the final state to `x_out`
/// (length `n`). `params` may be null when `n_params` is 0, in which case
/// the system's stored parameter values are used.
///
/// # Safety
/// `sys` must be a live handle; `x0` and `x_out` hold `n` values; `params`
/// holds `n_params` values.
#[no_mangle]
pub unsafe extern "C" fn mlsys_integrate_rk4(
    sys: *const MlsysSystem,
    x0: *const f64,
    n: usize,
    t0: f64,
    t1: f64,
    step: f64,
    params: *const f64,
    n_params: usize,
    x_out: *mut f64,
) -> MlsysStatus {
    guard(|| {
        let s = sys_arg(sys)?;
        let x0 = slice_arg(x0, n, "x0")?;
        if x_out.is_null() {
            return Err(fail(MlsysStatus::NullArgument, "x_out is null"));
        }
        let params = if n_params == 0 {
            s.def.file.numeric.as_ref().map(|nb| nb.params.clone()).unwrap_or_default()
        } else {
            slice_arg(params, n_params, "params")?.to_vec()
        };
        let ns = NumericSystem::new(&s.def.fields, s.def.tdep.clone(), params).map_err(|e| fail(num_status(&e), e))?;
        let tr = integrate(&ns, x0, t0, t1, Method::Rk4 { step }).map_err(|e| fail(num_status(&e), e))?;
        ptr::copy_nonoverlapping(tr.last().as_ptr(), x_out, n);
        Ok(())
    })
}
