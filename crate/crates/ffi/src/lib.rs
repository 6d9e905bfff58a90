//! C ABI over featnet. Objects are opaque heap handles released with their
//! `*_free` function; strings returned to the caller are released with
//! [`featnet_string_free`]. Every fallible call returns a [`FeatnetStatus`]
//! and, on failure, leaves a message for [`featnet_last_error`] on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use featnet::arch::{compile, ArchitectureGraph, DatasetSpec};
use featnet::cli::efficiency;
use featnet::dnn::{dnn_model, profile_overlay, DnnSpace};
use featnet::emit::{emit_dot, emit_ir, IrProvenance};
use featnet::flatten::{flatten, to_cnf, BooleanModel, CnfFormula, FlattenBounds};
use featnet::fm::{check_configuration, parse_fm, Configuration, FeatureModel};
use featnet::sat::{random_config, SampleError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatnetStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    Unsatisfiable = 4,
    FlattenError = 5,
    InvalidConfiguration = 6,
    CompileError = 7,
    UnknownDataset = 8,
    Panic = 9,
}

/// A feature model together with its flattened CNF.
pub struct FeatnetModel {
    model: FeatureModel,
    boolean: BooleanModel,
    cnf: CnfFormula,
}

pub struct FeatnetConfig(Configuration);

pub struct FeatnetGraph(ArchitectureGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl ToString) {
    let c = CString::new(msg.to_string().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FeatnetStatus, msg: impl ToString) -> FeatnetStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> FeatnetStatus) -> FeatnetStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(FeatnetStatus::Panic, "internal panic"),
    }
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, FeatnetStatus> {
    if p.is_null() {
        return Err(fail(FeatnetStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(FeatnetStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            return fail(FeatnetStatus::NullArgument, "null pointer argument");
        }
    };
}

fn finish_model(model: FeatureModel, out: *mut *mut FeatnetModel) -> FeatnetStatus {
    let boolean = match flatten(&model, &FlattenBounds::declared()) {
        Ok(b) => b,
        Err(e) => return fail(FeatnetStatus::FlattenError, e),
    };
    let cnf = to_cnf(&boolean);
    unsafe { *out = Box::into_raw(Box::new(FeatnetModel { model, boolean, cnf })) };
    FeatnetStatus::Ok
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next featnet call on the same thread.
#[no_mangle]
pub extern "C" fn featnet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from a featnet function and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn featnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a feature model from DSL text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_model_parse(text: *const c_char, out: *mut *mut FeatnetModel) -> FeatnetStatus {
    guard(|| {
        nonnull!(out);
        let t = tri!(c_str(text));
        match parse_fm(t) {
            Ok(m) => finish_model(m, out),
            Err(e) => fail(FeatnetStatus::ParseError, e),
        }
    })
}

/// Generates the block/cell model. `profile` may be NULL.
///
/// # Safety
/// `profile` is NULL or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_model_dnn(
    max_blocks: u32,
    max_cells: u32,
    profile: *const c_char,
    out: *mut *mut FeatnetModel,
) -> FeatnetStatus {
    guard(|| {
        nonnull!(out);
        if max_blocks == 0 || max_cells == 0 {
            return fail(FeatnetStatus::FlattenError, "bounds must be at least 1");
        }
        let mut model = dnn_model(&DnnSpace::with_bounds(max_blocks, max_cells)).expect("generated model parses");
        if !profile.is_null() {
            let name = tri!(c_str(profile));
            let Some(overlay) = profile_overlay(name) else {
                return fail(FeatnetStatus::ParseError, format!("unknown profile `{name}`"));
            };
            model = match model.with_overlay(overlay) {
                Ok(m) => m,
                Err(e) => return fail(FeatnetStatus::ParseError, e),
            };
        }
        finish_model(model, out)
    })
}

/// # Safety
/// `m` is NULL or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn featnet_model_free(m: *mut FeatnetModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of CNF variables and clauses of the flattened model.
///
/// # Safety
/// `m` is a live model handle; the out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_model_cnf_size(
    m: *const FeatnetModel,
    num_vars: *mut usize,
    num_clauses: *mut usize,
) -> FeatnetStatus {
    guard(|| {
        nonnull!(m, num_vars, num_clauses);
        let m = &*m;
        *num_vars = m.cnf.num_vars;
        *num_clauses = m.cnf.clauses.len();
        FeatnetStatus::Ok
    })
}

/// Draws one random valid configuration.
///
/// # Safety
/// `m` is a live model handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_model_sample(
    m: *const FeatnetModel,
    seed: u64,
    out: *mut *mut FeatnetConfig,
) -> FeatnetStatus {
    guard(|| {
        nonnull!(m, out);
        let m = &*m;
        match random_config(&m.boolean, &m.cnf, seed) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(FeatnetConfig(c)));
                FeatnetStatus::Ok
            }
            Err(SampleError::Unsat) => fail(FeatnetStatus::Unsatisfiable, "model has no valid configuration"),
            Err(e) => fail(FeatnetStatus::FlattenError, e),
        }
    })
}

/// Checks a configuration against the model. `*valid` is set only on success.
///
/// # Safety
/// `m` and `c` are live handles; `valid` is writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_config_check(
    m: *const FeatnetModel,
    c: *const FeatnetConfig,
    valid: *mut bool,
) -> FeatnetStatus {
    guard(|| {
        nonnull!(m, c, valid);
        match check_configuration(&(*m).model, &(*c).0) {
            Ok(r) => {
                *valid = r.is_valid();
                FeatnetStatus::Ok
            }
            Err(e) => fail(FeatnetStatus::InvalidConfiguration, e),
        }
    })
}

/// Parses `.fncfg` text.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_config_parse(text: *const c_char, out: *mut *mut FeatnetConfig) -> FeatnetStatus {
    guard(|| {
        nonnull!(out);
        match Configuration::parse_fncfg(tri!(c_str(text))) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(FeatnetConfig(c)));
                FeatnetStatus::Ok
            }
            Err(e) => fail(FeatnetStatus::ParseError, e),
        }
    })
}

/// Canonical `.fncfg` text; free with [`featnet_string_free`].
///
/// # Safety
/// `c` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_config_to_text(c: *const FeatnetConfig, out: *mut *mut c_char) -> FeatnetStatus {
    guard(|| {
        nonnull!(c, out);
        *out = into_c_string((*c).0.to_fncfg());
        FeatnetStatus::Ok
    })
}

/// # Safety
/// `c` is NULL or a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn featnet_config_free(c: *mut FeatnetConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Compiles a configuration for `dataset` (`"mnist"` or `"cifar10"`).
/// On `FEATNET_STATUS_COMPILE_ERROR` the message starts with the error kind.
///
/// # Safety
/// `c` is a live handle; `dataset` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_compile(
    c: *const FeatnetConfig,
    dataset: *const c_char,
    out: *mut *mut FeatnetGraph,
) -> FeatnetStatus {
    guard(|| {
        nonnull!(c, out);
        let name = tri!(c_str(dataset));
        let Some(ds) = DatasetSpec::preset(name) else {
            return fail(FeatnetStatus::UnknownDataset, format!("unknown dataset `{name}`"));
        };
        match compile(&(*c).0, &ds) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(FeatnetGraph(g)));
                FeatnetStatus::Ok
            }
            Err(e) => fail(FeatnetStatus::CompileError, e),
        }
    })
}

/// # Safety
/// `g` is a live graph handle; the out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_graph_stats(
    g: *const FeatnetGraph,
    num_nodes: *mut usize,
    total_size: *mut u64,
) -> FeatnetStatus {
    guard(|| {
        nonnull!(g, num_nodes, total_size);
        *num_nodes = (*g).0.nodes.len();
        *total_size = (*g).0.total_size;
        FeatnetStatus::Ok
    })
}

/// Canonical IR JSON; free with [`featnet_string_free`].
///
/// # Safety
/// `g` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_graph_ir(g: *const FeatnetGraph, out: *mut *mut c_char) -> FeatnetStatus {
    guard(|| {
        nonnull!(g, out);
        *out = into_c_string(emit_ir(&(*g).0, &IrProvenance::default()));
        FeatnetStatus::Ok
    })
}

/// Graphviz DOT text; free with [`featnet_string_free`].
///
/// # Safety
/// `g` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn featnet_graph_dot(g: *const FeatnetGraph, out: *mut *mut c_char) -> FeatnetStatus {
    guard(|| {
        nonnull!(g, out);
        *out = into_c_string(emit_dot(&(*g).0));
        FeatnetStatus::Ok
    })
}

/// # Safety
/// `g` is NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn featnet_graph_free(g: *mut FeatnetGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Accuracy (fraction) per million weights; NaN when `size` is 0.
#[no_mangle]
pub extern "C" fn featnet_efficiency(accuracy: f64, size: u64) -> f64 {
    if size == 0 {
        return f64::NAN;
    }
    efficiency(accuracy, size)
}
