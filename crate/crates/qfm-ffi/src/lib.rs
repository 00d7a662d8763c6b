//! C ABI over qfm-core: opaque model handles, status codes, and a
//! thread-local error message. The generated header lives in `include/qfm.h`.
//!
//! Every function returns `QfmStatus`; outputs go through out-pointers. On
//! any non-OK status the message from `qfm_last_error_message` describes the
//! failure until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ndarray::Array2;

use qfm_core::ansatz::ansatz_by_name;
use qfm_core::draw::draw_text;
use qfm_core::metrics::{
    entangling_capability, expressibility_kl, EntanglementConfig, EntanglementMeasure,
    ExpressibilityConfig,
};
use qfm_core::model::{
    forward, EncodingScheme, EncodingStrategy, ExecutionRequest, Model,
};
use qfm_core::pulse::{analytic_calibration, circuit_state_infidelity, HamiltonianSpec};
use qfm_core::quantum::GateKind;
use qfm_core::rng::RngStream;
use qfm_core::QfmError;

/// Result code of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfmStatus {
    Ok = 0,
    /// A pointer argument was null or a buffer length did not match.
    NullPointer = 1,
    /// Invalid name, shape, or parameter value.
    InvalidConfig = 2,
    /// Simulation or optimization failure.
    Numerical = 3,
    /// An internal invariant was violated (caught panic).
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &QfmError) -> QfmStatus {
    match e {
        QfmError::InvalidConfig(_)
        | QfmError::InvalidParameter(_)
        | QfmError::UnknownAnsatz(_)
        | QfmError::UnknownGate(_)
        | QfmError::UncalibratedGate(_)
        | QfmError::WrongParamCount { .. }
        | QfmError::WireOutOfRange { .. } => QfmStatus::InvalidConfig,
        _ => QfmStatus::Numerical,
    }
}

fn fail(e: QfmError) -> QfmStatus {
    set_error(&e.to_string());
    status_of(&e)
}

/// Runs `f` behind a panic guard so unwinding never crosses the ABI.
fn guarded(f: impl FnOnce() -> QfmStatus) -> QfmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            QfmStatus::Internal
        }
    }
}

/// Message for the most recent failure on this thread. Valid until the next
/// API call from the same thread; never null.
#[no_mangle]
pub extern "C" fn qfm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qfm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque model handle; create with `qfm_model_new`, release with
/// `qfm_model_free`.
pub struct QfmModel {
    inner: Model,
}

unsafe fn parse_name(ptr: *const c_char, what: &str) -> Result<String, QfmStatus> {
    if ptr.is_null() {
        set_error(&format!("{what} is null"));
        return Err(QfmStatus::NullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(s.to_string()),
        Err(_) => {
            set_error(&format!("{what} is not valid UTF-8"));
            Err(QfmStatus::InvalidConfig)
        }
    }
}

fn encoding_by_name(name: &str) -> Result<EncodingStrategy, QfmError> {
    let scheme = match name {
        "hamming" => EncodingScheme::Hamming,
        "binary" => EncodingScheme::Binary,
        "ternary" => EncodingScheme::Ternary,
        other => {
            return Err(QfmError::InvalidConfig(format!(
                "unknown encoding {other:?} (expected hamming|binary|ternary)"
            )))
        }
    };
    EncodingStrategy::new(scheme, GateKind::RX)
}

/// Builds a model with the named ansatz and encoding scheme, `n_layers`
/// data-reuploading layers, and a Z(0) readout. On success `*out` owns the
/// handle.
///
/// # Safety
/// `ansatz` and `encoding` must be NUL-terminated strings; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qfm_model_new(
    n_qubits: usize,
    n_layers: usize,
    ansatz: *const c_char,
    encoding: *const c_char,
    out: *mut *mut QfmModel,
) -> QfmStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is null");
            return QfmStatus::NullPointer;
        }
        let ansatz_name = match parse_name(ansatz, "ansatz") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let encoding_name = match parse_name(encoding, "encoding") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let build = || -> Result<Model, QfmError> {
            let a = ansatz_by_name(&ansatz_name, n_qubits)?;
            Model::standard(n_qubits, n_layers, a, encoding_by_name(&encoding_name)?)
        };
        match build() {
            Ok(model) => {
                *out = Box::into_raw(Box::new(QfmModel { inner: model }));
                QfmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a handle from `qfm_model_new`. Null is a no-op.
///
/// # Safety
/// `model` must be a pointer previously returned by `qfm_model_new` and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn qfm_model_free(model: *mut QfmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn model_ref<'a>(model: *const QfmModel) -> Result<&'a Model, QfmStatus> {
    if model.is_null() {
        set_error("model is null");
        return Err(QfmStatus::NullPointer);
    }
    Ok(&(*model).inner)
}

/// Trainable parameter shape: `*rows = n_layers + 1`, `*cols` = parameters
/// per layer.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qfm_model_param_shape(
    model: *const QfmModel,
    rows: *mut usize,
    cols: *mut usize,
) -> QfmStatus {
    guarded(|| {
        let m = match model_ref(model) {
            Ok(m) => m,
            Err(st) => return st,
        };
        if rows.is_null() || cols.is_null() {
            set_error("rows/cols is null");
            return QfmStatus::NullPointer;
        }
        let (r, c) = m.param_shape();
        *rows = r;
        *cols = c;
        QfmStatus::Ok
    })
}

unsafe fn params_from_raw(
    m: &Model,
    params: *const f64,
    params_len: usize,
) -> Result<Array2<f64>, QfmStatus> {
    let (rows, cols) = m.param_shape();
    if params.is_null() && params_len != 0 {
        set_error("params is null");
        return Err(QfmStatus::NullPointer);
    }
    if params_len != rows * cols {
        set_error(&format!(
            "params length {params_len} != {rows}x{cols} = {}",
            rows * cols
        ));
        return Err(QfmStatus::InvalidConfig);
    }
    let flat: Vec<f64> = if params_len == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(params, params_len).to_vec()
    };
    Array2::from_shape_vec((rows, cols), flat).map_err(|e| {
        set_error(&e.to_string());
        QfmStatus::InvalidConfig
    })
}

/// Z(0) expectation of the model at input `x` (row-major `params`, shape
/// from `qfm_model_param_shape`). `shots = 0` means analytic readout;
/// `noise_p > 0` switches to the density-matrix path.
///
/// # Safety
/// Buffers must match their stated lengths; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qfm_model_forward(
    model: *const QfmModel,
    x: *const f64,
    x_len: usize,
    params: *const f64,
    params_len: usize,
    noise_p: f64,
    shots: u64,
    seed: u64,
    out: *mut f64,
) -> QfmStatus {
    guarded(|| {
        let m = match model_ref(model) {
            Ok(m) => m,
            Err(st) => return st,
        };
        if x.is_null() || out.is_null() {
            set_error("x/out is null");
            return QfmStatus::NullPointer;
        }
        let theta = match params_from_raw(m, params, params_len) {
            Ok(t) => t,
            Err(st) => return st,
        };
        let xv = std::slice::from_raw_parts(x, x_len);
        let request = ExecutionRequest {
            shots: (shots > 0).then_some(shots),
            noise_p,
            ..ExecutionRequest::expval()
        };
        let mut rng = RngStream::from_seed(seed).split("forward");
        match forward(m, xv, &theta, &request, &mut rng).and_then(|o| o.expval()) {
            Ok(v) => {
                *out = v;
                QfmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// KL-divergence expressibility of the model against the Haar baseline.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qfm_model_expressibility(
    model: *const QfmModel,
    n_pairs: usize,
    n_bins: usize,
    seed: u64,
    out: *mut f64,
) -> QfmStatus {
    guarded(|| {
        let m = match model_ref(model) {
            Ok(m) => m,
            Err(st) => return st,
        };
        if out.is_null() {
            set_error("out is null");
            return QfmStatus::NullPointer;
        }
        let cfg = ExpressibilityConfig {
            n_pairs,
            n_bins,
            seed,
        };
        match expressibility_kl(m, &cfg) {
            Ok(v) => {
                *out = v;
                QfmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Entangling capability under the named measure (`mw`, `bm`, `ef`, `ce`):
/// mean and sample standard deviation over `n_samples` parameter draws.
/// `shots = 0` means analytic probabilities.
///
/// # Safety
/// `measure` must be NUL-terminated; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qfm_model_entanglement(
    model: *const QfmModel,
    measure: *const c_char,
    n_samples: usize,
    noise_p: f64,
    shots: u64,
    seed: u64,
    out_mean: *mut f64,
    out_std: *mut f64,
) -> QfmStatus {
    guarded(|| {
        let m = match model_ref(model) {
            Ok(m) => m,
            Err(st) => return st,
        };
        if out_mean.is_null() || out_std.is_null() {
            set_error("out_mean/out_std is null");
            return QfmStatus::NullPointer;
        }
        let name = match parse_name(measure, "measure") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let run = || -> Result<(f64, f64), QfmError> {
            let mut cfg = EntanglementConfig::new(EntanglementMeasure::parse(&name)?);
            cfg.n_samples = n_samples;
            cfg.noise_p = noise_p;
            cfg.shots = (shots > 0).then_some(shots);
            let root = RngStream::from_seed(seed).split("entanglement");
            entangling_capability(m, &cfg, &root)
        };
        match run() {
            Ok((mean, std)) => {
                *out_mean = mean;
                *out_std = std;
                QfmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// State infidelity between the gate-level circuit and its pulse compilation
/// under the analytic calibration for a transmon-like spec with qubit
/// frequency `omega_q` and ZZ coupling `j` (rotating frame).
///
/// # Safety
/// Buffers must match their stated lengths; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qfm_model_pulse_infidelity(
    model: *const QfmModel,
    x: *const f64,
    x_len: usize,
    params: *const f64,
    params_len: usize,
    omega_q: f64,
    j: f64,
    out: *mut f64,
) -> QfmStatus {
    guarded(|| {
        let m = match model_ref(model) {
            Ok(m) => m,
            Err(st) => return st,
        };
        if x.is_null() || out.is_null() {
            set_error("x/out is null");
            return QfmStatus::NullPointer;
        }
        let theta = match params_from_raw(m, params, params_len) {
            Ok(t) => t,
            Err(st) => return st,
        };
        let xv = std::slice::from_raw_parts(x, x_len);
        let run = || -> Result<f64, QfmError> {
            let h = HamiltonianSpec {
                omega_q,
                j,
                ..HamiltonianSpec::default_rwa()
            };
            h.validate()?;
            let circuit = m.build_circuit(xv, &theta)?;
            let cal = analytic_calibration(h, 0);
            circuit_state_infidelity(&circuit, &cal, 1e-10, 1e-10)
        };
        match run() {
            Ok(v) => {
                *out = v;
                QfmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Text diagram of the circuit at input `x`. The returned string is owned by
/// the caller; release it with `qfm_string_free`.
///
/// # Safety
/// Buffers must match their stated lengths; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qfm_model_draw(
    model: *const QfmModel,
    x: *const f64,
    x_len: usize,
    params: *const f64,
    params_len: usize,
    out: *mut *mut c_char,
) -> QfmStatus {
    guarded(|| {
        let m = match model_ref(model) {
            Ok(m) => m,
            Err(st) => return st,
        };
        if x.is_null() || out.is_null() {
            set_error("x/out is null");
            return QfmStatus::NullPointer;
        }
        let theta = match params_from_raw(m, params, params_len) {
            Ok(t) => t,
            Err(st) => return st,
        };
        let xv = std::slice::from_raw_parts(x, x_len);
        match m.build_circuit(xv, &theta).map(|c| draw_text(&c)) {
            Ok(text) => {
                let c = CString::new(text.replace('\0', " ")).unwrap_or_default();
                *out = c.into_raw();
                QfmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Frees a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must come from `qfm_model_draw` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qfm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    fn name(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn new_model(n: usize, l: usize, ansatz: &str) -> *mut QfmModel {
        let mut handle: *mut QfmModel = ptr::null_mut();
        let st = qfm_model_new(
            n,
            l,
            name(ansatz).as_ptr(),
            name("hamming").as_ptr(),
            &mut handle,
        );
        assert_eq!(st, QfmStatus::Ok);
        assert!(!handle.is_null());
        handle
    }

    #[test]
    fn version_is_non_empty() {
        let v = unsafe { CStr::from_ptr(qfm_version()) };
        assert!(!v.to_str().unwrap().is_empty());
    }

    #[test]
    fn idle_model_forward_is_cosine() {
        unsafe {
            let m = new_model(1, 1, "Idle");
            let mut rows = 0;
            let mut cols = 0;
            assert_eq!(qfm_model_param_shape(m, &mut rows, &mut cols), QfmStatus::Ok);
            assert_eq!((rows, cols), (2, 0));
            let x = [0.7_f64];
            let mut out = f64::NAN;
            let st = qfm_model_forward(m, x.as_ptr(), 1, ptr::null(), 0, 0.0, 0, 1, &mut out);
            assert_eq!(st, QfmStatus::Ok);
            assert!((out - 0.7_f64.cos()).abs() < 1e-12);
            qfm_model_free(m);
        }
    }

    #[test]
    fn unknown_ansatz_reports_config_error() {
        unsafe {
            let mut handle: *mut QfmModel = ptr::null_mut();
            let st = qfm_model_new(
                2,
                1,
                name("NOPE").as_ptr(),
                name("hamming").as_ptr(),
                &mut handle,
            );
            assert_eq!(st, QfmStatus::InvalidConfig);
            let msg = CStr::from_ptr(qfm_last_error_message());
            assert!(msg.to_str().unwrap().contains("NOPE"));
            assert!(handle.is_null());
        }
    }

    #[test]
    fn null_pointers_rejected() {
        unsafe {
            let st = qfm_model_new(2, 1, ptr::null(), ptr::null(), ptr::null_mut());
            assert_eq!(st, QfmStatus::NullPointer);
            let mut out = 0.0;
            assert_eq!(
                qfm_model_forward(ptr::null(), ptr::null(), 0, ptr::null(), 0, 0.0, 0, 0, &mut out),
                QfmStatus::NullPointer
            );
        }
    }

    #[test]
    fn wrong_param_length_rejected() {
        unsafe {
            let m = new_model(2, 1, "NEA");
            let x = [0.0_f64];
            let params = [0.0_f64; 3];
            let mut out = 0.0;
            let st = qfm_model_forward(m, x.as_ptr(), 1, params.as_ptr(), 3, 0.0, 0, 0, &mut out);
            assert_eq!(st, QfmStatus::InvalidConfig);
            qfm_model_free(m);
        }
    }

    #[test]
    fn entanglement_of_nea_is_zero() {
        unsafe {
            let m = new_model(3, 1, "NEA");
            let mut mean = f64::NAN;
            let mut std = f64::NAN;
            let st = qfm_model_entanglement(
                m,
                name("mw").as_ptr(),
                20,
                0.0,
                0,
                7,
                &mut mean,
                &mut std,
            );
            assert_eq!(st, QfmStatus::Ok);
            assert!(mean.abs() < 1e-10, "mean {mean}");
            qfm_model_free(m);
        }
    }

    #[test]
    fn expressibility_runs() {
        unsafe {
            let m = new_model(2, 1, "SEA");
            let mut kl = f64::NAN;
            assert_eq!(qfm_model_expressibility(m, 200, 75, 3, &mut kl), QfmStatus::Ok);
            assert!(kl.is_finite() && kl > 0.0);
            qfm_model_free(m);
        }
    }

    #[test]
    fn pulse_infidelity_small_for_basis_ansatz() {
        unsafe {
            let m = new_model(2, 1, "NEA");
            let mut rows = 0;
            let mut cols = 0;
            qfm_model_param_shape(m, &mut rows, &mut cols);
            let params = vec![0.4_f64; rows * cols];
            let x = [0.3_f64];
            let mut inf = f64::NAN;
            let st = qfm_model_pulse_infidelity(
                m,
                x.as_ptr(),
                1,
                params.as_ptr(),
                params.len(),
                10.0 * std::f64::consts::PI,
                std::f64::consts::PI,
                &mut inf,
            );
            assert_eq!(st, QfmStatus::Ok);
            assert!(inf < 1e-8, "infidelity {inf}");
            qfm_model_free(m);
        }
    }

    #[test]
    fn draw_returns_owned_string() {
        unsafe {
            let m = new_model(2, 1, "SEA");
            let mut rows = 0;
            let mut cols = 0;
            qfm_model_param_shape(m, &mut rows, &mut cols);
            let params = vec![0.1_f64; rows * cols];
            let x = [0.0_f64];
            let mut s: *mut c_char = ptr::null_mut();
            let st = qfm_model_draw(m, x.as_ptr(), 1, params.as_ptr(), params.len(), &mut s);
            assert_eq!(st, QfmStatus::Ok);
            let text = CStr::from_ptr(s).to_str().unwrap().to_string();
            assert!(text.contains("RX"));
            qfm_string_free(s);
            qfm_model_free(m);
        }
    }

    #[test]
    fn header_is_generated() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qfm.h");
        let text = std::fs::read_to_string(header).unwrap();
        for needle in [
            "qfm_model_new",
            "qfm_model_forward",
            "qfm_last_error_message",
            "QFM_STATUS_OK",
        ] {
            assert!(text.contains(needle), "header missing {needle}");
        }
    }
}
