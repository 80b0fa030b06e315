//! C ABI over the `qtsim` simulator.
//!
//! Every entry point returns a [`QtsimStatus`]; results go through out
//! pointers. On failure the message is kept per thread and can be copied out
//! with [`qtsim_last_error`]. Panics never cross the boundary.
//!
//! State vectors are opaque [`QtsimState`] handles owned by the caller and
//! released with [`qtsim_state_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qtsim::cchannel::Fading;
use qtsim::link::ClassicalLink;
use qtsim::qchannel::{DepolarizingParams, EveModel, PauliError};
use qtsim::qsdc::{choose_threshold, default_payload, run_session, Decision, QsdcConfig, ThresholdRule};
use qtsim::qstate::{fidelity, make_bell, BellKind, Gate, StateVector};
use qtsim::rng::stream_rng;
use qtsim::shor::exact_logical_rate;
use qtsim::teleport::{teleport_once, BellOutcome};
use qtsim::turbo::TurboConfig;
use qtsim::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    Protocol = 4,
    Config = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtsimGate {
    H = 0,
    X = 1,
    Y = 2,
    Z = 3,
    /// `qubit` is the control, `target` the target.
    Cnot = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtsimPauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtsimEve {
    None = 0,
    /// `eve_param` is the intercepted fraction.
    Swap = 1,
    /// `eve_param` is the added depolarization, at least 0.1.
    Boost = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtsimLink {
    Ideal = 0,
    /// i.i.d. flips at `forced_ber`.
    BitFlip = 1,
    Uncoded = 2,
    Turbo = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QtsimComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque state-vector handle.
pub struct QtsimState {
    inner: StateVector,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QtsimQsdcParams {
    pub n_pairs: u32,
    pub m_virtual: u32,
    pub p_eq: f64,
    pub eve: QtsimEve,
    pub eve_param: f64,
    pub shor: bool,
    pub link: QtsimLink,
    pub snr_db: f64,
    pub forced_ber: f64,
    /// Zero or negative selects the automatic threshold.
    pub threshold: f64,
    pub max_retries: u32,
    pub seed: u64,
    pub session_id: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QtsimQsdcReport {
    pub accepted: bool,
    pub virtual_qber: f64,
    pub virtual_errors: u32,
    pub m_virtual: u32,
    pub threshold: f64,
    /// False for aborted sessions; the two payload fields are then zero.
    pub has_payload: bool,
    pub payload_qber: f64,
    pub classical_ber: f64,
    pub eve_present: bool,
    pub attempts: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> QtsimStatus {
    match e {
        Error::Domain(_) => QtsimStatus::InvalidArgument,
        Error::Capacity { .. } => QtsimStatus::Capacity,
        Error::Protocol(_) => QtsimStatus::Protocol,
        Error::Config(_) => QtsimStatus::Config,
        Error::Io { .. } => QtsimStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> QtsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            QtsimStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            QtsimStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)).into());
            return QtsimStatus::NullPointer;
        })+
    };
}

fn boxed(s: StateVector) -> *mut QtsimState {
    Box::into_raw(Box::new(QtsimState { inner: s }))
}

fn pauli(p: QtsimPauli) -> PauliError {
    match p {
        QtsimPauli::I => PauliError::I,
        QtsimPauli::X => PauliError::X,
        QtsimPauli::Y => PauliError::Y,
        QtsimPauli::Z => PauliError::Z,
    }
}

/// NUL-terminated version string with static lifetime.
#[no_mangle]
pub extern "C" fn qtsim_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version has interior NUL"),
    };
    V.as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qtsim_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: caller guarantees `len` writable bytes at `buf`.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// `|0…0⟩` on `n_qubits` qubits.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtsim_state_new(n_qubits: u32, out: *mut *mut QtsimState) -> QtsimStatus {
    non_null!(out);
    guard(|| {
        let s = StateVector::zeros(n_qubits as usize)?;
        // SAFETY: checked non-null above.
        unsafe { *out = boxed(s) };
        Ok(())
    })
}

/// State from `len` amplitudes; `len` must be a power of two and the vector
/// normalized.
///
/// # Safety
/// `amps` must point to `len` readable values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qtsim_state_from_amplitudes(
    amps: *const QtsimComplex,
    len: usize,
    out: *mut *mut QtsimState,
) -> QtsimStatus {
    non_null!(amps, out);
    guard(|| {
        // SAFETY: caller guarantees `len` readable values.
        let src = unsafe { std::slice::from_raw_parts(amps, len) };
        let s = StateVector::from_amplitudes(src.iter().map(|c| Complex64::new(c.re, c.im)).collect())?;
        unsafe { *out = boxed(s) };
        Ok(())
    })
}

/// Bell state `β_{phase,parity}`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtsim_make_bell(phase_bit: u8, parity_bit: u8, out: *mut *mut QtsimState) -> QtsimStatus {
    non_null!(out);
    guard(|| {
        if phase_bit > 1 || parity_bit > 1 {
            return Err(Error::domain("Bell indices are single bits"));
        }
        unsafe { *out = boxed(make_bell(BellKind::new(phase_bit, parity_bit))) };
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qtsim_state_free(state: *mut QtsimState) {
    if !state.is_null() {
        // SAFETY: caller passes a live handle created by `boxed`.
        drop(unsafe { Box::from_raw(state) });
    }
}

/// # Safety
/// `state` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qtsim_state_n_qubits(state: *const QtsimState, out: *mut u32) -> QtsimStatus {
    non_null!(state, out);
    guard(|| {
        unsafe { *out = (*state).inner.n_qubits() as u32 };
        Ok(())
    })
}

/// Applies `gate` to `qubit` (and `target` for CNOT).
///
/// # Safety
/// `state` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn qtsim_state_apply(
    state: *mut QtsimState,
    gate: QtsimGate,
    qubit: u32,
    target: u32,
) -> QtsimStatus {
    non_null!(state);
    guard(|| {
        let q = qubit as usize;
        let g = match gate {
            QtsimGate::H => Gate::H(q),
            QtsimGate::X => Gate::X(q),
            QtsimGate::Y => Gate::Y(q),
            QtsimGate::Z => Gate::Z(q),
            QtsimGate::Cnot => Gate::Cnot {
                control: q,
                target: target as usize,
            },
        };
        unsafe { (*state).inner.apply(g) }
    })
}

/// Copies the amplitudes into `buf`, which must hold exactly `2^n` values.
///
/// # Safety
/// `state` must be valid and `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn qtsim_state_amplitudes(
    state: *const QtsimState,
    buf: *mut QtsimComplex,
    len: usize,
) -> QtsimStatus {
    non_null!(state, buf);
    guard(|| {
        let amps = unsafe { (*state).inner.amplitudes() };
        if len != amps.len() {
            return Err(Error::domain(format!("buffer holds {len} values, state has {}", amps.len())));
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(buf, len) };
        for (d, a) in dst.iter_mut().zip(amps) {
            *d = QtsimComplex { re: a.re, im: a.im };
        }
        Ok(())
    })
}

/// Measures `qubit` in place; the random draw comes from stream
/// `(seed, stream)`.
///
/// # Safety
/// `state` and `out_bit` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qtsim_state_measure(
    state: *mut QtsimState,
    qubit: u32,
    seed: u64,
    stream: u64,
    out_bit: *mut u8,
) -> QtsimStatus {
    non_null!(state, out_bit);
    guard(|| {
        let mut rng = stream_rng(seed, stream);
        let bit = unsafe { (*state).inner.measure(qubit as usize, &mut rng)? };
        unsafe { *out_bit = bit };
        Ok(())
    })
}

/// `|⟨a|b⟩|²`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qtsim_state_fidelity(
    a: *const QtsimState,
    b: *const QtsimState,
    out: *mut f64,
) -> QtsimStatus {
    non_null!(a, b, out);
    guard(|| {
        let f = unsafe { fidelity(&(*a).inner, &(*b).inner)? };
        unsafe { *out = f };
        Ok(())
    })
}

/// Teleports the single-qubit `input` over a `β00` pair whose receiver half
/// carries `pair_error`, XORing `flip_m1`/`flip_m2` onto the measurement bits
/// in transit. Writes the received state and its fidelity to the input.
///
/// # Safety
/// `input` must be valid; `out_state` and `out_fidelity` may be null.
#[no_mangle]
pub unsafe extern "C" fn qtsim_teleport_once(
    input: *const QtsimState,
    flip_m1: u8,
    flip_m2: u8,
    pair_error: QtsimPauli,
    seed: u64,
    out_state: *mut *mut QtsimState,
    out_fidelity: *mut f64,
) -> QtsimStatus {
    non_null!(input);
    guard(|| {
        let mut rng = stream_rng(seed, 0);
        let r = teleport_once(
            unsafe { &(*input).inner },
            BellOutcome::new(flip_m1 & 1, flip_m2 & 1),
            pauli(pair_error),
            &mut rng,
        )?;
        if !out_fidelity.is_null() {
            unsafe { *out_fidelity = r.fidelity_to_input };
        }
        if !out_state.is_null() {
            unsafe { *out_state = boxed(r.receiver_state) };
        }
        Ok(())
    })
}

/// Exact probability that a Shor-decoded block carries a logical error at
/// total depolarization `p_eq`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtsim_shor_logical_rate(p_eq: f64, out: *mut f64) -> QtsimStatus {
    non_null!(out);
    guard(|| {
        let r = exact_logical_rate(DepolarizingParams::from_total(p_eq)?);
        unsafe { *out = r };
        Ok(())
    })
}

/// Detection threshold for `m_virtual` virtual pairs at channel `p_eq`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtsim_choose_threshold(p_eq: f64, m_virtual: u32, shor: bool, out: *mut f64) -> QtsimStatus {
    non_null!(out);
    guard(|| {
        let t = choose_threshold(DepolarizingParams::from_total(p_eq)?, m_virtual as usize, shor)?;
        unsafe { *out = t };
        Ok(())
    })
}

/// Defaults: 16 real and 100 virtual pairs, `p_eq = 0.005`, Shor on, ideal
/// link, automatic threshold, three retries.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qtsim_qsdc_default_params(out: *mut QtsimQsdcParams) -> QtsimStatus {
    non_null!(out);
    guard(|| {
        unsafe {
            *out = QtsimQsdcParams {
                n_pairs: 16,
                m_virtual: 100,
                p_eq: 0.005,
                eve: QtsimEve::None,
                eve_param: 0.0,
                shor: true,
                link: QtsimLink::Ideal,
                snr_db: 10.0,
                forced_ber: 0.0,
                threshold: 0.0,
                max_retries: 3,
                seed: 1,
                session_id: 0,
            }
        };
        Ok(())
    })
}

fn qsdc_config(p: &QtsimQsdcParams) -> Result<QsdcConfig, Error> {
    let eve = match p.eve {
        QtsimEve::None => EveModel::None,
        QtsimEve::Swap => EveModel::Swap {
            intercept_fraction: p.eve_param,
        },
        QtsimEve::Boost => EveModel::DepolarizeBoost { delta_pe: p.eve_param },
    };
    let link = match p.link {
        QtsimLink::Ideal => ClassicalLink::Ideal,
        QtsimLink::BitFlip => ClassicalLink::bit_flip(p.forced_ber)?,
        QtsimLink::Uncoded => ClassicalLink::qpsk(None, Fading::default(), p.snr_db)?,
        QtsimLink::Turbo => ClassicalLink::qpsk(Some(TurboConfig::default()), Fading::default(), p.snr_db)?,
    };
    let cfg = QsdcConfig {
        n_pairs: p.n_pairs as usize,
        m_virtual: p.m_virtual as usize,
        threshold: if p.threshold > 0.0 {
            ThresholdRule::Fixed(p.threshold)
        } else {
            ThresholdRule::Auto
        },
        depol: DepolarizingParams::from_total(p.p_eq)?,
        eve,
        shor: p.shor,
        link,
        seed: p.seed,
        max_retries: p.max_retries,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one detection session and, if accepted, teleports `n_pairs` probe
/// qubits.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qtsim_qsdc_run(params: *const QtsimQsdcParams, out: *mut QtsimQsdcReport) -> QtsimStatus {
    non_null!(params, out);
    guard(|| {
        let p = unsafe { *params };
        let cfg = qsdc_config(&p)?;
        let (r, _) = run_session(&cfg, &default_payload(cfg.n_pairs), p.session_id)?;
        let report = QtsimQsdcReport {
            accepted: r.decision == Decision::Accept,
            virtual_qber: r.virtual_qber,
            virtual_errors: r.virtual_errors as u32,
            m_virtual: r.m_virtual as u32,
            threshold: r.threshold,
            has_payload: r.payload_qber.is_some(),
            payload_qber: r.payload_qber.map_or(0.0, |m| m.rate()),
            classical_ber: r.classical_ber.map_or(0.0, |m| m.rate()),
            eve_present: r.eve_present_truth,
            attempts: r.attempts,
        };
        unsafe { *out = report };
        Ok(())
    })
}
