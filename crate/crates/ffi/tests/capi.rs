use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use qtsim_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { qtsim_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn amplitudes(s: *const QtsimState, n: usize) -> Vec<QtsimComplex> {
    let mut buf = vec![QtsimComplex::default(); n];
    assert_eq!(unsafe { qtsim_state_amplitudes(s, buf.as_mut_ptr(), n) }, QtsimStatus::Ok);
    buf
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(qtsim_version()) }.to_str().unwrap();
    assert_eq!(v, qtsim::VERSION);
}

#[test]
fn build_bell_by_gates() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(qtsim_state_new(2, &mut s), QtsimStatus::Ok);
        assert_eq!(qtsim_state_apply(s, QtsimGate::H, 0, 0), QtsimStatus::Ok);
        assert_eq!(qtsim_state_apply(s, QtsimGate::Cnot, 0, 1), QtsimStatus::Ok);
    }
    let mut bell = ptr::null_mut();
    let mut f = 0.0;
    unsafe {
        assert_eq!(qtsim_make_bell(0, 0, &mut bell), QtsimStatus::Ok);
        assert_eq!(qtsim_state_fidelity(s, bell, &mut f), QtsimStatus::Ok);
    }
    assert!((f - 1.0).abs() < 1e-12);
    let a = amplitudes(s, 4);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((a[0].re - r).abs() < 1e-12 && (a[3].re - r).abs() < 1e-12);
    assert!(a[1].re.abs() < 1e-12 && a[2].re.abs() < 1e-12);

    let mut n = 0;
    unsafe {
        assert_eq!(qtsim_state_n_qubits(s, &mut n), QtsimStatus::Ok);
        qtsim_state_free(s);
        qtsim_state_free(bell);
        qtsim_state_free(ptr::null_mut());
    }
    assert_eq!(n, 2);
}

#[test]
fn errors_map_to_status_codes() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(qtsim_state_new(17, &mut s), QtsimStatus::Capacity);
        assert!(last_error().contains("17"));
        assert_eq!(qtsim_state_new(1, ptr::null_mut()), QtsimStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(qtsim_state_new(1, &mut s), QtsimStatus::Ok);
        assert_eq!(last_error(), "");
        assert_eq!(qtsim_state_apply(s, QtsimGate::X, 3, 0), QtsimStatus::InvalidArgument);
        let mut small = [QtsimComplex::default(); 1];
        assert_eq!(qtsim_state_amplitudes(s, small.as_mut_ptr(), 1), QtsimStatus::InvalidArgument);
        qtsim_state_free(s);
        let bad = [QtsimComplex { re: 1.0, im: 0.0 }, QtsimComplex { re: 1.0, im: 0.0 }];
        assert_eq!(
            qtsim_state_from_amplitudes(bad.as_ptr(), 2, &mut s),
            QtsimStatus::InvalidArgument
        );
        let mut x = 0.0;
        assert_eq!(qtsim_shor_logical_rate(1.5, &mut x), QtsimStatus::InvalidArgument);
        assert_eq!(qtsim_make_bell(2, 0, &mut s), QtsimStatus::InvalidArgument);
    }
}

#[test]
fn last_error_truncates() {
    let mut s = ptr::null_mut();
    unsafe { qtsim_state_new(40, &mut s) };
    let full = unsafe { qtsim_last_error(ptr::null_mut(), 0) };
    let mut buf = [0x7f as std::ffi::c_char; 8];
    assert_eq!(unsafe { qtsim_last_error(buf.as_mut_ptr(), buf.len()) }, full);
    assert_eq!(buf[7], 0);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes().len(), 7);
}

#[test]
fn measurement_is_seeded() {
    let bits: Vec<u8> = (0..2)
        .map(|_| {
            let mut s = ptr::null_mut();
            let mut bit = 9;
            unsafe {
                qtsim_make_bell(0, 0, &mut s);
                assert_eq!(qtsim_state_measure(s, 0, 42, 7, &mut bit), QtsimStatus::Ok);
                qtsim_state_free(s);
            }
            bit
        })
        .collect();
    assert_eq!(bits[0], bits[1]);
    assert!(bits[0] <= 1);
}

#[test]
fn teleport_round_trip() {
    let amps = [QtsimComplex { re: 0.6, im: 0.0 }, QtsimComplex { re: 0.0, im: 0.8 }];
    let mut psi = ptr::null_mut();
    let mut out = ptr::null_mut();
    let mut f = 0.0;
    unsafe {
        assert_eq!(qtsim_state_from_amplitudes(amps.as_ptr(), 2, &mut psi), QtsimStatus::Ok);
        assert_eq!(
            qtsim_teleport_once(psi, 0, 0, QtsimPauli::I, 3, &mut out, &mut f),
            QtsimStatus::Ok
        );
    }
    assert!((f - 1.0).abs() < 1e-9);
    // A flipped m2 leaves X on the output: |⟨ψ|X|ψ⟩|² = 0 for this state.
    unsafe {
        assert_eq!(
            qtsim_teleport_once(psi, 0, 1, QtsimPauli::I, 3, ptr::null_mut(), &mut f),
            QtsimStatus::Ok
        );
        qtsim_state_free(psi);
        qtsim_state_free(out);
    }
    assert!(f.abs() < 1e-12);
}

#[test]
fn shor_and_threshold() {
    let (mut rate, mut t) = (0.0, 0.0);
    unsafe {
        assert_eq!(qtsim_shor_logical_rate(0.0, &mut rate), QtsimStatus::Ok);
        assert_eq!(rate, 0.0);
        assert_eq!(qtsim_choose_threshold(0.005, 100, true, &mut t), QtsimStatus::Ok);
    }
    assert_eq!(t, 0.01);
}

#[test]
fn qsdc_sessions() {
    let mut p = unsafe { std::mem::zeroed::<QtsimQsdcParams>() };
    let mut r = QtsimQsdcReport::default();
    unsafe {
        assert_eq!(qtsim_qsdc_default_params(&mut p), QtsimStatus::Ok);
        p.p_eq = 0.0;
        assert_eq!(qtsim_qsdc_run(&p, &mut r), QtsimStatus::Ok);
    }
    assert!(r.accepted && r.has_payload);
    assert_eq!(r.payload_qber, 0.0);
    assert_eq!(r.attempts, 1);

    p.eve = QtsimEve::Swap;
    p.eve_param = 1.0;
    p.max_retries = 0;
    unsafe { assert_eq!(qtsim_qsdc_run(&p, &mut r), QtsimStatus::Ok) };
    assert!(!r.accepted && !r.has_payload && r.eve_present);
    assert!(r.virtual_qber > 0.3);

    p.eve = QtsimEve::Boost;
    p.eve_param = 0.01;
    unsafe { assert_eq!(qtsim_qsdc_run(&p, &mut r), QtsimStatus::Config) };

    p.eve = QtsimEve::None;
    p.link = QtsimLink::Turbo;
    p.snr_db = 10.0;
    unsafe { assert_eq!(qtsim_qsdc_run(&p, &mut r), QtsimStatus::Ok) };
    assert!(r.accepted && r.classical_ber == 0.0);
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qtsim.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["qtsim_state_new", "qtsim_qsdc_run", "QTSIM_STATUS_PANIC", "typedef struct QtsimState QtsimState"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    // Compile check only where a C compiler is installed.
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        return;
    };
    assert!(status.success());
}
