//! Fast exact invariant checks run by `qtsim selftest`.

use std::time::Instant;

use crate::cchannel::{hard_decisions, send_bits, Fading};
use crate::qchannel::{DepolarizingParams, EveModel, PauliError};
use crate::qsdc::{run_session, Decision, QsdcConfig};
use crate::qstate::{fidelity, make_bell, BellKind};
use crate::rng::stream_rng;
use crate::shor::{exact_logical_rate, frame_decode, state_vector_classify, PauliPattern, BLOCK_SIZE};
use crate::sweep::random_qubit;
use crate::teleport::{probe_state, teleport_once, BellOutcome};
use crate::turbo::{TurboCodec, TurboConfig};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

type Check = fn() -> std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn noiseless_teleportation() -> std::result::Result<String, String> {
    let mut rng = stream_rng(0x5e1f, 0);
    let n = 2000;
    for i in 0..n {
        let psi = random_qubit(&mut rng);
        let r = teleport_once(&psi, BellOutcome::new(0, 0), PauliError::I, &mut rng).map_err(|e| e.to_string())?;
        ensure(!r.is_error(), || format!("trial {i}: fidelity {}", r.fidelity_to_input))?;
    }
    Ok(format!("{n} random states exact"))
}

fn correction_table() -> std::result::Result<String, String> {
    // A flip of m2 leaves X on the output, a flip of m1 leaves Z.
    let mut rng = stream_rng(0x5e1f, 1);
    let psi = probe_state();
    for (flip, pauli) in [
        (BellOutcome::new(0, 1), PauliError::X),
        (BellOutcome::new(1, 0), PauliError::Z),
        (BellOutcome::new(1, 1), PauliError::Y),
    ] {
        let r = teleport_once(&psi, flip, PauliError::I, &mut rng).map_err(|e| e.to_string())?;
        let mut expect = psi.clone();
        crate::qchannel::apply_pauli(&mut expect, 0, pauli).map_err(|e| e.to_string())?;
        let f = fidelity(&expect, &r.receiver_state).map_err(|e| e.to_string())?;
        ensure((f - 1.0).abs() < 1e-9, || format!("bit error {flip:?} did not leave {pauli}"))?;
    }
    Ok("bit errors map to Paulis".into())
}

fn shor_single_errors() -> std::result::Result<String, String> {
    let mut rng = stream_rng(0x5e1f, 2);
    let mut patterns = vec![PauliPattern::identity()];
    for q in 0..BLOCK_SIZE {
        for p in [PauliError::X, PauliError::Y, PauliError::Z] {
            patterns.push(PauliPattern::single(q, p));
        }
    }
    for p in &patterns {
        let sv = state_vector_classify(p, &mut rng).map_err(|e| e.to_string())?;
        ensure(!sv.is_logical_error(), || format!("{p:?} left {:?}", sv.logical_error))?;
        ensure(!frame_decode(p).is_logical_error(), || format!("frame decode fails {p:?}"))?;
    }
    Ok(format!("{} patterns corrected", patterns.len()))
}

fn shor_paths_agree() -> std::result::Result<String, String> {
    let mut rng = stream_rng(0x5e1f, 3);
    let params = DepolarizingParams::from_total(0.3).expect("valid");
    let n = 300;
    for _ in 0..n {
        let p = PauliPattern::sample(params, &mut rng);
        let sv = state_vector_classify(&p, &mut rng).map_err(|e| e.to_string())?;
        let fr = frame_decode(&p);
        ensure(sv.logical_error == fr.logical_error && sv.syndrome == fr.syndrome, || {
            format!("{p:?}: state vector {sv:?} vs frame {fr:?}")
        })?;
    }
    Ok(format!("{n} random patterns agree"))
}

fn shor_rate_endpoints() -> std::result::Result<String, String> {
    let zero = exact_logical_rate(DepolarizingParams::NOISELESS);
    let one = exact_logical_rate(DepolarizingParams::from_total(1.0).expect("valid"));
    ensure(zero == 0.0, || format!("rate at 0 is {zero}"))?;
    ensure((0.0..=1.0).contains(&one), || format!("rate at 1 is {one}"))?;
    Ok("exact rate bounded".into())
}

fn classical_noiseless() -> std::result::Result<String, String> {
    let mut rng = stream_rng(0x5e1f, 4);
    let bits: Vec<u8> = (0..2048).map(|i| ((i * 37 + i / 5) % 2) as u8).collect();
    let llrs = send_bits(&bits, &Fading::default(), f64::INFINITY, &mut rng).map_err(|e| e.to_string())?;
    ensure(hard_decisions(&llrs.llrs) == bits, || "QPSK is not transparent".into())?;
    let codec = TurboCodec::new(TurboConfig::default()).map_err(|e| e.to_string())?;
    let info = &bits[..1024];
    let out = crate::link::send_turbo_block(&codec, info, &Fading::default(), f64::INFINITY, &mut rng)
        .map_err(|e| e.to_string())?;
    ensure(out == info, || "turbo block is not transparent".into())?;
    Ok("QPSK and turbo transparent without noise".into())
}

fn virtual_pairs() -> std::result::Result<String, String> {
    let clean = QsdcConfig {
        n_pairs: 4,
        m_virtual: 100,
        depol: DepolarizingParams::NOISELESS,
        max_retries: 0,
        ..Default::default()
    };
    let (r, _) = run_session(&clean, &[], 0).map_err(|e| e.to_string())?;
    ensure(r.virtual_errors == 0 && r.decision == Decision::Accept, || format!("clean session {r:?}"))?;
    let attacked = QsdcConfig {
        eve: EveModel::Swap { intercept_fraction: 1.0 },
        ..clean
    };
    let (r, _) = run_session(&attacked, &[], 0).map_err(|e| e.to_string())?;
    ensure(r.decision == Decision::Abort, || format!("swap attack accepted: {r:?}"))?;
    Ok(format!("clean accepted, swap aborted at qber {}", r.virtual_qber))
}

fn bell_states() -> std::result::Result<String, String> {
    for a in BellKind::ALL {
        for b in BellKind::ALL {
            let f = fidelity(&make_bell(a), &make_bell(b)).map_err(|e| e.to_string())?;
            let expect = if a == b { 1.0 } else { 0.0 };
            ensure((f - expect).abs() < 1e-12, || format!("{a:?}/{b:?} overlap {f}"))?;
        }
    }
    Ok("Bell basis orthonormal".into())
}

const CHECKS: [(&str, Check); 8] = [
    ("bell_basis", bell_states),
    ("noiseless_teleportation", noiseless_teleportation),
    ("correction_table", correction_table),
    ("shor_single_errors", shor_single_errors),
    ("shor_paths_agree", shor_paths_agree),
    ("shor_rate_endpoints", shor_rate_endpoints),
    ("classical_noiseless", classical_noiseless),
    ("virtual_pairs", virtual_pairs),
];

pub fn run_selftest() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for r in super::run_selftest() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
