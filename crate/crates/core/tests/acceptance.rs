//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use qtsim::cchannel::{Coherence, Fading, RicianParams};
use qtsim::config::{RunConfig, SweepKind};
use qtsim::link::ClassicalLink;
use qtsim::metrics::MetricAccumulator;
use qtsim::qchannel::{eve_entanglement_swap, DepolarizingParams, EveModel, PauliError};
use qtsim::qsdc::{run_session, Decision, QsdcConfig};
use qtsim::qstate::{make_bell, BellKind, StateVector};
use qtsim::rng::stream_rng;
use qtsim::shor::{count_logical_errors, exact_logical_rate, frame_decode, state_vector_classify, PauliPattern};
use qtsim::sweep::{random_qubit, run_sweep, run_sweep_with_threads, teleport_batch, write_csv, SweepSpec};
use qtsim::teleport::{probe_state, teleport_once, BellOutcome};
use qtsim::turbo::TurboConfig;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within_4sigma(measured: &MetricAccumulator, expect: f64) -> bool {
    let sigma = (expect * (1.0 - expect) / measured.n_total as f64).sqrt();
    (measured.rate() - expect).abs() <= 4.0 * sigma
}

/// 1. Noiseless teleportation is exact for 10^4 random states.
fn noiseless_exactness() -> Outcome {
    let mut rng = stream_rng(1001, 0);
    let mut qber = MetricAccumulator::default();
    let mut worst: f64 = 1.0;
    for _ in 0..10_000 {
        let psi = random_qubit(&mut rng);
        let r = teleport_once(&psi, BellOutcome::new(0, 0), PauliError::I, &mut rng).map_err(|e| e.to_string())?;
        worst = worst.min(r.fidelity_to_input);
        qber.record(r.is_error());
    }
    check(
        qber.n_error == 0 && worst >= 1.0 - 1e-9,
        format!("QBER {} over {} trials, min fidelity {worst:.15}", qber.rate(), qber.n_total),
    )
}

/// 2. With a clean quantum channel and i.i.d. bit flips at `b`,
/// `b <= QBER <= 2b` within 4 sigma.
fn qber_ber_bound() -> Outcome {
    let n = 100_000u64;
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, b) in [1e-3, 1e-2, 5e-2].into_iter().enumerate() {
        let link = ClassicalLink::bit_flip(b).map_err(|e| e.to_string())?;
        let mut qber = MetricAccumulator::default();
        let mut ber = MetricAccumulator::default();
        for chunk in 0..(n / 1000) {
            let mut rng = stream_rng(1002, ((i as u64) << 32) | chunk);
            let (bb, q) = teleport_batch(1000, DepolarizingParams::NOISELESS, &link, |_| probe_state(), &mut rng)
                .map_err(|e| e.to_string())?;
            qber += q;
            ber += bb;
        }
        let sigma = qber.sigma().max((b / n as f64).sqrt());
        let q = qber.rate();
        ok &= q <= 2.0 * b + 4.0 * sigma && q >= b - 4.0 * sigma;
        parts.push(format!(
            "b={b}: QBER {q:.5} vs [{b}, {}] +- 4 sigma {:.1e} (BER {:.5})",
            2.0 * b,
            4.0 * sigma,
            ber.rate()
        ));
    }
    check(ok, parts.join("; "))
}

/// 3. Turbo-coded link with negligible classical BER: QBER within 15% of P_eq.
fn error_floor() -> Outcome {
    let snr = 6.0;
    let turbo = ClassicalLink::qpsk(Some(TurboConfig::default()), Fading::default(), snr).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, (p, n)) in [(0.1, 100_000u64), (0.01, 200_000), (0.001, 1_000_000)].into_iter().enumerate() {
        let depol = DepolarizingParams::from_total(p).map_err(|e| e.to_string())?;
        let mut qber = MetricAccumulator::default();
        let mut ber = MetricAccumulator::default();
        for chunk in 0..n / 512 {
            let mut rng = stream_rng(1003, ((i as u64) << 32) | chunk);
            let (b, q) = teleport_batch(512, depol, &turbo, |_| probe_state(), &mut rng).map_err(|e| e.to_string())?;
            qber += q;
            ber += b;
        }
        let rel = (qber.rate() - p).abs() / p;
        ok &= rel <= 0.15 && ber.rate() < 1e-6;
        parts.push(format!(
            "P_eq={p}: QBER {:.5} ({:+.1}%), BER {:.1e} over {} bits",
            qber.rate(),
            100.0 * (qber.rate() - p) / p,
            ber.rate(),
            ber.n_total
        ));
    }
    check(ok, format!("Es/N0 {snr} dB; {}", parts.join("; ")))
}

/// 4. Turbo beats uncoded wherever uncoded BER is in [1e-4, 1e-1], and the
/// coded curve drops two decades within 2 dB somewhere.
fn coding_gain() -> Outcome {
    let mut cfg = RunConfig {
        kind: SweepKind::ClassicalBer,
        snr_db: vec![
            -3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0,
        ],
        trials: 200,
        seed: 1004,
        ..Default::default()
    };
    cfg.fading = Fading::Rician(RicianParams::default(), Coherence::PerSymbol);
    let rows = run_sweep(&SweepSpec::new(cfg)).map_err(|e| e.to_string())?;
    let curve = |variant: &str| -> Vec<(f64, MetricAccumulator)> {
        rows.iter()
            .filter(|r| r.variant == variant)
            .map(|r| (r.snr_db.unwrap(), r.ber.unwrap()))
            .collect()
    };
    let (uncoded, coded) = (curve("uncoded"), curve("turbo"));
    let mut gain_ok = true;
    let mut compared = 0;
    for ((s, u), (_, c)) in uncoded.iter().zip(&coded) {
        if (1e-4..=1e-1).contains(&u.rate()) {
            compared += 1;
            if c.rate() >= u.rate() {
                gain_ok = false;
            }
            let _ = s;
        }
    }
    // Waterfall: BER at s1 and Wilson upper bound at s2 <= s1 + 2 dB differ
    // by at least 100x.
    let mut waterfall = None;
    for (i, (s1, c1)) in coded.iter().enumerate() {
        for (s2, c2) in &coded[i + 1..] {
            if s2 - s1 <= 2.0 + 1e-9 && c1.rate() > 0.0 && c2.wilson_ci95().1 * 100.0 <= c1.rate() {
                waterfall.get_or_insert((*s1, c1.rate(), *s2, c2.rate()));
            }
        }
    }
    let wf = waterfall
        .map(|(a, ba, b, bb)| format!("waterfall {ba:.2e} at {a} dB -> {bb:.2e} at {b} dB"))
        .unwrap_or_else(|| "no waterfall found".into());
    check(
        gain_ok && compared > 0 && waterfall.is_some(),
        format!("coded < uncoded at all {compared} comparable points: {gain_ok}; {wf}"),
    )
}

/// 5. Every Pauli pattern of weight <= 1 decodes without logical error.
fn shor_exhaustive() -> Outcome {
    let mut rng = stream_rng(1005, 0);
    let mut patterns = vec![PauliPattern::identity()];
    for q in 0..9 {
        for p in [PauliError::X, PauliError::Y, PauliError::Z] {
            patterns.push(PauliPattern::single(q, p));
        }
    }
    let mut failures = 0;
    for p in &patterns {
        let sv = state_vector_classify(p, &mut rng).map_err(|e| e.to_string())?;
        failures += usize::from(sv.is_logical_error() || frame_decode(p).is_logical_error());
    }
    check(
        patterns.len() == 28 && failures == 0,
        format!("{} patterns, {failures} logical errors", patterns.len()),
    )
}

/// 6. Operating points of the Shor curve and Monte Carlo agreement.
fn shor_operating_points() -> Outcome {
    let at = |p: f64| DepolarizingParams::from_total(p).expect("valid");
    let low = exact_logical_rate(at(0.005));
    let high = exact_logical_rate(at(0.105));
    let low_ok = (0.5e-4..=2e-4).contains(&low);
    let high_ok = (0.1213 / 1.5..=0.1213 * 1.5).contains(&high);
    let trials = 10_000_000u64;
    let mut mc = Vec::new();
    let mut mc_ok = true;
    for (i, p) in [0.005, 0.105].into_iter().enumerate() {
        let exact = exact_logical_rate(at(p));
        let m = MetricAccumulator::new(count_logical_errors(at(p), trials, 1006 + i as u64), trials);
        mc_ok &= within_4sigma(&m, exact);
        mc.push(format!("MC {:.4e} vs exact {exact:.4e} at {p}", m.rate()));
    }
    check(
        low_ok && high_ok && mc_ok,
        format!(
            "P_e=0.005 -> {low:.3e} (target 1e-4 within 2x: {low_ok}); P_e=0.105 -> {high:.4} (target 0.1213 within 1.5x: {high_ok}); {}",
            mc.join(", ")
        ),
    )
}

/// 7. Detection power over 500 sessions with m = 100 at P_e = 0.005.
fn eavesdropper_detection() -> Outcome {
    let base = QsdcConfig {
        n_pairs: 0,
        m_virtual: 100,
        depol: DepolarizingParams::from_total(0.005).expect("valid"),
        max_retries: 0,
        seed: 1007,
        ..Default::default()
    };
    let sessions = 500u64;
    let run = |cfg: &QsdcConfig| -> Result<(MetricAccumulator, MetricAccumulator), String> {
        let mut aborts = MetricAccumulator::default();
        let mut virt = MetricAccumulator::default();
        for s in 0..sessions {
            let (r, _) = run_session(cfg, &[], s).map_err(|e| e.to_string())?;
            aborts.record(r.decision == Decision::Abort);
            virt += MetricAccumulator::new(r.virtual_errors as u64, r.m_virtual as u64);
        }
        Ok((aborts, virt))
    };
    let (clean_aborts, _) = run(&base)?;
    let (boost_aborts, _) = run(&QsdcConfig {
        eve: EveModel::DepolarizeBoost { delta_pe: 0.10 },
        seed: 1008,
        ..base.clone()
    })?;
    let (swap_aborts, swap_virt) = run(&QsdcConfig {
        eve: EveModel::Swap { intercept_fraction: 1.0 },
        seed: 1009,
        ..base.clone()
    })?;
    let false_abort = clean_aborts.rate();
    let missed_boost = 1.0 - boost_aborts.rate();
    let ok = false_abort < 0.01
        && missed_boost < 0.01
        && (swap_virt.rate() - 0.5).abs() <= 0.02
        && swap_aborts.n_error == swap_aborts.n_total;
    check(
        ok,
        format!(
            "threshold {}; false-abort {false_abort:.4}; boost missed {missed_boost:.4}; swap QBER {:.4}, detected {}/{}",
            base.resolved_threshold().map_err(|e| e.to_string())?,
            swap_virt.rate(),
            swap_aborts.n_error,
            swap_aborts.n_total
        ),
    )
}

fn joint_counts(pairs: impl Iterator<Item = (u8, u8)>) -> [[f64; 2]; 2] {
    let mut t = [[0.0; 2]; 2];
    for (a, b) in pairs {
        t[a as usize][b as usize] += 1.0;
    }
    t
}

fn chi2_independence(t: &[[f64; 2]; 2]) -> f64 {
    let n: f64 = t.iter().flatten().sum();
    let rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
    let cols = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
    let mut x2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / n;
            x2 += (t[i][j] - e).powi(2) / e;
        }
    }
    x2
}

/// 8. After the swap attack sender and receiver bits are independent;
/// without it they always agree.
fn entanglement_collapse() -> Outcome {
    let n = 100_000u64;
    let bell = make_bell(BellKind::PHI_PLUS);
    let mut rng = stream_rng(1010, 0);
    let measure = |s: &mut StateVector, rng: &mut _| -> (u8, u8) {
        let a = s.measure(0, rng).expect("2 qubits");
        let b = s.measure(1, rng).expect("2 qubits");
        (a, b)
    };
    let attacked: Vec<(u8, u8)> = (0..n)
        .map(|_| {
            let (mut s, _) = eve_entanglement_swap(&bell, &mut rng).expect("2 qubits");
            measure(&mut s, &mut rng)
        })
        .collect();
    let clean: Vec<(u8, u8)> = (0..n)
        .map(|_| {
            let mut s = bell.clone();
            measure(&mut s, &mut rng)
        })
        .collect();
    let table = joint_counts(attacked.into_iter());
    let x2 = chi2_independence(&table);
    let p_value = 1.0 - ChiSquared::new(1.0).expect("dof").cdf(x2);
    let agree = clean.iter().filter(|(a, b)| a == b).count() as u64;
    check(
        p_value > 0.001 && agree == n,
        format!("attacked chi2 {x2:.3} (p = {p_value:.3}); clean agreement {agree}/{n}"),
    )
}

/// 9. Identical sweeps on 1 and 4 threads produce identical CSV bytes.
fn determinism() -> Outcome {
    let mut outputs = Vec::new();
    for kind in [SweepKind::ClassicalBer, SweepKind::QberVsSnr, SweepKind::ShorCurve, SweepKind::QsdcBatch] {
        let cfg = RunConfig {
            kind,
            snr_db: vec![-1.0, 4.0],
            p_eq: vec![0.05, 0.0],
            trials: 24,
            seed: 7,
            n_pairs: 4,
            m_virtual: 20,
            turbo_cfg: TurboConfig {
                block_length: 256,
                ..Default::default()
            },
            ..Default::default()
        };
        let spec = SweepSpec::new(cfg);
        let mut bytes = Vec::new();
        for threads in [1, 4] {
            let rows = run_sweep_with_threads(&spec, threads).map_err(|e| e.to_string())?;
            let mut buf = Vec::new();
            write_csv(&mut buf, &spec.cfg, &rows).map_err(|e| e.to_string())?;
            bytes.push(buf);
        }
        outputs.push((kind, bytes[0] == bytes[1], bytes[0].len()));
    }
    check(
        outputs.iter().all(|o| o.1),
        outputs
            .iter()
            .map(|(k, same, len)| format!("{k}: {} ({len} bytes)", if *same { "identical" } else { "DIFFERENT" }))
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("noiseless teleportation exactness", noiseless_exactness),
        ("QBER bounded by BER and 2 BER", qber_ber_bound),
        ("QBER error floor at P_eq", error_floor),
        ("turbo coding gain and waterfall", coding_gain),
        ("Shor exhaustive single-error correction", shor_exhaustive),
        ("Shor curve operating points", shor_operating_points),
        ("eavesdropper detection", eavesdropper_detection),
        ("entanglement collapse under swap attack", entanglement_collapse),
        ("sweep determinism across thread counts", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|x| *x == id || name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS criterion {id} ({name}) [{secs:.1}s]: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}) [{secs:.1}s]: {d}");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
