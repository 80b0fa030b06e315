//! Virtual-pair eavesdropper detection and payload teleportation.
//!
//! A session distributes `n` real pairs in `β00` and `m` virtual pairs in
//! `β01` at secret positions, carries the receiver halves through the
//! (optionally Shor-protected) quantum channel, compares computational-basis
//! outcomes on the virtual pairs, and only after acceptance teleports payload
//! qubits over the real pairs with the measurement bits on the classical link.
//!
//! Phases advance `Distributed → Decoded → Verified | Aborted → Completed`.
//! A payload can only be sent from `Verified`.

use rand::seq::index;
use rand::Rng;
use std::time::{Duration, Instant};

use crate::link::ClassicalLink;
use crate::metrics::MetricAccumulator;
use crate::qchannel::{
    depolarize_qubit, effective_params, eve_entanglement_swap, DepolarizingParams, EveModel, PauliError,
    MIN_EVE_BOOST,
};
use crate::qstate::{fidelity, make_bell, BellKind, StateVector};
use crate::rng::stream_rng;
use crate::shor::{exact_logical_rate, shor_decode, shor_encode};
use crate::teleport::{is_qubit_error, probe_state, receiver_correct, sender_measure};
use crate::{Error, Result};

/// Below this many virtual pairs the QBER estimate is too coarse to be useful.
pub const RECOMMENDED_MIN_VIRTUAL: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdRule {
    /// [`choose_threshold`] for the configured channel.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug)]
pub struct QsdcConfig {
    pub n_pairs: usize,
    pub m_virtual: usize,
    pub threshold: ThresholdRule,
    pub depol: DepolarizingParams,
    pub eve: EveModel,
    /// Protect receiver halves with the Shor code.
    pub shor: bool,
    pub link: ClassicalLink,
    pub seed: u64,
    /// Extra attempts after an abort.
    pub max_retries: u32,
}

impl Default for QsdcConfig {
    fn default() -> Self {
        QsdcConfig {
            n_pairs: 16,
            m_virtual: 100,
            threshold: ThresholdRule::Auto,
            depol: DepolarizingParams::from_total(0.005).expect("valid"),
            eve: EveModel::None,
            shor: true,
            link: ClassicalLink::Ideal,
            seed: 1,
            max_retries: 3,
        }
    }
}

impl QsdcConfig {
    /// Checks invariants; returns warnings for legal but weak settings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.m_virtual == 0 {
            return Err(Error::Config("at least one virtual pair is required".into()));
        }
        if let ThresholdRule::Fixed(t) = self.threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("threshold {t} must lie in (0, 1)")));
            }
        }
        self.eve.validate().map_err(|e| Error::Config(e.to_string()))?;
        let mut warnings = Vec::new();
        if self.m_virtual < RECOMMENDED_MIN_VIRTUAL {
            warnings.push(format!(
                "only {} virtual pairs; detection is coarse below {RECOMMENDED_MIN_VIRTUAL}",
                self.m_virtual
            ));
        }
        Ok(warnings)
    }

    pub fn resolved_threshold(&self) -> Result<f64> {
        match self.threshold {
            ThresholdRule::Fixed(t) => Ok(t),
            ThresholdRule::Auto => choose_threshold(self.depol, self.m_virtual, self.shor),
        }
    }

    /// Channel strength the receiver-bound qubits actually see.
    fn channel(&self) -> Result<DepolarizingParams> {
        match self.eve {
            EveModel::DepolarizeBoost { .. } => effective_params(self.depol, self.eve),
            _ => Ok(self.depol),
        }
    }
}

/// Security threshold: the geometric mean of the expected virtual-pair error
/// rate without an eavesdropper and with one adding `MIN_EVE_BOOST` to the
/// channel, never below the resolution `1/m`.
pub fn choose_threshold(channel: DepolarizingParams, m_virtual: usize, shor: bool) -> Result<f64> {
    if m_virtual == 0 {
        return Err(Error::domain("threshold needs at least one virtual pair"));
    }
    let rate = |p: DepolarizingParams| if shor { exact_logical_rate(p) } else { p.p_eq() };
    let nominal = rate(channel);
    let attacked = rate(DepolarizingParams::from_total((channel.p_eq() + MIN_EVE_BOOST).min(1.0))?);
    Ok((nominal * attacked).sqrt().max(1.0 / m_virtual as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Distributed,
    Decoded,
    Verified,
    Aborted,
    Completed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Abort,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decision::Accept => "accept",
            Decision::Abort => "abort",
        })
    }
}

/// Per-pair diagnostics, never consulted by the protocol itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairTrace {
    pub is_virtual: bool,
    pub intercepted: bool,
    /// Non-identity Paulis the channel applied to this pair's qubits.
    pub channel_errors: u8,
    pub syndrome_nonzero: bool,
    /// (sender bit, receiver bit) for virtual pairs after verification.
    pub comparison: Option<(u8, u8)>,
}

#[derive(Clone, Debug)]
pub struct SessionState {
    /// Two-qubit states: qubit 0 with the sender, qubit 1 with the receiver.
    pub pairs: Vec<StateVector>,
    /// Sorted secret positions of the virtual pairs.
    pub virtual_positions: Vec<usize>,
    pub phase: Phase,
    pub trace: Vec<PairTrace>,
    pub eve_present: bool,
    pub timings: PhaseTimings,
}

impl SessionState {
    fn require(&self, phase: Phase, op: &str) -> Result<()> {
        if self.phase != phase {
            return Err(Error::Protocol(format!(
                "{op} requires phase {phase:?}, session is {:?}",
                self.phase
            )));
        }
        Ok(())
    }

    /// Indices of the real (non-virtual) pairs in order.
    pub fn real_positions(&self) -> Vec<usize> {
        (0..self.pairs.len())
            .filter(|i| self.virtual_positions.binary_search(i).is_err())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub distribute: Duration,
    pub transmit: Duration,
    pub verify: Duration,
    pub payload: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QsdcReport {
    pub virtual_qber: f64,
    pub virtual_errors: usize,
    pub m_virtual: usize,
    pub threshold: f64,
    pub decision: Decision,
    /// Only present for accepted sessions that carried a payload.
    pub payload_qber: Option<MetricAccumulator>,
    pub classical_ber: Option<MetricAccumulator>,
    pub eve_present_truth: bool,
    pub attempts: u32,
    pub timings: PhaseTimings,
}

/// Step 1–2: real pairs in `β00` and virtual pairs in `β01` at random positions.
pub fn distribute_pairs<R: Rng + ?Sized>(cfg: &QsdcConfig, rng: &mut R) -> SessionState {
    let start = Instant::now();
    let total = cfg.n_pairs + cfg.m_virtual;
    let mut virtual_positions = index::sample(rng, total, cfg.m_virtual.min(total)).into_vec();
    virtual_positions.sort_unstable();
    let real = make_bell(BellKind::PHI_PLUS);
    let decoy = make_bell(BellKind::PSI_PLUS);
    let mut pairs = vec![real; total];
    let mut trace = vec![PairTrace::default(); total];
    for &p in &virtual_positions {
        pairs[p] = decoy.clone();
        trace[p].is_virtual = true;
    }
    SessionState {
        pairs,
        virtual_positions,
        phase: Phase::Distributed,
        trace,
        eve_present: cfg.eve.is_present(),
        timings: PhaseTimings {
            distribute: start.elapsed(),
            ..Default::default()
        },
    }
}

/// Steps 3–4: carries every receiver half through the channel.
///
/// A swap-mode eavesdropper intercepts the logical qubit before it is encoded
/// for the channel, so the forwarded substitute is itself subject to channel
/// noise and decoding.
pub fn transmit_protected<R: Rng + ?Sized>(state: &mut SessionState, cfg: &QsdcConfig, rng: &mut R) -> Result<()> {
    state.require(Phase::Distributed, "transmission")?;
    let start = Instant::now();
    let channel = cfg.channel()?;
    for (pair, trace) in state.pairs.iter_mut().zip(state.trace.iter_mut()) {
        if let EveModel::Swap { intercept_fraction } = cfg.eve {
            if rng.random::<f64>() < intercept_fraction {
                *pair = eve_entanglement_swap(pair, rng)?.0;
                trace.intercepted = true;
            }
        }
        if cfg.shor {
            let (mut encoded, block) = shor_encode(pair, 1)?;
            for &q in &block.qubits {
                let e = depolarize_qubit(&mut encoded, q, channel, rng)?;
                trace.channel_errors += u8::from(e != PauliError::I);
            }
            let (decoded, syndrome) = shor_decode(&encoded, &block, rng)?;
            trace.syndrome_nonzero = syndrome.corrected;
            *pair = decoded;
        } else {
            let e = depolarize_qubit(pair, 1, channel, rng)?;
            trace.channel_errors = u8::from(e != PauliError::I);
        }
    }
    state.phase = Phase::Decoded;
    state.timings.transmit = start.elapsed();
    Ok(())
}

/// Steps 5–6: the receiver measures the virtual halves and reveals positions
/// and results; the sender measures her halves and counts agreements, which
/// are errors for anti-correlated `β01` pairs.
pub fn verify_virtual<R: Rng + ?Sized>(state: &mut SessionState, cfg: &QsdcConfig, rng: &mut R) -> Result<QsdcReport> {
    state.require(Phase::Decoded, "verification")?;
    let start = Instant::now();
    let threshold = cfg.resolved_threshold()?;
    let mut errors = 0;
    for &p in &state.virtual_positions {
        let pair = &mut state.pairs[p];
        let bob = pair.measure(1, rng)?;
        let alice = pair.measure(0, rng)?;
        state.trace[p].comparison = Some((alice, bob));
        errors += usize::from(alice == bob);
    }
    let m = state.virtual_positions.len();
    let virtual_qber = if m == 0 { 0.0 } else { errors as f64 / m as f64 };
    let decision = if virtual_qber <= threshold {
        Decision::Accept
    } else {
        Decision::Abort
    };
    state.phase = match decision {
        Decision::Accept => Phase::Verified,
        Decision::Abort => Phase::Aborted,
    };
    state.timings.verify = start.elapsed();
    Ok(QsdcReport {
        virtual_qber,
        virtual_errors: errors,
        m_virtual: m,
        threshold,
        decision,
        payload_qber: None,
        classical_ber: None,
        eve_present_truth: state.eve_present,
        attempts: 1,
        timings: state.timings,
    })
}

/// Result of teleporting a payload.
#[derive(Clone, Debug)]
pub struct PayloadOutcome {
    pub qber: MetricAccumulator,
    pub ber: MetricAccumulator,
    pub received: Vec<StateVector>,
}

/// Step 7: teleports each payload qubit over the next real pair, sending the
/// measurement bits `m1 m2 …` over `link`.
pub fn teleport_payload<R: Rng + ?Sized>(
    state: &mut SessionState,
    payload: &[StateVector],
    link: &ClassicalLink,
    rng: &mut R,
) -> Result<PayloadOutcome> {
    state.require(Phase::Verified, "payload teleportation")?;
    let start = Instant::now();
    let real = state.real_positions();
    if payload.len() > real.len() {
        return Err(Error::Protocol(format!(
            "{} payload qubits but only {} verified pairs",
            payload.len(),
            real.len()
        )));
    }
    let mut residuals = Vec::with_capacity(payload.len());
    let mut sent_bits = Vec::with_capacity(2 * payload.len());
    for (psi, &p) in payload.iter().zip(&real) {
        let joint = psi.tensor(&state.pairs[p])?;
        let (outcome, residual) = sender_measure(&joint, rng)?;
        sent_bits.extend_from_slice(&outcome.bits());
        residuals.push(residual);
    }
    let received_bits = link.send(&sent_bits, rng)?;
    let ber = crate::metrics::estimate_ber(&sent_bits, &received_bits)?;
    let mut qber = MetricAccumulator::default();
    let mut received = Vec::with_capacity(payload.len());
    for ((psi, residual), bits) in payload.iter().zip(&residuals).zip(received_bits.chunks(2)) {
        let out = receiver_correct(residual, crate::teleport::BellOutcome::new(bits[0], bits[1]))?;
        qber.record(is_qubit_error(fidelity(psi, &out)?));
        received.push(out);
    }
    state.phase = Phase::Completed;
    state.timings.payload = start.elapsed();
    Ok(PayloadOutcome { qber, ber, received })
}

/// One attempt: distribute, transmit, verify and, if accepted, teleport.
pub fn run_attempt<R: Rng + ?Sized>(
    cfg: &QsdcConfig,
    payload: &[StateVector],
    rng: &mut R,
) -> Result<(QsdcReport, SessionState)> {
    let mut state = distribute_pairs(cfg, rng);
    transmit_protected(&mut state, cfg, rng)?;
    let mut report = verify_virtual(&mut state, cfg, rng)?;
    if report.decision == Decision::Accept && !payload.is_empty() {
        let out = teleport_payload(&mut state, payload, &cfg.link, rng)?;
        report.payload_qber = Some(out.qber);
        report.classical_ber = Some(out.ber);
    }
    report.timings = state.timings;
    Ok((report, state))
}

/// A full session with restart-on-abort, up to `cfg.max_retries` extra
/// attempts. Each attempt draws from its own stream of `cfg.seed`.
pub fn run_session(cfg: &QsdcConfig, payload: &[StateVector], session_id: u64) -> Result<(QsdcReport, Vec<SessionState>)> {
    let mut history = Vec::new();
    let mut attempt = 0u32;
    loop {
        let mut rng = stream_rng(cfg.seed, (session_id << 8) | u64::from(attempt));
        let (mut report, state) = run_attempt(cfg, payload, &mut rng)?;
        history.push(state);
        report.attempts = attempt + 1;
        if report.decision == Decision::Accept || attempt >= cfg.max_retries {
            return Ok((report, history));
        }
        attempt += 1;
    }
}

/// Payload used by the CLI: `n` copies of the probe state.
pub fn default_payload(n: usize) -> Vec<StateVector> {
    vec![probe_state(); n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::shor::exact_bit_flip_rate;

    fn noiseless(n: usize, m: usize) -> QsdcConfig {
        QsdcConfig {
            n_pairs: n,
            m_virtual: m,
            depol: DepolarizingParams::NOISELESS,
            ..Default::default()
        }
    }

    #[test]
    fn distribution_places_virtual_pairs() {
        let mut rng = stream_rng(80, 0);
        let s = distribute_pairs(&noiseless(3, 1), &mut rng);
        assert_eq!(s.pairs.len(), 4);
        let decoy = make_bell(BellKind::PSI_PLUS);
        let n_decoys = s.pairs.iter().filter(|p| **p == decoy).count();
        assert_eq!(n_decoys, 1);
        assert_eq!(s.pairs[s.virtual_positions[0]], decoy);

        let s = distribute_pairs(&noiseless(0, 1), &mut rng);
        assert_eq!(s.pairs, vec![decoy]);
        assert_eq!(s.phase, Phase::Distributed);
    }

    #[test]
    fn noiseless_transmission_keeps_pairs_exact() {
        let cfg = noiseless(4, 4);
        let mut rng = stream_rng(81, 0);
        let mut s = distribute_pairs(&cfg, &mut rng);
        let before = s.pairs.clone();
        transmit_protected(&mut s, &cfg, &mut rng).unwrap();
        for (a, b) in s.pairs.iter().zip(&before) {
            assert!((fidelity(a, b).unwrap() - 1.0).abs() < 1e-9);
        }
        assert_eq!(s.phase, Phase::Decoded);
    }

    #[test]
    fn virtual_pairs_always_anticorrelate_without_noise() {
        let cfg = noiseless(0, 100);
        let mut rng = stream_rng(82, 0);
        let mut s = distribute_pairs(&cfg, &mut rng);
        transmit_protected(&mut s, &cfg, &mut rng).unwrap();
        let r = verify_virtual(&mut s, &cfg, &mut rng).unwrap();
        assert_eq!(r.virtual_qber, 0.0);
        assert_eq!(r.decision, Decision::Accept);
        assert!(s.trace.iter().filter_map(|t| t.comparison).all(|(a, b)| a != b));
    }

    #[test]
    fn full_swap_attack_is_caught() {
        let cfg = QsdcConfig {
            eve: EveModel::Swap { intercept_fraction: 1.0 },
            ..noiseless(0, 100)
        };
        let mut total = MetricAccumulator::default();
        for session in 0..20 {
            let (r, _) = run_session(&QsdcConfig { max_retries: 0, ..cfg.clone() }, &[], session).unwrap();
            assert_eq!(r.decision, Decision::Abort);
            assert!(r.eve_present_truth);
            total += MetricAccumulator::new(r.virtual_errors as u64, r.m_virtual as u64);
        }
        assert!((total.rate() - 0.5).abs() < 4.0 * (0.25 / 2000.0f64).sqrt());
    }

    #[test]
    fn phase_machine_guards_payload() {
        let cfg = QsdcConfig {
            eve: EveModel::Swap { intercept_fraction: 1.0 },
            ..noiseless(2, 50)
        };
        let mut rng = stream_rng(83, 0);
        let mut s = distribute_pairs(&cfg, &mut rng);
        let payload = default_payload(1);
        assert!(matches!(
            teleport_payload(&mut s, &payload, &ClassicalLink::Ideal, &mut rng),
            Err(Error::Protocol(_))
        ));
        assert!(verify_virtual(&mut s, &cfg, &mut rng).is_err());
        transmit_protected(&mut s, &cfg, &mut rng).unwrap();
        assert!(transmit_protected(&mut s, &cfg, &mut rng).is_err());
        let r = verify_virtual(&mut s, &cfg, &mut rng).unwrap();
        assert_eq!(r.decision, Decision::Abort);
        assert_eq!(s.phase, Phase::Aborted);
        assert!(matches!(
            teleport_payload(&mut s, &payload, &ClassicalLink::Ideal, &mut rng),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn aborted_sessions_carry_no_payload_result() {
        let cfg = QsdcConfig {
            eve: EveModel::Swap { intercept_fraction: 1.0 },
            max_retries: 2,
            ..noiseless(4, 50)
        };
        let (r, history) = run_session(&cfg, &default_payload(4), 9).unwrap();
        assert_eq!(r.decision, Decision::Abort);
        assert_eq!(r.attempts, 3);
        assert_eq!(history.len(), 3);
        assert!(r.payload_qber.is_none());
        assert!(history.iter().all(|s| s.phase == Phase::Aborted));
    }

    #[test]
    fn clean_end_to_end_payload() {
        let cfg = noiseless(8, 20);
        let (r, _) = run_session(&cfg, &default_payload(8), 1).unwrap();
        assert_eq!(r.decision, Decision::Accept);
        assert_eq!(r.payload_qber, Some(MetricAccumulator::new(0, 8)));
        assert_eq!(r.classical_ber, Some(MetricAccumulator::new(0, 16)));
    }

    #[test]
    fn payload_longer_than_real_pairs_is_rejected() {
        let cfg = noiseless(1, 20);
        let mut rng = stream_rng(84, 0);
        let mut s = distribute_pairs(&cfg, &mut rng);
        transmit_protected(&mut s, &cfg, &mut rng).unwrap();
        verify_virtual(&mut s, &cfg, &mut rng).unwrap();
        assert!(teleport_payload(&mut s, &default_payload(2), &ClassicalLink::Ideal, &mut rng).is_err());
    }

    #[test]
    fn threshold_examples() {
        let p = DepolarizingParams::from_total(0.005).unwrap();
        let t = choose_threshold(p, 1000, true).unwrap();
        let lo = exact_logical_rate(p);
        let hi = exact_logical_rate(DepolarizingParams::from_total(0.105).unwrap());
        assert!((t - (lo * hi).sqrt()).abs() < 1e-15);
        assert!(lo < t && t < hi);
        // With m = 100 the resolution floor dominates.
        assert_eq!(choose_threshold(p, 100, true).unwrap(), 0.01);
        assert_eq!(choose_threshold(DepolarizingParams::NOISELESS, 50, true).unwrap(), 0.02);
        assert!(choose_threshold(p, 0, true).is_err());
    }

    #[test]
    fn shor_protected_virtual_qber_tracks_visible_logical_rate() {
        // Only logical errors with an X component break anti-correlation.
        let p = DepolarizingParams::from_total(0.05).unwrap();
        let cfg = QsdcConfig { depol: p, ..noiseless(0, 200) };
        let mut errors = MetricAccumulator::default();
        for session in 0..40 {
            let (r, _) = run_session(&QsdcConfig { max_retries: 0, ..cfg.clone() }, &[], session).unwrap();
            errors += MetricAccumulator::new(r.virtual_errors as u64, r.m_virtual as u64);
        }
        let expect = exact_bit_flip_rate(p);
        let sigma = (expect * (1.0 - expect) / errors.n_total as f64).sqrt();
        assert!((errors.rate() - expect).abs() < 4.0 * sigma, "{} vs {expect}", errors.rate());
    }

    #[test]
    fn config_validation() {
        assert!(QsdcConfig { m_virtual: 0, ..Default::default() }.validate().is_err());
        assert!(QsdcConfig { threshold: ThresholdRule::Fixed(1.0), ..Default::default() }
            .validate()
            .is_err());
        let warnings = QsdcConfig { m_virtual: 5, ..Default::default() }.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(QsdcConfig::default().validate().unwrap().is_empty());
    }
}
