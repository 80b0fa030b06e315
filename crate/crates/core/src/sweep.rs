//! Experiment sweeps and their CSV output.
//!
//! Every point is split into fixed work units (a turbo block, a chunk of
//! teleportations, a session) and each unit draws from its own stream keyed by
//! `(seed, point, unit)`. Units run on the rayon pool; results are merged in
//! unit order, so the CSV is byte-identical for any thread count.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::cchannel::{complex_gaussian, hard_decisions, send_bits};
use crate::config::{RunConfig, SweepKind};
use crate::link::{send_turbo_block, ClassicalLink};
use crate::metrics::{estimate_ber, MetricAccumulator};
use crate::qchannel::{depolarize_qubit, DepolarizingParams, PauliError};
use crate::qsdc::{default_payload, run_session, Decision, QsdcReport, SessionState};
use crate::qstate::{make_bell, BellKind, StateVector};
use crate::rng::{point_stream, stream_rng, SimRng};
use crate::shor::{count_logical_errors, exact_logical_rate};
use crate::teleport::{is_qubit_error, probe_state, receiver_correct, sender_measure, BellOutcome};
use crate::turbo::TurboCodec;
use crate::{Error, Result, VERSION};

/// Bumped whenever columns change meaning or order.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 17] = [
    "sweep_kind",
    "snr_db",
    "p_eq",
    "ber",
    "ber_ci_lo",
    "ber_ci_hi",
    "qber",
    "qber_ci_lo",
    "qber_ci_hi",
    "trials",
    "seed",
    "wall_ms",
    "variant",
    "p_shor",
    "virtual_qber",
    "abort_rate",
    "status",
];

/// Teleportations per work unit; their bits fill one default turbo block.
const TELEPORTS_PER_UNIT: u64 = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub cfg: RunConfig,
    /// Fill the `wall_ms` column. Off by default since it breaks byte-identity.
    pub timings: bool,
}

impl SweepSpec {
    pub fn new(cfg: RunConfig) -> Self {
        SweepSpec { cfg, timings: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepRow {
    pub kind: String,
    pub variant: String,
    pub snr_db: Option<f64>,
    pub p_eq: Option<f64>,
    pub ber: Option<MetricAccumulator>,
    pub qber: Option<MetricAccumulator>,
    pub p_shor: Option<f64>,
    pub virtual_qber: Option<MetricAccumulator>,
    pub abort_rate: Option<MetricAccumulator>,
    pub trials: u64,
    pub seed: u64,
    pub wall_ms: Option<f64>,
    /// `ok`, or `error:` and a message.
    pub status: String,
}

#[derive(Clone, Copy, Debug)]
struct Point {
    variant: &'static str,
    snr_db: Option<f64>,
    p_eq: Option<f64>,
}

fn grid(cfg: &RunConfig) -> Vec<Point> {
    let mut pts = Vec::new();
    match cfg.kind {
        SweepKind::ClassicalBer => {
            for &s in &cfg.snr_db {
                for variant in ["uncoded", "turbo"] {
                    pts.push(Point { variant, snr_db: Some(s), p_eq: None });
                }
            }
        }
        SweepKind::QberVsSnr | SweepKind::QsdcBatch => {
            let variant = if cfg.kind == SweepKind::QsdcBatch {
                if cfg.shor { "shor" } else { "unprotected" }
            } else if cfg.forced_ber.is_some() {
                "bit_flip"
            } else if cfg.turbo {
                "turbo"
            } else {
                "uncoded"
            };
            for &p in &cfg.p_eq {
                for &s in &cfg.snr_db {
                    pts.push(Point { variant, snr_db: Some(s), p_eq: Some(p) });
                }
            }
        }
        SweepKind::ShorCurve => {
            for &p in &cfg.p_eq {
                pts.push(Point { variant: "shor", snr_db: None, p_eq: Some(p) });
            }
        }
        SweepKind::TeleportDemo => {
            for &p in &cfg.p_eq {
                pts.push(Point { variant: "ideal_link", snr_db: None, p_eq: Some(p) });
            }
        }
    }
    pts
}

/// Runs `unit(i, rng)` for `i in 0..n` on the current pool, in index order.
fn par_units<T, F>(seed: u64, point: u64, n: u64, unit: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| unit(i, &mut stream_rng(seed, point_stream(point, i))))
        .collect()
}

/// Uniformly random pure qubit.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> StateVector {
    loop {
        let a = complex_gaussian(1.0, rng);
        let b = complex_gaussian(1.0, rng);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n > 1e-12 {
            return StateVector::qubit(a / n, b / n).expect("normalized");
        }
    }
}

/// `(classical BER, QBER)` for `count` teleportations of `payload(rng)` over
/// pairs whose receiver half is depolarized, bits sent over `link`.
pub fn teleport_batch<R, F>(
    count: usize,
    depol: DepolarizingParams,
    link: &ClassicalLink,
    mut payload: F,
    rng: &mut R,
) -> Result<(MetricAccumulator, MetricAccumulator)>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> StateVector,
{
    let pair = make_bell(BellKind::PHI_PLUS);
    let mut inputs = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    let mut bits = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let psi = payload(rng);
        let mut p = pair.clone();
        let _: PauliError = depolarize_qubit(&mut p, 1, depol, rng)?;
        let (outcome, residual) = sender_measure(&psi.tensor(&p)?, rng)?;
        bits.extend_from_slice(&outcome.bits());
        inputs.push(psi);
        residuals.push(residual);
    }
    let received = link.send(&bits, rng)?;
    let ber = estimate_ber(&bits, &received)?;
    let mut qber = MetricAccumulator::default();
    for ((psi, residual), b) in inputs.iter().zip(&residuals).zip(received.chunks(2)) {
        let out = receiver_correct(residual, BellOutcome::new(b[0], b[1]))?;
        qber.record(is_qubit_error(crate::qstate::fidelity(psi, &out)?));
    }
    Ok((ber, qber))
}

fn chunks(total: u64, size: u64) -> impl Fn(u64) -> u64 {
    move |i| size.min(total - i * size)
}

fn run_point(cfg: &RunConfig, index: u64, pt: Point) -> Result<SweepRow> {
    let seed = cfg.seed;
    let mut row = SweepRow {
        kind: cfg.kind.to_string(),
        variant: pt.variant.to_string(),
        snr_db: pt.snr_db,
        p_eq: pt.p_eq,
        trials: cfg.trials,
        seed,
        status: "ok".into(),
        ..Default::default()
    };
    let depol = || {
        DepolarizingParams::from_total(pt.p_eq.unwrap_or(0.0)).map_err(|e| Error::Config(e.to_string()))
    };
    match cfg.kind {
        SweepKind::ClassicalBer => {
            let snr = pt.snr_db.unwrap_or(f64::INFINITY);
            let k = cfg.turbo_cfg.block_length;
            let acc = if pt.variant == "turbo" {
                let codec = TurboCodec::new(cfg.turbo_cfg)?;
                par_units(seed, index, cfg.trials, |_, rng| {
                    let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
                    let out = send_turbo_block(&codec, &info, &cfg.fading, snr, rng)?;
                    estimate_ber(&info, &out)
                })?
            } else {
                par_units(seed, index, cfg.trials, |_, rng| {
                    let mut info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
                    if info.len() % 2 == 1 {
                        info.push(0);
                    }
                    let out = hard_decisions(&send_bits(&info, &cfg.fading, snr, rng)?.llrs);
                    estimate_ber(&info[..k], &out[..k])
                })?
            };
            row.ber = Some(acc.into_iter().sum());
        }
        SweepKind::QberVsSnr => {
            let link = cfg.link(pt.snr_db.unwrap_or(f64::INFINITY))?;
            let depol = depol()?;
            let size = chunks(cfg.trials, TELEPORTS_PER_UNIT);
            let units = cfg.trials.div_ceil(TELEPORTS_PER_UNIT);
            let parts = par_units(seed, index, units, |i, rng| {
                teleport_batch(size(i) as usize, depol, &link, |_| probe_state(), rng)
            })?;
            let (ber, qber) = parts
                .into_iter()
                .fold(Default::default(), |(b, q): (MetricAccumulator, MetricAccumulator), (b2, q2)| {
                    (b + b2, q + q2)
                });
            row.ber = Some(ber);
            row.qber = Some(qber);
        }
        SweepKind::ShorCurve => {
            let p = depol()?;
            let errors = count_logical_errors(p, cfg.trials, seed ^ (index << 48));
            row.qber = Some(MetricAccumulator::new(errors, cfg.trials));
            row.p_shor = Some(exact_logical_rate(p));
        }
        SweepKind::TeleportDemo => {
            let depol = depol()?;
            let size = chunks(cfg.trials, TELEPORTS_PER_UNIT);
            let units = cfg.trials.div_ceil(TELEPORTS_PER_UNIT);
            let parts = par_units(seed, index, units, |i, rng| {
                teleport_batch(size(i) as usize, depol, &ClassicalLink::Ideal, random_qubit, rng)
            })?;
            row.qber = Some(parts.into_iter().map(|(_, q)| q).sum());
        }
        SweepKind::QsdcBatch => {
            let qcfg = cfg.qsdc(pt.p_eq.unwrap_or(0.0), pt.snr_db.unwrap_or(f64::INFINITY))?;
            qcfg.validate()?;
            let payload = default_payload(cfg.n_pairs);
            let reports = (0..cfg.trials)
                .into_par_iter()
                .map(|s| run_session(&qcfg, &payload, point_stream(index, s)).map(|(r, _)| r))
                .collect::<Result<Vec<_>>>()?;
            let mut ber = MetricAccumulator::default();
            let mut qber = MetricAccumulator::default();
            let mut virt = MetricAccumulator::default();
            let mut aborts = MetricAccumulator::default();
            for r in &reports {
                virt += MetricAccumulator::new(r.virtual_errors as u64, r.m_virtual as u64);
                aborts.record(r.decision == Decision::Abort);
                ber += r.classical_ber.unwrap_or_default();
                qber += r.payload_qber.unwrap_or_default();
            }
            row.ber = Some(ber);
            row.qber = Some(qber);
            row.virtual_qber = Some(virt);
            row.abort_rate = Some(aborts);
            row.p_shor = Some(if cfg.shor { exact_logical_rate(qcfg.depol) } else { qcfg.depol.p_eq() });
        }
    }
    Ok(row)
}

/// Runs every grid point in order on the current rayon pool. A failing point
/// becomes a row with an error status; the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.cfg.validate()?;
    let rows = grid(&spec.cfg)
        .into_iter()
        .enumerate()
        .map(|(i, pt)| {
            let start = Instant::now();
            let mut row = run_point(&spec.cfg, i as u64, pt).unwrap_or_else(|e| SweepRow {
                kind: spec.cfg.kind.to_string(),
                variant: pt.variant.to_string(),
                snr_db: pt.snr_db,
                p_eq: pt.p_eq,
                trials: spec.cfg.trials,
                seed: spec.cfg.seed,
                status: format!("error: {e}").replace([',', '\n'], ";"),
                ..Default::default()
            });
            if spec.timings {
                row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            row
        })
        .collect();
    Ok(rows)
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn rate_cols(m: Option<MetricAccumulator>) -> [String; 3] {
    match m {
        Some(m) => {
            let (lo, hi) = m.wilson_ci95();
            [m.rate().to_string(), lo.to_string(), hi.to_string()]
        }
        None => Default::default(),
    }
}

impl SweepRow {
    pub fn csv_fields(&self) -> Vec<String> {
        let [ber, ber_lo, ber_hi] = rate_cols(self.ber);
        let [qber, q_lo, q_hi] = rate_cols(self.qber);
        vec![
            self.kind.clone(),
            opt(self.snr_db),
            opt(self.p_eq),
            ber,
            ber_lo,
            ber_hi,
            qber,
            q_lo,
            q_hi,
            self.trials.to_string(),
            self.seed.to_string(),
            self.wall_ms.map(|v| format!("{v:.3}")).unwrap_or_default(),
            self.variant.clone(),
            opt(self.p_shor),
            opt(self.virtual_qber.map(|m| m.rate())),
            opt(self.abort_rate.map(|m| m.rate())),
            self.status.clone(),
        ]
    }
}

/// Provenance block: tool version, schema, axis conventions and the config.
pub fn csv_header(cfg: &RunConfig) -> String {
    let k = cfg.turbo_cfg.block_length as f64;
    let rate = k / (3.0 * k + 6.0);
    format!(
        "# qtsim {VERSION}\n# csv_schema = {CSV_SCHEMA_VERSION}\n\
         # snr_db is Es/N0 of QPSK symbols; Eb/N0 = Es/N0 - 10*log10(2*r) with r = 1 uncoded, r = {rate} turbo\n\
         # p_eq is the total depolarization probability (X, Y, Z each p_eq/3)\n{}{}\n",
        cfg.header(),
        CSV_COLUMNS.join(",")
    )
}

pub fn write_csv<W: Write>(mut w: W, cfg: &RunConfig, rows: &[SweepRow]) -> std::io::Result<()> {
    w.write_all(csv_header(cfg).as_bytes())?;
    for r in rows {
        writeln!(w, "{}", r.csv_fields().join(","))?;
    }
    w.flush()
}

pub fn write_csv_file(path: &Path, cfg: &RunConfig, rows: &[SweepRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(std::io::BufWriter::new(f), cfg, rows).map_err(|e| Error::io(path, e))
}

/// Columns of the per-session report written by `qtsim qsdc`.
pub const SESSION_COLUMNS: [&str; 14] = [
    "session",
    "decision",
    "virtual_qber",
    "virtual_errors",
    "m_virtual",
    "threshold",
    "payload_qber",
    "classical_ber",
    "eve_present",
    "attempts",
    "distribute_ms",
    "transmit_ms",
    "verify_ms",
    "payload_ms",
];

/// Columns of the per-pair trace file, one line per pair per attempt.
pub const TRACE_COLUMNS: [&str; 9] = [
    "session",
    "attempt",
    "pair",
    "is_virtual",
    "intercepted",
    "channel_errors",
    "syndrome_nonzero",
    "sender_bit",
    "receiver_bit",
];

pub fn session_fields(session: u64, r: &QsdcReport, timings: bool) -> Vec<String> {
    let ms = |d: std::time::Duration| {
        if timings {
            format!("{:.3}", d.as_secs_f64() * 1e3)
        } else {
            String::new()
        }
    };
    vec![
        session.to_string(),
        r.decision.to_string(),
        r.virtual_qber.to_string(),
        r.virtual_errors.to_string(),
        r.m_virtual.to_string(),
        r.threshold.to_string(),
        opt(r.payload_qber.map(|m| m.rate())),
        opt(r.classical_ber.map(|m| m.rate())),
        r.eve_present_truth.to_string(),
        r.attempts.to_string(),
        ms(r.timings.distribute),
        ms(r.timings.transmit),
        ms(r.timings.verify),
        ms(r.timings.payload),
    ]
}

pub fn trace_lines(session: u64, history: &[SessionState]) -> Vec<String> {
    let mut out = Vec::new();
    for (attempt, state) in history.iter().enumerate() {
        for (i, t) in state.trace.iter().enumerate() {
            let (a, b) = t
                .comparison
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .unwrap_or_default();
            out.push(
                [
                    session.to_string(),
                    attempt.to_string(),
                    i.to_string(),
                    u8::from(t.is_virtual).to_string(),
                    u8::from(t.intercepted).to_string(),
                    t.channel_errors.to_string(),
                    u8::from(t.syndrome_nonzero).to_string(),
                    a,
                    b,
                ]
                .join(","),
            );
        }
    }
    out
}
