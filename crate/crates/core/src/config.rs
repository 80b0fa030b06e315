//! Run configuration: line-oriented `key = value` files plus overrides.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Unknown keys are rejected so typos do not silently fall back to
//! defaults.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::cchannel::{Coherence, Fading, RicianParams};
use crate::link::ClassicalLink;
use crate::qchannel::{DepolarizingParams, EveModel};
use crate::qsdc::{QsdcConfig, ThresholdRule};
use crate::turbo::{DecoderKind, TurboConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    ClassicalBer,
    QberVsSnr,
    ShorCurve,
    QsdcBatch,
    TeleportDemo,
}

impl SweepKind {
    pub const ALL: [SweepKind; 5] = [
        SweepKind::ClassicalBer,
        SweepKind::QberVsSnr,
        SweepKind::ShorCurve,
        SweepKind::QsdcBatch,
        SweepKind::TeleportDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::ClassicalBer => "classical_ber",
            SweepKind::QberVsSnr => "qber_vs_snr",
            SweepKind::ShorCurve => "shor_curve",
            SweepKind::QsdcBatch => "qsdc_batch",
            SweepKind::TeleportDemo => "teleport_demo",
        }
    }
}

impl std::fmt::Display for SweepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('-', "_");
        SweepKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep kind {s:?}")))
    }
}

/// Every tunable of a run. Thread count and output path are deliberately
/// absent: they must not change results.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub kind: SweepKind,
    /// Es/N0 grid in dB.
    pub snr_db: Vec<f64>,
    /// Total depolarization probabilities `P_eq`.
    pub p_eq: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub eve: EveModel,
    pub shor: bool,
    pub turbo: bool,
    pub turbo_cfg: TurboConfig,
    pub fading: Fading,
    pub n_pairs: usize,
    pub m_virtual: usize,
    pub threshold: ThresholdRule,
    pub max_retries: u32,
    /// Replaces the QPSK link with i.i.d. bit flips at this rate.
    pub forced_ber: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: SweepKind::ClassicalBer,
            snr_db: vec![-4.0, -3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0],
            p_eq: vec![0.1, 0.01, 0.001, 0.0],
            trials: 1000,
            seed: 1,
            eve: EveModel::None,
            shor: true,
            turbo: true,
            turbo_cfg: TurboConfig::default(),
            fading: Fading::default(),
            n_pairs: 16,
            m_virtual: 100,
            threshold: ThresholdRule::Auto,
            max_retries: 3,
            forced_ber: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean {value:?} for {key}"))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let list: Vec<f64> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<_>>()?;
    if list.is_empty() {
        return Err(Error::Config(format!("{key} must not be empty")));
    }
    Ok(list)
}

fn parse_u32_octal(key: &str, value: &str) -> Result<u32> {
    let v = value.trim();
    let digits = v.strip_prefix("0o").unwrap_or(v);
    u32::from_str_radix(digits, 8).map_err(|_| Error::Config(format!("bad octal {value:?} for {key}")))
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        cfg.merge_text(&text)?;
        Ok(cfg)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (mut rician, mut coherence) = match self.fading {
            Fading::Rician(p, c) => (p, c),
            Fading::None => (RicianParams::default(), Coherence::default()),
        };
        let mut faded = matches!(self.fading, Fading::Rician(..));
        match key {
            "kind" => self.kind = value.parse()?,
            "snr_db" => self.snr_db = parse_list(key, value)?,
            "p_eq" => self.p_eq = parse_list(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "eve" => self.eve = value.parse()?,
            "shor" => self.shor = parse_bool(key, value)?,
            "turbo" => self.turbo = parse_bool(key, value)?,
            "block_length" => self.turbo_cfg.block_length = parse(key, value)?,
            "iterations" => self.turbo_cfg.iterations = parse(key, value)?,
            "decoder" => self.turbo_cfg.decoder = value.parse::<DecoderKind>()?,
            "feedback" => self.turbo_cfg.feedback = parse_u32_octal(key, value)?,
            "feedforward" => self.turbo_cfg.feedforward = parse_u32_octal(key, value)?,
            "interleaver_seed" => self.turbo_cfg.interleaver_seed = parse(key, value)?,
            "fading" => match value {
                "rician" => faded = true,
                "none" => faded = false,
                _ => return Err(Error::Config(format!("unknown fading {value:?}"))),
            },
            "coherence" => {
                coherence = match value {
                    "symbol" => Coherence::PerSymbol,
                    "frame" => Coherence::PerFrame,
                    _ => return Err(Error::Config(format!("unknown coherence {value:?}"))),
                }
            }
            "zeta" => rician.zeta = parse(key, value)?,
            "p0" => rician.p0 = parse(key, value)?,
            "d" => rician.d = parse(key, value)?,
            "los_phase" => rician.los_phase = parse(key, value)?,
            "n_pairs" => self.n_pairs = parse(key, value)?,
            "m_virtual" => self.m_virtual = parse(key, value)?,
            "threshold" => {
                self.threshold = match value {
                    "auto" => ThresholdRule::Auto,
                    v => ThresholdRule::Fixed(parse(key, v)?),
                }
            }
            "max_retries" => self.max_retries = parse(key, value)?,
            "forced_ber" => {
                self.forced_ber = match value {
                    "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        self.fading = if faded {
            Fading::Rician(rician, coherence)
        } else {
            Fading::None
        };
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        if self.snr_db.is_empty() || self.p_eq.is_empty() {
            return Err(Error::Config("grids must be nonempty".into()));
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("SNR grid contains NaN".into()));
        }
        for &p in &self.p_eq {
            DepolarizingParams::from_total(p).map_err(cfg_err)?;
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        self.eve.validate().map_err(cfg_err)?;
        self.turbo_cfg.validate().map_err(cfg_err)?;
        if let Fading::Rician(p, _) = self.fading {
            p.validate().map_err(cfg_err)?;
        }
        if let Some(b) = self.forced_ber {
            ClassicalLink::bit_flip(b).map_err(cfg_err)?;
        }
        self.qsdc(self.p_eq[0], self.snr_db[0])?.validate()?;
        Ok(())
    }

    /// The classical link at `snr_db`, honouring `turbo` and `forced_ber`.
    pub fn link(&self, snr_db: f64) -> Result<ClassicalLink> {
        match self.forced_ber {
            Some(b) => ClassicalLink::bit_flip(b),
            None => ClassicalLink::qpsk(self.turbo.then_some(self.turbo_cfg), self.fading, snr_db),
        }
    }

    pub fn qsdc(&self, p_eq: f64, snr_db: f64) -> Result<QsdcConfig> {
        Ok(QsdcConfig {
            n_pairs: self.n_pairs,
            m_virtual: self.m_virtual,
            threshold: self.threshold,
            depol: DepolarizingParams::from_total(p_eq).map_err(|e| Error::Config(e.to_string()))?,
            eve: self.eve,
            shor: self.shor,
            link: self.link(snr_db)?,
            seed: self.seed,
            max_retries: self.max_retries,
        })
    }

    /// `# key = value` lines that reproduce this configuration.
    pub fn header(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "# {k} = {v}");
        };
        kv("kind", self.kind.to_string());
        kv("snr_db", join(&self.snr_db));
        kv("p_eq", join(&self.p_eq));
        kv("trials", self.trials.to_string());
        kv("seed", self.seed.to_string());
        kv("eve", self.eve.to_string());
        kv("shor", self.shor.to_string());
        kv("turbo", self.turbo.to_string());
        kv("block_length", self.turbo_cfg.block_length.to_string());
        kv("iterations", self.turbo_cfg.iterations.to_string());
        kv("decoder", self.turbo_cfg.decoder.to_string());
        kv("feedback", format!("{:o}", self.turbo_cfg.feedback));
        kv("feedforward", format!("{:o}", self.turbo_cfg.feedforward));
        kv("interleaver_seed", self.turbo_cfg.interleaver_seed.to_string());
        match self.fading {
            Fading::None => kv("fading", "none".into()),
            Fading::Rician(p, c) => {
                kv("fading", "rician".into());
                kv(
                    "coherence",
                    match c {
                        Coherence::PerSymbol => "symbol",
                        Coherence::PerFrame => "frame",
                    }
                    .into(),
                );
                kv("zeta", p.zeta.to_string());
                kv("p0", p.p0.to_string());
                kv("d", p.d.to_string());
                kv("los_phase", p.los_phase.to_string());
            }
        }
        kv("n_pairs", self.n_pairs.to_string());
        kv("m_virtual", self.m_virtual.to_string());
        kv(
            "threshold",
            match self.threshold {
                ThresholdRule::Auto => "auto".into(),
                ThresholdRule::Fixed(t) => t.to_string(),
            },
        );
        kv("max_retries", self.max_retries.to_string());
        kv(
            "forced_ber",
            self.forced_ber.map_or_else(|| "none".into(), |b| b.to_string()),
        );
        s
    }
}
