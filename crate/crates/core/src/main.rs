use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use qtsim::config::{RunConfig, SweepKind};
use qtsim::qsdc::{default_payload, run_session};
use qtsim::selftest::run_selftest;
use qtsim::sweep::{
    csv_header, run_sweep, session_fields, trace_lines, write_csv, SweepSpec, SESSION_COLUMNS, TRACE_COLUMNS,
};
use qtsim::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_SELFTEST: u8 = 3;

const DEFAULT_QSDC_P_EQ: f64 = 0.005;
const DEFAULT_QSDC_SNR_DB: f64 = 6.0;

#[derive(Parser, Debug)]
#[command(name = "qtsim", version, about = "Teleportation link simulator with Shor-protected EPR pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a parameter sweep and write CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// classical_ber, qber_vs_snr, shor_curve, qsdc_batch or teleport_demo.
        #[arg(long)]
        kind: Option<String>,
        /// Comma-separated Es/N0 grid in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
        /// Comma-separated depolarization probabilities.
        #[arg(long = "p-eq")]
        p_eq: Option<String>,
    },
    /// Run detection sessions and write one report row per session.
    Qsdc {
        #[command(flatten)]
        common: Common,
        /// Number of independent sessions.
        #[arg(long, default_value_t = 1)]
        sessions: u64,
        /// Depolarization probability of the quantum channel.
        #[arg(long = "p-eq")]
        p_eq: Option<f64>,
        /// Es/N0 of the classical link in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
        /// Real EPR pairs per session.
        #[arg(short = 'n', long)]
        pairs: Option<usize>,
        /// Per-pair trace output.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Teleport random states over depolarized pairs with an ideal link.
    TeleportDemo {
        #[command(flatten)]
        common: Common,
        #[arg(long = "p-eq")]
        p_eq: Option<String>,
    },
    /// Logical error rate of the Shor code against channel strength.
    ShorCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long = "p-eq")]
        p_eq: Option<String>,
    },
    /// Exact invariant checks.
    Selftest,
}

#[derive(Args, Debug)]
struct Common {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "QTSIM_THREADS")]
    threads: Option<usize>,
    /// none, swap:<fraction> or boost:<delta>.
    #[arg(long)]
    eve: Option<String>,
    #[arg(long)]
    no_shor: bool,
    #[arg(long)]
    no_turbo: bool,
    /// Virtual pairs per session.
    #[arg(short = 'm', long = "virtual")]
    m_virtual: Option<usize>,
    /// Fill timing columns (output is then no longer reproducible).
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn load(&self, kind: SweepKind) -> qtsim::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if self.config.is_none() {
            cfg.kind = kind;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(e) = &self.eve {
            cfg.set("eve", e)?;
        }
        if self.no_shor {
            cfg.shor = false;
        }
        if self.no_turbo {
            cfg.turbo = false;
        }
        if let Some(m) = self.m_virtual {
            cfg.m_virtual = m;
        }
        Ok(cfg)
    }

    fn install_threads(&self) -> qtsim::Result<()> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        }
        Ok(())
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> qtsim::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io(Path::new("<stdout>"), e)),
    }
}

fn sweep(common: &Common, cfg: RunConfig) -> qtsim::Result<()> {
    common.install_threads()?;
    cfg.validate()?;
    let spec = SweepSpec {
        cfg,
        timings: common.timings,
    };
    let rows = run_sweep(&spec)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &spec.cfg, &rows).map_err(|e| Error::io(Path::new("<buffer>"), e))?;
    emit(&common.out, &String::from_utf8_lossy(&buf))
}

fn qsdc(
    common: &Common,
    sessions: u64,
    p_eq: Option<f64>,
    snr: Option<f64>,
    pairs: Option<usize>,
    trace: &Option<PathBuf>,
) -> qtsim::Result<()> {
    common.install_threads()?;
    let mut cfg = common.load(SweepKind::QsdcBatch)?;
    if common.config.is_none() {
        cfg.p_eq = vec![DEFAULT_QSDC_P_EQ];
        cfg.snr_db = vec![DEFAULT_QSDC_SNR_DB];
    }
    if let Some(p) = p_eq {
        cfg.p_eq = vec![p];
    }
    if let Some(s) = snr {
        cfg.snr_db = vec![s];
    }
    if let Some(n) = pairs {
        cfg.n_pairs = n;
    }
    cfg.validate()?;
    let qcfg = cfg.qsdc(cfg.p_eq[0], cfg.snr_db[0])?;
    for w in qcfg.validate()? {
        eprintln!("warning: {w}");
    }
    let payload = default_payload(cfg.n_pairs);
    let results = (0..sessions)
        .into_par_iter()
        .map(|s| run_session(&qcfg, &payload, s))
        .collect::<qtsim::Result<Vec<_>>>()?;

    let mut text = csv_header(&cfg).lines().filter(|l| l.starts_with('#')).fold(String::new(), |mut s, l| {
        s.push_str(l);
        s.push('\n');
        s
    });
    text.push_str(&format!("# p_eq_used = {}\n# snr_db_used = {}\n", cfg.p_eq[0], cfg.snr_db[0]));
    text.push_str(&SESSION_COLUMNS.join(","));
    text.push('\n');
    for (s, (r, _)) in results.iter().enumerate() {
        text.push_str(&session_fields(s as u64, r, common.timings).join(","));
        text.push('\n');
    }
    emit(&common.out, &text)?;

    if let Some(path) = trace {
        let mut t = TRACE_COLUMNS.join(",");
        t.push('\n');
        for (s, (_, history)) in results.iter().enumerate() {
            for line in trace_lines(s as u64, history) {
                t.push_str(&line);
                t.push('\n');
            }
        }
        std::fs::write(path, t).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn selftest() -> ExitCode {
    let results = run_selftest();
    let mut ok = true;
    for r in &results {
        println!(
            "{} {:<26} {:>8.1} ms  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.elapsed_ms,
            r.detail
        );
        ok &= r.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SELFTEST)
    }
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Io { .. } => ExitCode::from(EXIT_IO),
        _ => ExitCode::from(EXIT_CONFIG),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Selftest => return selftest(),
        Command::Sweep { common, kind, snr, p_eq } => (|| {
            let mut cfg = common.load(SweepKind::ClassicalBer)?;
            if let Some(k) = kind {
                cfg.set("kind", k)?;
            }
            if let Some(s) = snr {
                cfg.set("snr_db", s)?;
            }
            if let Some(p) = p_eq {
                cfg.set("p_eq", p)?;
            }
            sweep(common, cfg)
        })(),
        Command::Qsdc {
            common,
            sessions,
            p_eq,
            snr,
            pairs,
            trace,
        } => qsdc(common, *sessions, *p_eq, *snr, *pairs, trace),
        Command::TeleportDemo { common, p_eq } => (|| {
            let mut cfg = common.load(SweepKind::TeleportDemo)?;
            cfg.kind = SweepKind::TeleportDemo;
            if let Some(p) = p_eq {
                cfg.set("p_eq", p)?;
            }
            sweep(common, cfg)
        })(),
        Command::ShorCurve { common, p_eq } => (|| {
            let mut cfg = common.load(SweepKind::ShorCurve)?;
            cfg.kind = SweepKind::ShorCurve;
            if common.config.is_none() && p_eq.is_none() {
                cfg.set("p_eq", "0.001,0.002,0.005,0.01,0.02,0.05,0.105,0.2")?;
                if common.trials.is_none() {
                    cfg.trials = 1_000_000;
                }
            }
            if let Some(p) = p_eq {
                cfg.set("p_eq", p)?;
            }
            sweep(common, cfg)
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
