use std::process::{Command, Output};

fn qtsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtsim"))
        .args(args)
        .env_remove("QTSIM_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: &[&str] = &["sweep", "--kind", "qber_vs_snr", "--snr", "-1,2", "--p-eq", "0.01,0", "--trials", "600"];

#[test]
fn selftest_passes() {
    let o = qtsim(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("noiseless_teleportation"));
}

#[test]
fn sweep_is_reproducible() {
    let a = qtsim(&[SMALL, &["--seed", "7"]].concat());
    let b = qtsim(&[SMALL, &["--seed", "7"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = qtsim(&[SMALL, &["--seed", "8"]].concat());
    assert_ne!(a.stdout, c.stdout);

    let text = stdout(&a);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("sweep_kind,snr_db,p_eq,ber,ber_ci_lo,ber_ci_hi,qber,"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_qtsim"))
            .args(SMALL)
            .env("QTSIM_THREADS", n)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn full_interception_aborts() {
    let o = qtsim(&["qsdc", "--eve", "swap:1.0", "-m", "100"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().last().unwrap();
    assert!(row.starts_with("0,abort,"), "{row}");
}

#[test]
fn clean_sessions_accept_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = qtsim(&[
        "qsdc",
        "--sessions",
        "3",
        "--p-eq",
        "0",
        "-n",
        "4",
        "-m",
        "20",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(",accept,")).count(), 3);
    let t = std::fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("session,attempt,pair,"));
    assert_eq!(t.lines().count(), 1 + 3 * 24);
}

#[test]
fn bad_flags_and_config_exit_1() {
    assert_eq!(qtsim(&["sweep", "--bogus"]).status.code(), Some(1));
    assert_eq!(qtsim(&["sweep", "--kind", "nope"]).status.code(), Some(1));
    assert_eq!(qtsim(&["qsdc", "--eve", "boost:0.01"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "trials = 10\nwhatever = 3\n").unwrap();
    let o = qtsim(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let missing = dir.path().join("missing.cfg");
    assert_ne!(qtsim(&["sweep", "--config", missing.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no/such/dir/out.csv");
    let o = qtsim(&["teleport-demo", "--p-eq", "0", "--trials", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# noiseless teleportation\nkind = teleport_demo\np_eq = 0\ntrials = 64\nseed = 11\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let o = qtsim(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# trials = 64"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("teleport_demo,"), "{}", rows[0]);
    assert!(rows[0].contains(",64,11,"), "{}", rows[0]);
}
