use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn waveforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waveforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"id": "small", "waveform": ["cp-ofdm", "w-ofdm"],
    "numerology": {"n": 64, "m": 20, "active_subcarriers": 36},
    "channel": {"snr_db": [4, null]}, "trials": 3, "seed": 5}"#;

#[test]
fn run_writes_all_reports() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SMALL);
    let out = dir.path().join("out");
    let o = waveforge(&["run", &scenario, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["ber.csv", "ccdf.csv", "psd.csv", "summary.csv", "report.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let ber = fs::read_to_string(out.join("ber.csv")).unwrap();
    assert_eq!(ber.lines().count(), 5);
    assert!(ber.lines().any(|l| l.starts_with("small,cp-ofdm,inf,3,0,")));
}

#[test]
fn overrides_and_oracle_path_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SMALL);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["run", &scenario, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = waveforge(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("ber.csv")).unwrap()
    };
    let a = run("a", &["--seed", "11", "--trials", "2"]);
    let b = run("b", &["--seed", "11", "--trials", "2", "--threads", "3"]);
    let c = run("c", &["--seed", "12", "--trials", "2"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.lines().nth(1).unwrap().contains(",2,"));
    let oracle = run("d", &["--seed", "11", "--trials", "2", "--oracle-dft"]);
    assert_eq!(a.lines().count(), oracle.lines().count());
}

#[test]
fn compare_concatenates_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", SMALL);
    let b = write(
        dir.path(),
        "b.json",
        r#"{"id": "other", "waveform": "fbmc-oqam", "numerology": {"n": 64, "m": 10, "active_subcarriers": 36}}"#,
    );
    let out = dir.path().join("out");
    let o = waveforge(&["compare", &a, &b, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let ids: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["small", "small", "other"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let bad = write(dir.path(), "bad.json", r#"{"id": "x", "waveform": "ofdm-plus"}"#);
    let o = waveforge(&["run", &bad, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown-waveform"));

    let missing = dir.path().join("nope.json");
    assert_eq!(waveforge(&["run", missing.to_str().unwrap(), "--out", out]).status.code(), Some(2));

    let ok = write(dir.path(), "ok.json", SMALL);
    let o = waveforge(&["run", &ok, "--out", out, "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));

    // Even subsymbol count with the default prototype: singular receiver.
    let singular = write(
        dir.path(),
        "singular.json",
        r#"{"id": "g", "waveform": "gfdm", "numerology": {"n": 16, "m": 2, "active_subcarriers": 8},
            "filter": {"gfdm_subsymbols": 4, "gfdm_prototype": {"shape": "rrc", "rolloff": 1.0}}}"#,
    );
    let o = waveforge(&["run", &singular, "--out", out]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonorthogonal-prototype-singular"));

    assert_eq!(waveforge(&["run"]).status.code(), Some(2));
    let v = waveforge(&["--version"]);
    assert!(v.status.success());
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}
