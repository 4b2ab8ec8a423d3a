use std::process::Command;

fn isospec(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_isospec")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = isospec(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn small_config() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    use std::io::Write;
    writeln!(
        f,
        "[engine]\niterates = 5000\nphases = 4\n\n[scan]\nre = [-3.0, 3.0]\nim = [-1.5, 1.5]\nresolution = [7, 5]\n"
    )
    .unwrap();
    f
}

#[test]
fn sarnak_lyapunov_matches_log_coupling() {
    let text = stdout(&["lyapunov", "--lambda", "2", "--E", "0,0"]);
    assert!(text.contains("lyapunov=0.6931"), "{text}");
    assert!(text.contains("reference[sarnak]=0.693147"), "{text}");
}

#[test]
fn free_operator_reference() {
    let text = stdout(&["lyapunov", "--lambda", "0", "--E", "3,0"]);
    assert!(text.contains("reference[free]=0.9624"), "{text}");
}

#[test]
fn missing_config_is_an_error() {
    let out = isospec(&["--config", "/nonexistent/cfg.toml", "lyapunov"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}

#[test]
fn profile_is_byte_identical_single_threaded() {
    let cfg = small_config();
    let path = cfg.path().to_str().unwrap();
    let args = ["--config", path, "--threads", "1", "--seed", "9", "le-profile", "--steps", "5"];
    let a = stdout(&args);
    let b = stdout(&args);
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert!(lines.next().unwrap().starts_with("# isospec config-digest="));
    assert_eq!(lines.next().unwrap(), "eps,lyapunov,std_error,slope");
    assert_eq!(lines.count(), 5);
}

#[test]
fn profile_slopes_are_quantized() {
    let text = stdout(&["le-profile", "--eps-min", "-1", "--eps-max", "0", "--steps", "3"]);
    for row in text.lines().skip(2) {
        let slope: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((slope + 1.0).abs() < 0.05, "{row}");
    }
}

#[test]
fn spectrum_scan_agrees_with_ellipse() {
    let cfg = small_config();
    let text = stdout(&["--config", cfg.path().to_str().unwrap(), "spectrum"]);
    assert!(text.lines().nth(1).unwrap().starts_with("re_energy,im_energy,classification"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 35);
    let agreement = text.lines().find_map(|l| l.strip_prefix("# reference_agreement=")).unwrap();
    let (ok, total) = agreement.split_once('/').unwrap();
    assert_eq!(ok, total);
}

#[test]
fn kam_with_zero_coupling_is_empty() {
    let text = stdout(&["kam", "--lambda", "0", "--E", "1,0"]);
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains("\"steps\":0"));
}

#[test]
fn kam_writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    stdout(&["kam", "--lambda", "1e-3", "--E", "1,0.5", "--out", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.lines().last().unwrap().contains("\"hyperbolic\""));
}

#[test]
fn unknown_suite_fails() {
    let out = isospec(&["verify", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn determinism_suite_passes() {
    let text = stdout(&["verify", "determinism"]);
    assert!(text.starts_with("A10 PASS"), "{text}");
    assert!(text.contains("1/1 passed"));
}
