use std::fs;
use std::process::{Command, Output};

fn unipolar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unipolar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = unipolar(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn simulate_header_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.kv");
    fs::write(
        &cfg,
        "scheme = intersection\nchannels = bec:0.5, bsc:0.11\nn = 6\nrate = 0.3\ntrials = 200\nseed = 4\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let a = stdout_ok(&["simulate", "--config", cfg]);
    let b = stdout_ok(&["simulate", "--config", cfg]);
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "scheme,channel,n,rate,trials,errors,error_rate,ci_low,ci_high,bound");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("intersection,bec:0.5,6,"));
    let c = stdout_ok(&["simulate", "--config", cfg, "--seed", "5"]);
    assert_eq!(c.lines().next(), a.lines().next());
}

#[test]
fn simulate_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res.csv");
    stdout_ok(&[
        "simulate", "--scheme", "chain", "--channels", "bec:0.5,bsc:0.11", "--n", "5", "--rate", "0.3", "--k", "3",
        "--trials", "50", "--out", out.to_str().unwrap(),
    ]);
    assert!(fs::read_to_string(&out).unwrap().starts_with("scheme,channel,"));
    assert!(fs::read_to_string(out.with_extension("json")).unwrap().contains("\"rows\""));
}

#[test]
fn zero_trials_is_rejected() {
    let out = unipolar(&["simulate", "--scheme", "intersection", "--channels", "bec:0.5", "--n", "4", "--trials", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn dominate_reports_grid_sizes() {
    let s = stdout_ok(&["dominate", "--capacity", "0.5", "--eps", "0.5"]);
    assert!(s.contains("A = 93"), "{s}");
    assert!(s.contains("T = 372"), "{s}");
}

#[test]
fn gap_of_identical_channels_is_zero() {
    let s = stdout_ok(&["gap", "--channels", "bsc:0.11,bsc:0.11", "--n", "4,6,8,10", "--rate", "0.4"]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "n,N,A0,A1,intersection,surrogate,gap");
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        assert!(l.ends_with(",0.000000"), "{l}");
    }
    let s = stdout_ok(&["gap", "--channels", "bec:0.5,bsc:0.11", "--n", "10", "--rate", "0.4"]);
    assert!(s.lines().nth(1).unwrap().starts_with("10,1024,409,409,405,"), "{s}");
}

#[test]
fn construct_encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (scheme, extra) in [
        ("intersection", vec![]),
        ("chain", vec!["--k", "3"]),
        ("aligned", vec!["--kappa", "1"]),
        ("scheme1", vec!["--k", "2", "--rs-dim", "6"]),
    ] {
        let code = dir.path().join(format!("{scheme}.kv"));
        let mut args = vec![
            "construct", "--scheme", scheme, "--channels", "bec:0.5,bsc:0.11", "--n", "4", "--rate", "0.4",
            "--out", code.to_str().unwrap(),
        ];
        args.extend(extra);
        stdout_ok(&args);
        let text = fs::read_to_string(&code).unwrap();
        let k: usize = text
            .lines()
            .find_map(|l| l.strip_prefix("info_bits = "))
            .unwrap()
            .parse()
            .unwrap();
        let bits: String = (0..k).map(|i| if i % 3 == 0 { '1' } else { '0' }).collect();
        let bits_file = dir.path().join("bits.txt");
        fs::write(&bits_file, &bits).unwrap();
        let x = stdout_ok(&["encode", "--code", code.to_str().unwrap(), "--input", bits_file.to_str().unwrap()]);
        let llrs: Vec<&str> = x.trim().chars().map(|c| if c == '0' { "30" } else { "-30" }).collect();
        let llr_file = dir.path().join("llr.txt");
        fs::write(&llr_file, llrs.join(" ")).unwrap();
        for receiver in ["0", "1"] {
            let decoded = stdout_ok(&[
                "decode", "--code", code.to_str().unwrap(), "--input", llr_file.to_str().unwrap(), "--channel",
                "bsc:0.11", "--receiver", receiver,
            ]);
            assert_eq!(decoded.trim(), bits, "{scheme} receiver {receiver}");
        }
    }
}

#[test]
fn simulate_small_staircase() {
    let s = stdout_ok(&[
        "simulate", "--scheme", "scheme1", "--channels", "bec:0.3,bsc:0.05", "--n", "4", "--k", "4", "--rs-dim", "4",
        "--trials", "1000", "--seed", "8",
    ]);
    for line in s.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let trials: f64 = f[4].parse().unwrap();
        let rate: f64 = f[6].parse().unwrap();
        let bound: f64 = f[9].parse().unwrap();
        assert_eq!(trials, 1000.0);
        let b = bound.min(1.0);
        assert!(rate <= bound + 3.0 * (b * (1.0 - b) / trials).sqrt(), "{line}");
    }
}

#[test]
fn dominate_enumerates_small_families() {
    let s = stdout_ok(&["dominate", "--capacity", "0.9", "--eps", "0.9"]);
    assert!(s.contains("members = "), "{s}");
}

#[test]
fn bad_input_reports_error() {
    let out = unipolar(&["gap", "--channels", "bsc:2", "--n", "4", "--rate", "0.3"]);
    assert!(!out.status.success());
    let out = unipolar(&["encode", "--code", "/nonexistent/code.kv"]);
    assert!(!out.status.success());
}
