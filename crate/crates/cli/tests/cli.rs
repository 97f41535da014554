use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn msetomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msetomo"))
        .args(args)
        .output()
        .expect("spawn msetomo")
}

const HEADER: &str = "mode,d,N,k,N_T,variant,mean_mse,median_mse,q1,q3,gm_benchmark,samples";

#[test]
fn estimate_state_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "d = 2\nshots = 200\niters = 5\ntargets = 2\nruns = 2\nseed = 9\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let status = msetomo(&[
        "estimate",
        "state",
        "--config",
        config.to_str().unwrap(),
        "--iters",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("state,2,200,4,1600,raw,"));
    assert!(rows[3].ends_with(",4"));
}

#[test]
fn estimate_unitary_variants_follow_post() {
    for (post, expected) in [
        ("none", vec!["raw"]),
        ("gs", vec!["raw", "gs"]),
        ("closest", vec!["raw", "closest"]),
    ] {
        let out = msetomo(&[
            "estimate",
            "unitary",
            "--d",
            "2",
            "--shots",
            "100",
            "--iters",
            "2",
            "--targets",
            "1",
            "--runs",
            "1",
            "--post",
            post,
        ]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let mut variants: Vec<&str> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(5).unwrap())
            .collect();
        variants.dedup();
        assert_eq!(variants, expected, "post={post}");
    }
}

#[test]
fn same_seed_same_bytes() {
    let args = [
        "estimate",
        "state",
        "--shots",
        "100",
        "--iters",
        "3",
        "--targets",
        "3",
        "--runs",
        "2",
        "--seed",
        "5",
    ];
    let a = msetomo(&args);
    let b = msetomo(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "dimension = 3\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["estimate", "state", "--config", bad.to_str().unwrap()],
        vec!["estimate", "state", "--d", "1"],
        vec!["estimate", "state", "--runs", "0"],
        vec!["estimate", "unitary", "--post", "qr"],
        vec!["estimate", "unitary", "--post", "none", "--re-update"],
        vec!["estimate", "sideways"],
    ];
    for args in cases {
        let out = msetomo(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

fn write_power_law(path: &Path) {
    let mut text = format!("{HEADER}\n");
    for k in 1..=100u64 {
        let n_t = 2000 * k;
        let mse = 3.0 / n_t as f64;
        text.push_str(&format!("state,2,1000,{k},{n_t},raw,{mse:.16e},{mse:.16e},{mse:.16e},{mse:.16e},{mse:.16e},200\n"));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn fit_recovers_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("exact.csv");
    write_power_law(&csv);
    let out = msetomo(&["fit", "--in", csv.to_str().unwrap(), "--window", "46:100"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "mode,d,N,variant,k_lo,k_hi,p,a,residual");
    assert_eq!(lines.len(), 2);
    let fields: Vec<_> = lines[1].split(',').collect();
    assert_eq!(&fields[..6], ["state", "2", "1000", "raw", "46", "100"]);
    assert!((fields[6].parse::<f64>().unwrap() - 3.0).abs() < 1e-5);
    assert!((fields[7].parse::<f64>().unwrap() - 1.0).abs() < 1e-5);

    let defaults = msetomo(&["fit", "--in", csv.to_str().unwrap()]);
    assert_eq!(
        String::from_utf8(defaults.stdout).unwrap().lines().count(),
        3
    );
}

#[test]
fn fit_window_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("exact.csv");
    write_power_law(&csv);
    for window in ["50:150", "20:10", "abc"] {
        let out = msetomo(&["fit", "--in", csv.to_str().unwrap(), "--window", window]);
        assert_eq!(out.status.code(), Some(2), "window {window}");
    }
    let missing = msetomo(&["fit", "--in", dir.path().join("nope.csv").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}
