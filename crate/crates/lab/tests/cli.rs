use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qlimit_lab::record::from_json;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn qlimit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlimit"))
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn golden_outputs_are_reproduced_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["psistar-sweep", "depolarizing-cm"] {
        let out = dir.path().join(format!("{name}.csv"));
        let cfg = golden(&format!("{name}.conf"));
        let status = qlimit(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        assert_eq!(fs::read(&out).unwrap(), fs::read(golden(&format!("{name}.csv"))).unwrap(), "{name}");
    }
}

#[test]
fn results_go_to_stdout_only_when_asked() {
    let cfg = golden("psistar-sweep.conf");
    let out = qlimit(&["run", cfg.to_str().unwrap(), "--out", "-"]);
    assert!(out.status.success());
    assert_eq!(out.stdout, fs::read(golden("psistar-sweep.csv")).unwrap());
    assert!(String::from_utf8_lossy(&out.stderr).contains("psistar-sweep"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = qlimit(&["run", cfg.to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert!(out.stdout.is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = qlimit(&["run", "/nonexistent/config", "--out", "-"]);
    assert_eq!(missing.status.code(), Some(1));

    let bad = write_config(dir.path(), "bad.conf", "experiment = cm-convergence\nk = 3\n");
    let out = qlimit(&["run", &bad, "--out", "-"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_grid"));

    let no_out = write_config(dir.path(), "noout.conf", "experiment = psistar-sweep\nk = 3\n");
    assert_eq!(qlimit(&["run", &no_out]).status.code(), Some(1));

    let big = write_config(dir.path(), "big.conf", "experiment = psistar-sweep\nk = 25\n");
    let out = qlimit(&["run", &big, "--out", "-"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn identical_bytes_across_thread_counts_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        "experiment = cm-convergence\nk = 3\nn_grid = 12,20\ntrials = 5\nm = 3\nprobe = random-pure\nseed = 17\n",
        "experiment = output-cloud\nweights = 0.6,0.4\nn_grid = 6\ntrials = 8\nseed = 3\n",
        "experiment = eb-tensor\nk = 2\nn_grid = 2\npsi_in = 2\ntrials = 6\nseed = 8\n",
        "experiment = norm-limit\nchannel = stinespring\nk = 2\nt = 0.4\nn_grid = 5\ntrials = 4\nrestarts = 2\n",
    ];
    for (i, body) in configs.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{i}.conf"), body);
        let mut outputs = Vec::new();
        for threads in ["1", "3", "3"] {
            let out = qlimit(&["run", &cfg, "--out", "-", "--format", "json", "--threads", threads]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            outputs.push(out.stdout);
        }
        assert_eq!(outputs[0], outputs[1], "{body}");
        assert_eq!(outputs[1], outputs[2], "{body}");
        assert!(!from_json(std::str::from_utf8(&outputs[0]).unwrap()).unwrap().is_empty());
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.conf",
        "experiment = output-cloud\nk = 2\nn_grid = 4\ntrials = 3\nseed = 1\n",
    );
    let a = qlimit(&["run", &cfg, "--out", "-"]).stdout;
    let b = qlimit(&["run", &cfg, "--out", "-", "--seed", "1"]).stdout;
    let c = qlimit(&["run", &cfg, "--out", "-", "--seed", "2"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(String::from_utf8_lossy(&c).contains("output-cloud,0,2,4,2,"));
}
