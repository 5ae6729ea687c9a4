use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn peqml(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peqml"))
        .args(args)
        .current_dir(cwd)
        .env_remove(peqml_cli::OUT_DIR_ENV)
        .output()
        .unwrap()
}

fn data_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist_subset.csv")
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

fn assert_same_tree(a: &Path, b: &Path) {
    assert_eq!(listing(a), listing(b));
    for name in listing(a) {
        assert_eq!(
            std::fs::read(a.join(&name)).unwrap(),
            std::fs::read(b.join(&name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn transpile_sample_reports_pe_shorter() {
    let dir = tempfile::tempdir().unwrap();
    let out = peqml(&["transpile", "--mode", "pe", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/durations.csv")).unwrap();
    let duration = |mode: &str| -> f64 {
        csv.lines()
            .find(|l| l.split(',').nth(1) == Some(mode))
            .and_then(|l| l.split(',').nth(3))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(duration("pe") < 0.5 * duration("cnot"));
    let lowered = std::fs::read_to_string(dir.path().join("o/rzz_sample.pe.txt")).unwrap();
    assert!(lowered.contains("CR 0 1"));
    assert!(!lowered.contains("CX"));
}

#[test]
fn transpile_reads_circuit_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bell.txt"), "H 0\nCX 0 1\nRZZ 1 2 0.3\n").unwrap();
    let out = peqml(
        &["transpile", "bell.txt", "--mode", "cnot", "--dd", "on", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        listing(&dir.path().join("o")),
        ["bell.cnot.txt", "durations.csv", "metrics.json"]
    );
    let csv = std::fs::read_to_string(dir.path().join("o/durations.csv")).unwrap();
    assert!(csv.contains("bell,cnot+dd,3,"));
}

#[test]
fn missing_data_file_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = peqml(
        &["kernel-classify", "--data", "nope.csv", "--qubits", "2", "--out", "o"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn bad_configuration_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[nibp]\nsamples = 0\n").unwrap();
    let out = peqml(&["--config", "c.toml", "nibp-sweep", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples"));
    std::fs::write(dir.path().join("c.toml"), "[nibp]\nsampels = 3\n").unwrap();
    let out = peqml(&["--config", "c.toml", "nibp-sweep", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampels"));
    let out = peqml(&["nibp-sweep", "--workers", "0", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert!(!dir.path().join("o").exists());
}

#[test]
fn noiseless_sweep_is_mode_independent() {
    let dir = tempfile::tempdir().unwrap();
    let out = peqml(
        &[
            "nibp-sweep",
            "--noise",
            "off",
            "--n-min",
            "2",
            "--n-max",
            "4",
            "--samples",
            "6",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("o/nibp.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["n", "mode", "mean_abs_loss", "sem_loss", "mean_abs_grad", "sem_grad"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        assert_eq!((&pair[0][1], &pair[1][1]), ("cnot", "pe"));
        for col in 2..6 {
            let (a, b): (f64, f64) = (pair[0][col].parse().unwrap(), pair[1][col].parse().unwrap());
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "out_dir = \"from_file\"\n").unwrap();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_peqml"));
        cmd.args(["--config", "c.toml", "transpile"])
            .args(extra)
            .current_dir(dir.path());
        match env {
            Some(v) => cmd.env(peqml_cli::OUT_DIR_ENV, v),
            None => cmd.env_remove(peqml_cli::OUT_DIR_ENV),
        };
        assert!(cmd.output().unwrap().status.success());
    };
    run(&[], None);
    assert!(dir.path().join("from_file/durations.csv").exists());
    run(&[], Some("from_env"));
    assert!(dir.path().join("from_env/durations.csv").exists());
    run(&["--out", "from_flag"], Some("from_env"));
    assert!(dir.path().join("from_flag/durations.csv").exists());
}

#[test]
fn ingest_writes_subsets() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file();
    let data = data.to_str().unwrap();
    let args = [
        "ingest",
        "--data",
        data,
        "--per-class-train",
        "1",
        "--per-class-test",
        "1",
    ];
    let out = peqml(&[&args[..], &["--out", "raw"]].concat(), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let train = std::fs::read_to_string(dir.path().join("raw/train.csv")).unwrap();
    assert_eq!(train.lines().count(), 10);
    assert_eq!(train.lines().next().unwrap().split(',').count(), 785);
    let out = peqml(&[&args[..], &["--features", "3", "--out", "svd"]].concat(), dir.path());
    assert!(out.status.success());
    let test = std::fs::read_to_string(dir.path().join("svd/test.csv")).unwrap();
    assert_eq!(test.lines().count(), 10);
    assert_eq!(test.lines().next().unwrap().split(',').count(), 4);
    // Same seed, same subset.
    let out = peqml(&[&args[..], &["--out", "raw2"]].concat(), dir.path());
    assert!(out.status.success());
    assert_same_tree(&dir.path().join("raw"), &dir.path().join("raw2"));
}

#[test]
fn config_values_are_overridden_by_flags_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "seed = 4\n[nibp]\nn_min = 2\nn_max = 3\nsamples = 9\nmodes = [\"pe\"]\n",
    )
    .unwrap();
    let out = peqml(
        &[
            "--config",
            "c.toml",
            "--seed",
            "5",
            "nibp-sweep",
            "--samples",
            "2",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("o/metrics.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["seed"], 5);
    assert_eq!(m["config"]["command"], "nibp-sweep");
    assert_eq!(m["config"]["settings"]["samples"], 2);
    assert_eq!(m["config"]["settings"]["n_max"], 3);
    assert_eq!(m["config"]["settings"]["modes"], serde_json::json!(["pe"]));
    assert_eq!(m["results"]["records"].as_array().unwrap().len(), 2);
}

#[test]
fn qnn_and_kernel_outputs_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file();
    std::fs::write(
        dir.path().join("c.toml"),
        format!(
            "seed = 3\n\
             [qnn]\nqubits = [2]\niterations = 3\ncalibration_samples = 2\nhalf_pool = 80\nper_class = 4\nshots = 512\nmodes = [\"cnot\", \"pe+dd\"]\n\
             [kernel]\ndata = {:?}\nqubits = [2, 3]\nclasses = [0, 7, 9]\nper_class_train = 3\nper_class_test = 2\nshots = 1024\nmodes = [\"cnot\", \"pe\", \"pe+dd\"]\n",
            data.to_str().unwrap()
        ),
    )
    .unwrap();
    for cmd in ["qnn-train", "kernel-classify"] {
        for workers in ["1", "3"] {
            let out = peqml(
                &[
                    "--config",
                    "c.toml",
                    "--workers",
                    workers,
                    cmd,
                    "--out",
                    &format!("{cmd}-{workers}"),
                ],
                dir.path(),
            );
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
        assert_same_tree(
            &dir.path().join(format!("{cmd}-1")),
            &dir.path().join(format!("{cmd}-3")),
        );
    }
    let names = listing(&dir.path().join("kernel-classify-1"));
    assert!(names.contains(&"kernel_train_n3_pe+dd.csv".to_string()));
    assert!(names.contains(&"kernel_test_n2_ideal.csv".to_string()));
    let trace = std::fs::read_to_string(dir.path().join("qnn-train-1/loss_trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "n,mode,iteration,loss");
    // ideal, cnot and pe+dd, three iterations each.
    assert_eq!(trace.lines().count(), 1 + 3 * 3);
}
