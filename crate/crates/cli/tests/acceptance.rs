//! End-to-end acceptance checks, one line of output per criterion.
//!
//! The full run takes about an hour on one core, so it is ignored by
//! default:
//!
//! ```text
//! cargo test --release -p peqml-cli --test acceptance -- --ignored --nocapture
//! ```
//!
//! `PEQML_ACCEPTANCE=1,2,8` restricts the run to the listed criteria.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64 as C;
use rand::Rng;

use peqml_cli::config::Config;
use peqml_cli::{commands, OUT_DIR_ENV};
use peqml_core::builders::{feature_map, hva_tfim, nibp_layers, qnn_circuit, HvaParameters};
use peqml_core::seed::rng_for;
use peqml_core::sim::{NoiseConfig, Program};
use peqml_core::transpile::{
    check_equivalence, expand_echo, lower_to_cnot, lower_to_rzx, merge_single_qubit, phase_distance, PipelineRegistry,
};
use peqml_core::{evaluate_unitary, evolve, schedule, Circuit, DensityMatrix, DeviceModel, Gate};
use peqml_experiments::nibp::{finite_difference_grad, loss, parameter_shift_grad, sample_parameters, NibpSweepConfig};
use peqml_experiments::qnn::DEFAULT_DEPTH;
use peqml_experiments::Runner;

const EQUIVALENCE_TOL: f64 = 1e-8;
const ECHO_TOL: f64 = 1e-12;
const DECAY_TOL: f64 = 1e-6;
const PHYSICAL_TOL: f64 = 1e-9;
const QNN_MIN_ACCURACY: f64 = 0.9;
const GRADIENT_H: f64 = 1e-4;
const GRADIENT_TOL: f64 = 1e-4;
const MODE_TOL: f64 = 1e-6;
const SEEDS: [u64; 3] = [0, 1, 2];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist_subset.csv")
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn random_circuit(rng: &mut impl Rng) -> Circuit {
    let width = rng.random_range(1..=3usize);
    let len = rng.random_range(0..=8usize);
    let mut gates = Vec::with_capacity(len);
    while gates.len() < len {
        let q = rng.random_range(0..width);
        let angle = rng.random_range(-2.0 * PI..2.0 * PI);
        let kind = rng.random_range(0..7);
        if kind >= 4 && width < 2 {
            continue;
        }
        let a = rng.random_range(0..width.max(2) - 1);
        let (c, t) = if rng.random_bool(0.5) { (a, a + 1) } else { (a + 1, a) };
        gates.push(match kind {
            0 => Gate::H(q),
            1 => Gate::Rx(q, angle.into()),
            2 => Gate::Ry(q, angle.into()),
            3 => Gate::Rz(q, angle.into()),
            4 => Gate::Rzz(c, t, angle.into()),
            5 => Gate::Rzx(c, t, angle.into()),
            _ => Gate::Cnot(c, t),
        });
    }
    Circuit::from_gates(width, gates).unwrap()
}

fn transpilation_correctness() -> Outcome {
    let mut rng = rng_for(1, &[]);
    let registry = PipelineRegistry::default();
    let mut failures = Vec::new();
    for k in 0..200 {
        let c = random_circuit(&mut rng);
        let rzx = lower_to_rzx(&c).unwrap();
        let echoed = expand_echo(&rzx).unwrap();
        let cnot = lower_to_cnot(&c).unwrap();
        let stages = [
            ("lower_to_cnot", cnot.clone()),
            ("lower_to_rzx", rzx),
            ("expand_echo", echoed.clone()),
            ("merge_single_qubit", merge_single_qubit(&c).unwrap()),
            ("merge(cnot)", merge_single_qubit(&cnot).unwrap()),
            ("merge(echo)", merge_single_qubit(&echoed).unwrap()),
            ("cnot pipeline", registry.get("cnot").unwrap().run(&c).unwrap()),
            ("pe pipeline", registry.get("pe").unwrap().run(&c).unwrap()),
        ];
        for (name, out) in stages {
            if !check_equivalence(&c, &out, EQUIVALENCE_TOL).unwrap() {
                failures.push(format!("circuit {k} {name}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("200 circuits x 8 stages, tol {EQUIVALENCE_TOL:e}, failures {failures:?}"),
    )
}

type M4 = [[C; 4]; 4];

fn mul(a: &M4, b: &M4) -> M4 {
    let mut m = [[C::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

/// `exp(-iα Z₀X₁/2)`; basis index bit 0 is qubit 0.
fn zx_rotation(alpha: f64) -> M4 {
    let mut m = [[C::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let id = if i == j { 1.0 } else { 0.0 };
            let z = if (i & 1) == (j & 1) {
                if i & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            };
            let x = if (i >> 1) != (j >> 1) { 1.0 } else { 0.0 };
            m[i][j] = C::new((alpha / 2.0).cos() * id, -(alpha / 2.0).sin() * z * x);
        }
    }
    m
}

fn x_on_qubit0() -> M4 {
    let mut m = [[C::new(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i ^ 1] = C::new(1.0, 0.0);
    }
    m
}

fn echo_identity() -> Outcome {
    let mut rng = rng_for(2, &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let theta = rng.random_range(-PI..PI);
        let x = x_on_qubit0();
        let product = mul(
            &mul(&mul(&zx_rotation(theta / 2.0), &x), &zx_rotation(-theta / 2.0)),
            &x,
        );
        let target = zx_rotation(theta);
        let dense_err = (0..16)
            .map(|k| (product[k / 4][k % 4] - target[k / 4][k % 4]).norm())
            .fold(0.0, f64::max);
        let rzx = Circuit::from_gates(2, [Gate::Rzx(0, 1, theta.into())]).unwrap();
        let echoed = evaluate_unitary(&expand_echo(&rzx).unwrap()).unwrap();
        let oracle = nalgebra::DMatrix::from_fn(4, 4, |i, j| target[i][j]);
        worst = worst.max(dense_err).max(phase_distance(&echoed, &oracle));
    }
    outcome(
        worst <= ECHO_TOL,
        format!("50 angles, max deviation {worst:.2e} (tol {ECHO_TOL:e})"),
    )
}

fn duration_ordering() -> Outcome {
    let dev = DeviceModel::uniform(2);
    let registry = PipelineRegistry::default();
    let duration = |mode: &str, theta: f64| {
        let c = Circuit::from_gates(2, [Gate::Rzz(0, 1, theta.into())]).unwrap();
        schedule(&registry.get(mode).unwrap().run(&c).unwrap(), &dev)
            .unwrap()
            .total_duration()
    };
    let mut violations = Vec::new();
    for k in 0..=200 {
        let theta = -FRAC_PI_2 + PI * k as f64 / 200.0;
        if duration("pe", theta) >= duration("cnot", theta) {
            violations.push(theta);
        }
    }
    let (pe, cnot) = (duration("pe", 0.5), duration("cnot", 0.5));
    outcome(
        violations.is_empty() && pe < 0.5 * cnot,
        format!("201 angles in [-pi/2, pi/2], violations {violations:?}; RZZ(0.5) pe {pe:.1} ns vs cnot {cnot:.1} ns"),
    )
}

fn experiment_circuits() -> Vec<Circuit> {
    let x = |n: usize, s: f64| (0..n).map(|q| (0.31 * q as f64 + s) % 1.0).collect::<Vec<_>>();
    let mut out = Vec::new();
    for n in 2..=5 {
        let theta: Vec<f64> = (0..2 * n).map(|k| 0.4 * k as f64 - 1.0).collect();
        out.push(qnn_circuit(&x(n, 0.1), &theta, DEFAULT_DEPTH).unwrap());
    }
    for n in 3..=7 {
        let mut c = feature_map(n, &x(n, 0.2), 4).unwrap();
        c.append(&feature_map(n, &x(n, 0.7), 4).unwrap().inverse().unwrap())
            .unwrap();
        out.push(c);
    }
    let cfg = NibpSweepConfig::default();
    for n in 2..=7 {
        out.push(hva_tfim(&sample_parameters(&cfg, n, 0)).unwrap());
    }
    out
}

fn noise_model_analytics() -> Outcome {
    let dev = DeviceModel::uniform(1);
    let delay = |t: f64| schedule(&Circuit::from_gates(1, [Gate::Delay(0, t)]).unwrap(), &dev).unwrap();
    let damping = NoiseConfig {
        amplitude_damping: true,
        ..NoiseConfig::off()
    };
    let mut rho = DensityMatrix::diagonal(1, &[0.0, 1.0]).unwrap();
    Program::compile(&delay(dev.t1[0]), &dev, &damping)
        .unwrap()
        .apply(&mut rho)
        .unwrap();
    let t1_err = (rho.get(1, 1).re - (-1.0f64).exp()).abs();

    // Amplitude damping scales coherence by sqrt(1 - gamma), pure dephasing
    // by exp(-t/T_phi) with 1/T_phi = 1/T2 - 1/(2 T1).
    let both = NoiseConfig {
        amplitude_damping: true,
        dephasing: true,
        ..NoiseConfig::off()
    };
    let mut t2_err: f64 = 0.0;
    for t in [500.0, 20_000.0, 80_000.0, 250_000.0] {
        let half = C::new(0.5, 0.0);
        let mut rho = DensityMatrix::from_matrix(&nalgebra::DMatrix::from_element(2, 2, half)).unwrap();
        Program::compile(&delay(t), &dev, &both)
            .unwrap()
            .apply(&mut rho)
            .unwrap();
        let gamma = 1.0 - (-t / dev.t1[0]).exp();
        let t_phi = 1.0 / (1.0 / dev.t2[0] - 0.5 / dev.t1[0]);
        let analytic = 0.5 * (1.0 - gamma).sqrt() * (-t / t_phi).exp();
        t2_err = t2_err.max((rho.get(0, 1).norm() - analytic).abs());
    }

    let registry = PipelineRegistry::default();
    let mut checked = 0;
    let mut unphysical = Vec::new();
    for c in experiment_circuits() {
        let dev = DeviceModel::uniform(c.width());
        for (mode, dd) in [("cnot", false), ("pe", false), ("pe", true)] {
            let runner = Runner::new(registry.get(mode).unwrap(), dev.clone(), NoiseConfig::full(7), dd);
            let rho = evolve(&runner.compile(&c).unwrap(), &dev, runner.noise()).unwrap();
            if let Err(e) = rho.validate(PHYSICAL_TOL) {
                unphysical.push(format!("n={} {mode} dd={dd}: {e}", c.width()));
            }
            checked += 1;
        }
    }
    outcome(
        t1_err <= DECAY_TOL && t2_err <= DECAY_TOL && unphysical.is_empty(),
        format!(
            "T1 error {t1_err:.1e}, coherence error {t2_err:.1e} (tol {DECAY_TOL:e}); {checked} noisy states physical to {PHYSICAL_TOL:e}, failures {unphysical:?}"
        ),
    )
}

fn qnn_trend() -> Outcome {
    let mut ideal_ok = true;
    let mut duration_ok = true;
    let mut wins = [0usize; 2];
    let mut lines = Vec::new();
    for seed in SEEDS {
        let cfg = Config {
            seed,
            ..Config::default()
        };
        let report = commands::qnn::experiment(&cfg).unwrap();
        let get = |n: usize, mode: &str| report.records.iter().find(|r| r.n == n && r.mode == mode).unwrap();
        for n in 2..=5 {
            let (ideal, cnot, pe) = (get(n, "ideal"), get(n, "cnot"), get(n, "pe"));
            ideal_ok &= ideal.test_accuracy >= QNN_MIN_ACCURACY;
            duration_ok &= pe.mean_duration_ns < cnot.mean_duration_ns;
            if n >= 4 && pe.test_accuracy >= cnot.test_accuracy {
                wins[n - 4] += 1;
            }
            lines.push(format!(
                "s{seed} n{n} ideal {:.2} cnot {:.2} pe {:.2}",
                ideal.test_accuracy, cnot.test_accuracy, pe.test_accuracy
            ));
        }
    }
    outcome(
        ideal_ok && duration_ok && wins.iter().all(|&w| w >= 2),
        format!(
            "noiseless >= {QNN_MIN_ACCURACY}: {ideal_ok}; pe >= cnot at n=4,5 in {wins:?} of 3 seeds; pe shorter: {duration_ok}; [{}]",
            lines.join(", ")
        ),
    )
}

fn kernel_trend() -> Outcome {
    let mut cfg = Config::default();
    cfg.kernel.data = data_file();
    // Quasi-static noise needs one density evolution per kernel entry, which
    // is out of reach at nine qubits; the Markovian channels and readout
    // error stay on.
    cfg.noise.quasi_static = false;
    let runs = commands::kernel::experiment(&cfg).unwrap();
    let get = |n: usize, mode: &str| {
        &runs
            .iter()
            .find(|r| r.record.n == n && r.record.mode == mode)
            .unwrap()
            .record
    };
    let n_test = (cfg.kernel.per_class_test * cfg.kernel.classes.len()) as f64;
    let ideal: Vec<f64> = cfg
        .kernel
        .qubits
        .iter()
        .map(|&n| get(n, "ideal").test_accuracy)
        .collect();
    let monotone = ideal.windows(2).all(|w| (w[1] - w[0]) * n_test >= -1.0 - 1e-9);
    let nmse_pairs: Vec<(usize, f64, f64)> = cfg
        .kernel
        .qubits
        .iter()
        .filter(|&&n| n >= 6)
        .map(|&n| (n, get(n, "pe").nmse, get(n, "cnot").nmse))
        .collect();
    let nmse_ok = nmse_pairs.iter().all(|&(_, pe, cnot)| pe < cnot);
    let (pe9, cnot9) = (get(9, "pe").test_accuracy, get(9, "cnot").test_accuracy);
    outcome(
        monotone && nmse_ok && pe9 >= cnot9,
        format!(
            "noiseless accuracy {ideal:.2?} non-decreasing within one error: {monotone}; nmse pe < cnot for n >= 6: {nmse_ok} {nmse_pairs:.3?}; n=9 accuracy pe {pe9:.2} vs cnot {cnot9:.2}"
        ),
    )
}

fn dd_ablation() -> Outcome {
    let mut acc = vec![Vec::new(); 3];
    for seed in SEEDS {
        let mut cfg = Config {
            seed,
            ..Config::default()
        };
        cfg.kernel.data = data_file();
        cfg.kernel.classes = vec![0, 7, 9];
        cfg.kernel.qubits = vec![5];
        cfg.kernel.modes = vec!["cnot".into(), "pe".into(), "pe+dd".into()];
        let runs = commands::kernel::experiment(&cfg).unwrap();
        for (k, mode) in ["cnot", "pe", "pe+dd"].iter().enumerate() {
            acc[k].push(
                runs.iter()
                    .find(|r| r.record.mode == *mode)
                    .unwrap()
                    .record
                    .test_accuracy,
            );
        }
    }
    let diff = |a: usize, b: usize| mean_and_se(&acc[a].iter().zip(&acc[b]).map(|(x, y)| x - y).collect::<Vec<_>>());
    let (pe_over_cnot, dd_over_pe) = (diff(1, 0), diff(2, 1));
    let ok = |(m, se): (f64, f64)| m + 2.0 * se >= -1e-12;
    outcome(
        ok(pe_over_cnot) && ok(dd_over_pe),
        format!(
            "accuracy cnot {:.3?} pe {:.3?} pe+dd {:.3?}; paired pe-cnot {:.3}+-{:.3}, pe+dd-pe {:.3}+-{:.3}",
            acc[0], acc[1], acc[2], pe_over_cnot.0, pe_over_cnot.1, dd_over_pe.0, dd_over_pe.1
        ),
    )
}

fn gradient_validity() -> Outcome {
    let cfg = NibpSweepConfig {
        seed: 31,
        ..NibpSweepConfig::default()
    };
    let runner = |n| Runner::by_name("pe", DeviceModel::uniform(n), NoiseConfig::off(), false).unwrap();
    let mut worst: f64 = 0.0;
    let mut nontrivial = 0;
    for k in 0..20 {
        let n = 2 + k % 3;
        // The sweep's full depth puts the last coupling outside the light
        // cone of Z0Z1 for n >= 4, so short ansatzes are mixed in.
        let layers = if k % 4 == 3 { nibp_layers(n) } else { 1 + k % 2 };
        let full = sample_parameters(&cfg, n, k);
        let p = HvaParameters::new(
            n,
            layers,
            full.gammas[..layers * n].to_vec(),
            full.betas[..layers * (n - 1)].to_vec(),
        )
        .unwrap();
        let r = runner(n);
        let f = |q: &HvaParameters| loss(q, &r, 0);
        let shift = parameter_shift_grad(&p, f).unwrap();
        let fd = finite_difference_grad(&p, f, GRADIENT_H).unwrap();
        worst = worst.max((shift - fd).abs());
        if shift.abs() > 1e-3 {
            nontrivial += 1;
        }
    }
    outcome(
        worst <= GRADIENT_TOL,
        format!("20 instances n <= 4, max |shift - fd| {worst:.2e} (h {GRADIENT_H:e}, tol {GRADIENT_TOL:e}), {nontrivial} with |grad| > 1e-3"),
    )
}

fn nibp_trend() -> Outcome {
    let noisy_cfg = Config::default();
    let quiet_cfg = Config {
        noise: peqml_cli::config::NoiseFlags::all(false),
        ..Config::default()
    };
    let quiet = commands::nibp::experiment(&quiet_cfg).unwrap();
    let mode_gap = quiet
        .records
        .chunks(2)
        .map(|p| {
            (p[0].mean_abs_loss - p[1].mean_abs_loss)
                .abs()
                .max((p[0].mean_abs_grad - p[1].mean_abs_grad).abs())
        })
        .fold(0.0, f64::max);
    let noisy = commands::nibp::experiment(&noisy_cfg).unwrap();
    let slope = |mode: &str| {
        noisy
            .fits
            .iter()
            .find(|f| f.mode == mode && matches!(f.quantity, peqml_experiments::nibp::Quantity::Loss))
            .and_then(|f| f.slope)
    };
    let (s_cnot, s_pe) = (slope("cnot"), slope("pe"));
    let slope_ok = matches!((s_cnot, s_pe), (Some(c), Some(p)) if c.abs() > p.abs());
    let get = |n: usize, mode: &str| noisy.records.iter().find(|r| r.n == n && r.mode == mode).unwrap();
    let mut grads = Vec::new();
    let mut grad_ok = true;
    for n in noisy_cfg.nibp.n_onset..=noisy_cfg.nibp.n_max {
        let (pe, cnot) = (get(n, "pe"), get(n, "cnot"));
        let se = (pe.sem_grad.powi(2) + cnot.sem_grad.powi(2)).sqrt();
        grad_ok &= pe.mean_abs_grad - cnot.mean_abs_grad >= -2.0 * se;
        grads.push((n, pe.mean_abs_grad, cnot.mean_abs_grad));
    }
    let losses: Vec<(usize, f64, f64)> = (noisy_cfg.nibp.n_min..=noisy_cfg.nibp.n_max)
        .map(|n| (n, get(n, "cnot").mean_abs_loss, get(n, "pe").mean_abs_loss))
        .collect();
    outcome(
        mode_gap <= MODE_TOL && slope_ok && grad_ok,
        format!(
            "noiseless mode gap {mode_gap:.1e} (tol {MODE_TOL:e}); loss slope cnot {s_cnot:.4?} pe {s_pe:.4?}; noisy loss (n, cnot, pe) {losses:.4?}; gradient (n, pe, cnot) {grads:.5?}"
        ),
    )
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        format!(
            "seed = 11\n\
             [qnn]\nqubits = [2, 3]\niterations = 5\ncalibration_samples = 3\nhalf_pool = 100\nper_class = 5\nmodes = [\"cnot\", \"pe\", \"pe+dd\"]\n\
             [kernel]\ndata = {:?}\nqubits = [3, 4]\nclasses = [0, 7, 9]\nper_class_train = 4\nper_class_test = 3\nmodes = [\"cnot\", \"pe\", \"pe+dd\"]\n\
             [nibp]\nn_max = 5\nsamples = 10\nmodes = [\"cnot\", \"pe\", \"pe+dd\"]\n\
             [ingest]\ndata = {:?}\nper_class_train = 2\nper_class_test = 2\nfeatures = 4\n",
            data_file().to_str().unwrap(),
            data_file().to_str().unwrap()
        ),
    )
    .unwrap();
    let mut mismatches = Vec::new();
    let commands = ["transpile", "ingest", "qnn-train", "kernel-classify", "nibp-sweep"];
    for cmd in commands {
        let mut trees = Vec::new();
        for (run, workers) in ["1", "3", "1"].iter().enumerate() {
            let out = format!("{cmd}-{run}");
            let result = Command::new(env!("CARGO_BIN_EXE_peqml"))
                .args(["--config", "c.toml", "--workers", workers, cmd, "--out", &out])
                .current_dir(dir.path())
                .env_remove(OUT_DIR_ENV)
                .output()
                .unwrap();
            assert!(
                result.status.success(),
                "{cmd} failed: {}",
                String::from_utf8_lossy(&result.stderr)
            );
            trees.push(listing(&dir.path().join(out)));
        }
        if trees.iter().any(|t| *t != trees[0]) {
            mismatches.push(cmd);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{} commands run with 1, 3 and 1 workers; differing outputs {mismatches:?}",
            commands.len()
        ),
    )
}

type Check = fn() -> Outcome;

#[test]
#[ignore = "runs every experiment at full size (about an hour)"]
fn acceptance() {
    let criteria: [(usize, &str, Check); 10] = [
        (1, "transpilation correctness", transpilation_correctness),
        (2, "echo identity", echo_identity),
        (3, "duration ordering", duration_ordering),
        (4, "noise model analytics", noise_model_analytics),
        (5, "qnn trend", qnn_trend),
        (6, "kernel trend", kernel_trend),
        (7, "dd ablation", dd_ablation),
        (8, "gradient validity", gradient_validity),
        (9, "nibp trend", nibp_trend),
        (10, "reproducibility", reproducibility),
    ];
    let selected: Option<Vec<usize>> = std::env::var("PEQML_ACCEPTANCE").ok().map(|s| {
        s.split(',')
            .map(|t| t.trim().parse().expect("criterion number"))
            .collect()
    });
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {name}: {verdict} ({:.0} s) {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
