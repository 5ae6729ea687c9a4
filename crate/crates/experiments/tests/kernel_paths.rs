use peqml_core::builders::feature_map;
use peqml_core::sim::NoiseConfig;
use peqml_core::{evaluate_state, DeviceModel};
use peqml_experiments::kernel::{estimate_kernels_with, KernelConfig, KernelPath};
use peqml_experiments::Runner;

fn points(n: usize, count: usize, offset: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            (0..n)
                .map(|q| (0.37 * (i + 1) as f64 + 0.21 * q as f64 + offset) % 1.0)
                .collect()
        })
        .collect()
}

fn exact(depth: usize) -> KernelConfig {
    KernelConfig {
        depth,
        shots: None,
        seed: 3,
    }
}

/// `|⟨0|U†(x_i) U(x_j)|0⟩|²` from one statevector run of the joined circuit.
fn joined_circuit_oracle(xi: &[f64], xj: &[f64], depth: usize) -> f64 {
    let n = xi.len();
    let mut c = feature_map(n, xj, depth).unwrap();
    c.append(&feature_map(n, xi, depth).unwrap().inverse().unwrap())
        .unwrap();
    evaluate_state(&c).unwrap().probabilities()[0]
}

#[test]
fn noiseless_paths_match_the_joined_circuit() {
    let (train, test) = (points(3, 5, 0.0), points(3, 3, 0.5));
    for mode in ["cnot", "pe"] {
        let runner = Runner::by_name(mode, DeviceModel::uniform(3), NoiseConfig::off(), false).unwrap();
        for path in [KernelPath::Overlap, KernelPath::Factorized, KernelPath::Direct] {
            let k = estimate_kernels_with(path, &train, &test, &exact(2), &runner).unwrap();
            for i in 0..train.len() {
                for j in 0..train.len() {
                    let want = joined_circuit_oracle(&train[i], &train[j], 2);
                    assert!((k.train[(i, j)] - want).abs() < 1e-10, "{mode} {path:?} ({i},{j})");
                }
            }
            for i in 0..test.len() {
                for j in 0..train.len() {
                    let want = joined_circuit_oracle(&test[i], &train[j], 2);
                    assert!(
                        (k.cross[(i, j)] - want).abs() < 1e-10,
                        "{mode} {path:?} cross ({i},{j})"
                    );
                }
            }
        }
    }
}

#[test]
fn factorized_matches_direct_under_markovian_noise() {
    let noise = NoiseConfig {
        quasi_static: false,
        ..NoiseConfig::full(9)
    };
    let (train, test) = (points(3, 4, 0.1), points(3, 2, 0.6));
    for (mode, dd) in [("cnot", false), ("pe", false), ("pe", true)] {
        let runner = Runner::by_name(mode, DeviceModel::uniform(3), noise, dd).unwrap();
        assert_eq!(KernelPath::for_runner(&runner), KernelPath::Factorized);
        let f = estimate_kernels_with(KernelPath::Factorized, &train, &test, &exact(2), &runner).unwrap();
        let d = estimate_kernels_with(KernelPath::Direct, &train, &test, &exact(2), &runner).unwrap();
        assert!((&f.train - &d.train).amax() < 1e-10, "{mode} dd={dd}");
        assert!((&f.cross - &d.cross).amax() < 1e-10, "{mode} dd={dd}");
        // Noise only removes overlap from the diagonal.
        for i in 0..train.len() {
            assert!(f.train[(i, i)] < 1.0 && f.train[(i, i)] > 0.5);
        }
    }
}

#[test]
fn quasi_static_noise_selects_the_direct_path() {
    let runner = Runner::by_name("pe", DeviceModel::uniform(2), NoiseConfig::full(0), true).unwrap();
    assert_eq!(KernelPath::for_runner(&runner), KernelPath::Direct);
    let quiet = Runner::by_name("pe", DeviceModel::uniform(2), NoiseConfig::off(), false).unwrap();
    assert_eq!(KernelPath::for_runner(&quiet), KernelPath::Overlap);
}

#[test]
fn shot_estimates_stay_within_binomial_bounds() {
    let runner = Runner::by_name("cnot", DeviceModel::uniform(3), NoiseConfig::off(), false).unwrap();
    let train = points(3, 6, 0.3);
    let shots = 8192u64;
    let cfg = KernelConfig {
        depth: 2,
        shots: Some(shots),
        seed: 11,
    };
    let k = estimate_kernels_with(KernelPath::Overlap, &train, &[], &cfg, &runner).unwrap();
    for i in 0..train.len() {
        for j in 0..train.len() {
            let p = joined_circuit_oracle(&train[i], &train[j], 2).clamp(0.0, 1.0);
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            assert!((k.train[(i, j)] - p).abs() <= 3.0 * sigma + 1e-12, "({i},{j}) p={p}");
        }
    }
}
