use anyhow::Context;
use serde::Serialize;

use peqml_core::seed::derive_seed;
use peqml_core::sim::NoiseConfig;
use peqml_experiments::digits::{read_digits, subsample};
use peqml_experiments::kernel::{self, classify, nmse, KernelMatrix};
use peqml_experiments::qnn::Dataset;
use peqml_experiments::svd::truncated_svd_reduce;

use super::check_qubits;
use crate::config::{Config, Variant};
use crate::output::Outputs;

const KERNEL_STREAM: u64 = 0x6E27;

/// Label of the exact noiseless kernel every other run is compared with.
pub const IDEAL: &str = "ideal";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRecord {
    pub n: usize,
    pub mode: String,
    pub noisy: bool,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Against the ideal kernel; zero for the ideal run itself.
    pub nmse: f64,
    pub mean_duration_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRun {
    pub record: KernelRecord,
    pub train: KernelMatrix,
    pub cross: KernelMatrix,
}

/// Reduces the digits to `n` features and classifies them with the ideal
/// kernel and with one estimated kernel per mode, for every `n`.
pub fn experiment(cfg: &Config) -> anyhow::Result<Vec<KernelRun>> {
    let k = &cfg.kernel;
    check_qubits(&k.qubits, 1)?;
    let variants = Variant::parse_all(&k.modes, k.dd)?;
    let rows = read_digits(&k.data).with_context(|| format!("loading digits from {}", k.data.display()))?;
    let subset = subsample(&rows, &k.classes, k.per_class_train, k.per_class_test, cfg.seed)?;
    let noise = cfg.noise.to_config(cfg.seed);
    let mut runs = Vec::new();
    for &n in &k.qubits {
        let (train_x, test_x, _) = truncated_svd_reduce(&subset.train_raw, &subset.test_raw, n)?;
        let train = Dataset::new(train_x, subset.train_labels.clone())?;
        let test = Dataset::new(test_x, subset.test_labels.clone())?;
        let kcfg = kernel::KernelConfig {
            depth: k.depth,
            shots: k.shots,
            seed: derive_seed(cfg.seed, &[KERNEL_STREAM, n as u64]),
        };
        let exact = kernel::KernelConfig { shots: None, ..kcfg };
        let ideal_runner = Variant::parse("cnot", false)?.runner(&cfg.device, n, NoiseConfig::off())?;
        let ideal = classify(&train, &test, &exact, &ideal_runner, k.c)?;
        let reference = ideal.estimate.train.clone();
        let mut push = |mode: String, noisy: bool, c: kernel::KernelClassification| -> anyhow::Result<()> {
            runs.push(KernelRun {
                record: KernelRecord {
                    n,
                    mode,
                    noisy,
                    train_accuracy: c.train_accuracy,
                    test_accuracy: c.test_accuracy,
                    nmse: nmse(&c.estimate.train, &reference)?,
                    mean_duration_ns: c.estimate.mean_duration,
                },
                train: c.estimate.train,
                cross: c.estimate.cross,
            });
            Ok(())
        };
        push(IDEAL.into(), false, ideal)?;
        for v in &variants {
            log::info!("kernel n = {n}, mode {}", v.label());
            let runner = v.runner(&cfg.device, n, noise)?;
            push(
                v.label(),
                cfg.noise.any(),
                classify(&train, &test, &kcfg, &runner, k.c)?,
            )?;
        }
    }
    Ok(runs)
}

pub fn run(cfg: &Config) -> anyhow::Result<Outputs> {
    let runs = experiment(cfg)?;
    let mut out = Outputs::new();
    for r in &runs {
        let stem = format!("n{}_{}", r.record.n, r.record.mode);
        out.add_matrix(&format!("kernel_train_{stem}.csv"), &r.train)?;
        out.add_matrix(&format!("kernel_test_{stem}.csv"), &r.cross)?;
    }
    let records: Vec<_> = runs.iter().map(|r| &r.record).collect();
    out.add_json(
        "metrics.json",
        &crate::metrics("kernel-classify", cfg, &cfg.kernel, &records),
    )?;
    Ok(out)
}
