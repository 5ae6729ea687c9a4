use serde::Serialize;

use peqml_core::seed::derive_seed;
use peqml_core::sim::NoiseConfig;
use peqml_experiments::qnn::{initial_theta, synthetic_split, train, QnnModel, DEFAULT_DEPTH};
use peqml_experiments::spsa::SpsaConfig;
use peqml_experiments::Runner;

use super::check_qubits;
use crate::config::{Config, Variant};
use crate::output::Outputs;

const QNN_STREAM: u64 = 0x9A77;
const TRAIN_EVAL: u64 = 1;
const TEST_EVAL: u64 = 2;

/// Label of the noiseless reference run.
pub const IDEAL: &str = "ideal";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QnnRecord {
    pub n: usize,
    pub mode: String,
    pub noisy: bool,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub final_loss: f64,
    pub learning_rate: f64,
    pub mean_duration_ns: f64,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub mode: String,
    pub iteration: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QnnReport {
    pub records: Vec<QnnRecord>,
    pub trace: Vec<TraceRow>,
}

/// Trains one model per qubit count and mode. All modes at a given width
/// share the dataset, initial angles and SPSA perturbations.
pub fn experiment(cfg: &Config) -> anyhow::Result<QnnReport> {
    let q = &cfg.qnn;
    check_qubits(&q.qubits, 2)?;
    let variants = Variant::parse_all(&q.modes, q.dd)?;
    let noise = cfg.noise.to_config(cfg.seed);
    let noisy = cfg.noise.any();
    let mut report = QnnReport::default();
    for &n in &q.qubits {
        let seed = derive_seed(cfg.seed, &[QNN_STREAM, n as u64]);
        let task = synthetic_split(n, seed, q.half_pool, q.per_class)?;
        let theta0 = initial_theta(n, seed);
        let spsa = SpsaConfig {
            iterations: q.iterations,
            calibration_samples: q.calibration_samples,
            target_step: q.target_step,
            seed,
            ..SpsaConfig::default()
        };
        let model = QnnModel {
            n,
            depth: DEFAULT_DEPTH,
            shots: q.shots,
        };
        let mut runs: Vec<(String, bool, Runner)> = Vec::new();
        if q.reference && noisy {
            runs.push((
                IDEAL.into(),
                false,
                Variant::parse("cnot", false)?.runner(&cfg.device, n, NoiseConfig::off())?,
            ));
        }
        for v in &variants {
            runs.push((v.label(), noisy, v.runner(&cfg.device, n, noise)?));
        }
        for (label, is_noisy, runner) in runs {
            log::info!("qnn n = {n}, mode {label}");
            let t = train(&model, &runner, &task.train, &theta0, &spsa)?;
            report
                .trace
                .extend(t.trace.iter().enumerate().map(|(i, &loss)| TraceRow {
                    n,
                    mode: label.clone(),
                    iteration: i,
                    loss,
                }));
            report.records.push(QnnRecord {
                n,
                train_accuracy: model.accuracy(&runner, &task.train, &t.theta, derive_seed(seed, &[TRAIN_EVAL]))?,
                test_accuracy: model.accuracy(&runner, &task.test, &t.theta, derive_seed(seed, &[TEST_EVAL]))?,
                final_loss: t.trace.last().copied().unwrap_or(f64::NAN),
                learning_rate: t.learning_rate,
                mean_duration_ns: model.mean_duration(&runner, &task.test.features, &t.theta)?,
                mode: label,
                noisy: is_noisy,
                theta: t.theta,
            });
        }
    }
    Ok(report)
}

pub fn run(cfg: &Config) -> anyhow::Result<Outputs> {
    let report = experiment(cfg)?;
    let mut out = Outputs::new();
    out.add_csv("loss_trace.csv", &report.trace)?;
    out.add_json(
        "metrics.json",
        &crate::metrics("qnn-train", cfg, &cfg.qnn, &report.records),
    )?;
    Ok(out)
}
