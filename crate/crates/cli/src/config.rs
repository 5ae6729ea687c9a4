//! Configuration file schema. Every section has defaults, so an empty file
//! (or no file) is a valid configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use peqml_core::sim::NoiseConfig;
use peqml_core::transpile::PipelineRegistry;
use peqml_core::DeviceParams;
use peqml_experiments::Runner;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Output directory; `--out` and `PEQML_OUT_DIR` take precedence.
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub device: DeviceParams,
    pub noise: NoiseFlags,
    pub transpile: TranspileConfig,
    pub qnn: QnnConfig,
    pub kernel: KernelConfig,
    pub nibp: NibpConfig,
    pub ingest: IngestConfig,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseFlags {
    pub amplitude_damping: bool,
    pub dephasing: bool,
    pub quasi_static: bool,
    pub readout: bool,
}

impl Default for NoiseFlags {
    fn default() -> Self {
        NoiseFlags::all(true)
    }
}

impl NoiseFlags {
    pub fn all(on: bool) -> Self {
        NoiseFlags {
            amplitude_damping: on,
            dephasing: on,
            quasi_static: on,
            readout: on,
        }
    }

    pub fn any(self) -> bool {
        self.amplitude_damping || self.dephasing || self.quasi_static || self.readout
    }

    pub fn to_config(self, seed: u64) -> NoiseConfig {
        NoiseConfig {
            amplitude_damping: self.amplitude_damping,
            dephasing: self.dephasing,
            quasi_static: self.quasi_static,
            readout: self.readout,
            seed,
        }
    }
}

/// A transpilation mode with optional dynamical decoupling, written
/// `cnot`, `pe` or `pe+dd`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub pipeline: String,
    pub dd: bool,
}

impl Variant {
    pub fn parse(token: &str, force_dd: bool) -> anyhow::Result<Variant> {
        let (name, dd) = match token.strip_suffix("+dd") {
            Some(base) => (base, true),
            None => (token, false),
        };
        let registry = PipelineRegistry::default();
        if registry.get(name).is_err() {
            let known: Vec<_> = registry.names().collect();
            bail!(
                "unknown mode `{token}`; expected one of {} (optionally with `+dd`)",
                known.join(", ")
            );
        }
        Ok(Variant {
            pipeline: name.to_string(),
            dd: dd || force_dd,
        })
    }

    pub fn parse_all(tokens: &[String], force_dd: bool) -> anyhow::Result<Vec<Variant>> {
        if tokens.is_empty() {
            bail!("at least one mode is required");
        }
        tokens.iter().map(|s| Variant::parse(s, force_dd)).collect()
    }

    pub fn label(&self) -> String {
        if self.dd {
            format!("{}+dd", self.pipeline)
        } else {
            self.pipeline.clone()
        }
    }

    pub fn runner(&self, device: &DeviceParams, n: usize, noise: NoiseConfig) -> anyhow::Result<Runner> {
        Ok(Runner::by_name(&self.pipeline, device.model(n)?, noise, self.dd)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TranspileConfig {
    /// Circuit files; the built-in `RZZ(0.5)` sample when empty.
    pub inputs: Vec<PathBuf>,
    pub mode: String,
    pub dd: bool,
}

impl Default for TranspileConfig {
    fn default() -> Self {
        TranspileConfig {
            inputs: Vec::new(),
            mode: "pe".into(),
            dd: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnnConfig {
    pub qubits: Vec<usize>,
    /// Shots per forward pass; exact probabilities when absent.
    pub shots: Option<u64>,
    pub iterations: usize,
    pub calibration_samples: usize,
    pub target_step: f64,
    /// Size of each half of the candidate pool.
    pub half_pool: usize,
    pub per_class: usize,
    pub modes: Vec<String>,
    pub dd: bool,
    /// Also train a noiseless reference model.
    pub reference: bool,
}

impl Default for QnnConfig {
    fn default() -> Self {
        QnnConfig {
            qubits: vec![2, 3, 4, 5],
            shots: Some(8192),
            iterations: 800,
            calibration_samples: 25,
            target_step: 0.1,
            half_pool: 600,
            per_class: 50,
            modes: vec!["cnot".into(), "pe".into()],
            dd: false,
            reference: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub data: PathBuf,
    pub classes: Vec<usize>,
    pub per_class_train: usize,
    pub per_class_test: usize,
    pub qubits: Vec<usize>,
    pub depth: usize,
    pub shots: Option<u64>,
    /// SVM regularisation.
    pub c: f64,
    pub modes: Vec<String>,
    pub dd: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            data: PathBuf::from("data/mnist_subset.csv"),
            classes: (0..10).collect(),
            per_class_train: 10,
            per_class_test: 10,
            qubits: (3..=9).collect(),
            depth: 4,
            shots: Some(8192),
            c: 1.0,
            modes: vec!["cnot".into(), "pe".into()],
            dd: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NibpConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub samples: usize,
    pub param_low: f64,
    pub param_high: f64,
    pub modes: Vec<String>,
    pub dd: bool,
    /// First width included in the decay fit.
    pub n_onset: usize,
}

impl Default for NibpConfig {
    fn default() -> Self {
        let sweep = peqml_experiments::nibp::NibpSweepConfig::default();
        NibpConfig {
            n_min: sweep.n_min,
            n_max: sweep.n_max,
            samples: sweep.samples,
            param_low: sweep.param_low,
            param_high: sweep.param_high,
            modes: vec!["cnot".into(), "pe".into()],
            dd: false,
            n_onset: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub data: PathBuf,
    pub classes: Vec<usize>,
    pub per_class_train: usize,
    pub per_class_test: usize,
    /// Truncated-SVD dimension; raw pixels are written when absent.
    pub features: Option<usize>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            data: PathBuf::from("data/mnist_subset.csv"),
            classes: (0..10).collect(),
            per_class_train: 10,
            per_class_test: 10,
            features: None,
        }
    }
}
