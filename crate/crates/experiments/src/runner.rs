use std::sync::Arc;

use peqml_core::schedule::{insert_dd, schedule};
use peqml_core::sim::{
    apply_readout_error, evolve, mitigate_distribution, mitigate_readout, sample_probabilities, Counts, NoiseConfig,
};
use peqml_core::transpile::{Pipeline, PipelineRegistry};
use peqml_core::{evaluate_state, Circuit, DeviceModel, Schedule};

use crate::error::{Error, Result};

/// Transpile, schedule and simulate circuits under one configuration.
#[derive(Debug, Clone)]
pub struct Runner {
    pipeline: Arc<dyn Pipeline>,
    device: DeviceModel,
    noise: NoiseConfig,
    dd: bool,
}

impl Runner {
    pub fn new(pipeline: Arc<dyn Pipeline>, device: DeviceModel, noise: NoiseConfig, dd: bool) -> Self {
        Runner {
            pipeline,
            device,
            noise,
            dd,
        }
    }

    /// Looks the pipeline up in the default registry.
    pub fn by_name(mode: &str, device: DeviceModel, noise: NoiseConfig, dd: bool) -> Result<Self> {
        Ok(Self::new(PipelineRegistry::default().get(mode)?, device, noise, dd))
    }

    pub fn mode(&self) -> &'static str {
        self.pipeline.name()
    }

    pub fn device(&self) -> &DeviceModel {
        &self.device
    }

    pub fn noise(&self) -> &NoiseConfig {
        &self.noise
    }

    pub fn dd(&self) -> bool {
        self.dd
    }

    pub fn compile(&self, c: &Circuit) -> Result<Schedule> {
        let s = schedule(&self.pipeline.run(c)?, &self.device)?;
        Ok(if self.dd { insert_dd(&s, &self.device) } else { s })
    }

    /// Outcome probabilities before readout error. `seed` selects the
    /// quasi-static detunings of this execution.
    pub fn state_probabilities(&self, s: &Schedule, seed: u64) -> Result<Vec<f64>> {
        if self.noise.affects_state() {
            let rho = evolve(s, &self.device, &self.noise.with_seed(seed))?;
            Ok(rho.diagonal_probabilities())
        } else {
            Ok(evaluate_state(&s.to_circuit())?.probabilities())
        }
    }

    /// Measured distribution: readout error when enabled, `shots` samples
    /// (or the exact distribution when `None`), and readout mitigation.
    pub fn measured_distribution(&self, s: &Schedule, shots: Option<u64>, seed: u64) -> Result<Vec<f64>> {
        let mut probs = self.state_probabilities(s, seed)?;
        if self.noise.readout {
            probs = apply_readout_error(&probs, &self.device);
        }
        let Some(shots) = shots else {
            return Ok(if self.noise.readout {
                mitigate_distribution(&probs, &self.device)?
            } else {
                probs
            });
        };
        let mut rng = peqml_core::seed::rng_for(seed, &[SHOT_STREAM]);
        let counts: Counts = sample_probabilities(&probs, shots, &mut rng)?;
        Ok(if self.noise.readout {
            mitigate_readout(&counts, &self.device)?
        } else {
            counts.frequencies()
        })
    }
}

const SHOT_STREAM: u64 = 0x5407;

/// Runs `f` on a pool of `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}
