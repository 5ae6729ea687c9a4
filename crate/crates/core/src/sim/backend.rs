use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{apply_readout_error, evolve, NoiseConfig};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::statevector::evaluate_state;

/// A simulation strategy producing outcome probabilities of a schedule.
pub trait Backend: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Whether the backend models state noise channels.
    fn supports_noise(&self) -> bool;

    /// Probabilities of every basis outcome, readout error included when
    /// enabled.
    fn probabilities(&self, s: &Schedule, dev: &DeviceModel, cfg: &NoiseConfig) -> Result<Vec<f64>>;
}

/// Ideal pure-state simulation; ignores timing.
#[derive(Debug, Clone, Copy, Default)]
pub struct StatevectorBackend;

impl Backend for StatevectorBackend {
    fn name(&self) -> &'static str {
        "statevector"
    }

    fn supports_noise(&self) -> bool {
        false
    }

    fn probabilities(&self, s: &Schedule, dev: &DeviceModel, cfg: &NoiseConfig) -> Result<Vec<f64>> {
        if cfg.affects_state() {
            return Err(Error::InvalidArgument(
                "statevector backend cannot model noise channels".into(),
            ));
        }
        dev.check_width(s.width())?;
        let probs = evaluate_state(&s.to_circuit())?.probabilities();
        Ok(if cfg.readout {
            apply_readout_error(&probs, dev)
        } else {
            probs
        })
    }
}

/// Density-matrix simulation with every noise channel.
#[derive(Debug, Clone, Copy, Default)]
pub struct DensityBackend;

impl Backend for DensityBackend {
    fn name(&self) -> &'static str {
        "density"
    }

    fn supports_noise(&self) -> bool {
        true
    }

    fn probabilities(&self, s: &Schedule, dev: &DeviceModel, cfg: &NoiseConfig) -> Result<Vec<f64>> {
        let probs = evolve(s, dev, cfg)?.diagonal_probabilities();
        Ok(if cfg.readout {
            apply_readout_error(&probs, dev)
        } else {
            probs
        })
    }
}

#[derive(Debug, Clone)]
pub struct BackendRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Backend>>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        BackendRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, b: Arc<dyn Backend>) -> &mut Self {
        self.entries.insert(b.name(), b);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Backend>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "backend",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(StatevectorBackend));
        r.register(Arc::new(DensityBackend));
        r
    }
}
