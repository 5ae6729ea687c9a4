use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{expand_echo_with_error, lower_to_cnot, lower_to_rzx, merge_single_qubit, BasisTarget};
use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// A transpilation strategy, selected at runtime by name.
pub trait Pipeline: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn target(&self) -> BasisTarget;

    fn run(&self, c: &Circuit) -> Result<Circuit>;
}

/// `lower_to_cnot` followed by single-qubit merging.
#[derive(Debug, Clone, Copy, Default)]
pub struct CnotPipeline;

impl Pipeline for CnotPipeline {
    fn name(&self) -> &'static str {
        "cnot"
    }

    fn target(&self) -> BasisTarget {
        BasisTarget::CnotBasis
    }

    fn run(&self, c: &Circuit) -> Result<Circuit> {
        merge_single_qubit(&lower_to_cnot(c)?)
    }
}

/// `lower_to_rzx`, echo expansion, then single-qubit merging.
#[derive(Debug, Clone, Copy, Default)]
pub struct PulseEfficientPipeline {
    /// Relative angle error applied to amplitude-scaled pulses.
    pub over_rotation: f64,
}

impl Pipeline for PulseEfficientPipeline {
    fn name(&self) -> &'static str {
        "pe"
    }

    fn target(&self) -> BasisTarget {
        BasisTarget::EchoedPulseBasis
    }

    fn run(&self, c: &Circuit) -> Result<Circuit> {
        let rzx = lower_to_rzx(c)?;
        merge_single_qubit(&expand_echo_with_error(&rzx, self.over_rotation)?)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Pipeline>>,
}

impl PipelineRegistry {
    pub fn empty() -> Self {
        PipelineRegistry {
            entries: BTreeMap::new(),
        }
    }

    /// Registry holding `cnot` and `pe` (with the given scaled-pulse error).
    pub fn with_defaults(over_rotation: f64) -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(CnotPipeline));
        r.register(Arc::new(PulseEfficientPipeline { over_rotation }));
        r
    }

    pub fn register(&mut self, p: Arc<dyn Pipeline>) -> &mut Self {
        self.entries.insert(p.name(), p);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Pipeline>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "pipeline",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for PipelineRegistry {
    fn default() -> Self {
        Self::with_defaults(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::transpile::check_equivalence;

    #[test]
    fn registry_lookup() {
        let r = PipelineRegistry::default();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["cnot", "pe"]);
        assert_eq!(r.get("pe").unwrap().name(), "pe");
        assert!(matches!(r.get("kak").unwrap_err(), Error::UnknownName { .. }));
    }

    #[test]
    fn both_pipelines_preserve_rzz() {
        let c = Circuit::from_gates(3, [Gate::Rzz(0, 1, 0.5.into()), Gate::Rzz(2, 1, 2.0.into())]).unwrap();
        let r = PipelineRegistry::default();
        for name in ["cnot", "pe"] {
            let p = r.get(name).unwrap();
            let out = p.run(&c).unwrap();
            assert!(p.target().admits(&out), "{name}");
            assert!(check_equivalence(&c, &out, 1e-10).unwrap(), "{name}");
        }
    }
}
