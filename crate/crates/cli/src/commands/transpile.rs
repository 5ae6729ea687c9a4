use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use peqml_core::schedule::{insert_dd, schedule};
use peqml_core::transpile::PipelineRegistry;
use peqml_core::Circuit;

use crate::config::Config;
use crate::output::Outputs;

/// Used when no input files are given.
pub const SAMPLE_CIRCUIT: &str = "QUBITS 2\nRZZ 0 1 0.5\n";
pub const SAMPLE_ID: &str = "rzz_sample";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DurationRow {
    pub circuit_id: String,
    pub mode: String,
    pub n_qubits: usize,
    pub total_duration_ns: f64,
}

#[derive(Debug, Clone)]
pub struct Transpiled {
    pub id: String,
    pub lowered: Circuit,
    /// One row per registered pipeline.
    pub durations: Vec<DurationRow>,
}

fn load_inputs(cfg: &Config) -> anyhow::Result<Vec<(String, Circuit)>> {
    if cfg.transpile.inputs.is_empty() {
        return Ok(vec![(SAMPLE_ID.to_string(), Circuit::from_text(SAMPLE_CIRCUIT)?)]);
    }
    cfg.transpile
        .inputs
        .iter()
        .map(|p: &std::path::PathBuf| {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading circuit {}", p.display()))?;
            let c = Circuit::from_text(&text).with_context(|| format!("parsing {}", p.display()))?;
            Ok((circuit_id(p), c))
        })
        .collect()
}

fn circuit_id(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "circuit".into())
}

pub fn transpile_all(cfg: &Config) -> anyhow::Result<Vec<Transpiled>> {
    let registry = PipelineRegistry::default();
    let selected = registry.get(&cfg.transpile.mode)?;
    let suffix = if cfg.transpile.dd { "+dd" } else { "" };
    load_inputs(cfg)?
        .into_iter()
        .map(|(id, c)| {
            let dev = cfg.device.model(c.width())?;
            let durations = registry
                .names()
                .map(|name| {
                    let lowered = registry.get(name)?.run(&c)?;
                    let mut s = schedule(&lowered, &dev)?;
                    if cfg.transpile.dd {
                        s = insert_dd(&s, &dev);
                    }
                    Ok(DurationRow {
                        circuit_id: id.clone(),
                        mode: format!("{name}{suffix}"),
                        n_qubits: c.width(),
                        total_duration_ns: s.total_duration(),
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(Transpiled {
                lowered: selected.run(&c)?,
                id,
                durations,
            })
        })
        .collect()
}

pub fn run(cfg: &Config) -> anyhow::Result<Outputs> {
    let results = transpile_all(cfg)?;
    let mut out = Outputs::new();
    let mut rows = Vec::new();
    for t in &results {
        out.add(
            format!("{}.{}.txt", t.id, cfg.transpile.mode),
            t.lowered.to_text().into_bytes(),
        );
        for r in &t.durations {
            println!(
                "{:<20} {:<8} {:>3} qubits {:>10.1} ns",
                r.circuit_id, r.mode, r.n_qubits, r.total_duration_ns
            );
        }
        rows.extend(t.durations.iter().cloned());
    }
    out.add_csv("durations.csv", &rows)?;
    out.add_json("metrics.json", &crate::metrics("transpile", cfg, &cfg.transpile, &rows))?;
    Ok(out)
}
