use serde::Serialize;

use peqml_experiments::nibp::{fit_decay, run_sweep, NibpSweepConfig, Quantity, SweepRecord};

use crate::config::{Config, Variant};
use crate::output::Outputs;

/// The plotted columns of a sweep record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub mode: String,
    pub mean_abs_loss: f64,
    pub sem_loss: f64,
    pub mean_abs_grad: f64,
    pub sem_grad: f64,
}

impl From<&SweepRecord> for SweepRow {
    fn from(r: &SweepRecord) -> Self {
        SweepRow {
            n: r.n,
            mode: r.mode.clone(),
            mean_abs_loss: r.mean_abs_loss,
            sem_loss: r.sem_loss,
            mean_abs_grad: r.mean_abs_grad,
            sem_grad: r.sem_grad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub mode: String,
    pub quantity: Quantity,
    /// Slope of `ln(mean)` against `n`; absent when the fit is not possible.
    pub slope: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NibpReport {
    pub records: Vec<SweepRecord>,
    pub fits: Vec<DecayFit>,
}

pub fn experiment(cfg: &Config) -> anyhow::Result<NibpReport> {
    let s = &cfg.nibp;
    let sweep = NibpSweepConfig {
        n_min: s.n_min,
        n_max: s.n_max,
        samples: s.samples,
        param_low: s.param_low,
        param_high: s.param_high,
        seed: cfg.seed,
    };
    sweep.validate()?;
    let variants = Variant::parse_all(&s.modes, s.dd)?;
    let noise = cfg.noise.to_config(cfg.seed);
    let runners = variants
        .iter()
        .map(|v| v.runner(&cfg.device, s.n_max, noise))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let records = run_sweep(&sweep, &runners)?;
    let mut fits = Vec::new();
    for v in &variants {
        for quantity in [Quantity::Loss, Quantity::Gradient] {
            let (slope, note) = match fit_decay(&records, &v.label(), quantity, s.n_onset) {
                Ok(slope) => (Some(slope), None),
                Err(e) => (None, Some(e.to_string())),
            };
            fits.push(DecayFit {
                mode: v.label(),
                quantity,
                slope,
                note,
            });
        }
    }
    Ok(NibpReport { records, fits })
}

pub fn run(cfg: &Config) -> anyhow::Result<Outputs> {
    let report = experiment(cfg)?;
    let rows: Vec<SweepRow> = report.records.iter().map(SweepRow::from).collect();
    let mut out = Outputs::new();
    out.add_csv("nibp.csv", &rows)?;
    out.add_json("metrics.json", &crate::metrics("nibp-sweep", cfg, &cfg.nibp, &report))?;
    Ok(out)
}
