//! Loss and gradient concentration of the TFIM Hamiltonian-variational
//! ansatz as the register grows, with `L = 2(n − 1)` layers and the local
//! observable `Z₀Z₁`.

use std::f64::consts::{FRAC_PI_4, PI};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use peqml_core::builders::{hva_tfim, nibp_layers, HvaParameters};
use peqml_core::evaluate_state;
use peqml_core::seed::{derive_seed, rng_for};
use peqml_core::sim::{evolve_shared, expectation_z0z1, MAX_DENSITY_QUBITS};

use crate::error::{Error, Result};
use crate::Runner;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NibpSweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub samples: usize,
    pub param_low: f64,
    pub param_high: f64,
    pub seed: u64,
}

impl Default for NibpSweepConfig {
    fn default() -> Self {
        NibpSweepConfig {
            n_min: 2,
            n_max: 10,
            samples: 100,
            param_low: -PI,
            param_high: PI,
            seed: 0,
        }
    }
}

impl NibpSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "qubit range {}..={} must satisfy 2 ≤ min ≤ max",
                self.n_min, self.n_max
            )));
        }
        if self.n_max > MAX_DENSITY_QUBITS {
            return Err(Error::Config(format!(
                "at most {MAX_DENSITY_QUBITS} qubits are supported, got {}",
                self.n_max
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if !(self.param_low.is_finite() && self.param_high.is_finite() && self.param_low < self.param_high) {
            return Err(Error::Config(format!(
                "parameter range [{}, {}] is empty",
                self.param_low, self.param_high
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub mode: String,
    pub noisy: bool,
    pub samples: usize,
    pub mean_abs_loss: f64,
    pub sem_loss: f64,
    pub mean_abs_grad: f64,
    pub sem_grad: f64,
}

/// Parameters of sample `index` at width `n`; identical for every mode.
pub fn sample_parameters(cfg: &NibpSweepConfig, n: usize, index: usize) -> HvaParameters {
    let mut rng = rng_for(cfg.seed, &[n as u64, index as u64]);
    let mut p = HvaParameters::zeros(n, nibp_layers(n));
    let mut draw = || rng.random_range(cfg.param_low..cfg.param_high);
    for g in p.gammas.iter_mut() {
        *g = draw();
    }
    for b in p.betas.iter_mut() {
        *b = draw();
    }
    p
}

fn with_last_beta(params: &HvaParameters, beta: f64) -> HvaParameters {
    let mut p = params.clone();
    let k = p.last_beta_index();
    p.betas[k] = beta;
    p
}

/// `∂f/∂β_last = f(β + π/4) − f(β − π/4)`, valid because the parameter
/// enters only through `exp(−iβ Z Z)`.
pub fn parameter_shift_grad(params: &HvaParameters, f: impl Fn(&HvaParameters) -> Result<f64>) -> Result<f64> {
    let beta = params.betas[params.last_beta_index()];
    Ok(f(&with_last_beta(params, beta + FRAC_PI_4))? - f(&with_last_beta(params, beta - FRAC_PI_4))?)
}

/// Central finite difference in `β_last`.
pub fn finite_difference_grad(
    params: &HvaParameters,
    f: impl Fn(&HvaParameters) -> Result<f64>,
    h: f64,
) -> Result<f64> {
    let beta = params.betas[params.last_beta_index()];
    Ok((f(&with_last_beta(params, beta + h))? - f(&with_last_beta(params, beta - h))?) / (2.0 * h))
}

/// `⟨Z₀Z₁⟩` of the ansatz run through `runner`.
pub fn loss(params: &HvaParameters, runner: &Runner, seed: u64) -> Result<f64> {
    Ok(loss_and_gradient(params, runner, seed)?.0)
}

/// Loss and shift-rule gradient. The three circuits differ only after the
/// last coupling, so noisy runs share the evolution up to that point.
pub fn loss_and_gradient(params: &HvaParameters, runner: &Runner, seed: u64) -> Result<(f64, f64)> {
    let beta = params.betas[params.last_beta_index()];
    let schedules = [beta, beta + FRAC_PI_4, beta - FRAC_PI_4]
        .iter()
        .map(|&b| runner.compile(&hva_tfim(&with_last_beta(params, b))?))
        .collect::<Result<Vec<_>>>()?;
    let z: Vec<f64> = if runner.noise().affects_state() {
        evolve_shared(&schedules, runner.device(), &runner.noise().with_seed(seed))?
            .iter()
            .map(|rho| expectation_z0z1(&rho.diagonal_probabilities()))
            .collect()
    } else {
        schedules
            .iter()
            .map(|s| Ok(expectation_z0z1(&evaluate_state(&s.to_circuit())?.probabilities())))
            .collect::<Result<_>>()?
    };
    Ok((z[0], z[1] - z[2]))
}

/// Pipeline name, with `+dd` when decoupling is inserted.
pub fn label(runner: &Runner) -> String {
    if runner.dd() {
        format!("{}+dd", runner.mode())
    } else {
        runner.mode().to_string()
    }
}

fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Runs every `(n, sample, runner)` task and aggregates the absolute
/// values per `(n, runner)`.
pub fn run_sweep(cfg: &NibpSweepConfig, runners: &[Runner]) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    if runners.is_empty() {
        return Err(Error::Config("no transpilation modes selected".into()));
    }
    for r in runners {
        r.device().check_width(cfg.n_max)?;
    }
    let tasks: Vec<(usize, usize, usize)> = (cfg.n_min..=cfg.n_max)
        .flat_map(|n| (0..runners.len()).flat_map(move |m| (0..cfg.samples).map(move |s| (n, m, s))))
        .collect();
    let results = tasks
        .par_iter()
        .map(|&(n, m, s)| {
            let params = sample_parameters(cfg, n, s);
            let seed = derive_seed(cfg.seed, &[n as u64, s as u64, 0x7A5C]);
            loss_and_gradient(&params, &runners[m], seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    for (chunk, &(n, m, _)) in results.chunks(cfg.samples).zip(tasks.iter().step_by(cfg.samples)) {
        let losses: Vec<f64> = chunk.iter().map(|r| r.0.abs()).collect();
        let grads: Vec<f64> = chunk.iter().map(|r| r.1.abs()).collect();
        let (mean_abs_loss, sem_loss) = mean_and_sem(&losses);
        let (mean_abs_grad, sem_grad) = mean_and_sem(&grads);
        records.push(SweepRecord {
            n,
            mode: label(&runners[m]),
            noisy: runners[m].noise().affects_state(),
            samples: cfg.samples,
            mean_abs_loss,
            sem_loss,
            mean_abs_grad,
            sem_grad,
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Loss,
    Gradient,
}

/// Least-squares slope of `ln(mean)` against `n` for `n ≥ n_onset`.
pub fn fit_decay(records: &[SweepRecord], mode: &str, quantity: Quantity, n_onset: usize) -> Result<f64> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.mode == mode && r.n >= n_onset)
        .filter_map(|r| {
            let v = match quantity {
                Quantity::Loss => r.mean_abs_loss,
                Quantity::Gradient => r.mean_abs_grad,
            };
            if v > 0.0 {
                Some((r.n as f64, v.ln()))
            } else {
                log::warn!("n = {} ({mode}): non-positive mean excluded from the fit", r.n);
                None
            }
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 points with n ≥ {n_onset} for mode {mode}, found {}",
            points.len()
        )));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use peqml_core::sim::NoiseConfig;
    use peqml_core::DeviceModel;

    fn record(n: usize, v: f64) -> SweepRecord {
        SweepRecord {
            n,
            mode: "pe".into(),
            noisy: true,
            samples: 1,
            mean_abs_loss: v,
            sem_loss: 0.0,
            mean_abs_grad: v,
            sem_grad: 0.0,
        }
    }

    #[test]
    fn fit_recovers_exponential_rate() {
        let recs: Vec<_> = (2..=10).map(|n| record(n, (-0.5 * n as f64).exp())).collect();
        let slope = fit_decay(&recs, "pe", Quantity::Loss, 6).unwrap();
        assert!((slope + 0.5).abs() < 1e-6);
        let flat: Vec<_> = (2..=10).map(|n| record(n, 0.3)).collect();
        assert!(fit_decay(&flat, "pe", Quantity::Gradient, 6).unwrap().abs() < 1e-12);
        assert!(fit_decay(&flat, "pe", Quantity::Loss, 9).is_err());
    }

    #[test]
    fn zero_parameters_give_unit_loss() {
        let runner = Runner::by_name("pe", DeviceModel::uniform(4), NoiseConfig::off(), false).unwrap();
        let p = HvaParameters::zeros(4, nibp_layers(4));
        let (l, _) = loss_and_gradient(&p, &runner, 0).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_gradient_matches_closed_form() {
        // One layer on two qubits: ⟨Z₀Z₁⟩ = cos(2γ₀)cos(2γ₁) for any β, so
        // the β derivative vanishes; with a second layer it does not.
        let runner = Runner::by_name("cnot", DeviceModel::uniform(2), NoiseConfig::off(), false).unwrap();
        let p = HvaParameters::new(2, 1, vec![0.3, -0.8], vec![0.6]).unwrap();
        let (l, g) = loss_and_gradient(&p, &runner, 0).unwrap();
        assert!((l - (0.6f64).cos() * (1.6f64).cos()).abs() < 1e-10);
        assert!(g.abs() < 1e-10);
    }

    #[test]
    fn parameters_are_paired_and_in_range() {
        let cfg = NibpSweepConfig::default();
        let a = sample_parameters(&cfg, 5, 3);
        assert_eq!(a, sample_parameters(&cfg, 5, 3));
        assert_ne!(a, sample_parameters(&cfg, 5, 4));
        assert!(a.gammas.iter().chain(&a.betas).all(|v| (-PI..PI).contains(v)));
        assert_eq!(a.layers, 8);
    }
}
