//! Parity-readout quantum neural network on a synthetic two-class task.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use peqml_core::builders::{feature_map, qnn_ansatz, qnn_circuit};
use peqml_core::seed::{derive_seed, rng_for};
use peqml_core::sim::expectation_parity;
use peqml_core::{Circuit, StateVector};

use crate::error::{Error, Result};
use crate::optimize::{bfgs, BfgsOptions};
use crate::spsa::{self, SpsaConfig};
use crate::Runner;

/// Labelled feature vectors.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Config(format!(
                "{} feature vectors but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(first) = features.first() {
            if let Some(bad) = features.iter().position(|f| f.len() != first.len()) {
                return Err(Error::Config(format!(
                    "sample {bad} has {} features, expected {}",
                    features[bad].len(),
                    first.len()
                )));
            }
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<usize> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }
}

pub const DEFAULT_DEPTH: usize = 2;

/// Noiseless parity `⟨Z⊗…⊗Z⟩` of the QNN circuit.
pub fn parity(x: &[f64], theta: &[f64], depth: usize) -> Result<f64> {
    let psi = peqml_core::evaluate_state(&qnn_circuit(x, theta, depth)?)?;
    Ok(expectation_parity(&psi.probabilities()))
}

/// Noiseless parities of many inputs for one `θ`, reusing the feature-map
/// states.
struct ParityOracle {
    states: Vec<StateVector>,
    n: usize,
}

impl ParityOracle {
    fn new(xs: &[Vec<f64>], depth: usize) -> Result<Self> {
        let n = xs.first().map_or(0, Vec::len);
        let states = xs
            .iter()
            .map(|x| Ok(peqml_core::evaluate_state(&feature_map(n, x, depth)?)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(ParityOracle { states, n })
    }

    fn parities(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let ansatz = qnn_ansatz(self.n, theta)?;
        self.states
            .iter()
            .map(|phi| {
                let mut psi = phi.clone();
                for g in ansatz.gates() {
                    psi.apply_gate(g)?;
                }
                Ok(expectation_parity(&psi.probabilities()))
            })
            .collect()
    }
}

const POOL_STREAM: u64 = 1;
const THETA_S_STREAM: u64 = 2;
const THETA_0_STREAM: u64 = 3;
const FORWARD_STREAM: u64 = 4;
const RESTARTS: usize = 4;

fn uniform_pool(n: usize, size: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, &[POOL_STREAM]);
    (0..size)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// `θ_s` maximising the mean absolute parity over `xs` (multi-start BFGS).
pub fn fit_separating_angles(xs: &[Vec<f64>], depth: usize, seed: u64) -> Result<Vec<f64>> {
    let oracle = ParityOracle::new(xs, depth)?;
    let n = oracle.n;
    let objective = |theta: &[f64]| match oracle.parities(theta) {
        Ok(m) => -m.iter().map(|v| v.abs()).sum::<f64>() / m.len() as f64,
        Err(_) => f64::INFINITY,
    };
    let opts = BfgsOptions {
        max_iterations: 100,
        gradient_tolerance: 1e-5,
        fd_step: 1e-5,
    };
    let best = (0..RESTARTS)
        .map(|r| {
            let mut rng = rng_for(seed, &[THETA_S_STREAM, r as u64]);
            let start: Vec<f64> = (0..2 * n)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            bfgs(objective, &start, &opts)
        })
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one restart");
    if !best.value.is_finite() {
        return Err(Error::Optimization("parity objective is not finite".into()));
    }
    Ok(best.x)
}

/// Labels `xs` by the sign of the parity (class 0 ⇔ `m > 0`) and keeps the
/// `per_class` samples of each class with the largest `|m|`.
pub fn select_confident(xs: &[Vec<f64>], theta_s: &[f64], depth: usize, per_class: usize) -> Result<Dataset> {
    let m = ParityOracle::new(xs, depth)?.parities(theta_s)?;
    let mut features = Vec::with_capacity(2 * per_class);
    let mut labels = Vec::with_capacity(2 * per_class);
    for class in 0..2 {
        let mut idx: Vec<usize> = (0..xs.len()).filter(|&i| (m[i] > 0.0) == (class == 0)).collect();
        if idx.is_empty() {
            return Err(Error::Optimization(format!(
                "no sample falls into class {class}; the parity does not separate the pool"
            )));
        }
        if idx.len() < per_class {
            log::warn!("class {class} has only {} samples, wanted {per_class}", idx.len());
        }
        idx.sort_by(|&a, &b| m[b].abs().total_cmp(&m[a].abs()).then(a.cmp(&b)));
        for &i in idx.iter().take(per_class) {
            features.push(xs[i].clone());
            labels.push(class);
        }
    }
    Dataset::new(features, labels)
}

/// Samples `pool` points, fits `θ_s` on them and keeps the most confident
/// `per_class` points of each class.
pub fn generate_synthetic_dataset(n: usize, seed: u64, pool: usize, per_class: usize) -> Result<(Dataset, Vec<f64>)> {
    if n < 2 {
        return Err(Error::Config("the synthetic task needs at least 2 qubits".into()));
    }
    let xs = uniform_pool(n, pool, seed);
    let theta_s = fit_separating_angles(&xs, DEFAULT_DEPTH, seed)?;
    let data = select_confident(&xs, &theta_s, DEFAULT_DEPTH, per_class)?;
    Ok((data, theta_s))
}

/// Disjoint training and test sets drawn from two halves of one pool;
/// `θ_s` is fitted on the training half.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub theta_s: Vec<f64>,
    pub train: Dataset,
    pub test: Dataset,
}

pub fn synthetic_split(n: usize, seed: u64, half_pool: usize, per_class: usize) -> Result<SyntheticTask> {
    if n < 2 {
        return Err(Error::Config("the synthetic task needs at least 2 qubits".into()));
    }
    let xs = uniform_pool(n, 2 * half_pool, seed);
    let (first, second) = xs.split_at(half_pool);
    let theta_s = fit_separating_angles(first, DEFAULT_DEPTH, seed)?;
    Ok(SyntheticTask {
        train: select_confident(first, &theta_s, DEFAULT_DEPTH, per_class)?,
        test: select_confident(second, &theta_s, DEFAULT_DEPTH, per_class)?,
        theta_s,
    })
}

/// Architecture and readout settings of the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QnnModel {
    pub n: usize,
    pub depth: usize,
    /// Shots per forward pass; exact probabilities when `None`.
    pub shots: Option<u64>,
}

impl QnnModel {
    pub fn circuit(&self, x: &[f64], theta: &[f64]) -> Result<Circuit> {
        if theta.len() != 2 * self.n {
            return Err(Error::Config(format!(
                "expected {} parameters, got {}",
                2 * self.n,
                theta.len()
            )));
        }
        let mut c = qnn_circuit(x, theta, self.depth)?;
        c.measure_all();
        Ok(c)
    }

    /// Probability of class 0, `(1 + ⟨P⟩)/2`, from the mitigated parity.
    pub fn forward(&self, runner: &Runner, x: &[f64], theta: &[f64], seed: u64) -> Result<f64> {
        let s = runner.compile(&self.circuit(x, theta)?)?;
        let dist = runner.measured_distribution(&s, self.shots, seed)?;
        Ok(((1.0 + expectation_parity(&dist)) / 2.0).clamp(0.0, 1.0))
    }

    /// Class-0 probabilities of a batch, one derived seed per sample.
    pub fn forward_batch(&self, runner: &Runner, xs: &[Vec<f64>], theta: &[f64], seed: u64) -> Result<Vec<f64>> {
        xs.par_iter()
            .enumerate()
            .map(|(i, x)| self.forward(runner, x, theta, derive_seed(seed, &[FORWARD_STREAM, i as u64])))
            .collect()
    }

    pub fn accuracy(&self, runner: &Runner, data: &Dataset, theta: &[f64], seed: u64) -> Result<f64> {
        let p0 = self.forward_batch(runner, &data.features, theta, seed)?;
        Ok(accuracy_of(&p0, &data.labels))
    }

    /// Mean scheduled duration over the inputs.
    pub fn mean_duration(&self, runner: &Runner, xs: &[Vec<f64>], theta: &[f64]) -> Result<f64> {
        let durations = xs
            .par_iter()
            .map(|x| Ok(runner.compile(&self.circuit(x, theta)?)?.total_duration()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(durations.iter().sum::<f64>() / durations.len().max(1) as f64)
    }
}

pub fn accuracy_of(p0: &[f64], labels: &[usize]) -> f64 {
    let correct = p0.iter().zip(labels).filter(|(&p, &y)| (p > 0.5) == (y == 0)).count();
    correct as f64 / labels.len().max(1) as f64
}

const PROB_FLOOR: f64 = 1e-10;

/// Mean binary cross-entropy with probabilities clipped away from 0 and 1.
pub fn cross_entropy(p0: &[f64], labels: &[usize]) -> f64 {
    let total: f64 = p0
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p0 = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            if y == 0 {
                -p0.ln()
            } else {
                -(1.0 - p0).ln()
            }
        })
        .sum();
    total / labels.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub theta: Vec<f64>,
    pub trace: Vec<f64>,
    pub learning_rate: f64,
}

/// Initial angles, uniform in `[−π, π)`.
pub fn initial_theta(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, &[THETA_0_STREAM]);
    (0..2 * n)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

/// Minimises the cross-entropy over `train` with SPSA.
pub fn train(model: &QnnModel, runner: &Runner, train: &Dataset, theta0: &[f64], cfg: &SpsaConfig) -> Result<Training> {
    if train.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    let loss = |theta: &[f64], seed: u64| -> Result<f64> {
        let p0 = model.forward_batch(runner, &train.features, theta, seed)?;
        let l = cross_entropy(&p0, &train.labels);
        if l.is_nan() {
            return Err(Error::Optimization(format!("loss is NaN at θ = {theta:?}")));
        }
        Ok(l)
    };
    let r = spsa::minimize(loss, theta0, cfg)?;
    Ok(Training {
        theta: r.theta,
        trace: r.trace,
        learning_rate: r.a,
    })
}
