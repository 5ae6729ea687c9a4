//! Fidelity kernels `K_ij = |⟨φ(x_i)|φ(x_j)⟩|²` estimated from the
//! zero-bitstring frequency of `U(x_j)` followed by `U†(x_i)`.

use nalgebra::DMatrix;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use peqml_core::builders::feature_map;
use peqml_core::seed::{derive_seed, rng_for};
use peqml_core::sim::{evolve, DensityMatrix, Program};
use peqml_core::{evaluate_state, DeviceModel, Schedule, StateVector};

use crate::error::{Error, Result};
use crate::qnn::Dataset;
use crate::svm::{svm_fit, svm_predict};
use crate::Runner;

pub type KernelMatrix = DMatrix<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub depth: usize,
    /// Shots per entry; exact probabilities when `None`.
    pub shots: Option<u64>,
    pub seed: u64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            depth: 4,
            shots: Some(8192),
            seed: 0,
        }
    }
}

/// How zero-outcome probabilities are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPath {
    /// Pure-state overlaps; only valid without any noise.
    Overlap,
    /// Forward states of `U(x_j)` paired with the backward-evolved
    /// zero-outcome effect of `U†(x_i)`. Requires the two halves to be
    /// independent, i.e. no quasi-static noise shared between them.
    Factorized,
    /// One density-matrix evolution per entry.
    Direct,
}

impl KernelPath {
    pub fn for_runner(runner: &Runner) -> KernelPath {
        let noise = runner.noise();
        if noise.is_off() {
            KernelPath::Overlap
        } else if noise.quasi_static && runner.device().sigma_idle > 0.0 {
            KernelPath::Direct
        } else {
            KernelPath::Factorized
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimate {
    /// Training Gram matrix, symmetric by construction.
    pub train: KernelMatrix,
    /// Rows are test samples, columns training samples.
    pub cross: KernelMatrix,
    /// Mean scheduled duration of the training-kernel circuits.
    pub mean_duration: f64,
}

const TRAIN_TAG: u64 = 1;
const CROSS_TAG: u64 = 2;

struct Halves {
    forward: Vec<Schedule>,
    inverse: Vec<Schedule>,
}

fn compile_halves(xs: &[Vec<f64>], n: usize, depth: usize, runner: &Runner, need_forward: bool) -> Result<Halves> {
    let pairs = xs
        .par_iter()
        .map(|x| {
            let fm = feature_map(n, x, depth)?;
            let forward = if need_forward { Some(runner.compile(&fm)?) } else { None };
            let mut inv = fm.inverse()?;
            inv.measure_all();
            Ok((forward, runner.compile(&inv)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut h = Halves {
        forward: Vec::new(),
        inverse: Vec::new(),
    };
    for (f, i) in pairs {
        if let Some(f) = f {
            h.forward.push(f);
        }
        h.inverse.push(i);
    }
    Ok(h)
}

/// Probability of reading all zeros, per basis state of the final state.
fn zero_outcome_weights(n: usize, dev: &DeviceModel, readout: bool) -> Vec<f64> {
    (0..1usize << n)
        .map(|b| {
            if !readout {
                return if b == 0 { 1.0 } else { 0.0 };
            }
            (0..n)
                .map(|q| {
                    if b >> q & 1 == 0 {
                        1.0 - dev.readout_p01[q]
                    } else {
                        dev.readout_p10[q]
                    }
                })
                .product()
        })
        .collect()
}

fn check_inputs(train: &[Vec<f64>], test: &[Vec<f64>], cfg: &KernelConfig) -> Result<usize> {
    if train.is_empty() {
        return Err(Error::Config("kernel needs at least one training sample".into()));
    }
    if cfg.shots == Some(0) {
        return Err(peqml_core::Error::InvalidArgument("shots must be positive".into()).into());
    }
    let n = train[0].len();
    if let Some(bad) = train.iter().chain(test).find(|x| x.len() != n) {
        return Err(Error::Config(format!(
            "feature vector of length {} in a {n}-qubit kernel",
            bad.len()
        )));
    }
    Ok(n)
}

/// Training and cross kernels in one pass, sharing the training-side work.
pub fn estimate_kernels(
    train: &[Vec<f64>],
    test: &[Vec<f64>],
    cfg: &KernelConfig,
    runner: &Runner,
) -> Result<KernelEstimate> {
    estimate_kernels_with(KernelPath::for_runner(runner), train, test, cfg, runner)
}

/// Training kernel only.
pub fn estimate_kernel(xs: &[Vec<f64>], cfg: &KernelConfig, runner: &Runner) -> Result<KernelMatrix> {
    Ok(estimate_kernels(xs, &[], cfg, runner)?.train)
}

pub fn estimate_kernels_with(
    path: KernelPath,
    train: &[Vec<f64>],
    test: &[Vec<f64>],
    cfg: &KernelConfig,
    runner: &Runner,
) -> Result<KernelEstimate> {
    let n = check_inputs(train, test, cfg)?;
    if path == KernelPath::Overlap && !runner.noise().is_off() {
        return Err(Error::Config(
            "the overlap path ignores noise; disable noise or pick another path".into(),
        ));
    }
    let (nt, ns) = (train.len(), test.len());
    let train_h = compile_halves(train, n, cfg.depth, runner, true)?;
    let test_h = compile_halves(test, n, cfg.depth, runner, false)?;

    // Row jobs: (tag, row index, inverse schedule, first column).
    let jobs: Vec<(u64, usize, &Schedule, usize)> = (0..nt)
        .map(|i| (TRAIN_TAG, i, &train_h.inverse[i], i))
        .chain((0..ns).map(|i| (CROSS_TAG, i, &test_h.inverse[i], 0)))
        .collect();

    let rows: Vec<Vec<f64>> = match path {
        KernelPath::Overlap => {
            let states = |xs: &[Vec<f64>]| -> Result<Vec<StateVector>> {
                xs.par_iter()
                    .map(|x| Ok(evaluate_state(&feature_map(n, x, cfg.depth)?)?))
                    .collect()
            };
            let (phi_train, phi_test) = (states(train)?, states(test)?);
            jobs.par_iter()
                .map(|&(tag, i, _, first)| {
                    let phi_i = if tag == TRAIN_TAG { &phi_train[i] } else { &phi_test[i] };
                    Ok((first..nt).map(|j| phi_i.inner(&phi_train[j]).norm_sqr()).collect())
                })
                .collect::<Result<_>>()?
        }
        KernelPath::Factorized => {
            let dev = runner.device();
            let noise = runner.noise();
            let weights = zero_outcome_weights(n, dev, noise.readout);
            let effect = DensityMatrix::diagonal(n, &weights)?;
            let states = train_h
                .forward
                .par_iter()
                .map(|s| {
                    let mut rho = DensityMatrix::zero_state(n)?;
                    Program::compile(s, dev, noise)?.apply(&mut rho)?;
                    Ok(rho)
                })
                .collect::<Result<Vec<_>>>()?;
            jobs.par_iter()
                .map(|&(_, _, inv, first)| {
                    let mut m = effect.clone();
                    Program::compile(inv, dev, noise)?.apply_adjoint(&mut m)?;
                    Ok((first..nt).map(|j| m.hs_inner(&states[j]).re).collect())
                })
                .collect::<Result<_>>()?
        }
        KernelPath::Direct => {
            let dev = runner.device();
            let noise = runner.noise();
            let weights = zero_outcome_weights(n, dev, noise.readout);
            jobs.par_iter()
                .map(|&(tag, i, inv, first)| {
                    (first..nt)
                        .map(|j| {
                            let s = train_h.forward[j].then(inv)?;
                            let seed = derive_seed(cfg.seed, &[tag, i as u64, j as u64]);
                            let rho = evolve(&s, dev, &noise.with_seed(seed))?;
                            Ok(rho
                                .diagonal_probabilities()
                                .iter()
                                .zip(&weights)
                                .map(|(p, w)| p * w)
                                .sum())
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<_>>()?
        }
    };

    let estimate = |p: f64, tag: u64, i: usize, j: usize| -> Result<f64> {
        let p = p.clamp(0.0, 1.0);
        match cfg.shots {
            None => Ok(p),
            Some(shots) => {
                let mut rng = rng_for(cfg.seed, &[tag, i as u64, j as u64]);
                let hits = Binomial::new(shots, p)
                    .map_err(|e| Error::Config(format!("binomial sampling: {e}")))?
                    .sample(&mut rng);
                Ok(hits as f64 / shots as f64)
            }
        }
    };

    let mut k_train = DMatrix::zeros(nt, nt);
    let mut k_cross = DMatrix::zeros(ns, nt);
    for (&(tag, i, _, first), row) in jobs.iter().zip(&rows) {
        for (offset, &p) in row.iter().enumerate() {
            let j = first + offset;
            let v = estimate(p, tag, i, j)?;
            if tag == TRAIN_TAG {
                k_train[(i, j)] = v;
                k_train[(j, i)] = v;
            } else {
                k_cross[(i, j)] = v;
            }
        }
    }

    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..nt {
        for j in i..nt {
            total += train_h.forward[j].total_duration() + train_h.inverse[i].total_duration();
            count += 1;
        }
    }
    Ok(KernelEstimate {
        train: k_train,
        cross: k_cross,
        mean_duration: total / count as f64,
    })
}

/// `Σ (K_sim − K)² / Σ K_sim²`.
pub fn nmse(k: &KernelMatrix, k_sim: &KernelMatrix) -> Result<f64> {
    if k.shape() != k_sim.shape() {
        return Err(Error::Config(format!(
            "kernel shapes differ: {:?} vs {:?}",
            k.shape(),
            k_sim.shape()
        )));
    }
    let denom = k_sim.norm_squared();
    if denom == 0.0 {
        return Err(Error::Config("reference kernel is zero".into()));
    }
    Ok((k_sim - k).norm_squared() / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelClassification {
    pub estimate: KernelEstimate,
    pub predictions: Vec<usize>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len().max(1) as f64
}

/// Kernel estimation followed by a one-vs-one SVM with penalty `c`.
pub fn classify(
    train: &Dataset,
    test: &Dataset,
    cfg: &KernelConfig,
    runner: &Runner,
    c: f64,
) -> Result<KernelClassification> {
    let estimate = estimate_kernels(&train.features, &test.features, cfg, runner)?;
    let model = svm_fit(&estimate.train, &train.labels, c)?;
    let train_pred = svm_predict(&model, &estimate.train)?;
    let predictions = svm_predict(&model, &estimate.cross)?;
    Ok(KernelClassification {
        train_accuracy: accuracy(&train_pred, &train.labels),
        test_accuracy: accuracy(&predictions, &test.labels),
        predictions,
        estimate,
    })
}
