//! Simultaneous-perturbation stochastic approximation with a calibrated
//! learning rate.

use serde::{Deserialize, Serialize};

use peqml_core::seed::{derive_seed, rng_for};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaConfig {
    pub iterations: usize,
    /// Gradient samples used to calibrate `a` (two evaluations each).
    pub calibration_samples: usize,
    /// Learning-rate numerator; calibrated when `None`.
    pub a: Option<f64>,
    pub c: f64,
    /// Stability constant `A`; `0.1 · iterations` when `None`.
    pub stability: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    /// Calibration target for the first update of each component (rad).
    pub target_step: f64,
    pub seed: u64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig {
            iterations: 50,
            calibration_samples: 25,
            a: None,
            c: 0.1,
            stability: None,
            alpha: 0.602,
            gamma: 0.101,
            target_step: 0.1,
            seed: 0,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c", self.c),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("target_step", self.target_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("spsa.{name} must be positive, got {v}")));
            }
        }
        if let Some(a) = self.a {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Config(format!("spsa.a must be positive, got {a}")));
            }
        } else if self.calibration_samples == 0 {
            return Err(Error::Config(
                "spsa needs calibration samples when `a` is not given".into(),
            ));
        }
        if let Some(s) = self.stability {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Config(format!("spsa.stability must be non-negative, got {s}")));
            }
        }
        Ok(())
    }

    fn stability_constant(&self) -> f64 {
        self.stability.unwrap_or(0.1 * self.iterations as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaResult {
    pub theta: Vec<f64>,
    /// Mean of the two perturbed losses at each iteration.
    pub trace: Vec<f64>,
    pub a: f64,
    pub evaluations: usize,
}

const CALIBRATION: u64 = 1;
const MAIN: u64 = 2;

fn perturbation(seed: u64, phase: u64, k: usize, dim: usize) -> Vec<f64> {
    let mut rng = rng_for(seed, &[phase, k as u64]);
    (0..dim)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Evaluates `f` at `θ ± c·Δ`. The objective receives a seed unique to the
/// evaluation so stochastic objectives stay reproducible.
fn evaluate_pair<F>(f: &F, theta: &[f64], delta: &[f64], c: f64, seeds: [u64; 2]) -> Result<(f64, f64)>
where
    F: Fn(&[f64], u64) -> Result<f64> + Sync,
{
    let shifted = |sign: f64| -> Vec<f64> { theta.iter().zip(delta).map(|(t, d)| t + sign * c * d).collect() };
    let (plus, minus) = (shifted(1.0), shifted(-1.0));
    let (fp, fm) = rayon::join(|| f(&plus, seeds[0]), || f(&minus, seeds[1]));
    let (fp, fm) = (fp?, fm?);
    if !(fp.is_finite() && fm.is_finite()) {
        return Err(Error::Optimization(format!(
            "objective returned {fp} / {fm} at perturbed point {plus:?}"
        )));
    }
    Ok((fp, fm))
}

/// Minimises `f` starting from `theta0`.
pub fn minimize<F>(f: F, theta0: &[f64], cfg: &SpsaConfig) -> Result<SpsaResult>
where
    F: Fn(&[f64], u64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let dim = theta0.len();
    let big_a = cfg.stability_constant();
    let mut evaluations = 0;
    let mut theta = theta0.to_vec();
    if cfg.iterations == 0 {
        return Ok(SpsaResult {
            theta,
            trace: Vec::new(),
            a: cfg.a.unwrap_or(0.0),
            evaluations,
        });
    }

    let a = match cfg.a {
        Some(a) => a,
        None => {
            let mut magnitude = 0.0;
            for k in 0..cfg.calibration_samples {
                let delta = perturbation(cfg.seed, CALIBRATION, k, dim);
                let seeds = [
                    derive_seed(cfg.seed, &[CALIBRATION, k as u64, 0]),
                    derive_seed(cfg.seed, &[CALIBRATION, k as u64, 1]),
                ];
                let (fp, fm) = evaluate_pair(&f, &theta, &delta, cfg.c, seeds)?;
                evaluations += 2;
                magnitude += (fp - fm).abs() / (2.0 * cfg.c);
            }
            magnitude /= cfg.calibration_samples as f64;
            let scale = (big_a + 1.0).powf(cfg.alpha);
            if magnitude > 0.0 {
                cfg.target_step * scale / magnitude
            } else {
                cfg.target_step * scale
            }
        }
    };

    let mut trace = Vec::with_capacity(cfg.iterations);
    for k in 0..cfg.iterations {
        let ak = a / (k as f64 + 1.0 + big_a).powf(cfg.alpha);
        let ck = cfg.c / (k as f64 + 1.0).powf(cfg.gamma);
        let delta = perturbation(cfg.seed, MAIN, k, dim);
        let seeds = [
            derive_seed(cfg.seed, &[MAIN, k as u64, 0]),
            derive_seed(cfg.seed, &[MAIN, k as u64, 1]),
        ];
        let (fp, fm) = evaluate_pair(&f, &theta, &delta, ck, seeds)?;
        evaluations += 2;
        let g = (fp - fm) / (2.0 * ck);
        for (t, d) in theta.iter_mut().zip(&delta) {
            *t -= ak * g * d;
        }
        trace.push(0.5 * (fp + fm));
    }
    Ok(SpsaResult {
        theta,
        trace,
        a,
        evaluations,
    })
}
