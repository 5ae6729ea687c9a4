//! C-support vector classification on a precomputed Gram matrix, solved by
//! sequential minimal optimisation with second-order working-set selection.
//! Multiclass problems are split one-vs-one and decided by vote.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
pub const KKT_TOLERANCE: f64 = 1e-3;
const MAX_ITERATIONS: usize = 1_000_000;

/// One binary machine; `+1` is `positive`, `−1` is `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvc {
    pub positive: usize,
    pub negative: usize,
    /// Training indices of the sub-problem, in the original numbering.
    pub indices: Vec<usize>,
    pub alpha: Vec<f64>,
    pub y: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Maximal KKT violation at termination.
    pub violation: f64,
}

impl BinarySvc {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices
            .iter()
            .zip(&self.alpha)
            .filter(|(_, &a)| a > 0.0)
            .map(|(&i, _)| i)
    }

    /// Decision value for a row of kernel values against all training points.
    pub fn decision(&self, k_row: impl Fn(usize) -> f64) -> f64 {
        self.indices
            .iter()
            .zip(self.alpha.iter().zip(&self.y))
            .filter(|(_, (&a, _))| a > 0.0)
            .map(|(&i, (&a, &y))| a * y * k_row(i))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub c: f64,
    pub classes: Vec<usize>,
    pub machines: Vec<BinarySvc>,
    pub n_train: usize,
}

/// Solves one binary problem on the sub-Gram `k` (indexed locally).
fn smo(k: &DMatrix<f64>, y: &[f64], c: f64) -> (Vec<f64>, f64, usize, f64) {
    let l = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[(i, j)];
    let mut alpha = vec![0.0; l];
    let mut grad = vec![-1.0; l];
    let mut iterations = 0;
    let mut violation;
    loop {
        // Working-set selection (maximal violating pair, second order).
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            if up && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..l {
                let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
                if !low {
                    continue;
                }
                let v = y[t] * grad[t];
                g_max2 = g_max2.max(v);
                let b = g_max + v;
                if b > 0.0 {
                    let a = k[(i, i)] + k[(t, t)] - 2.0 * k[(i, t)];
                    let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                    if obj <= best {
                        best = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        violation = g_max + g_max2;
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if violation < KKT_TOLERANCE || iterations >= MAX_ITERATIONS {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (k[(i, i)] + k[(j, j)] + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (k[(i, i)] + k[(j, j)] - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..l {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }
    if iterations >= MAX_ITERATIONS {
        log::warn!("SMO stopped after {iterations} iterations with violation {violation:e}");
    }

    // Offset from the free multipliers, or the middle of the feasible range.
    let (mut sum, mut free) = (0.0, 0usize);
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..l {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    (alpha, -rho, iterations, violation.max(0.0))
}

/// Fits one-vs-one machines on the training Gram matrix.
pub fn svm_fit(k: &DMatrix<f64>, labels: &[usize], c: f64) -> Result<SvmModel> {
    let n = labels.len();
    if k.shape() != (n, n) {
        return Err(Error::Config(format!("Gram matrix is {:?} for {n} labels", k.shape())));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Config(format!("SVM penalty must be positive, got {c}")));
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Config("SVM needs at least two classes".into()));
    }
    let mut machines = Vec::new();
    for (a, &pos) in classes.iter().enumerate() {
        for &neg in &classes[a + 1..] {
            let indices: Vec<usize> = (0..n).filter(|&i| labels[i] == pos || labels[i] == neg).collect();
            let y: Vec<f64> = indices
                .iter()
                .map(|&i| if labels[i] == pos { 1.0 } else { -1.0 })
                .collect();
            let sub = DMatrix::from_fn(indices.len(), indices.len(), |r, s| k[(indices[r], indices[s])]);
            let (alpha, bias, iterations, violation) = smo(&sub, &y, c);
            machines.push(BinarySvc {
                positive: pos,
                negative: neg,
                indices,
                alpha,
                y,
                bias,
                iterations,
                violation,
            });
        }
    }
    Ok(SvmModel {
        c,
        classes,
        machines,
        n_train: n,
    })
}

/// Majority vote over the binary machines; ties go to the smaller label.
pub fn svm_predict(model: &SvmModel, k_cross: &DMatrix<f64>) -> Result<Vec<usize>> {
    if k_cross.ncols() != model.n_train {
        return Err(Error::Config(format!(
            "cross kernel has {} columns, model was trained on {} samples",
            k_cross.ncols(),
            model.n_train
        )));
    }
    Ok((0..k_cross.nrows())
        .map(|r| {
            let mut votes = vec![0usize; model.classes.len()];
            for m in &model.machines {
                let winner = if m.decision(|i| k_cross[(r, i)]) > 0.0 {
                    m.positive
                } else {
                    m.negative
                };
                let slot = model.classes.binary_search(&winner).expect("known class");
                votes[slot] += 1;
            }
            let best = votes.iter().copied().max().unwrap_or(0);
            model.classes[votes.iter().position(|&v| v == best).unwrap_or(0)]
        })
        .collect())
}
