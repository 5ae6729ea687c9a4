//! Builders for the three circuit families: the ZZ feature map, the
//! RY/CNOT classifier ansatz, and the transverse-field Ising
//! Hamiltonian-variational ansatz.

use crate::circuit::{Angle, Circuit, Gate};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Entangling angle of the feature map for neighbouring features.
pub fn pair_angle(xi: f64, xj: f64) -> f64 {
    2.0 * (PI - xi) * (PI - xj)
}

/// ZZ feature map on `width` qubits repeated `depth` times.
///
/// Each layer applies `H` on every qubit, `RZ(2·x_i)` on qubit `i`, then
/// `RZZ(2(π − x_i)(π − x_{i+1}))` along the chain.
pub fn feature_map(width: usize, x: &[f64], depth: usize) -> Result<Circuit> {
    if x.len() != width {
        return Err(Error::DimensionMismatch {
            expected: width,
            got: x.len(),
        });
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("feature map depth must be ≥ 1".into()));
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite feature {bad}")));
    }
    let mut gates = Vec::with_capacity(depth * (3 * width));
    for _ in 0..depth {
        gates.extend((0..width).map(Gate::H));
        gates.extend(x.iter().enumerate().map(|(i, &xi)| Gate::Rz(i, (2.0 * xi).into())));
        gates.extend((0..width.saturating_sub(1)).map(|i| Gate::Rzz(i, i + 1, pair_angle(x[i], x[i + 1]).into())));
    }
    Circuit::from_gates(width, gates)
}

/// Classifier ansatz: `RY(θ_i)` on every qubit, CNOT ladder, `RY(θ_{n+i})`.
pub fn qnn_ansatz(n: usize, theta: &[f64]) -> Result<Circuit> {
    if theta.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: theta.len(),
        });
    }
    ansatz_with(n, |i| Angle::Value(theta[i]))
}

/// Ansatz with symbolic parameters `theta_0 … theta_{2n-1}`.
pub fn qnn_ansatz_symbolic(n: usize) -> Result<Circuit> {
    ansatz_with(n, |i| Angle::symbol(format!("theta_{i}")))
}

fn ansatz_with(n: usize, angle: impl Fn(usize) -> Angle) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("ansatz needs at least one qubit".into()));
    }
    let mut gates: Vec<Gate> = (0..n).map(|i| Gate::Ry(i, angle(i))).collect();
    gates.extend((0..n - 1).map(|i| Gate::Cnot(i, i + 1)));
    gates.extend((0..n).map(|i| Gate::Ry(i, angle(n + i))));
    Circuit::from_gates(n, gates)
}

/// Feature map (given depth) followed by the classifier ansatz.
pub fn qnn_circuit(x: &[f64], theta: &[f64], depth: usize) -> Result<Circuit> {
    let n = x.len();
    let mut c = feature_map(n, x, depth)?;
    c.append(&qnn_ansatz(n, theta)?)?;
    Ok(c)
}

/// Angles of a TFIM Hamiltonian-variational ansatz.
///
/// `gammas` is `layers × n` and `betas` is `layers × (n − 1)`, both
/// row-major by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct HvaParameters {
    pub n: usize,
    pub layers: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl HvaParameters {
    pub fn new(n: usize, layers: usize, gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("HVA needs at least two qubits".into()));
        }
        if gammas.len() != layers * n {
            return Err(Error::DimensionMismatch {
                expected: layers * n,
                got: gammas.len(),
            });
        }
        if betas.len() != layers * (n - 1) {
            return Err(Error::DimensionMismatch {
                expected: layers * (n - 1),
                got: betas.len(),
            });
        }
        Ok(HvaParameters {
            n,
            layers,
            gammas,
            betas,
        })
    }

    pub fn zeros(n: usize, layers: usize) -> Self {
        HvaParameters {
            n,
            layers,
            gammas: vec![0.0; layers * n],
            betas: vec![0.0; layers * (n - 1)],
        }
    }

    pub fn gamma(&self, layer: usize, qubit: usize) -> f64 {
        self.gammas[layer * self.n + qubit]
    }

    pub fn beta(&self, layer: usize, pair: usize) -> f64 {
        self.betas[layer * (self.n - 1) + pair]
    }

    /// Index into `betas` of the coupling on the last pair of the final layer.
    pub fn last_beta_index(&self) -> usize {
        self.betas.len() - 1
    }
}

/// TFIM Hamiltonian-variational ansatz.
///
/// Each layer applies `exp(-iβ Z_i Z_{i+1})` as `RZZ(2β)` on every
/// neighbouring pair, then `exp(-iγ X_i)` as `RX(2γ)` on every qubit.
pub fn hva_tfim(params: &HvaParameters) -> Result<Circuit> {
    let n = params.n;
    let mut gates = Vec::with_capacity(params.layers * (2 * n - 1));
    for l in 0..params.layers {
        gates.extend((0..n - 1).map(|i| Gate::Rzz(i, i + 1, (2.0 * params.beta(l, i)).into())));
        gates.extend((0..n).map(|i| Gate::Rx(i, (2.0 * params.gamma(l, i)).into())));
    }
    Circuit::from_gates(n, gates)
}

/// Layer count used by the barren-plateau sweep, `L = 2(n − 1)`.
pub fn nibp_layers(n: usize) -> usize {
    2 * n.saturating_sub(1)
}
