//! Lowering passes and the named transpilation pipelines.
//!
//! Two pipelines are registered by default:
//!
//! * `cnot`, conventional lowering: every two-qubit rotation becomes
//!   CNOTs (each an echoed pair of calibrated `π/4` cross-resonance pulses
//!   on hardware), followed by single-qubit merging.
//! * `pe`, pulse-efficient lowering: two-qubit rotations become `RZX(θ)`,
//!   are exposed as amplitude-scaled echoed pulses `CR(±θ/2)`, and the
//!   single-qubit gates between pulses are merged.

mod echo;
mod lower;
mod merge;
mod pipeline;

pub use echo::{expand_echo, expand_echo_with_error};
pub use lower::{lower_to_cnot, lower_to_rzx, wrap_angle};
pub use merge::{merge_single_qubit, Zyz};
pub use pipeline::{CnotPipeline, Pipeline, PipelineRegistry, PulseEfficientPipeline};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::statevector::evaluate_unitary;

pub const MAX_EQUIVALENCE_QUBITS: usize = 10;

/// Gate set a lowered circuit is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTarget {
    CnotBasis,
    RzxBasis,
    EchoedPulseBasis,
}

impl BasisTarget {
    /// Whether every gate of `c` belongs to this basis.
    pub fn admits(self, c: &Circuit) -> bool {
        c.gates().iter().all(|g| {
            if g.is_single_qubit_unitary() || matches!(g, Gate::Measure(_) | Gate::Delay(..)) {
                return true;
            }
            matches!(
                (self, g),
                (BasisTarget::CnotBasis, Gate::Cnot(..))
                    | (BasisTarget::RzxBasis, Gate::Rzx(..))
                    | (BasisTarget::EchoedPulseBasis, Gate::CrPulse { .. })
            )
        })
    }
}

/// Whether two circuits implement the same unitary up to a global phase.
///
/// The phase is taken from the largest-magnitude entry of `b`'s unitary,
/// then the max-norm of `U_a − e^{iφ}U_b` is compared with `tol`.
pub fn check_equivalence(a: &Circuit, b: &Circuit, tol: f64) -> Result<bool> {
    if a.width() != b.width() {
        return Err(Error::DimensionMismatch {
            expected: a.width(),
            got: b.width(),
        });
    }
    if a.width() > MAX_EQUIVALENCE_QUBITS {
        return Err(Error::TooManyQubits {
            width: a.width(),
            limit: MAX_EQUIVALENCE_QUBITS,
        });
    }
    let ua = evaluate_unitary(a)?;
    let ub = evaluate_unitary(b)?;
    Ok(phase_distance(&ua, &ub) <= tol)
}

/// `min_φ`-style distance `‖U_a − e^{iφ}U_b‖_max` with the phase fixed by
/// the largest entry of `U_b`.
pub fn phase_distance(ua: &DMatrix<Complex64>, ub: &DMatrix<Complex64>) -> f64 {
    let (k, pivot) = ub
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(k, z)| (k, *z))
        .expect("non-empty matrix");
    let ratio = ua[k] / pivot;
    if ratio.norm() < 1e-300 {
        return f64::INFINITY;
    }
    let phase = ratio / ratio.norm();
    ua.iter()
        .zip(ub.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}
