//! Circuit representation, cross-resonance transpilation, pulse scheduling
//! and noisy simulation for superconducting qubit chains.
//!
//! Qubits are little-endian: qubit `q` is bit `q` of a basis index.
//! Rotations follow `R_G(θ) = exp(−iθG/2)`.

pub mod builders;
pub mod circuit;
pub mod device;
pub mod error;
pub mod gates;
pub mod schedule;
pub mod seed;
pub mod sim;
pub mod statevector;
pub mod transpile;

pub use circuit::{Angle, Circuit, Gate, GateKind, Sign};
pub use device::{DeviceModel, DeviceParams};
pub use error::{Error, Result};
pub use schedule::{insert_dd, schedule, Schedule, TimedOp};
pub use sim::{evolve, DensityMatrix, NoiseConfig};
pub use statevector::{evaluate_state, evaluate_unitary, StateVector};
