//! Experiment drivers built on `peqml-core`: QNN classification on a
//! synthetic parity task, quantum-kernel SVM classification of digits, and
//! barren-plateau sweeps of a Hamiltonian variational ansatz.
//!
//! Every stochastic task draws from a stream derived from the master seed
//! and the task's index path, so results are identical for any worker
//! count.

pub mod digits;
mod error;
pub mod kernel;
pub mod nibp;
pub mod optimize;
pub mod qnn;
mod runner;
pub mod spsa;
pub mod svd;
pub mod svm;

pub use error::{Error, Result};
pub use runner::{with_workers, Runner};
