//! One module per subcommand. Each exposes the experiment itself, returning
//! in-memory records, and `run`, which renders those records as files.

pub mod ingest;
pub mod kernel;
pub mod nibp;
pub mod qnn;
pub mod transpile;

use peqml_core::sim::MAX_DENSITY_QUBITS;

fn check_qubits(qubits: &[usize], min: usize) -> anyhow::Result<()> {
    if qubits.is_empty() {
        anyhow::bail!("no qubit counts selected");
    }
    if let Some(&n) = qubits.iter().find(|&&n| n < min || n > MAX_DENSITY_QUBITS) {
        anyhow::bail!("qubit count {n} is outside {min}..={MAX_DENSITY_QUBITS}");
    }
    Ok(())
}
