//! Exact pure-state evaluation, used as the noiseless backend and as the
//! reference oracle for transpilation passes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::{GateMatrix, Mat2};

pub const MAX_UNITARY_QUBITS: usize = 12;
pub const MAX_STATE_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "state length {} is not a power of two",
                amps.len()
            )));
        }
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&mut self, m: &GateMatrix) {
        match m {
            GateMatrix::Single { qubit, u } => self.apply_single(*qubit, u),
            GateMatrix::Controlled {
                control,
                target,
                u0,
                u1,
            } => self.apply_controlled(*control, *target, u0, u1),
            GateMatrix::None => {}
        }
    }

    /// Applies a gate; `Measure` and `Delay` act as identity.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        self.apply(&GateMatrix::of(gate)?);
        Ok(())
    }

    fn apply_single(&mut self, q: usize, u: &Mat2) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let (a, b) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = u[(0, 0)] * a + u[(0, 1)] * b;
            self.amps[i | bit] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }

    fn apply_controlled(&mut self, c: usize, t: usize, u0: &Mat2, u1: &Mat2) {
        let (cbit, tbit) = (1usize << c, 1usize << t);
        for i in 0..self.amps.len() {
            if i & tbit != 0 {
                continue;
            }
            let u = if i & cbit == 0 { u0 } else { u1 };
            let (a, b) = (self.amps[i], self.amps[i | tbit]);
            self.amps[i] = u[(0, 0)] * a + u[(0, 1)] * b;
            self.amps[i | tbit] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }
}

/// Output state of a bound circuit applied to `|0…0⟩`.
///
/// `Measure` and `Delay` instructions are ignored.
pub fn evaluate_state(c: &Circuit) -> Result<StateVector> {
    if c.width() > MAX_STATE_QUBITS {
        return Err(Error::TooManyQubits {
            width: c.width(),
            limit: MAX_STATE_QUBITS,
        });
    }
    let mut psi = StateVector::zero(c.width());
    for g in c.gates() {
        psi.apply_gate(g)?;
    }
    Ok(psi)
}

/// Full `2^n × 2^n` unitary of a bound, measurement-free circuit.
pub fn evaluate_unitary(c: &Circuit) -> Result<DMatrix<Complex64>> {
    let n = c.width();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            width: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let mats = c
        .gates()
        .iter()
        .map(|g| match g {
            Gate::Measure(_) | Gate::Delay(..) => {
                Err(Error::UnsupportedGate(format!("{} in unitary evaluation", g.kind())))
            }
            _ => GateMatrix::of(g),
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = 1usize << n;
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = StateVector::basis(n, col);
        for m in &mats {
            psi.apply(m);
        }
        u.column_mut(col).iter_mut().zip(psi.amps).for_each(|(dst, a)| *dst = a);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Angle;

    #[test]
    fn empty_circuit_is_identity() {
        let u = evaluate_unitary(&Circuit::new(2)).unwrap();
        assert_eq!(u, DMatrix::identity(4, 4));
    }

    #[test]
    fn hadamard_makes_plus_state() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0)).unwrap();
        let psi = evaluate_state(&c).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for a in psi.amplitudes() {
            assert!((a - Complex64::new(s, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn rzz_is_diagonal_with_expected_phases() {
        let theta = 0.9;
        let mut c = Circuit::new(2);
        c.push(Gate::Rzz(0, 1, theta.into())).unwrap();
        let u = evaluate_unitary(&c).unwrap();
        let m = Complex64::from_polar(1.0, -theta / 2.0);
        let p = Complex64::from_polar(1.0, theta / 2.0);
        let expected = [m, p, p, m];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { expected[i] } else { 0.0.into() };
                assert!((u[(i, j)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cnot_control_is_first_qubit() {
        // |q1 q0⟩ = |01⟩ (index 1) has the control set, so it maps to index 3.
        let mut c = Circuit::new(2);
        c.push(Gate::X(0)).unwrap();
        c.push(Gate::Cnot(0, 1)).unwrap();
        let p = evaluate_state(&c).unwrap().probabilities();
        assert!((p[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_rejects_measurement_and_symbols() {
        let mut c = Circuit::new(1);
        c.push(Gate::Rx(0, Angle::symbol("t"))).unwrap();
        assert!(matches!(evaluate_unitary(&c).unwrap_err(), Error::UnboundParameter(_)));
        let mut c = Circuit::new(1);
        c.measure_all();
        assert!(evaluate_unitary(&c).is_err());
        assert!(evaluate_state(&c).is_ok());
    }

    #[test]
    fn width_limit_enforced() {
        assert!(matches!(
            evaluate_unitary(&Circuit::new(13)).unwrap_err(),
            Error::TooManyQubits { .. }
        ));
    }
}
