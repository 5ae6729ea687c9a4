use crate::circuit::{Circuit, Gate};
use crate::error::Result;
use crate::gates::{GateMatrix, Mat2};
use crate::transpile::lower::wrap_angle;

const ANGLE_TOL: f64 = 1e-12;

/// Euler angles of `U = e^{iφ} · RZ(a) · RY(b) · RZ(c)` (global phase dropped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zyz {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Zyz {
    pub fn decompose(u: &Mat2) -> Zyz {
        let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
        let v = u / det.sqrt();
        let (v00, v10, v11) = (v[(0, 0)], v[(1, 0)], v[(1, 1)]);
        let b = 2.0 * v10.norm().atan2(v00.norm());
        let (a, c) = if v10.norm() < 1e-14 {
            (2.0 * v11.arg(), 0.0)
        } else if v00.norm() < 1e-14 {
            (2.0 * v10.arg(), 0.0)
        } else {
            let sum = 2.0 * v11.arg();
            let diff = 2.0 * v10.arg();
            ((sum + diff) / 2.0, (sum - diff) / 2.0)
        };
        Zyz { a, b, c }
    }

    /// Gates in circuit order, skipping rotations that are identities.
    fn gates(self, q: usize) -> Vec<Gate> {
        let mut out = Vec::with_capacity(3);
        let b = wrap_angle(self.b);
        if b.abs() < ANGLE_TOL {
            let z = wrap_angle(self.a + self.c);
            if z.abs() >= ANGLE_TOL {
                out.push(Gate::Rz(q, z.into()));
            }
            return out;
        }
        let (a, c) = (wrap_angle(self.a), wrap_angle(self.c));
        if c.abs() >= ANGLE_TOL {
            out.push(Gate::Rz(q, c.into()));
        }
        out.push(Gate::Ry(q, b.into()));
        if a.abs() >= ANGLE_TOL {
            out.push(Gate::Rz(q, a.into()));
        }
        out
    }
}

fn is_null_two_qubit(g: &Gate) -> Result<bool> {
    Ok(match g {
        Gate::CrPulse { angle, .. } => *angle < ANGLE_TOL,
        Gate::Rzz(_, _, a) | Gate::Rzx(_, _, a) => a.value()?.abs() < ANGLE_TOL,
        _ => false,
    })
}

/// Collapses maximal runs of single-qubit gates on each qubit into at most
/// one `RZ·RY·RZ` group and drops zero-angle two-qubit rotations.
///
/// Two-qubit gates, `Measure` and `Delay` end a run. Runs that multiply to
/// the identity (up to phase) disappear entirely.
pub fn merge_single_qubit(c: &Circuit) -> Result<Circuit> {
    let n = c.width();
    let mut pending: Vec<Option<Mat2>> = vec![None; n];
    let mut out = Vec::with_capacity(c.len());

    fn flush(q: usize, pending: &mut [Option<Mat2>], out: &mut Vec<Gate>) {
        if let Some(u) = pending[q].take() {
            out.extend(Zyz::decompose(&u).gates(q));
        }
    }

    for g in c.gates() {
        if g.is_single_qubit_unitary() {
            if let GateMatrix::Single { qubit, u } = GateMatrix::of(g)? {
                let acc = pending[qubit].get_or_insert_with(Mat2::identity);
                *acc = u * *acc;
            }
            continue;
        }
        if is_null_two_qubit(g)? {
            continue;
        }
        for q in g.qubits().iter() {
            flush(q, &mut pending, &mut out);
        }
        out.push(g.clone());
    }
    for q in 0..n {
        flush(q, &mut pending, &mut out);
    }
    Ok(Circuit::from_parts_unchecked(n, out))
}
