//! Gate matrices in the `R_G(θ) = exp(-iθG/2)` convention.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::circuit::Gate;
use crate::error::Result;

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Mat2 {
    Mat2::identity()
}

pub fn hadamard() -> Mat2 {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Mat2::new(s, s, s, -s)
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn sqrt_x() -> Mat2 {
    let a = Complex64::new(0.5, 0.5);
    let b = Complex64::new(0.5, -0.5);
    Mat2::new(a, b, b, a)
}

pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2::new(c.into(), -I * s, -I * s, c.into())
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2::new(c.into(), (-s).into(), s.into(), c.into())
}

pub fn rz(theta: f64) -> Mat2 {
    Mat2::new(
        Complex64::from_polar(1.0, -theta / 2.0),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, theta / 2.0),
    )
}

/// Matrix form of a gate as seen by the simulators.
///
/// Every two-qubit gate in the instruction set is block diagonal in the
/// computational basis of its first qubit, so it is stored as the pair of
/// target-qubit blocks selected by the control value.
#[derive(Debug, Clone, PartialEq)]
pub enum GateMatrix {
    Single {
        qubit: usize,
        u: Mat2,
    },
    Controlled {
        control: usize,
        target: usize,
        u0: Mat2,
        u1: Mat2,
    },
    /// `Measure` and `Delay` have no unitary action.
    None,
}

impl GateMatrix {
    pub fn of(gate: &Gate) -> Result<GateMatrix> {
        let single = |qubit, u| GateMatrix::Single { qubit, u };
        let controlled = |control, target, u0, u1| GateMatrix::Controlled {
            control,
            target,
            u0,
            u1,
        };
        Ok(match gate {
            Gate::H(q) => single(*q, hadamard()),
            Gate::X(q) => single(*q, pauli_x()),
            Gate::Sx(q) => single(*q, sqrt_x()),
            Gate::Rx(q, a) => single(*q, rx(a.value()?)),
            Gate::Ry(q, a) => single(*q, ry(a.value()?)),
            Gate::Rz(q, a) => single(*q, rz(a.value()?)),
            Gate::Rzz(p, q, a) => {
                let t = a.value()?;
                controlled(*p, *q, rz(t), rz(-t))
            }
            Gate::Rzx(c, t, a) => {
                let th = a.value()?;
                controlled(*c, *t, rx(th), rx(-th))
            }
            Gate::CrPulse {
                control,
                target,
                angle,
                sign,
            } => {
                let th = sign.factor() * angle;
                controlled(*control, *target, rx(th), rx(-th))
            }
            Gate::Cnot(c, t) => controlled(*c, *t, identity(), pauli_x()),
            Gate::Measure(_) | Gate::Delay(..) => GateMatrix::None,
        })
    }
}

/// 4×4 matrix of a controlled pair with basis index `2·b_control + b_target`.
pub fn controlled_matrix(u0: &Mat2, u1: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(u0);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(u1);
    m
}

/// Kronecker product `a ⊗ b` (a acts on the high index bit).
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    a.kronecker(b).fixed_view::<4, 4>(0, 0).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn close(a: &Mat2, b: &Mat2) -> bool {
        (a - b).iter().all(|z| z.norm() < 1e-12)
    }

    #[test]
    fn rotations_match_matrix_exponentials() {
        for &theta in &[0.0, 0.3, -1.7, 3.0] {
            let gens = [(rx(theta), pauli_x()), (ry(theta), pauli_y()), (rz(theta), pauli_z())];
            for (r, g) in gens {
                let expected = (g * Complex64::new(0.0, -theta / 2.0)).exp();
                assert!(close(&r, &expected));
            }
        }
    }

    #[test]
    fn controlled_forms_match_two_qubit_exponentials() {
        let theta = 0.7;
        let zz = kron2(&pauli_z(), &pauli_z());
        let zx = kron2(&pauli_z(), &pauli_x());
        let rzz = (zz * Complex64::new(0.0, -theta / 2.0)).exp();
        let rzx = (zx * Complex64::new(0.0, -theta / 2.0)).exp();
        let got_zz = controlled_matrix(&rz(theta), &rz(-theta));
        let got_zx = controlled_matrix(&rx(theta), &rx(-theta));
        for (a, b) in rzz.iter().zip(got_zz.iter()) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-12);
        }
        for (a, b) in rzx.iter().zip(got_zx.iter()) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn sqrt_x_squares_to_x() {
        assert!(close(&(sqrt_x() * sqrt_x()), &pauli_x()));
    }
}
