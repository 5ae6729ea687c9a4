use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::Mat2;
use crate::statevector::StateVector;

pub const MAX_DENSITY_QUBITS: usize = 10;

/// Superoperator of a single-qubit map on the local block
/// `[ρ00, ρ01, ρ10, ρ11]`, row-major 4×4.
pub type Superop = [Complex64; 16];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn superop_identity() -> Superop {
    let mut s = [ZERO; 16];
    for i in 0..4 {
        s[5 * i] = ONE;
    }
    s
}

/// `ρ ↦ UρU†` as a superoperator (`U ⊗ Ū`).
pub fn superop_unitary(u: &Mat2) -> Superop {
    let mut s = [ZERO; 16];
    for r in 0..2 {
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    s[(2 * r + c) * 4 + (2 * a + b)] = u[(r, a)] * u[(c, b)].conj();
                }
            }
        }
    }
    s
}

/// `a ∘ b` (apply `b` first).
pub fn superop_compose(a: &Superop, b: &Superop) -> Superop {
    let mut out = [ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += a[i * 4 + k] * b[k * 4 + j];
            }
            out[i * 4 + j] = acc;
        }
    }
    out
}

/// Hilbert–Schmidt adjoint, the Heisenberg-picture map.
pub fn superop_adjoint(s: &Superop) -> Superop {
    let mut out = [ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            out[j * 4 + i] = s[i * 4 + j].conj();
        }
    }
    out
}

/// A `2^n × 2^n` density operator, stored row-major.
///
/// The same storage is used for Heisenberg-picture observables, which
/// evolve under the adjoint maps.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::check_width(n)?;
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = ONE;
        Ok(DensityMatrix { n, data })
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let n = psi.num_qubits();
        Self::check_width(n)?;
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(a[r] * a[c].conj());
            }
        }
        Ok(DensityMatrix { n, data })
    }

    /// Diagonal operator with the given real entries.
    pub fn diagonal(n: usize, diag: &[f64]) -> Result<Self> {
        Self::check_width(n)?;
        let dim = 1usize << n;
        if diag.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: diag.len(),
            });
        }
        let mut data = vec![ZERO; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d.into();
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        let n = dim.trailing_zeros() as usize;
        if dim != 1 << n || m.ncols() != dim {
            return Err(Error::InvalidArgument("matrix is not 2^n square".into()));
        }
        Self::check_width(n)?;
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(m[(r, c)]);
            }
        }
        Ok(DensityMatrix { n, data })
    }

    fn check_width(n: usize) -> Result<()> {
        if n > MAX_DENSITY_QUBITS {
            return Err(Error::TooManyQubits {
                width: n,
                limit: MAX_DENSITY_QUBITS,
            });
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        DMatrix::from_row_slice(dim, dim, &self.data)
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    /// Real parts of the diagonal.
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re).collect()
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &DensityMatrix) -> Complex64 {
        let dim = self.dim();
        let mut acc = ZERO;
        for r in 0..dim {
            let row = &self.data[r * dim..(r + 1) * dim];
            for (c, a) in row.iter().enumerate() {
                acc += a * other.data[c * dim + r];
            }
        }
        acc
    }

    /// `Tr(self† · other)`, which is `Tr(self · other)` for Hermitian `self`.
    pub fn hs_inner(&self, other: &DensityMatrix) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest deviation from Hermiticity, `max |ρ_rc − conj(ρ_cr)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks trace, Hermiticity and positivity against `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::InvalidArgument(format!("trace {tr} differs from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidArgument(format!("not Hermitian (error {herm:e})")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Applies a single-qubit superoperator on qubit `q`.
    pub fn apply_local(&mut self, q: usize, s: &Superop) {
        let dim = self.dim();
        let bit = 1usize << q;
        let data = &mut self.data;
        for r_hi in (0..dim).step_by(2 * bit) {
            for r0 in r_hi..r_hi + bit {
                let r1 = r0 | bit;
                let (row0, row1) = (r0 * dim, r1 * dim);
                for c_hi in (0..dim).step_by(2 * bit) {
                    for c0 in c_hi..c_hi + bit {
                        let c1 = c0 | bit;
                        let v = [data[row0 + c0], data[row0 + c1], data[row1 + c0], data[row1 + c1]];
                        let out = |i: usize| {
                            s[4 * i] * v[0] + s[4 * i + 1] * v[1] + s[4 * i + 2] * v[2] + s[4 * i + 3] * v[3]
                        };
                        data[row0 + c0] = out(0);
                        data[row0 + c1] = out(1);
                        data[row1 + c0] = out(2);
                        data[row1 + c1] = out(3);
                    }
                }
            }
        }
    }

    /// `ρ ↦ UρU†` for `U = |0⟩⟨0|_c ⊗ u0 + |1⟩⟨1|_c ⊗ u1` on target `t`.
    pub fn apply_controlled(&mut self, c: usize, t: usize, u0: &Mat2, u1: &Mat2) {
        let dim = self.dim();
        let (cbit, tbit) = (1usize << c, 1usize << t);
        let data = &mut self.data;
        // Rows: ρ ← U ρ.
        for r0 in 0..dim {
            if r0 & tbit != 0 {
                continue;
            }
            let u = if r0 & cbit == 0 { u0 } else { u1 };
            let (a00, a01, a10, a11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
            let r1 = r0 | tbit;
            let (lo, hi) = data.split_at_mut(r1 * dim);
            let row0 = &mut lo[r0 * dim..(r0 + 1) * dim];
            let row1 = &mut hi[..dim];
            for (x, y) in row0.iter_mut().zip(row1.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a00 * a + a01 * b;
                *y = a10 * a + a11 * b;
            }
        }
        // Columns: ρ ← ρ U†.
        let conj = |u: &Mat2| [u[(0, 0)].conj(), u[(0, 1)].conj(), u[(1, 0)].conj(), u[(1, 1)].conj()];
        let (v0, v1) = (conj(u0), conj(u1));
        for row in data.chunks_exact_mut(dim) {
            for c0 in 0..dim {
                if c0 & tbit != 0 {
                    continue;
                }
                let v = if c0 & cbit == 0 { &v0 } else { &v1 };
                let c1 = c0 | tbit;
                let (a, b) = (row[c0], row[c1]);
                row[c0] = a * v[0] + b * v[1];
                row[c1] = a * v[2] + b * v[3];
            }
        }
    }

    /// CNOT conjugation as a pure permutation.
    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        let dim = self.dim();
        let (cbit, tbit) = (1usize << c, 1usize << t);
        for r0 in 0..dim {
            if r0 & cbit != 0 && r0 & tbit == 0 {
                let r1 = r0 | tbit;
                for col in 0..dim {
                    self.data.swap(r0 * dim + col, r1 * dim + col);
                }
            }
        }
        for row in self.data.chunks_exact_mut(dim) {
            for c0 in 0..dim {
                if c0 & cbit != 0 && c0 & tbit == 0 {
                    row.swap(c0, c0 | tbit);
                }
            }
        }
    }
}
