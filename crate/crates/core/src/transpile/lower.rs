//! Rule-based lowering over the two-qubit gate set `{RZZ, RZX, CNOT, CR}`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{Angle, Circuit, Gate};
use crate::error::Result;

/// Maps an angle to `(-π, π]`.
///
/// Every two-qubit rotation here has period `2π` up to a global phase,
/// e.g. `RZZ(θ + 2π) = −RZZ(θ)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

fn val(a: &Angle) -> Result<f64> {
    a.value()
}

/// Lowers every two-qubit gate to CNOTs plus single-qubit gates.
///
/// `RZZ(θ) → CNOT · RZ(θ)_target · CNOT`, `RZX(θ) → H_t · RZZ(θ) · H_t`,
/// and a cross-resonance pulse is treated as the `RZX` of its signed angle.
pub fn lower_to_cnot(c: &Circuit) -> Result<Circuit> {
    let mut out = Vec::with_capacity(c.len());
    for g in c.gates() {
        match g {
            Gate::Rzz(a, b, t) => rzz_via_cnot(&mut out, *a, *b, val(t)?),
            Gate::Rzx(ctl, tgt, t) => rzx_via_cnot(&mut out, *ctl, *tgt, val(t)?),
            Gate::CrPulse {
                control,
                target,
                angle,
                sign,
            } => rzx_via_cnot(&mut out, *control, *target, sign.factor() * angle),
            other => out.push(other.clone()),
        }
    }
    Ok(Circuit::from_parts_unchecked(c.width(), out))
}

fn rzz_via_cnot(out: &mut Vec<Gate>, a: usize, b: usize, theta: f64) {
    out.push(Gate::Cnot(a, b));
    out.push(Gate::Rz(b, wrap_angle(theta).into()));
    out.push(Gate::Cnot(a, b));
}

fn rzx_via_cnot(out: &mut Vec<Gate>, c: usize, t: usize, theta: f64) {
    out.push(Gate::H(t));
    rzz_via_cnot(out, c, t, theta);
    out.push(Gate::H(t));
}

/// Lowers every two-qubit gate to `RZX` rotations plus single-qubit gates.
///
/// `RZZ(θ) → H_t · RZX(θ) · H_t` and
/// `CNOT = e^{iπ/4} · (RZ(π/2)_c ⊗ RX(π/2)_t) · RZX(−π/2)`.
/// Output angles are wrapped to `(-π, π]`.
pub fn lower_to_rzx(c: &Circuit) -> Result<Circuit> {
    let mut out = Vec::with_capacity(c.len());
    for g in c.gates() {
        match g {
            Gate::Rzz(a, b, t) => {
                out.push(Gate::H(*b));
                out.push(Gate::Rzx(*a, *b, wrap_angle(val(t)?).into()));
                out.push(Gate::H(*b));
            }
            Gate::Rzx(a, b, t) => out.push(Gate::Rzx(*a, *b, wrap_angle(val(t)?).into())),
            Gate::CrPulse {
                control,
                target,
                angle,
                sign,
            } => out.push(Gate::Rzx(*control, *target, wrap_angle(sign.factor() * angle).into())),
            Gate::Cnot(ctl, tgt) => {
                out.push(Gate::Rzx(*ctl, *tgt, (-FRAC_PI_2).into()));
                out.push(Gate::Rz(*ctl, FRAC_PI_2.into()));
                out.push(Gate::Rx(*tgt, FRAC_PI_2.into()));
            }
            other => out.push(other.clone()),
        }
    }
    Ok(Circuit::from_parts_unchecked(c.width(), out))
}
