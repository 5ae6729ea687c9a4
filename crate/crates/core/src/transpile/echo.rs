use std::f64::consts::FRAC_PI_4;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Rewrites each `RZX(θ)` as its echoed cross-resonance implementation.
///
/// In circuit time order the replacement is `X_c, CR(−θ/2), X_c, CR(+θ/2)`,
/// whose operator product `CR(θ/2)·X_c·CR(−θ/2)·X_c` equals `RZX(θ)` with
/// `CR(α) = exp(−iα ZX/2)`.
pub fn expand_echo(c: &Circuit) -> Result<Circuit> {
    expand_echo_with_error(c, 0.0)
}

/// [`expand_echo`] with a multiplicative angle error `over_rotation` on
/// every pulse whose angle differs from the calibrated `π/4`.
///
/// A non-zero error breaks unitary equivalence by construction; it models
/// the coherent mis-rotation of amplitude-scaled pulses.
pub fn expand_echo_with_error(c: &Circuit, over_rotation: f64) -> Result<Circuit> {
    if !over_rotation.is_finite() {
        return Err(Error::InvalidArgument("over-rotation must be finite".into()));
    }
    let mut out = Vec::with_capacity(c.len() + 3 * c.two_qubit_count());
    for g in c.gates() {
        match g {
            Gate::Rzx(ctl, tgt, theta) => {
                let (ctl, tgt) = (*ctl, *tgt);
                if ctl.abs_diff(tgt) != 1 {
                    return Err(Error::NotCoupled(ctl, tgt));
                }
                let mut half = theta.value()? / 2.0;
                if (half.abs() - FRAC_PI_4).abs() > 1e-12 {
                    half *= 1.0 + over_rotation;
                }
                out.push(Gate::X(ctl));
                out.push(Gate::cr_pulse(ctl, tgt, -half));
                out.push(Gate::X(ctl));
                out.push(Gate::cr_pulse(ctl, tgt, half));
            }
            Gate::Rzz(..) | Gate::Cnot(..) => {
                return Err(Error::UnsupportedGate(format!(
                    "{} in echo expansion (lower to RZX first)",
                    g.kind()
                )))
            }
            other => out.push(other.clone()),
        }
    }
    Ok(Circuit::from_parts_unchecked(c.width(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::transpile::check_equivalence;

    #[test]
    fn quarter_turn_uses_calibrated_pulses() {
        let c = Circuit::from_gates(2, [Gate::Rzx(0, 1, std::f64::consts::FRAC_PI_2.into())]).unwrap();
        let e = expand_echo(&c).unwrap();
        assert_eq!(
            e.gates(),
            &[
                Gate::X(0),
                Gate::cr_pulse(0, 1, -FRAC_PI_4),
                Gate::X(0),
                Gate::cr_pulse(0, 1, FRAC_PI_4)
            ]
        );
        assert!(check_equivalence(&c, &e, 1e-12).unwrap());
        // The calibrated angle is exempt from the scaling error.
        assert_eq!(expand_echo_with_error(&c, 0.05).unwrap(), e);
    }

    #[test]
    fn pulse_and_echo_counts() {
        let c = Circuit::from_gates(
            3,
            [Gate::Rzx(0, 1, 0.3.into()), Gate::H(2), Gate::Rzx(2, 1, (-1.1).into())],
        )
        .unwrap();
        let e = expand_echo(&c).unwrap();
        assert_eq!(e.count(GateKind::CrPulse), 4);
        assert_eq!(e.count(GateKind::X), 4);
        assert!(check_equivalence(&c, &e, 1e-12).unwrap());
    }

    #[test]
    fn rejects_unlowered_gates() {
        let c = Circuit::from_gates(2, [Gate::Cnot(0, 1)]).unwrap();
        assert!(matches!(expand_echo(&c).unwrap_err(), Error::UnsupportedGate(_)));
    }

    #[test]
    fn over_rotation_breaks_equivalence() {
        let c = Circuit::from_gates(2, [Gate::Rzx(0, 1, 0.5.into())]).unwrap();
        let e = expand_echo_with_error(&c, 0.1).unwrap();
        assert!(!check_equivalence(&c, &e, 1e-6).unwrap());
    }
}
