//! Device timing and noise parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform device parameters, the form used in configuration files.
///
/// Times are in nanoseconds, `omega_zx` in rad/ns and `sigma_idle` in
/// rad/ns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    pub t1: f64,
    pub t2: f64,
    pub t_1q: f64,
    pub t_edge: f64,
    pub omega_zx: f64,
    pub t_meas: f64,
    pub readout_p01: f64,
    pub readout_p10: f64,
    pub sigma_idle: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            t1: 100_000.0,
            t2: 80_000.0,
            t_1q: 35.0,
            t_edge: 50.0,
            omega_zx: 0.005,
            t_meas: 700.0,
            readout_p01: 0.02,
            readout_p10: 0.02,
            sigma_idle: 1e-4,
        }
    }
}

impl DeviceParams {
    /// Device with these parameters on every qubit of an `n`-qubit chain.
    pub fn model(&self, n: usize) -> Result<DeviceModel> {
        let m = DeviceModel {
            n_qubits: n,
            t1: vec![self.t1; n],
            t2: vec![self.t2; n],
            t_1q: self.t_1q,
            t_edge: self.t_edge,
            omega_zx: self.omega_zx,
            t_meas: self.t_meas,
            readout_p01: vec![self.readout_p01; n],
            readout_p10: vec![self.readout_p10; n],
            sigma_idle: self.sigma_idle,
        };
        m.validate()?;
        Ok(m)
    }
}

/// Per-qubit device model on a linear chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    pub n_qubits: usize,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub t_1q: f64,
    pub t_edge: f64,
    pub omega_zx: f64,
    pub t_meas: f64,
    pub readout_p01: Vec<f64>,
    pub readout_p10: Vec<f64>,
    pub sigma_idle: f64,
}

impl DeviceModel {
    /// Default parameters on `n` qubits.
    pub fn uniform(n: usize) -> DeviceModel {
        DeviceParams::default()
            .model(n)
            .expect("default device parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        let bad = |m: String| Err(Error::InvalidDevice(m));
        for (name, v) in [
            ("t1", &self.t1),
            ("t2", &self.t2),
            ("readout_p01", &self.readout_p01),
            ("readout_p10", &self.readout_p10),
        ] {
            if v.len() != n {
                return bad(format!("{name} has {} entries for {n} qubits", v.len()));
            }
        }
        for (name, v) in [
            ("t_1q", self.t_1q),
            ("t_edge", self.t_edge),
            ("t_meas", self.t_meas),
            ("sigma_idle", self.sigma_idle),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if !(self.omega_zx.is_finite() && self.omega_zx > 0.0) {
            return bad(format!("omega_zx must be positive, got {}", self.omega_zx));
        }
        for q in 0..n {
            let (t1, t2) = (self.t1[q], self.t2[q]);
            if !(t1 > 0.0 && t2 > 0.0) {
                return bad(format!("qubit {q}: T1 and T2 must be positive"));
            }
            if t2 > 2.0 * t1 * (1.0 + 1e-12) {
                return bad(format!("qubit {q}: T2 = {t2} exceeds 2·T1 = {}", 2.0 * t1));
            }
            for p in [self.readout_p01[q], self.readout_p10[q]] {
                if !(0.0..=0.5).contains(&p) {
                    return bad(format!("qubit {q}: readout probability {p} outside [0, 0.5]"));
                }
            }
        }
        Ok(())
    }

    /// Pure-dephasing time, `1/T_φ = 1/T2 − 1/(2·T1)`; `None` when
    /// `T2 = 2·T1`.
    pub fn t_phi(&self, q: usize) -> Option<f64> {
        let rate = 1.0 / self.t2[q] - 1.0 / (2.0 * self.t1[q]);
        (rate > 1e-18).then(|| 1.0 / rate)
    }

    /// Duration of one non-echoed cross-resonance pulse of angle `|α|`.
    pub fn cr_pulse_duration(&self, angle: f64) -> f64 {
        self.t_edge + angle.abs() / self.omega_zx
    }

    /// Echoed `RZX(θ)`: two pulses of `|θ|/2` plus two echo `X` gates.
    pub fn echoed_rzx_duration(&self, theta: f64) -> f64 {
        2.0 * self.cr_pulse_duration(theta / 2.0) + 2.0 * self.t_1q
    }

    /// CNOT built from calibrated `CR(±π/4)` pulses with two echoes.
    pub fn cnot_duration(&self) -> f64 {
        self.echoed_rzx_duration(std::f64::consts::FRAC_PI_2)
    }

    /// Restricts (or checks) the model for a `width`-qubit circuit.
    pub fn check_width(&self, width: usize) -> Result<()> {
        if width > self.n_qubits {
            return Err(Error::InvalidDevice(format!(
                "circuit uses {width} qubits but the device has {}",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_expected_cnot_length() {
        let d = DeviceModel::uniform(2);
        assert!((d.cnot_duration() - 484.159).abs() < 1e-3);
        assert!((d.cr_pulse_duration(std::f64::consts::FRAC_PI_4) - 207.0796).abs() < 1e-3);
    }

    #[test]
    fn validation_catches_bad_parameters() {
        let mut d = DeviceModel::uniform(2);
        d.t2[1] = 250_000.0;
        assert!(d.validate().is_err());
        let mut d = DeviceModel::uniform(2);
        d.readout_p10[0] = 0.6;
        assert!(d.validate().is_err());
        let mut d = DeviceModel::uniform(2);
        d.t_1q = -1.0;
        assert!(d.validate().is_err());
        let mut d = DeviceModel::uniform(2);
        d.t1.pop();
        assert!(d.validate().is_err());
    }

    #[test]
    fn t_phi_from_t1_t2() {
        let d = DeviceModel::uniform(1);
        let expected = 1.0 / (1.0 / 80_000.0 - 1.0 / 200_000.0);
        assert!((d.t_phi(0).unwrap() - expected).abs() < 1e-6);
        let mut d = d;
        d.t2[0] = 200_000.0;
        assert_eq!(d.t_phi(0), None);
    }
}
