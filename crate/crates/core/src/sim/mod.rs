//! Noisy density-matrix simulation of pulse schedules.
//!
//! A schedule is compiled into a [`Program`]: each timed operation
//! contributes its unitary followed by amplitude damping and pure dephasing
//! for its duration, and idle windows additionally pick up a quasi-static
//! `Z` rotation. Consecutive single-qubit maps on a qubit are fused into one
//! superoperator, so a program alternates between fused local maps and
//! block-diagonal two-qubit conjugations.

mod backend;
mod density;
mod readout;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use backend::{Backend, BackendRegistry, DensityBackend, StatevectorBackend};
pub use density::{
    superop_adjoint, superop_compose, superop_identity, superop_unitary, DensityMatrix, Superop, MAX_DENSITY_QUBITS,
};
pub use readout::{
    apply_readout_error, expectation_parity, expectation_z0z1, mitigate_distribution, mitigate_readout, sample,
    sample_probabilities, zero_bitstring_frequency, Counts,
};

use crate::circuit::Gate;
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::gates::{self, GateMatrix, Mat2};
use crate::schedule::Schedule;
use crate::seed::rng_for;

const DETUNING_STREAM: u64 = 0x5157;
const SAMPLING_STREAM: u64 = 0x5A4D;

/// Which noise channels are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub amplitude_damping: bool,
    pub dephasing: bool,
    pub quasi_static: bool,
    pub readout: bool,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::full(0)
    }
}

impl NoiseConfig {
    pub fn full(seed: u64) -> Self {
        NoiseConfig {
            amplitude_damping: true,
            dephasing: true,
            quasi_static: true,
            readout: true,
            seed,
        }
    }

    pub fn off() -> Self {
        NoiseConfig {
            amplitude_damping: false,
            dephasing: false,
            quasi_static: false,
            readout: false,
            seed: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseConfig { seed, ..self }
    }

    /// True when any channel acts on the state (readout excluded).
    pub fn affects_state(&self) -> bool {
        self.amplitude_damping || self.dephasing || self.quasi_static
    }

    pub fn is_off(&self) -> bool {
        !self.affects_state() && !self.readout
    }

    /// Quasi-static detunings for an `n`-qubit execution, one per qubit.
    pub fn detunings(&self, dev: &DeviceModel, n: usize) -> Vec<f64> {
        if !self.quasi_static || dev.sigma_idle == 0.0 {
            return vec![0.0; n];
        }
        let normal = Normal::new(0.0, dev.sigma_idle).expect("sigma_idle is validated");
        let mut rng = rng_for(self.seed, &[DETUNING_STREAM]);
        (0..n).map(|_| normal.sample(&mut rng)).collect()
    }

    pub(crate) fn sampling_rng(&self) -> rand_chacha::ChaCha8Rng {
        rng_for(self.seed, &[SAMPLING_STREAM])
    }
}

/// Amplitude damping then dephasing for `d` ns on qubit `q`.
fn idle_channel(q: usize, d: f64, dev: &DeviceModel, cfg: &NoiseConfig) -> Option<Superop> {
    if d <= 0.0 || !(cfg.amplitude_damping || cfg.dephasing) {
        return None;
    }
    let mut s = superop_identity();
    let mut coherence = 1.0;
    if cfg.amplitude_damping {
        let gamma = 1.0 - (-d / dev.t1[q]).exp();
        s[3] = gamma.into();
        s[15] = (1.0 - gamma).into();
        coherence *= (1.0 - gamma).sqrt();
    }
    if cfg.dephasing {
        if let Some(t_phi) = dev.t_phi(q) {
            coherence *= (-d / t_phi).exp();
        }
    }
    s[5] = coherence.into();
    s[10] = coherence.into();
    Some(s)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Local {
        qubit: usize,
        map: Superop,
    },
    Controlled {
        control: usize,
        target: usize,
        u0: Mat2,
        u1: Mat2,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// A compiled schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    n: usize,
    steps: Vec<Step>,
}

impl Program {
    /// Compiles with detunings drawn from `cfg.seed`.
    pub fn compile(s: &Schedule, dev: &DeviceModel, cfg: &NoiseConfig) -> Result<Program> {
        let deltas = cfg.detunings(dev, s.width());
        Self::compile_with_detunings(s, dev, cfg, &deltas)
    }

    pub fn compile_with_detunings(
        s: &Schedule,
        dev: &DeviceModel,
        cfg: &NoiseConfig,
        deltas: &[f64],
    ) -> Result<Program> {
        let n = s.width();
        dev.check_width(n)?;
        if deltas.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: deltas.len(),
            });
        }
        let mut pending: Vec<Option<Superop>> = vec![None; n];
        let mut steps = Vec::new();

        fn push_local(pending: &mut [Option<Superop>], q: usize, m: Superop) {
            pending[q] = Some(match &pending[q] {
                Some(p) => superop_compose(&m, p),
                None => m,
            });
        }
        fn flush(pending: &mut [Option<Superop>], steps: &mut Vec<Step>, q: usize) {
            if let Some(map) = pending[q].take() {
                steps.push(Step::Local { qubit: q, map });
            }
        }

        for op in s.ops() {
            let g = &op.gate;
            if !g.is_bound() {
                return Err(Error::UnboundParameter(g.to_string()));
            }
            match g {
                Gate::Delay(q, _) => {
                    if cfg.quasi_static && deltas[*q] != 0.0 {
                        push_local(&mut pending, *q, superop_unitary(&gates::rz(deltas[*q] * op.duration)));
                    }
                }
                Gate::Cnot(c, t) => {
                    flush(&mut pending, &mut steps, *c);
                    flush(&mut pending, &mut steps, *t);
                    steps.push(Step::Cnot {
                        control: *c,
                        target: *t,
                    });
                }
                _ => match GateMatrix::of(g)? {
                    GateMatrix::Single { qubit, u } => push_local(&mut pending, qubit, superop_unitary(&u)),
                    GateMatrix::Controlled {
                        control,
                        target,
                        u0,
                        u1,
                    } => {
                        flush(&mut pending, &mut steps, control);
                        flush(&mut pending, &mut steps, target);
                        steps.push(Step::Controlled {
                            control,
                            target,
                            u0,
                            u1,
                        });
                    }
                    GateMatrix::None => {}
                },
            }
            for q in g.qubits().iter() {
                if let Some(ch) = idle_channel(q, op.duration, dev, cfg) {
                    push_local(&mut pending, q, ch);
                }
            }
        }
        for q in 0..n {
            flush(&mut pending, &mut steps, q);
        }
        Ok(Program { n, steps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Number of leading steps shared with `other`.
    pub fn common_prefix(&self, other: &Program) -> usize {
        self.steps.iter().zip(&other.steps).take_while(|(a, b)| a == b).count()
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.num_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rho.num_qubits(),
            });
        }
        Ok(())
    }

    /// Schrödinger picture: applies steps `range` to `rho` in order.
    pub fn apply_range(&self, rho: &mut DensityMatrix, range: std::ops::Range<usize>) -> Result<()> {
        self.check(rho)?;
        for step in &self.steps[range] {
            match step {
                Step::Local { qubit, map } => rho.apply_local(*qubit, map),
                Step::Controlled {
                    control,
                    target,
                    u0,
                    u1,
                } => rho.apply_controlled(*control, *target, u0, u1),
                Step::Cnot { control, target } => rho.apply_cnot(*control, *target),
            }
        }
        Ok(())
    }

    pub fn apply(&self, rho: &mut DensityMatrix) -> Result<()> {
        self.apply_range(rho, 0..self.steps.len())
    }

    /// Heisenberg picture: evolves the observable `m` backwards, so that
    /// `Tr(m · E(ρ)) = Tr(E†(m) · ρ)`.
    pub fn apply_adjoint(&self, m: &mut DensityMatrix) -> Result<()> {
        self.check(m)?;
        for step in self.steps.iter().rev() {
            match step {
                Step::Local { qubit, map } => m.apply_local(*qubit, &superop_adjoint(map)),
                Step::Controlled {
                    control,
                    target,
                    u0,
                    u1,
                } => m.apply_controlled(*control, *target, &u0.adjoint(), &u1.adjoint()),
                Step::Cnot { control, target } => m.apply_cnot(*control, *target),
            }
        }
        Ok(())
    }
}

/// Final state of `s` started from `|0…0⟩`.
pub fn evolve(s: &Schedule, dev: &DeviceModel, cfg: &NoiseConfig) -> Result<DensityMatrix> {
    let program = Program::compile(s, dev, cfg)?;
    let mut rho = DensityMatrix::zero_state(s.width())?;
    program.apply(&mut rho)?;
    Ok(rho)
}

/// Evolves several schedules, reusing the state after the steps they share
/// with the first one. Useful for parameter shifts, which only change a few
/// operations near the end of a circuit.
pub fn evolve_shared(schedules: &[Schedule], dev: &DeviceModel, cfg: &NoiseConfig) -> Result<Vec<DensityMatrix>> {
    let Some(first) = schedules.first() else {
        return Ok(Vec::new());
    };
    let n = first.width();
    let deltas = cfg.detunings(dev, n);
    let programs = schedules
        .iter()
        .map(|s| Program::compile_with_detunings(s, dev, cfg, &deltas))
        .collect::<Result<Vec<_>>>()?;
    let base = &programs[0];
    let shared = programs[1..]
        .iter()
        .map(|p| base.common_prefix(p))
        .min()
        .unwrap_or(base.steps.len());
    let mut prefix = DensityMatrix::zero_state(n)?;
    base.apply_range(&mut prefix, 0..shared)?;
    programs
        .iter()
        .map(|p| {
            let mut rho = prefix.clone();
            p.apply_range(&mut rho, shared..p.steps.len())?;
            Ok(rho)
        })
        .collect()
}
