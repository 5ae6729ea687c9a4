//! As-soon-as-possible pulse scheduling under a [`DeviceModel`].
//!
//! `RZ` gates are virtual frame changes and take no time. Every other
//! single-qubit gate takes `t_1q`, a cross-resonance pulse of angle `α`
//! takes `t_edge + |α|/ω_zx`, and a CNOT is an echoed pair of `π/4`
//! pulses with two echo `X` gates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::device::DeviceModel;
use crate::error::{Error, Result};

/// Gaps shorter than this (ns) are treated as rounding noise.
const GAP_EPS: f64 = 1e-9;

/// Duration of `g` in nanoseconds.
pub fn gate_duration(g: &Gate, dev: &DeviceModel) -> Result<f64> {
    Ok(match g {
        Gate::Rz(..) => 0.0,
        Gate::H(_) | Gate::X(_) | Gate::Sx(_) | Gate::Rx(..) | Gate::Ry(..) => dev.t_1q,
        Gate::CrPulse { angle, .. } => dev.cr_pulse_duration(*angle),
        Gate::Cnot(..) => dev.cnot_duration(),
        Gate::Rzx(_, _, a) => dev.echoed_rzx_duration(a.value()?),
        Gate::Measure(_) => dev.t_meas,
        Gate::Delay(_, d) => *d,
        Gate::Rzz(..) => {
            return Err(Error::UnsupportedGate(
                "RZZ has no pulse implementation; transpile first".into(),
            ))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedOp {
    pub start: f64,
    pub duration: f64,
    pub gate: Gate,
}

impl TimedOp {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Timed instruction list.
///
/// `ops` is kept in a dependency-respecting order (the order the scheduler
/// emitted them), so zero-duration gates keep their place relative to
/// neighbours starting at the same instant. Idle gaps on every qubit are
/// explicit `Delay` operations and every qubit is padded to the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    width: usize,
    ops: Vec<TimedOp>,
    total: f64,
}

impl Schedule {
    pub fn empty(width: usize) -> Self {
        Schedule {
            width,
            ops: Vec::new(),
            total: 0.0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ops(&self) -> &[TimedOp] {
        &self.ops
    }

    pub fn total_duration(&self) -> f64 {
        self.total
    }

    /// Operations touching qubit `q`, in time order.
    pub fn timeline(&self, q: usize) -> Vec<&TimedOp> {
        self.ops.iter().filter(|op| op.gate.qubits().contains(q)).collect()
    }

    /// Structural check: no negative durations, no overlaps on a qubit,
    /// total equal to the latest end time.
    pub fn validate(&self) -> Result<()> {
        let mut latest = 0.0f64;
        for op in &self.ops {
            if !(op.start >= -GAP_EPS && op.duration >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "negative interval at {} for {}",
                    op.start, op.gate
                )));
            }
            latest = latest.max(op.end());
        }
        for q in 0..self.width {
            let line = self.timeline(q);
            for w in line.windows(2) {
                if w[1].start + GAP_EPS < w[0].end() {
                    return Err(Error::InvalidArgument(format!(
                        "overlap on qubit {q}: {} ends at {} but {} starts at {}",
                        w[0].gate,
                        w[0].end(),
                        w[1].gate,
                        w[1].start
                    )));
                }
            }
        }
        if (latest - self.total).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "total duration {} differs from latest end {latest}",
                self.total
            )));
        }
        Ok(())
    }

    /// Sequential composition: `next` starts once every qubit of `self`
    /// has finished (a full-register barrier).
    pub fn then(&self, next: &Schedule) -> Result<Schedule> {
        if next.width != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                got: next.width,
            });
        }
        let offset = self.total;
        let mut ops = self.ops.clone();
        ops.extend(next.ops.iter().map(|op| TimedOp {
            start: op.start + offset,
            ..op.clone()
        }));
        Ok(Schedule {
            width: self.width,
            ops,
            total: offset + next.total,
        })
    }

    /// The gates of the schedule as a circuit (delays included).
    pub fn to_circuit(&self) -> Circuit {
        Circuit::from_parts_unchecked(self.width, self.ops.iter().map(|o| o.gate.clone()).collect())
    }
}

/// ASAP list scheduling.
///
/// Gates start as soon as all their qubits are free. `Measure` additionally
/// waits for every non-measurement operation on the register, so a final
/// `measure_all` block is read out simultaneously.
pub fn schedule(c: &Circuit, dev: &DeviceModel) -> Result<Schedule> {
    dev.check_width(c.width())?;
    let n = c.width();
    let mut free = vec![0.0f64; n];
    let mut gate_frontier = 0.0f64;
    let mut ops = Vec::with_capacity(c.len() + 2 * n);

    for g in c.gates() {
        let d = gate_duration(g, dev)?;
        let mut start = g.qubits().iter().map(|q| free[q]).fold(0.0, f64::max);
        if matches!(g, Gate::Measure(_)) {
            start = start.max(gate_frontier);
        }
        for q in g.qubits().iter() {
            pad(&mut ops, q, free[q], start);
            free[q] = start + d;
        }
        ops.push(TimedOp {
            start,
            duration: d,
            gate: g.clone(),
        });
        if !matches!(g, Gate::Measure(_)) {
            gate_frontier = gate_frontier.max(start + d);
        }
    }
    let total = free.iter().copied().fold(0.0, f64::max);
    for (q, &f) in free.iter().enumerate() {
        pad(&mut ops, q, f, total);
    }
    Ok(Schedule { width: n, ops, total })
}

fn pad(ops: &mut Vec<TimedOp>, q: usize, from: f64, to: f64) {
    if to - from > GAP_EPS {
        ops.push(TimedOp {
            start: from,
            duration: to - from,
            gate: Gate::Delay(q, to - from),
        });
    }
}

/// Fills idle windows with the `τ/2 – X_p – τ – X_m – τ/2` sequence.
///
/// A window qualifies when it is longer than `2·t_1q` and the qubit has
/// already been operated on (leading windows on freshly initialised qubits
/// are skipped). `X_p = RX(π)` and `X_m = RX(−π)`; with
/// `τ = (T_idle − 2·t_1q)/2` the window keeps its exact length.
pub fn insert_dd(s: &Schedule, dev: &DeviceModel) -> Schedule {
    let mut touched = vec![false; s.width];
    let mut ops = Vec::with_capacity(s.ops.len());
    for op in &s.ops {
        match op.gate {
            Gate::Delay(q, window) if touched[q] && window > 2.0 * dev.t_1q => {
                let tau = (window - 2.0 * dev.t_1q) / 2.0;
                let t0 = op.start;
                let delay = |start: f64, d: f64| TimedOp {
                    start,
                    duration: d,
                    gate: Gate::Delay(q, d),
                };
                let pulse = |start: f64, angle: f64| TimedOp {
                    start,
                    duration: dev.t_1q,
                    gate: Gate::Rx(q, angle.into()),
                };
                ops.push(delay(t0, tau / 2.0));
                ops.push(pulse(t0 + tau / 2.0, PI));
                ops.push(delay(t0 + tau / 2.0 + dev.t_1q, tau));
                ops.push(pulse(t0 + 1.5 * tau + dev.t_1q, -PI));
                ops.push(delay(t0 + 1.5 * tau + 2.0 * dev.t_1q, tau / 2.0));
            }
            _ => {
                if !matches!(op.gate, Gate::Delay(..)) {
                    for q in op.gate.qubits().iter() {
                        touched[q] = true;
                    }
                }
                ops.push(op.clone());
            }
        }
    }
    Schedule {
        width: s.width,
        ops,
        total: s.total,
    }
}

/// Mean total duration of a batch; `0` for an empty batch.
pub fn mean_duration<'a>(batch: impl IntoIterator<Item = &'a Schedule>) -> f64 {
    let (sum, count) = batch
        .into_iter()
        .fold((0.0, 0usize), |(s, k), sch| (s + sch.total_duration(), k + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
