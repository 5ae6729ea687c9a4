use std::collections::BTreeMap;

use rand::Rng;

use super::{DensityMatrix, NoiseConfig};
use crate::device::DeviceModel;
use crate::error::{Error, Result};

/// Measurement histogram indexed by basis state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    n: usize,
    shots: u64,
    hist: Vec<u64>,
}

impl Counts {
    pub fn from_histogram(n: usize, hist: Vec<u64>) -> Result<Self> {
        if hist.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: hist.len(),
            });
        }
        let shots = hist.iter().sum();
        Ok(Counts { n, shots, hist })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, index: usize) -> u64 {
        self.hist[index]
    }

    pub fn histogram(&self) -> &[u64] {
        &self.hist
    }

    /// Bitstring of a basis index; character `k` is qubit `k`.
    pub fn bitstring(&self, index: usize) -> String {
        (0..self.n)
            .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Non-zero entries keyed by bitstring.
    pub fn to_map(&self) -> BTreeMap<String, u64> {
        self.hist
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| (self.bitstring(i), k))
            .collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.shots.max(1) as f64;
        self.hist.iter().map(|&k| k as f64 / total).collect()
    }
}

/// Applies the tensored assignment matrix `A_q = [[1−p01, p10], [p01, 1−p10]]`.
pub fn apply_readout_error(probs: &[f64], dev: &DeviceModel) -> Vec<f64> {
    let n = probs.len().trailing_zeros() as usize;
    let mut out = probs.to_vec();
    for q in 0..n {
        let (p01, p10) = (dev.readout_p01[q], dev.readout_p10[q]);
        apply_local_2x2(&mut out, q, [[1.0 - p01, p10], [p01, 1.0 - p10]]);
    }
    out
}

fn apply_local_2x2(v: &mut [f64], q: usize, m: [[f64; 2]; 2]) {
    let bit = 1usize << q;
    for i in 0..v.len() {
        if i & bit == 0 {
            let (a, b) = (v[i], v[i | bit]);
            v[i] = m[0][0] * a + m[0][1] * b;
            v[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Draws `shots` outcomes from a probability vector (clamped and
/// renormalised against rounding).
pub fn sample_probabilities(probs: &[f64], shots: u64, rng: &mut impl Rng) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let n = probs.len().trailing_zeros() as usize;
    if probs.len() != 1 << n {
        return Err(Error::InvalidArgument("distribution length is not 2^n".into()));
    }
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    if !(acc > 0.0 && acc.is_finite()) {
        return Err(Error::InvalidArgument("distribution has no mass".into()));
    }
    let mut hist = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        let idx = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        hist[idx] += 1;
    }
    Counts::from_histogram(n, hist)
}

/// Samples `shots` measurements of every qubit, with readout flips when
/// enabled in `cfg`.
pub fn sample(rho: &DensityMatrix, shots: u64, dev: &DeviceModel, cfg: &NoiseConfig) -> Result<Counts> {
    dev.check_width(rho.num_qubits())?;
    let mut probs = rho.diagonal_probabilities();
    if cfg.readout {
        probs = apply_readout_error(&probs, dev);
    }
    sample_probabilities(&probs, shots, &mut cfg.sampling_rng())
}

/// Quasi-probabilities after inverting the tensored assignment matrix.
pub fn mitigate_readout(counts: &Counts, dev: &DeviceModel) -> Result<Vec<f64>> {
    mitigate_distribution(&counts.frequencies(), dev)
}

/// [`mitigate_readout`] on a measured distribution.
pub fn mitigate_distribution(dist: &[f64], dev: &DeviceModel) -> Result<Vec<f64>> {
    let n = dist.len().trailing_zeros() as usize;
    if dist.len() != 1 << n {
        return Err(Error::InvalidArgument("distribution length is not 2^n".into()));
    }
    dev.check_width(n)?;
    let mut v = dist.to_vec();
    for q in 0..n {
        let (p01, p10) = (dev.readout_p01[q], dev.readout_p10[q]);
        let det = 1.0 - p01 - p10;
        if det.abs() < 1e-12 {
            return Err(Error::SingularAssignment(q));
        }
        let inv = [[(1.0 - p10) / det, -p10 / det], [-p01 / det, (1.0 - p01) / det]];
        apply_local_2x2(&mut v, q, inv);
    }
    Ok(v)
}

/// `⟨Z⊗…⊗Z⟩` of a (quasi-)distribution.
pub fn expectation_parity(dist: &[f64]) -> f64 {
    dist.iter()
        .enumerate()
        .map(|(i, &p)| if i.count_ones() % 2 == 0 { p } else { -p })
        .sum()
}

/// `⟨Z_0 Z_1⟩` of a (quasi-)distribution.
pub fn expectation_z0z1(dist: &[f64]) -> f64 {
    dist.iter()
        .enumerate()
        .map(|(i, &p)| if (i ^ (i >> 1)) & 1 == 0 { p } else { -p })
        .sum()
}

/// Fraction of shots that read all zeros.
pub fn zero_bitstring_frequency(counts: &Counts) -> Result<f64> {
    if counts.shots() == 0 {
        return Err(Error::InvalidArgument("no shots recorded".into()));
    }
    Ok(counts.get(0) as f64 / counts.shots() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn readout_flip_rates_are_binomial() {
        // |0⟩ read with p01 = 0.02 over 20000 shots: 400 ± 3σ (σ ≈ 19.8).
        let dev = DeviceModel::uniform(1);
        let rho = DensityMatrix::zero_state(1).unwrap();
        let counts = sample(&rho, 20_000, &dev, &NoiseConfig::full(1)).unwrap();
        let flips = counts.get(1) as f64;
        assert!(
            (flips - 400.0).abs() < 3.0 * (20_000.0f64 * 0.02 * 0.98).sqrt(),
            "{flips}"
        );
        let clean = sample(&rho, 1000, &dev, &NoiseConfig::off()).unwrap();
        assert_eq!(clean.get(0), 1000);
    }

    #[test]
    fn mitigation_inverts_assignment() {
        let dev = DeviceModel {
            readout_p01: vec![0.05, 0.1],
            readout_p10: vec![0.02, 0.3],
            ..DeviceModel::uniform(2)
        };
        let ideal = [0.1, 0.2, 0.3, 0.4];
        let noisy = apply_readout_error(&ideal, &dev);
        let hist: Vec<u64> = noisy.iter().map(|p| (p * 1e9).round() as u64).collect();
        let counts = Counts::from_histogram(2, hist).unwrap();
        let back = mitigate_readout(&counts, &dev).unwrap();
        for (a, b) in back.iter().zip(ideal) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn singular_assignment_is_reported() {
        let dev = DeviceModel {
            readout_p01: vec![0.5],
            readout_p10: vec![0.5],
            ..DeviceModel::uniform(1)
        };
        let counts = Counts::from_histogram(1, vec![3, 1]).unwrap();
        assert_eq!(mitigate_readout(&counts, &dev), Err(Error::SingularAssignment(0)));
    }

    #[test]
    fn zero_shots_and_empty_counts_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_probabilities(&[1.0, 0.0], 0, &mut rng).is_err());
        let empty = Counts::from_histogram(1, vec![0, 0]).unwrap();
        assert!(zero_bitstring_frequency(&empty).is_err());
    }

    #[test]
    fn expectations_and_bitstrings() {
        // |01⟩ in little-endian: qubit 0 is 1.
        let dist = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(expectation_parity(&dist), -1.0);
        assert_eq!(expectation_z0z1(&dist), -1.0);
        let d2 = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(expectation_z0z1(&d2), 1.0);
        assert_eq!(expectation_parity(&d2), 1.0);
        let counts = Counts::from_histogram(3, vec![0, 5, 0, 0, 0, 0, 2, 0]).unwrap();
        let map = counts.to_map();
        assert_eq!(map["100"], 5);
        assert_eq!(map["011"], 2);
    }
}
