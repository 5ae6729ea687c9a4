//! Handwritten-digit CSV ingestion and per-class subsampling.
//!
//! Rows are `label,p0,…,p783` with labels 0–9 and pixels 0–255. A header
//! row is accepted if its first field is not a number.

use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use peqml_core::seed::rng_for;

use crate::error::{Error, Result};

pub const PIXELS: usize = 784;
pub const CLASSES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DigitRow {
    pub label: usize,
    pub pixels: Vec<f64>,
}

pub fn parse_digits(reader: impl std::io::Read) -> Result<Vec<DigitRow>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (idx, record) in csv.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Data {
            line,
            message: e.to_string(),
        })?;
        let bad = |message: String| Error::Data { line, message };
        let first = record.get(0).unwrap_or("").trim();
        let Ok(label) = first.parse::<usize>() else {
            if idx == 0 {
                continue;
            }
            return Err(bad(format!("label {first:?} is not an integer")));
        };
        if label >= CLASSES {
            return Err(bad(format!("label {label} outside 0–9")));
        }
        if record.len() != PIXELS + 1 {
            return Err(bad(format!("expected {} fields, found {}", PIXELS + 1, record.len())));
        }
        let pixels = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(k, field)| {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("pixel {k} = {field:?} is not a number")))?;
                if !(0.0..=255.0).contains(&v) {
                    return Err(bad(format!("pixel {k} = {v} outside 0–255")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(DigitRow { label, pixels });
    }
    Ok(rows)
}

pub fn read_digits(path: &Path) -> Result<Vec<DigitRow>> {
    let file = std::fs::File::open(path)?;
    parse_digits(std::io::BufReader::new(file))
}

/// Raw pixel matrices of a train/test subset.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitsSubset {
    pub train_raw: DMatrix<f64>,
    pub train_labels: Vec<usize>,
    pub test_raw: DMatrix<f64>,
    pub test_labels: Vec<usize>,
}

/// Shuffles the rows with `seed`, then takes the first `per_train` rows of
/// each requested class for training and the next `per_test` for testing.
pub fn subsample(
    rows: &[DigitRow],
    classes: &[usize],
    per_train: usize,
    per_test: usize,
    seed: u64,
) -> Result<DigitsSubset> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng_for(seed, &[0xD161]));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for &class in classes {
        let picked: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| rows[i].label == class)
            .take(per_train + per_test)
            .collect();
        if picked.len() < per_train + per_test {
            return Err(Error::Config(format!(
                "class {class} has {} rows, need {}",
                picked.len(),
                per_train + per_test
            )));
        }
        train.extend_from_slice(&picked[..per_train]);
        test.extend_from_slice(&picked[per_train..]);
    }
    let matrix = |idx: &[usize]| DMatrix::from_fn(idx.len(), PIXELS, |r, c| rows[idx[r]].pixels[c]);
    let labels = |idx: &[usize]| idx.iter().map(|&i| rows[i].label).collect();
    Ok(DigitsSubset {
        train_raw: matrix(&train),
        train_labels: labels(&train),
        test_raw: matrix(&test),
        test_labels: labels(&test),
    })
}

/// All ten digits, `per_train` / `per_test` rows each.
pub fn ingest_digits(path: &Path, per_train: usize, per_test: usize, seed: u64) -> Result<DigitsSubset> {
    let classes: Vec<usize> = (0..CLASSES).collect();
    subsample(&read_digits(path)?, &classes, per_train, per_test, seed)
}
