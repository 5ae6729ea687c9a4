use anyhow::Context;
use nalgebra::DMatrix;
use serde::Serialize;

use peqml_experiments::digits::{read_digits, subsample, DigitsSubset};
use peqml_experiments::svd::truncated_svd_reduce;

use crate::config::Config;
use crate::output::Outputs;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub train_samples: usize,
    pub test_samples: usize,
    pub features: usize,
    /// Fraction of the training matrix's squared Frobenius norm kept by
    /// the truncated SVD.
    pub captured_energy: Option<f64>,
}

fn table(labels: &[usize], rows: impl Iterator<Item = Vec<f64>>) -> Vec<Vec<String>> {
    labels
        .iter()
        .zip(rows)
        .map(|(y, r)| {
            std::iter::once(y.to_string())
                .chain(r.iter().map(|v| v.to_string()))
                .collect()
        })
        .collect()
}

fn raw_rows(m: &DMatrix<f64>) -> impl Iterator<Item = Vec<f64>> + '_ {
    (0..m.nrows()).map(move |i| m.row(i).iter().copied().collect())
}

fn csv_bytes(records: &[Vec<String>]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in records {
        w.write_record(r)?;
    }
    w.into_inner().context("flushing csv")
}

pub fn load_subset(cfg: &Config) -> anyhow::Result<DigitsSubset> {
    let i = &cfg.ingest;
    let rows = read_digits(&i.data).with_context(|| format!("loading digits from {}", i.data.display()))?;
    Ok(subsample(
        &rows,
        &i.classes,
        i.per_class_train,
        i.per_class_test,
        cfg.seed,
    )?)
}

pub fn run(cfg: &Config) -> anyhow::Result<Outputs> {
    let s = load_subset(cfg)?;
    let (train, test, features, captured_energy) = match cfg.ingest.features {
        Some(k) => {
            let (tr, te, svd) = truncated_svd_reduce(&s.train_raw, &s.test_raw, k)?;
            (
                table(&s.train_labels, tr.into_iter()),
                table(&s.test_labels, te.into_iter()),
                k,
                Some(svd.captured_energy()),
            )
        }
        None => (
            table(&s.train_labels, raw_rows(&s.train_raw)),
            table(&s.test_labels, raw_rows(&s.test_raw)),
            s.train_raw.ncols(),
            None,
        ),
    };
    let summary = IngestSummary {
        train_samples: train.len(),
        test_samples: test.len(),
        features,
        captured_energy,
    };
    let mut out = Outputs::new();
    out.add("train.csv", csv_bytes(&train)?);
    out.add("test.csv", csv_bytes(&test)?);
    out.add_json("metrics.json", &crate::metrics("ingest", cfg, &cfg.ingest, &summary))?;
    Ok(out)
}
