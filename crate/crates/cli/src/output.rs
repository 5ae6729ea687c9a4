//! Output staging. Files are collected in memory while a command runs and
//! written only once it has succeeded: each goes to a hidden temporary file
//! in the output directory, and the renames happen after every temporary
//! file is complete.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;

#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_json(&mut self, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Serialises `rows` with a header taken from the record's field names.
    pub fn add_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        self.add(name, w.into_inner().context("flushing csv")?);
        Ok(())
    }

    /// Rows of plain numbers without a header.
    pub fn add_matrix(&mut self, name: &str, m: &nalgebra::DMatrix<f64>) -> anyhow::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for i in 0..m.nrows() {
            w.write_record(m.row(i).iter().map(|v| format!("{v:e}")))?;
        }
        self.add(name, w.into_inner().context("flushing csv")?);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn commit(self, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        for (name, _) in &self.files {
            if name.contains(['/', '\\']) || name.starts_with('.') {
                bail!("refusing to write `{name}` outside the output directory");
            }
        }
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        // Temporaries left in `staged` are removed on drop if a write fails.
        let mut staged = Vec::new();
        for (name, bytes) in &self.files {
            let mut tmp = tempfile::Builder::new()
                .prefix(".peqml-")
                .tempfile_in(dir)
                .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp.into_temp_path(), dir.join(name)));
        }
        let mut written = Vec::new();
        for (tmp, dest) in staged {
            tmp.persist(&dest)
                .with_context(|| format!("renaming into {}", dest.display()))?;
            written.push(dest);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_every_file_and_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outputs::new();
        o.add("a.txt", b"alpha".to_vec());
        o.add_json("m.json", &serde_json::json!({"k": 1})).unwrap();
        o.commit(dir.path()).unwrap();
        let mut names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(names, ["a.txt", "m.json"]);
        assert_eq!(std::fs::read(dir.path().join("a.txt")).unwrap(), b"alpha");
    }

    #[test]
    fn names_with_separators_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outputs::new();
        o.add("../x", vec![]);
        assert!(o.commit(dir.path()).is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
