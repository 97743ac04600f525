//! Output files, each written once through a temporary file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::LabError;
use crate::svg::Plot;

#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    /// Creates the directory lazily on the first write.
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Artifacts {
            dir: dir.into(),
            written: Vec::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, LabError> {
        fs::create_dir_all(&self.dir)?;
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &target)?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(target)
    }

    /// RFC-4180 table with a header row.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, LabError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| LabError::Io(std::io::Error::other(e));
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row.iter().map(|x| format_number(*x))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Io(std::io::Error::other(e.to_string())))?;
        self.write(name, &bytes)
    }

    pub fn write_svg(&mut self, name: &str, plot: &Plot) -> Result<PathBuf, LabError> {
        self.write(name, plot.render().as_bytes())
    }
}

/// Shortest round-trip decimal; `inf`, `-inf` and `nan` for non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}
