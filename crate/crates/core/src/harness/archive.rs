//! Append-only JSON-lines store of run records.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::experiment::RunRecord;
use super::HarnessError;

/// Single writer over a JSON-lines file; records are only ever appended.
#[derive(Debug)]
pub struct RunArchive {
    path: PathBuf,
    file: File,
}

impl RunArchive {
    /// Opens `path` for appending, creating it if needed.
    pub fn open(path: &Path) -> Result<Self, HarnessError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { path: path.to_path_buf(), file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &RunRecord) -> Result<(), HarnessError> {
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        Ok(())
    }

    pub fn append_all<'a>(&mut self, records: impl IntoIterator<Item = &'a RunRecord>) -> Result<(), HarnessError> {
        for r in records {
            self.append(r)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
        let reader = BufReader::new(File::open(path)?);
        let mut records = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        Ok(records)
    }
}
