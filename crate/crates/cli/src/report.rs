//! Files written into the output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use potentia::grid::{AtomicMeasure, GridFunction};
use serde::Serialize;

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir { root: root.to_path_buf(), written: vec![] })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.root.join(name);
        let f = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(BufWriter::new(f))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.open(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn grid(&mut self, name: &str, g: &GridFunction) -> Result<()> {
        let mut w = self.open(name)?;
        g.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn measure(&mut self, name: &str, m: &AtomicMeasure) -> Result<()> {
        let mut w = self.open(name)?;
        m.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Plain CSV with a header line.
    pub fn table<R: AsRef<[f64]>>(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
        let mut w = self.open(name)?;
        writeln!(w, "{header}")?;
        for r in rows {
            let cells: Vec<String> = r.as_ref().iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}
