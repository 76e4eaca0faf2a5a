use crate::error::Result;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance line written at the top of every output file.
pub fn stamp(hash: &str) -> String {
    format!("# config_hash={hash} version={VERSION}")
}

/// Shortest round-trip decimal form, so equal inputs give equal bytes.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// CSV file: the provenance comment, a header row, then records.
pub struct CsvOut {
    path: PathBuf,
    w: csv::Writer<File>,
}

impl CsvOut {
    pub fn create(dir: &Path, name: &str, hash: &str, header: &[&str]) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut f = File::create(&path)?;
        writeln!(f, "{}", stamp(hash))?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(header)?;
        Ok(CsvOut { path, w })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.w.flush()?;
        Ok(self.path)
    }
}

pub fn write_text(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, body)?;
    Ok(path)
}

/// Reads back a CSV written by [`CsvOut`], skipping the comment line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}
