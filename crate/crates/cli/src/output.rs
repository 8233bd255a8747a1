//! In-memory CSV artifacts and the run manifest.

use crate::config::RunConfig;
use crate::error::CliError;
use asymcoll::path::fmt_f64;
use serde::Serialize;
use std::path::Path;

pub const MANIFEST: &str = "manifest.toml";

/// CSV files produced by one run, written together at the end.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    /// Starts a CSV file with the given header.
    pub fn csv(&mut self, name: &str, header: &[&str]) -> Table {
        Table { name: name.to_string(), rows: vec![header.iter().map(|s| s.to_string()).collect()] }
    }

    pub fn push(&mut self, table: Table) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &table.rows {
            w.write_record(row).map_err(CliError::runtime)?;
        }
        let bytes = w.into_inner().map_err(CliError::runtime)?;
        self.files.push((table.name, bytes));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write(&self, dir: &Path, cfg: &RunConfig, command: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes).map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
        }
        let manifest = Manifest::new(cfg, command, &self.files);
        let text = toml::to_string(&manifest.config).map_err(CliError::runtime)?;
        std::fs::write(dir.join(MANIFEST), text).map_err(|e| CliError::Runtime(format!("{MANIFEST}: {e}")))?;
        Ok(())
    }
}

pub struct Table {
    name: String,
    rows: Vec<Vec<String>>,
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl Table {
    pub fn row<I: IntoIterator<Item = Cell>>(&mut self, cells: I) {
        self.rows.push(
            cells
                .into_iter()
                .map(|c| match c {
                    Cell::F(v) => fmt_f64(v),
                    Cell::I(v) => v.to_string(),
                    Cell::U(v) => v.to_string(),
                    Cell::S(s) => s,
                })
                .collect(),
        );
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    bytes: u64,
    fnv1a64: String,
}

struct Manifest {
    config: RunConfig,
}

impl Manifest {
    /// The resolved config plus a `[manifest]` table. Reading the file back
    /// as a config reproduces the run.
    fn new(cfg: &RunConfig, command: &str, files: &[(String, Vec<u8>)]) -> Self {
        let mut config = cfg.clone();
        let mut t = toml::Table::new();
        t.insert("command".into(), command.into());
        t.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        t.insert("git".into(), env!("ASYMCOLL_GIT_DESCRIBE").into());
        t.insert("parallel".into(), cfg!(feature = "parallel").into());
        let entries: Vec<FileEntry> = files
            .iter()
            .map(|(name, bytes)| FileEntry { name: name.clone(), bytes: bytes.len() as u64, fnv1a64: format!("{:016x}", fnv1a64(bytes)) })
            .collect();
        t.insert("files".into(), toml::Value::try_from(entries).expect("plain table"));
        config.manifest = Some(t);
        Self { config }
    }
}

/// 64-bit FNV-1a, used only as a content fingerprint in manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
