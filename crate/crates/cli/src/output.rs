use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vidpop::{ModelParams, TimeGrid};

use crate::error::{CliError, Result};

/// 17 significant digits, locale independent.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let data = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&data))
}

/// Everything needed to rerun a subcommand and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Command line after the program name.
    pub args: Vec<String>,
    pub params: Option<ModelParams>,
    pub grid: Option<TimeGrid>,
    pub seeds: Option<Vec<u64>>,
    pub rng: Option<String>,
    pub options: Option<serde_json::Value>,
    /// Input path -> sha256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name -> sha256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, args: &[String]) -> Self {
        Self {
            tool: "vidpop".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            args: args.to_vec(),
            params: None,
            grid: None,
            seeds: None,
            rng: None,
            options: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }
}

/// Output directory that records a digest for every file written.
pub struct OutDir {
    root: PathBuf,
    pub manifest: RunManifest,
}

impl OutDir {
    pub fn create(root: &Path, manifest: RunManifest) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest,
        })
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, data).map_err(|e| CliError::io(&path, e))?;
        self.manifest.outputs.insert(name.into(), sha256_hex(data));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut data = serde_json::to_vec_pretty(value).expect("serializable output");
        data.push(b'\n');
        self.write(name, &data)
    }

    pub fn finish(self) -> Result<RunManifest> {
        let path = self.root.join("manifest.json");
        let mut data = serde_json::to_vec_pretty(&self.manifest).expect("serializable manifest");
        data.push(b'\n');
        std::fs::write(&path, data).map_err(|e| CliError::io(&path, e))?;
        Ok(self.manifest)
    }
}

/// CSV text built in memory.
pub struct Table {
    wtr: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(header).expect("in-memory write");
        Self { wtr }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.wtr.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.wtr.into_inner().expect("in-memory flush")
    }
}
