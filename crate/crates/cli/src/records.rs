//! Line-delimited JSON streams and the binary gradient sidecar.
//!
//! Every stream starts with a header line `{"kind":"header", "command":…,
//! "config":{…}}` echoing the effective configuration. Sentence records
//! carry `"kind":"sentence"`; `loss` streams add `"kind":"pair"`,
//! `"kind":"pair_error"` and a closing `"kind":"aggregate"` line.
//!
//! Gradient sidecar: the 8-byte magic `PSDAGRD1`, then per pair a `u32`
//! row count, a `u32` column count and `rows × cols` f32 values, row-major,
//! all little-endian. Pair records point at their block with `grad_offset`.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use psda_core::augment::{Replacement, SkippedRole};
use psda_core::embeddings::{SentenceMatrix, Svo};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;

pub const GRAD_MAGIC: &[u8; 8] = b"PSDAGRD1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceLine {
    pub id: String,
    /// Augmentation copy index; absent on original records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copy: Option<u32>,
    pub lang: String,
    pub tokens: Vec<String>,
    pub svo: Svo,
    #[serde(default)]
    pub replacements: Vec<Replacement>,
    #[serde(default)]
    pub skipped: Vec<SkippedRole>,
    pub matrix: Vec<Vec<f64>>,
}

impl SentenceLine {
    pub fn matrix(&self) -> Result<SentenceMatrix, CliError> {
        let dim = self.matrix.first().map_or(0, Vec::len);
        SentenceMatrix::from_rows(&self.matrix, dim).map_err(|e| CliError::Input(format!("sentence `{}`: {e}", self.id)))
    }
}

pub fn header(command: &str, config: &BTreeMap<String, String>) -> Value {
    json!({ "kind": "header", "command": command, "config": config })
}

pub struct JsonlWriter {
    path: std::path::PathBuf,
    out: BufWriter<std::fs::File>,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn write<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(value).map_err(|e| CliError::io(&self.path, e))?;
        writeln!(self.out, "{line}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn sentence(&mut self, s: &SentenceLine) -> Result<(), CliError> {
        let mut v = serde_json::to_value(s).map_err(|e| CliError::io(&self.path, e))?;
        v["kind"] = json!("sentence");
        self.write(&v)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Sentence records of a stream, skipping the header and other kinds.
pub fn read_sentences(path: &Path) -> Result<Vec<SentenceLine>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::MissingPath {
        what: "sentence stream".into(),
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |e: serde_json::Error| CliError::Input(format!("{}:{}: {e}", path.display(), n + 1));
        let v: Value = serde_json::from_str(&line).map_err(bad)?;
        if v.get("kind").and_then(Value::as_str) == Some("sentence") {
            out.push(serde_json::from_value(v).map_err(bad)?);
        }
    }
    Ok(out)
}

pub struct GradWriter {
    path: std::path::PathBuf,
    out: BufWriter<std::fs::File>,
    offset: u64,
}

impl GradWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut out = BufWriter::new(file);
        out.write_all(GRAD_MAGIC).map_err(|e| CliError::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), out, offset: GRAD_MAGIC.len() as u64 })
    }

    /// Appends one matrix and returns the byte offset of its block.
    pub fn push(&mut self, m: &nalgebra::DMatrix<f64>) -> Result<u64, CliError> {
        let at = self.offset;
        let mut buf = Vec::with_capacity(8 + 4 * m.len());
        buf.extend_from_slice(&(m.nrows() as u32).to_le_bytes());
        buf.extend_from_slice(&(m.ncols() as u32).to_le_bytes());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                buf.extend_from_slice(&(m[(i, j)] as f32).to_le_bytes());
            }
        }
        self.out.write_all(&buf).map_err(|e| CliError::io(&self.path, e))?;
        self.offset += buf.len() as u64;
        Ok(at)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Reads the block at `offset` of a gradient sidecar as rows of f32.
pub fn read_grad(bytes: &[u8], offset: usize) -> Option<Vec<Vec<f32>>> {
    if bytes.len() < 8 || &bytes[..8] != GRAD_MAGIC {
        return None;
    }
    let u32_at = |at: usize| bytes.get(at..at + 4).map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize);
    let rows = u32_at(offset)?;
    let cols = u32_at(offset + 4)?;
    let start = offset + 8;
    let data = bytes.get(start..start + 4 * rows * cols)?;
    let vals: Vec<f32> = data.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    Some(vals.chunks(cols.max(1)).take(rows).map(<[f32]>::to_vec).collect())
}
