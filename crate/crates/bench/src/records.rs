//! Run records: one JSON-lines file per run (a header line, then one line
//! per evaluation) plus a timing sidecar kept apart so that records are
//! byte-reproducible.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use mixbo::engine::OptimizerSpec;
use mixbo::trust_region::TrustRegionState;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::error::{io_err, BenchError, Result};

pub const RECORD_VERSION: u32 = 1;

/// Everything that determines a run's trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub task: String,
    pub label: String,
    pub optimizer: OptimizerSpec,
    pub n_init: usize,
    pub budget: usize,
    pub seed: u64,
}

impl RunSpec {
    /// SHA-256 of the canonical JSON of the spec and the record version.
    pub fn fingerprint(&self) -> String {
        let doc = json!({ "version": RECORD_VERSION, "spec": self });
        let bytes = serde_json::to_vec(&doc).expect("spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn file_stem(&self) -> String {
        format!("{}__{}__s{}", sanitize(&self.task), sanitize(&self.label), self.seed)
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.+=".contains(c) { c } else { '_' })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub version: u32,
    pub fingerprint: String,
    pub spec: RunSpec,
    pub space: Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based evaluation index.
    pub iter: usize,
    pub phase: Phase,
    pub x: Json,
    pub y: f64,
    pub best_y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tr: Option<Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Json>,
}

/// Seconds spent per phase of each iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub suggest: Vec<f64>,
    pub evaluate: Vec<f64>,
    pub observe: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub header: RunHeader,
    pub iterations: Vec<IterationRecord>,
}

impl RunRecord {
    pub fn spec(&self) -> &RunSpec {
        &self.header.spec
    }

    pub fn is_complete(&self) -> bool {
        self.iterations.len() == self.header.spec.budget
    }

    pub fn ys(&self) -> Vec<f64> {
        self.iterations.iter().map(|it| it.y).collect()
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        self.iterations.iter().map(|it| it.best_y).collect()
    }

    pub fn final_best(&self) -> Option<f64> {
        self.iterations.last().map(|it| it.best_y)
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = serde_json::to_string(&self.header).expect("header serializes");
        s.push('\n');
        for it in &self.iterations {
            s.push_str(&serde_json::to_string(it).expect("iteration serializes"));
            s.push('\n');
        }
        s
    }

    /// Writes via a temporary file and rename.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_jsonl().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(io_err(path))?;
        let mut lines = BufReader::new(file).lines();
        let bad = |message: String| BenchError::Record {
            path: path.to_path_buf(),
            message,
        };
        let first = lines
            .next()
            .ok_or_else(|| bad("empty file".into()))?
            .map_err(io_err(path))?;
        let header: RunHeader = serde_json::from_str(&first).map_err(|e| bad(e.to_string()))?;
        let mut iterations = Vec::new();
        for line in lines {
            let line = line.map_err(io_err(path))?;
            if line.trim().is_empty() {
                continue;
            }
            iterations.push(serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?);
        }
        Ok(Self { header, iterations })
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Compact trust-region snapshot for the record.
pub fn tr_snapshot(tr: &TrustRegionState) -> Json {
    json!({
        "center": tr.center.as_ref().map(|c| json!({ "num": c.num, "cat": c.cat })),
        "center_value": tr.center_value,
        "l_h": tr.l_h,
        "l_n": tr.l_n,
        "succ_count": tr.succ_count,
        "fail_count": tr.fail_count,
        "restart_index": tr.restart_index,
    })
}

/// Index of a record directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub file: String,
    pub task: String,
    pub optimizer: String,
    pub seed: u64,
    pub fingerprint: String,
    pub complete: bool,
}

pub const INDEX_FILE: &str = "index.json";

/// All `*.jsonl` records under `dir`, sorted by file name.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    paths.sort();
    paths.iter().map(|p| RunRecord::read(p)).collect()
}
