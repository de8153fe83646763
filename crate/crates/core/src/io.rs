//! Targets files, JSONL result lines and checkpoints.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::WindowSummary;
use crate::error::{Error, Result};
use crate::verify::{Solution, SolutionRecord};

pub const SCHEMA_VERSION: u32 = 1;

/// Parse a targets list: one non-negative integer per line, `#` comments and
/// blank lines ignored, duplicates collapsed.
pub fn parse_targets(text: &str, name: &str) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { path: name.to_string(), line: i + 1, msg };
        let value: i128 = line.parse().map_err(|_| err(format!("not an integer: {line:?}")))?;
        if value < 0 {
            return Err(err(format!("negative target {value}")));
        }
        let value = u64::try_from(value).map_err(|_| err(format!("target {value} out of range")))?;
        out.insert(value);
    }
    if out.is_empty() {
        log::warn!("{name}: no targets listed; accepting any d up to d_max");
    }
    Ok(out)
}

pub fn load_targets(path: &Path) -> Result<BTreeSet<u64>> {
    let text = fs::read_to_string(path)?;
    parse_targets(&text, &path.display().to_string())
}

/// One JSONL result line. Solution coordinates are decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultLine {
    pub schema_version: u32,
    pub c: u32,
    pub d: u64,
    pub x: String,
    pub y: String,
    pub z: String,
    #[serde(rename = "X0")]
    pub x0: Option<f64>,
    pub h: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub seed: u64,
    pub trial: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl ResultLine {
    pub fn from_record(rec: &SolutionRecord, timestamp: Option<DateTime<Utc>>) -> Result<Self> {
        let s = &rec.solution;
        let d =
            s.d.to_u64().ok_or_else(|| Error::InvalidRecord(format!("d = {} outside the reportable range", s.d)))?;
        let w = rec.window;
        Ok(ResultLine {
            schema_version: SCHEMA_VERSION,
            c: s.c,
            d,
            x: s.x.to_string(),
            y: s.y.to_string(),
            z: s.z.to_string(),
            x0: w.map(|w| w.x0),
            h: w.map(|w| w.h),
            k: w.map(|w| w.k),
            l: w.map(|w| w.l),
            seed: rec.seed,
            trial: rec.trial,
            timestamp: timestamp.map(|t| t.to_rfc3339_opts(SecondsFormat::Millis, true)),
        })
    }

    /// Convert back to a record, checking `d = c x^3 + y^3 + z^3`.
    pub fn to_record(&self) -> Result<SolutionRecord> {
        let int = |name: &str, v: &str| {
            v.parse::<BigInt>().map_err(|_| Error::InvalidRecord(format!("field {name} is not an integer: {v:?}")))
        };
        let window = match (self.x0, self.h, self.k, self.l) {
            (Some(x0), Some(h), Some(k), Some(l)) => Some(WindowSummary { x0, h, k, l }),
            (None, None, None, None) => None,
            _ => return Err(Error::InvalidRecord("window fields must be all set or all null".into())),
        };
        let rec = SolutionRecord {
            solution: Solution {
                c: self.c,
                d: BigInt::from(self.d),
                x: int("x", &self.x)?,
                y: int("y", &self.y)?,
                z: int("z", &self.z)?,
            },
            window,
            seed: self.seed,
            trial: self.trial,
        };
        rec.validate()?;
        Ok(rec)
    }
}

pub fn format_result_line(rec: &SolutionRecord, timestamp: Option<DateTime<Utc>>) -> Result<String> {
    let line = ResultLine::from_record(rec, timestamp)?;
    Ok(serde_json::to_string(&line).expect("result lines always serialize"))
}

pub fn parse_result_line(line: &str) -> Result<SolutionRecord> {
    let parsed: ResultLine =
        serde_json::from_str(line).map_err(|e| Error::InvalidRecord(format!("bad result line: {e}")))?;
    parsed.to_record()
}

/// Write one newline-terminated line and flush.
pub fn emit_solution(out: &mut dyn Write, rec: &SolutionRecord, timestamp: Option<DateTime<Utc>>) -> Result<()> {
    let line = format_result_line(rec, timestamp)?;
    writeln!(out, "{line}")?;
    out.flush()?;
    Ok(())
}

/// Stable digest of a solution, used for cross-run deduplication.
pub fn solution_digest(s: &Solution) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("{}:{}:{}:{}:{}", s.c, s.d, s.x, s.y, s.z).as_bytes());
    hex::encode(&hasher.finalize()[..16])
}

pub fn config_digest<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointState {
    pub seed: u64,
    pub trials_done: u64,
    pub digests: Vec<String>,
    pub config_hash: String,
}

/// A checkpoint written to its temporary file but not yet moved into place.
#[derive(Debug)]
pub struct StagedCheckpoint {
    temp: PathBuf,
    target: PathBuf,
}

impl StagedCheckpoint {
    pub fn temp_path(&self) -> &Path {
        &self.temp
    }

    pub fn commit(self) -> Result<()> {
        fs::rename(&self.temp, &self.target)?;
        Ok(())
    }
}

fn temp_path_for(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

pub fn checkpoint_stage(state: &CheckpointState, path: &Path) -> Result<StagedCheckpoint> {
    let temp = temp_path_for(path);
    let mut f = fs::File::create(&temp)?;
    serde_json::to_writer(&mut f, state).map_err(std::io::Error::from)?;
    f.write_all(b"\n")?;
    f.sync_all()?;
    Ok(StagedCheckpoint { temp, target: path.to_path_buf() })
}

/// Write-temp-then-rename, so readers see either the old or the new file.
pub fn checkpoint_save(state: &CheckpointState, path: &Path) -> Result<()> {
    checkpoint_stage(state, path)?.commit()
}

pub fn checkpoint_load(path: &Path) -> Result<CheckpointState> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::CorruptCheckpoint { path: path.to_path_buf(), msg: e.to_string() })
}

/// Load a checkpoint and require that it belongs to the configuration with hash `expected`.
pub fn checkpoint_load_for(path: &Path, expected: &str) -> Result<CheckpointState> {
    let state = checkpoint_load(path)?;
    if state.config_hash != expected {
        return Err(Error::ConfigMismatch { path: path.to_path_buf() });
    }
    Ok(state)
}
