//! Artifact writers. Floats are rendered with Rust's shortest round-trip
//! `Display` so outputs are byte-stable across platforms; CSV rows are
//! newline-terminated UTF-8 with a header row and '.' decimals.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use geodev_core::sde::EnsembleResult;
use geodev_core::{GeodevError, Result};
use serde::Serialize;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| GeodevError::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| GeodevError::Config(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// Per-member trajectories as `t,member,x1..xd` rows, members outermost.
pub fn states_csv(result: &EnsembleResult, dim: usize) -> String {
    let mut out = String::from("t,member");
    for i in 1..=dim {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for (member, traj) in result.states.iter().enumerate() {
        for (idx, x) in traj.iter().enumerate() {
            let _ = write!(out, "{},{member}", result.times[idx]);
            for v in x.iter() {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

/// Aligned named columns, one row per leading index.
pub fn columns_csv(header: &[&str], columns: &[&[f64]]) -> String {
    assert_eq!(header.len(), columns.len());
    let rows = columns[0].len();
    assert!(columns.iter().all(|c| c.len() == rows));
    let mut out = header.join(",");
    out.push('\n');
    for r in 0..rows {
        for (c, col) in columns.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", col[r]);
        }
        out.push('\n');
    }
    out
}

/// Run-level record written beside every command's artifacts.
#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub command: String,
    /// Fully materialized config after flag overrides.
    pub resolved_config: C,
    pub seed: u64,
    pub artifacts: Vec<String>,
    pub duration_seconds: f64,
    pub diverged: std::collections::BTreeMap<String, usize>,
}

pub struct ManifestBuilder {
    command: String,
    seed: u64,
    started: Instant,
    artifacts: Vec<String>,
    diverged: std::collections::BTreeMap<String, usize>,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            seed,
            started: Instant::now(),
            artifacts: Vec::new(),
            diverged: Default::default(),
        }
    }

    pub fn artifact(&mut self, out_dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
        let path = out_dir.join(name);
        write_text(&path, contents)?;
        self.artifacts.push(name.to_string());
        Ok(path)
    }

    pub fn artifact_json<T: Serialize>(
        &mut self,
        out_dir: &Path,
        name: &str,
        value: &T,
    ) -> Result<PathBuf> {
        let path = out_dir.join(name);
        write_json(&path, value)?;
        self.artifacts.push(name.to_string());
        Ok(path)
    }

    pub fn diverged(&mut self, label: &str, count: usize) {
        self.diverged.insert(label.to_string(), count);
    }

    pub fn finish<C: Serialize>(self, out_dir: &Path, resolved_config: C) -> Result<()> {
        let manifest = RunManifest {
            command: self.command,
            resolved_config,
            seed: self.seed,
            artifacts: self.artifacts,
            duration_seconds: self.started.elapsed().as_secs_f64(),
            diverged: self.diverged,
        };
        write_json(&out_dir.join("manifest.json"), &manifest)
    }
}
