use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::policy::{CandidateFeatures, Trajectory};

/// Expert demonstrations, stored one JSON record per line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryStore {
    pub trajectories: Vec<Trajectory>,
}

impl TrajectoryStore {
    pub fn push(&mut self, t: Trajectory) {
        self.trajectories.push(t);
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for t in &self.trajectories {
            out.push_str(&serde_json::to_string(t)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut trajectories = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let t: Trajectory =
                serde_json::from_str(line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            t.validate()?;
            trajectories.push(t);
        }
        Ok(Self { trajectories })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_jsonl()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }

    /// Leading 16 hex digits of the SHA-256 of the serialized store.
    pub fn digest(&self) -> String {
        let text = self.to_jsonl().unwrap_or_default();
        let d = Sha256::digest(text.as_bytes());
        d[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn baseline(&self, problem_id: &str) -> Option<f64> {
        self.trajectories
            .iter()
            .find(|t| t.problem_id == problem_id)
            .map(|t| t.baseline)
    }

    /// Every (features, action) pair, skipping limit-hit trajectories unless asked.
    pub fn pairs(&self, include_truncated: bool) -> Vec<(&CandidateFeatures, usize)> {
        self.trajectories
            .iter()
            .filter(|t| include_truncated || t.optimal)
            .flat_map(|t| t.steps.iter().map(|s| (&s.features, s.action)))
            .collect()
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs(false).len()
    }
}
