//! Provenance block embedded in every report.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchedulePoint {
    pub n: usize,
    pub tau: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub inputs: Vec<InputHash>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<SchedulePoint>>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(seed: u64, with_timestamp: bool) -> Self {
        Self {
            command: std::env::args().skip(1).collect(),
            inputs: Vec::new(),
            seed,
            schedule: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: with_timestamp
                .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        }
    }

    pub fn record(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(bytes)),
        });
    }

    /// `# key: value` lines heading a CSV report.
    pub fn csv_preamble(&self) -> String {
        let mut out = format!("# command: {}\n", self.command.join(" "));
        for i in &self.inputs {
            out += &format!("# input: {} sha256={}\n", i.path, i.sha256);
        }
        out += &format!("# seed: {}\n", self.seed);
        if let Some(points) = &self.schedule {
            let s: Vec<String> = points
                .iter()
                .map(|p| format!("{}:{}", p.n, p.tau))
                .collect();
            out += &format!("# schedule: {}\n", s.join(","));
        }
        out += &format!("# version: {}\n", self.version);
        if let Some(t) = &self.timestamp {
            out += &format!("# timestamp: {t}\n");
        }
        out
    }
}
