//! Seeded run reports: every CLI command emits one of these as JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// A reproducible run record: re-running the echoed config with the same
/// seed regenerates `results` byte-identically; `timings` are informational.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub results: serde_json::Value,
    /// Wall-clock seconds per stage; excluded from determinism guarantees.
    pub timings: BTreeMap<String, f64>,
    pub versions: BTreeMap<String, String>,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        config: serde_json::Value,
        seed: u64,
        results: serde_json::Value,
    ) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert(
            env!("CARGO_PKG_NAME").to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        );
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.into(),
            config,
            seed,
            results,
            timings: BTreeMap::new(),
            versions,
        }
    }

    pub fn with_timing(mut self, stage: impl Into<String>, seconds: f64) -> Self {
        self.timings.insert(stage.into(), seconds);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_shape() {
        let r = Report::new(
            "simulate",
            serde_json::json!({"qubits": 2}),
            7,
            serde_json::json!({"expval": 1.0}),
        )
        .with_timing("total", 0.5);
        let json = r.to_json();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back.schema_version, REPORT_SCHEMA_VERSION);
        assert_eq!(back.command, "simulate");
        assert_eq!(back.seed, 7);
        assert_eq!(back.results["expval"], 1.0);
        assert!(back.versions.contains_key("qfm-core"));
    }
}
