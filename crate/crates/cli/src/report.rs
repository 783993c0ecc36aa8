//! The JSON envelope around every command's results.
//!
//! Floats are written in shortest round-trip form, so parsing a report
//! recovers every number bit for bit. Wall time sits in `timing`, apart
//! from the numeric payload that is reproducible for a fixed seed.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    Confirmed,
    Violated,
    Falsified,
    Inconclusive,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success | Status::Confirmed => crate::EXIT_OK,
            Status::Violated | Status::Falsified => crate::EXIT_VIOLATED,
            Status::Inconclusive => crate::EXIT_INCONCLUSIVE,
            Status::Error => crate::EXIT_USAGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelInfo {
    pub role: String,
    pub label: String,
    pub dim_in: usize,
    pub dim_out: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub seed: u64,
    pub channels: Vec<ChannelInfo>,
    pub status: Status,
    pub exit_code: i32,
    pub results: Value,
    pub error: Option<String>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        RunReport {
            tool: "channel-purity",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            channels: Vec::new(),
            status: Status::Success,
            exit_code: 0,
            results: Value::Null,
            error: None,
            timing: Timing::default(),
        }
    }

    /// The report without `timing`, for reproducibility comparisons.
    pub fn deterministic_payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize to JSON");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        v
    }
}
