//! The single structured report every invocation writes to stderr.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Info,
    Error,
}

impl Outcome {
    /// Stable exit status: 0 pass/info, 1 checked failure, 2 usage or
    /// input error.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass | Outcome::Info => 0,
            Outcome::Fail => 1,
            Outcome::Error => 2,
        }
    }

    pub fn from_check(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommandReport {
    pub command: String,
    /// SHA-256 over the arguments and every input document read.
    pub inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outcome: Outcome,
    pub metrics: Map<String, Value>,
    pub artifacts: Vec<String>,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Accumulates inputs and metrics while a command runs.
pub struct Recorder {
    command: String,
    hasher: Sha256,
    pub seed: Option<u64>,
    pub metrics: Map<String, Value>,
    pub artifacts: Vec<String>,
}

impl Recorder {
    pub fn new(args: &[String]) -> Self {
        let mut hasher = Sha256::new();
        for a in args.iter().skip(1) {
            hasher.update(a.as_bytes());
            hasher.update([0u8]);
        }
        Recorder {
            command: String::new(),
            hasher,
            seed: None,
            metrics: Map::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn command(&mut self, name: &str) {
        self.command = name.to_string();
    }

    /// Fold an input document into the digest.
    pub fn input(&mut self, text: &str) {
        self.hasher.update(text.as_bytes());
        self.hasher.update([0u8]);
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(key.to_string(), v);
    }

    pub fn finish(self, outcome: Outcome, runtime_ms: f64, error: Option<String>) -> CommandReport {
        CommandReport {
            command: self.command,
            inputs_digest: hex::encode(self.hasher.finalize()),
            seed: self.seed,
            outcome,
            metrics: self.metrics,
            artifacts: self.artifacts,
            runtime_ms,
            error,
        }
    }
}
