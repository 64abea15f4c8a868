use std::process::ExitCode;
use std::time::Duration;

use datavec::linalg::SolverStats;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No,
    NoUpToBudget,
    InconclusiveCapped,
}

impl Decision {
    pub fn label(self) -> &'static str {
        match self {
            Decision::Yes => "YES",
            Decision::No => "NO",
            Decision::NoUpToBudget => "NO_UP_TO_BUDGET",
            Decision::InconclusiveCapped => "INCONCLUSIVE_CAPPED",
        }
    }

    pub fn exit_code(self) -> ExitCode {
        match self {
            Decision::Yes => ExitCode::from(0),
            Decision::No => ExitCode::from(1),
            Decision::NoUpToBudget | Decision::InconclusiveCapped => ExitCode::from(3),
        }
    }

    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Decision::Yes
        } else {
            Decision::No
        }
    }
}

/// SHA-256 over every input, each prefixed by its length so that
/// concatenation boundaries matter.
#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn feed(&mut self, bytes: &[u8]) {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn finish(self) -> String {
        format!("{:x}", self.0.finalize())
    }
}

/// Outcome of one subcommand. Everything but `timing` depends only on the
/// inputs, so reports are byte-identical across runs.
pub struct RunReport {
    pub command: String,
    pub digest: String,
    pub decision: Decision,
    pub witness: Option<Value>,
    /// Command-specific fields, printed under `details`.
    pub details: Map<String, Value>,
    pub stats: SolverStats,
    pub timing: Option<Duration>,
}

impl RunReport {
    pub fn new(command: &str, digest: String, decision: Decision) -> Self {
        RunReport {
            command: command.to_string(),
            digest,
            decision,
            witness: None,
            details: Map::new(),
            stats: SolverStats::default(),
            timing: None,
        }
    }

    pub fn detail(&mut self, key: &str, value: Value) {
        self.details.insert(key.to_string(), value);
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), json!(self.command));
        out.insert("digest".into(), json!(self.digest));
        out.insert("decision".into(), json!(self.decision.label()));
        if let Some(w) = &self.witness {
            out.insert("witness".into(), w.clone());
        }
        if !self.details.is_empty() {
            out.insert("details".into(), Value::Object(self.details.clone()));
        }
        out.insert(
            "stats".into(),
            json!({
                "lp_solves": self.stats.lp_solves,
                "lp_pivots": self.stats.lp_pivots,
                "branches": self.stats.branches,
            }),
        );
        if let Some(t) = self.timing {
            out.insert("timing_ms".into(), json!(t.as_secs_f64() * 1000.0));
        }
        Value::Object(out)
    }
}
