use std::path::Path;

use exitmap::hybrid::InduceFailure;
use exitmap::realization::RealizationError;
use exitmap::scenario::ScenarioError;
use serde_json::{json, Value};

pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;

/// Printed as one JSON object on stderr.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub details: Value,
    pub code: i32,
}

impl CliError {
    pub fn schema(message: impl Into<String>) -> Self {
        CliError { kind: "schema", message: message.into(), details: Value::Null, code: EXIT_SCHEMA }
    }

    pub fn computation(message: impl Into<String>) -> Self {
        CliError { kind: "computation", message: message.into(), details: Value::Null, code: EXIT_COMPUTATION }
    }

    pub fn input(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError {
            kind: "input",
            message: format!("cannot read {}: {e}", path.display()),
            details: json!({ "path": path.display().to_string() }),
            code: EXIT_SCHEMA,
        }
    }

    pub fn output(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError {
            kind: "output",
            message: format!("cannot write {}: {e}", path.display()),
            details: json!({ "path": path.display().to_string() }),
            code: EXIT_COMPUTATION,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind, "message": self.message, "exit_code": self.code });
        if !self.details.is_null() {
            v["details"] = self.details.clone();
        }
        v
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        if e.is_schema() {
            CliError::schema(e.to_string())
        } else {
            CliError::computation(e.to_string())
        }
    }
}

impl From<RealizationError> for CliError {
    fn from(e: RealizationError) -> Self {
        match &e {
            RealizationError::Hypothesis { failures } => CliError {
                kind: "hypothesis",
                message: e.to_string(),
                details: json!({ "failed_probes": failures }),
                code: EXIT_COMPUTATION,
            },
            _ => CliError::computation(e.to_string()),
        }
    }
}

impl From<InduceFailure> for CliError {
    fn from(e: InduceFailure) -> Self {
        CliError {
            kind: "induce",
            message: e.to_string(),
            details: serde_json::to_value(&e).expect("failures serialize"),
            code: EXIT_COMPUTATION,
        }
    }
}
