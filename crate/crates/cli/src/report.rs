use serde::Serialize;
use serde_json::{json, Value};

use crate::wire::InputError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Infeasible,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Holds => 0,
            Verdict::Violated | Verdict::Infeasible => 1,
            Verdict::Error => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub data: Value,
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn holds(command: &str, data: Value) -> Self {
        Report::new(command, Verdict::Holds, data, None)
    }

    /// `violated` and `infeasible` always carry a witness.
    pub fn failed(command: &str, verdict: Verdict, data: Value, witness: Value) -> Self {
        debug_assert!(matches!(verdict, Verdict::Violated | Verdict::Infeasible));
        Report::new(command, verdict, data, Some(witness))
    }

    pub fn verdict(command: &str, holds: bool, data: Value, witness: impl FnOnce() -> Value) -> Self {
        if holds {
            Report::holds(command, data)
        } else {
            Report::failed(command, Verdict::Violated, data, witness())
        }
    }

    pub fn input_error(command: &str, err: &InputError) -> Self {
        let mut r = Report::new(command, Verdict::Error, Value::Null, None);
        r.error = Some(json!({ "message": err.message, "location": err.location }));
        r
    }

    fn new(command: &str, verdict: Verdict, data: Value, witness: Option<Value>) -> Self {
        Report {
            command: command.to_string(),
            verdict,
            data,
            witness,
            error: None,
            elapsed_ms: 0.0,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialise")
    }
}
