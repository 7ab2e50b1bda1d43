//! One machine-readable record per verification check.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    OutsideHypothesis,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub params: BTreeMap<String, i64>,
    pub status: Status,
    /// `"0"` for an exact zero, otherwise a short description of what is left.
    pub residual: String,
    pub millis: u64,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, params: &[(&str, i64)], status: Status, residual: impl Into<String>) -> CheckRecord {
        CheckRecord {
            id: id.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            status,
            residual: residual.into(),
            millis: 0,
        }
    }

    /// Pass on zero residual, fail otherwise.
    pub fn from_residual(id: impl Into<String>, params: &[(&str, i64)], residual: Option<String>) -> CheckRecord {
        match residual {
            None => CheckRecord::new(id, params, Status::Pass, "0"),
            Some(r) => CheckRecord::new(id, params, Status::Fail, r),
        }
    }

    pub fn timed(mut self, start: Instant) -> CheckRecord {
        self.millis = start.elapsed().as_millis() as u64;
        self
    }

    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail
    }
}
