//! The JSON shape shared by every `verify` suite.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub id: String,
    pub pass: bool,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub clauses: Vec<Clause>,
}

impl Report {
    pub fn new(suite: &str) -> Self {
        Report { suite: suite.to_string(), clauses: Vec::new() }
    }

    /// Record a clause; `first_failure` is `None` when it passed.
    pub fn push(&mut self, id: &str, first_failure: Option<String>) {
        self.clauses.push(Clause { id: id.to_string(), pass: first_failure.is_none(), first_failure });
    }

    pub fn all_passed(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, id: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }

    pub fn merge(&mut self, other: Report) {
        self.clauses.extend(other.clauses);
    }
}
