use std::fmt;

/// Outcome of one named check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: String,
    pub status: Status,
    /// First violating configuration, or a note for skipped checks.
    pub witness: Option<String>,
}

/// Ordered list of verdicts. Violations are reported here rather than raised.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub verdicts: Vec<Verdict>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pass(&mut self, id: impl Into<String>) {
        self.verdicts.push(Verdict {
            id: id.into(),
            status: Status::Pass,
            witness: None,
        });
    }

    pub fn fail(&mut self, id: impl Into<String>, witness: impl Into<String>) {
        self.verdicts.push(Verdict {
            id: id.into(),
            status: Status::Fail,
            witness: Some(witness.into()),
        });
    }

    pub fn skip(&mut self, id: impl Into<String>, note: impl Into<String>) {
        self.verdicts.push(Verdict {
            id: id.into(),
            status: Status::Skipped,
            witness: Some(note.into()),
        });
    }

    /// A verdict with an explanatory note regardless of status.
    pub fn note(&mut self, id: impl Into<String>, status: Status, note: impl Into<String>) {
        self.verdicts.push(Verdict {
            id: id.into(),
            status,
            witness: Some(note.into()),
        });
    }

    /// Records `Ok(())` as a pass and `Err(witness)` as a failure.
    pub fn record(&mut self, id: impl Into<String>, outcome: Result<(), String>) {
        match outcome {
            Ok(()) => self.pass(id),
            Err(w) => self.fail(id, w),
        }
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.verdicts.extend(other.verdicts);
    }

    /// True when nothing failed (skips do not count as failures).
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.id == id)
    }

    pub fn status(&self, id: &str) -> Option<Status> {
        self.get(id).map(|v| v.status)
    }

    pub fn first_failure(&self) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.status == Status::Fail)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.verdicts {
            write!(f, "{:<28} {}", v.id, v.status)?;
            if let Some(w) = &v.witness {
                write!(f, "  ({w})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
