//! Outcome of an exact check.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// The first failure found, with a human-readable locus.
    Fail(String),
    /// The claim lies outside the trusted window.
    Skipped(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn from_bool(ok: bool, locus: impl FnOnce() -> String) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail(locus())
        }
    }

    /// Keep the first non-pass verdict.
    pub fn and(self, other: impl FnOnce() -> Verdict) -> Verdict {
        match self {
            Verdict::Pass => other(),
            v => v,
        }
    }

    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut skipped = None;
        for v in verdicts {
            match v {
                Verdict::Pass => {}
                Verdict::Fail(_) => return v,
                Verdict::Skipped(_) => {
                    skipped.get_or_insert(v);
                }
            }
        }
        skipped.unwrap_or(Verdict::Pass)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::Skipped(_) => "skipped-out-of-window",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail(why) => write!(f, "fail: {why}"),
            Verdict::Skipped(why) => write!(f, "skipped: {why}"),
        }
    }
}
