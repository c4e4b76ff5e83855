//! Verdicts for individual identities.

use alloc::format;
use alloc::string::{String, ToString};

use crate::curve_algebra::ElementAgreement;
use crate::laurent::{Agreement, EXACT};

/// Smallest absolute precision (in `t`) at which a series identity is
/// certified: coefficients of `s^0 .. s^30` must all be known.
pub const CERTIFY_BELOW: i64 = 61;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub enum Status {
    Certified,
    /// A displayed formula disagrees with the computation in a way that was
    /// characterized (e.g. a uniform scalar or a weaker valuation).
    Discrepancy,
    Inconclusive,
    Failed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Discrepancy => "discrepancy",
            Status::Inconclusive => "inconclusive",
            Status::Failed => "failed",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Coefficients of `t^n`, `n <` this, were compared; `None` for exact
    /// symbolic or exhaustive checks.
    pub checked_below: Option<i64>,
    pub detail: String,
}

fn range_status(known_below: i64) -> (Status, Option<i64>) {
    if known_below == EXACT {
        (Status::Certified, None)
    } else if known_below >= CERTIFY_BELOW {
        (Status::Certified, Some(known_below))
    } else {
        (Status::Inconclusive, Some(known_below))
    }
}

impl Check {
    pub fn new(name: &str, status: Status, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            status,
            checked_below: None,
            detail: detail.into(),
        }
    }

    /// Exact (symbolic or exhaustive) check.
    pub fn exact(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        let status = if ok { Status::Certified } else { Status::Failed };
        Self::new(name, status, detail)
    }

    pub fn series(name: &str, agreement: &Agreement) -> Self {
        match *agreement {
            Agreement::Equal { known_below } => {
                let (status, below) = range_status(known_below);
                Check {
                    name: name.to_string(),
                    status,
                    checked_below: below,
                    detail: String::new(),
                }
            }
            Agreement::Differ { exponent, lhs, rhs } => Check {
                name: name.to_string(),
                status: Status::Failed,
                checked_below: Some(exponent),
                detail: format!("t^{exponent}: {lhs} != {rhs}"),
            },
        }
    }

    pub fn element(name: &str, agreement: &ElementAgreement) -> Self {
        match agreement {
            ElementAgreement::Equal { known_below } => {
                let (status, below) = range_status(*known_below);
                Check {
                    name: name.to_string(),
                    status,
                    checked_below: below,
                    detail: String::new(),
                }
            }
            ElementAgreement::Differ {
                component,
                monomial,
                exponent,
                value,
            } => Check {
                name: name.to_string(),
                status: Status::Failed,
                checked_below: Some(*exponent),
                detail: format!(
                    "component {component}, x-monomial {monomial:?}: difference {value} at t^{exponent}"
                ),
            },
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }
}

/// Worst status of a collection, counting discrepancies as acceptable.
pub fn overall<'a>(checks: impl IntoIterator<Item = &'a Check>) -> Status {
    let mut worst = Status::Certified;
    for c in checks {
        if c.status > worst {
            worst = c.status;
        }
    }
    worst
}
