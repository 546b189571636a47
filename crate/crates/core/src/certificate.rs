use std::fmt;

use serde::{Deserialize, Serialize};

/// Why a verdict holds for every index, not just a scanned prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofReason {
    /// r_{n+1}/r_n grows without bound, so the top term dominates.
    ThetaInfiniteDominance,
    /// The operator polynomial does not vanish at the Kepler limit.
    NonvanishingAtTheta,
    /// The minimal polynomial divides the operator polynomial.
    MinpolyDivides,
    /// Ratio window plus a dominance inequality checked at its start.
    DominanceWindow,
    /// Exhaustive search below a certified bound.
    ExhaustiveBelowBound,
}

impl fmt::Display for ProofReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProofReason::ThetaInfiniteDominance => "theta-infinite-dominance",
            ProofReason::NonvanishingAtTheta => "nonvanishing-at-theta",
            ProofReason::MinpolyDivides => "minpoly-divides",
            ProofReason::DominanceWindow => "dominance-window",
            ProofReason::ExhaustiveBelowBound => "exhaustive-below-bound",
        };
        f.write_str(s)
    }
}

/// Certification level of a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "level", rename_all = "kebab-case")]
pub enum Certificate {
    Proved { reason: ProofReason },
    BoundedCheck { checked_up_to: usize },
}

impl Certificate {
    pub fn proved(reason: ProofReason) -> Self {
        Certificate::Proved { reason }
    }

    pub fn bounded(n: usize) -> Self {
        Certificate::BoundedCheck { checked_up_to: n }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, Certificate::Proved { .. })
    }

    /// The weaker of two certificates (a bounded check wins, smallest window).
    pub fn weakest(self, other: Certificate) -> Certificate {
        match (self, other) {
            (Certificate::BoundedCheck { checked_up_to: a }, Certificate::BoundedCheck { checked_up_to: b }) => {
                Certificate::bounded(a.min(b))
            }
            (b @ Certificate::BoundedCheck { .. }, _) | (_, b @ Certificate::BoundedCheck { .. }) => b,
            (a, _) => a,
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Proved { reason } => write!(f, "Proved({reason})"),
            Certificate::BoundedCheck { checked_up_to } => write!(f, "BoundedCheck({checked_up_to})"),
        }
    }
}
