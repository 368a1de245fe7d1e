//! Problem intermediate representation, compiled conic models and their
//! serialized forms.

mod conic;
mod problem;
mod quadratic;
mod sets;
pub mod text;
mod validate;

pub use conic::{ConicModel, LinearRow, Role, RotatedCone, VarId, VarTag, Variable};
pub use problem::{EquivClass, GlobalRow, ProblemSpec};
pub use quadratic::{interval_max, interval_min, ConvexQuadratic};
pub use sets::{BlockPair, BlockRow, BlockSet, CouplingRow, OmegaSpec};
pub use validate::{validate_problem, ValidationReport, Violation, ViolationKind};

use serde::{Deserialize, Serialize};

/// Sense of a linear row `a·x (sense) rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Sense {
    pub fn token(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    pub fn from_token(tok: &str) -> Option<Sense> {
        match tok {
            "<=" => Some(Sense::Le),
            ">=" => Some(Sense::Ge),
            "=" => Some(Sense::Eq),
            _ => None,
        }
    }

    /// Amount by which `lhs (sense) rhs` is violated, never negative.
    pub fn violation(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Sense::Le => (lhs - rhs).max(0.0),
            Sense::Ge => (rhs - lhs).max(0.0),
            Sense::Eq => (lhs - rhs).abs(),
        }
    }
}
