//! Score-based structure search and expert edit scripts.

mod edits;
mod score;
mod search;

use thiserror::Error;

use crate::model::ModelError;

pub use edits::{apply_edits, Edit, EditKind, EditScript};
pub use score::family_score;
pub use search::{
    greedy_thick_thinning, parse_arc_list, total_score, Phase, SearchOutcome, SearchStep,
    StructureConstraints,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("inconsistent constraints: {0}")]
    Constraint(String),
    #[error("edit has no effect: {0}")]
    NoOp(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl StructureError {
    pub fn name(&self) -> &'static str {
        match self {
            StructureError::InvalidFamily(_) => "InvalidFamily",
            StructureError::Constraint(_) => "ConstraintError",
            StructureError::NoOp(_) => "NoOpError",
            StructureError::Parse { .. } => "ParseError",
            StructureError::Model(e) => e.name(),
        }
    }
}
