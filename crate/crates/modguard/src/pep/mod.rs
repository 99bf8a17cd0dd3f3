//! Canonical types and grammars for project names, versions, version
//! specifiers, environment markers and requirements. Every other module in
//! the crate speaks these types.
//!
//! All types are immutable after construction and all operations are pure.

mod environment;
mod marker;
mod name;
mod requirement;
mod specifier;
mod version;

pub use environment::{EnvironmentProfile, MARKER_VARIABLES};
pub use marker::{eval_marker, MarkerExpr, MarkerLeaf, MarkerOp};
pub use name::{normalize_name, ProjectName};
pub use requirement::{parse_requirement, Requirement};
pub use specifier::{specifier_contains, Clause, Operator, VersionSpecifier};
pub use version::{parse_version, PreTag, Version};

use thiserror::Error;

/// Errors raised by the grammar parsers in this module.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PepError {
    #[error("invalid project name {0:?}: {1}")]
    InvalidName(String, String),
    #[error("invalid version {0:?}: {1}")]
    InvalidVersion(String, String),
    #[error("invalid specifier {0:?}: {1}")]
    InvalidSpecifier(String, String),
    #[error("invalid marker {0:?}: {1}")]
    InvalidMarker(String, String),
    #[error("invalid requirement at byte {offset}: {message} in {text:?}")]
    InvalidRequirement {
        text: String,
        offset: usize,
        message: String,
    },
    #[error("unknown marker variable {0:?}")]
    UnknownVariable(String),
}
