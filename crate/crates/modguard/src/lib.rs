//! Installation-free analysis of Python package ecosystems.
//!
//! This crate extracts the module paths a Python distribution archive would
//! produce *after* installation without ever running an installer, resolves
//! environment-aware dependency graphs against a local package index, and
//! detects module conflicts: packages shadowing standard-library modules,
//! unrelated packages sharing module paths, and conflicting modules inside a
//! single dependency graph.
//!
//! The pipeline is organised as:
//!
//! * [`pep`] — project names, versions, specifiers, markers, requirements.
//! * [`archive`] — wheel / sdist / egg readers and distribution classification.
//! * [`metadata`] — parsers for RECORD, top_level.txt, SOURCES.txt,
//!   namespace_packages.txt, requires.txt and METADATA.
//! * [`config`] — parsers for setup.cfg, pyproject.toml and static analysis
//!   of setup.py.
//! * [`sim`] — the virtual file tree and the installation simulation that
//!   turns raw configuration data into post-install module paths.
//! * [`kb`] — the local package index (ingest, query, fetch).
//! * [`resolver`] — backtracking dependency resolution with a priority policy.
//! * [`conflict`] — conflict detection and reporting.
//! * [`fixtures`] — deterministic synthetic package builders used by tests
//!   and the runnable examples.
//! * [`cli`] — the `modguard` command-line surface.

pub mod archive;
pub mod cli;
pub mod config;
pub mod conflict;
pub mod fixtures;
pub mod kb;
pub mod metadata;
pub mod pep;
pub mod resolver;
pub mod sim;
