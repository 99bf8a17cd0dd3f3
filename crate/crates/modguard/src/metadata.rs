//! Parsers for the metadata artifacts carried inside distribution archives:
//! RECORD, top_level.txt, SOURCES.txt, namespace_packages.txt, requires.txt
//! and the RFC-822-style METADATA / PKG-INFO header block.
//!
//! Individual requirement lines that fail to parse are logged and skipped so
//! batch runs over large corpora complete; structurally broken files are
//! hard errors.

use crate::pep::{parse_requirement, MarkerExpr, Requirement};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetadataError {
    #[error("malformed RECORD line {line}: {text:?}")]
    MalformedRecordLine { line: usize, text: String },
}

/// Where a package's raw module data came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Record,
    TopLevelPlusSources,
    ConfigScript,
    ConfigCfg,
    ConfigToml,
}

/// A tracked configuration keyword: absent, resolved to a value, or present
/// but not statically resolvable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Keyword<T> {
    #[default]
    Absent,
    Value(T),
    Unresolvable,
}

impl<T> Keyword<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Keyword::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Keyword::Absent)
    }
}

/// Arguments captured from a `find_packages()` / `find_namespace_packages()`
/// style directive; resolved against the virtual file tree later.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindDirective {
    pub where_dir: String,
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// True for the namespace variant, which drops the `__init__.py`
    /// requirement.
    pub namespaces: bool,
}

impl Default for FindDirective {
    fn default() -> Self {
        FindDirective {
            where_dir: String::new(),
            include: vec!["*".to_string()],
            exclude: Vec::new(),
            namespaces: false,
        }
    }
}

/// The `packages` keyword: an explicit list or a find directive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PackagesSpec {
    List(Vec<String>),
    Find(FindDirective),
}

/// The four module-shaping parameters of a package configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawModuleData {
    pub py_modules: Keyword<Vec<String>>,
    pub packages: Keyword<PackagesSpec>,
    pub package_dir: Keyword<BTreeMap<String, String>>,
    pub namespace_packages: Keyword<Vec<String>>,
    pub provenance: Option<Provenance>,
}

impl RawModuleData {
    /// Warn when the namespace list is not a subset of the packages list;
    /// namespace packages are declared alongside their package entry.
    pub fn check_namespace_subset(&self) {
        if let (Some(PackagesSpec::List(packages)), Some(namespaces)) =
            (self.packages.value(), self.namespace_packages.value())
        {
            if !packages.is_empty() && !namespaces.is_empty() {
                for ns in namespaces {
                    if !packages.contains(ns) {
                        log::warn!(
                            "namespace package {ns:?} is not listed in packages; keeping it anyway"
                        );
                    }
                }
            }
        }
    }
}

/// Install requirements plus named extra groups.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawDependencyData {
    pub install: Vec<Requirement>,
    pub extras: BTreeMap<String, Vec<Requirement>>,
}

impl RawDependencyData {
    pub fn is_empty(&self) -> bool {
        self.install.is_empty() && self.extras.is_empty()
    }

    /// Append a requirement, dropping duplicates of an already-seen
    /// canonical form (first occurrence wins).
    pub fn push_install(&mut self, req: Requirement) {
        let rendered = req.to_string();
        if !self.install.iter().any(|r| r.to_string() == rendered) {
            self.install.push(req);
        }
    }

    pub fn push_extra(&mut self, extra: &str, req: Requirement) {
        let bucket = self.extras.entry(extra.to_string()).or_default();
        let rendered = req.to_string();
        if !bucket.iter().any(|r| r.to_string() == rendered) {
            bucket.push(req);
        }
    }
}

/// Parse a wheel RECORD file (`path,hash,size` per line) into the module
/// paths it lists: `.py` entries only, metadata directory excluded. RECORD
/// paths are already post-install paths and are kept as recorded.
pub fn parse_record(content: &str) -> Result<Vec<String>, MetadataError> {
    let mut out = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        // path,hash,size — split from the right so unquoted commas in the
        // path survive.
        let Some((rest, _size)) = line.rsplit_once(',') else {
            return Err(MetadataError::MalformedRecordLine {
                line: idx + 1,
                text: line.to_string(),
            });
        };
        let Some((path, _hash)) = rest.rsplit_once(',') else {
            return Err(MetadataError::MalformedRecordLine {
                line: idx + 1,
                text: line.to_string(),
            });
        };
        let path = path.trim_matches('"');
        if !path.ends_with(".py") {
            continue;
        }
        if path.split('/').any(|seg| seg.ends_with(".dist-info")) {
            continue;
        }
        out.push(path.to_string());
    }
    Ok(out)
}

/// Parse top_level.txt: one importable top-level name per line.
pub fn parse_top_level(content: &str) -> Vec<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parse SOURCES.txt: one file path per line, all files of the source
/// package. Callers filter to `.py` and join against top-level names.
pub fn parse_sources(content: &str) -> Vec<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parse namespace_packages.txt: one dotted name per line.
pub fn parse_namespace_packages(content: &str) -> Vec<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parse requires.txt. Unsectioned lines are install requirements;
/// `[:marker]` sections attach a marker to install requirements; `[extra]`
/// and `[extra:marker]` sections fill the extras map.
pub fn parse_requires_txt(content: &str) -> RawDependencyData {
    let mut data = RawDependencyData::default();
    // (extra name, marker) of the current section.
    let mut section: (Option<String>, Option<MarkerExpr>) = (None, None);

    for (idx, raw_line) in content.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) else {
                log::warn!("requires.txt line {}: malformed section header {line:?}", idx + 1);
                section = (None, None);
                continue;
            };
            let (extra_part, marker_part) = match inner.split_once(':') {
                Some((e, m)) => (e.trim(), Some(m.trim())),
                None => (inner.trim(), None),
            };
            let extra = if extra_part.is_empty() {
                None
            } else {
                match crate::pep::normalize_name(extra_part) {
                    Ok(name) => Some(name.normalized().to_string()),
                    Err(e) => {
                        log::warn!("requires.txt line {}: bad extra name: {e}", idx + 1);
                        section = (None, None);
                        continue;
                    }
                }
            };
            let marker = match marker_part {
                None => None,
                Some(m) => match MarkerExpr::parse(m) {
                    Ok(parsed) => Some(parsed),
                    Err(e) => {
                        log::warn!("requires.txt line {}: bad section marker: {e}", idx + 1);
                        section = (None, None);
                        continue;
                    }
                },
            };
            section = (extra, marker);
            continue;
        }

        let req = match parse_requirement(line) {
            Ok(req) => req,
            Err(e) => {
                let context = match &section.0 {
                    Some(extra) => format!("extras[{extra}]"),
                    None => "install".to_string(),
                };
                log::warn!("requires.txt line {} ({context}): skipping: {e}", idx + 1);
                continue;
            }
        };
        let req = match &section.1 {
            Some(marker) => req.with_marker(marker.clone()),
            None => req,
        };
        match &section.0 {
            None => data.push_install(req),
            Some(extra) => data.push_extra(extra, req),
        }
    }
    data
}

/// Split an RFC-822-style header block into (name, value, line) triples.
/// Continuation lines (leading whitespace) extend the previous value.
fn parse_rfc822_headers(content: &str) -> Vec<(String, String, usize)> {
    let mut headers: Vec<(String, String, usize)> = Vec::new();
    for (idx, raw_line) in content.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.is_empty() {
            // Blank line ends the header block; the body is a description.
            break;
        }
        if (line.starts_with(' ') || line.starts_with('\t')) && !headers.is_empty() {
            let last = headers.last_mut().unwrap();
            last.1.push(' ');
            last.1.push_str(line.trim());
            continue;
        }
        match line.split_once(':') {
            Some((name, value)) => {
                headers.push((name.trim().to_string(), value.trim().to_string(), idx + 1))
            }
            None => log::warn!("metadata line {}: not a header: {line:?}", idx + 1),
        }
    }
    headers
}

/// Parse a METADATA / PKG-INFO header block. `Requires-Dist` lines become
/// requirements; those whose marker names an extra are routed into that
/// extra's group with the extra clause stripped. `Provides-Extra` names are
/// registered even when their group stays empty.
pub fn parse_metadata_core(content: &str) -> RawDependencyData {
    let mut data = RawDependencyData::default();
    for (name, value, line) in parse_rfc822_headers(content) {
        match name.as_str() {
            "Requires-Dist" => {
                let req = match parse_requirement(&value) {
                    Ok(req) => req,
                    Err(e) => {
                        log::warn!("metadata line {line}: skipping Requires-Dist: {e}");
                        continue;
                    }
                };
                let extra_names = req
                    .marker
                    .as_ref()
                    .map(MarkerExpr::extra_names)
                    .unwrap_or_default();
                if extra_names.is_empty() {
                    data.push_install(req);
                } else {
                    let stripped = Requirement {
                        marker: req.marker.as_ref().and_then(MarkerExpr::without_extra_clauses),
                        ..req.clone()
                    };
                    for extra in extra_names {
                        data.push_extra(&extra, stripped.clone());
                    }
                }
            }
            "Provides-Extra" => match crate::pep::normalize_name(&value) {
                Ok(extra) => {
                    data.extras.entry(extra.normalized().to_string()).or_default();
                }
                Err(e) => log::warn!("metadata line {line}: bad Provides-Extra: {e}"),
            },
            _ => {}
        }
    }
    data
}

/// Read `Name:` and `Version:` from a PKG-INFO / METADATA block.
pub fn parse_name_version(content: &str) -> (Option<String>, Option<String>) {
    let mut name = None;
    let mut version = None;
    for (header, value, _) in parse_rfc822_headers(content) {
        match header.as_str() {
            "Name" => name = Some(value),
            "Version" => version = Some(value),
            _ => {}
        }
    }
    (name, version)
}
