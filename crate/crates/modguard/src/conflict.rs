//! Detection and classification of module conflicts: packages shadowing
//! standard-library names, unrelated packages sharing module paths, and
//! conflicting modules inside one dependency graph.

use crate::kb::{IndexStore, PackageRecord};
use crate::resolver::{DependencyGraph, ROOT_ID};
use crate::sim::ModuleSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConflictError {
    #[error("graph node {0} has no record in the knowledge base")]
    MissingRecord(String),
}

/// The bundled standard-library name list.
const STDLIB_NAMES: &str = include_str!("stdlib_modules.txt");
const STDLIB_LABEL: &str = "cpython-3.9-module-index";

/// The set of standard-library top-level module names used for shadowing
/// detection, together with a label recording the snapshot it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StdlibCatalog {
    names: BTreeSet<String>,
    label: String,
}

impl StdlibCatalog {
    /// The catalog shipped with the crate: 199 documented top-level module
    /// names.
    pub fn bundled() -> Self {
        let names: BTreeSet<String> = STDLIB_NAMES
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        debug_assert_eq!(names.len(), 199);
        StdlibCatalog {
            names,
            label: STDLIB_LABEL.to_string(),
        }
    }

    pub fn from_names(names: impl IntoIterator<Item = String>, label: &str) -> Self {
        StdlibCatalog {
            names: names.into_iter().collect(),
            label: label.to_string(),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// The three conflict patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    ModuleToLib,
    ModuleToTpl,
    ModuleInDep,
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pattern::ModuleToLib => "module-to-lib",
            Pattern::ModuleToTpl => "module-to-tpl",
            Pattern::ModuleInDep => "module-in-dep",
        })
    }
}

/// A party to a conflict: a concrete release or a standard-library module.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Package { name: String, version: String },
    Stdlib { module: String },
}

impl std::fmt::Display for Subject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Subject::Package { name, version } => write!(f, "{name}=={version}"),
            Subject::Stdlib { module } => write!(f, "stdlib:{module}"),
        }
    }
}

/// One classified conflict instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConflictFinding {
    pub pattern: Pattern,
    pub subjects: Vec<Subject>,
    /// Conflicting module paths; top-level names for stdlib shadowing.
    pub paths: BTreeSet<String>,
    /// True when a shared path has different file contents on the two sides.
    pub content_differs: bool,
    /// True when the paths only collide under case-insensitive comparison.
    pub case_insensitive: bool,
    /// True when only `.pth` shims collide (namespace machinery; low
    /// severity).
    pub pth_only: bool,
}

impl ConflictFinding {
    fn package_subject(record: &PackageRecord) -> Subject {
        Subject::Package {
            name: record.name.normalized().to_string(),
            version: record.version.to_string(),
        }
    }
}

/// Report a finding for every top-level module name that shadows a
/// standard-library name.
pub fn detect_module_to_lib(
    modules: &ModuleSet,
    catalog: &StdlibCatalog,
) -> Vec<ConflictFinding> {
    let mut findings = Vec::new();
    for name in modules.top_level_names() {
        if catalog.contains(&name) {
            findings.push(ConflictFinding {
                pattern: Pattern::ModuleToLib,
                subjects: vec![Subject::Stdlib {
                    module: name.clone(),
                }],
                paths: BTreeSet::from([name]),
                content_differs: false,
                case_insensitive: false,
                pth_only: false,
            });
        }
    }
    findings.sort();
    findings
}

/// Shared module paths of two records; keys are lowercased when
/// case-insensitive. Returns (paths, content_differs, exact_empty).
fn shared_paths(
    a: &PackageRecord,
    b: &PackageRecord,
    case_insensitive: bool,
) -> (BTreeSet<String>, bool, bool) {
    let fold = |p: &str| {
        if case_insensitive {
            p.to_lowercase()
        } else {
            p.to_string()
        }
    };
    let mut a_map: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for (path, digest) in a.modules.iter() {
        a_map.entry(fold(path)).or_default().insert(digest);
    }
    let mut shared = BTreeSet::new();
    let mut differs = false;
    let mut exact_match = false;
    for (path, digest) in b.modules.iter() {
        let key = fold(path);
        let Some(a_digests) = a_map.get(&key) else {
            continue;
        };
        shared.insert(key);
        if a.modules.contains_path(path) {
            exact_match = true;
        }
        // Unknown digests (empty) cannot witness a content difference.
        if !digest.is_empty() && a_digests.iter().any(|d| !d.is_empty() && *d != digest) {
            differs = true;
        }
    }
    (shared, differs, !exact_match)
}

fn pair_finding(
    pattern: Pattern,
    a: &PackageRecord,
    b: &PackageRecord,
    case_insensitive: bool,
) -> Option<ConflictFinding> {
    // Releases of the same project never conflict with themselves.
    if a.name == b.name {
        return None;
    }
    let (paths, content_differs, case_only) = shared_paths(a, b, case_insensitive);
    if paths.is_empty() {
        return None;
    }
    let mut subjects = vec![
        ConflictFinding::package_subject(a),
        ConflictFinding::package_subject(b),
    ];
    subjects.sort();
    let pth_only = paths.iter().all(|p| p.ends_with(".pth"));
    Some(ConflictFinding {
        pattern,
        subjects,
        paths,
        content_differs,
        case_insensitive: case_insensitive && case_only,
        pth_only,
    })
}

/// Pairwise module-path intersection over unrelated packages (one record
/// per project expected: latest versions). With `case_insensitive`, paths
/// are compared lowercased, modeling filesystems where `crypto/` blocks
/// `Crypto/`. Records are indexed by top-level name so only plausible pairs
/// are intersected.
pub fn detect_module_to_tpl(
    records: &[&PackageRecord],
    case_insensitive: bool,
) -> Vec<ConflictFinding> {
    // First path segment -> record indexes providing it.
    let mut by_top: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        let mut tops: BTreeSet<String> = BTreeSet::new();
        for path in record.modules.paths() {
            let top = match path.split_once('/') {
                Some((first, _)) => first.to_string(),
                None => path.to_string(),
            };
            tops.insert(if case_insensitive { top.to_lowercase() } else { top });
        }
        for top in tops {
            by_top.entry(top).or_default().push(idx);
        }
    }

    let mut candidate_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for indexes in by_top.values() {
        for (i, a) in indexes.iter().enumerate() {
            for b in &indexes[i + 1..] {
                candidate_pairs.insert((*a, *b));
            }
        }
    }

    let mut findings = Vec::new();
    for (a, b) in candidate_pairs {
        if let Some(finding) =
            pair_finding(Pattern::ModuleToTpl, records[a], records[b], case_insensitive)
        {
            findings.push(finding);
        }
    }
    findings.sort();
    findings
}

/// Pairwise module-path intersections over all packages of one dependency
/// graph, the root package included. Every node must have a record.
pub fn detect_module_in_dep(
    graph: &DependencyGraph,
    kb: &IndexStore,
) -> Result<Vec<ConflictFinding>, ConflictError> {
    let mut records: Vec<&PackageRecord> = Vec::new();
    for (name, version) in &graph.nodes {
        let project = crate::pep::normalize_name(name)
            .map_err(|_| ConflictError::MissingRecord(name.clone()))?;
        let record = kb
            .get(&project, version)
            .ok_or_else(|| ConflictError::MissingRecord(format!("{name}=={version}")))?;
        records.push(record);
    }

    let mut findings = Vec::new();
    for (i, a) in records.iter().enumerate() {
        for b in &records[i + 1..] {
            if let Some(finding) = pair_finding(Pattern::ModuleInDep, a, b, false) {
                findings.push(finding);
            }
        }
    }
    findings.sort();
    Ok(findings)
}

/// Returns the real package nodes of a graph (excludes the synthetic root).
pub fn graph_package_ids(graph: &DependencyGraph) -> Vec<String> {
    graph
        .node_ids()
        .into_iter()
        .filter(|id| id != ROOT_ID)
        .collect()
}

/// Aggregated view over a set of findings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictReport {
    pub findings: Vec<ConflictFinding>,
    pub counts: BTreeMap<String, u64>,
    pub content_differs_count: u64,
    pub pth_only_count: u64,
    pub case_insensitive_count: u64,
    /// Most frequent conflicting paths, by number of findings they appear
    /// in; count-descending, then path ascending.
    pub top_paths: Vec<(String, u64)>,
}

/// Summarize findings: per-pattern counts, severity tallies and the most
/// frequent conflicting paths.
pub fn summarize(findings: &[ConflictFinding], top_n: usize) -> ConflictReport {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for pattern in [Pattern::ModuleToLib, Pattern::ModuleToTpl, Pattern::ModuleInDep] {
        counts.insert(pattern.to_string(), 0);
    }
    let mut path_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut content_differs_count = 0;
    let mut pth_only_count = 0;
    let mut case_insensitive_count = 0;

    for finding in findings {
        *counts.entry(finding.pattern.to_string()).or_insert(0) += 1;
        if finding.content_differs {
            content_differs_count += 1;
        }
        if finding.pth_only {
            pth_only_count += 1;
        }
        if finding.case_insensitive {
            case_insensitive_count += 1;
        }
        for path in &finding.paths {
            *path_counts.entry(path.clone()).or_insert(0) += 1;
        }
    }

    let mut top_paths: Vec<(String, u64)> = path_counts.into_iter().collect();
    top_paths.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top_paths.truncate(top_n);

    ConflictReport {
        findings: findings.to_vec(),
        counts,
        content_differs_count,
        pth_only_count,
        case_insensitive_count,
        top_paths,
    }
}

impl ConflictReport {
    pub fn total_findings(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("findings: {}\n", self.total_findings()));
        for (pattern, count) in &self.counts {
            out.push_str(&format!("  {pattern}: {count}\n"));
        }
        out.push_str(&format!(
            "severity: content-differs {} / case-insensitive {} / pth-only {}\n",
            self.content_differs_count, self.case_insensitive_count, self.pth_only_count
        ));
        if !self.top_paths.is_empty() {
            out.push_str("top conflicting paths:\n");
            for (path, count) in &self.top_paths {
                out.push_str(&format!("  {count:>6}  {path}\n"));
            }
        }
        for finding in &self.findings {
            let subjects: Vec<String> = finding.subjects.iter().map(Subject::to_string).collect();
            let mut flags = Vec::new();
            if finding.content_differs {
                flags.push("content-differs");
            }
            if finding.case_insensitive {
                flags.push("case-insensitive");
            }
            if finding.pth_only {
                flags.push("pth-only");
            }
            let flags = if flags.is_empty() {
                String::new()
            } else {
                format!(" [{}]", flags.join(", "))
            };
            out.push_str(&format!(
                "{} {}{}\n",
                finding.pattern,
                subjects.join(" <-> "),
                flags
            ));
            for path in &finding.paths {
                out.push_str(&format!("    {path}\n"));
            }
        }
        out
    }
}
