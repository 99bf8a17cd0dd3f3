//! The `modguard` command-line surface: ingest, fetch, extract, resolve,
//! scan, compare and report. All JSON output is stable under re-runs:
//! sorted keys, sorted arrays, no timestamps.

use crate::archive::PackageArchive;
use crate::conflict::{self, ConflictFinding, ConflictReport, StdlibCatalog, Subject};
use crate::kb::{self, IndexStore, PackageRecord};
use crate::pep::{
    normalize_name, parse_requirement, parse_version, EnvironmentProfile, Requirement,
};
use crate::resolver::{
    self, compare_graphs, compare_sets, CompareLevel, DependencyGraph, Metric, OrderPolicy,
    ResolveError, ResolveOptions,
};
use crate::sim::{self, ModuleSet};
use clap::{Parser, Subcommand, ValueEnum};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum LevelArg {
    #[default]
    Node,
    Edge,
}

#[derive(Debug, Parser)]
#[command(
    name = "modguard",
    version,
    about = "Installation-free module extraction, dependency resolution and module-conflict detection for Python packages"
)]
struct Cli {
    /// Package index directory (defaults to $MODGUARD_INDEX).
    #[arg(long, global = true, env = "MODGUARD_INDEX", value_name = "DIR")]
    index: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads for ingestion and extraction.
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    jobs: usize,

    /// Override one environment variable (repeatable), e.g.
    /// --env python_version=3.11
    #[arg(long = "env", global = true, value_name = "KEY=VALUE")]
    env_overrides: Vec<String>,

    /// Compare module paths case-insensitively (Windows semantics).
    #[arg(long, global = true)]
    case_insensitive: bool,

    /// Treat requested extras as a single global dictionary instead of
    /// scoping them per requirement.
    #[arg(long, global = true)]
    global_extras: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest package archives into the index.
    Ingest {
        /// Archive files (.whl, .tar.gz, .zip, .egg).
        #[arg(required = true)]
        archives: Vec<PathBuf>,
    },
    /// Fetch a project's distributions from a simple-repository index.
    Fetch {
        /// Base URL of the simple index, e.g. http://localhost:8080/simple
        #[arg(long)]
        url: String,
        #[arg(required = true)]
        names: Vec<String>,
    },
    /// Extract the post-install module paths of one archive.
    Extract {
        archive: PathBuf,
        /// Also print content digests.
        #[arg(long)]
        digests: bool,
    },
    /// Resolve requirements into a dependency graph.
    Resolve {
        #[arg(required = true)]
        requirements: Vec<String>,
        /// Process requirements first-in-first-out instead of by priority.
        #[arg(long)]
        naive_order: bool,
    },
    /// Detect module conflicts.
    Scan {
        #[command(subcommand)]
        target: ScanTarget,
    },
    /// Compare an expected against an actual result
    /// (Correct / Miss / Excess / Error).
    Compare {
        expected: PathBuf,
        actual: PathBuf,
        /// Graph comparison granularity.
        #[arg(long, value_enum, default_value_t = LevelArg::Node)]
        level: LevelArg,
        /// Treat the two paths as directories of result files and aggregate
        /// accuracy.
        #[arg(long)]
        batch: bool,
    },
    /// Re-render a saved conflict report.
    Report { report: PathBuf },
}

#[derive(Debug, Subcommand)]
enum ScanTarget {
    /// Modules shadowing standard-library names: target is an archive path
    /// or an indexed package (name or name==version).
    Lib { target: String },
    /// Module collisions between unrelated packages; all latest index
    /// records when no names are given.
    Tpl { names: Vec<String> },
    /// Module collisions inside the dependency graph of the given
    /// requirements.
    Dep {
        #[arg(required = true)]
        requirements: Vec<String>,
    },
}

/// Run the command line against the given argument vector, writing stdout
/// content to `out`. Returns the process exit code.
pub fn run<W: Write>(args: &[String], out: &mut W) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and exit 0.
            if e.use_stderr() {
                eprintln!("{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return 2;
    }
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(CliError { message, code }) => {
            eprintln!("error: {message}");
            code
        }
    }
}

struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    fn new(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 1,
        }
    }

    fn with_code(message: impl Into<String>, code: i32) -> Self {
        CliError {
            message: message.into(),
            code,
        }
    }
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::new(e.to_string())
    }
}

fn dispatch<W: Write>(cli: &Cli, out: &mut W) -> Result<i32, CliError> {
    match &cli.command {
        Command::Ingest { archives } => cmd_ingest(cli, archives, out),
        Command::Fetch { url, names } => cmd_fetch(cli, url, names, out),
        Command::Extract { archive, digests } => cmd_extract(cli, archive, *digests, out),
        Command::Resolve {
            requirements,
            naive_order,
        } => cmd_resolve(cli, requirements, *naive_order, out),
        Command::Scan { target } => cmd_scan(cli, target, out),
        Command::Compare {
            expected,
            actual,
            level,
            batch,
        } => cmd_compare(cli, expected, actual, *level, *batch, out),
        Command::Report { report } => cmd_report(cli, report, out),
    }
}

fn open_store(cli: &Cli) -> Result<IndexStore, CliError> {
    let dir = cli.index.as_ref().ok_or_else(|| {
        CliError::new("no index directory; pass --index or set MODGUARD_INDEX")
    })?;
    Ok(IndexStore::open(dir)?)
}

fn environment(cli: &Cli) -> Result<EnvironmentProfile, CliError> {
    let mut env = EnvironmentProfile::default_linux();
    for pair in &cli.env_overrides {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::new(format!("--env {pair:?}: expected KEY=VALUE")))?;
        env.set(key, value)?;
    }
    Ok(env)
}

fn parse_requirements(texts: &[String]) -> Result<Vec<Requirement>, CliError> {
    texts
        .iter()
        .map(|t| parse_requirement(t).map_err(CliError::from))
        .collect()
}

fn resolve_options(cli: &Cli, naive_order: bool) -> ResolveOptions {
    ResolveOptions {
        order: if naive_order {
            OrderPolicy::Fifo
        } else {
            OrderPolicy::Prioritized
        },
        global_extras: cli.global_extras,
    }
}

fn cmd_ingest<W: Write>(cli: &Cli, archives: &[PathBuf], out: &mut W) -> Result<i32, CliError> {
    let mut store = open_store(cli)?;

    // Extraction is pure; spread it over workers and insert in input order.
    let inputs: Vec<(String, Vec<u8>)> = archives
        .iter()
        .map(|path| {
            let filename = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let bytes = std::fs::read(path)
                .map_err(|e| CliError::new(format!("{}: {e}", path.display())))?;
            Ok((filename, bytes))
        })
        .collect::<Result<_, CliError>>()?;

    let jobs = cli.jobs.min(inputs.len().max(1));
    let records: Vec<Result<PackageRecord, String>> = if jobs <= 1 {
        inputs
            .into_iter()
            .map(|(name, bytes)| kb::build_record(&name, bytes).map_err(|e| e.to_string()))
            .collect()
    } else {
        let inputs: Vec<_> = inputs.into_iter().enumerate().collect();
        let chunks: Vec<_> = inputs.chunks(inputs.len().div_ceil(jobs)).collect();
        let mut indexed: Vec<(usize, Result<PackageRecord, String>)> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = chunks
                    .into_iter()
                    .map(|chunk| {
                        scope.spawn(move || {
                            chunk
                                .iter()
                                .map(|(idx, (name, bytes))| {
                                    (
                                        *idx,
                                        kb::build_record(name, bytes.clone())
                                            .map_err(|e| e.to_string()),
                                    )
                                })
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("ingest worker panicked"))
                    .collect()
            });
        indexed.sort_by_key(|(idx, _)| *idx);
        indexed.into_iter().map(|(_, r)| r).collect()
    };

    let mut summaries = Vec::new();
    let mut failed = false;
    for (path, result) in archives.iter().zip(records) {
        match result {
            Ok(record) => {
                let inserted = store.insert_preferring(record.clone())?;
                summaries.push(serde_json::json!({
                    "source": path.file_name().map(|s| s.to_string_lossy().into_owned()),
                    "id": record.id(),
                    "kind": record.kind.to_string(),
                    "modules": record.modules.len(),
                    "incomplete": record.incomplete,
                    "stored": inserted,
                }));
            }
            Err(message) => {
                failed = true;
                eprintln!("error: {}: {message}", path.display());
            }
        }
    }

    match cli.format {
        Format::Json => {
            let doc = serde_json::json!({ "ingested": summaries });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
        Format::Text => {
            for summary in &summaries {
                writeln!(
                    out,
                    "ingested {} ({}, {} modules{}{})",
                    summary["id"].as_str().unwrap_or_default(),
                    summary["kind"].as_str().unwrap_or_default(),
                    summary["modules"],
                    if summary["incomplete"].as_bool().unwrap_or(false) {
                        ", incomplete"
                    } else {
                        ""
                    },
                    if summary["stored"].as_bool().unwrap_or(true) {
                        ""
                    } else {
                        ", kept existing record"
                    },
                )?;
            }
        }
    }
    Ok(if failed { 1 } else { 0 })
}

fn cmd_fetch<W: Write>(cli: &Cli, url: &str, names: &[String], out: &mut W) -> Result<i32, CliError> {
    let mut store = open_store(cli)?;
    let mut total = 0usize;
    let mut lines = Vec::new();
    for name in names {
        let project = normalize_name(name)?;
        let count = kb::fetch_remote(url, &project, &mut store)?;
        total += count;
        lines.push(serde_json::json!({ "name": project.normalized(), "new_records": count }));
    }
    match cli.format {
        Format::Json => {
            let doc = serde_json::json!({ "fetched": lines, "total_new_records": total });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
        Format::Text => {
            for line in &lines {
                writeln!(
                    out,
                    "{}: {} new records",
                    line["name"].as_str().unwrap_or_default(),
                    line["new_records"]
                )?;
            }
        }
    }
    Ok(0)
}

fn cmd_extract<W: Write>(
    cli: &Cli,
    archive_path: &Path,
    digests: bool,
    out: &mut W,
) -> Result<i32, CliError> {
    let mut archive =
        PackageArchive::from_path(archive_path).map_err(|e| CliError::new(e.to_string()))?;
    let modules = match sim::extract_modules(&mut archive) {
        Ok(modules) => modules,
        Err(sim::SimError::NoModuleEvidence) => {
            return Err(CliError::with_code(
                format!("{}: no source of module data", archive_path.display()),
                2,
            ))
        }
        Err(e) => return Err(CliError::new(e.to_string())),
    };
    match cli.format {
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&module_set_doc(&modules)).unwrap())?;
        }
        Format::Text => {
            for (path, digest) in modules.iter() {
                if digests {
                    writeln!(out, "{path},{digest}")?;
                } else {
                    writeln!(out, "{path}")?;
                }
            }
        }
    }
    Ok(0)
}

fn module_set_doc(modules: &ModuleSet) -> serde_json::Value {
    serde_json::json!({ "modules": modules })
}

fn cmd_resolve<W: Write>(
    cli: &Cli,
    requirements: &[String],
    naive_order: bool,
    out: &mut W,
) -> Result<i32, CliError> {
    let store = open_store(cli)?;
    let env = environment(cli)?;
    let roots = parse_requirements(requirements)?;
    let options = resolve_options(cli, naive_order);
    match resolver::resolve(&roots, &env, &store, &options) {
        Ok((graph, stats)) => {
            match cli.format {
                Format::Json => {
                    let doc = serde_json::json!({
                        "graph": graph.to_json(),
                        "stats": { "backtracks": stats.backtracks, "candidates_tried": stats.candidates_tried },
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
                }
                Format::Text => {
                    for id in graph.node_ids() {
                        writeln!(out, "{id}")?;
                    }
                    writeln!(out, "backtracks: {}", stats.backtracks)?;
                    writeln!(out, "candidates_tried: {}", stats.candidates_tried)?;
                }
            }
            Ok(0)
        }
        Err(e @ ResolveError::Unsat { .. }) | Err(e @ ResolveError::MissingPackage { .. }) => {
            Err(CliError::with_code(e.to_string(), 3))
        }
        Err(e) => Err(CliError::new(e.to_string())),
    }
}

/// Look up `name` or `name==version` in the store.
fn record_for_spec<'s>(store: &'s IndexStore, text: &str) -> Result<&'s PackageRecord, CliError> {
    let (name_text, version_text) = match text.split_once("==") {
        Some((n, v)) => (n, Some(v)),
        None => (text, None),
    };
    let name = normalize_name(name_text)?;
    let version = match version_text {
        Some(v) => parse_version(v)?,
        None => store
            .query_versions(&name)
            .into_iter()
            .next()
            .ok_or_else(|| CliError::new(format!("{name}: not in index")))?,
    };
    store
        .get(&name, &version)
        .ok_or_else(|| CliError::new(format!("{name}=={version}: not in index")))
}

fn cmd_scan<W: Write>(cli: &Cli, target: &ScanTarget, out: &mut W) -> Result<i32, CliError> {
    let findings: Vec<ConflictFinding> = match target {
        ScanTarget::Lib { target } => {
            let catalog = StdlibCatalog::bundled();
            let (modules, subject) = if Path::new(target).is_file() {
                let mut archive = PackageArchive::from_path(Path::new(target))?;
                let subject = archive.identity.clone().map(|(name, version)| {
                    Subject::Package {
                        name: name.normalized().to_string(),
                        version: version.to_string(),
                    }
                });
                (
                    sim::extract_modules(&mut archive).map_err(|e| CliError::new(e.to_string()))?,
                    subject,
                )
            } else {
                let store = open_store(cli)?;
                let record = record_for_spec(&store, target)?;
                (
                    record.modules.clone(),
                    Some(Subject::Package {
                        name: record.name.normalized().to_string(),
                        version: record.version.to_string(),
                    }),
                )
            };
            let mut findings = conflict::detect_module_to_lib(&modules, &catalog);
            // Attach the scanned package so reports are self-describing.
            if let Some(subject) = subject {
                for finding in &mut findings {
                    finding.subjects.insert(0, subject.clone());
                    finding.subjects.sort();
                }
            }
            findings
        }
        ScanTarget::Tpl { names } => {
            let store = open_store(cli)?;
            if names.is_empty() {
                conflict::detect_module_to_tpl(&store.latest_records(), cli.case_insensitive)
            } else {
                let records: Vec<&PackageRecord> = names
                    .iter()
                    .map(|name| record_for_spec(&store, name))
                    .collect::<Result<_, _>>()?;
                conflict::detect_module_to_tpl(&records, cli.case_insensitive)
            }
        }
        ScanTarget::Dep { requirements } => {
            let store = open_store(cli)?;
            let env = environment(cli)?;
            let roots = parse_requirements(requirements)?;
            let options = resolve_options(cli, false);
            let (graph, _) = resolver::resolve(&roots, &env, &store, &options)
                .map_err(|e| CliError::with_code(e.to_string(), 3))?;
            conflict::detect_module_in_dep(&graph, &store)?
        }
    };

    let report = conflict::summarize(&findings, 10);
    write_report(cli, &report, out)?;
    Ok(if findings.is_empty() { 0 } else { 1 })
}

fn write_report<W: Write>(cli: &Cli, report: &ConflictReport, out: &mut W) -> Result<(), CliError> {
    match cli.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(report).unwrap())?,
        Format::Text => write!(out, "{}", report.to_text())?,
    }
    Ok(())
}

/// A result file: either a module set or a dependency graph.
enum ResultDoc {
    Modules(BTreeSet<String>),
    Graph(DependencyGraph),
}

fn load_result_doc(path: &Path) -> Result<ResultDoc, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::with_code(format!("{}: {e}", path.display()), 2))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::with_code(format!("{}: not JSON: {e}", path.display()), 2))?;
    if let Some(modules) = value.get("modules") {
        let set: ModuleSet = serde_json::from_value(modules.clone())
            .map_err(|e| CliError::with_code(format!("{}: bad module set: {e}", path.display()), 2))?;
        return Ok(ResultDoc::Modules(
            set.paths().map(str::to_string).collect(),
        ));
    }
    if value.get("nodes").is_some() {
        let graph = DependencyGraph::from_json(&value)
            .map_err(|e| CliError::with_code(format!("{}: bad graph: {e}", path.display()), 2))?;
        return Ok(ResultDoc::Graph(graph));
    }
    Err(CliError::with_code(
        format!(
            "{}: unrecognized result document (expected modules or nodes)",
            path.display()
        ),
        2,
    ))
}

fn compare_docs(expected: &ResultDoc, actual: &ResultDoc, level: CompareLevel) -> Result<Metric, CliError> {
    match (expected, actual) {
        (ResultDoc::Modules(e), ResultDoc::Modules(a)) => Ok(compare_sets(e, a)),
        (ResultDoc::Graph(e), ResultDoc::Graph(a)) => Ok(compare_graphs(e, a, level)),
        _ => Err(CliError::with_code(
            "cannot compare a module set against a dependency graph",
            2,
        )),
    }
}

fn cmd_compare<W: Write>(
    cli: &Cli,
    expected: &Path,
    actual: &Path,
    level: LevelArg,
    batch: bool,
    out: &mut W,
) -> Result<i32, CliError> {
    let level = match level {
        LevelArg::Node => CompareLevel::Node,
        LevelArg::Edge => CompareLevel::Edge,
    };

    if !batch {
        let metric = compare_docs(&load_result_doc(expected)?, &load_result_doc(actual)?, level)?;
        match cli.format {
            Format::Json => writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({ "metric": metric })).unwrap()
            )?,
            Format::Text => writeln!(out, "{metric}")?,
        }
        return Ok(0);
    }

    // Batch mode: same-named *.json files in two directories.
    let list_dir = |dir: &Path| -> Result<BTreeSet<String>, CliError> {
        let mut names = BTreeSet::new();
        let entries = std::fs::read_dir(dir)
            .map_err(|e| CliError::with_code(format!("{}: {e}", dir.display()), 2))?;
        for entry in entries {
            let entry = entry.map_err(|e| CliError::new(e.to_string()))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.ends_with(".json") {
                names.insert(name);
            }
        }
        Ok(names)
    };
    let expected_names = list_dir(expected)?;
    let actual_names = list_dir(actual)?;
    let all_names: BTreeSet<String> = expected_names.union(&actual_names).cloned().collect();

    let mut results: BTreeMap<String, Metric> = BTreeMap::new();
    let mut correct = 0usize;
    for name in &all_names {
        let metric = if !expected_names.contains(name) {
            Metric::Excess
        } else if !actual_names.contains(name) {
            Metric::Miss
        } else {
            compare_docs(
                &load_result_doc(&expected.join(name))?,
                &load_result_doc(&actual.join(name))?,
                level,
            )?
        };
        if metric == Metric::Correct {
            correct += 1;
        }
        results.insert(name.clone(), metric);
    }
    let total = all_names.len();
    let accuracy = if total == 0 {
        "1.00".to_string()
    } else {
        format!("{:.2}", correct as f64 / total as f64)
    };

    match cli.format {
        Format::Json => {
            let doc = serde_json::json!({
                "results": results,
                "correct": correct,
                "total": total,
                "accuracy": accuracy,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
        Format::Text => {
            for (name, metric) in &results {
                writeln!(out, "{name}: {metric}")?;
            }
            writeln!(out, "accuracy: {correct}/{total} = {accuracy}")?;
        }
    }
    Ok(0)
}

fn cmd_report<W: Write>(cli: &Cli, report_path: &Path, out: &mut W) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| CliError::with_code(format!("{}: {e}", report_path.display()), 2))?;
    let report: ConflictReport = serde_json::from_str(&text)
        .map_err(|e| CliError::with_code(format!("{}: bad report: {e}", report_path.display()), 2))?;
    write_report(cli, &report, out)?;
    Ok(if report.findings.is_empty() { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::presets;

    pub(crate) fn run_cli(args: &[&str]) -> (i32, String) {
        let mut argv = vec!["modguard".to_string()];
        argv.extend(args.iter().map(|s| s.to_string()));
        let mut out = Vec::new();
        let code = run(&argv, &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    fn write_fixture(dir: &Path, spec: &crate::fixtures::FixtureSpec) -> PathBuf {
        let path = dir.join(spec.filename());
        std::fs::write(&path, spec.build().unwrap()).unwrap();
        path
    }

    #[test]
    fn extract_prints_sorted_paths_and_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_fixture(dir.path(), &presets::pugs_sdist());
        let (code, output) = run_cli(&["extract", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = output.lines().collect();
        assert_eq!(lines, presets::pugs_expected_modules());

        // An archive with no evidence at all (no metadata, no config) exits 2.
        let empty = dir.path().join("empty-1.0.tar.gz");
        let bytes =
            crate::archive::testutil::tar_gz_bytes(&[("empty-1.0/README", b"just a readme\n")]);
        std::fs::write(&empty, bytes).unwrap();
        let (code, _) = run_cli(&["extract", empty.to_str().unwrap()]);
        assert_eq!(code, 2);
    }

    #[test]
    fn ingest_resolve_scan_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let index = dir.path().join("idx");
        let mut paths = Vec::new();
        for spec in presets::cv2_conflict_index() {
            paths.push(write_fixture(dir.path(), &spec));
        }
        let mut args = vec!["--index", index.to_str().unwrap(), "ingest"];
        let path_strs: Vec<String> = paths
            .iter()
            .map(|p| p.to_str().unwrap().to_string())
            .collect();
        args.extend(path_strs.iter().map(String::as_str));
        let (code, output) = run_cli(&args);
        assert_eq!(code, 0, "{output}");
        assert_eq!(output.lines().count(), 3);

        let (code, output) = run_cli(&[
            "--index",
            index.to_str().unwrap(),
            "--format",
            "json",
            "resolve",
            "emoca==1.0",
        ]);
        assert_eq!(code, 0, "{output}");
        let doc: serde_json::Value = serde_json::from_str(&output).unwrap();
        assert_eq!(doc["stats"]["backtracks"], 0);

        let (code, output) = run_cli(&[
            "--index",
            index.to_str().unwrap(),
            "scan",
            "dep",
            "emoca==1.0",
        ]);
        assert_eq!(code, 1, "{output}");
        assert!(output.contains("module-in-dep"));
        assert!(output.contains("cv2/__init__.py"));
    }

    #[test]
    fn scan_lib_on_archive_and_exit_zero_when_clean() {
        let dir = tempfile::tempdir().unwrap();
        let shadow = write_fixture(dir.path(), &presets::stdlib_shadow());
        let (code, output) = run_cli(&["scan", "lib", shadow.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(output.contains("module-to-lib"));
        assert!(output.contains("json"));
        assert!(output.contains("parser"));

        let clean = write_fixture(dir.path(), &presets::demo_wheel());
        let (code, _) = run_cli(&["scan", "lib", clean.to_str().unwrap()]);
        assert_eq!(code, 0);
    }

    #[test]
    fn compare_module_files_and_graphs() {
        let dir = tempfile::tempdir().unwrap();
        let mut ms = ModuleSet::new();
        ms.insert("a.py", "");
        ms.insert("b/c.py", "");
        let expected_doc = serde_json::to_string(&module_set_doc(&ms)).unwrap();
        ms.remove("b/c.py");
        let actual_doc = serde_json::to_string(&module_set_doc(&ms)).unwrap();

        let expected = dir.path().join("expected.json");
        let actual = dir.path().join("actual.json");
        std::fs::write(&expected, &expected_doc).unwrap();
        std::fs::write(&actual, &actual_doc).unwrap();

        let (code, output) = run_cli(&[
            "compare",
            expected.to_str().unwrap(),
            actual.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert_eq!(output.trim(), "Miss");

        let (code, output) = run_cli(&[
            "compare",
            expected.to_str().unwrap(),
            expected.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert_eq!(output.trim(), "Correct");

        // Mixing document kinds is a format mismatch.
        let graph = DependencyGraph::default();
        let graph_file = dir.path().join("graph.json");
        std::fs::write(&graph_file, serde_json::to_string(&graph.to_json()).unwrap()).unwrap();
        let (code, _) = run_cli(&[
            "compare",
            expected.to_str().unwrap(),
            graph_file.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn batch_compare_accuracy() {
        let dir = tempfile::tempdir().unwrap();
        let expected_dir = dir.path().join("expected");
        let actual_dir = dir.path().join("actual");
        std::fs::create_dir_all(&expected_dir).unwrap();
        std::fs::create_dir_all(&actual_dir).unwrap();

        let mut ms = ModuleSet::new();
        ms.insert("a.py", "");
        let doc = serde_json::to_string(&module_set_doc(&ms)).unwrap();
        for name in ["one.json", "two.json"] {
            std::fs::write(expected_dir.join(name), &doc).unwrap();
            std::fs::write(actual_dir.join(name), &doc).unwrap();
        }

        let (code, output) = run_cli(&[
            "--format",
            "json",
            "compare",
            "--batch",
            expected_dir.to_str().unwrap(),
            actual_dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{output}");
        let doc: serde_json::Value = serde_json::from_str(&output).unwrap();
        assert_eq!(doc["accuracy"], "1.00");
        assert_eq!(doc["total"], 2);
    }

    #[test]
    fn resolve_unsat_exits_three() {
        let dir = tempfile::tempdir().unwrap();
        let index = dir.path().join("idx");
        let spec = crate::fixtures::FixtureSpec::new(
            "lonely",
            "1.0",
            crate::archive::DistributionKind::Wheel,
        );
        let path = write_fixture(dir.path(), &spec);
        let (code, _) = run_cli(&[
            "--index",
            index.to_str().unwrap(),
            "ingest",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let (code, _) = run_cli(&[
            "--index",
            index.to_str().unwrap(),
            "resolve",
            "lonely==2.0",
        ]);
        assert_eq!(code, 3);
    }

    #[test]
    fn env_override_changes_resolution() {
        let dir = tempfile::tempdir().unwrap();
        let index = dir.path().join("idx");
        let mut args: Vec<String> = vec![
            "--index".to_string(),
            index.to_str().unwrap().to_string(),
            "ingest".to_string(),
        ];
        for spec in presets::versioneer_index() {
            args.push(write_fixture(dir.path(), &spec).to_str().unwrap().to_string());
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, _) = run_cli(&args);
        assert_eq!(code, 0);

        let (_, with_310) = run_cli(&[
            "--index",
            index.to_str().unwrap(),
            "resolve",
            "versioneer",
        ]);
        assert!(!with_310.contains("numpy"));

        let (_, with_39) = run_cli(&[
            "--index",
            index.to_str().unwrap(),
            "--env",
            "python_version=3.9",
            "resolve",
            "versioneer",
        ]);
        assert!(with_39.contains("numpy==1.24.0"));

        let (code, _) = run_cli(&[
            "--index",
            index.to_str().unwrap(),
            "--env",
            "nonsense=1",
            "resolve",
            "versioneer",
        ]);
        assert_eq!(code, 1);
    }

    #[test]
    fn report_rerenders_scan_output() {
        let dir = tempfile::tempdir().unwrap();
        let index = dir.path().join("idx");
        let mut args: Vec<String> = vec![
            "--index".to_string(),
            index.to_str().unwrap().to_string(),
            "ingest".to_string(),
        ];
        for spec in presets::jwt_pair() {
            args.push(write_fixture(dir.path(), &spec).to_str().unwrap().to_string());
        }
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        run_cli(&argv);

        let (code, json_output) = run_cli(&[
            "--index",
            index.to_str().unwrap(),
            "--format",
            "json",
            "scan",
            "tpl",
        ]);
        assert_eq!(code, 1);
        let report_file = dir.path().join("report.json");
        std::fs::write(&report_file, &json_output).unwrap();

        let (code, text_output) = run_cli(&["report", report_file.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(text_output.contains("module-to-tpl"));
        assert!(text_output.contains("jwt/exceptions.py"));
    }
}
