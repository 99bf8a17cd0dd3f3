//! The local knowledge base: a persistent index of package records keyed by
//! (project, version), populated by ingesting archives and optionally by
//! fetching from a simple-repository endpoint.
//!
//! Records persist as one JSON document per release under
//! `index/{name}/{version}.json`, chosen for diff-ability.

use crate::archive::{parse_archive_filename, ArchiveError, DistributionKind, PackageArchive};
use crate::pep::{ProjectName, Requirement, Version};
use crate::sim::{self, ModuleSet};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbError {
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("network error: {0}")]
    NetworkError(String),
    #[error("index format error: {0}")]
    IndexFormatError(String),
    #[error("store error: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything the analyses need to know about one release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageRecord {
    pub name: ProjectName,
    pub version: Version,
    pub kind: DistributionKind,
    pub modules: ModuleSet,
    pub install: Vec<Requirement>,
    pub extras: BTreeMap<String, Vec<Requirement>>,
    pub source_file: String,
    /// True when extraction failed and the record carries partial data.
    #[serde(default)]
    pub incomplete: bool,
}

impl PackageRecord {
    /// `name==version` identifier used in graphs and reports.
    pub fn id(&self) -> String {
        format!("{}=={}", self.name.normalized(), self.version)
    }
}

/// Local package index: an in-memory map with optional write-through
/// persistence. Many readers may share a loaded store; ingestion takes
/// `&mut self`.
#[derive(Debug, Default)]
pub struct IndexStore {
    dir: Option<PathBuf>,
    records: BTreeMap<String, BTreeMap<Version, PackageRecord>>,
}

impl IndexStore {
    /// A store that lives only in memory.
    pub fn in_memory() -> Self {
        IndexStore::default()
    }

    /// Open (creating if needed) a store rooted at `dir`; records live under
    /// `dir/index/{name}/{version}.json`.
    pub fn open(dir: &Path) -> Result<Self, KbError> {
        let index_dir = dir.join("index");
        std::fs::create_dir_all(&index_dir)?;
        let mut store = IndexStore {
            dir: Some(dir.to_path_buf()),
            records: BTreeMap::new(),
        };
        for project_entry in std::fs::read_dir(&index_dir)? {
            let project_entry = project_entry?;
            if !project_entry.file_type()?.is_dir() {
                continue;
            }
            for file_entry in std::fs::read_dir(project_entry.path())? {
                let path = file_entry?.path();
                if path.extension().is_none_or(|e| e != "json") {
                    continue;
                }
                let text = std::fs::read_to_string(&path)?;
                let record: PackageRecord = serde_json::from_str(&text)
                    .map_err(|e| KbError::Store(format!("{}: {e}", path.display())))?;
                store
                    .records
                    .entry(record.name.normalized().to_string())
                    .or_default()
                    .insert(record.version.clone(), record);
            }
        }
        Ok(store)
    }

    pub fn record_count(&self) -> usize {
        self.records.values().map(BTreeMap::len).sum()
    }

    pub fn project_names(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    /// All versions of a project, strictly descending.
    pub fn query_versions(&self, name: &ProjectName) -> Vec<Version> {
        match self.records.get(name.normalized()) {
            Some(versions) => versions.keys().rev().cloned().collect(),
            None => Vec::new(),
        }
    }

    pub fn get(&self, name: &ProjectName, version: &Version) -> Option<&PackageRecord> {
        self.records.get(name.normalized())?.get(version)
    }

    /// The newest record of each project.
    pub fn latest_records(&self) -> Vec<&PackageRecord> {
        self.records
            .values()
            .filter_map(|versions| versions.values().next_back())
            .collect()
    }

    fn record_path(&self, record: &PackageRecord) -> Option<PathBuf> {
        self.dir.as_ref().map(|dir| {
            dir.join("index")
                .join(record.name.normalized())
                .join(format!("{}.json", record.version))
        })
    }

    /// Insert a record directly, persisting when the store is disk-backed.
    pub fn insert(&mut self, record: PackageRecord) -> Result<(), KbError> {
        if let Some(path) = self.record_path(&record) {
            std::fs::create_dir_all(path.parent().unwrap())?;
            let json = serde_json::to_string_pretty(&record)
                .map_err(|e| KbError::Store(e.to_string()))?;
            std::fs::write(&path, json + "\n")?;
        }
        self.records
            .entry(record.name.normalized().to_string())
            .or_default()
            .insert(record.version.clone(), record);
        Ok(())
    }

    /// Remove a release, keeping the index consistent with deletions
    /// upstream.
    pub fn delete(&mut self, name: &ProjectName, version: &Version) -> Result<bool, KbError> {
        let Some(versions) = self.records.get_mut(name.normalized()) else {
            return Ok(false);
        };
        let Some(record) = versions.remove(version) else {
            return Ok(false);
        };
        if versions.is_empty() {
            self.records.remove(name.normalized());
        }
        if let Some(path) = self.record_path(&record) {
            if path.exists() {
                std::fs::remove_file(path)?;
            }
        }
        Ok(true)
    }

    /// Ingest an archive from raw bytes: extract modules and dependencies,
    /// then store the record. Re-ingesting the same release replaces the
    /// record only when the new distribution kind is preferred
    /// (wheel > tar.gz sdist > zip sdist > egg). Extraction failures
    /// downgrade to a record flagged incomplete.
    pub fn ingest_bytes(&mut self, filename: &str, bytes: Vec<u8>) -> Result<PackageRecord, KbError> {
        let (name, version, kind) = parse_archive_filename(filename)?;
        if let Some(existing) = self.get(&name, &version) {
            if existing.kind.preference() > kind.preference() {
                log::info!(
                    "keeping existing {} record for {}=={}",
                    existing.kind,
                    name,
                    version
                );
                return Ok(existing.clone());
            }
        }
        let record = build_record(filename, bytes)?;
        self.insert(record.clone())?;
        Ok(record)
    }

    /// Insert a record honoring the distribution-kind preference rule.
    /// Returns false when an existing preferred record was kept.
    pub fn insert_preferring(&mut self, record: PackageRecord) -> Result<bool, KbError> {
        if let Some(existing) = self.get(&record.name, &record.version) {
            if existing.kind.preference() > record.kind.preference() {
                return Ok(false);
            }
        }
        self.insert(record)?;
        Ok(true)
    }

    /// Ingest an archive file from disk.
    pub fn ingest(&mut self, path: &Path) -> Result<PackageRecord, KbError> {
        let filename = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let bytes = std::fs::read(path)?;
        self.ingest_bytes(&filename, bytes)
    }
}

/// Extract a full record from archive bytes without touching any store.
/// Pure, so archives can be processed on worker threads and inserted
/// afterwards.
pub fn build_record(filename: &str, bytes: Vec<u8>) -> Result<PackageRecord, KbError> {
    let (name, version, kind) = parse_archive_filename(filename)?;
    let mut archive = PackageArchive::from_bytes(filename, bytes)?;
    let mut incomplete = false;
    let modules = match sim::extract_modules(&mut archive) {
        Ok(modules) => modules,
        Err(e) => {
            log::warn!("{filename}: module extraction failed: {e}");
            incomplete = true;
            ModuleSet::new()
        }
    };
    let deps = match sim::extract_dependencies(&mut archive) {
        Ok(deps) => deps,
        Err(e) => {
            log::warn!("{filename}: dependency extraction failed: {e}");
            incomplete = true;
            Default::default()
        }
    };
    Ok(PackageRecord {
        name,
        version,
        kind,
        modules,
        install: deps.install,
        extras: deps.extras,
        source_file: filename.rsplit('/').next().unwrap_or(filename).to_string(),
        incomplete,
    })
}

/// One downloadable file advertised by a simple-repository project page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexFile {
    pub filename: String,
    pub url: String,
}

/// Fetch all distributions of a project from a simple-repository index and
/// ingest the ones not present yet. Returns the number of new records.
/// A missing project page (404) is a warning, not an error.
pub fn fetch_remote(
    index_url: &str,
    name: &ProjectName,
    store: &mut IndexStore,
) -> Result<usize, KbError> {
    let page_url = format!(
        "{}/{}/",
        index_url.trim_end_matches('/'),
        name.normalized()
    );
    let response = match http_get(&page_url)? {
        HttpResponse { status: 404, .. } => {
            log::warn!("project {name} not found at {page_url}");
            return Ok(0);
        }
        response if response.status != 200 => {
            return Err(KbError::NetworkError(format!(
                "{page_url}: HTTP status {}",
                response.status
            )));
        }
        response => response,
    };

    let body = String::from_utf8_lossy(&response.body).into_owned();
    let mut files = parse_index_page(&body)?;
    // Wheels first so the preferred distribution lands when several exist.
    files.sort_by_key(|f| {
        let preference = parse_archive_filename(&f.filename)
            .map(|(_, _, kind)| kind.preference())
            .unwrap_or(0);
        (std::cmp::Reverse(preference), f.filename.clone())
    });

    let mut new_records = 0;
    for file in files {
        let Ok((file_name, file_version, _)) = parse_archive_filename(&file.filename) else {
            log::warn!("skipping unrecognized index entry {:?}", file.filename);
            continue;
        };
        if store.get(&file_name, &file_version).is_some() {
            continue;
        }
        let file_url = join_url(&page_url, &file.url);
        let response = http_get(&file_url)?;
        if response.status != 200 {
            log::warn!("{file_url}: HTTP status {}", response.status);
            continue;
        }
        store.ingest_bytes(&file.filename, response.body)?;
        new_records += 1;
    }
    Ok(new_records)
}

/// Parse a simple-repository project page: either the JSON form
/// (`{"files": [{"filename", "url"}]}`) or the anchor-list HTML form.
pub fn parse_index_page(body: &str) -> Result<Vec<IndexFile>, KbError> {
    let trimmed = body.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(trimmed)
            .map_err(|e| KbError::IndexFormatError(format!("bad JSON index: {e}")))?;
        let files = value
            .get("files")
            .and_then(|f| f.as_array())
            .ok_or_else(|| KbError::IndexFormatError("JSON index missing files array".into()))?;
        let mut out = Vec::new();
        for file in files {
            let filename = file
                .get("filename")
                .and_then(|v| v.as_str())
                .ok_or_else(|| KbError::IndexFormatError("file entry missing filename".into()))?;
            let url = file
                .get("url")
                .and_then(|v| v.as_str())
                .unwrap_or(filename);
            out.push(IndexFile {
                filename: filename.to_string(),
                url: url.to_string(),
            });
        }
        return Ok(out);
    }

    // Anchor-list HTML: every <a href="URL">TEXT</a> is one file.
    let mut out = Vec::new();
    let mut rest = body;
    while let Some(anchor_start) = rest.find("<a ") {
        rest = &rest[anchor_start..];
        let Some(tag_end) = rest.find('>') else { break };
        let tag = &rest[..tag_end];
        let href = tag.find("href=").and_then(|i| {
            let after = &tag[i + 5..];
            let quote = after.chars().next()?;
            if quote != '"' && quote != '\'' {
                return None;
            }
            after[1..].find(quote).map(|end| after[1..1 + end].to_string())
        });
        rest = &rest[tag_end + 1..];
        let text_end = rest.find("</a>").unwrap_or(rest.len());
        let text = rest[..text_end].trim().to_string();
        rest = &rest[text_end.min(rest.len())..];

        if let Some(href) = href {
            let url = href.split('#').next().unwrap_or(&href).to_string();
            let filename = if text.is_empty() {
                url.rsplit('/').next().unwrap_or(&url).to_string()
            } else {
                text
            };
            out.push(IndexFile { filename, url });
        }
    }
    if out.is_empty() && !body.contains("<html") && !body.contains("<!DOCTYPE") {
        return Err(KbError::IndexFormatError(
            "response is neither a JSON index nor an anchor list".into(),
        ));
    }
    Ok(out)
}

/// Resolve a possibly relative URL against the page it came from.
fn join_url(page_url: &str, href: &str) -> String {
    if href.starts_with("http://") || href.starts_with("https://") {
        return href.to_string();
    }
    let (scheme_host, path) = split_url_path(page_url);
    if let Some(absolute) = href.strip_prefix('/') {
        return format!("{scheme_host}/{absolute}");
    }
    // Relative: resolve against the page directory, handling `..`.
    let mut segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    for part in href.split('/') {
        match part {
            "" | "." => {}
            ".." => {
                segments.pop();
            }
            other => segments.push(other),
        }
    }
    format!("{scheme_host}/{}", segments.join("/"))
}

fn split_url_path(url: &str) -> (&str, &str) {
    let after_scheme = url.find("://").map(|i| i + 3).unwrap_or(0);
    match url[after_scheme..].find('/') {
        Some(i) => url.split_at(after_scheme + i),
        None => (url, ""),
    }
}

struct HttpResponse {
    status: u16,
    body: Vec<u8>,
}

/// Minimal HTTP/1.0 GET over a TCP stream, following up to three redirects.
/// Plain `http://` only: the fetch path targets local mirrors and test
/// servers; TLS endpoints are reported as unsupported.
fn http_get(url: &str) -> Result<HttpResponse, KbError> {
    let mut current = url.to_string();
    for _ in 0..=3 {
        let rest = if let Some(rest) = current.strip_prefix("http://") {
            rest
        } else if current.starts_with("https://") {
            return Err(KbError::NetworkError(format!(
                "{current}: https is not supported; use a plain-http mirror"
            )));
        } else {
            return Err(KbError::NetworkError(format!("{current}: not an http URL")));
        };

        let (host_port, path) = match rest.find('/') {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, "/"),
        };
        let address = if host_port.contains(':') {
            host_port.to_string()
        } else {
            format!("{host_port}:80")
        };

        let mut stream = TcpStream::connect(&address)
            .map_err(|e| KbError::NetworkError(format!("{address}: {e}")))?;
        let request = format!(
            "GET {path} HTTP/1.0\r\nHost: {host_port}\r\nAccept: */*\r\nUser-Agent: modguard/0.1\r\nConnection: close\r\n\r\n"
        );
        stream
            .write_all(request.as_bytes())
            .map_err(|e| KbError::NetworkError(e.to_string()))?;

        let mut raw = Vec::new();
        stream
            .read_to_end(&mut raw)
            .map_err(|e| KbError::NetworkError(e.to_string()))?;

        let header_end = raw
            .windows(4)
            .position(|w| w == b"\r\n\r\n")
            .ok_or_else(|| KbError::NetworkError("malformed HTTP response".into()))?;
        let headers = String::from_utf8_lossy(&raw[..header_end]).into_owned();
        let body = raw[header_end + 4..].to_vec();

        let status: u16 = headers
            .lines()
            .next()
            .and_then(|line| line.split_whitespace().nth(1))
            .and_then(|code| code.parse().ok())
            .ok_or_else(|| KbError::NetworkError("malformed HTTP status line".into()))?;

        if (300..400).contains(&status) {
            let location = headers
                .lines()
                .find_map(|line| {
                    let (name, value) = line.split_once(':')?;
                    name.trim()
                        .eq_ignore_ascii_case("location")
                        .then(|| value.trim().to_string())
                })
                .ok_or_else(|| KbError::NetworkError("redirect without Location".into()))?;
            current = join_url(&current, &location);
            continue;
        }
        return Ok(HttpResponse { status, body });
    }
    Err(KbError::NetworkError("too many redirects".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{presets, FixtureSpec};
    use crate::pep::{normalize_name, parse_version};

    fn ingest_spec(store: &mut IndexStore, spec: &FixtureSpec) -> PackageRecord {
        store
            .ingest_bytes(&spec.filename(), spec.build().unwrap())
            .unwrap()
    }

    #[test]
    fn ingest_wheel_records_modules_and_deps() {
        let mut store = IndexStore::in_memory();
        let record = ingest_spec(&mut store, &presets::demo_wheel());
        assert_eq!(record.id(), "pkg==0.0.1");
        assert_eq!(
            record.modules.paths().collect::<Vec<_>>(),
            vec!["mod1/__init__.py", "mod2.py"]
        );
        assert!(!record.incomplete);
    }

    #[test]
    fn query_versions_descending_and_deletion() {
        let mut store = IndexStore::in_memory();
        for version in ["1.0", "1.1", "1.2"] {
            let mut spec = FixtureSpec::new("demo", version, DistributionKind::Wheel);
            spec.files
                .insert("demo/__init__.py".to_string(), format!("v = \"{version}\"\n"));
            ingest_spec(&mut store, &spec);
        }
        let name = normalize_name("demo").unwrap();
        let rendered: Vec<String> = store
            .query_versions(&name)
            .iter()
            .map(Version::to_string)
            .collect();
        assert_eq!(rendered, vec!["1.2", "1.1", "1.0"]);

        assert!(store
            .delete(&name, &parse_version("1.2").unwrap())
            .unwrap());
        let rendered: Vec<String> = store
            .query_versions(&name)
            .iter()
            .map(Version::to_string)
            .collect();
        assert_eq!(rendered, vec!["1.1", "1.0"]);
        assert!(store
            .query_versions(&normalize_name("unknown").unwrap())
            .is_empty());
    }

    #[test]
    fn wheel_replaces_sdist_but_not_vice_versa() {
        let mut store = IndexStore::in_memory();
        let mut sdist = FixtureSpec::new("demo", "1.0", DistributionKind::SdistTarGz);
        sdist
            .files
            .insert("demo/__init__.py".to_string(), String::new());
        sdist.packages = Some(crate::fixtures::PackagesDecl::List(vec!["demo".to_string()]));
        ingest_spec(&mut store, &sdist);

        let mut wheel = FixtureSpec::new("demo", "1.0", DistributionKind::Wheel);
        wheel
            .files
            .insert("demo/__init__.py".to_string(), String::new());
        ingest_spec(&mut store, &wheel);

        let name = normalize_name("demo").unwrap();
        let version = parse_version("1.0").unwrap();
        assert_eq!(store.get(&name, &version).unwrap().kind, DistributionKind::Wheel);

        // Re-ingesting the sdist must not displace the wheel record.
        ingest_spec(&mut store, &sdist);
        assert_eq!(store.get(&name, &version).unwrap().kind, DistributionKind::Wheel);
    }

    #[test]
    fn unparseable_filename_is_rejected() {
        let mut store = IndexStore::in_memory();
        let result = store.ingest_bytes("noversion.whl", vec![]);
        assert!(matches!(
            result,
            Err(KbError::Archive(ArchiveError::NameVersionUnparseable(_)))
        ));
    }

    #[test]
    fn ingest_is_deterministic() {
        let spec = presets::pugs_sdist();
        let bytes = spec.build().unwrap();
        let mut store_a = IndexStore::in_memory();
        let mut store_b = IndexStore::in_memory();
        let a = store_a.ingest_bytes(&spec.filename(), bytes.clone()).unwrap();
        let b = store_b.ingest_bytes(&spec.filename(), bytes).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn store_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = IndexStore::open(dir.path()).unwrap();
        ingest_spec(&mut store, &presets::demo_wheel());
        ingest_spec(&mut store, &presets::pugs_sdist());

        let reloaded = IndexStore::open(dir.path()).unwrap();
        assert_eq!(reloaded.record_count(), 2);
        let name = normalize_name("pugs").unwrap();
        assert_eq!(
            store.query_versions(&name),
            reloaded.query_versions(&name)
        );
        let version = parse_version("0.0.1").unwrap();
        assert_eq!(
            store.get(&name, &version).unwrap(),
            reloaded.get(&name, &version).unwrap()
        );
    }

    #[test]
    fn parses_html_and_json_index_pages() {
        let html = r#"<!DOCTYPE html><html><body>
<a href="../../packages/demo-1.0-py3-none-any.whl#sha256=abc">demo-1.0-py3-none-any.whl</a><br/>
<a href="/packages/demo-1.1.tar.gz">demo-1.1.tar.gz</a>
</body></html>"#;
        let files = parse_index_page(html).unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(files[0].filename, "demo-1.0-py3-none-any.whl");
        assert_eq!(files[0].url, "../../packages/demo-1.0-py3-none-any.whl");

        let json = r#"{"files": [{"filename": "demo-1.0-py3-none-any.whl", "url": "http://x/demo-1.0-py3-none-any.whl"}]}"#;
        let files = parse_index_page(json).unwrap();
        assert_eq!(files.len(), 1);

        assert!(parse_index_page("plain text").is_err());
    }

    #[test]
    fn url_joining() {
        assert_eq!(
            join_url("http://host:9000/simple/demo/", "../../packages/f.whl"),
            "http://host:9000/packages/f.whl"
        );
        assert_eq!(
            join_url("http://host/simple/demo/", "/packages/f.whl"),
            "http://host/packages/f.whl"
        );
        assert_eq!(
            join_url("http://host/simple/demo/", "http://other/f.whl"),
            "http://other/f.whl"
        );
        assert_eq!(
            join_url("http://host/simple/demo/", "f.whl"),
            "http://host/simple/demo/f.whl"
        );
    }
}
