//! Lazy access to Python distribution archives: classification by filename,
//! entry listing without decompressing file contents, selective reads, and
//! conversion of the file structure into a [`VirtualFileTree`].
//!
//! Only in-memory byte buffers go in; nothing here writes to disk.

use crate::pep::{normalize_name, parse_version, ProjectName, Version};
use crate::sim::tree::{PathConflict, VirtualFileTree};
use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::io::{Cursor, Read};
use thiserror::Error;
use zip::ZipArchive;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("unknown distribution suffix on {0:?}")]
    UnknownDistribution(String),
    #[error("corrupt archive: {0}")]
    CorruptArchive(String),
    #[error("truncated archive: {0}")]
    TruncatedArchive(String),
    #[error("entry {0:?} not found in archive")]
    EntryNotFound(String),
    #[error("{0}")]
    PathConflict(#[from] PathConflict),
    #[error("cannot parse name and version from filename {0:?}")]
    NameVersionUnparseable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Distribution kind, determined solely by the archive filename suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Wheel,
    SdistTarGz,
    SdistZip,
    Egg,
}

impl DistributionKind {
    /// Preference when several distributions exist for one release; higher
    /// wins.
    pub fn preference(self) -> u8 {
        match self {
            DistributionKind::Wheel => 3,
            DistributionKind::SdistTarGz => 2,
            DistributionKind::SdistZip => 1,
            DistributionKind::Egg => 0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            DistributionKind::Wheel => ".whl",
            DistributionKind::SdistTarGz => ".tar.gz",
            DistributionKind::SdistZip => ".zip",
            DistributionKind::Egg => ".egg",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DistributionKind::Wheel => "wheel",
            DistributionKind::SdistTarGz => "sdist-tar-gz",
            DistributionKind::SdistZip => "sdist-zip",
            DistributionKind::Egg => "egg",
        };
        f.write_str(s)
    }
}

/// Classify an archive by filename suffix.
pub fn classify_distribution(filename: &str) -> Result<DistributionKind, ArchiveError> {
    if filename.ends_with(".whl") {
        Ok(DistributionKind::Wheel)
    } else if filename.ends_with(".tar.gz") {
        Ok(DistributionKind::SdistTarGz)
    } else if filename.ends_with(".zip") {
        Ok(DistributionKind::SdistZip)
    } else if filename.ends_with(".egg") {
        Ok(DistributionKind::Egg)
    } else {
        Err(ArchiveError::UnknownDistribution(filename.to_string()))
    }
}

/// Parse `(name, version, kind)` from a distribution filename following the
/// wheel / sdist / egg naming conventions.
pub fn parse_archive_filename(
    filename: &str,
) -> Result<(ProjectName, Version, DistributionKind), ArchiveError> {
    let base = filename.rsplit('/').next().unwrap_or(filename);
    let kind = classify_distribution(base)?;
    let unparseable = || ArchiveError::NameVersionUnparseable(base.to_string());
    let stem = base.strip_suffix(kind.suffix()).ok_or_else(unparseable)?;

    match kind {
        DistributionKind::Wheel => {
            // name-version-pytag-abitag-platform(.whl); name escapes `-` as `_`.
            let parts: Vec<&str> = stem.split('-').collect();
            if parts.len() < 5 {
                return Err(unparseable());
            }
            let name = normalize_name(parts[0]).map_err(|_| unparseable())?;
            let version = parse_version(parts[1]).map_err(|_| unparseable())?;
            Ok((name, version, kind))
        }
        _ => {
            // name-version where name may itself contain dashes: scan the
            // dash positions right to left for the first parseable version.
            let mut stem = stem;
            if kind == DistributionKind::Egg {
                // Strip an optional trailing python tag: name-1.0-py3.10.egg
                if let Some(idx) = stem.rfind('-') {
                    if stem[idx + 1..].starts_with("py") {
                        stem = &stem[..idx];
                    }
                }
            }
            for (idx, _) in stem.match_indices('-').collect::<Vec<_>>().into_iter().rev() {
                let (name_part, version_part) = (&stem[..idx], &stem[idx + 1..]);
                if let (Ok(name), Ok(version)) =
                    (normalize_name(name_part), parse_version(version_part))
                {
                    return Ok((name, version, kind));
                }
            }
            Err(unparseable())
        }
    }
}

/// A single entry of an archive listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveEntry {
    pub path: String,
    pub size: u64,
    pub is_directory: bool,
}

enum Backend {
    Zip(Box<ZipArchive<Cursor<Vec<u8>>>>),
    TarGz(Vec<u8>),
}

/// An opened package archive: classified kind, materialized entry list, and
/// a selective reader. Listing never decompresses file contents; reads are
/// bounded by the declared entry size.
pub struct PackageArchive {
    pub kind: DistributionKind,
    /// Project identity parsed from the source filename, when available.
    pub identity: Option<(ProjectName, Version)>,
    /// The filename this archive was opened from, when known.
    pub source_name: Option<String>,
    entries: Vec<ArchiveEntry>,
    backend: Backend,
}

fn sanitize_path(raw: &str) -> Result<(String, bool), ArchiveError> {
    let normalized = raw.replace('\\', "/");
    let is_dir = normalized.ends_with('/');
    let mut parts = Vec::new();
    for seg in normalized.split('/') {
        match seg {
            "" | "." => continue,
            ".." => {
                return Err(ArchiveError::CorruptArchive(format!(
                    "entry path {raw:?} contains '..'"
                )))
            }
            s => parts.push(s),
        }
    }
    Ok((parts.join("/"), is_dir))
}

fn map_zip_error(err: zip::result::ZipError) -> ArchiveError {
    match err {
        zip::result::ZipError::Io(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            ArchiveError::TruncatedArchive(e.to_string())
        }
        other => ArchiveError::CorruptArchive(other.to_string()),
    }
}

fn map_tar_error(err: std::io::Error) -> ArchiveError {
    if err.kind() == std::io::ErrorKind::UnexpectedEof {
        ArchiveError::TruncatedArchive(err.to_string())
    } else {
        ArchiveError::CorruptArchive(err.to_string())
    }
}

/// Open an archive from an in-memory buffer. The entry list is materialized
/// up front; file contents stay compressed until read.
pub fn open_archive(
    bytes: Vec<u8>,
    kind: DistributionKind,
) -> Result<PackageArchive, ArchiveError> {
    let mut entries = Vec::new();
    let backend = match kind {
        DistributionKind::Wheel | DistributionKind::SdistZip | DistributionKind::Egg => {
            let mut zip = ZipArchive::new(Cursor::new(bytes)).map_err(map_zip_error)?;
            for i in 0..zip.len() {
                let file = zip.by_index(i).map_err(map_zip_error)?;
                let (path, trailing_slash) = sanitize_path(file.name())?;
                if path.is_empty() {
                    continue;
                }
                let is_directory = file.is_dir() || trailing_slash;
                entries.push(ArchiveEntry {
                    path,
                    size: if is_directory { 0 } else { file.size() },
                    is_directory,
                });
            }
            Backend::Zip(Box::new(zip))
        }
        DistributionKind::SdistTarGz => {
            let mut archive = tar::Archive::new(GzDecoder::new(&bytes[..]));
            for entry in archive.entries().map_err(map_tar_error)? {
                let entry = entry.map_err(map_tar_error)?;
                let raw = entry
                    .path()
                    .map_err(map_tar_error)?
                    .to_string_lossy()
                    .into_owned();
                let (path, trailing_slash) = sanitize_path(&raw)?;
                if path.is_empty() {
                    continue;
                }
                match entry.header().entry_type() {
                    tar::EntryType::Regular => entries.push(ArchiveEntry {
                        path,
                        size: entry.header().size().map_err(map_tar_error)?,
                        is_directory: false,
                    }),
                    tar::EntryType::Directory => entries.push(ArchiveEntry {
                        path,
                        size: 0,
                        is_directory: true,
                    }),
                    other => {
                        if !trailing_slash {
                            log::warn!("skipping non-regular tar entry {path:?} ({other:?})");
                        }
                    }
                }
            }
            Backend::TarGz(bytes)
        }
    };
    Ok(PackageArchive {
        kind,
        identity: None,
        source_name: None,
        entries,
        backend,
    })
}

impl PackageArchive {
    /// Open from raw bytes plus the filename they came from, filling in the
    /// project identity when the filename follows the naming conventions.
    pub fn from_bytes(filename: &str, bytes: Vec<u8>) -> Result<Self, ArchiveError> {
        let kind = classify_distribution(filename)?;
        let mut archive = open_archive(bytes, kind)?;
        let base = filename.rsplit('/').next().unwrap_or(filename);
        archive.source_name = Some(base.to_string());
        if let Ok((name, version, _)) = parse_archive_filename(filename) {
            archive.identity = Some((name, version));
        }
        Ok(archive)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ArchiveError> {
        let filename = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&filename, bytes)
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn has_file(&self, path: &str) -> bool {
        self.entries
            .iter()
            .any(|e| !e.is_directory && e.path == path)
    }

    fn declared_size(&self, path: &str) -> Option<u64> {
        self.entries
            .iter()
            .find(|e| !e.is_directory && e.path == path)
            .map(|e| e.size)
    }

    /// Read one entry's contents. Exactly the declared size is returned.
    pub fn read(&mut self, path: &str) -> Result<Vec<u8>, ArchiveError> {
        let size = self
            .declared_size(path)
            .ok_or_else(|| ArchiveError::EntryNotFound(path.to_string()))?;
        match &mut self.backend {
            Backend::Zip(zip) => {
                // Entry names were sanitized for the listing; scan for the
                // stored name whose sanitized form matches.
                let index = (0..zip.len()).find(|i| {
                    zip.name_for_index(*i)
                        .and_then(|n| sanitize_path(n).ok())
                        .is_some_and(|(p, _)| p == path)
                });
                let index = index.ok_or_else(|| ArchiveError::EntryNotFound(path.to_string()))?;
                let file = zip.by_index(index).map_err(map_zip_error)?;
                let mut buf = Vec::with_capacity(size as usize);
                file.take(size)
                    .read_to_end(&mut buf)
                    .map_err(map_tar_error)?;
                Ok(buf)
            }
            Backend::TarGz(bytes) => {
                let mut archive = tar::Archive::new(GzDecoder::new(&bytes[..]));
                for entry in archive.entries().map_err(map_tar_error)? {
                    let entry = entry.map_err(map_tar_error)?;
                    let raw = entry
                        .path()
                        .map_err(map_tar_error)?
                        .to_string_lossy()
                        .into_owned();
                    let (entry_path, _) = sanitize_path(&raw)?;
                    if entry_path == path
                        && entry.header().entry_type() == tar::EntryType::Regular
                    {
                        let mut buf = Vec::with_capacity(size as usize);
                        entry
                            .take(size)
                            .read_to_end(&mut buf)
                            .map_err(map_tar_error)?;
                        return Ok(buf);
                    }
                }
                Err(ArchiveError::EntryNotFound(path.to_string()))
            }
        }
    }

    pub fn read_to_string(&mut self, path: &str) -> Result<String, ArchiveError> {
        let bytes = self.read(path)?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }
}

/// Metadata directory flavor, matching the directory naming of the three
/// package families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetadataFlavor {
    DistInfo,
    EggInfo,
    EggInfoUpper,
}

impl fmt::Display for MetadataFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetadataFlavor::DistInfo => "dist-info",
            MetadataFlavor::EggInfo => "egg-info",
            MetadataFlavor::EggInfoUpper => "EGG-INFO",
        })
    }
}

fn dir_flavor(name: &str) -> Option<MetadataFlavor> {
    if name == "EGG-INFO" {
        Some(MetadataFlavor::EggInfoUpper)
    } else if name.ends_with(".dist-info") {
        Some(MetadataFlavor::DistInfo)
    } else if name.ends_with(".egg-info") || name == "egg-info" {
        Some(MetadataFlavor::EggInfo)
    } else {
        None
    }
}

/// Find the archive's metadata directory: the first directory whose name
/// carries a metadata suffix, preferring shallower paths and breaking ties
/// lexicographically. Extra metadata directories are reported as warnings.
pub fn locate_metadata_dir(archive: &PackageArchive) -> Option<(String, MetadataFlavor)> {
    let mut candidates: Vec<(usize, String, MetadataFlavor)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for entry in &archive.entries {
        // Consider explicit directory entries and parents implied by files.
        let dir_path = if entry.is_directory {
            entry.path.clone()
        } else {
            match entry.path.rsplit_once('/') {
                Some((parent, _)) => parent.to_string(),
                None => continue,
            }
        };
        let mut current = String::new();
        for seg in dir_path.split('/') {
            current = if current.is_empty() {
                seg.to_string()
            } else {
                format!("{current}/{seg}")
            };
            if !seen.insert(current.clone()) {
                continue;
            }
            if let Some(flavor) = dir_flavor(seg) {
                candidates.push((current.matches('/').count(), current.clone(), flavor));
            }
        }
    }
    candidates.sort();
    if candidates.len() > 1 {
        log::warn!(
            "multiple metadata directories found ({}); using {:?}",
            candidates.len(),
            candidates[0].1
        );
    }
    candidates.into_iter().next().map(|(_, p, f)| (p, f))
}

fn is_digest_worthy(path: &str) -> bool {
    path.ends_with(".py") || path.ends_with(".pth")
}

pub fn sha256_digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Turn the archive's file structure into a virtual file tree. Module-like
/// files (`.py`, `.pth`) get content digests so later stages can compare
/// file contents without holding them.
pub fn build_file_tree(archive: &mut PackageArchive) -> Result<VirtualFileTree, ArchiveError> {
    let mut tree = VirtualFileTree::new();
    let entries = archive.entries.clone();
    for entry in &entries {
        if entry.is_directory {
            tree.insert_dir(&entry.path)?;
        } else {
            let digest = if is_digest_worthy(&entry.path) {
                Some(sha256_digest(&archive.read(&entry.path)?))
            } else {
                None
            };
            tree.insert_file(&entry.path, digest)?;
        }
    }
    Ok(tree)
}
