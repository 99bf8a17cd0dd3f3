//! Deterministic builders for synthetic package archives and synthetic
//! indexes. Fixtures embed real configuration syntax so parser paths are
//! exercised end to end; building the same spec twice yields identical
//! bytes.

use crate::archive::DistributionKind;
use crate::pep::{normalize_name, parse_requirement, parse_version, MarkerExpr, Requirement};
use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{Cursor, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("invalid fixture spec: {0}")]
    SpecInvalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which configuration file an sdist fixture carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConfigFlavor {
    #[default]
    SetupPy,
    SetupCfg,
    Pyproject,
    /// No configuration file; module data comes from metadata files only.
    MetadataOnly,
}

/// The `packages` declaration of a fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackagesDecl {
    List(Vec<String>),
    Find {
        #[serde(default)]
        where_dir: Option<String>,
        #[serde(default)]
        exclude: Vec<String>,
    },
    FindNamespace,
}

/// Declarative description of a synthetic package archive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub name: String,
    pub version: String,
    pub kind: DistributionKind,
    #[serde(default)]
    pub config_flavor: ConfigFlavor,
    /// Payload files: pre-install layout for sdists, wheel payload (which is
    /// post-install layout) for wheels and eggs.
    #[serde(default)]
    pub files: BTreeMap<String, String>,
    #[serde(default)]
    pub py_modules: Vec<String>,
    #[serde(default)]
    pub packages: Option<PackagesDecl>,
    #[serde(default)]
    pub package_dir: BTreeMap<String, String>,
    #[serde(default)]
    pub namespace_packages: Vec<String>,
    #[serde(default)]
    pub install_requires: Vec<String>,
    #[serde(default)]
    pub extras_require: BTreeMap<String, Vec<String>>,
    /// For sdists: also generate the egg-info metadata directory.
    #[serde(default)]
    pub with_metadata: bool,
}

impl FixtureSpec {
    pub fn new(name: &str, version: &str, kind: DistributionKind) -> Self {
        FixtureSpec {
            name: name.to_string(),
            version: version.to_string(),
            kind,
            config_flavor: ConfigFlavor::SetupPy,
            files: BTreeMap::new(),
            py_modules: Vec::new(),
            packages: None,
            package_dir: BTreeMap::new(),
            namespace_packages: Vec::new(),
            install_requires: Vec::new(),
            extras_require: BTreeMap::new(),
            with_metadata: false,
        }
    }

    /// The archive filename this fixture builds to.
    pub fn filename(&self) -> String {
        let escaped = self.name.replace('-', "_");
        match self.kind {
            DistributionKind::Wheel => {
                format!("{escaped}-{}-py3-none-any.whl", self.version)
            }
            DistributionKind::SdistTarGz => format!("{}-{}.tar.gz", self.name, self.version),
            DistributionKind::SdistZip => format!("{}-{}.zip", self.name, self.version),
            DistributionKind::Egg => format!("{}-{}-py3.10.egg", self.name, self.version),
        }
    }

    fn validate(&self) -> Result<(), FixtureError> {
        normalize_name(&self.name)
            .map_err(|e| FixtureError::SpecInvalid(format!("bad name: {e}")))?;
        parse_version(&self.version)
            .map_err(|e| FixtureError::SpecInvalid(format!("bad version: {e}")))?;
        for path in self.files.keys() {
            if path.starts_with('/') || path.split('/').any(|s| s == ".." || s.is_empty()) {
                return Err(FixtureError::SpecInvalid(format!("bad file path {path:?}")));
            }
        }
        for req in self
            .install_requires
            .iter()
            .chain(self.extras_require.values().flatten())
        {
            parse_requirement(req)
                .map_err(|e| FixtureError::SpecInvalid(format!("bad requirement {req:?}: {e}")))?;
        }
        Ok(())
    }

    /// Build the archive bytes. Deterministic: fixed timestamps, sorted
    /// entries, stored compression for zips.
    pub fn build(&self) -> Result<Vec<u8>, FixtureError> {
        self.validate()?;
        match self.kind {
            DistributionKind::Wheel => self.build_wheel(),
            DistributionKind::Egg => self.build_egg(),
            DistributionKind::SdistTarGz | DistributionKind::SdistZip => self.build_sdist(),
        }
    }

    fn dist_info_dir(&self) -> String {
        format!("{}-{}.dist-info", self.name.replace('-', "_"), self.version)
    }

    /// Importable top-level names implied by the payload layout.
    fn payload_top_level(&self) -> Vec<String> {
        let mut names = std::collections::BTreeSet::new();
        for path in self.files.keys() {
            match path.split_once('/') {
                Some((first, _)) => {
                    names.insert(first.to_string());
                }
                None => {
                    if let Some(stem) = path.strip_suffix(".py") {
                        names.insert(stem.to_string());
                    }
                }
            }
        }
        names.into_iter().collect()
    }

    /// Top-level names implied by the declared module keys (sdists).
    fn declared_top_level(&self) -> Vec<String> {
        let mut names = std::collections::BTreeSet::new();
        if let Some(PackagesDecl::List(packages)) = &self.packages {
            for package in packages {
                names.insert(package.split('.').next().unwrap_or(package).to_string());
            }
        }
        for module in &self.py_modules {
            names.insert(module.split('.').next().unwrap_or(module).to_string());
        }
        for namespace in &self.namespace_packages {
            names.insert(namespace.split('.').next().unwrap_or(namespace).to_string());
        }
        names.into_iter().collect()
    }

    fn metadata_block(&self) -> String {
        let mut out = String::new();
        out.push_str("Metadata-Version: 2.1\n");
        out.push_str(&format!("Name: {}\n", self.name));
        out.push_str(&format!("Version: {}\n", self.version));
        for req in &self.install_requires {
            let req = parse_requirement(req).expect("validated");
            out.push_str(&format!("Requires-Dist: {req}\n"));
        }
        for (extra, reqs) in &self.extras_require {
            out.push_str(&format!("Provides-Extra: {extra}\n"));
            for req in reqs {
                let req = parse_requirement(req).expect("validated");
                let marker = MarkerExpr::parse(&format!("extra == '{extra}'")).unwrap();
                let req = req.with_marker(marker);
                out.push_str(&format!("Requires-Dist: {req}\n"));
            }
        }
        out
    }

    fn requires_txt(&self) -> String {
        // Plain install lines first, then [:marker] groups, then extras.
        let mut plain = Vec::new();
        let mut marked: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for req in &self.install_requires {
            let req = parse_requirement(req).expect("validated");
            match &req.marker {
                None => plain.push(req.to_string()),
                Some(marker) => {
                    let stripped = Requirement {
                        marker: None,
                        ..req.clone()
                    };
                    marked
                        .entry(marker.to_string())
                        .or_default()
                        .push(stripped.to_string());
                }
            }
        }
        let mut out = String::new();
        for line in &plain {
            out.push_str(line);
            out.push('\n');
        }
        for (marker, lines) in &marked {
            out.push_str(&format!("\n[:{marker}]\n"));
            for line in lines {
                out.push_str(line);
                out.push('\n');
            }
        }
        for (extra, reqs) in &self.extras_require {
            let mut plain_extra = Vec::new();
            let mut marked_extra: BTreeMap<String, Vec<String>> = BTreeMap::new();
            for req in reqs {
                let req = parse_requirement(req).expect("validated");
                match &req.marker {
                    None => plain_extra.push(req.to_string()),
                    Some(marker) => {
                        let stripped = Requirement {
                            marker: None,
                            ..req.clone()
                        };
                        marked_extra
                            .entry(marker.to_string())
                            .or_default()
                            .push(stripped.to_string());
                    }
                }
            }
            if !plain_extra.is_empty() {
                out.push_str(&format!("\n[{extra}]\n"));
                for line in plain_extra {
                    out.push_str(&line);
                    out.push('\n');
                }
            }
            for (marker, lines) in marked_extra {
                out.push_str(&format!("\n[{extra}:{marker}]\n"));
                for line in lines {
                    out.push_str(&line);
                    out.push('\n');
                }
            }
        }
        out
    }

    fn pkg_info(&self) -> String {
        format!(
            "Metadata-Version: 2.1\nName: {}\nVersion: {}\n",
            self.name, self.version
        )
    }

    fn setup_py_script(&self) -> String {
        let mut imports = vec!["setup"];
        let mut lines = vec![
            format!("    name=\"{}\",", self.name),
            format!("    version=\"{}\",", self.version),
        ];
        match &self.packages {
            Some(PackagesDecl::List(packages)) => {
                lines.push(format!("    packages={},", py_str_list(packages)));
            }
            Some(PackagesDecl::Find { where_dir, exclude }) => {
                imports.push("find_packages");
                let mut args = Vec::new();
                if let Some(where_dir) = where_dir {
                    args.push(format!("where=\"{where_dir}\""));
                }
                if !exclude.is_empty() {
                    args.push(format!("exclude={}", py_str_list(exclude)));
                }
                lines.push(format!("    packages=find_packages({}),", args.join(", ")));
            }
            Some(PackagesDecl::FindNamespace) => {
                imports.push("find_namespace_packages");
                lines.push("    packages=find_namespace_packages(),".to_string());
            }
            None => {}
        }
        if !self.package_dir.is_empty() {
            let entries: Vec<String> = self
                .package_dir
                .iter()
                .map(|(post, pre)| format!("\"{post}\": \"{pre}\""))
                .collect();
            lines.push(format!("    package_dir={{{}}},", entries.join(", ")));
        }
        if !self.py_modules.is_empty() {
            lines.push(format!("    py_modules={},", py_str_list(&self.py_modules)));
        }
        if !self.namespace_packages.is_empty() {
            lines.push(format!(
                "    namespace_packages={},",
                py_str_list(&self.namespace_packages)
            ));
        }
        if !self.install_requires.is_empty() {
            lines.push(format!(
                "    install_requires={},",
                py_str_list(&self.install_requires)
            ));
        }
        if !self.extras_require.is_empty() {
            let entries: Vec<String> = self
                .extras_require
                .iter()
                .map(|(extra, reqs)| format!("\"{extra}\": {}", py_str_list(reqs)))
                .collect();
            lines.push(format!("    extras_require={{{}}},", entries.join(", ")));
        }
        format!(
            "from setuptools import {}\n\nsetup(\n{}\n)\n",
            imports.join(", "),
            lines.join("\n")
        )
    }

    fn setup_cfg_text(&self) -> String {
        let mut out = format!(
            "[metadata]\nname = {}\nversion = {}\n\n[options]\n",
            self.name, self.version
        );
        let mut find_section = String::new();
        match &self.packages {
            Some(PackagesDecl::List(packages)) => {
                out.push_str("packages =\n");
                for package in packages {
                    out.push_str(&format!("    {package}\n"));
                }
            }
            Some(PackagesDecl::Find { where_dir, exclude }) => {
                out.push_str("packages = find:\n");
                find_section.push_str("\n[options.packages.find]\n");
                if let Some(where_dir) = where_dir {
                    find_section.push_str(&format!("where = {where_dir}\n"));
                }
                if !exclude.is_empty() {
                    find_section.push_str("exclude =\n");
                    for pattern in exclude {
                        find_section.push_str(&format!("    {pattern}\n"));
                    }
                }
            }
            Some(PackagesDecl::FindNamespace) => {
                out.push_str("packages = find_namespace:\n");
            }
            None => {}
        }
        if !self.py_modules.is_empty() {
            out.push_str("py_modules =\n");
            for module in &self.py_modules {
                out.push_str(&format!("    {module}\n"));
            }
        }
        if !self.package_dir.is_empty() {
            out.push_str("package_dir =\n");
            for (post, pre) in &self.package_dir {
                out.push_str(&format!("    {post} = {pre}\n"));
            }
        }
        if !self.namespace_packages.is_empty() {
            out.push_str("namespace_packages =\n");
            for namespace in &self.namespace_packages {
                out.push_str(&format!("    {namespace}\n"));
            }
        }
        if !self.install_requires.is_empty() {
            out.push_str("install_requires =\n");
            for req in &self.install_requires {
                out.push_str(&format!("    {req}\n"));
            }
        }
        out.push_str(&find_section);
        if !self.extras_require.is_empty() {
            out.push_str("\n[options.extras_require]\n");
            for (extra, reqs) in &self.extras_require {
                out.push_str(&format!("{extra} =\n"));
                for req in reqs {
                    out.push_str(&format!("    {req}\n"));
                }
            }
        }
        out
    }

    fn pyproject_text(&self) -> String {
        let mut out = String::from(
            "[build-system]\nrequires = [\"setuptools\"]\nbuild-backend = \"setuptools.build_meta\"\n",
        );
        out.push_str(&format!(
            "\n[project]\nname = \"{}\"\nversion = \"{}\"\n",
            self.name, self.version
        ));
        if !self.install_requires.is_empty() {
            out.push_str(&format!(
                "dependencies = {}\n",
                toml_str_list(&self.install_requires)
            ));
        }
        if !self.extras_require.is_empty() {
            out.push_str("\n[project.optional-dependencies]\n");
            for (extra, reqs) in &self.extras_require {
                out.push_str(&format!("{extra} = {}\n", toml_str_list(reqs)));
            }
        }
        let mut setuptools = String::new();
        if !self.py_modules.is_empty() {
            setuptools.push_str(&format!(
                "py-modules = {}\n",
                toml_str_list(&self.py_modules)
            ));
        }
        if let Some(PackagesDecl::List(packages)) = &self.packages {
            setuptools.push_str(&format!("packages = {}\n", toml_str_list(packages)));
        }
        if !setuptools.is_empty() {
            out.push_str("\n[tool.setuptools]\n");
            out.push_str(&setuptools);
        }
        if let Some(PackagesDecl::Find { where_dir, exclude }) = &self.packages {
            out.push_str("\n[tool.setuptools.packages.find]\n");
            if let Some(where_dir) = where_dir {
                out.push_str(&format!("where = [\"{where_dir}\"]\n"));
            }
            if !exclude.is_empty() {
                out.push_str(&format!("exclude = {}\n", toml_str_list(exclude)));
            }
        }
        if !self.package_dir.is_empty() {
            out.push_str("\n[tool.setuptools.package-dir]\n");
            for (post, pre) in &self.package_dir {
                let key = if post.is_empty() {
                    "\"\"".to_string()
                } else {
                    format!("\"{post}\"")
                };
                out.push_str(&format!("{key} = \"{pre}\"\n"));
            }
        }
        out
    }

    fn build_wheel(&self) -> Result<Vec<u8>, FixtureError> {
        let dist_info = self.dist_info_dir();
        let mut entries: Vec<(String, Vec<u8>)> = self
            .files
            .iter()
            .map(|(path, content)| (path.clone(), content.clone().into_bytes()))
            .collect();
        entries.push((
            format!("{dist_info}/METADATA"),
            self.metadata_block().into_bytes(),
        ));
        entries.push((
            format!("{dist_info}/WHEEL"),
            b"Wheel-Version: 1.0\nGenerator: modguard-fixtures 0.1\nRoot-Is-Purelib: true\nTag: py3-none-any\n"
                .to_vec(),
        ));
        entries.push((
            format!("{dist_info}/top_level.txt"),
            (self.payload_top_level().join("\n") + "\n").into_bytes(),
        ));
        if !self.namespace_packages.is_empty() {
            entries.push((
                format!("{dist_info}/namespace_packages.txt"),
                (self.namespace_packages.join("\n") + "\n").into_bytes(),
            ));
        }
        // RECORD lists every file including itself (with empty hash/size).
        let mut record = String::new();
        for (path, bytes) in &entries {
            let digest =
                base64::engine::general_purpose::URL_SAFE_NO_PAD.encode(Sha256::digest(bytes));
            record.push_str(&format!("{path},sha256={digest},{}\n", bytes.len()));
        }
        record.push_str(&format!("{dist_info}/RECORD,,\n"));
        entries.push((format!("{dist_info}/RECORD"), record.into_bytes()));
        write_zip(&entries)
    }

    fn build_egg(&self) -> Result<Vec<u8>, FixtureError> {
        let mut entries: Vec<(String, Vec<u8>)> = self
            .files
            .iter()
            .map(|(path, content)| (path.clone(), content.clone().into_bytes()))
            .collect();
        let mut meta: Vec<(String, Vec<u8>)> = vec![
            ("EGG-INFO/PKG-INFO".to_string(), self.pkg_info().into_bytes()),
            (
                "EGG-INFO/top_level.txt".to_string(),
                (self.payload_top_level().join("\n") + "\n").into_bytes(),
            ),
        ];
        let mut sources: Vec<String> = self.files.keys().cloned().collect();
        sources.extend(meta.iter().map(|(p, _)| p.clone()));
        sources.push("EGG-INFO/SOURCES.txt".to_string());
        sources.sort();
        meta.push((
            "EGG-INFO/SOURCES.txt".to_string(),
            (sources.join("\n") + "\n").into_bytes(),
        ));
        if !self.install_requires.is_empty() || !self.extras_require.is_empty() {
            meta.push((
                "EGG-INFO/requires.txt".to_string(),
                self.requires_txt().into_bytes(),
            ));
        }
        if !self.namespace_packages.is_empty() {
            meta.push((
                "EGG-INFO/namespace_packages.txt".to_string(),
                (self.namespace_packages.join("\n") + "\n").into_bytes(),
            ));
        }
        entries.extend(meta);
        write_zip(&entries)
    }

    fn build_sdist(&self) -> Result<Vec<u8>, FixtureError> {
        let wrapper = format!("{}-{}", self.name, self.version);
        let mut entries: Vec<(String, Vec<u8>)> = Vec::new();
        let mut local_paths: Vec<String> = self.files.keys().cloned().collect();

        match self.config_flavor {
            ConfigFlavor::SetupPy => {
                entries.push((
                    format!("{wrapper}/setup.py"),
                    self.setup_py_script().into_bytes(),
                ));
                local_paths.push("setup.py".to_string());
            }
            ConfigFlavor::SetupCfg => {
                entries.push((
                    format!("{wrapper}/setup.py"),
                    b"from setuptools import setup\n\nsetup()\n".to_vec(),
                ));
                entries.push((
                    format!("{wrapper}/setup.cfg"),
                    self.setup_cfg_text().into_bytes(),
                ));
                local_paths.push("setup.py".to_string());
                local_paths.push("setup.cfg".to_string());
            }
            ConfigFlavor::Pyproject => {
                entries.push((
                    format!("{wrapper}/pyproject.toml"),
                    self.pyproject_text().into_bytes(),
                ));
                local_paths.push("pyproject.toml".to_string());
            }
            ConfigFlavor::MetadataOnly => {}
        }

        for (path, content) in &self.files {
            entries.push((format!("{wrapper}/{path}"), content.clone().into_bytes()));
        }

        if self.with_metadata || self.config_flavor == ConfigFlavor::MetadataOnly {
            let egg_info = format!("{}.egg-info", self.name.replace('-', "_"));
            let mut meta: Vec<(String, Vec<u8>)> = vec![
                (format!("{egg_info}/PKG-INFO"), self.pkg_info().into_bytes()),
                (
                    format!("{egg_info}/top_level.txt"),
                    (self.declared_top_level().join("\n") + "\n").into_bytes(),
                ),
            ];
            if !self.install_requires.is_empty() || !self.extras_require.is_empty() {
                meta.push((
                    format!("{egg_info}/requires.txt"),
                    self.requires_txt().into_bytes(),
                ));
            }
            if !self.namespace_packages.is_empty() {
                meta.push((
                    format!("{egg_info}/namespace_packages.txt"),
                    (self.namespace_packages.join("\n") + "\n").into_bytes(),
                ));
            }
            let mut sources = local_paths.clone();
            sources.extend(meta.iter().map(|(p, _)| p.clone()));
            sources.push(format!("{egg_info}/SOURCES.txt"));
            sources.sort();
            meta.push((
                format!("{egg_info}/SOURCES.txt"),
                (sources.join("\n") + "\n").into_bytes(),
            ));
            for (path, bytes) in meta {
                entries.push((format!("{wrapper}/{path}"), bytes));
            }
        }

        entries.sort_by(|a, b| a.0.cmp(&b.0));
        match self.kind {
            DistributionKind::SdistTarGz => write_tar_gz(&entries),
            DistributionKind::SdistZip => write_zip(&entries),
            _ => unreachable!(),
        }
    }
}

fn py_str_list(items: &[String]) -> String {
    let quoted: Vec<String> = items
        .iter()
        .map(|s| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")))
        .collect();
    format!("[{}]", quoted.join(", "))
}

fn toml_str_list(items: &[String]) -> String {
    let quoted: Vec<String> = items
        .iter()
        .map(|s| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")))
        .collect();
    format!("[{}]", quoted.join(", "))
}

fn write_zip(entries: &[(String, Vec<u8>)]) -> Result<Vec<u8>, FixtureError> {
    let mut writer = zip::ZipWriter::new(Cursor::new(Vec::new()));
    let timestamp = zip::DateTime::from_date_and_time(1980, 1, 1, 0, 0, 0)
        .map_err(|e| FixtureError::SpecInvalid(e.to_string()))?;
    let options = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Stored)
        .last_modified_time(timestamp)
        .unix_permissions(0o644);
    for (path, bytes) in entries {
        writer
            .start_file(path.as_str(), options)
            .map_err(|e| FixtureError::SpecInvalid(e.to_string()))?;
        writer.write_all(bytes)?;
    }
    Ok(writer
        .finish()
        .map_err(|e| FixtureError::SpecInvalid(e.to_string()))?
        .into_inner())
}

fn write_tar_gz(entries: &[(String, Vec<u8>)]) -> Result<Vec<u8>, FixtureError> {
    let gz = flate2::GzBuilder::new()
        .mtime(0)
        .write(Vec::new(), flate2::Compression::default());
    let mut builder = tar::Builder::new(gz);
    for (path, bytes) in entries {
        let mut header = tar::Header::new_gnu();
        header.set_size(bytes.len() as u64);
        header.set_mode(0o644);
        header.set_mtime(0);
        header.set_uid(0);
        header.set_gid(0);
        header.set_cksum();
        builder.append_data(&mut header, path, bytes.as_slice())?;
    }
    Ok(builder.into_inner()?.finish()?)
}

/// A synthetic index plus the root requirements a test should resolve.
#[derive(Debug, Clone)]
pub struct AdversarialIndex {
    pub specs: Vec<FixtureSpec>,
    pub roots: Vec<String>,
}

/// Generate a reproducible random index: up to `n_projects` projects with up
/// to `n_versions` versions each, and up to `max_deps` dependencies per
/// release with specifiers drawn from `{==, >=, <=, range}`.
pub fn gen_random_index(
    seed: u64,
    n_projects: usize,
    n_versions: usize,
    max_deps: usize,
) -> Vec<FixtureSpec> {
    const NAMES: [&str; 8] = [
        "acorn", "birch", "cedar", "dune", "elm", "fern", "grove", "hazel",
    ];
    let n_projects = n_projects.min(NAMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Version lists per project, ascending.
    let mut versions: Vec<Vec<String>> = Vec::new();
    for _ in 0..n_projects {
        let count = rng.gen_range(1..=n_versions.max(1));
        let mut list = Vec::new();
        let mut major = rng.gen_range(0..2u32);
        let mut minor = rng.gen_range(0..3u32);
        for _ in 0..count {
            list.push(format!("{major}.{minor}"));
            if rng.gen_bool(0.3) {
                major += 1;
                minor = 0;
            } else {
                minor += rng.gen_range(1..3u32);
            }
        }
        versions.push(list);
    }

    let mut specs = Vec::new();
    for (project, project_versions) in versions.iter().enumerate() {
        for version in project_versions {
            let mut spec = FixtureSpec::new(NAMES[project], version, DistributionKind::Wheel);
            spec.files.insert(
                format!("{}/__init__.py", NAMES[project]),
                format!("version = \"{version}\"\n"),
            );
            let dep_count = rng.gen_range(0..=max_deps);
            let mut targets: Vec<usize> = (0..n_projects).filter(|t| *t != project).collect();
            for _ in 0..dep_count {
                if targets.is_empty() {
                    break;
                }
                let pick = rng.gen_range(0..targets.len());
                let target = targets.swap_remove(pick);
                let target_versions = &versions[target];
                let tv = &target_versions[rng.gen_range(0..target_versions.len())];
                let requirement = match rng.gen_range(0..4u8) {
                    0 => format!("{}=={}", NAMES[target], tv),
                    1 => format!("{}>={}", NAMES[target], tv),
                    2 => format!("{}<={}", NAMES[target], tv),
                    _ => {
                        let hi = target_versions.last().unwrap();
                        format!("{}>={},<={}", NAMES[target], tv, hi)
                    }
                };
                spec.install_requires.push(requirement);
            }
            specs.push(spec);
        }
    }
    specs
}

/// An index where first-in-first-out requirement ordering provably
/// backtracks more than the priority policy: the pinned dependency sits one
/// level down, so greedy newest-first picks for the unconstrained root
/// dependency keep invalidating it.
pub fn backtrack_heavy_index() -> AdversarialIndex {
    let mut specs = Vec::new();
    for k in 1..=5u32 {
        let mut shared = FixtureSpec::new("shared", &format!("{k}.0"), DistributionKind::Wheel);
        shared
            .files
            .insert("shared/__init__.py".to_string(), format!("v = {k}\n"));
        specs.push(shared);

        let mut alpha = FixtureSpec::new("alpha", &format!("{k}.0"), DistributionKind::Wheel);
        alpha
            .files
            .insert("alpha/__init__.py".to_string(), format!("v = {k}\n"));
        alpha.install_requires.push(format!("shared>={k}.0"));
        specs.push(alpha);
    }
    let mut omega = FixtureSpec::new("omega", "1.0", DistributionKind::Wheel);
    omega
        .files
        .insert("omega/__init__.py".to_string(), "v = 1\n".to_string());
    omega.install_requires.push("shared==1.0".to_string());
    specs.push(omega);

    AdversarialIndex {
        specs,
        roots: vec!["alpha".to_string(), "omega==1.0".to_string()],
    }
}

/// Ready-made fixtures exercising the documented behaviours end to end.
pub mod presets {
    use super::*;

    /// Sdist whose configuration renames a directory, prunes to the declared
    /// packages and strips a namespace `__init__.py`.
    pub fn pugs_sdist() -> FixtureSpec {
        let mut spec = FixtureSpec::new("pugs", "0.0.1", DistributionKind::SdistTarGz);
        spec.files.insert(
            "pugs/__init__.py".to_string(),
            "from .greeting import greet\n".to_string(),
        );
        spec.files.insert(
            "pugs/greeting.py".to_string(),
            "def greet():\n    return \"pugs\"\n".to_string(),
        );
        spec.files
            .insert("namespace_pugs/__init__.py".to_string(), String::new());
        spec.files.insert(
            "namespace_pugs/core.py".to_string(),
            "core = True\n".to_string(),
        );
        spec.packages = Some(PackagesDecl::List(vec![
            "pugs_lib".to_string(),
            "namespace_pugs".to_string(),
        ]));
        spec.package_dir
            .insert("pugs_lib".to_string(), "pugs".to_string());
        spec.namespace_packages = vec!["namespace_pugs".to_string()];
        spec
    }

    /// The post-install module set the pugs sdist must simulate to.
    pub fn pugs_expected_modules() -> Vec<&'static str> {
        vec![
            "namespace_pugs/core.py",
            "pugs-0.0.1-py3-nspkg.pth",
            "pugs_lib/__init__.py",
            "pugs_lib/greeting.py",
        ]
    }

    /// Minimal wheel with one package and one root module.
    pub fn demo_wheel() -> FixtureSpec {
        let mut spec = FixtureSpec::new("pkg", "0.0.1", DistributionKind::Wheel);
        spec.files
            .insert("mod1/__init__.py".to_string(), "x = 1\n".to_string());
        spec.files
            .insert("mod2.py".to_string(), "y = 2\n".to_string());
        spec
    }

    /// Two unrelated distributions shipping the same `jwt/exceptions.py`
    /// path with different bodies.
    pub fn jwt_pair() -> Vec<FixtureSpec> {
        let mut jwt = FixtureSpec::new("jwt", "1.3.1", DistributionKind::Wheel);
        jwt.files
            .insert("jwt/__init__.py".to_string(), String::new());
        jwt.files.insert(
            "jwt/exceptions.py".to_string(),
            "class JWTError(Exception):\n    pass\n".to_string(),
        );
        let mut pyjwt = FixtureSpec::new("pyjwt", "2.6.0", DistributionKind::Wheel);
        pyjwt
            .files
            .insert("jwt/__init__.py".to_string(), String::new());
        pyjwt.files.insert(
            "jwt/exceptions.py".to_string(),
            "class PyJWTError(Exception):\n    pass\nclass InvalidTokenError(PyJWTError):\n    pass\n"
                .to_string(),
        );
        vec![jwt, pyjwt]
    }

    /// A root package whose dependency graph pulls two providers of the
    /// same `cv2/` module tree.
    pub fn cv2_conflict_index() -> Vec<FixtureSpec> {
        let cv2_files: Vec<(&str, &str)> = vec![
            ("cv2/__init__.py", "from .version import version\n"),
            ("cv2/version.py", "version = \"4.5.5\"\n"),
        ];
        let mut full = FixtureSpec::new("opencv-python", "4.5.5", DistributionKind::Wheel);
        for (path, content) in &cv2_files {
            full.files.insert(path.to_string(), content.to_string());
        }
        let mut headless =
            FixtureSpec::new("opencv-python-headless", "4.5.5", DistributionKind::Wheel);
        for (path, content) in &cv2_files {
            headless.files.insert(path.to_string(), content.to_string());
        }
        let mut emoca = FixtureSpec::new("emoca", "1.0", DistributionKind::Wheel);
        emoca
            .files
            .insert("emoca/__init__.py".to_string(), String::new());
        emoca.install_requires = vec![
            "opencv-python==4.5.5".to_string(),
            "opencv-python-headless==4.5.5".to_string(),
        ];
        vec![full, headless, emoca]
    }

    /// Package pair conflicting only under case-insensitive path handling.
    pub fn crypto_case_pair() -> Vec<FixtureSpec> {
        let mut lower = FixtureSpec::new("crypto", "1.4.1", DistributionKind::Wheel);
        lower.files.insert(
            "crypto/__init__.py".to_string(),
            "lower = True\n".to_string(),
        );
        let mut upper = FixtureSpec::new("pycrypto", "2.6.1", DistributionKind::Wheel);
        upper.files.insert(
            "Crypto/__init__.py".to_string(),
            "upper = True\n".to_string(),
        );
        vec![lower, upper]
    }

    /// Package shadowing standard-library module names.
    pub fn stdlib_shadow() -> FixtureSpec {
        let mut spec = FixtureSpec::new("hgi-extras", "1.5.0", DistributionKind::Wheel);
        spec.files.insert(
            "json/__init__.py".to_string(),
            "custom = True\n".to_string(),
        );
        spec.files.insert(
            "parser.py".to_string(),
            "def parse():\n    pass\n".to_string(),
        );
        spec.files.insert("hgi/__init__.py".to_string(), String::new());
        spec
    }

    /// Index for extras and marker resolution: the root has a conditional
    /// dependency that only applies below Python 3.10 and an extra wired to
    /// one more package.
    pub fn versioneer_index() -> Vec<FixtureSpec> {
        let mut versioneer = FixtureSpec::new("versioneer", "0.0.1", DistributionKind::SdistTarGz);
        versioneer.files.insert(
            "versioneer_pkg/__init__.py".to_string(),
            "ready = True\n".to_string(),
        );
        versioneer.packages = Some(PackagesDecl::List(vec!["versioneer_pkg".to_string()]));
        versioneer.install_requires = vec![
            "python-dateutil>=2.8.1".to_string(),
            "pytz>=2020.1".to_string(),
            "numpy>=1.20.3; python_version < '3.10'".to_string(),
        ];
        versioneer
            .extras_require
            .insert("toml".to_string(), vec!["hypothesis>=5.5.3".to_string()]);

        let simple = |name: &str, version: &str, module: &str| {
            let mut spec = FixtureSpec::new(name, version, DistributionKind::Wheel);
            spec.files.insert(
                format!("{module}/__init__.py"),
                format!("name = \"{name}\"\n"),
            );
            spec
        };
        vec![
            versioneer,
            simple("python-dateutil", "2.8.2", "dateutil"),
            simple("pytz", "2023.3", "pytz"),
            simple("numpy", "1.24.0", "numpy"),
            simple("hypothesis", "6.0.0", "hypothesis"),
        ]
    }

    /// Index for the extras flow: an extra on the root requirement pulls one
    /// additional package.
    pub fn pandas_extra_index() -> Vec<FixtureSpec> {
        let mut pandas = FixtureSpec::new("pandas", "1.5.0", DistributionKind::SdistTarGz);
        pandas
            .files
            .insert("pandas/__init__.py".to_string(), String::new());
        pandas.packages = Some(PackagesDecl::List(vec!["pandas".to_string()]));
        pandas.install_requires = vec!["python-dateutil>=2.8.1".to_string()];
        pandas.extras_require.insert(
            "compression".to_string(),
            vec!["zstandard>=0.17.0".to_string()],
        );
        pandas.with_metadata = true;

        let simple = |name: &str, version: &str, module: &str| {
            let mut spec = FixtureSpec::new(name, version, DistributionKind::Wheel);
            spec.files
                .insert(format!("{module}/__init__.py"), String::new());
            spec
        };
        vec![
            pandas,
            simple("python-dateutil", "2.8.2", "dateutil"),
            simple("zstandard", "0.18.0", "zstandard"),
        ]
    }
}
