//! Installation-free module simulation: apply the module-shaping
//! configuration parameters to a virtual file tree of the archive, then
//! enumerate the post-install module paths by tree traversal.

pub mod module_set;
pub mod tree;

pub use module_set::ModuleSet;
pub use tree::{PathConflict, TreeNode, VirtualFileTree};

use crate::archive::{
    build_file_tree, locate_metadata_dir, ArchiveError, MetadataFlavor, PackageArchive,
};
use crate::config::{self, ConfigError, DependencyKeywords};
use crate::metadata::{
    self, FindDirective, Keyword, MetadataError, PackagesSpec, RawModuleData,
};
use crate::pep::{normalize_name, parse_version, ProjectName, Version};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no source of module data in archive")]
    NoModuleEvidence,
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Metadata(#[from] MetadataError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn join(base: &str, rest: &str) -> String {
    tree::join_path(base, rest)
}

fn dotted_to_path(dotted: &str) -> String {
    dotted.replace('.', "/")
}

/// Rename directories according to the `package_dir` mapping: for each
/// `post -> pre` entry, the breadth-first-first directory matching `pre`
/// under the configuration root is moved to `post`. The empty `post` name
/// hoists the `pre` directory's children into the root (src-layout). Missing
/// sources are logged and skipped. Detaching everything before re-attaching
/// makes application order irrelevant for disjoint sources.
pub fn apply_package_dir(
    tree: &VirtualFileTree,
    package_dir: &BTreeMap<String, String>,
    config_root: &str,
) -> VirtualFileTree {
    let mut working = tree.clone();
    let mut detached: Vec<(String, TreeNode)> = Vec::new();

    for (post, pre) in package_dir {
        if pre.is_empty() {
            log::warn!("package_dir {post:?} -> \"\": empty source directory, skipping");
            continue;
        }
        let source = if pre.contains('/') {
            let candidate = join(config_root, pre.trim_matches('/'));
            working.is_dir(&candidate).then_some(candidate)
        } else {
            working.find_dir_bfs(config_root, pre)
        };
        let Some(source) = source else {
            log::warn!("package_dir {post:?} -> {pre:?}: source directory not found, skipping");
            continue;
        };
        let node = working.remove(&source).expect("located directory detaches");
        detached.push((post.clone(), node));
    }

    for (post, node) in detached {
        if post.is_empty() {
            let TreeNode::Dir(children) = node else {
                continue;
            };
            for (name, child) in children {
                let target = join(config_root, &name);
                if working.attach(&target, child).is_err() {
                    log::warn!("package_dir hoist: {target:?} already exists, skipping");
                }
            }
        } else {
            let target = join(config_root, &dotted_to_path(&post));
            if working.attach(&target, node).is_err() {
                log::warn!("package_dir: target {target:?} already exists, skipping");
            }
        }
    }
    working
}

/// Keep only the declared packages and root modules. A listed package
/// retains its direct `.py` files; subpackages survive only when listed
/// themselves (dotted-name semantics). Root modules are `m.py` files for
/// each name in `py_modules`. Missing names are logged.
pub fn prune_to_packages(
    tree: &VirtualFileTree,
    packages: &[String],
    py_modules: &[String],
    config_root: &str,
) -> VirtualFileTree {
    let mut pruned = VirtualFileTree::new();
    for package in packages {
        let dir_path = join(config_root, &dotted_to_path(package));
        let Some(TreeNode::Dir(children)) = tree.node(&dir_path) else {
            log::warn!("packages entry {package:?}: directory {dir_path:?} not found");
            continue;
        };
        pruned.insert_dir(&dir_path).ok();
        for (name, child) in children {
            if let TreeNode::File { digest } = child {
                if name.ends_with(".py") {
                    pruned
                        .insert_file(&join(&dir_path, name), digest.clone())
                        .ok();
                }
            }
        }
    }
    for module in py_modules {
        let file_path = join(config_root, &format!("{}.py", dotted_to_path(module)));
        match tree.node(&file_path) {
            Some(TreeNode::File { digest }) => {
                pruned.insert_file(&file_path, digest.clone()).ok();
            }
            _ => log::warn!("py_modules entry {module:?}: file {file_path:?} not found"),
        }
    }
    pruned
}

/// The synthetic `.pth` shim a namespace package installs.
pub fn nspkg_pth_name(project: &ProjectName, version: &Version) -> String {
    format!("{}-{}-py3-nspkg.pth", project.normalized(), version)
}

/// Apply namespace-package semantics: each listed namespace loses its
/// `__init__.py`, and a single `.pth` shim appears at the root when the list
/// is non-empty.
pub fn apply_namespace_packages(
    tree: &VirtualFileTree,
    namespace_packages: &[String],
    project: &ProjectName,
    version: &Version,
) -> VirtualFileTree {
    if namespace_packages.is_empty() {
        return tree.clone();
    }
    let mut working = tree.clone();
    for namespace in namespace_packages {
        let init = format!("{}/__init__.py", dotted_to_path(namespace));
        if working.remove(&init).is_none() {
            log::warn!("namespace package {namespace:?}: no {init:?} to strip");
        }
    }
    working
        .insert_file(&nspkg_pth_name(project, version), Some(String::new()))
        .ok();
    working
}

/// Depth-first traversal of the tree: every root-to-leaf path ending in
/// `.py` or `.pth` is a module path. Data files are ignored.
pub fn enumerate_modules(tree: &VirtualFileTree) -> ModuleSet {
    let mut modules = ModuleSet::new();
    for (path, digest) in tree.files() {
        if path.ends_with(".py") || path.ends_with(".pth") {
            modules.insert(path, digest.unwrap_or_default());
        }
    }
    modules
}

/// First path segment of each `.py` module; `m.py` at the root yields `m`.
pub fn top_level_names(modules: &ModuleSet) -> std::collections::BTreeSet<String> {
    modules.top_level_names()
}

/// Minimal fnmatch: `*` matches any run, `?` one character.
fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    fn rec(p: &[char], t: &[char]) -> bool {
        match p.first() {
            None => t.is_empty(),
            Some('*') => (0..=t.len()).any(|skip| rec(&p[1..], &t[skip..])),
            Some('?') => !t.is_empty() && rec(&p[1..], &t[1..]),
            Some(c) => t.first() == Some(c) && rec(&p[1..], &t[1..]),
        }
    }
    rec(&p, &t)
}

/// Resolve a find-packages directive against the tree: directories below
/// `where` qualify when they and every ancestor up to the search root carry
/// an `__init__.py` (unless the namespace variant), filtered by the
/// include / exclude globs on the dotted name.
pub fn resolve_find_packages(
    tree: &VirtualFileTree,
    directive: &FindDirective,
    config_root: &str,
) -> Vec<String> {
    let root = join(config_root, directive.where_dir.trim_matches('/'));
    let mut found = Vec::new();
    let Some(root_node) = tree.node(&root) else {
        log::warn!("find packages: search root {root:?} not found");
        return found;
    };
    fn walk(
        node: &TreeNode,
        dotted: String,
        directive: &FindDirective,
        found: &mut Vec<String>,
    ) {
        let TreeNode::Dir(children) = node else {
            return;
        };
        for (name, child) in children {
            if child.is_file() || !is_identifier(name) {
                continue;
            }
            let child_dotted = if dotted.is_empty() {
                name.clone()
            } else {
                format!("{dotted}.{name}")
            };
            let has_init = child
                .children()
                .is_some_and(|c| c.get("__init__.py").is_some_and(TreeNode::is_file));
            if directive.namespaces || has_init {
                found.push(child_dotted.clone());
                // Chains only extend through qualifying parents.
                walk(child, child_dotted, directive, found);
            }
        }
    }
    walk(root_node, String::new(), directive, &mut found);

    found.retain(|dotted| {
        directive.include.iter().any(|p| glob_match(p, dotted))
            && !directive.exclude.iter().any(|p| glob_match(p, dotted))
    });
    found.sort();
    found
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The shallowest directory containing a configuration file, or `None`.
fn find_config_root(tree: &VirtualFileTree) -> Option<String> {
    const CONFIG_FILES: [&str; 3] = ["setup.py", "setup.cfg", "pyproject.toml"];
    tree.files()
        .into_iter()
        .filter_map(|(path, _)| {
            let (dir, name) = match path.rsplit_once('/') {
                Some((dir, name)) => (dir.to_string(), name.to_string()),
                None => (String::new(), path),
            };
            CONFIG_FILES.contains(&name.as_str()).then_some(dir)
        })
        .min_by_key(|dir| (dir.matches('/').count() + usize::from(!dir.is_empty()), dir.clone()))
}

fn identity_for(archive: &mut PackageArchive, meta_dir: Option<&str>) -> (ProjectName, Version) {
    if let Some((name, version)) = archive.identity.clone() {
        return (name, version);
    }
    // Fall back to PKG-INFO when the filename was uninformative.
    if let Some(meta_dir) = meta_dir {
        for candidate in ["PKG-INFO", "METADATA"] {
            let path = join(meta_dir, candidate);
            if let Ok(content) = archive.read_to_string(&path) {
                let (name, version) = metadata::parse_name_version(&content);
                if let (Some(name), Some(version)) = (name, version) {
                    if let (Ok(name), Ok(version)) =
                        (normalize_name(&name), parse_version(&version))
                    {
                        return (name, version);
                    }
                }
            }
        }
    }
    log::warn!("package identity unknown; using placeholder");
    (
        normalize_name("unknown").unwrap(),
        parse_version("0").unwrap(),
    )
}

/// Extract the post-install module set by evidence priority: a wheel RECORD
/// is literal post-install truth; metadata reconstruction
/// (top_level + SOURCES) comes next; configuration files plus the full
/// simulation are the last resort.
pub fn extract_modules(archive: &mut PackageArchive) -> Result<ModuleSet, SimError> {
    let tree = build_file_tree(archive)?;
    let meta = locate_metadata_dir(archive);

    // Wheel RECORD route.
    if let Some((meta_dir, MetadataFlavor::DistInfo)) = &meta {
        let record_path = join(meta_dir, "RECORD");
        if archive.has_file(&record_path) {
            let content = archive.read_to_string(&record_path)?;
            let mut modules = ModuleSet::new();
            for path in metadata::parse_record(&content)? {
                let digest = match tree.node(&path) {
                    Some(TreeNode::File { digest }) => digest.clone().unwrap_or_default(),
                    _ => String::new(),
                };
                modules.insert(path, digest);
            }
            // Root-level .pth shims ship in the wheel payload and install
            // as-is; RECORD's .py filter would lose them.
            for (path, digest) in tree.files() {
                if !path.contains('/') && path.ends_with(".pth") {
                    modules.insert(path, digest.unwrap_or_default());
                }
            }
            return Ok(modules);
        }
        log::warn!("dist-info without RECORD; trying other evidence");
    }

    // Metadata reconstruction route.
    if let Some((meta_dir, _)) = &meta {
        let top_level_path = join(meta_dir, "top_level.txt");
        let sources_path = join(meta_dir, "SOURCES.txt");
        if archive.has_file(&top_level_path) && archive.has_file(&sources_path) {
            let tops = metadata::parse_top_level(&archive.read_to_string(&top_level_path)?);
            let sources = metadata::parse_sources(&archive.read_to_string(&sources_path)?);
            let base = match meta_dir.rsplit_once('/') {
                Some((parent, _)) => parent.to_string(),
                None => String::new(),
            };

            let mut modules = ModuleSet::new();
            for source in sources {
                if !source.ends_with(".py") {
                    continue;
                }
                let first_segment = source.split('/').next().unwrap_or_default();
                let is_top_package = tops.iter().any(|t| t == first_segment);
                let is_root_module = !source.contains('/')
                    && tops.iter().any(|t| format!("{t}.py") == source);
                if !is_top_package && !is_root_module {
                    continue;
                }
                let digest = match tree.node(&join(&base, &source)) {
                    Some(TreeNode::File { digest }) => digest.clone().unwrap_or_default(),
                    _ => String::new(),
                };
                modules.insert(source, digest);
            }

            let ns_path = join(meta_dir, "namespace_packages.txt");
            if archive.has_file(&ns_path) {
                let namespaces =
                    metadata::parse_namespace_packages(&archive.read_to_string(&ns_path)?);
                if !namespaces.is_empty() {
                    for namespace in &namespaces {
                        modules.remove(&format!("{}/__init__.py", dotted_to_path(namespace)));
                    }
                    let (name, version) = identity_for(archive, Some(meta_dir));
                    modules.insert(nspkg_pth_name(&name, &version), String::new());
                }
            }
            return Ok(modules);
        }
    }

    // Configuration route with full simulation.
    if let Some(config_root) = find_config_root(&tree) {
        let raw = read_config_layers(archive, &config_root)?
            .into_iter()
            .map(|(module, _)| module)
            .collect::<Vec<_>>();
        let merged = config::merge_module_data(&raw.iter().collect::<Vec<_>>());
        merged.check_namespace_subset();
        let meta_dir = meta.as_ref().map(|(d, _)| d.as_str());
        let (name, version) = identity_for(archive, meta_dir);
        let working = tree
            .subtree(&config_root)
            .unwrap_or_else(|| tree.clone());
        return Ok(simulate(&working, &merged, &name, &version));
    }

    Err(SimError::NoModuleEvidence)
}

/// Run the simulation pipeline on a tree already rooted at the
/// configuration file's parent.
pub fn simulate(
    tree: &VirtualFileTree,
    raw: &RawModuleData,
    project: &ProjectName,
    version: &Version,
) -> ModuleSet {
    let mut working = tree.clone();

    if let Some(package_dir) = raw.package_dir.value() {
        working = apply_package_dir(&working, package_dir, "");
    }

    let packages: Option<Vec<String>> = match &raw.packages {
        Keyword::Value(PackagesSpec::List(list)) => Some(list.clone()),
        Keyword::Value(PackagesSpec::Find(directive)) => {
            Some(resolve_find_packages(&working, directive, ""))
        }
        Keyword::Unresolvable => {
            log::warn!("packages keyword unresolvable; preserving raw tree");
            None
        }
        Keyword::Absent => None,
    };
    let py_modules: Option<Vec<String>> = match &raw.py_modules {
        Keyword::Value(list) => Some(list.clone()),
        Keyword::Unresolvable => {
            log::warn!("py_modules keyword unresolvable; preserving raw tree");
            None
        }
        Keyword::Absent => None,
    };

    // With neither packages nor py_modules the raw tree is preserved, which
    // reproduces the stray `__init__.py` artifacts of misconfigured layouts.
    // Build inputs themselves never install.
    if packages.is_some() || py_modules.is_some() {
        working = prune_to_packages(
            &working,
            packages.as_deref().unwrap_or_default(),
            py_modules.as_deref().unwrap_or_default(),
            "",
        );
    } else {
        for config_file in ["setup.py", "setup.cfg", "pyproject.toml"] {
            working.remove(config_file);
        }
    }

    if let Some(namespaces) = raw.namespace_packages.value() {
        working = apply_namespace_packages(&working, namespaces, project, version);
    }

    enumerate_modules(&working)
}

/// Parse every configuration file present at the root, ordered by
/// precedence: setup.py, setup.cfg, pyproject.toml. A file that fails to
/// parse is skipped with a warning; when every present file fails, the
/// first error propagates since no module evidence survived.
pub fn read_config_layers(
    archive: &mut PackageArchive,
    config_root: &str,
) -> Result<Vec<(RawModuleData, DependencyKeywords)>, SimError> {
    let mut layers = Vec::new();
    let mut first_error: Option<ConfigError> = None;
    let mut tried = 0usize;

    let setup_py = join(config_root, "setup.py");
    if archive.has_file(&setup_py) {
        tried += 1;
        match config::extract_setup_py(&archive.read_to_string(&setup_py)?) {
            Ok(layer) => layers.push(layer),
            Err(e) => {
                log::warn!("setup.py extraction failed: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    let setup_cfg = join(config_root, "setup.cfg");
    if archive.has_file(&setup_cfg) {
        tried += 1;
        match config::parse_setup_cfg(&archive.read_to_string(&setup_cfg)?) {
            Ok(layer) => layers.push(layer),
            Err(e) => {
                log::warn!("setup.cfg parse failed: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    let pyproject = join(config_root, "pyproject.toml");
    if archive.has_file(&pyproject) {
        tried += 1;
        match config::parse_pyproject(&archive.read_to_string(&pyproject)?) {
            Ok(layer) => layers.push(layer),
            Err(e) => {
                log::warn!("pyproject.toml parse failed: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if layers.is_empty() && tried > 0 {
        if let Some(error) = first_error {
            return Err(SimError::Config(error));
        }
    }
    Ok(layers)
}

/// Extract dependency data by evidence priority: metadata files first
/// (requires.txt, then METADATA / PKG-INFO with Requires-Dist), then
/// configuration files.
pub fn extract_dependencies(
    archive: &mut PackageArchive,
) -> Result<crate::metadata::RawDependencyData, SimError> {
    let meta = locate_metadata_dir(archive);
    if let Some((meta_dir, flavor)) = &meta {
        let requires_path = join(meta_dir, "requires.txt");
        if archive.has_file(&requires_path) {
            let content = archive.read_to_string(&requires_path)?;
            return Ok(metadata::parse_requires_txt(&content));
        }
        let metadata_name = match flavor {
            MetadataFlavor::DistInfo => "METADATA",
            _ => "PKG-INFO",
        };
        let metadata_path = join(meta_dir, metadata_name);
        if archive.has_file(&metadata_path) {
            let content = archive.read_to_string(&metadata_path)?;
            let data = metadata::parse_metadata_core(&content);
            // Old metadata revisions never carry Requires-Dist even when
            // dependencies exist; fall through to config files then.
            if !data.is_empty() || *flavor == MetadataFlavor::DistInfo {
                return Ok(data);
            }
        }
    }

    let tree = build_file_tree(archive)?;
    if let Some(config_root) = find_config_root(&tree) {
        let layers = read_config_layers(archive, &config_root)?;
        let deps: Vec<&DependencyKeywords> = layers.iter().map(|(_, d)| d).collect();
        return Ok(config::merge_dependency_data(&deps));
    }
    Ok(crate::metadata::RawDependencyData::default())
}

/// Convenience used by tests and callers holding raw bytes.
pub fn extract_modules_from_bytes(
    filename: &str,
    bytes: Vec<u8>,
) -> Result<ModuleSet, SimError> {
    let mut archive = PackageArchive::from_bytes(filename, bytes)?;
    extract_modules(&mut archive)
}
