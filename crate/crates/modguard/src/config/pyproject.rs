use super::{ConfigError, DependencyKeywords};
use crate::metadata::{FindDirective, Keyword, PackagesSpec, Provenance, RawModuleData};
use crate::pep::parse_requirement;
use std::collections::BTreeMap;

fn string_list(value: &toml::Value, context: &str) -> Vec<String> {
    match value.as_array() {
        Some(items) => items
            .iter()
            .filter_map(|v| match v.as_str() {
                Some(s) => Some(s.to_string()),
                None => {
                    log::warn!("pyproject {context}: ignoring non-string entry {v:?}");
                    None
                }
            })
            .collect(),
        None => {
            log::warn!("pyproject {context}: expected an array, found {value:?}");
            Vec::new()
        }
    }
}

fn requirement_list(value: &toml::Value, context: &str) -> Vec<crate::pep::Requirement> {
    string_list(value, context)
        .iter()
        .filter_map(|line| match parse_requirement(line) {
            Ok(req) => Some(req),
            Err(e) => {
                log::warn!("pyproject {context}: skipping {line:?}: {e}");
                None
            }
        })
        .collect()
}

fn nested<'a>(root: &'a toml::Value, path: &[&str]) -> Option<&'a toml::Value> {
    let mut node = root;
    for key in path {
        node = node.as_table()?.get(*key)?;
    }
    Some(node)
}

/// Parse pyproject.toml: `project.dependencies` and
/// `project.optional-dependencies` for dependency data, and the hyphenated
/// `tool.setuptools` keys (py-modules, packages, package-dir) for module
/// data.
pub fn parse_pyproject(
    content: &str,
) -> Result<(RawModuleData, DependencyKeywords), ConfigError> {
    let root: toml::Value = content
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::MalformedToml(e.to_string()))?;

    let mut module = RawModuleData {
        provenance: Some(Provenance::ConfigToml),
        ..Default::default()
    };
    let mut deps = DependencyKeywords::default();

    if let Some(value) = nested(&root, &["project", "dependencies"]) {
        deps.install = Keyword::Value(requirement_list(value, "project.dependencies"));
    }
    if let Some(value) = nested(&root, &["project", "optional-dependencies"]) {
        match value.as_table() {
            Some(table) => {
                let mut extras = BTreeMap::new();
                for (extra, reqs) in table {
                    let name = match crate::pep::normalize_name(extra) {
                        Ok(n) => n.normalized().to_string(),
                        Err(e) => {
                            log::warn!("pyproject optional-dependencies: bad extra {extra:?}: {e}");
                            continue;
                        }
                    };
                    extras.insert(name, requirement_list(reqs, "optional-dependencies"));
                }
                deps.extras = Keyword::Value(extras);
            }
            None => log::warn!("pyproject optional-dependencies: expected a table"),
        }
    }

    if let Some(value) = nested(&root, &["tool", "setuptools", "py-modules"]) {
        module.py_modules = Keyword::Value(string_list(value, "py-modules"));
    }
    if let Some(value) = nested(&root, &["tool", "setuptools", "packages"]) {
        if let Some(find) = value.as_table().and_then(|t| t.get("find")) {
            let mut directive = FindDirective::default();
            if let Some(where_value) = find.as_table().and_then(|t| t.get("where")) {
                if let Some(first) = string_list(where_value, "packages.find.where")
                    .into_iter()
                    .next()
                {
                    directive.where_dir = if first == "." { String::new() } else { first };
                }
            }
            if let Some(include) = find.as_table().and_then(|t| t.get("include")) {
                directive.include = string_list(include, "packages.find.include");
            }
            if let Some(exclude) = find.as_table().and_then(|t| t.get("exclude")) {
                directive.exclude = string_list(exclude, "packages.find.exclude");
            }
            if let Some(ns) = find
                .as_table()
                .and_then(|t| t.get("namespaces"))
                .and_then(toml::Value::as_bool)
            {
                directive.namespaces = ns;
            }
            module.packages = Keyword::Value(PackagesSpec::Find(directive));
        } else {
            module.packages = Keyword::Value(PackagesSpec::List(string_list(value, "packages")));
        }
    }
    if let Some(value) = nested(&root, &["tool", "setuptools", "package-dir"]) {
        match value.as_table() {
            Some(table) => {
                let mut map = BTreeMap::new();
                for (post, pre) in table {
                    match pre.as_str() {
                        Some(pre) => {
                            map.insert(post.clone(), pre.to_string());
                        }
                        None => log::warn!("pyproject package-dir: non-string value for {post:?}"),
                    }
                }
                module.package_dir = Keyword::Value(map);
            }
            None => log::warn!("pyproject package-dir: expected a table"),
        }
    }

    Ok((module, deps))
}
