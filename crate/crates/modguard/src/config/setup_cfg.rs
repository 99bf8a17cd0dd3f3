use super::{ConfigError, DependencyKeywords};
use crate::metadata::{FindDirective, Keyword, PackagesSpec, Provenance, RawModuleData};
use crate::pep::parse_requirement;
use std::collections::BTreeMap;

/// One parsed INI section: ordered key → list of raw value items. Multi-line
/// values keep one item per continuation line, matching how setuptools reads
/// dangling lists.
type Section = Vec<(String, Vec<String>)>;

fn parse_ini(content: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;

    for (idx, raw_line) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }

        if trimmed.starts_with('[') {
            let Some(name) = trimmed.strip_prefix('[').and_then(|l| l.strip_suffix(']')) else {
                return Err(ConfigError::MalformedIni {
                    line: line_no,
                    message: format!("unterminated section header {trimmed:?}"),
                });
            };
            let name = name.trim().to_string();
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }

        let indented = raw_line.starts_with(' ') || raw_line.starts_with('\t');
        let Some(section_name) = &current else {
            return Err(ConfigError::MalformedIni {
                line: line_no,
                message: format!("content outside of any section: {trimmed:?}"),
            });
        };
        let section = sections.get_mut(section_name).unwrap();

        if indented {
            // Continuation line belonging to the previous key.
            let Some((_, values)) = section.last_mut() else {
                return Err(ConfigError::MalformedIni {
                    line: line_no,
                    message: format!("continuation line without a key: {trimmed:?}"),
                });
            };
            values.push(trimmed.to_string());
        } else {
            let (key, value) = match trimmed.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v.trim()),
                None => match trimmed.split_once(':') {
                    Some((k, v)) => (k.trim().to_string(), v.trim()),
                    None => {
                        return Err(ConfigError::MalformedIni {
                            line: line_no,
                            message: format!("expected key = value, found {trimmed:?}"),
                        })
                    }
                },
            };
            let values = if value.is_empty() {
                Vec::new()
            } else {
                vec![value.to_string()]
            };
            section.push((key, values));
        }
    }
    Ok(sections)
}

fn lookup<'a>(sections: &'a BTreeMap<String, Section>, section: &str, key: &str) -> Option<&'a [String]> {
    sections
        .get(section)?
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_slice())
}

/// Split list-valued items on commas as well as lines: `packages = a, b`.
fn name_list(items: &[String]) -> Vec<String> {
    items
        .iter()
        .flat_map(|item| item.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn requirement_lines(items: &[String], context: &str) -> Vec<crate::pep::Requirement> {
    let mut out = Vec::new();
    for item in items {
        match parse_requirement(item) {
            Ok(req) => out.push(req),
            Err(e) => log::warn!("setup.cfg {context}: skipping {item:?}: {e}"),
        }
    }
    out
}

/// Parse setup.cfg. Reads the `[options]` keys py_modules, packages,
/// package_dir, namespace_packages and install_requires, the
/// `[options.extras_require]` section, and `[options.packages.find]` when
/// `packages = find:` is used.
pub fn parse_setup_cfg(
    content: &str,
) -> Result<(RawModuleData, DependencyKeywords), ConfigError> {
    let sections = parse_ini(content)?;
    let mut module = RawModuleData {
        provenance: Some(Provenance::ConfigCfg),
        ..Default::default()
    };

    if let Some(items) = lookup(&sections, "options", "py_modules") {
        module.py_modules = Keyword::Value(name_list(items));
    }
    if let Some(items) = lookup(&sections, "options", "namespace_packages") {
        module.namespace_packages = Keyword::Value(name_list(items));
    }
    if let Some(items) = lookup(&sections, "options", "packages") {
        let flat = name_list(items);
        if flat.iter().any(|v| v == "find:" || v == "find_namespace:") {
            let namespaces = flat.iter().any(|v| v == "find_namespace:");
            let mut directive = FindDirective {
                namespaces,
                ..Default::default()
            };
            if let Some(where_items) = lookup(&sections, "options.packages.find", "where") {
                if let Some(first) = name_list(where_items).into_iter().next() {
                    directive.where_dir = if first == "." { String::new() } else { first };
                }
            }
            if let Some(include) = lookup(&sections, "options.packages.find", "include") {
                directive.include = name_list(include);
            }
            if let Some(exclude) = lookup(&sections, "options.packages.find", "exclude") {
                directive.exclude = name_list(exclude);
            }
            module.packages = Keyword::Value(PackagesSpec::Find(directive));
        } else {
            module.packages = Keyword::Value(PackagesSpec::List(flat));
        }
    }
    if let Some(items) = lookup(&sections, "options", "package_dir") {
        let mut map = BTreeMap::new();
        for item in items {
            let Some((post, pre)) = item.split_once('=') else {
                log::warn!("setup.cfg package_dir: expected post = pre, found {item:?}");
                continue;
            };
            map.insert(post.trim().to_string(), pre.trim().to_string());
        }
        module.package_dir = Keyword::Value(map);
    }

    let mut deps = DependencyKeywords::default();
    if let Some(items) = lookup(&sections, "options", "install_requires") {
        deps.install = Keyword::Value(requirement_lines(items, "install_requires"));
    }
    if let Some(section) = sections.get("options.extras_require") {
        let mut extras = BTreeMap::new();
        for (extra, items) in section {
            let name = match crate::pep::normalize_name(extra) {
                Ok(n) => n.normalized().to_string(),
                Err(e) => {
                    log::warn!("setup.cfg extras_require: bad extra name {extra:?}: {e}");
                    continue;
                }
            };
            extras.insert(name, requirement_lines(items, "extras_require"));
        }
        deps.extras = Keyword::Value(extras);
    }

    Ok((module, deps))
}
