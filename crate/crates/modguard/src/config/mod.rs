//! Extraction of module and dependency data from the three configuration
//! files: formatted parsing for setup.cfg and pyproject.toml, static
//! analysis for the executable setup.py script.

mod pyproject;
mod setup_cfg;
mod setup_py;

pub use pyproject::parse_pyproject;
pub use setup_cfg::parse_setup_cfg;
pub use setup_py::extract_setup_py;

use crate::metadata::{Keyword, RawDependencyData, RawModuleData};
use crate::pep::Requirement;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("malformed ini at line {line}: {message}")]
    MalformedIni { line: usize, message: String },
    #[error("malformed toml: {0}")]
    MalformedToml(String),
    #[error("setup.py unparseable at line {line}: {message}")]
    ScriptUnparseable { line: usize, message: String },
    #[error("no setup() call found")]
    NoSetupCall,
}

/// Dependency keywords of one configuration source, each independently
/// absent / resolved / unresolvable so precedence can fall through
/// per keyword.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DependencyKeywords {
    pub install: Keyword<Vec<Requirement>>,
    pub extras: Keyword<BTreeMap<String, Vec<Requirement>>>,
}

fn merge_keyword<T: Clone>(layers: &[&Keyword<T>]) -> Keyword<T> {
    let mut saw_unresolvable = false;
    for layer in layers {
        match layer {
            Keyword::Value(v) => return Keyword::Value(v.clone()),
            Keyword::Unresolvable => saw_unresolvable = true,
            Keyword::Absent => {}
        }
    }
    if saw_unresolvable {
        Keyword::Unresolvable
    } else {
        Keyword::Absent
    }
}

/// Merge per-keyword over precedence layers, highest first
/// (setup.py > setup.cfg > pyproject.toml). A keyword that is unresolvable
/// at one level falls through to the next.
pub fn merge_module_data(layers: &[&RawModuleData]) -> RawModuleData {
    let provenance = layers
        .iter()
        .find(|l| l.provenance.is_some())
        .and_then(|l| l.provenance);
    RawModuleData {
        py_modules: merge_keyword(&layers.iter().map(|l| &l.py_modules).collect::<Vec<_>>()),
        packages: merge_keyword(&layers.iter().map(|l| &l.packages).collect::<Vec<_>>()),
        package_dir: merge_keyword(&layers.iter().map(|l| &l.package_dir).collect::<Vec<_>>()),
        namespace_packages: merge_keyword(
            &layers
                .iter()
                .map(|l| &l.namespace_packages)
                .collect::<Vec<_>>(),
        ),
        provenance,
    }
}

/// Merge dependency keywords over precedence layers and flatten into
/// concrete dependency data (unresolved keywords become empty).
pub fn merge_dependency_data(layers: &[&DependencyKeywords]) -> RawDependencyData {
    let install = merge_keyword(&layers.iter().map(|l| &l.install).collect::<Vec<_>>());
    let extras = merge_keyword(&layers.iter().map(|l| &l.extras).collect::<Vec<_>>());
    let mut data = RawDependencyData::default();
    match install {
        Keyword::Value(reqs) => {
            for req in reqs {
                data.push_install(req);
            }
        }
        Keyword::Unresolvable => log::warn!("install requirements are unresolvable"),
        Keyword::Absent => {}
    }
    match extras {
        Keyword::Value(map) => {
            for (extra, reqs) in map {
                data.extras.entry(extra.clone()).or_default();
                for req in reqs {
                    data.push_extra(&extra, req);
                }
            }
        }
        Keyword::Unresolvable => log::warn!("extra requirements are unresolvable"),
        Keyword::Absent => {}
    }
    data
}
