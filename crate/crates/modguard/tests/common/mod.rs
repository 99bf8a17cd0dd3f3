//! Helpers shared by the integration suites.
#![allow(dead_code)]

use modguard::fixtures::FixtureSpec;
use modguard::kb::IndexStore;
use std::path::{Path, PathBuf};

/// Build every spec into an in-memory store.
pub fn store_from_specs(specs: &[FixtureSpec]) -> IndexStore {
    let mut store = IndexStore::in_memory();
    for spec in specs {
        store
            .ingest_bytes(&spec.filename(), spec.build().unwrap())
            .unwrap();
    }
    store
}

/// Write a built fixture archive into `dir`, returning its path.
pub fn write_fixture(dir: &Path, spec: &FixtureSpec) -> PathBuf {
    let path = dir.join(spec.filename());
    std::fs::write(&path, spec.build().unwrap()).unwrap();
    path
}

/// Run the command line in-process, capturing stdout and the exit code.
pub fn run_cli(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["modguard".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let mut out = Vec::new();
    let code = modguard::cli::run(&argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}
