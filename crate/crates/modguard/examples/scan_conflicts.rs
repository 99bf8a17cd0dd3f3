//! The three module-conflict patterns on one screen: a package shadowing
//! standard-library names, two unrelated packages sharing a module path, and
//! two packages colliding inside one dependency graph.
//!
//! Run with: cargo run --example scan_conflicts

use modguard::conflict::{
    detect_module_in_dep, detect_module_to_lib, detect_module_to_tpl, summarize, StdlibCatalog,
};
use modguard::fixtures::presets;
use modguard::kb::IndexStore;
use modguard::pep::EnvironmentProfile;
use modguard::resolver::{resolve, ResolveOptions};
use modguard::sim;

fn main() {
    let mut findings = Vec::new();

    // Pattern 1: shadowing the standard library.
    let catalog = StdlibCatalog::bundled();
    println!(
        "stdlib catalog: {} names ({})",
        catalog.len(),
        catalog.label()
    );
    let shadow = presets::stdlib_shadow();
    let modules =
        sim::extract_modules_from_bytes(&shadow.filename(), shadow.build().unwrap()).unwrap();
    findings.extend(detect_module_to_lib(&modules, &catalog));

    // Pattern 2: unrelated packages sharing a path.
    let mut store = IndexStore::in_memory();
    for spec in presets::jwt_pair() {
        store
            .ingest_bytes(&spec.filename(), spec.build().unwrap())
            .unwrap();
    }
    findings.extend(detect_module_to_tpl(&store.latest_records(), false));

    // Case-insensitive filesystems surface one more kind of collision.
    let mut case_store = IndexStore::in_memory();
    for spec in presets::crypto_case_pair() {
        case_store
            .ingest_bytes(&spec.filename(), spec.build().unwrap())
            .unwrap();
    }
    findings.extend(detect_module_to_tpl(&case_store.latest_records(), true));

    // Pattern 3: collisions inside one dependency graph.
    let mut dep_store = IndexStore::in_memory();
    for spec in presets::cv2_conflict_index() {
        dep_store
            .ingest_bytes(&spec.filename(), spec.build().unwrap())
            .unwrap();
    }
    let env = EnvironmentProfile::default_linux();
    let roots = vec!["emoca==1.0".parse().unwrap()];
    let (graph, _) = resolve(&roots, &env, &dep_store, &ResolveOptions::default()).unwrap();
    findings.extend(detect_module_in_dep(&graph, &dep_store).unwrap());

    let report = summarize(&findings, 10);
    println!("\n{}", report.to_text());
}
