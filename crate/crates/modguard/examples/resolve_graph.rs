//! Environment-aware dependency resolution: markers drop dependencies that
//! do not apply to the environment, extras pull optional groups in.
//!
//! Run with: cargo run --example resolve_graph

use modguard::fixtures::presets;
use modguard::kb::IndexStore;
use modguard::pep::EnvironmentProfile;
use modguard::resolver::{resolve, ResolveOptions};

fn main() {
    let mut store = IndexStore::in_memory();
    for spec in presets::versioneer_index() {
        store
            .ingest_bytes(&spec.filename(), spec.build().unwrap())
            .expect("fixture ingests");
    }

    let env_310 = EnvironmentProfile::default_linux();
    let mut env_39 = EnvironmentProfile::default_linux();
    env_39.set("python_version", "3.9").unwrap();
    env_39.set("python_full_version", "3.9.18").unwrap();

    for (label, env, root) in [
        ("python 3.10, no extras", &env_310, "versioneer"),
        ("python 3.9, no extras ", &env_39, "versioneer"),
        ("python 3.10, [toml]   ", &env_310, "versioneer[toml]"),
    ] {
        let roots = vec![root.parse().unwrap()];
        let (graph, stats) =
            resolve(&roots, env, &store, &ResolveOptions::default()).expect("resolvable");
        let nodes: Vec<String> = graph.node_ids().into_iter().collect();
        println!("{label} -> {}", nodes.join(", "));
        println!(
            "    backtracks={} candidates_tried={}",
            stats.backtracks, stats.candidates_tried
        );
    }

    // Full graph JSON for the extras case.
    let roots = vec!["versioneer[toml]".parse().unwrap()];
    let (graph, _) = resolve(&roots, &env_310, &store, &ResolveOptions::default()).unwrap();
    println!(
        "\ngraph JSON:\n{}",
        serde_json::to_string_pretty(&graph.to_json()).unwrap()
    );
}
