//! Requirement ordering matters for backtracking cost, not for the result:
//! resolving pinned versions first avoids repeatedly invalidating greedy
//! newest-first picks.
//!
//! Run with: cargo run --example backtracking_priority

use modguard::fixtures;
use modguard::kb::IndexStore;
use modguard::pep::{EnvironmentProfile, Requirement};
use modguard::resolver::{resolve, OrderPolicy, ResolveOptions};

fn main() {
    let adversarial = fixtures::backtrack_heavy_index();
    let mut store = IndexStore::in_memory();
    for spec in &adversarial.specs {
        store
            .ingest_bytes(&spec.filename(), spec.build().unwrap())
            .unwrap();
    }
    let roots: Vec<Requirement> = adversarial
        .roots
        .iter()
        .map(|r| r.parse().unwrap())
        .collect();
    let env = EnvironmentProfile::default_linux();

    println!("index:");
    for name in store.project_names().collect::<Vec<_>>() {
        let project = modguard::pep::normalize_name(name).unwrap();
        let versions: Vec<String> = store
            .query_versions(&project)
            .iter()
            .map(|v| v.to_string())
            .collect();
        println!("  {name}: {}", versions.join(", "));
    }
    println!("roots: {:?}\n", adversarial.roots);

    for (label, order) in [
        ("prioritized (pinned first, shallow first)", OrderPolicy::Prioritized),
        ("first-in-first-out", OrderPolicy::Fifo),
    ] {
        let options = ResolveOptions {
            order,
            ..Default::default()
        };
        let (graph, stats) = resolve(&roots, &env, &store, &options).expect("resolvable");
        let nodes: Vec<String> = graph.node_ids().into_iter().collect();
        println!("{label}:");
        println!("  solution   = {}", nodes.join(", "));
        println!("  backtracks = {}", stats.backtracks);
        println!("  candidates = {}", stats.candidates_tried);
    }
}
