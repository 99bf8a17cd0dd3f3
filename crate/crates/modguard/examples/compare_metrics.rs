//! The four-way comparison metric between an expected and an actual result:
//! Correct, Miss, Excess, Error — over module sets and dependency graphs.
//!
//! Run with: cargo run --example compare_metrics

use modguard::resolver::{
    compare_graphs, compare_sets, CompareLevel, DependencyGraph, ROOT_ID,
};
use std::collections::BTreeSet;

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn main() {
    let expected = set(&["pkg/__init__.py", "pkg/core.py", "cli.py"]);
    println!("expected module set: {expected:?}\n");

    let cases = [
        ("identical", expected.clone()),
        ("one file missing", set(&["pkg/__init__.py", "cli.py"])),
        (
            "one extra file",
            set(&["pkg/__init__.py", "pkg/core.py", "cli.py", "stray.py"]),
        ),
        (
            "missing and extra",
            set(&["pkg/__init__.py", "cli.py", "stray.py"]),
        ),
    ];
    for (label, actual) in &cases {
        println!("{label:<18} -> {}", compare_sets(&expected, actual));
    }

    // Graphs compare at node level or node+edge level.
    let mut expected_graph = DependencyGraph::default();
    expected_graph
        .nodes
        .insert("numpy".to_string(), "1.24.0".parse().unwrap());
    expected_graph.edges.insert((
        ROOT_ID.to_string(),
        "numpy==1.24.0".to_string(),
        "numpy>=1.21.0".to_string(),
    ));

    let mut label_differs = expected_graph.clone();
    label_differs.edges.clear();
    label_differs.edges.insert((
        ROOT_ID.to_string(),
        "numpy==1.24.0".to_string(),
        "numpy".to_string(),
    ));

    println!(
        "\nsame nodes, different edge label: node-level {} / edge-level {}",
        compare_graphs(&expected_graph, &label_differs, CompareLevel::Node),
        compare_graphs(&expected_graph, &label_differs, CompareLevel::Edge),
    );
}
