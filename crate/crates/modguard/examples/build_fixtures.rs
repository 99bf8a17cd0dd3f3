//! Declarative fixture specs become real, byte-reproducible archives: the
//! same JSON spec always builds the same wheel or sdist.
//!
//! Run with: cargo run --example build_fixtures

use modguard::fixtures::{presets, FixtureSpec};
use modguard::kb::IndexStore;

fn main() {
    // A spec is plain JSON.
    let spec = presets::pugs_sdist();
    println!(
        "fixture spec as JSON:\n{}\n",
        serde_json::to_string_pretty(&spec).unwrap()
    );

    // Round-trip the JSON and build; building twice is byte-identical.
    let json = serde_json::to_string(&spec).unwrap();
    let reloaded: FixtureSpec = serde_json::from_str(&json).unwrap();
    let first = reloaded.build().unwrap();
    let second = reloaded.build().unwrap();
    assert_eq!(first, second);
    println!(
        "built {} -> {} bytes (reproducible: {})",
        reloaded.filename(),
        first.len(),
        first == second
    );

    // Write a few archives to a scratch directory and ingest them.
    let dir = std::env::temp_dir().join("modguard-example-fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    let mut store = IndexStore::in_memory();
    for spec in [presets::demo_wheel(), presets::pugs_sdist(), presets::stdlib_shadow()] {
        let path = dir.join(spec.filename());
        std::fs::write(&path, spec.build().unwrap()).unwrap();
        let record = store
            .ingest_bytes(&spec.filename(), std::fs::read(&path).unwrap())
            .unwrap();
        println!(
            "wrote {} and ingested {} ({} modules)",
            path.display(),
            record.id(),
            record.modules.len()
        );
    }

    // A seeded random index is reproducible too.
    let index = modguard::fixtures::gen_random_index(7, 4, 3, 2);
    println!("\nseed 7 random index:");
    for spec in &index {
        println!(
            "  {}=={} requires {:?}",
            spec.name, spec.version, spec.install_requires
        );
    }
}
