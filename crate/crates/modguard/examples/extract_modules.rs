//! Installation-free module extraction: build an sdist whose configuration
//! renames a directory, prunes to declared packages and strips a namespace
//! `__init__.py`, then show the before/after module paths.
//!
//! Run with: cargo run --example extract_modules

use modguard::archive::{build_file_tree, PackageArchive};
use modguard::fixtures::presets;
use modguard::sim;

fn main() {
    let spec = presets::pugs_sdist();
    let bytes = spec.build().expect("fixture builds");
    let filename = spec.filename();

    let mut archive = PackageArchive::from_bytes(&filename, bytes).expect("archive opens");

    println!("archive: {filename}");
    println!("\nfiles inside the archive (pre-install):");
    let tree = build_file_tree(&mut archive).expect("tree builds");
    for (path, _) in tree.files() {
        println!("  {path}");
    }

    let modules = sim::extract_modules(&mut archive).expect("extraction succeeds");
    println!("\nsimulated post-install module paths:");
    for (path, digest) in modules.iter() {
        let short = digest.get(..14).unwrap_or(digest);
        println!("  {path}  {short}");
    }

    println!("\nimportable top-level names: {:?}", modules.top_level_names());
    println!(
        "\nnote: pugs/ was renamed to pugs_lib/ by package_dir, setup.py was dropped,\n\
         namespace_pugs/__init__.py was stripped and a .pth shim appeared."
    );
}
