//! Requirement grammar and marker evaluation: the same dependency list
//! filters differently under different environment profiles and extras.
//!
//! Run with: cargo run --example eval_markers

use modguard::pep::{eval_marker, parse_requirement, EnvironmentProfile};
use std::collections::BTreeSet;

fn main() {
    let lines = [
        "numpy>=1.21.0; python_version >= '3.11'",
        "pytz>=2020.1",
        "pywin32>=305; sys_platform == 'win32'",
        "hypothesis>=5.5.3; extra == 'toml'",
        "tomli>=1.0; python_version < '3.11' and extra == 'toml'",
        "uvloop>=0.17; 'linux' in sys_platform",
    ];

    let mut linux_310 = EnvironmentProfile::default_linux();
    linux_310.set("python_version", "3.10").unwrap();
    let mut linux_311 = EnvironmentProfile::default_linux();
    linux_311.set("python_version", "3.11").unwrap();
    linux_311.set("python_full_version", "3.11.4").unwrap();

    let no_extras = BTreeSet::new();
    let toml_extra: BTreeSet<String> = ["toml".to_string()].into();

    println!(
        "{:<55} {:>9} {:>9} {:>12}",
        "requirement", "3.10", "3.11", "3.10+toml"
    );
    for line in lines {
        let requirement = parse_requirement(line).expect("parses");
        let mut row = Vec::new();
        for (env, extras) in [
            (&linux_310, &no_extras),
            (&linux_311, &no_extras),
            (&linux_310, &toml_extra),
        ] {
            let keep = match &requirement.marker {
                None => true,
                Some(marker) => eval_marker(marker, env, extras).expect("known variables"),
            };
            row.push(if keep { "keep" } else { "drop" });
        }
        println!("{line:<55} {:>9} {:>9} {:>12}", row[0], row[1], row[2]);
    }

    let requirement = parse_requirement("pandas[compression,performance]>=1.5; os_name == 'posix'")
        .expect("parses");
    println!("\nparsed form of a full requirement line:");
    println!("  name      = {}", requirement.name);
    println!("  extras    = {:?}", requirement.extras);
    println!("  specifier = {}", requirement.specifier);
    println!("  marker    = {}", requirement.marker.as_ref().unwrap());
    println!("  canonical = {requirement}");
}
