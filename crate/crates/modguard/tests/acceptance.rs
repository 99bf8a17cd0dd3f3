//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Ground truth for module extraction comes from real `pip install --target`
//! runs over the fixture corpus; resolver correctness is checked against an
//! exhaustive enumeration oracle; conflict detection against a naive
//! pairwise oracle.

mod common;

use common::{run_cli, store_from_specs, write_fixture};
use modguard::archive::DistributionKind;
use modguard::conflict::{
    detect_module_in_dep, detect_module_to_lib, detect_module_to_tpl, ConflictFinding, Pattern,
    StdlibCatalog, Subject,
};
use modguard::fixtures::{self, presets, ConfigFlavor, FixtureSpec, PackagesDecl};
use modguard::kb::{IndexStore, PackageRecord};
use modguard::pep::{
    eval_marker, normalize_name, parse_requirement, parse_version, EnvironmentProfile,
    Requirement, Version,
};
use modguard::resolver::{
    node_id, resolve, DependencyGraph, OrderPolicy, ResolveError, ResolveOptions, ROOT_ID,
};
use modguard::sim;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn env_default() -> EnvironmentProfile {
    EnvironmentProfile::default_linux()
}

/// Criterion 1: the namespace-sdist fixture simulates to exactly its
/// post-install module set.
#[test]
fn acceptance_01_namespace_sdist_reproduction() {
    let started = Instant::now();
    let spec = presets::pugs_sdist();
    let modules = sim::extract_modules_from_bytes(&spec.filename(), spec.build().unwrap())
        .expect("extraction succeeds");
    let actual: Vec<&str> = modules.paths().collect();
    assert_eq!(actual, presets::pugs_expected_modules());
    assert!(!modules.contains_path("namespace_pugs/__init__.py"));
    assert!(modules.contains_path("pugs-0.0.1-py3-nspkg.pth"));
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1s");
    println!("PASS criterion 1: namespace sdist simulates to its exact post-install set ({elapsed:?})");
}

/// The ground-truth corpus: at least one fixture per metadata and
/// configuration source.
fn ground_truth_corpus() -> Vec<FixtureSpec> {
    let mut corpus = Vec::new();

    // Wheel with RECORD.
    corpus.push(presets::demo_wheel());

    // Egg with EGG-INFO metadata.
    let mut egg = FixtureSpec::new("eggpkg", "0.3", DistributionKind::Egg);
    egg.files
        .insert("eggmod/__init__.py".to_string(), String::new());
    egg.files
        .insert("eggmod/util.py".to_string(), "u = 1\n".to_string());
    corpus.push(egg);

    // Sdist carrying egg-info metadata (top_level + SOURCES + requires.txt).
    let mut meta = FixtureSpec::new("metasrc", "1.2", DistributionKind::SdistTarGz);
    meta.files
        .insert("metasrc/__init__.py".to_string(), String::new());
    meta.files
        .insert("metasrc/core.py".to_string(), "c = 1\n".to_string());
    meta.packages = Some(PackagesDecl::List(vec!["metasrc".to_string()]));
    meta.install_requires = vec!["pytz>=2020.1".to_string()];
    meta.with_metadata = true;
    corpus.push(meta);

    // Config-only sdists in all three flavors.
    let mut base = FixtureSpec::new("cfgdemo", "2.0", DistributionKind::SdistTarGz);
    base.files
        .insert("cfgdemo/__init__.py".to_string(), String::new());
    base.files
        .insert("cfgdemo/api.py".to_string(), "a = 1\n".to_string());
    base.packages = Some(PackagesDecl::List(vec!["cfgdemo".to_string()]));
    for (name, flavor) in [
        ("scriptpkg", ConfigFlavor::SetupPy),
        ("cfgpkg", ConfigFlavor::SetupCfg),
        ("tomlpkg", ConfigFlavor::Pyproject),
    ] {
        let mut spec = base.clone();
        spec.name = name.to_string();
        spec.config_flavor = flavor;
        spec.files = BTreeMap::from([
            (format!("{name}/__init__.py"), String::new()),
            (format!("{name}/api.py"), "a = 1\n".to_string()),
        ]);
        spec.packages = Some(PackagesDecl::List(vec![name.to_string()]));
        corpus.push(spec);
    }

    // find_packages() with an excluded test tree.
    let mut find = FixtureSpec::new("findpkg", "0.5", DistributionKind::SdistTarGz);
    find.files
        .insert("findmod/__init__.py".to_string(), String::new());
    find.files
        .insert("findmod/sub/__init__.py".to_string(), String::new());
    find.files
        .insert("findmod/sub/deep.py".to_string(), "d = 1\n".to_string());
    find.files
        .insert("tests/__init__.py".to_string(), String::new());
    find.packages = Some(PackagesDecl::Find {
        where_dir: None,
        exclude: vec!["tests*".to_string()],
    });
    corpus.push(find);

    // package_dir rename.
    let mut renamed = FixtureSpec::new("renamed", "0.7", DistributionKind::SdistTarGz);
    renamed
        .files
        .insert("inner/__init__.py".to_string(), String::new());
    renamed
        .files
        .insert("inner/greeting.py".to_string(), "g = 1\n".to_string());
    renamed.packages = Some(PackagesDecl::List(vec!["outer_lib".to_string()]));
    renamed
        .package_dir
        .insert("outer_lib".to_string(), "inner".to_string());
    corpus.push(renamed);

    // src-layout hoist via the empty package_dir key.
    let mut hoist = FixtureSpec::new("hoisted", "0.8", DistributionKind::SdistTarGz);
    hoist
        .files
        .insert("src/hoistmod/__init__.py".to_string(), String::new());
    hoist
        .files
        .insert("src/hoistmod/core.py".to_string(), "h = 1\n".to_string());
    hoist.packages = Some(PackagesDecl::List(vec!["hoistmod".to_string()]));
    hoist
        .package_dir
        .insert(String::new(), "src".to_string());
    corpus.push(hoist);

    // Namespace semantics, shipped post-install inside a wheel (the sdist
    // form is covered by criterion 1; installers no longer accept it).
    let mut ns_wheel = FixtureSpec::new("nsdemo", "0.0.1", DistributionKind::Wheel);
    ns_wheel
        .files
        .insert("namespace_mod/core.py".to_string(), "n = 1\n".to_string());
    ns_wheel
        .files
        .insert("plain.py".to_string(), "p = 1\n".to_string());
    ns_wheel.files.insert(
        "nsdemo-0.0.1-py3-nspkg.pth".to_string(),
        "import sys, types, os\n".to_string(),
    );
    ns_wheel.namespace_packages = vec!["namespace_mod".to_string()];
    corpus.push(ns_wheel);

    // Flat-layout artifact: a bare __init__.py at the install root.
    let mut flat = FixtureSpec::new("flatpkg", "0.2", DistributionKind::Wheel);
    flat.files
        .insert("__init__.py".to_string(), String::new());
    flat.files
        .insert("flatmod.py".to_string(), "f = 1\n".to_string());
    corpus.push(flat);

    // src-layout misconfiguration installing src/__init__.py literally.
    let mut misconfig = FixtureSpec::new("srcmisconfig", "0.9", DistributionKind::SdistTarGz);
    misconfig
        .files
        .insert("src/__init__.py".to_string(), String::new());
    misconfig.packages = Some(PackagesDecl::List(vec!["src".to_string()]));
    corpus.push(misconfig);

    // Zip sdist.
    let mut zipped = FixtureSpec::new("zipped", "1.1", DistributionKind::SdistZip);
    zipped
        .files
        .insert("zipped/__init__.py".to_string(), String::new());
    zipped.packages = Some(PackagesDecl::List(vec!["zipped".to_string()]));
    corpus.push(zipped);

    // py_modules-only package.
    let mut board = FixtureSpec::new("boardpkg", "1.0", DistributionKind::SdistTarGz);
    board
        .files
        .insert("board.py".to_string(), "pins = []\n".to_string());
    board.py_modules = vec!["board".to_string()];
    corpus.push(board);

    // Wheel whose METADATA carries install and extra requirements.
    let mut extras = FixtureSpec::new("extrawheel", "0.4", DistributionKind::Wheel);
    extras
        .files
        .insert("extrawheel/__init__.py".to_string(), String::new());
    extras.install_requires = vec!["pytz>=2020.1".to_string()];
    extras
        .extras_require
        .insert("toml".to_string(), vec!["hypothesis>=5.5.3".to_string()]);
    corpus.push(extras);

    corpus
}

fn pip_install_target(archive: &Path, target: &Path) -> Result<(), String> {
    let output = Command::new("python3")
        .args(["-m", "pip", "install"])
        .arg(archive)
        .arg("--target")
        .arg(target)
        .args([
            "--no-deps",
            "--no-build-isolation",
            "--no-compile",
            "--quiet",
            "--disable-pip-version-check",
        ])
        .output()
        .map_err(|e| format!("pip spawn failed: {e}"))?;
    if !output.status.success() {
        return Err(format!(
            "pip install {} failed:\n{}",
            archive.display(),
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    Ok(())
}

fn collect_installed(target: &Path) -> BTreeSet<String> {
    fn walk(dir: &Path, prefix: &str, out: &mut BTreeSet<String>) {
        let Ok(entries) = std::fs::read_dir(dir) else {
            return;
        };
        for entry in entries.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            let rel = if prefix.is_empty() {
                name.clone()
            } else {
                format!("{prefix}/{name}")
            };
            let path = entry.path();
            if path.is_dir() {
                if name.ends_with(".dist-info")
                    || name.ends_with(".egg-info")
                    || name == "__pycache__"
                    || (prefix.is_empty() && name == "bin")
                {
                    continue;
                }
                walk(&path, &rel, out);
            } else if rel.ends_with(".py") || rel.ends_with(".pth") {
                out.insert(rel);
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(target, "", &mut out);
    out
}

/// Egg installs historically unpack the zip payload next to the metadata;
/// ground truth is the archive's `.py` files outside EGG-INFO.
fn egg_ground_truth(bytes: Vec<u8>) -> BTreeSet<String> {
    let archive = modguard::archive::open_archive(bytes, DistributionKind::Egg).unwrap();
    archive
        .entries()
        .iter()
        .filter(|e| !e.is_directory)
        .map(|e| e.path.clone())
        .filter(|p| p.ends_with(".py") && !p.starts_with("EGG-INFO/"))
        .collect()
}

fn module_doc(paths: &BTreeSet<String>) -> String {
    let modules: Vec<serde_json::Value> = paths
        .iter()
        .map(|p| serde_json::json!({ "path": p, "digest": "" }))
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "modules": modules })).unwrap()
}

/// Criterion 2: extraction equals install-to-target ground truth over the
/// whole corpus, reported through the compare command as 100% Correct.
#[test]
fn acceptance_02_fixture_corpus_matches_real_installs() {
    let started = Instant::now();
    let corpus = ground_truth_corpus();
    assert!(corpus.len() >= 12, "corpus covers every metadata source");

    let dir = tempfile::tempdir().unwrap();
    let expected_dir = dir.path().join("expected");
    let actual_dir = dir.path().join("actual");
    std::fs::create_dir_all(&expected_dir).unwrap();
    std::fs::create_dir_all(&actual_dir).unwrap();

    // Ground truth via real installs, spread over a few workers.
    let jobs = 6.min(corpus.len());
    let results: Vec<(String, BTreeSet<String>, BTreeSet<String>)> =
        std::thread::scope(|scope| {
            let chunks: Vec<_> = corpus.chunks(corpus.len().div_ceil(jobs)).collect();
            let dir = dir.path();
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|chunk| {
                    scope.spawn(move || {
                        let mut rows = Vec::new();
                        for spec in chunk {
                            let bytes = spec.build().unwrap();
                            let archive_path = dir.join(spec.filename());
                            std::fs::write(&archive_path, &bytes).unwrap();

                            let truth = if spec.kind == DistributionKind::Egg {
                                egg_ground_truth(bytes.clone())
                            } else {
                                let target = dir.join(format!("gt-{}", spec.name));
                                pip_install_target(&archive_path, &target).unwrap();
                                collect_installed(&target)
                            };
                            let ours: BTreeSet<String> =
                                sim::extract_modules_from_bytes(&spec.filename(), bytes)
                                    .unwrap()
                                    .paths()
                                    .map(str::to_string)
                                    .collect();
                            rows.push((spec.name.clone(), truth, ours));
                        }
                        rows
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("ground-truth worker"))
                .collect()
        });

    for (name, truth, ours) in &results {
        std::fs::write(expected_dir.join(format!("{name}.json")), module_doc(truth)).unwrap();
        std::fs::write(actual_dir.join(format!("{name}.json")), module_doc(ours)).unwrap();
    }

    let (code, output) = run_cli(&[
        "--format",
        "json",
        "compare",
        "--batch",
        expected_dir.to_str().unwrap(),
        actual_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{output}");
    let doc: serde_json::Value = serde_json::from_str(&output).unwrap();
    assert_eq!(doc["accuracy"], "1.00", "corpus comparison:\n{output}");
    assert_eq!(doc["total"], results.len());
    for (name, metric) in doc["results"].as_object().unwrap() {
        assert_eq!(metric, "Correct", "{name} diverged from its real install");
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "took {elapsed:?}, budget 30s including real installs"
    );
    println!(
        "PASS criterion 2: {} fixtures match pip install --target ground truth, accuracy 1.00 ({elapsed:?})",
        results.len()
    );
}

// ---------------------------------------------------------------------------
// Resolver oracle: exhaustive enumeration over per-project version choices.
// ---------------------------------------------------------------------------

struct Oracle<'s> {
    store: &'s IndexStore,
    env: &'s EnvironmentProfile,
    roots: Vec<Requirement>,
    names: Vec<String>,
    options: Vec<Vec<Option<Version>>>,
}

impl<'s> Oracle<'s> {
    fn new(roots: &[Requirement], env: &'s EnvironmentProfile, store: &'s IndexStore) -> Self {
        let names: Vec<String> = store.project_names().map(str::to_string).collect();
        let options = names
            .iter()
            .map(|name| {
                let project = normalize_name(name).unwrap();
                let mut opts: Vec<Option<Version>> = vec![None];
                opts.extend(store.query_versions(&project).into_iter().map(Some));
                opts
            })
            .collect();
        Oracle {
            store,
            env,
            roots: roots.to_vec(),
            names,
            options,
        }
    }

    fn record(&self, name: &str, version: &Version) -> &PackageRecord {
        self.store
            .get(&normalize_name(name).unwrap(), version)
            .expect("oracle assigns only known versions")
    }

    /// Active extras per assigned package, propagated to a fixpoint.
    /// Extras only ever grow, so the iteration is monotone.
    fn active_extras(
        &self,
        assignment: &BTreeMap<String, Version>,
    ) -> BTreeMap<String, BTreeSet<String>> {
        let mut extras: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for root in &self.roots {
            extras
                .entry(root.name.normalized().to_string())
                .or_default()
                .extend(root.extras.iter().cloned());
        }
        loop {
            let mut changed = false;
            for (name, version) in assignment {
                let record = self.record(name, version);
                let own = extras.get(name).cloned().unwrap_or_default();
                let mut deps: Vec<&Requirement> = record.install.iter().collect();
                for extra in &own {
                    if let Some(reqs) = record.extras.get(extra) {
                        deps.extend(reqs.iter());
                    }
                }
                for dep in deps {
                    if let Some(marker) = &dep.marker {
                        if !eval_marker(marker, self.env, &own).unwrap_or(false) {
                            continue;
                        }
                    }
                    if dep.extras.is_empty() {
                        continue;
                    }
                    let bucket = extras
                        .entry(dep.name.normalized().to_string())
                        .or_default();
                    for extra in &dep.extras {
                        changed |= bucket.insert(extra.clone());
                    }
                }
            }
            if !changed {
                return extras;
            }
        }
    }

    /// Check every constraint whose endpoints are decided. `decided`
    /// answers whether a project's choice (version or absence) is fixed;
    /// names outside the store count as decided-absent.
    fn violated(
        &self,
        assignment: &BTreeMap<String, Version>,
        decided: &dyn Fn(&str) -> bool,
    ) -> bool {
        let extras = self.active_extras(assignment);
        let check = |req: &Requirement, active_of_owner: &BTreeSet<String>| -> bool {
            // true = violated
            if let Some(marker) = &req.marker {
                if !eval_marker(marker, self.env, active_of_owner).unwrap_or(false) {
                    return false;
                }
            }
            let target = req.name.normalized();
            if !decided(target) {
                return false;
            }
            match assignment.get(target) {
                None => true,
                Some(version) => !req.specifier.contains(version),
            }
        };

        for root in &self.roots {
            if check(root, &BTreeSet::new()) {
                return true;
            }
        }
        for (name, version) in assignment {
            let record = self.record(name, version);
            let own = extras.get(name).cloned().unwrap_or_default();
            let mut deps: Vec<&Requirement> = record.install.iter().collect();
            for extra in &own {
                if let Some(reqs) = record.extras.get(extra) {
                    deps.extend(reqs.iter());
                }
            }
            for dep in deps {
                if check(dep, &own) {
                    return true;
                }
            }
        }
        false
    }

    /// Exhaustive: does any assignment of versions (or absence) satisfy all
    /// applicable requirements?
    fn solvable(&self) -> bool {
        let known: BTreeSet<&str> = self.names.iter().map(String::as_str).collect();
        let mut assignment: BTreeMap<String, Version> = BTreeMap::new();
        self.dfs(0, &mut assignment, &known)
    }

    fn dfs(
        &self,
        idx: usize,
        assignment: &mut BTreeMap<String, Version>,
        known: &BTreeSet<&str>,
    ) -> bool {
        let decided = |name: &str| -> bool {
            !known.contains(name) || self.names[..idx].iter().any(|n| n == name)
        };
        if self.violated(assignment, &decided) {
            return false;
        }
        if idx == self.names.len() {
            return !self.violated(assignment, &|_| true);
        }
        for option in &self.options[idx] {
            match option {
                None => {
                    assignment.remove(&self.names[idx]);
                }
                Some(version) => {
                    assignment.insert(self.names[idx].clone(), version.clone());
                }
            }
            if self.dfs(idx + 1, assignment, known) {
                return true;
            }
        }
        assignment.remove(&self.names[idx]);
        false
    }
}

/// Independent validity check of a resolved graph: every applicable
/// requirement is satisfied by an edge to a compatible node.
fn assert_valid_solution(
    graph: &DependencyGraph,
    roots: &[Requirement],
    env: &EnvironmentProfile,
    store: &IndexStore,
) {
    graph.validate().unwrap();

    // Active extras arrive via edge labels.
    let mut extras: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (_, to, label) in &graph.edges {
        let req: Requirement = label.parse().unwrap();
        let name = to.split_once("==").unwrap().0.to_string();
        extras.entry(name).or_default().extend(req.extras.iter().cloned());
    }

    let require_satisfied = |req: &Requirement, from_id: &str, active: &BTreeSet<String>| {
        if let Some(marker) = &req.marker {
            if !eval_marker(marker, env, active).unwrap() {
                return;
            }
        }
        let name = req.name.normalized();
        let version = graph
            .nodes
            .get(name)
            .unwrap_or_else(|| panic!("{from_id} requires {req}: node missing"));
        assert!(
            req.specifier.contains(version),
            "{from_id} requires {req}: got {version}"
        );
        let edge = (
            from_id.to_string(),
            node_id(name, version),
            req.to_string(),
        );
        assert!(graph.edges.contains(&edge), "edge missing: {edge:?}");
    };

    for root in roots {
        require_satisfied(root, ROOT_ID, &BTreeSet::new());
    }
    for (name, version) in &graph.nodes {
        let record = store
            .get(&normalize_name(name).unwrap(), version)
            .expect("resolved node has a record");
        let own = extras.get(name).cloned().unwrap_or_default();
        let own_id = node_id(name, version);
        for req in &record.install {
            require_satisfied(req, &own_id, &own);
        }
        for extra in &own {
            for req in record.extras.get(extra).into_iter().flatten() {
                require_satisfied(req, &own_id, &own);
            }
        }
    }
}

/// A store is conflict-free when every dependency admits every version of
/// its target.
fn conflict_free(store: &IndexStore) -> bool {
    for name in store.project_names() {
        let project = normalize_name(name).unwrap();
        for version in store.query_versions(&project) {
            let record = store.get(&project, &version).unwrap();
            for req in record.install.iter().chain(record.extras.values().flatten()) {
                let target_versions = store.query_versions(&req.name);
                if target_versions.is_empty() {
                    return false;
                }
                if !target_versions.iter().all(|v| req.specifier.contains(v)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Criterion 3: solvability matches the exhaustive oracle on 200 seeded
/// random indexes; every success validates; conflict-free indexes resolve to
/// maximum versions.
#[test]
fn acceptance_03_resolver_matches_exhaustive_oracle() {
    let started = Instant::now();
    let env = env_default();
    let mut solvable_count = 0usize;
    let mut conflict_free_count = 0usize;

    for seed in 0..200u64 {
        let n_projects = 2 + (seed % 7) as usize; // 2..=8
        let n_versions = 1 + (seed % 5) as usize; // 1..=5
        let max_deps = (seed % 4) as usize; // 0..=3
        let specs = fixtures::gen_random_index(seed, n_projects, n_versions, max_deps);
        let store = store_from_specs(&specs);

        let mut project_names: Vec<String> =
            store.project_names().map(str::to_string).collect();
        project_names.sort();
        // Every third seed pins the oldest version of the first project so
        // the unsolvable side of the oracle comparison gets real coverage.
        let first_root = if seed % 3 == 0 {
            let project = normalize_name(&project_names[0]).unwrap();
            let oldest = store.query_versions(&project).pop().unwrap();
            format!("{}=={}", project_names[0], oldest)
        } else {
            project_names[0].clone()
        };
        let roots: Vec<Requirement> = [
            first_root,
            project_names[1 % project_names.len()].clone(),
        ]
        .iter()
        .map(|text| parse_requirement(text).unwrap())
        .collect();

        let oracle = Oracle::new(&roots, &env, &store);
        let oracle_says = oracle.solvable();
        let outcome = resolve(&roots, &env, &store, &ResolveOptions::default());

        match &outcome {
            Ok((graph, _)) => {
                assert!(
                    oracle_says,
                    "seed {seed}: resolver succeeded but oracle says unsolvable"
                );
                assert_valid_solution(graph, &roots, &env, &store);
                solvable_count += 1;

                // Latest-version preference holds when nothing constrains
                // any choice: conflict-free store and bare root requirements.
                let bare_roots = roots.iter().all(|r| r.specifier.is_empty());
                if bare_roots && conflict_free(&store) {
                    conflict_free_count += 1;
                    for (name, version) in &graph.nodes {
                        let newest = store
                            .query_versions(&normalize_name(name).unwrap())
                            .into_iter()
                            .next()
                            .unwrap();
                        assert_eq!(
                            version, &newest,
                            "seed {seed}: {name} did not get its newest version"
                        );
                    }
                }
            }
            Err(ResolveError::Unsat { .. }) | Err(ResolveError::MissingPackage { .. }) => {
                assert!(
                    !oracle_says,
                    "seed {seed}: resolver failed but oracle found a solution"
                );
            }
            Err(other) => panic!("seed {seed}: unexpected error {other}"),
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60s");
    assert!(solvable_count > 0, "some seeds must be solvable");
    assert!(
        solvable_count < 200,
        "some seeds must be unsolvable for the oracle comparison to bite"
    );
    println!(
        "PASS criterion 3: 200/200 seeds agree with the exhaustive oracle \
         ({solvable_count} solvable, {conflict_free_count} conflict-free latest-version checks, {elapsed:?})"
    );
}

/// Criterion 4: marker and extras behaviour against hand-written expected
/// graphs, exact equality.
#[test]
fn acceptance_04_marker_and_extras_graphs() {
    let env = env_default();

    // Conditional dependency dropped under python 3.10.
    let store = store_from_specs(&presets::versioneer_index());
    let roots = vec![parse_requirement("versioneer").unwrap()];
    let (graph, _) = resolve(&roots, &env, &store, &ResolveOptions::default()).unwrap();

    let mut expected = DependencyGraph::default();
    for (name, version) in [
        ("versioneer", "0.0.1"),
        ("python-dateutil", "2.8.2"),
        ("pytz", "2023.3"),
    ] {
        expected
            .nodes
            .insert(name.to_string(), parse_version(version).unwrap());
    }
    expected.edges.extend([
        (
            ROOT_ID.to_string(),
            "versioneer==0.0.1".to_string(),
            "versioneer".to_string(),
        ),
        (
            "versioneer==0.0.1".to_string(),
            "python-dateutil==2.8.2".to_string(),
            "python-dateutil>=2.8.1".to_string(),
        ),
        (
            "versioneer==0.0.1".to_string(),
            "pytz==2023.3".to_string(),
            "pytz>=2020.1".to_string(),
        ),
    ]);
    assert_eq!(graph, expected, "numpy must be dropped under python 3.10");

    // The extra pulls hypothesis in.
    let roots = vec![parse_requirement("versioneer[toml]").unwrap()];
    let (graph, _) = resolve(&roots, &env, &store, &ResolveOptions::default()).unwrap();
    let mut with_extra = expected.clone();
    with_extra
        .nodes
        .insert("hypothesis".to_string(), parse_version("6.0.0").unwrap());
    with_extra.edges.remove(&(
        ROOT_ID.to_string(),
        "versioneer==0.0.1".to_string(),
        "versioneer".to_string(),
    ));
    with_extra.edges.extend([
        (
            ROOT_ID.to_string(),
            "versioneer==0.0.1".to_string(),
            "versioneer[toml]".to_string(),
        ),
        (
            "versioneer==0.0.1".to_string(),
            "hypothesis==6.0.0".to_string(),
            "hypothesis>=5.5.3".to_string(),
        ),
    ]);
    assert_eq!(graph, with_extra);

    // Extra on another root pulls exactly its dependency.
    let store = store_from_specs(&presets::pandas_extra_index());
    let roots = vec![parse_requirement("pandas[compression]").unwrap()];
    let (graph, _) = resolve(&roots, &env, &store, &ResolveOptions::default()).unwrap();
    let mut pandas_expected = DependencyGraph::default();
    for (name, version) in [
        ("pandas", "1.5.0"),
        ("python-dateutil", "2.8.2"),
        ("zstandard", "0.18.0"),
    ] {
        pandas_expected
            .nodes
            .insert(name.to_string(), parse_version(version).unwrap());
    }
    pandas_expected.edges.extend([
        (
            ROOT_ID.to_string(),
            "pandas==1.5.0".to_string(),
            "pandas[compression]".to_string(),
        ),
        (
            "pandas==1.5.0".to_string(),
            "python-dateutil==2.8.2".to_string(),
            "python-dateutil>=2.8.1".to_string(),
        ),
        (
            "pandas==1.5.0".to_string(),
            "zstandard==0.18.0".to_string(),
            "zstandard>=0.17.0".to_string(),
        ),
    ]);
    assert_eq!(graph, pandas_expected);

    // Without the extra, zstandard stays out.
    let roots = vec![parse_requirement("pandas").unwrap()];
    let (graph, _) = resolve(&roots, &env, &store, &ResolveOptions::default()).unwrap();
    assert!(!graph.nodes.contains_key("zstandard"));

    println!("PASS criterion 4: marker drop and extras resolution match hand-written graphs exactly");
}

/// Criterion 5: the priority policy strictly beats first-in-first-out on the
/// adversarial index, deterministically.
#[test]
fn acceptance_05_priority_policy_effectiveness() {
    let adversarial = fixtures::backtrack_heavy_index();
    let store = store_from_specs(&adversarial.specs);
    let env = env_default();
    let roots: Vec<Requirement> = adversarial
        .roots
        .iter()
        .map(|r| parse_requirement(r).unwrap())
        .collect();

    let run = |order: OrderPolicy| {
        let options = ResolveOptions {
            order,
            ..Default::default()
        };
        let (graph, stats) = resolve(&roots, &env, &store, &options).unwrap();
        (graph, stats)
    };

    let (graph_a, prioritized) = run(OrderPolicy::Prioritized);
    let (graph_b, fifo) = run(OrderPolicy::Fifo);
    assert_eq!(graph_a, graph_b, "order policy must not change the result");

    // Determinism across repeated runs.
    for _ in 0..2 {
        assert_eq!(run(OrderPolicy::Prioritized).1, prioritized);
        assert_eq!(run(OrderPolicy::Fifo).1, fifo);
    }
    assert!(
        prioritized.backtracks < fifo.backtracks,
        "prioritized {} !< fifo {}",
        prioritized.backtracks,
        fifo.backtracks
    );
    println!(
        "PASS criterion 5: backtracks prioritized={} < fifo={}, stable across runs",
        prioritized.backtracks, fifo.backtracks
    );
}

/// Criterion 6: the three conflict patterns with exact finding-set equality.
#[test]
fn acceptance_06_conflict_patterns_exact_findings() {
    // (a) Unrelated pair sharing jwt/exceptions.py with different bodies.
    let store = store_from_specs(&presets::jwt_pair());
    let findings = detect_module_to_tpl(&store.latest_records(), false);
    let expected = vec![ConflictFinding {
        pattern: Pattern::ModuleToTpl,
        subjects: vec![
            Subject::Package {
                name: "jwt".into(),
                version: "1.3.1".into(),
            },
            Subject::Package {
                name: "pyjwt".into(),
                version: "2.6.0".into(),
            },
        ],
        paths: BTreeSet::from(["jwt/__init__.py".to_string(), "jwt/exceptions.py".to_string()]),
        content_differs: true,
        case_insensitive: false,
        pth_only: false,
    }];
    assert_eq!(findings, expected);

    // (b) Two providers of cv2/ inside one dependency graph.
    let store = store_from_specs(&presets::cv2_conflict_index());
    let env = env_default();
    let roots = vec![parse_requirement("emoca==1.0").unwrap()];
    let (graph, _) = resolve(&roots, &env, &store, &ResolveOptions::default()).unwrap();
    let findings = detect_module_in_dep(&graph, &store).unwrap();
    let expected = vec![ConflictFinding {
        pattern: Pattern::ModuleInDep,
        subjects: vec![
            Subject::Package {
                name: "opencv-python".into(),
                version: "4.5.5".into(),
            },
            Subject::Package {
                name: "opencv-python-headless".into(),
                version: "4.5.5".into(),
            },
        ],
        paths: BTreeSet::from(["cv2/__init__.py".to_string(), "cv2/version.py".to_string()]),
        content_differs: false,
        case_insensitive: false,
        pth_only: false,
    }];
    assert_eq!(findings, expected);

    // (c) Standard-library shadowing against the 199-name catalog.
    let catalog = StdlibCatalog::bundled();
    assert_eq!(catalog.len(), 199);
    let spec = presets::stdlib_shadow();
    let modules =
        sim::extract_modules_from_bytes(&spec.filename(), spec.build().unwrap()).unwrap();
    let findings = detect_module_to_lib(&modules, &catalog);
    let expected: Vec<ConflictFinding> = ["json", "parser"]
        .iter()
        .map(|name| ConflictFinding {
            pattern: Pattern::ModuleToLib,
            subjects: vec![Subject::Stdlib {
                module: name.to_string(),
            }],
            paths: BTreeSet::from([name.to_string()]),
            content_differs: false,
            case_insensitive: false,
            pth_only: false,
        })
        .collect();
    assert_eq!(findings, expected);

    // (d) The crypto/Crypto pair is flagged iff case folding is on.
    let store = store_from_specs(&presets::crypto_case_pair());
    let records = store.latest_records();
    assert_eq!(detect_module_to_tpl(&records, false), vec![]);
    let findings = detect_module_to_tpl(&records, true);
    let expected = vec![ConflictFinding {
        pattern: Pattern::ModuleToTpl,
        subjects: vec![
            Subject::Package {
                name: "crypto".into(),
                version: "1.4.1".into(),
            },
            Subject::Package {
                name: "pycrypto".into(),
                version: "2.6.1".into(),
            },
        ],
        paths: BTreeSet::from(["crypto/__init__.py".to_string()]),
        content_differs: true,
        case_insensitive: true,
        pth_only: false,
    }];
    assert_eq!(findings, expected);

    println!("PASS criterion 6: all four conflict-pattern cases yield the exact expected findings");
}

// ---------------------------------------------------------------------------
// Naive pairwise conflict oracle.
// ---------------------------------------------------------------------------

fn random_records(seed: u64) -> Vec<PackageRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = [
        "alpha/__init__.py",
        "alpha/util.py",
        "Alpha/__init__.py",
        "beta.py",
        "gamma/core.py",
        "gamma/extra.py",
        "delta/__init__.py",
        "shared-ns-py3-nspkg.pth",
    ];
    let n = 5 + (rng.gen_range(0..16usize));
    (0..n)
        .map(|i| {
            let mut spec = FixtureSpec::new(
                &format!("rpkg{i}"),
                "1.0",
                DistributionKind::Wheel,
            );
            let count = rng.gen_range(1..4usize);
            for _ in 0..count {
                let path = pool[rng.gen_range(0..pool.len())];
                // Two content variants so digests sometimes differ.
                let body = if rng.gen_bool(0.5) { "x = 1\n" } else { "x = 2\n" };
                spec.files.insert(path.to_string(), body.to_string());
            }
            let mut store = IndexStore::in_memory();
            store
                .ingest_bytes(&spec.filename(), spec.build().unwrap())
                .unwrap()
        })
        .collect()
}

/// The definitional oracle: plain double loop over unordered pairs.
fn naive_tpl_oracle(records: &[&PackageRecord], case_insensitive: bool) -> Vec<ConflictFinding> {
    let fold = |p: &str| {
        if case_insensitive {
            p.to_lowercase()
        } else {
            p.to_string()
        }
    };
    let mut findings = Vec::new();
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            let (a, b) = (records[i], records[j]);
            if a.name == b.name {
                continue;
            }
            let a_paths: BTreeMap<String, Vec<&str>> = {
                let mut m: BTreeMap<String, Vec<&str>> = BTreeMap::new();
                for (p, d) in a.modules.iter() {
                    m.entry(fold(p)).or_default().push(d);
                }
                m
            };
            let mut shared = BTreeSet::new();
            let mut differs = false;
            let mut exact = false;
            for (p, d) in b.modules.iter() {
                if let Some(a_digests) = a_paths.get(&fold(p)) {
                    shared.insert(fold(p));
                    if a.modules.contains_path(p) {
                        exact = true;
                    }
                    if !d.is_empty() && a_digests.iter().any(|ad| !ad.is_empty() && *ad != d) {
                        differs = true;
                    }
                }
            }
            if shared.is_empty() {
                continue;
            }
            let mut subjects = vec![
                Subject::Package {
                    name: a.name.normalized().into(),
                    version: a.version.to_string(),
                },
                Subject::Package {
                    name: b.name.normalized().into(),
                    version: b.version.to_string(),
                },
            ];
            subjects.sort();
            findings.push(ConflictFinding {
                pattern: Pattern::ModuleToTpl,
                subjects,
                paths: shared.clone(),
                content_differs: differs,
                case_insensitive: case_insensitive && !exact,
                pth_only: shared.iter().all(|p| p.ends_with(".pth")),
            });
        }
    }
    findings.sort();
    findings
}

/// Criterion 7: engine findings equal the naive pairwise oracle on 50 random
/// corpora, in both case modes.
#[test]
fn acceptance_07_bruteforce_conflict_equivalence() {
    for seed in 0..50u64 {
        let records = random_records(seed);
        let refs: Vec<&PackageRecord> = records.iter().collect();
        for case_insensitive in [false, true] {
            let engine = detect_module_to_tpl(&refs, case_insensitive);
            let oracle = naive_tpl_oracle(&refs, case_insensitive);
            assert_eq!(
                engine, oracle,
                "seed {seed} case_insensitive={case_insensitive}"
            );
        }
    }
    println!("PASS criterion 7: engine equals the naive pairwise oracle on 50/50 seeds (both case modes)");
}

/// Criterion 8: 1,000 synthetic packages ingested and extracted in under a
/// minute on one thread.
#[test]
fn acceptance_08_throughput_1000_packages() {
    let started = Instant::now();
    let mut store = IndexStore::in_memory();
    for i in 0..1000u32 {
        let mut spec = FixtureSpec::new(&format!("tp{i}"), "1.0", DistributionKind::Wheel);
        spec.files.insert(
            format!("tp{i}/__init__.py"),
            format!("serial = {i}\n"),
        );
        spec.files
            .insert(format!("tp{i}/core.py"), "def run():\n    pass\n".to_string());
        let record = store
            .ingest_bytes(&spec.filename(), spec.build().unwrap())
            .unwrap();
        assert_eq!(record.modules.len(), 2);
    }
    assert_eq!(store.record_count(), 1000);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60s");
    println!(
        "PASS criterion 8: 1000 packages built+ingested+extracted single-threaded in {elapsed:?}"
    );
}

/// Criterion 9: byte-identical JSON output across repeated command runs.
#[test]
fn acceptance_09_command_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("idx");
    let mut archives: Vec<String> = Vec::new();
    let mut specs = presets::jwt_pair();
    specs.extend(presets::cv2_conflict_index());
    specs.extend(presets::versioneer_index());
    for spec in &specs {
        archives.push(
            write_fixture(dir.path(), spec)
                .to_str()
                .unwrap()
                .to_string(),
        );
    }
    let pugs = write_fixture(dir.path(), &presets::pugs_sdist());
    let shadow = write_fixture(dir.path(), &presets::stdlib_shadow());

    let mut ingest_args = vec!["--index", index.to_str().unwrap(), "ingest"];
    ingest_args.extend(archives.iter().map(String::as_str));
    let (code, _) = run_cli(&ingest_args);
    assert_eq!(code, 0);

    // Batch-compare inputs.
    let expected_dir = dir.path().join("cmp-expected");
    let actual_dir = dir.path().join("cmp-actual");
    std::fs::create_dir_all(&expected_dir).unwrap();
    std::fs::create_dir_all(&actual_dir).unwrap();
    let doc = module_doc(&BTreeSet::from(["a.py".to_string()]));
    std::fs::write(expected_dir.join("one.json"), &doc).unwrap();
    std::fs::write(actual_dir.join("one.json"), &doc).unwrap();

    let index_str = index.to_str().unwrap().to_string();
    let pugs_str = pugs.to_str().unwrap().to_string();
    let shadow_str = shadow.to_str().unwrap().to_string();
    let expected_str = expected_dir.to_str().unwrap().to_string();
    let actual_str = actual_dir.to_str().unwrap().to_string();

    let commands: Vec<Vec<&str>> = vec![
        vec!["--format", "json", "extract", &pugs_str, "--digests"],
        vec![
            "--index",
            &index_str,
            "--format",
            "json",
            "resolve",
            "emoca==1.0",
        ],
        vec![
            "--index",
            &index_str,
            "--format",
            "json",
            "resolve",
            "versioneer[toml]",
        ],
        vec!["--index", &index_str, "--format", "json", "scan", "tpl"],
        vec![
            "--index",
            &index_str,
            "--format",
            "json",
            "scan",
            "dep",
            "emoca==1.0",
        ],
        vec!["--format", "json", "scan", "lib", &shadow_str],
        vec![
            "--format",
            "json",
            "compare",
            "--batch",
            &expected_str,
            &actual_str,
        ],
    ];

    for command in &commands {
        let (first_code, first_output) = run_cli(command);
        assert!(!first_output.is_empty());
        for repetition in 0..2 {
            let (code, output) = run_cli(command);
            assert_eq!(code, first_code, "{command:?} rep {repetition}");
            assert_eq!(
                output, first_output,
                "{command:?} rep {repetition}: output drifted"
            );
        }
        // The output really is JSON.
        serde_json::from_str::<serde_json::Value>(&first_output).unwrap();
    }
    println!(
        "PASS criterion 9: {} commands produced byte-identical JSON over 3 runs each",
        commands.len()
    );
}
