//! Environment-aware backtracking dependency resolution.
//!
//! Requirements are processed by a priority policy (pinned first, then
//! constrained, then unconstrained; shallower before deeper), candidates
//! newest-first. A dependency whose marker does not hold under the
//! environment and active extras is dropped. On a dead end the most recent
//! version decision is retracted; every retraction counts as one backtrack.

use crate::kb::IndexStore;
use crate::pep::{eval_marker, EnvironmentProfile, PepError, Requirement, Version};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Identifier of the synthetic root node in serialized graphs. `<` cannot
/// appear in project names, so this cannot collide.
pub const ROOT_ID: &str = "<root>";

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("unsatisfiable requirements:\n  {}", chain.join("\n  "))]
    Unsat { chain: Vec<String> },
    #[error("package {name} is not in the knowledge base (required by {required_by})")]
    MissingPackage { name: String, required_by: String },
    #[error(transparent)]
    Marker(#[from] PepError),
}

/// A resolved dependency graph: the synthetic root, one version per
/// project, and labelled edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    /// Normalized project name -> chosen version.
    pub nodes: BTreeMap<String, Version>,
    /// (from id, to id, requirement text); ids are `name==version` or the
    /// root marker.
    pub edges: BTreeSet<(String, String, String)>,
}

pub fn node_id(name: &str, version: &Version) -> String {
    format!("{name}=={version}")
}

impl DependencyGraph {
    pub fn node_ids(&self) -> BTreeSet<String> {
        self.nodes
            .iter()
            .map(|(name, version)| node_id(name, version))
            .collect()
    }

    /// Check the structural invariants: every node is reachable from the
    /// root and every edge's specifier admits its target version.
    pub fn validate(&self) -> Result<(), String> {
        let ids = self.node_ids();
        for (from, to, label) in &self.edges {
            if from != ROOT_ID && !ids.contains(from) {
                return Err(format!("edge from unknown node {from}"));
            }
            if !ids.contains(to) {
                return Err(format!("edge to unknown node {to}"));
            }
            let requirement: Requirement = label
                .parse()
                .map_err(|e| format!("edge label {label:?}: {e}"))?;
            let (to_name, to_version) = to
                .split_once("==")
                .ok_or_else(|| format!("bad node id {to}"))?;
            if requirement.name.normalized() != to_name {
                return Err(format!("edge {label:?} targets wrong node {to}"));
            }
            let version: Version = to_version.parse().map_err(|e| format!("{to}: {e}"))?;
            if !requirement.specifier.contains(&version) {
                return Err(format!("edge {label:?} does not admit {to}"));
            }
        }
        // Reachability from the root.
        let mut reached: BTreeSet<String> = BTreeSet::new();
        let mut frontier = vec![ROOT_ID.to_string()];
        while let Some(current) = frontier.pop() {
            for (from, to, _) in &self.edges {
                if *from == current && reached.insert(to.clone()) {
                    frontier.push(to.clone());
                }
            }
        }
        for id in &ids {
            if !reached.contains(id) {
                return Err(format!("node {id} unreachable from root"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "root": ROOT_ID,
            "nodes": self.node_ids().into_iter().collect::<Vec<_>>(),
            "edges": self.edges.iter().collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, String> {
        let nodes = value
            .get("nodes")
            .and_then(|n| n.as_array())
            .ok_or("graph JSON missing nodes array")?;
        let mut graph = DependencyGraph::default();
        for node in nodes {
            let id = node.as_str().ok_or("node id must be a string")?;
            let (name, version) = id.split_once("==").ok_or("node id must be name==version")?;
            let version: Version = version.parse().map_err(|e| format!("{id}: {e}"))?;
            graph.nodes.insert(name.to_string(), version);
        }
        let edges = value
            .get("edges")
            .and_then(|e| e.as_array())
            .ok_or("graph JSON missing edges array")?;
        for edge in edges {
            let triple = edge.as_array().filter(|t| t.len() == 3).ok_or("bad edge")?;
            let parts: Vec<&str> = triple.iter().filter_map(|v| v.as_str()).collect();
            if parts.len() != 3 {
                return Err("bad edge triple".to_string());
            }
            graph
                .edges
                .insert((parts[0].into(), parts[1].into(), parts[2].into()));
        }
        Ok(graph)
    }
}

/// Search statistics of one resolution run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionStats {
    pub backtracks: u64,
    pub candidates_tried: u64,
}

/// Requirement processing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderPolicy {
    /// Pinned first, then constrained, then unconstrained; shallower first
    /// within a class; name breaks remaining ties.
    #[default]
    Prioritized,
    /// Plain first-in-first-out, for comparison runs.
    Fifo,
}

#[derive(Debug, Clone, Default)]
pub struct ResolveOptions {
    pub order: OrderPolicy,
    /// Treat every requested extra as active for all packages, instead of
    /// scoping extras to the requirement that asked for them.
    pub global_extras: bool,
}

/// A requirement waiting to be processed.
#[derive(Debug, Clone)]
struct PendingReq {
    requirement: Requirement,
    depth: u32,
    /// `None` for root requirements, otherwise the depending node.
    from: Option<(String, Version)>,
    seq: u64,
}

impl PendingReq {
    fn source_id(&self) -> String {
        match &self.from {
            None => ROOT_ID.to_string(),
            Some((name, version)) => node_id(name, version),
        }
    }

    fn priority_class(&self) -> u8 {
        if self.requirement.specifier.has_pin() {
            0
        } else if !self.requirement.specifier.is_empty() {
            1
        } else {
            2
        }
    }
}

/// Sort requirements by the priority policy: pinned versions first, then
/// scoped constraints, then unconstrained; requirements close to the root
/// before deeper ones; names break the remaining ties. The sort is stable.
pub fn prioritize(pending: &[(Requirement, u32)]) -> Vec<(Requirement, u32)> {
    let mut indexed: Vec<(usize, &(Requirement, u32))> = pending.iter().enumerate().collect();
    indexed.sort_by_key(|(idx, (requirement, depth))| {
        let class = if requirement.specifier.has_pin() {
            0u8
        } else if !requirement.specifier.is_empty() {
            1
        } else {
            2
        };
        (
            class,
            *depth,
            requirement.name.normalized().to_string(),
            *idx,
        )
    });
    indexed.into_iter().map(|(_, pair)| pair.clone()).collect()
}

#[derive(Debug, Clone, Default)]
struct SearchState {
    /// name -> (version, active extras, depth of the node).
    assigned: BTreeMap<String, (Version, BTreeSet<String>, u32)>,
    pending: Vec<PendingReq>,
    edges: BTreeSet<(String, String, String)>,
    global_extras: BTreeSet<String>,
    next_seq: u64,
}

struct Frame {
    /// State snapshot taken right after the triggering requirement was
    /// removed from pending.
    state: SearchState,
    requirement: PendingReq,
    candidates: Vec<Version>,
    next_candidate: usize,
}

/// What ended a search branch; reported if the whole search exhausts.
#[derive(Debug, Clone)]
enum DeadEnd {
    Missing { name: String, required_by: String },
    Conflict { chain: Vec<String> },
}

/// Resolve root requirements against the knowledge base under the given
/// environment. Returns the dependency graph and search statistics, or the
/// failure that ended the search.
pub fn resolve(
    roots: &[Requirement],
    env: &EnvironmentProfile,
    kb: &IndexStore,
    options: &ResolveOptions,
) -> Result<(DependencyGraph, ResolutionStats), ResolveError> {
    let mut stats = ResolutionStats::default();
    let mut state = SearchState::default();
    let mut frames: Vec<Frame> = Vec::new();
    // Overwritten before every backtrack; the final value feeds the error.
    #[allow(unused_assignments)]
    let mut last_dead_end: Option<DeadEnd> = None;

    for requirement in roots {
        // Markers on root requirements are evaluated against the bare
        // environment; extras are only active inside the package they are
        // requested for.
        let extras_context = if options.global_extras {
            let mut ctx = state.global_extras.clone();
            ctx.extend(requirement.extras.iter().cloned());
            ctx
        } else {
            BTreeSet::new()
        };
        if let Some(marker) = &requirement.marker {
            if !eval_marker(marker, env, &extras_context)? {
                log::info!("root requirement {requirement} dropped by marker");
                continue;
            }
        }
        if options.global_extras {
            state.global_extras.extend(requirement.extras.iter().cloned());
        }
        let seq = state.next_seq;
        state.next_seq += 1;
        state.pending.push(PendingReq {
            requirement: requirement.clone(),
            depth: 1,
            from: None,
            seq,
        });
    }

    loop {
        let Some(position) = pick_next(&state.pending, options.order) else {
            // Nothing pending: success.
            let graph = DependencyGraph {
                nodes: state
                    .assigned
                    .iter()
                    .map(|(name, (version, _, _))| (name.clone(), version.clone()))
                    .collect(),
                edges: state.edges.clone(),
            };
            debug_assert_eq!(graph.validate(), Ok(()));
            return Ok((graph, stats));
        };
        let req = state.pending.remove(position);
        let name = req.requirement.name.normalized().to_string();

        if let Some((version, _, _)) = state.assigned.get(&name).cloned() {
            if req.requirement.specifier.contains(&version) {
                state
                    .edges
                    .insert((req.source_id(), node_id(&name, &version), req.requirement.to_string()));
                merge_new_extras(&mut state, &req, env, kb, options)?;
                continue;
            }
            // Assigned version conflicts with this requirement.
            last_dead_end = Some(DeadEnd::Conflict {
                chain: conflict_chain(&req, &state, &frames),
            });
        } else {
            let versions = kb.query_versions(&req.requirement.name);
            if versions.is_empty() {
                last_dead_end = Some(DeadEnd::Missing {
                    name: name.clone(),
                    required_by: req.source_id(),
                });
            } else {
                // Newest-first among versions satisfying this requirement
                // and every other pending requirement on the same name.
                let candidates: Vec<Version> = versions
                    .into_iter()
                    .filter(|v| req.requirement.specifier.contains(v))
                    .filter(|v| {
                        state
                            .pending
                            .iter()
                            .filter(|p| p.requirement.name.normalized() == name)
                            .all(|p| p.requirement.specifier.contains(v))
                    })
                    .collect();
                if candidates.is_empty() {
                    last_dead_end = Some(DeadEnd::Conflict {
                        chain: conflict_chain(&req, &state, &frames),
                    });
                } else {
                    let snapshot = state.clone();
                    let first = candidates[0].clone();
                    frames.push(Frame {
                        state: snapshot,
                        requirement: req.clone(),
                        candidates,
                        next_candidate: 0,
                    });
                    apply_candidate(&mut state, &req, &first, env, kb, options, &mut stats)?;
                    continue;
                }
            }
        }

        // Dead end: retract the most recent decision and try its next
        // candidate; every retraction is one backtrack.
        loop {
            let Some(frame) = frames.last_mut() else {
                return Err(match last_dead_end.take() {
                    Some(DeadEnd::Missing { name, required_by }) => {
                        ResolveError::MissingPackage { name, required_by }
                    }
                    Some(DeadEnd::Conflict { chain }) => ResolveError::Unsat { chain },
                    None => ResolveError::Unsat {
                        chain: vec!["no requirements could be satisfied".to_string()],
                    },
                });
            };
            stats.backtracks += 1;
            frame.next_candidate += 1;
            if frame.next_candidate < frame.candidates.len() {
                state = frame.state.clone();
                let requirement = frame.requirement.clone();
                let candidate = frame.candidates[frame.next_candidate].clone();
                apply_candidate(
                    &mut state,
                    &requirement,
                    &candidate,
                    env,
                    kb,
                    options,
                    &mut stats,
                )?;
                break;
            }
            frames.pop();
        }
    }
}

/// Position of the next requirement to process under the given policy.
fn pick_next(pending: &[PendingReq], order: OrderPolicy) -> Option<usize> {
    if pending.is_empty() {
        return None;
    }
    match order {
        OrderPolicy::Fifo => pending
            .iter()
            .enumerate()
            .min_by_key(|(_, p)| p.seq)
            .map(|(i, _)| i),
        OrderPolicy::Prioritized => pending
            .iter()
            .enumerate()
            .min_by_key(|(_, p)| {
                (
                    p.priority_class(),
                    p.depth,
                    p.requirement.name.normalized().to_string(),
                    p.seq,
                )
            })
            .map(|(i, _)| i),
    }
}

/// Assign `version` for the requirement's package, record the edge, and
/// queue the package's dependencies filtered by marker.
fn apply_candidate(
    state: &mut SearchState,
    req: &PendingReq,
    version: &Version,
    env: &EnvironmentProfile,
    kb: &IndexStore,
    options: &ResolveOptions,
    stats: &mut ResolutionStats,
) -> Result<(), ResolveError> {
    stats.candidates_tried += 1;
    let name = req.requirement.name.normalized().to_string();
    let record = kb
        .get(&req.requirement.name, version)
        .expect("candidate versions come from the store");

    let extras: BTreeSet<String> = req.requirement.extras.clone();
    if options.global_extras {
        state.global_extras.extend(extras.iter().cloned());
    }
    state
        .assigned
        .insert(name.clone(), (version.clone(), extras.clone(), req.depth));
    state
        .edges
        .insert((req.source_id(), node_id(&name, version), req.requirement.to_string()));

    let eval_extras = if options.global_extras {
        state.global_extras.clone()
    } else {
        extras.clone()
    };
    let mut dependencies: Vec<&Requirement> = record.install.iter().collect();
    for extra in &extras {
        match record.extras.get(extra) {
            Some(reqs) => dependencies.extend(reqs.iter()),
            None => log::warn!("{name}=={version} has no extra {extra:?}"),
        }
    }
    if options.global_extras {
        // Under the global-dictionary interpretation every extra section
        // whose name is active applies, regardless of who requested it.
        for (extra, reqs) in &record.extras {
            if state.global_extras.contains(extra) && !extras.contains(extra) {
                dependencies.extend(reqs.iter());
            }
        }
    }

    for dependency in dependencies {
        if let Some(marker) = &dependency.marker {
            if !eval_marker(marker, env, &eval_extras)? {
                continue;
            }
        }
        let seq = state.next_seq;
        state.next_seq += 1;
        state.pending.push(PendingReq {
            requirement: dependency.clone(),
            depth: req.depth + 1,
            from: Some((name.clone(), version.clone())),
            seq,
        });
    }
    Ok(())
}

/// When a requirement lands on an already-assigned package with new extras,
/// activate those extras' dependencies.
fn merge_new_extras(
    state: &mut SearchState,
    req: &PendingReq,
    env: &EnvironmentProfile,
    kb: &IndexStore,
    options: &ResolveOptions,
) -> Result<(), ResolveError> {
    let name = req.requirement.name.normalized().to_string();
    let (version, active, node_depth) = state.assigned.get(&name).cloned().expect("assigned");
    let new_extras: BTreeSet<String> = req
        .requirement
        .extras
        .difference(&active)
        .cloned()
        .collect();
    if new_extras.is_empty() {
        return Ok(());
    }
    if options.global_extras {
        state.global_extras.extend(new_extras.iter().cloned());
    }
    let record = kb
        .get(&req.requirement.name, &version)
        .expect("assigned versions come from the store");
    let mut all_active = active.clone();
    all_active.extend(new_extras.iter().cloned());
    let eval_extras = if options.global_extras {
        state.global_extras.clone()
    } else {
        all_active.clone()
    };

    for extra in &new_extras {
        let Some(reqs) = record.extras.get(extra) else {
            log::warn!("{name}=={version} has no extra {extra:?}");
            continue;
        };
        for dependency in reqs {
            if let Some(marker) = &dependency.marker {
                if !eval_marker(marker, env, &eval_extras)? {
                    continue;
                }
            }
            let seq = state.next_seq;
            state.next_seq += 1;
            state.pending.push(PendingReq {
                requirement: dependency.clone(),
                depth: node_depth + 1,
                from: Some((name.clone(), version.clone())),
                seq,
            });
        }
    }
    state
        .assigned
        .insert(name, (version, all_active, node_depth));
    Ok(())
}

/// Reconstruct the requirement chain from a dead-ended requirement back to
/// the root, for error reporting.
fn conflict_chain(req: &PendingReq, state: &SearchState, frames: &[Frame]) -> Vec<String> {
    let mut chain = Vec::new();
    let mut current = Some(req.clone());
    let mut guard = 0;
    while let Some(req) = current {
        let assigned_note = match state.assigned.get(req.requirement.name.normalized()) {
            Some((version, _, _)) => format!(
                " (assigned {})",
                node_id(req.requirement.name.normalized(), version)
            ),
            None => String::new(),
        };
        chain.push(format!(
            "{} requires {}{}",
            req.source_id(),
            req.requirement,
            assigned_note
        ));
        guard += 1;
        if guard > 32 {
            break;
        }
        current = match &req.from {
            None => None,
            Some((from_name, _)) => frames
                .iter()
                .find(|f| f.requirement.requirement.name.normalized() == from_name)
                .map(|f| f.requirement.clone()),
        };
    }
    chain.reverse();
    chain
}

/// The four-way comparison metric between an expected and an actual result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Correct,
    Miss,
    Excess,
    Error,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Correct => "Correct",
            Metric::Miss => "Miss",
            Metric::Excess => "Excess",
            Metric::Error => "Error",
        })
    }
}

/// Classify two sets: equal is Correct; only-missing is Miss; only-extra is
/// Excess; both differences non-empty is Error.
pub fn compare_sets<T: Ord>(expected: &BTreeSet<T>, actual: &BTreeSet<T>) -> Metric {
    let missing = expected.difference(actual).count();
    let excess = actual.difference(expected).count();
    match (missing, excess) {
        (0, 0) => Metric::Correct,
        (_, 0) => Metric::Miss,
        (0, _) => Metric::Excess,
        _ => Metric::Error,
    }
}

/// Comparison granularity for dependency graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompareLevel {
    #[default]
    Node,
    Edge,
}

/// Compare dependency graphs at node or edge level.
pub fn compare_graphs(
    expected: &DependencyGraph,
    actual: &DependencyGraph,
    level: CompareLevel,
) -> Metric {
    let node_metric = compare_sets(&expected.node_ids(), &actual.node_ids());
    match level {
        CompareLevel::Node => node_metric,
        CompareLevel::Edge => {
            let edge_metric = compare_sets(&expected.edges, &actual.edges);
            combine_metrics(node_metric, edge_metric)
        }
    }
}

fn combine_metrics(a: Metric, b: Metric) -> Metric {
    use Metric::*;
    match (a, b) {
        (Correct, m) | (m, Correct) => m,
        (Miss, Miss) => Miss,
        (Excess, Excess) => Excess,
        _ => Error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, presets, FixtureSpec};
    use crate::pep::parse_requirement;

    pub(crate) fn store_from_specs(specs: &[FixtureSpec]) -> IndexStore {
        let mut store = IndexStore::in_memory();
        for spec in specs {
            store
                .ingest_bytes(&spec.filename(), spec.build().unwrap())
                .unwrap();
        }
        store
    }

    fn reqs(texts: &[&str]) -> Vec<Requirement> {
        texts.iter().map(|t| parse_requirement(t).unwrap()).collect()
    }

    fn resolve_ids(
        roots: &[&str],
        store: &IndexStore,
        options: &ResolveOptions,
    ) -> Result<(Vec<String>, ResolutionStats), ResolveError> {
        let env = EnvironmentProfile::default_linux();
        let (graph, stats) = resolve(&reqs(roots), &env, store, options)?;
        Ok((graph.node_ids().into_iter().collect(), stats))
    }

    #[test]
    fn prioritize_orders_by_class_then_depth_then_name() {
        let pending = vec![
            (parse_requirement("a>=1").unwrap(), 1),
            (parse_requirement("b==2").unwrap(), 2),
            (parse_requirement("c").unwrap(), 1),
        ];
        let ordered = prioritize(&pending);
        let names: Vec<&str> = ordered
            .iter()
            .map(|(r, _)| r.name.normalized())
            .collect();
        assert_eq!(names, vec!["b", "a", "c"]);

        let single = vec![(parse_requirement("only>=1").unwrap(), 3)];
        assert_eq!(prioritize(&single).len(), 1);

        let unconstrained = vec![
            (parse_requirement("deep").unwrap(), 2),
            (parse_requirement("shallow").unwrap(), 1),
        ];
        let ordered = prioritize(&unconstrained);
        assert_eq!(ordered[0].0.name.normalized(), "shallow");
    }

    #[test]
    fn resolves_latest_on_conflict_free_index() {
        let mut specs = Vec::new();
        for version in ["1.0", "1.1", "2.0"] {
            let mut spec = FixtureSpec::new("leaf", version, crate::archive::DistributionKind::Wheel);
            spec.files
                .insert("leaf/__init__.py".to_string(), format!("v = \"{version}\"\n"));
            specs.push(spec);
        }
        let store = store_from_specs(&specs);
        let (ids, _) = resolve_ids(&["leaf"], &store, &ResolveOptions::default()).unwrap();
        assert_eq!(ids, vec!["leaf==2.0"]);
    }

    #[test]
    fn marker_drops_dependency_under_python_310() {
        let store = store_from_specs(&presets::versioneer_index());
        let (ids, _) = resolve_ids(&["versioneer"], &store, &ResolveOptions::default()).unwrap();
        assert_eq!(
            ids,
            vec![
                "python-dateutil==2.8.2",
                "pytz==2023.3",
                "versioneer==0.0.1",
            ]
        );

        // Under an older interpreter the conditional dependency applies.
        let env_39 = {
            let mut env = EnvironmentProfile::default_linux();
            env.set("python_version", "3.9").unwrap();
            env.set("python_full_version", "3.9.18").unwrap();
            env
        };
        let (graph, _) = resolve(
            &reqs(&["versioneer"]),
            &env_39,
            &store,
            &ResolveOptions::default(),
        )
        .unwrap();
        assert!(graph.nodes.contains_key("numpy"));
    }

    #[test]
    fn extras_pull_their_dependencies() {
        let store = store_from_specs(&presets::versioneer_index());
        let (ids, _) =
            resolve_ids(&["versioneer[toml]"], &store, &ResolveOptions::default()).unwrap();
        assert!(ids.contains(&"hypothesis==6.0.0".to_string()));

        let store = store_from_specs(&presets::pandas_extra_index());
        let (ids, _) = resolve_ids(
            &["pandas[compression]"],
            &store,
            &ResolveOptions::default(),
        )
        .unwrap();
        assert!(ids.contains(&"zstandard==0.18.0".to_string()));
        let (ids, _) = resolve_ids(&["pandas"], &store, &ResolveOptions::default()).unwrap();
        assert!(!ids.iter().any(|id| id.starts_with("zstandard")));
    }

    #[test]
    fn root_requirement_dropped_by_marker_leaves_empty_graph() {
        let mut spec = FixtureSpec::new("numpy", "1.24.0", crate::archive::DistributionKind::Wheel);
        spec.files
            .insert("numpy/__init__.py".to_string(), String::new());
        let store = store_from_specs(&[spec]);
        let env = EnvironmentProfile::default_linux(); // python 3.10
        let roots = reqs(&["numpy>=1.21.0; python_version >= '3.11'"]);
        let (graph, _) = resolve(&roots, &env, &store, &ResolveOptions::default()).unwrap();
        assert!(graph.nodes.is_empty(), "only the synthetic root remains");
        assert!(graph.edges.is_empty());
    }

    #[test]
    fn missing_package_is_reported() {
        let mut spec = FixtureSpec::new("a", "1.0", crate::archive::DistributionKind::Wheel);
        spec.files.insert("a/__init__.py".to_string(), String::new());
        spec.install_requires.push("b".to_string());
        let store = store_from_specs(&[spec]);
        let err = resolve_ids(&["a==1.0"], &store, &ResolveOptions::default()).unwrap_err();
        match err {
            ResolveError::MissingPackage { name, required_by } => {
                assert_eq!(name, "b");
                assert_eq!(required_by, "a==1.0");
            }
            other => panic!("expected MissingPackage, got {other:?}"),
        }
    }

    #[test]
    fn unsat_carries_a_chain() {
        let mut a = FixtureSpec::new("a", "1.0", crate::archive::DistributionKind::Wheel);
        a.files.insert("a/__init__.py".to_string(), String::new());
        a.install_requires.push("c==1.0".to_string());
        let mut b = FixtureSpec::new("b", "1.0", crate::archive::DistributionKind::Wheel);
        b.files.insert("b/__init__.py".to_string(), String::new());
        b.install_requires.push("c==2.0".to_string());
        let mut c1 = FixtureSpec::new("c", "1.0", crate::archive::DistributionKind::Wheel);
        c1.files.insert("c/__init__.py".to_string(), String::new());
        let mut c2 = FixtureSpec::new("c", "2.0", crate::archive::DistributionKind::Wheel);
        c2.files.insert("c/__init__.py".to_string(), String::new());

        let store = store_from_specs(&[a, b, c1, c2]);
        let err = resolve_ids(&["a==1.0", "b==1.0"], &store, &ResolveOptions::default())
            .unwrap_err();
        match err {
            ResolveError::Unsat { chain } => assert!(!chain.is_empty()),
            other => panic!("expected Unsat, got {other:?}"),
        }
    }

    #[test]
    fn cycles_resolve_with_edges_only() {
        let mut a = FixtureSpec::new("a", "1.0", crate::archive::DistributionKind::Wheel);
        a.files.insert("a/__init__.py".to_string(), String::new());
        a.install_requires.push("b>=1.0".to_string());
        let mut b = FixtureSpec::new("b", "1.0", crate::archive::DistributionKind::Wheel);
        b.files.insert("b/__init__.py".to_string(), String::new());
        b.install_requires.push("a>=1.0".to_string());
        let store = store_from_specs(&[a, b]);
        let env = EnvironmentProfile::default_linux();
        let (graph, _) = resolve(&reqs(&["a"]), &env, &store, &ResolveOptions::default()).unwrap();
        assert_eq!(graph.nodes.len(), 2);
        assert!(graph
            .edges
            .iter()
            .any(|(from, to, _)| from == "b==1.0" && to == "a==1.0"));
        graph.validate().unwrap();
    }

    #[test]
    fn deterministic_over_repeated_runs() {
        let store = store_from_specs(&fixtures::gen_random_index(42, 6, 4, 3));
        let roots = ["acorn", "birch"];
        let first = resolve_ids(&roots, &store, &ResolveOptions::default());
        for _ in 0..3 {
            let again = resolve_ids(&roots, &store, &ResolveOptions::default());
            match (&first, &again) {
                (Ok((ids_a, stats_a)), Ok((ids_b, stats_b))) => {
                    assert_eq!(ids_a, ids_b);
                    assert_eq!(stats_a, stats_b);
                }
                (Err(_), Err(_)) => {}
                other => panic!("nondeterministic outcome: {other:?}"),
            }
        }
    }

    #[test]
    fn priority_policy_backtracks_less_than_fifo() {
        let adversarial = fixtures::backtrack_heavy_index();
        let store = store_from_specs(&adversarial.specs);
        let roots: Vec<&str> = adversarial.roots.iter().map(String::as_str).collect();

        let (_, prioritized) = resolve_ids(
            &roots,
            &store,
            &ResolveOptions {
                order: OrderPolicy::Prioritized,
                ..Default::default()
            },
        )
        .unwrap();
        let (_, fifo) = resolve_ids(
            &roots,
            &store,
            &ResolveOptions {
                order: OrderPolicy::Fifo,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            prioritized.backtracks < fifo.backtracks,
            "prioritized {} !< fifo {}",
            prioritized.backtracks,
            fifo.backtracks
        );
    }

    #[test]
    fn graph_json_round_trip() {
        let store = store_from_specs(&presets::versioneer_index());
        let env = EnvironmentProfile::default_linux();
        let (graph, _) = resolve(
            &reqs(&["versioneer[toml]"]),
            &env,
            &store,
            &ResolveOptions::default(),
        )
        .unwrap();
        let json = graph.to_json();
        let back = DependencyGraph::from_json(&json).unwrap();
        assert_eq!(graph, back);
    }

    #[test]
    fn metric_classification() {
        let set = |items: &[&str]| -> BTreeSet<String> {
            items.iter().map(|s| s.to_string()).collect()
        };
        assert_eq!(
            compare_sets(&set(&["a", "b"]), &set(&["a", "b"])),
            Metric::Correct
        );
        assert_eq!(compare_sets(&set(&["a", "b"]), &set(&["a"])), Metric::Miss);
        assert_eq!(
            compare_sets(&set(&["a"]), &set(&["a", "b"])),
            Metric::Excess
        );
        assert_eq!(compare_sets(&set(&["a", "x"]), &set(&["a", "y"])), Metric::Error);
    }

    #[test]
    fn graph_comparison_levels() {
        let mut expected = DependencyGraph::default();
        expected
            .nodes
            .insert("a".to_string(), "1.0".parse().unwrap());
        expected.edges.insert((
            ROOT_ID.to_string(),
            "a==1.0".to_string(),
            "a".to_string(),
        ));
        let mut actual = expected.clone();
        assert_eq!(
            compare_graphs(&expected, &actual, CompareLevel::Node),
            Metric::Correct
        );
        assert_eq!(
            compare_graphs(&expected, &actual, CompareLevel::Edge),
            Metric::Correct
        );

        // Same nodes, one edge label differs: node-level Correct, edge-level Error.
        actual.edges.clear();
        actual.edges.insert((
            ROOT_ID.to_string(),
            "a==1.0".to_string(),
            "a>=0.5".to_string(),
        ));
        assert_eq!(
            compare_graphs(&expected, &actual, CompareLevel::Node),
            Metric::Correct
        );
        assert_eq!(
            compare_graphs(&expected, &actual, CompareLevel::Edge),
            Metric::Error
        );

        // Actual missing a node entirely.
        let empty = DependencyGraph::default();
        assert_eq!(
            compare_graphs(&expected, &empty, CompareLevel::Node),
            Metric::Miss
        );
    }
}
