//! Seeded synthetic corpora with a planted best patch.
//!
//! Every snapshot distance in a generated corpus is known by construction:
//! patched graphs are copies of the original graph with exactly `k`
//! primitive leaves rewritten, and each rewritten leaf is reachable along
//! exactly one object-field path, so it contributes exactly 1 to the
//! distance. All exits of one (patch, test) share the same original graph,
//! which makes the cross-product mean equal to `k` as well.
//!
//! The planted patch matches the original on every passing test and has the
//! largest distance on every failing test. Its suspiciousness is kept below
//! the maximum so that a suspiciousness-only ranking never puts it first.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Manifest, SnapshotPair, FAILING_TESTS, INPUT_CSV, MANIFEST};
use crate::distance::ExtendedRational;
use crate::objgraph::{
    canonical, encode_snapshot_document, GraphBuilder, NodeId, ObjectGraph, Payload, SnapshotDocument, SnapshotError,
};
use crate::ranking::{PatchId, PatchRecord};

pub const GROUND_TRUTH: &str = "ground-truth.json";

/// Simple-path enumeration cap for [`perturbable_leaves`].
const PATH_STEP_LIMIT: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),
    #[error("graph has {available} perturbable leaves, {needed} edits requested")]
    InsufficientLeaves { needed: usize, available: usize },
    #[error("graph has too many simple paths to classify its leaves")]
    PathExplosion,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub seed: u64,
    pub n_patches: usize,
    pub n_tests: usize,
    /// How many of the tests fail on the original program.
    pub n_failing: usize,
    /// Node-count range for each generated state graph.
    pub graph_size: RangeInclusive<usize>,
    /// Spread of decoy distances; 0 makes every decoy identical.
    pub edit_noise: u64,
    /// Share of patches given an exit-count mismatch.
    pub w_fraction: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            seed: 0,
            n_patches: 10,
            n_tests: 6,
            n_failing: 2,
            graph_size: 12..=40,
            edit_noise: 0,
            w_fraction: 0.0,
        }
    }
}

impl ScenarioParams {
    /// Distance the planted patch has on failing tests; one more than any
    /// decoy can reach.
    pub fn max_distance(&self) -> u64 {
        self.edit_noise + 2
    }

    pub fn w_count(&self) -> usize {
        (self.w_fraction * self.n_patches as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidParams(m));
        if self.n_tests < 2 {
            return bad(format!("need at least 2 tests, got {}", self.n_tests));
        }
        if self.n_failing == 0 || self.n_failing >= self.n_tests {
            return bad(format!(
                "failing tests must be in 1..{}, got {}",
                self.n_tests, self.n_failing
            ));
        }
        if self.n_patches < 2 {
            return bad(format!("need at least 2 patches, got {}", self.n_patches));
        }
        if !(0.0..=1.0).contains(&self.w_fraction) {
            return bad(format!("w_fraction {} outside [0, 1]", self.w_fraction));
        }
        if self.w_count() + 2 > self.n_patches {
            return bad(format!(
                "w_fraction {} leaves fewer than 2 ranked patches out of {}",
                self.w_fraction, self.n_patches
            ));
        }
        let min_nodes = self.max_distance() as usize + 2;
        if self.graph_size.is_empty() || *self.graph_size.start() < min_nodes {
            return bad(format!(
                "graph size {:?} must be non-empty and start at {min_nodes} or more",
                self.graph_size
            ));
        }
        if self.edit_noise > 1_000 {
            return bad(format!("edit_noise {} is too large", self.edit_noise));
        }
        Ok(())
    }
}

/// What the generator planted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub planted: PatchId,
    /// Intended mean distance per patch and test.
    pub intended: BTreeMap<PatchId, BTreeMap<String, ExtendedRational>>,
    /// Patches given an exit-count mismatch.
    pub w_patches: Vec<PatchId>,
}

#[derive(Serialize)]
struct GroundTruthJson<'a> {
    planted: u64,
    intended: BTreeMap<u64, BTreeMap<&'a str, String>>,
}

impl GroundTruth {
    pub fn to_json(&self) -> String {
        let doc = GroundTruthJson {
            planted: self.planted.0,
            intended: self
                .intended
                .iter()
                .map(|(id, tests)| (id.0, tests.iter().map(|(t, v)| (t.as_str(), v.to_string())).collect()))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("ground truth serialization cannot fail");
        s.push('\n');
        s
    }
}

/// A generated corpus held in memory.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub patches: Vec<PatchRecord>,
    pub tests: Vec<String>,
    pub failing: Vec<String>,
    /// (patch, test) → (original, patched) documents.
    pub documents: BTreeMap<(PatchId, String), (SnapshotDocument, SnapshotDocument)>,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Planted,
    Decoy,
    Mismatched,
}

fn test_name(j: usize) -> String {
    format!("synth.SubjectTest.test{j:02}")
}

pub fn build_scenario(params: &ScenarioParams) -> Result<Scenario, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let tests: Vec<String> = (0..params.n_tests).map(test_name).collect();
    let mut failing_idx = index::sample(&mut rng, params.n_tests, params.n_failing).into_vec();
    failing_idx.sort_unstable();
    let is_failing: Vec<bool> = (0..params.n_tests).map(|j| failing_idx.contains(&j)).collect();
    let failing: Vec<String> = failing_idx.iter().map(|&j| tests[j].clone()).collect();
    let exits: Vec<usize> = (0..params.n_tests).map(|_| rng.gen_range(1..=3)).collect();

    let n_w = params.w_count();
    let mut roles = vec![Role::Planted];
    roles.extend(std::iter::repeat_n(Role::Mismatched, n_w));
    roles.extend(std::iter::repeat_n(Role::Decoy, params.n_patches - n_w - 1));
    roles.shuffle(&mut rng);

    // Suspiciousness in hundredths. One decoy holds the maximum; the planted
    // and mismatched patches stay strictly below it.
    let top = rng.gen_range(60..=100u32);
    let top_decoy = roles
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == Role::Decoy)
        .map(|(i, _)| i)
        .collect::<Vec<_>>()
        .choose(&mut rng)
        .copied()
        .expect("at least one decoy");

    let noise = params.edit_noise;
    let mut patches = Vec::with_capacity(params.n_patches);
    let mut documents = BTreeMap::new();
    let mut truth = GroundTruth {
        planted: PatchId(0),
        intended: BTreeMap::new(),
        w_patches: Vec::new(),
    };

    for (i, &role) in roles.iter().enumerate() {
        let id = PatchId(i as u64 + 1);
        let hundredths = match role {
            Role::Decoy if i == top_decoy => top,
            Role::Decoy => rng.gen_range(5..=top),
            Role::Planted | Role::Mismatched => rng.gen_range(5..top),
        };
        let method = format!("synth.Subject.method{}", rng.gen_range(0..3));
        match role {
            Role::Planted => truth.planted = id,
            Role::Mismatched => truth.w_patches.push(id),
            Role::Decoy => {}
        }

        let mut intended = BTreeMap::new();
        for (j, test) in tests.iter().enumerate() {
            let k = match (role, is_failing[j]) {
                (Role::Planted, false) => 0,
                (Role::Planted, true) => params.max_distance(),
                _ => rng.gen_range(1..=1 + noise),
            };
            let mut patched_exits = exits[j];
            if role == Role::Mismatched && is_failing[j] {
                patched_exits = if exits[j] == 1 || rng.gen_bool(0.5) {
                    exits[j] + 1
                } else {
                    exits[j] - 1
                };
            }

            let size = rng.gen_range(params.graph_size.clone());
            let state = random_state_graph(&mut rng, size, params.max_distance() as usize);
            let mut original = SnapshotDocument::new(test.clone(), method.clone());
            for _ in 0..exits[j] {
                original.push(state.clone());
            }
            let mut patched = SnapshotDocument::new(test.clone(), method.clone());
            for _ in 0..patched_exits {
                patched.push(perturb_graph(&state, k as usize, &mut rng)?);
            }
            intended.insert(test.clone(), ExtendedRational::integer(k as u128));
            documents.insert((id, test.clone()), (original, patched));
        }
        truth.intended.insert(id, intended);

        patches.push(PatchRecord {
            id,
            susp: f64::from(hundredths) / 100.0,
            method,
            class_artifact: "synth/Subject.class".into(),
            covering_tests: tests.clone(),
        });
    }

    Ok(Scenario {
        patches,
        tests,
        failing,
        documents,
        truth,
    })
}

/// Builds a scenario and writes it as a corpus directory.
pub fn generate_scenario(params: &ScenarioParams, out: &Path) -> Result<GroundTruth, SynthError> {
    let scenario = build_scenario(params)?;
    scenario.write(out)?;
    Ok(scenario.truth)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), SynthError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| SynthError::Io {
            path: parent.to_owned(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| SynthError::Io {
        path: path.to_owned(),
        source,
    })
}

impl Scenario {
    pub fn write(&self, out: &Path) -> Result<(), SynthError> {
        let mut csv = String::from("Id,Susp,Method,Class-File,Covering-Tests\n");
        for p in &self.patches {
            csv.push_str(&format!(
                "{},{:.2},{},{},{}\n",
                p.id,
                p.susp,
                p.method,
                p.class_artifact,
                p.covering_tests.join(" ")
            ));
        }
        write(&out.join(INPUT_CSV), csv.as_bytes())?;

        let test_index: HashMap<&str, usize> = self.tests.iter().enumerate().map(|(j, t)| (t.as_str(), j)).collect();
        let mut manifest = Manifest::default();
        for ((patch, test), (original, patched)) in &self.documents {
            let k = test_index[test.as_str()];
            let pair = SnapshotPair {
                original: format!("snapshots/p{patch}/original/{k}.snap"),
                patched: format!("snapshots/p{patch}/patched/{k}.snap"),
            };
            write(&out.join(&pair.original), &encode_snapshot_document(original)?)?;
            write(&out.join(&pair.patched), &encode_snapshot_document(patched)?)?;
            manifest.patches.entry(patch.0).or_default().insert(test.clone(), pair);
        }
        write(&out.join(MANIFEST), manifest.to_json().as_bytes())?;

        let mut failing = self.failing.join("\n");
        failing.push('\n');
        write(&out.join(FAILING_TESTS), failing.as_bytes())?;
        write(&out.join(GROUND_TRUTH), self.truth.to_json().as_bytes())
    }
}

/// Ranking by suspiciousness alone (descending, ties by id), for comparison.
pub fn susp_only_ranking(patches: &[PatchRecord]) -> Vec<PatchId> {
    let mut sorted: Vec<&PatchRecord> = patches.iter().collect();
    sorted.sort_by(|a, b| b.susp.total_cmp(&a.susp).then(a.id.cmp(&b.id)));
    sorted.into_iter().map(|p| p.id).collect()
}

fn random_primitive(rng: &mut ChaCha8Rng, b: &mut GraphBuilder) -> NodeId {
    match rng.gen_range(0..5) {
        0 => b.int(rng.gen_range(-1000..1000)),
        1 => b.primitive("long", canonical::int(rng.gen_range(-1_000_000..1_000_000))),
        2 => b.primitive("boolean", canonical::boolean(rng.gen())),
        3 => b.primitive("double", canonical::float64(rng.gen_range(-100.0..100.0))),
        _ => b.primitive("char", canonical::character(rng.gen_range('a'..='z'))),
    }
}

/// Method state with two parameters: an object tree (with an occasional
/// back-reference to its root) and an int. The root object always carries
/// at least `min_leaves` primitive fields.
fn random_state_graph(rng: &mut ChaCha8Rng, size: usize, min_leaves: usize) -> ObjectGraph {
    let mut b = GraphBuilder::new();
    let root = b.object("synth.State", []);
    let param = b.int(rng.gen_range(0..100));
    let mut next_field = 0usize;
    let mut field = || {
        next_field += 1;
        format!("f{next_field:03}")
    };
    // (object id, depth)
    let mut objects: Vec<(NodeId, usize)> = vec![(root, 0)];
    for _ in 0..min_leaves {
        let leaf = random_primitive(rng, &mut b);
        b.set_field(root, &field(), leaf);
    }
    let mut count = 2 + min_leaves;
    while count < size {
        let (parent, depth) = *objects.choose(rng).expect("root exists");
        let roll = rng.gen_range(0..100);
        let child = if roll < 55 {
            count += 1;
            random_primitive(rng, &mut b)
        } else if roll < 70 && depth < 6 {
            count += 1;
            let obj = b.object(&format!("synth.Part{}", depth + 1), []);
            if rng.gen_bool(0.3) {
                b.set_field(obj, "owner", root);
            }
            objects.push((obj, depth + 1));
            obj
        } else if roll < 80 {
            count += 1;
            let len = rng.gen_range(0..6);
            let s: String = (0..len).map(|_| rng.gen_range('a'..='e')).collect();
            b.string(s)
        } else if roll < 92 {
            let len = rng.gen_range(0..4).min(size.saturating_sub(count + 1));
            let elems = (0..len).map(|_| b.int(rng.gen_range(0..10))).collect();
            count += len + 1;
            b.array("int", elems)
        } else {
            count += 1;
            b.null()
        };
        b.set_field(parent, &field(), child);
    }
    b.finish(vec![root, param])
}

/// Primitive nodes that `node_dist` visits exactly once when comparing the
/// graph with a copy of itself, and only through object fields. Rewriting
/// any `k` of them changes the root-wise distance by exactly `k`.
pub fn perturbable_leaves(graph: &ObjectGraph) -> Result<Vec<NodeId>, SynthError> {
    // Number of simple paths from each root to each primitive, with a
    // penalty for paths through arrays (their elements go through
    // Levenshtein, which does not add up per leaf).
    let mut visits: HashMap<NodeId, usize> = HashMap::new();
    let mut steps = 0usize;
    for &root in graph.roots() {
        // (node, via_array) frames with an explicit on-path set.
        let mut on_path: Vec<NodeId> = Vec::new();
        let mut stack: Vec<(NodeId, bool, bool)> = vec![(root, false, false)];
        while let Some((id, via_array, leaving)) = stack.pop() {
            if leaving {
                on_path.pop();
                continue;
            }
            steps += 1;
            if steps > PATH_STEP_LIMIT {
                return Err(SynthError::PathExplosion);
            }
            if on_path.contains(&id) {
                continue;
            }
            let Some(node) = graph.node(id) else { continue };
            match &node.payload {
                Payload::Primitive { .. } => {
                    *visits.entry(id).or_default() += if via_array { 2 } else { 1 };
                }
                Payload::Object { fields, .. } => {
                    on_path.push(id);
                    stack.push((id, via_array, true));
                    for &child in fields.values() {
                        stack.push((child, via_array, false));
                    }
                }
                Payload::Array { elements, .. } => {
                    on_path.push(id);
                    stack.push((id, via_array, true));
                    for &child in elements {
                        stack.push((child, true, false));
                    }
                }
                Payload::Null | Payload::Str { .. } => {}
            }
        }
    }
    let mut leaves: Vec<NodeId> = visits.into_iter().filter(|&(_, n)| n == 1).map(|(id, _)| id).collect();
    leaves.sort_unstable();
    Ok(leaves)
}

/// A canonical value of the same type that differs from `value`.
fn fresh_value(type_name: &str, value: &str, rng: &mut impl Rng) -> String {
    let delta: i64 = rng.gen_range(1..=50);
    match type_name {
        "int" | "long" | "short" | "byte" => match value.parse::<i64>() {
            Ok(v) => canonical::int(if v > 0 { v - delta } else { v + delta }),
            Err(_) => format!("{value}~"),
        },
        "boolean" => canonical::boolean(value != "true"),
        "char" => match value.parse::<u32>() {
            Ok(v) => (if v == u32::from('a') { 'b' } else { 'a' } as u32).to_string(),
            Err(_) => format!("{value}~"),
        },
        "double" | "float" => match u64::from_str_radix(value, 16) {
            // Flip the lowest mantissa bit: a different bit pattern of the
            // same width.
            Ok(bits) => format!("{:0width$x}", bits ^ 1, width = value.len()),
            Err(_) => format!("{value}~"),
        },
        _ => format!("{value}~"),
    }
}

/// Copy of `graph` with exactly `k` perturbable primitive leaves rewritten to
/// unequal values of the same type.
pub fn perturb_graph(graph: &ObjectGraph, k: usize, rng: &mut impl Rng) -> Result<ObjectGraph, SynthError> {
    let mut out = graph.clone();
    if k == 0 {
        return Ok(out);
    }
    let leaves = perturbable_leaves(graph)?;
    if leaves.len() < k {
        return Err(SynthError::InsufficientLeaves {
            needed: k,
            available: leaves.len(),
        });
    }
    for pos in index::sample(rng, leaves.len(), k) {
        let node = out.node_mut(leaves[pos]).expect("leaf exists");
        if let Payload::Primitive { type_name, value } = &mut node.payload {
            *value = fresh_value(type_name, value, rng);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{avg_pair_distance, node_dist, snapshot_dist, ExtendedDistance, PairMemo};
    use crate::objgraph::Snapshot;

    fn root_dist(a: &ObjectGraph, b: &ObjectGraph) -> ExtendedDistance {
        snapshot_dist(
            &Snapshot {
                exit_index: 0,
                graph: a.clone(),
            },
            &Snapshot {
                exit_index: 0,
                graph: b.clone(),
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_edits_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_state_graph(&mut rng, 20, 3);
        let p = perturb_graph(&g, 0, &mut rng).unwrap();
        assert_eq!(p, g);
        assert_eq!(root_dist(&g, &p), ExtendedDistance::ZERO);
    }

    #[test]
    fn one_edit_on_flat_object() {
        let mut b = GraphBuilder::new();
        let x = b.int(1);
        let y = b.int(2);
        let z = b.primitive("boolean", "true");
        let o = b.object("T", [("x", x), ("y", y), ("z", z)]);
        let g = b.finish(vec![o]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = perturb_graph(&g, 1, &mut rng).unwrap();
        assert_eq!(node_dist(&g, o, &p, o, &mut PairMemo::new()).unwrap(), ExtendedDistance::ONE);
    }

    #[test]
    fn two_edits_on_nested_object() {
        let mut b = GraphBuilder::new();
        let x = b.int(1);
        let inner = b.object("Inner", [("x", x)]);
        let y = b.primitive("double", canonical::float64(2.5));
        let o = b.object("Outer", [("inner", inner), ("y", y)]);
        b.set_field(inner, "owner", o);
        let g = b.finish(vec![o]);
        assert_eq!(perturbable_leaves(&g).unwrap(), vec![x, y]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = perturb_graph(&g, 2, &mut rng).unwrap();
        assert_eq!(node_dist(&g, o, &p, o, &mut PairMemo::new()).unwrap(), ExtendedDistance::Finite(2));
    }

    #[test]
    fn shared_and_array_leaves_are_not_perturbable() {
        let mut b = GraphBuilder::new();
        let shared = b.int(1);
        let in_array = b.int(2);
        let arr = b.array("int", vec![in_array]);
        let own = b.int(3);
        let o = b.object("T", [("a", shared), ("b", shared), ("arr", arr), ("own", own)]);
        let g = b.finish(vec![o]);
        assert_eq!(perturbable_leaves(&g).unwrap(), vec![own]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            perturb_graph(&g, 2, &mut rng),
            Err(SynthError::InsufficientLeaves { needed: 2, available: 1 })
        ));
    }

    #[test]
    fn realized_distance_matches_edit_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for k in 1..=3 {
            for _ in 0..20 {
                let g = random_state_graph(&mut rng, 30, 3);
                let p = perturb_graph(&g, k, &mut rng).unwrap();
                assert_eq!(root_dist(&g, &p), ExtendedDistance::Finite(k as u64));
            }
        }
    }

    #[test]
    fn fresh_values_differ() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (t, v) in [
            ("int", "0"),
            ("int", "7"),
            ("long", "-3"),
            ("boolean", "false"),
            ("char", "97"),
            ("char", "120"),
            ("double", "3ff0000000000000"),
            ("float", "3f800000"),
            ("synth.Opaque", "x"),
        ] {
            let f = fresh_value(t, v, &mut rng);
            assert_ne!(f, v, "{t}");
            if t == "float" {
                assert_eq!(f.len(), 8);
            }
        }
    }

    #[test]
    fn scenario_matches_ground_truth() {
        let params = ScenarioParams {
            seed: 11,
            edit_noise: 2,
            w_fraction: 0.2,
            ..ScenarioParams::default()
        };
        let s = build_scenario(&params).unwrap();
        assert_eq!(s.truth.w_patches.len(), 2);
        for ((patch, test), (o, p)) in &s.documents {
            let got = avg_pair_distance(&o.snapshots, &p.snapshots).unwrap();
            assert_eq!(got, s.truth.intended[patch][test], "patch {patch} test {test}");
        }
    }

    #[test]
    fn noise_free_decoys_tie() {
        let s = build_scenario(&ScenarioParams {
            seed: 4,
            ..ScenarioParams::default()
        })
        .unwrap();
        let decoys: Vec<_> = s.truth.intended.iter().filter(|(id, _)| **id != s.truth.planted).collect();
        for (_, d) in &decoys {
            assert_eq!(*d, decoys[0].1);
        }
    }

    #[test]
    fn w_fraction_sets_exact_mismatch_count() {
        let s = build_scenario(&ScenarioParams {
            seed: 2,
            w_fraction: 0.5,
            ..ScenarioParams::default()
        })
        .unwrap();
        let mismatched: Vec<PatchId> = s
            .patches
            .iter()
            .filter(|p| {
                s.tests.iter().any(|t| {
                    let (o, q) = &s.documents[&(p.id, t.clone())];
                    o.snapshots.len() != q.snapshots.len()
                })
            })
            .map(|p| p.id)
            .collect();
        assert_eq!(mismatched.len(), 5);
        assert_eq!(mismatched, s.truth.w_patches);
    }

    #[test]
    fn planted_susp_is_below_maximum() {
        for seed in 0..50 {
            let s = build_scenario(&ScenarioParams {
                seed,
                w_fraction: 0.3,
                ..ScenarioParams::default()
            })
            .unwrap();
            let max = s.patches.iter().map(|p| p.susp).fold(0.0, f64::max);
            let planted = s.patches.iter().find(|p| p.id == s.truth.planted).unwrap();
            assert!(planted.susp < max);
            assert_ne!(susp_only_ranking(&s.patches)[0], s.truth.planted);
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let base = ScenarioParams::default();
        for params in [
            ScenarioParams { n_tests: 1, n_failing: 1, ..base.clone() },
            ScenarioParams { n_failing: 0, ..base.clone() },
            ScenarioParams { n_failing: 6, ..base.clone() },
            ScenarioParams { n_patches: 1, ..base.clone() },
            ScenarioParams { w_fraction: 0.95, ..base.clone() },
            ScenarioParams { w_fraction: -0.1, ..base.clone() },
            ScenarioParams { graph_size: 3..=40, ..base.clone() },
        ] {
            assert!(matches!(build_scenario(&params), Err(SynthError::InvalidParams(_))), "{params:?}");
        }
    }

    #[test]
    fn same_seed_same_scenario() {
        let a = build_scenario(&ScenarioParams::default()).unwrap();
        let b = build_scenario(&ScenarioParams::default()).unwrap();
        assert_eq!(a.documents, b.documents);
        assert_eq!(a.patches, b.patches);
        assert_eq!(a.truth, b.truth);
    }
}
