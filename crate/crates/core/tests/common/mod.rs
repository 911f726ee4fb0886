//! Test-only oracles and generators, independent of the library's own
//! algorithms.

#![allow(dead_code)]

use std::path::PathBuf;

use patchrank::objgraph::{GraphBuilder, NodeId, ObjectGraph, Payload};
use rand::Rng;

/// Edit distance by direct top-down recursion over the three edit choices,
/// memoized on suffix positions so short inputs stay tractable.
pub fn levenshtein_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    const UNSET: usize = usize::MAX;
    fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut [usize]) -> usize {
        let slot = i * (b.len() + 1) + j;
        if memo[slot] != UNSET {
            return memo[slot];
        }
        let v = if i == a.len() {
            b.len() - j
        } else if j == b.len() {
            a.len() - i
        } else {
            let delete = 1 + go(a, b, i + 1, j, memo);
            let insert = 1 + go(a, b, i, j + 1, memo);
            let keep_or_sub = usize::from(a[i] != b[j]) + go(a, b, i + 1, j + 1, memo);
            delete.min(insert).min(keep_or_sub)
        };
        memo[slot] = v;
        v
    }
    let cells = (a.len() + 1) * (b.len() + 1);
    if cells <= 64 {
        let mut memo = [UNSET; 64];
        go(a, b, 0, 0, &mut memo[..cells])
    } else {
        go(a, b, 0, 0, &mut vec![UNSET; cells])
    }
}

/// Every sequence over `alphabet` symbols with length at most `max_len`.
pub fn all_sequences(alphabet: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for c in 0..alphabet {
                let mut t: Vec<u8> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn random_node(rng: &mut impl Rng, b: &mut GraphBuilder, depth: usize, max_depth: usize, objects: &mut Vec<NodeId>) -> NodeId {
    let leaf_only = depth >= max_depth;
    match rng.gen_range(0..if leaf_only { 4 } else { 7 }) {
        0 => b.null(),
        1 => b.int(rng.gen_range(0..3)),
        2 => b.primitive("boolean", if rng.gen() { "true" } else { "false" }),
        3 => {
            let len = rng.gen_range(0..4);
            b.string((0..len).map(|_| rng.gen_range('a'..='c')).collect::<String>())
        }
        4 => {
            let n = rng.gen_range(0..4);
            let elems = (0..n).map(|_| b.int(rng.gen_range(0..3))).collect();
            b.array("int", elems)
        }
        5 => {
            let n = rng.gen_range(0..3);
            let elems = (0..n).map(|_| random_node(rng, b, depth + 1, max_depth, objects)).collect();
            b.array("A", elems)
        }
        _ => {
            let ty = if rng.gen_bool(0.7) { "A" } else { "B" };
            let obj = b.object(ty, []);
            objects.push(obj);
            for name in ["x", "y", "z"] {
                if rng.gen_bool(0.7) {
                    let child = random_node(rng, b, depth + 1, max_depth, objects);
                    b.set_field(obj, name, child);
                }
            }
            obj
        }
    }
}

/// Random graph with depth at most `max_depth` below the root; when
/// `cyclic`, some objects get a `back` field pointing at an earlier object
/// (often an ancestor, closing a cycle).
pub fn random_graph(rng: &mut impl Rng, max_depth: usize, cyclic: bool) -> ObjectGraph {
    let mut b = GraphBuilder::new();
    let mut objects = Vec::new();
    let root = b.object("A", []);
    objects.push(root);
    for name in ["x", "y", "z"] {
        let child = random_node(rng, &mut b, 1, max_depth, &mut objects);
        b.set_field(root, name, child);
    }
    if cyclic {
        let snapshot = objects.clone();
        for (i, &obj) in snapshot.iter().enumerate() {
            if rng.gen_bool(0.4) {
                let target = snapshot[rng.gen_range(0..=i)];
                b.set_field(obj, "back", target);
            }
        }
    }
    b.finish(vec![root])
}

/// Longest acyclic path length (in edges) from the roots, for checking the
/// generator's depth bound. Back edges to objects already on the path are
/// skipped.
pub fn tree_depth(g: &ObjectGraph) -> usize {
    fn go(g: &ObjectGraph, id: NodeId, path: &mut Vec<NodeId>) -> usize {
        if path.contains(&id) {
            return 0;
        }
        path.push(id);
        let node = g.node(id).expect("valid graph");
        let refs: Vec<NodeId> = match &node.payload {
            Payload::Object { fields, .. } => fields.iter().filter(|(k, _)| k.as_str() != "back").map(|(_, v)| *v).collect(),
            Payload::Array { elements, .. } => elements.clone(),
            _ => vec![],
        };
        let d = refs.into_iter().map(|c| 1 + go(g, c, path)).max().unwrap_or(0);
        path.pop();
        d
    }
    g.roots().iter().map(|&r| go(g, r, &mut Vec::new())).max().unwrap_or(0)
}

pub fn has_cycle(g: &ObjectGraph) -> bool {
    fn go(g: &ObjectGraph, id: NodeId, path: &mut Vec<NodeId>, done: &mut Vec<NodeId>) -> bool {
        if path.contains(&id) {
            return true;
        }
        if done.contains(&id) {
            return false;
        }
        path.push(id);
        let node = g.node(id).expect("valid graph");
        let found = node.payload.references().any(|c| go(g, c, path, done));
        path.pop();
        done.push(id);
        found
    }
    g.roots().iter().any(|&r| go(g, r, &mut Vec::new(), &mut Vec::new()))
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Copies a directory tree.
pub fn copy_dir(from: &std::path::Path, to: &std::path::Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let dest = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &dest);
        } else {
            std::fs::copy(entry.path(), dest).unwrap();
        }
    }
}
