//! Recursive structural distance between object graphs.
//!
//! Primitives cost 1 when unequal, strings and arrays use unit-cost
//! Levenshtein distance, objects sum their field distances, and a kind or
//! type mismatch is infinitely far. Cycles are cut by treating a pair that is
//! already being compared further up the stack as equal.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use thiserror::Error;

use crate::objgraph::{NodeId, ObjectGraph, Payload, Snapshot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistanceError {
    #[error("node {0} does not resolve")]
    DanglingNode(NodeId),
    #[error("snapshot set is empty")]
    EmptySnapshotSet,
}

/// A distance value: an exact non-negative integer or positive infinity.
///
/// Finite addition saturates at `u64::MAX`, which still compares below
/// `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtendedDistance {
    Finite(u64),
    Infinite,
}

impl ExtendedDistance {
    pub const ZERO: Self = ExtendedDistance::Finite(0);
    pub const ONE: Self = ExtendedDistance::Finite(1);

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    pub fn is_infinite(self) -> bool {
        self == ExtendedDistance::Infinite
    }
}

impl Add for ExtendedDistance {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedDistance::Finite(a), ExtendedDistance::Finite(b)) => ExtendedDistance::Finite(a.saturating_add(b)),
            _ => ExtendedDistance::Infinite,
        }
    }
}

impl Sum for ExtendedDistance {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Add::add)
    }
}

impl fmt::Display for ExtendedDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedDistance::Finite(v) => write!(f, "{v}"),
            ExtendedDistance::Infinite => f.write_str("inf"),
        }
    }
}

/// An exact non-negative rational or positive infinity.
///
/// The fraction is stored as built (not reduced); equality and ordering are
/// by value.
#[derive(Debug, Clone, Copy)]
pub enum ExtendedRational {
    Finite { num: u128, den: u128 },
    Infinite,
}

impl ExtendedRational {
    pub fn zero() -> Self {
        Self::Finite { num: 0, den: 1 }
    }

    /// Panics if `den` is zero.
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        Self::Finite { num, den }
    }

    pub fn integer(v: u128) -> Self {
        Self::new(v, 1)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// Lowest-terms form of a finite value.
    pub fn reduced(self) -> Self {
        match self {
            Self::Finite { num, den } => {
                let g = gcd(num, den);
                Self::Finite { num: num / g, den: den / g }
            }
            Self::Infinite => Self::Infinite,
        }
    }

    /// Approximate value, for reporting only.
    pub fn to_f64(&self) -> f64 {
        match *self {
            Self::Finite { num, den } => num as f64 / den as f64,
            Self::Infinite => f64::INFINITY,
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Compares `a/b` with `c/d` without multiplying, by walking the continued
/// fraction expansions of both sides.
fn cmp_fraction(mut a: u128, mut b: u128, mut c: u128, mut d: u128) -> Ordering {
    loop {
        let (qa, ra) = (a / b, a % b);
        let (qc, rc) = (c / d, c % d);
        if qa != qc {
            return qa.cmp(&qc);
        }
        match (ra == 0, rc == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            // ra/b vs rc/d orders the same way as d/rc vs b/ra.
            (false, false) => (a, b, c, d) = (d, rc, b, ra),
        }
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (*self, *other) {
            (Self::Infinite, Self::Infinite) => Ordering::Equal,
            (Self::Infinite, _) => Ordering::Greater,
            (_, Self::Infinite) => Ordering::Less,
            (Self::Finite { num: a, den: b }, Self::Finite { num: c, den: d }) => cmp_fraction(a, b, c, d),
        }
    }
}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for ExtendedRational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtendedRational {}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite { num, den } => write!(f, "{num}/{den}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl From<ExtendedDistance> for ExtendedRational {
    fn from(d: ExtendedDistance) -> Self {
        match d {
            ExtendedDistance::Finite(v) => Self::integer(v as u128),
            ExtendedDistance::Infinite => Self::Infinite,
        }
    }
}

/// Node pairs whose comparison is currently in progress.
#[derive(Debug, Default, Clone)]
pub struct PairMemo {
    active: HashSet<(NodeId, NodeId)>,
}

impl PairMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, left: NodeId, right: NodeId) -> bool {
        self.active.contains(&(left, right))
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    fn enter(&mut self, left: NodeId, right: NodeId) {
        self.active.insert((left, right));
    }

    fn leave(&mut self, left: NodeId, right: NodeId) {
        self.active.remove(&(left, right));
    }
}

/// Unit-cost edit distance between two sequences under an element
/// equivalence oracle.
pub fn levenshtein<T, U, F>(a: &[T], b: &[U], mut equal: F) -> usize
where
    F: FnMut(&T, &U) -> bool,
{
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if equal(x, y) {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

const STACK_RED_ZONE: usize = 128 * 1024;
const STACK_GROWTH: usize = 4 * 1024 * 1024;

fn lookup(graph: &ObjectGraph, id: NodeId) -> Result<&Payload, DistanceError> {
    graph.node(id).map(|n| &n.payload).ok_or(DistanceError::DanglingNode(id))
}

fn count_u64(n: usize) -> ExtendedDistance {
    ExtendedDistance::Finite(n as u64)
}

/// Distance between node `n1` of `g1` and node `n2` of `g2`.
pub fn node_dist(
    g1: &ObjectGraph,
    n1: NodeId,
    g2: &ObjectGraph,
    n2: NodeId,
    memo: &mut PairMemo,
) -> Result<ExtendedDistance, DistanceError> {
    stacker::maybe_grow(STACK_RED_ZONE, STACK_GROWTH, || node_dist_inner(g1, n1, g2, n2, memo))
}

fn node_dist_inner(
    g1: &ObjectGraph,
    n1: NodeId,
    g2: &ObjectGraph,
    n2: NodeId,
    memo: &mut PairMemo,
) -> Result<ExtendedDistance, DistanceError> {
    if memo.contains(n1, n2) {
        return Ok(ExtendedDistance::ZERO);
    }
    let (p1, p2) = (lookup(g1, n1)?, lookup(g2, n2)?);
    let dist = match (p1, p2) {
        (Payload::Null, Payload::Null) => ExtendedDistance::ZERO,
        (Payload::Null, _) | (_, Payload::Null) => ExtendedDistance::ONE,
        (
            Payload::Primitive { type_name: t1, value: v1 },
            Payload::Primitive { type_name: t2, value: v2 },
        ) if t1 == t2 => {
            if v1 == v2 {
                ExtendedDistance::ZERO
            } else {
                ExtendedDistance::ONE
            }
        }
        (Payload::Str { value: s1 }, Payload::Str { value: s2 }) => {
            let a: Vec<char> = s1.chars().collect();
            let b: Vec<char> = s2.chars().collect();
            count_u64(levenshtein(&a, &b, |x, y| x == y))
        }
        (
            Payload::Array { component: c1, elements: e1 },
            Payload::Array { component: c2, elements: e2 },
        ) if c1 == c2 => {
            memo.enter(n1, n2);
            let mut failure = None;
            let d = levenshtein(e1, e2, |&x, &y| {
                if failure.is_some() {
                    return false;
                }
                match equivalent(g1, x, g2, y, memo) {
                    Ok(eq) => eq,
                    Err(e) => {
                        failure = Some(e);
                        false
                    }
                }
            });
            memo.leave(n1, n2);
            if let Some(e) = failure {
                return Err(e);
            }
            count_u64(d)
        }
        (
            Payload::Object { type_name: t1, fields: f1 },
            Payload::Object { type_name: t2, fields: f2 },
        ) if t1 == t2 => {
            memo.enter(n1, n2);
            let mut total = ExtendedDistance::ZERO;
            let mut result = Ok(());
            for (name, &v1) in f1 {
                match f2.get(name) {
                    Some(&v2) => match node_dist(g1, v1, g2, v2, memo) {
                        Ok(d) => total = total + d,
                        Err(e) => {
                            result = Err(e);
                            break;
                        }
                    },
                    None => total = total + ExtendedDistance::ONE,
                }
            }
            memo.leave(n1, n2);
            result?;
            let one_sided = f2.keys().filter(|k| !f1.contains_key(*k)).count();
            total + count_u64(one_sided)
        }
        _ => ExtendedDistance::Infinite,
    };
    Ok(dist)
}

/// True iff `node_dist` would return zero for the same arguments.
///
/// Used as the element oracle for array Levenshtein; it stops at the first
/// difference instead of summing the whole subgraph.
pub fn equivalent(
    g1: &ObjectGraph,
    n1: NodeId,
    g2: &ObjectGraph,
    n2: NodeId,
    memo: &mut PairMemo,
) -> Result<bool, DistanceError> {
    stacker::maybe_grow(STACK_RED_ZONE, STACK_GROWTH, || equivalent_inner(g1, n1, g2, n2, memo))
}

fn equivalent_inner(
    g1: &ObjectGraph,
    n1: NodeId,
    g2: &ObjectGraph,
    n2: NodeId,
    memo: &mut PairMemo,
) -> Result<bool, DistanceError> {
    if memo.contains(n1, n2) {
        return Ok(true);
    }
    let (p1, p2) = (lookup(g1, n1)?, lookup(g2, n2)?);
    match (p1, p2) {
        (Payload::Null, Payload::Null) => Ok(true),
        (
            Payload::Primitive { type_name: t1, value: v1 },
            Payload::Primitive { type_name: t2, value: v2 },
        ) => Ok(t1 == t2 && v1 == v2),
        (Payload::Str { value: s1 }, Payload::Str { value: s2 }) => Ok(s1 == s2),
        (
            Payload::Array { component: c1, elements: e1 },
            Payload::Array { component: c2, elements: e2 },
        ) => {
            if c1 != c2 || e1.len() != e2.len() {
                return Ok(false);
            }
            memo.enter(n1, n2);
            let mut result = Ok(true);
            for (&x, &y) in e1.iter().zip(e2) {
                match equivalent(g1, x, g2, y, memo) {
                    Ok(true) => {}
                    other => {
                        result = other;
                        break;
                    }
                }
            }
            memo.leave(n1, n2);
            result
        }
        (
            Payload::Object { type_name: t1, fields: f1 },
            Payload::Object { type_name: t2, fields: f2 },
        ) => {
            if t1 != t2 || f1.len() != f2.len() || !f1.keys().eq(f2.keys()) {
                return Ok(false);
            }
            memo.enter(n1, n2);
            let mut result = Ok(true);
            for (&x, &y) in f1.values().zip(f2.values()) {
                match equivalent(g1, x, g2, y, memo) {
                    Ok(true) => {}
                    other => {
                        result = other;
                        break;
                    }
                }
            }
            memo.leave(n1, n2);
            result
        }
        _ => Ok(false),
    }
}

/// Sum of root-wise distances, pairing roots by position.
pub fn snapshot_dist(s1: &Snapshot, s2: &Snapshot) -> Result<ExtendedDistance, DistanceError> {
    let (r1, r2) = (s1.graph.roots(), s2.graph.roots());
    if r1.len() != r2.len() {
        return Ok(ExtendedDistance::Infinite);
    }
    let mut total = ExtendedDistance::ZERO;
    for (&a, &b) in r1.iter().zip(r2) {
        total = total + node_dist(&s1.graph, a, &s2.graph, b, &mut PairMemo::new())?;
    }
    Ok(total)
}

/// Exact mean of `snapshot_dist` over every (original, patched) pair.
pub fn avg_pair_distance(original: &[Snapshot], patched: &[Snapshot]) -> Result<ExtendedRational, DistanceError> {
    if original.is_empty() || patched.is_empty() {
        return Err(DistanceError::EmptySnapshotSet);
    }
    let mut sum: u128 = 0;
    for so in original {
        for sp in patched {
            match snapshot_dist(so, sp)? {
                ExtendedDistance::Finite(d) => sum = sum.saturating_add(d as u128),
                ExtendedDistance::Infinite => return Ok(ExtendedRational::Infinite),
            }
        }
    }
    Ok(ExtendedRational::new(sum, (original.len() * patched.len()) as u128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objgraph::GraphBuilder;

    fn dist(g1: &ObjectGraph, g2: &ObjectGraph) -> ExtendedDistance {
        node_dist(g1, g1.roots()[0], g2, g2.roots()[0], &mut PairMemo::new()).unwrap()
    }

    fn single(f: impl FnOnce(&mut GraphBuilder) -> NodeId) -> ObjectGraph {
        let mut b = GraphBuilder::new();
        let r = f(&mut b);
        b.finish(vec![r])
    }

    fn snap(g: ObjectGraph) -> Snapshot {
        Snapshot { exit_index: 0, graph: g }
    }

    #[test]
    fn levenshtein_basics() {
        let lev = |a: &str, b: &str| {
            let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
            levenshtein(&a, &b, |x, y| x == y)
        };
        assert_eq!(lev("abc", "abc"), 0);
        assert_eq!(lev("", "abc"), 3);
        assert_eq!(lev("abc", ""), 3);
        assert_eq!(lev("kitten", "sitting"), 3);
    }

    #[test]
    fn extended_distance_saturates_below_infinity() {
        let max = ExtendedDistance::Finite(u64::MAX);
        assert_eq!(max + ExtendedDistance::ONE, max);
        assert!(max < ExtendedDistance::Infinite);
        assert_eq!(ExtendedDistance::ONE + ExtendedDistance::Infinite, ExtendedDistance::Infinite);
    }

    #[test]
    fn rational_comparison_is_exact() {
        assert_eq!(ExtendedRational::new(10, 4), ExtendedRational::new(5, 2));
        assert!(ExtendedRational::new(1, 3) < ExtendedRational::new(334, 1000));
        // Near-one fractions whose cross products overflow u128.
        assert!(ExtendedRational::new(u128::MAX, u128::MAX - 1) < ExtendedRational::new(u128::MAX - 1, u128::MAX - 2));
        assert!(ExtendedRational::new(u128::MAX, 1) < ExtendedRational::Infinite);
        assert_eq!(ExtendedRational::new(10, 4).reduced().to_string(), "5/2");
        assert_eq!(ExtendedRational::new(0, 7).reduced().to_string(), "0/1");
    }

    #[test]
    fn primitive_rules() {
        let five = single(|b| b.int(5));
        let seven = single(|b| b.int(7));
        let yes = single(|b| b.primitive("boolean", "true"));
        assert_eq!(dist(&five, &five), ExtendedDistance::ZERO);
        assert_eq!(dist(&five, &seven), ExtendedDistance::ONE);
        assert_eq!(dist(&five, &yes), ExtendedDistance::Infinite);
    }

    #[test]
    fn null_rules() {
        let null = single(|b| b.null());
        let five = single(|b| b.int(5));
        let obj = single(|b| b.object("T", []));
        assert_eq!(dist(&null, &null), ExtendedDistance::ZERO);
        assert_eq!(dist(&null, &five), ExtendedDistance::ONE);
        assert_eq!(dist(&obj, &null), ExtendedDistance::ONE);
    }

    #[test]
    fn object_field_sum() {
        let t = |x, y| {
            single(|b| {
                let x = b.int(x);
                let y = b.int(y);
                b.object("T", [("x", x), ("y", y)])
            })
        };
        assert_eq!(dist(&t(1, 2), &t(1, 3)), ExtendedDistance::ONE);
        assert_eq!(dist(&t(1, 2), &t(4, 3)), ExtendedDistance::Finite(2));
        let u = single(|b| b.object("U", []));
        assert_eq!(dist(&t(1, 2), &u), ExtendedDistance::Infinite);
    }

    #[test]
    fn mismatched_field_sets_cost_one_per_name() {
        let left = single(|b| {
            let x = b.int(1);
            let y = b.int(2);
            b.object("T", [("x", x), ("y", y)])
        });
        let right = single(|b| {
            let x = b.int(1);
            let z = b.int(2);
            b.object("T", [("x", x), ("z", z)])
        });
        assert_eq!(dist(&left, &right), ExtendedDistance::Finite(2));
        assert_eq!(dist(&right, &left), ExtendedDistance::Finite(2));
    }

    #[test]
    fn int_arrays_use_levenshtein() {
        let arr = |vals: &[i64]| {
            single(|b| {
                let e = vals.iter().map(|&v| b.int(v)).collect();
                b.array("int", e)
            })
        };
        assert_eq!(dist(&arr(&[1, 2, 3]), &arr(&[1, 3])), ExtendedDistance::ONE);
        assert_eq!(dist(&arr(&[]), &arr(&[1, 3])), ExtendedDistance::Finite(2));
        let longs = single(|b| b.array("long", vec![]));
        assert_eq!(dist(&arr(&[]), &longs), ExtendedDistance::Infinite);
    }

    #[test]
    fn array_substitution_is_unit_cost() {
        // Elements differing by several fields still cost one substitution.
        let arr = |x, y| {
            single(|b| {
                let x = b.int(x);
                let y = b.int(y);
                let p = b.object("P", [("x", x), ("y", y)]);
                b.array("P", vec![p])
            })
        };
        assert_eq!(dist(&arr(1, 1), &arr(2, 2)), ExtendedDistance::ONE);
    }

    #[test]
    fn strings_compare_by_code_point() {
        let s = |v: &str| single(|b| b.string(v));
        assert_eq!(dist(&s("kitten"), &s("sitting")), ExtendedDistance::Finite(3));
        assert_eq!(dist(&s("ü"), &s("u")), ExtendedDistance::ONE);
        let chars = single(|b| b.array("char", vec![]));
        assert_eq!(dist(&s(""), &chars), ExtendedDistance::Infinite);
    }

    #[test]
    fn cycles_terminate() {
        let ring = |v| {
            let mut b = GraphBuilder::new();
            let val = b.int(v);
            let a = b.object("Node", [("val", val)]);
            let c = b.object("Node", [("next", a)]);
            b.set_field(a, "next", c);
            let leaf = b.int(0);
            b.set_field(c, "val", leaf);
            b.finish(vec![a])
        };
        assert_eq!(dist(&ring(1), &ring(1)), ExtendedDistance::ZERO);
        assert_eq!(dist(&ring(1), &ring(2)), ExtendedDistance::ONE);
    }

    #[test]
    fn dangling_node_is_an_error() {
        let g = ObjectGraph::new(vec![], vec![9]);
        let five = single(|b| b.int(5));
        assert_eq!(
            node_dist(&g, 9, &five, 0, &mut PairMemo::new()),
            Err(DistanceError::DanglingNode(9))
        );
    }

    #[test]
    fn snapshot_distance_pairs_roots_by_position() {
        let two = |x, y| {
            let mut b = GraphBuilder::new();
            let x = b.int(x);
            let y = b.int(y);
            snap(b.finish(vec![x, y]))
        };
        assert_eq!(snapshot_dist(&two(5, 9), &two(5, 9)).unwrap(), ExtendedDistance::ZERO);
        assert_eq!(snapshot_dist(&two(5, 9), &two(5, 7)).unwrap(), ExtendedDistance::ONE);
        let mut b = GraphBuilder::new();
        let roots = (0..3).map(|i| b.int(i)).collect();
        let three = snap(b.finish(roots));
        assert_eq!(snapshot_dist(&two(0, 1), &three).unwrap(), ExtendedDistance::Infinite);
    }

    fn string_snap(s: &str) -> Snapshot {
        snap(single(|b| b.string(s)))
    }

    #[test]
    fn average_over_cross_product() {
        assert_eq!(
            avg_pair_distance(&[string_snap("")], &[string_snap("abcd")]).unwrap(),
            ExtendedRational::integer(4)
        );
        // a→b = 1, a→cd = 2, bxyz→b = 3, bxyz→cd = 4
        let orig = [string_snap("a"), string_snap("bxyz")];
        let patched = [string_snap("b"), string_snap("cd")];
        let got = avg_pair_distance(&orig, &patched).unwrap();
        assert_eq!(got, ExtendedRational::new(10, 4));
        assert_eq!(got.to_string(), "10/4");
    }

    #[test]
    fn average_absorbs_infinity_and_rejects_empty() {
        let five = snap(single(|b| b.int(5)));
        assert!(avg_pair_distance(std::slice::from_ref(&five), &[string_snap("x")]).unwrap().is_infinite());
        assert_eq!(avg_pair_distance(&[], &[five]), Err(DistanceError::EmptySnapshotSet));
    }
}
