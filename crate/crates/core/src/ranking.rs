//! Patch partitioning, per-class similarity sort, and the final ranking.
//!
//! Patches whose per-test exit counts differ from the original program go
//! to the W bucket and are ordered by suspiciousness alone. The rest are
//! grouped by their exit-count signature. Inside a group every patch gets a
//! rank per test (closest to the original first on passing tests, farthest
//! first on failing tests) and patches are ordered by mean rank. Groups and
//! W singletons are then concatenated by descending maximum suspiciousness.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::distance::{avg_pair_distance, DistanceError, ExtendedRational};
use crate::exec::Execution;
use crate::objgraph::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatchId(pub u64);

impl fmt::Display for PatchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One plausible patch as described by a row of the patch CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchRecord {
    pub id: PatchId,
    /// Suspiciousness of the patched location, in `[0, 1]`.
    pub susp: f64,
    pub method: String,
    /// The `Class-File` column, carried through untouched.
    pub class_artifact: String,
    pub covering_tests: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Passing,
    Failing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestOutcome {
    pub test_name: String,
    pub outcome: Outcome,
}

/// Outcomes of the original program: the configured failing tests fail,
/// every other test passes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcomes {
    failing: BTreeSet<String>,
}

impl Outcomes {
    pub fn new<I, S>(failing: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            failing: failing.into_iter().map(Into::into).collect(),
        }
    }

    pub fn of(&self, test: &str) -> Outcome {
        if self.failing.contains(test) {
            Outcome::Failing
        } else {
            Outcome::Passing
        }
    }

    pub fn failing(&self) -> impl Iterator<Item = &str> {
        self.failing.iter().map(String::as_str)
    }

    pub fn table<'a>(&self, tests: impl IntoIterator<Item = &'a String>) -> Vec<TestOutcome> {
        tests
            .into_iter()
            .map(|t| TestOutcome {
                test_name: t.clone(),
                outcome: self.of(t),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Version {
    Original,
    Patched,
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Version::Original => "original",
            Version::Patched => "patched",
        })
    }
}

/// Read access to recorded snapshots.
pub trait SnapshotStore: Sync {
    /// Every test name in the corpus, in canonical order.
    fn tests(&self) -> &[String];

    /// Snapshots of `patch`'s method under `test`, or `None` if nothing was
    /// recorded for that combination.
    fn snapshots(&self, patch: PatchId, test: &str, version: Version) -> Option<&[Snapshot]>;

    /// Exit counts per test in canonical order; unrecorded tests count 0.
    fn counts(&self, patch: PatchId, version: Version) -> Vec<usize> {
        self.tests()
            .iter()
            .map(|t| self.snapshots(patch, t, version).map_or(0, <[Snapshot]>::len))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankingError {
    #[error("count lists differ in length ({original} original vs {patched} patched)")]
    LengthMismatch { original: usize, patched: usize },
    #[error("no {version} snapshots for patch {patch} under test {test}")]
    MissingSnapshots { patch: PatchId, test: String, version: Version },
    #[error("patch {patch}, test {test}: {source}")]
    Distance {
        patch: PatchId,
        test: String,
        #[source]
        source: DistanceError,
    },
    #[error("unknown patch {0}")]
    UnknownPatch(PatchId),
}

/// Exit counts of a patched program, one per canonical test.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoverageSignature {
    pub counts: Vec<usize>,
}

impl CoverageSignature {
    /// Positions of tests that reached the method at least once.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i)
    }
}

/// Returns the patched signature and whether any test's count changed.
pub fn coverage_signature(original: &[usize], patched: &[usize]) -> Result<(CoverageSignature, bool), RankingError> {
    if original.len() != patched.len() {
        return Err(RankingError::LengthMismatch {
            original: original.len(),
            patched: patched.len(),
        });
    }
    let mismatch = original != patched;
    Ok((
        CoverageSignature {
            counts: patched.to_vec(),
        },
        mismatch,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPatch {
    pub id: PatchId,
    pub signature: CoverageSignature,
    pub mismatch: bool,
}

/// Patches sharing one coverage signature, in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub patches: Vec<PatchId>,
    pub signature: CoverageSignature,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partition {
    pub w_bucket: Vec<PatchId>,
    pub classes: Vec<EquivalenceClass>,
}

/// Splits patches into the W bucket and signature classes. Classes appear in
/// order of their smallest patch id.
pub fn partition(patches: &[SignedPatch]) -> Partition {
    let mut sorted: Vec<&SignedPatch> = patches.iter().collect();
    sorted.sort_by_key(|p| p.id);

    let mut out = Partition::default();
    let mut class_of: HashMap<&CoverageSignature, usize> = HashMap::new();
    for p in sorted {
        if p.mismatch {
            out.w_bucket.push(p.id);
            continue;
        }
        match class_of.get(&p.signature) {
            Some(&i) => out.classes[i].patches.push(p.id),
            None => {
                class_of.insert(&p.signature, out.classes.len());
                out.classes.push(EquivalenceClass {
                    patches: vec![p.id],
                    signature: p.signature.clone(),
                });
            }
        }
    }
    out
}

/// Mean state distance from the original program, one row per patch of a
/// class and one column per test that reached the patched method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    pub patches: Vec<PatchId>,
    pub tests: Vec<String>,
    pub entries: Vec<Vec<ExtendedRational>>,
}

impl DistanceMatrix {
    pub fn column(&self, j: usize) -> Vec<ExtendedRational> {
        self.entries.iter().map(|row| row[j]).collect()
    }
}

pub fn build_distance_matrix(
    class: &EquivalenceClass,
    store: &dyn SnapshotStore,
    exec: &Execution,
) -> Result<DistanceMatrix, RankingError> {
    let tests: Vec<String> = class.signature.active().map(|i| store.tests()[i].clone()).collect();
    let cells: Vec<(PatchId, &str)> = class
        .patches
        .iter()
        .flat_map(|&p| tests.iter().map(move |t| (p, t.as_str())))
        .collect();

    let values = exec.map(&cells, |&(patch, test)| {
        let fetch = |version| {
            store.snapshots(patch, test, version).ok_or_else(|| RankingError::MissingSnapshots {
                patch,
                test: test.to_owned(),
                version,
            })
        };
        let original = fetch(Version::Original)?;
        let patched = fetch(Version::Patched)?;
        avg_pair_distance(original, patched).map_err(|source| RankingError::Distance {
            patch,
            test: test.to_owned(),
            source,
        })
    });

    let mut values = values.into_iter();
    let mut entries = Vec::with_capacity(class.patches.len());
    for _ in &class.patches {
        let row = values.by_ref().take(tests.len()).collect::<Result<Vec<_>, _>>()?;
        entries.push(row);
    }
    Ok(DistanceMatrix {
        patches: class.patches.clone(),
        tests,
        entries,
    })
}

/// Competition ranks for one column: rank 1 is the smallest distance on a
/// passing test and the largest on a failing test; tied entries share
/// `1 + (number of strictly better entries)`.
pub fn column_ranks(column: &[ExtendedRational], outcome: Outcome) -> Vec<usize> {
    let mut sorted = column.to_vec();
    sorted.sort();
    column
        .iter()
        .map(|v| {
            let better = match outcome {
                Outcome::Passing => sorted.partition_point(|x| x < v),
                Outcome::Failing => sorted.len() - sorted.partition_point(|x| x <= v),
            };
            better + 1
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    pub entries: Vec<Vec<usize>>,
}

pub fn rank_matrix(d: &DistanceMatrix, outcomes: &Outcomes) -> RankMatrix {
    let mut entries = vec![Vec::with_capacity(d.tests.len()); d.patches.len()];
    for (j, test) in d.tests.iter().enumerate() {
        for (row, rank) in entries.iter_mut().zip(column_ranks(&d.column(j), outcomes.of(test))) {
            row.push(rank);
        }
    }
    RankMatrix { entries }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredPatch {
    pub id: PatchId,
    /// Mean rank over the class's columns; `None` when there are none.
    pub score: Option<ExtendedRational>,
}

/// Orders a class best first: ascending mean rank, then ascending id.
pub fn simsort(d: &DistanceMatrix, outcomes: &Outcomes) -> Vec<ScoredPatch> {
    let ranks = rank_matrix(d, outcomes);
    let columns = d.tests.len() as u128;
    let mut scored: Vec<ScoredPatch> = d
        .patches
        .iter()
        .zip(&ranks.entries)
        .map(|(&id, row)| ScoredPatch {
            id,
            score: (columns > 0).then(|| ExtendedRational::new(row.iter().map(|&r| r as u128).sum(), columns)),
        })
        .collect();
    scored.sort_by(|a, b| a.score.cmp(&b.score).then(a.id.cmp(&b.id)));
    scored
}

/// Largest suspiciousness among `seq`. Panics if a patch is unknown.
pub fn max_susp(seq: &[PatchId], patches: &BTreeMap<PatchId, PatchRecord>) -> f64 {
    seq.iter()
        .map(|id| patches[id].susp)
        .max_by(f64::total_cmp)
        .unwrap_or(f64::NEG_INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    WBucket,
    SimSort { class_index: usize },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::WBucket => f.write_str("W"),
            Provenance::SimSort { class_index } => write!(f, "S{class_index}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedEntry {
    pub position: usize,
    pub patch: PatchId,
    pub provenance: Provenance,
    pub score: Option<ExtendedRational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn ids(&self) -> Vec<PatchId> {
        self.entries.iter().map(|e| e.patch).collect()
    }

    pub fn position_of(&self, patch: PatchId) -> Option<usize> {
        self.entries.iter().find(|e| e.patch == patch).map(|e| e.position)
    }
}

struct Sequence {
    max_susp: f64,
    is_w: bool,
    min_id: PatchId,
    members: Vec<(PatchId, Provenance, Option<ExtendedRational>)>,
}

/// Concatenates W singletons and sorted classes by descending maximum
/// suspiciousness. Ties put W singletons first, then the sequence holding
/// the smaller patch id.
///
/// `sorted_classes[i]` must be the simsort output for `partition.classes[i]`.
pub fn final_ranking(
    partition: &Partition,
    sorted_classes: &[Vec<ScoredPatch>],
    patches: &BTreeMap<PatchId, PatchRecord>,
) -> Result<RankedList, RankingError> {
    let known = |id: &PatchId| patches.contains_key(id).then_some(*id).ok_or(RankingError::UnknownPatch(*id));

    let mut sequences = Vec::with_capacity(partition.w_bucket.len() + sorted_classes.len());
    for id in &partition.w_bucket {
        let id = known(id)?;
        sequences.push(Sequence {
            max_susp: patches[&id].susp,
            is_w: true,
            min_id: id,
            members: vec![(id, Provenance::WBucket, None)],
        });
    }
    for (class_index, sorted) in sorted_classes.iter().enumerate() {
        if sorted.is_empty() {
            continue;
        }
        let ids = sorted.iter().map(|s| known(&s.id)).collect::<Result<Vec<_>, _>>()?;
        sequences.push(Sequence {
            max_susp: max_susp(&ids, patches),
            is_w: false,
            min_id: *ids.iter().min().expect("non-empty"),
            members: sorted
                .iter()
                .map(|s| (s.id, Provenance::SimSort { class_index }, s.score))
                .collect(),
        });
    }

    sequences.sort_by(|a, b| {
        b.max_susp
            .total_cmp(&a.max_susp)
            .then_with(|| match (a.is_w, b.is_w) {
                (true, false) => Ordering::Less,
                (false, true) => Ordering::Greater,
                _ => Ordering::Equal,
            })
            .then(a.min_id.cmp(&b.min_id))
    });

    let entries = sequences
        .into_iter()
        .flat_map(|s| s.members)
        .enumerate()
        .map(|(i, (patch, provenance, score))| RankedEntry {
            position: i + 1,
            patch,
            provenance,
            score,
        })
        .collect();
    Ok(RankedList { entries })
}

/// Full pipeline over a snapshot store.
pub fn rank_patches(
    patches: &[PatchRecord],
    outcomes: &Outcomes,
    store: &dyn SnapshotStore,
    exec: &Execution,
) -> Result<RankedList, RankingError> {
    exec.run(|| {
        let signed = patches
            .iter()
            .map(|p| {
                let original = store.counts(p.id, Version::Original);
                let patched = store.counts(p.id, Version::Patched);
                let (signature, mismatch) = coverage_signature(&original, &patched)?;
                Ok(SignedPatch {
                    id: p.id,
                    signature,
                    mismatch,
                })
            })
            .collect::<Result<Vec<_>, RankingError>>()?;
        let partition = partition(&signed);

        let mut sorted_classes = Vec::with_capacity(partition.classes.len());
        for class in &partition.classes {
            let d = build_distance_matrix(class, store, exec)?;
            sorted_classes.push(simsort(&d, outcomes));
        }
        let index: BTreeMap<PatchId, PatchRecord> = patches.iter().map(|p| (p.id, p.clone())).collect();
        final_ranking(&partition, &sorted_classes, &index)
    })
}
