//! Similarity-based prioritization of plausible program-repair patches.
//!
//! Patches are compared by the object graphs reachable from the patched
//! method's parameters at each of its exits, recorded once for the original
//! program and once with the patch applied. Patches whose states stay close
//! to the original on passing tests, and move away from it on failing tests,
//! are ranked first.
//!
//! Modules, bottom up:
//! - [`objgraph`]: snapshot data model and the canonical file codec;
//! - [`distance`]: structural distance between graphs;
//! - [`ranking`]: partitioning, per-class similarity sort, final order;
//! - [`corpus`]: loading patch lists, manifests and snapshot files;
//! - [`synthgen`]: seeded synthetic corpora with a planted best patch;
//! - [`report`]: the ranked output files.

pub mod cli;
pub mod corpus;
pub mod distance;
pub mod exec;
pub mod objgraph;
pub mod ranking;
pub mod report;
pub mod synthgen;

pub use corpus::{load_corpus, validate_corpus, Corpus, CorpusConfig, CorpusError};
pub use distance::{ExtendedDistance, ExtendedRational};
pub use exec::Execution;
pub use ranking::{rank_patches, PatchId, RankedList};

/// Loads a corpus and ranks its patches.
pub fn rank_corpus(config: &CorpusConfig, exec: &Execution) -> Result<(Corpus, RankedList), Error> {
    let corpus = load_corpus(config, exec)?;
    let ranked = rank_patches(&corpus.patches, &corpus.outcomes, &corpus, exec)?;
    Ok((corpus, ranked))
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Ranking(#[from] ranking::RankingError),
}
