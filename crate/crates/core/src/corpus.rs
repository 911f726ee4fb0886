//! On-disk corpus: patch CSV, failing-test list, manifest, snapshot files.
//!
//! ```text
//! <root>/input-file.csv
//! <root>/manifest.json
//! <root>/failing-tests.txt          (optional; one test name per line)
//! <root>/snapshots/p<ID>/{original,patched}/<k>.snap
//! ```
//!
//! Snapshot filenames are opaque; the manifest maps each (patch, test) to
//! the two files recorded for it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::objgraph::{decode_snapshot_document_with_budget, Snapshot, SnapshotDocument, SnapshotError, DEFAULT_NODE_BUDGET};
use crate::ranking::{Outcomes, PatchId, PatchRecord, SnapshotStore, Version};

pub const INPUT_CSV: &str = "input-file.csv";
pub const MANIFEST: &str = "manifest.json";
pub const FAILING_TESTS: &str = "failing-tests.txt";

const CSV_HEADER: [&str; 5] = ["Id", "Susp", "Method", "Class-File", "Covering-Tests"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus directory {0} does not exist")]
    MissingCorpus(PathBuf),
    #[error("missing patch list {0}")]
    MissingInputCsv(PathBuf),
    #[error("missing manifest {0}")]
    MissingManifest(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {detail}")]
    MalformedRow { line: u64, detail: String },
    #[error("line {line}: duplicate patch id {id}")]
    DuplicatePatchId { line: u64, id: u64 },
    #[error("line {line}: invalid suspiciousness {value:?} (must be a number in [0, 1])")]
    InvalidSusp { line: u64, value: String },
    #[error("line {line}: invalid test name {name:?} (expected ClassName.MethodName)")]
    InvalidTestName { line: u64, name: String },
    #[error("manifest {path}: {detail}")]
    MalformedManifest { path: PathBuf, detail: String },
    #[error("manifest: patch {patch}: {detail}")]
    ManifestMismatch { patch: u64, detail: String },
    #[error("patch {patch}, test {test}: missing snapshot file {}", path.display())]
    MissingSnapshotFile { patch: PatchId, test: String, path: PathBuf },
    #[error("patch {patch}, test {test}, file {}: {source}", path.display())]
    Snapshot {
        patch: PatchId,
        test: String,
        path: PathBuf,
        #[source]
        source: SnapshotError,
    },
    #[error("patch {patch}, test {test}, file {}: {detail}", path.display())]
    DocumentMismatch {
        patch: PatchId,
        test: String,
        path: PathBuf,
        detail: String,
    },
    #[error("no failing tests configured")]
    NoFailingTests,
}

fn read_file(path: &Path) -> Result<Vec<u8>, CorpusError> {
    fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })
}

/// True for `ClassName.MethodName` shaped names: at least one dot with text
/// on both sides of the last one, and no whitespace.
pub fn is_valid_test_name(name: &str) -> bool {
    !name.chars().any(char::is_whitespace)
        && name
            .rsplit_once('.')
            .is_some_and(|(class, method)| !class.is_empty() && !method.is_empty())
}

fn parse_row(line: u64, record: &csv::StringRecord) -> Result<PatchRecord, CorpusError> {
    if record.len() != CSV_HEADER.len() {
        return Err(CorpusError::MalformedRow {
            line,
            detail: format!("expected {} columns, found {}", CSV_HEADER.len(), record.len()),
        });
    }
    let id = match record[0].parse::<u64>() {
        Ok(id) if id > 0 => id,
        _ => {
            return Err(CorpusError::MalformedRow {
                line,
                detail: format!("invalid patch id {:?}", &record[0]),
            })
        }
    };
    let susp = match record[1].parse::<f64>() {
        Ok(s) if (0.0..=1.0).contains(&s) => s,
        _ => {
            return Err(CorpusError::InvalidSusp {
                line,
                value: record[1].to_owned(),
            })
        }
    };
    let mut covering_tests: Vec<String> = Vec::new();
    for name in record[4].split(' ') {
        if !is_valid_test_name(name) {
            return Err(CorpusError::InvalidTestName {
                line,
                name: name.to_owned(),
            });
        }
        if !covering_tests.iter().any(|t| t == name) {
            covering_tests.push(name.to_owned());
        }
    }
    Ok(PatchRecord {
        id: PatchId(id),
        susp,
        method: record[2].to_owned(),
        class_artifact: record[3].to_owned(),
        covering_tests,
    })
}

/// Parses every row, returning the records that parsed and an error for
/// each row that did not.
fn parse_patch_rows(bytes: &[u8]) -> (Vec<PatchRecord>, Vec<CorpusError>) {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records: Vec<PatchRecord> = Vec::new();
    let mut errors = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in reader.records().enumerate() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map_or(i as u64 + 1, |p| p.line());
                errors.push(CorpusError::MalformedRow {
                    line,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && row.iter().eq(CSV_HEADER) {
            continue;
        }
        match parse_row(line, &row) {
            Ok(rec) if !seen.insert(rec.id) => errors.push(CorpusError::DuplicatePatchId { line, id: rec.id.0 }),
            Ok(rec) => records.push(rec),
            Err(e) => errors.push(e),
        }
    }
    (records, errors)
}

/// Parses the patch CSV (`Id,Susp,Method,Class-File,Covering-Tests`, header
/// optional). Covering tests are separated by single spaces.
pub fn parse_patch_csv(bytes: &[u8]) -> Result<Vec<PatchRecord>, CorpusError> {
    let (records, mut errors) = parse_patch_rows(bytes);
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(errors.swap_remove(0))
    }
}

/// Parses a failing-tests list: one name per line, blank lines ignored.
pub fn parse_failing_tests(text: &str) -> Result<Vec<String>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let name = line.trim();
        if name.is_empty() {
            continue;
        }
        if !is_valid_test_name(name) {
            return Err(CorpusError::InvalidTestName {
                line: i as u64 + 1,
                name: name.to_owned(),
            });
        }
        out.push(name.to_owned());
    }
    Ok(out)
}

pub fn read_failing_tests(path: &Path) -> Result<Vec<String>, CorpusError> {
    let bytes = read_file(path)?;
    parse_failing_tests(&String::from_utf8_lossy(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotPair {
    pub original: String,
    pub patched: String,
}

impl SnapshotPair {
    pub fn path(&self, version: Version) -> &str {
        match version {
            Version::Original => &self.original,
            Version::Patched => &self.patched,
        }
    }
}

/// Maps patch id → test name → snapshot files, relative to the corpus root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub patches: BTreeMap<u64, BTreeMap<String, SnapshotPair>>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialization cannot fail");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub corpus_root: PathBuf,
    pub failing_tests: Vec<String>,
    pub node_budget: usize,
}

impl CorpusConfig {
    pub fn new(corpus_root: impl Into<PathBuf>, failing_tests: Vec<String>) -> Self {
        Self {
            corpus_root: corpus_root.into(),
            failing_tests,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    /// Reads failing tests from `failing-tests.txt` under the corpus root.
    pub fn from_root(corpus_root: impl Into<PathBuf>) -> Result<Self, CorpusError> {
        let root = corpus_root.into();
        let failing = read_failing_tests(&root.join(FAILING_TESTS))?;
        Ok(Self::new(root, failing))
    }
}

/// A fully decoded and validated corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub patches: Vec<PatchRecord>,
    pub outcomes: Outcomes,
    /// Canonical test order: sorted union of covering and failing tests.
    pub tests: Vec<String>,
    pub warnings: Vec<String>,
    documents: HashMap<(PatchId, Version), BTreeMap<String, SnapshotDocument>>,
}

impl Corpus {
    pub fn document(&self, patch: PatchId, test: &str, version: Version) -> Option<&SnapshotDocument> {
        self.documents.get(&(patch, version))?.get(test)
    }

    pub fn snapshot_counts(&self, patch: PatchId, version: Version) -> Vec<usize> {
        self.counts(patch, version)
    }
}

impl SnapshotStore for Corpus {
    fn tests(&self) -> &[String] {
        &self.tests
    }

    fn snapshots(&self, patch: PatchId, test: &str, version: Version) -> Option<&[Snapshot]> {
        self.document(patch, test, version).map(|d| d.snapshots.as_slice())
    }
}

struct FileJob<'a> {
    patch: &'a PatchRecord,
    test: &'a str,
    version: Version,
    rel: &'a str,
}

/// Reads and checks everything, collecting every problem found. Returns the
/// corpus only if there were no errors.
fn scan(config: &CorpusConfig, exec: &Execution) -> (Option<Corpus>, Vec<CorpusError>) {
    let root = &config.corpus_root;
    let mut errors = Vec::new();
    if !root.is_dir() {
        return (None, vec![CorpusError::MissingCorpus(root.clone())]);
    }

    let csv_path = root.join(INPUT_CSV);
    let patches = if csv_path.is_file() {
        match read_file(&csv_path) {
            Ok(bytes) => {
                let (records, row_errors) = parse_patch_rows(&bytes);
                errors.extend(row_errors);
                records
            }
            Err(e) => {
                errors.push(e);
                Vec::new()
            }
        }
    } else {
        errors.push(CorpusError::MissingInputCsv(csv_path));
        Vec::new()
    };

    let manifest_path = root.join(MANIFEST);
    let manifest = if manifest_path.is_file() {
        read_file(&manifest_path).and_then(|bytes| {
            serde_json::from_slice::<Manifest>(&bytes).map_err(|e| CorpusError::MalformedManifest {
                path: manifest_path.clone(),
                detail: e.to_string(),
            })
        })
    } else {
        Err(CorpusError::MissingManifest(manifest_path))
    };
    let manifest = match manifest {
        Ok(m) => m,
        Err(e) => {
            errors.push(e);
            return (None, errors);
        }
    };

    let mut jobs = Vec::new();
    for patch in &patches {
        let Some(entries) = manifest.patches.get(&patch.id.0) else {
            errors.push(CorpusError::ManifestMismatch {
                patch: patch.id.0,
                detail: "no manifest entry".into(),
            });
            continue;
        };
        let covering: BTreeSet<&str> = patch.covering_tests.iter().map(String::as_str).collect();
        let mapped: BTreeSet<&str> = entries.keys().map(String::as_str).collect();
        if covering != mapped {
            let missing: Vec<_> = covering.difference(&mapped).copied().collect();
            let extra: Vec<_> = mapped.difference(&covering).copied().collect();
            errors.push(CorpusError::ManifestMismatch {
                patch: patch.id.0,
                detail: format!("tests differ from covering tests (unmapped: {missing:?}, not covering: {extra:?})"),
            });
            continue;
        }
        for test in &patch.covering_tests {
            let pair = &entries[test];
            for version in [Version::Original, Version::Patched] {
                jobs.push(FileJob {
                    patch,
                    test,
                    version,
                    rel: pair.path(version),
                });
            }
        }
    }
    let listed: BTreeSet<u64> = patches.iter().map(|p| p.id.0).collect();
    for id in manifest.patches.keys().filter(|id| !listed.contains(id)) {
        errors.push(CorpusError::ManifestMismatch {
            patch: *id,
            detail: format!("not listed in {INPUT_CSV}"),
        });
    }

    let decoded = exec.run(|| {
        exec.map(&jobs, |job| {
            let path = root.join(job.rel);
            if !path.is_file() {
                return Err(CorpusError::MissingSnapshotFile {
                    patch: job.patch.id,
                    test: job.test.to_owned(),
                    path,
                });
            }
            let bytes = read_file(&path)?;
            let doc = decode_snapshot_document_with_budget(&bytes, config.node_budget).map_err(|source| {
                CorpusError::Snapshot {
                    patch: job.patch.id,
                    test: job.test.to_owned(),
                    path: path.clone(),
                    source,
                }
            })?;
            let mismatch = |detail: String| CorpusError::DocumentMismatch {
                patch: job.patch.id,
                test: job.test.to_owned(),
                path: path.clone(),
                detail,
            };
            if doc.test_name != job.test {
                return Err(mismatch(format!("document is for test {:?}", doc.test_name)));
            }
            if doc.method_name != job.patch.method {
                return Err(mismatch(format!(
                    "document is for method {:?}, patch targets {:?}",
                    doc.method_name, job.patch.method
                )));
            }
            Ok(doc)
        })
    });

    let mut documents: HashMap<(PatchId, Version), BTreeMap<String, SnapshotDocument>> = HashMap::new();
    for (job, result) in jobs.iter().zip(decoded) {
        match result {
            Ok(doc) => {
                documents
                    .entry((job.patch.id, job.version))
                    .or_default()
                    .insert(job.test.to_owned(), doc);
            }
            Err(e) => errors.push(e),
        }
    }

    let covered: BTreeSet<&String> = patches.iter().flat_map(|p| &p.covering_tests).collect();
    let mut warnings = Vec::new();
    for t in &config.failing_tests {
        if !covered.contains(t) {
            warnings.push(format!("failing test {t} does not cover any patch"));
        }
    }
    let tests: Vec<String> = covered
        .into_iter()
        .chain(&config.failing_tests)
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    if !errors.is_empty() {
        return (None, errors);
    }
    let corpus = Corpus {
        root: root.clone(),
        patches,
        outcomes: Outcomes::new(config.failing_tests.iter().cloned()),
        tests,
        warnings,
        documents,
    };
    (Some(corpus), errors)
}

/// Loads the corpus, failing on the first problem found.
pub fn load_corpus(config: &CorpusConfig, exec: &Execution) -> Result<Corpus, CorpusError> {
    if config.failing_tests.is_empty() {
        return Err(CorpusError::NoFailingTests);
    }
    match scan(config, exec) {
        (Some(corpus), _) => Ok(corpus),
        (None, mut errors) => Err(errors.swap_remove(0)),
    }
}

/// Checks every part of the corpus and reports all problems. Failing tests
/// are read from `failing-tests.txt` when present.
pub fn validate_corpus(root: &Path, node_budget: usize, exec: &Execution) -> Vec<CorpusError> {
    let failing_path = root.join(FAILING_TESTS);
    let mut errors = Vec::new();
    let failing = if failing_path.is_file() {
        read_failing_tests(&failing_path).unwrap_or_else(|e| {
            errors.push(e);
            Vec::new()
        })
    } else {
        Vec::new()
    };
    let config = CorpusConfig {
        corpus_root: root.to_owned(),
        failing_tests: failing,
        node_budget,
    };
    errors.extend(scan(&config, exec).1);
    errors
}
