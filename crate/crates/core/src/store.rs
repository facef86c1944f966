//! On-disk index format.
//!
//! An index directory holds plain text files, each sorted canonically so
//! equal bundles serialize to identical bytes:
//!
//! | file              | content                                                     |
//! |-------------------|-------------------------------------------------------------|
//! | `manifest.json`   | format version, dictionary checksum, weights, stats, counts |
//! | `concepts.txt`    | `index id` per line                                         |
//! | `matrix.txt`      | `row col score` per line, by (row, col)                     |
//! | `evidence.txt`    | `idA idB doc_id year source_kind [subject_id]`              |
//! | `documents.jsonl` | publication metadata per document, by doc id                |
//!
//! The dictionary the index was built from is copied alongside as
//! `dictionary.jsonl` so that an index directory is self-contained.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cooc::{
    BuildOutput, BuildStats, ConceptIndexMap, CooccurrenceMatrix, DocumentMeta, EdgeEvidence,
    EdgeKey, Posting, WeightConfig,
};
use crate::extract::SourceKind;
use crate::ontology::{ConceptId, Dictionary};

pub const FORMAT_VERSION: u32 = 1;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONCEPTS_FILE: &str = "concepts.txt";
pub const MATRIX_FILE: &str = "matrix.txt";
pub const EVIDENCE_FILE: &str = "evidence.txt";
pub const DOCUMENTS_FILE: &str = "documents.jsonl";
pub const DICTIONARY_FILE: &str = "dictionary.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("i/o failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("unsupported index format version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("corrupt {name} file: {reason}")]
    CorruptFile { name: &'static str, reason: String },
    #[error("missing {0} file")]
    MissingFile(&'static str),
    #[error("indexes cannot be merged: {0}")]
    IncompatibleIndexes(String),
}

/// A complete, self-describing index.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexBundle {
    pub format_version: u32,
    pub dictionary_checksum: String,
    pub weight_config: WeightConfig,
    pub fmap: ConceptIndexMap,
    pub matrix: CooccurrenceMatrix,
    pub evidence: EdgeEvidence,
    pub documents: BTreeMap<String, DocumentMeta>,
    pub build_stats: BuildStats,
}

impl IndexBundle {
    pub fn from_build(build: BuildOutput, dict: &Dictionary, cfg: WeightConfig) -> Self {
        IndexBundle {
            format_version: FORMAT_VERSION,
            dictionary_checksum: dict.checksum().to_string(),
            weight_config: cfg,
            fmap: build.fmap,
            matrix: build.matrix,
            evidence: build.evidence,
            documents: build.documents,
            build_stats: build.stats,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    dictionary_checksum: String,
    weight_config: WeightConfig,
    build_stats: BuildStats,
    concepts: usize,
    matrix_entries: usize,
    evidence_postings: usize,
    documents: usize,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

/// Writes the bundle's files into `dir`, creating it if needed.
pub fn save_index(bundle: &IndexBundle, dir: impl AsRef<Path>) -> Result<(), StoreError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| StoreError::IoFailure {
        path: dir.to_path_buf(),
        source,
    })?;

    let manifest = Manifest {
        format_version: bundle.format_version,
        dictionary_checksum: bundle.dictionary_checksum.clone(),
        weight_config: bundle.weight_config,
        build_stats: bundle.build_stats,
        concepts: bundle.fmap.len(),
        matrix_entries: bundle.matrix.len(),
        evidence_postings: bundle.evidence.posting_count(),
        documents: bundle.documents.len(),
    };
    let mut manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_text.push('\n');
    write_file(dir, MANIFEST_FILE, &manifest_text)?;

    let mut concepts = String::new();
    for (i, id) in bundle.fmap.ids().iter().enumerate() {
        writeln!(concepts, "{} {}", i + 1, id).unwrap();
    }
    write_file(dir, CONCEPTS_FILE, &concepts)?;

    let mut matrix = String::new();
    for ((row, col), score) in bundle.matrix.iter() {
        writeln!(matrix, "{row} {col} {score}").unwrap();
    }
    write_file(dir, MATRIX_FILE, &matrix)?;

    let mut evidence = String::new();
    for (key, postings) in bundle.evidence.edges() {
        let mut postings: Vec<&Posting> = postings.collect();
        postings.sort_by(|a, b| {
            b.pub_year
                .cmp(&a.pub_year)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        for p in postings {
            write!(
                evidence,
                "{} {} {} {} {}",
                key.low(),
                key.high(),
                p.doc_id,
                p.pub_year,
                p.source_kind
            )
            .unwrap();
            if let Some(subject) = &p.subject_concept {
                write!(evidence, " {subject}").unwrap();
            }
            evidence.push('\n');
        }
    }
    write_file(dir, EVIDENCE_FILE, &evidence)?;

    let mut documents = String::new();
    for meta in bundle.documents.values() {
        documents.push_str(&serde_json::to_string(meta).expect("document meta serializes"));
        documents.push('\n');
    }
    write_file(dir, DOCUMENTS_FILE, &documents)
}

/// Reads and validates an index directory.
pub fn load_index(dir: impl AsRef<Path>) -> Result<IndexBundle, StoreError> {
    let dir = dir.as_ref();
    let manifest_text = read_file(dir, MANIFEST_FILE)?;
    let probe: VersionProbe =
        serde_json::from_str(&manifest_text).map_err(|e| corrupt(MANIFEST_FILE, e))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(StoreError::VersionMismatch {
            found: probe.format_version,
        });
    }
    let manifest: Manifest =
        serde_json::from_str(&manifest_text).map_err(|e| corrupt(MANIFEST_FILE, e))?;
    manifest
        .weight_config
        .validate()
        .map_err(|e| corrupt(MANIFEST_FILE, e))?;

    let fmap = parse_concepts(&read_file(dir, CONCEPTS_FILE)?)?;
    check_count(CONCEPTS_FILE, manifest.concepts, fmap.len())?;

    let matrix = parse_matrix(&read_file(dir, MATRIX_FILE)?, &fmap)?;
    check_count(MATRIX_FILE, manifest.matrix_entries, matrix.len())?;

    let evidence = parse_evidence(&read_file(dir, EVIDENCE_FILE)?, &fmap)?;
    check_count(
        EVIDENCE_FILE,
        manifest.evidence_postings,
        evidence.posting_count(),
    )?;

    let documents = parse_documents(&read_file(dir, DOCUMENTS_FILE)?)?;
    check_count(DOCUMENTS_FILE, manifest.documents, documents.len())?;

    Ok(IndexBundle {
        format_version: manifest.format_version,
        dictionary_checksum: manifest.dictionary_checksum,
        weight_config: manifest.weight_config,
        fmap,
        matrix,
        evidence,
        documents,
        build_stats: manifest.build_stats,
    })
}

/// Combines an index with one built from a further batch of documents.
///
/// Matrices add entrywise, evidence postings union by doc id and document
/// counters add up; the edge count is recomputed from the merged evidence.
/// The two batches must not share a document.
pub fn merge_incremental(
    base: &IndexBundle,
    delta: &IndexBundle,
) -> Result<IndexBundle, StoreError> {
    if base.dictionary_checksum != delta.dictionary_checksum {
        return Err(StoreError::IncompatibleIndexes(
            "dictionary checksums differ".into(),
        ));
    }
    if base.weight_config != delta.weight_config {
        return Err(StoreError::IncompatibleIndexes(
            "weight configs differ".into(),
        ));
    }
    if base.fmap != delta.fmap {
        return Err(StoreError::IncompatibleIndexes(
            "concept index maps differ".into(),
        ));
    }
    if let Some(doc_id) = delta
        .documents
        .keys()
        .find(|id| base.documents.contains_key(*id))
    {
        return Err(StoreError::IncompatibleIndexes(format!(
            "document {doc_id} occurs in both indexes"
        )));
    }
    let mut merged = base.clone();
    merged.matrix.merge(&delta.matrix);
    merged.evidence.merge(&delta.evidence);
    for (doc_id, meta) in &delta.documents {
        merged
            .documents
            .entry(doc_id.clone())
            .or_insert_with(|| meta.clone());
    }
    let (a, b) = (&base.build_stats, &delta.build_stats);
    merged.build_stats = BuildStats {
        documents_processed: a.documents_processed + b.documents_processed,
        documents_skipped: a.documents_skipped + b.documents_skipped,
        matched_spans: a.matched_spans + b.matched_spans,
        distinct_edges: merged.evidence.edge_count() as u64,
    };
    Ok(merged)
}

/// Copies the source dictionary into an index directory.
pub fn copy_dictionary(source: impl AsRef<Path>, dir: impl AsRef<Path>) -> Result<(), StoreError> {
    let target = dir.as_ref().join(DICTIONARY_FILE);
    fs::copy(source.as_ref(), &target)
        .map(|_| ())
        .map_err(|source| StoreError::IoFailure {
            path: target,
            source,
        })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), StoreError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| StoreError::IoFailure { path, source })
}

fn read_file(dir: &Path, name: &'static str) -> Result<String, StoreError> {
    let path = dir.join(name);
    match fs::read(&path) {
        Ok(bytes) => {
            let text = String::from_utf8(bytes).map_err(|e| corrupt(name, e))?;
            if !text.is_empty() && !text.ends_with('\n') {
                return Err(corrupt(name, "truncated: missing final newline"));
            }
            Ok(text)
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::MissingFile(name)),
        Err(source) => Err(StoreError::IoFailure { path, source }),
    }
}

fn corrupt(name: &'static str, reason: impl ToString) -> StoreError {
    StoreError::CorruptFile {
        name: logical_name(name),
        reason: reason.to_string(),
    }
}

/// File name without extension, as reported in errors.
fn logical_name(file: &'static str) -> &'static str {
    match file {
        MANIFEST_FILE => "manifest",
        CONCEPTS_FILE => "concepts",
        MATRIX_FILE => "matrix",
        EVIDENCE_FILE => "evidence",
        DOCUMENTS_FILE => "documents",
        other => other,
    }
}

fn check_count(name: &'static str, expected: usize, found: usize) -> Result<(), StoreError> {
    if expected != found {
        return Err(corrupt(
            name,
            format!("manifest declares {expected} records, found {found}"),
        ));
    }
    Ok(())
}

fn parse_concepts(text: &str) -> Result<ConceptIndexMap, StoreError> {
    let mut ids = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let bad = |reason: &str| corrupt(CONCEPTS_FILE, format!("line {}: {reason}", n + 1));
        let (index, id) = line
            .split_once(' ')
            .ok_or_else(|| bad("expected `index id`"))?;
        if index.parse::<usize>().ok() != Some(n + 1) {
            return Err(bad("indices must run 1..=n"));
        }
        ids.push(ConceptId::new(id).map_err(|e| bad(&e.to_string()))?);
    }
    ConceptIndexMap::from_sorted_ids(ids)
        .ok_or_else(|| corrupt(CONCEPTS_FILE, "ids not strictly ascending"))
}

fn parse_matrix(text: &str, fmap: &ConceptIndexMap) -> Result<CooccurrenceMatrix, StoreError> {
    let mut matrix = CooccurrenceMatrix::new();
    let mut previous = None;
    let limit = fmap.len() as u32;
    for (n, line) in text.lines().enumerate() {
        let bad = |reason: &str| corrupt(MATRIX_FILE, format!("line {}: {reason}", n + 1));
        let fields: Vec<&str> = line.split(' ').collect();
        let [row, col, score] = fields.as_slice() else {
            return Err(bad("expected `row col score`"));
        };
        let row: u32 = row.parse().map_err(|_| bad("bad row"))?;
        let col: u32 = col.parse().map_err(|_| bad("bad col"))?;
        let score: f64 = score.parse().map_err(|_| bad("bad score"))?;
        if !(1..=limit).contains(&row) || !(1..=limit).contains(&col) {
            return Err(bad("index out of range"));
        }
        if !score.is_finite() || score <= 0.0 {
            return Err(bad("scores must be positive and finite"));
        }
        if previous.is_some_and(|p| p >= (row, col)) {
            return Err(bad("entries out of order"));
        }
        previous = Some((row, col));
        matrix.add(row, col, score);
    }
    Ok(matrix)
}

fn parse_evidence(text: &str, fmap: &ConceptIndexMap) -> Result<EdgeEvidence, StoreError> {
    let mut evidence = EdgeEvidence::new();
    let mut count = 0;
    for (n, line) in text.lines().enumerate() {
        let bad = |reason: &str| corrupt(EVIDENCE_FILE, format!("line {}: {reason}", n + 1));
        let fields: Vec<&str> = line.split(' ').collect();
        if !(5..=6).contains(&fields.len()) {
            return Err(bad(
                "expected `idA idB doc_id year source_kind [subject_id]`",
            ));
        }
        let concept = |s: &str| -> Result<ConceptId, StoreError> {
            let id = ConceptId::new(s).map_err(|e| bad(&e.to_string()))?;
            fmap.index(&id)
                .ok_or_else(|| bad(&format!("unknown concept {id}")))?;
            Ok(id)
        };
        let (a, b) = (concept(fields[0])?, concept(fields[1])?);
        if a >= b {
            return Err(bad("pair must be ordered idA < idB"));
        }
        let source_kind: SourceKind = fields[4].parse().map_err(|e: String| bad(&e))?;
        let subject_concept = fields.get(5).map(|s| concept(s)).transpose()?;
        if (source_kind == SourceKind::Encyclopedia) != subject_concept.is_some() {
            return Err(bad("subject id present iff source kind is encyclopedia"));
        }
        let posting = Posting {
            doc_id: fields[2].to_string(),
            pub_year: fields[3].parse().map_err(|_| bad("bad year"))?,
            source_kind,
            subject_concept,
        };
        evidence.insert(EdgeKey::new(a, b).expect("ordered pair"), posting);
        count += 1;
        if evidence.posting_count() != count {
            return Err(bad("document listed twice for the same pair"));
        }
    }
    Ok(evidence)
}

fn parse_documents(text: &str) -> Result<BTreeMap<String, DocumentMeta>, StoreError> {
    let mut documents = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let meta: DocumentMeta = serde_json::from_str(line)
            .map_err(|e| corrupt(DOCUMENTS_FILE, format!("line {}: {e}", n + 1)))?;
        if documents.insert(meta.doc_id.clone(), meta).is_some() {
            return Err(corrupt(
                DOCUMENTS_FILE,
                format!("line {}: duplicate doc id", n + 1),
            ));
        }
    }
    Ok(documents)
}
