//! Co-occurrence operator and index construction.
//!
//! For every document, the six ordered zone-pair sets TT, TA, TF, AA, AF and
//! FF are computed with [`cooccur`], and each tuple `(p, q, z)` adds `w * z`
//! to `C(f(p), f(q))`. Accumulation is asymmetric (there is no A∘T set);
//! [`relatedness`] reads both directions.
//!
//! Alongside the matrix, [`EdgeEvidence`] records which documents mention
//! both concepts of a pair anywhere, independent of zone weighting.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::extract::{
    extract_document, DocumentRecord, PubDate, SourceKind, TermMultiset, ZoneExtraction,
};
use crate::ontology::{ConceptId, Dictionary};

#[derive(Debug, thiserror::Error)]
pub enum CoocError {
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("invalid weight config: {0}")]
    InvalidConfig(String),
    #[error("failed to read weight config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Weight function applied to the occurrence counts of `p` in `P` and `q`
/// in `Q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZKind {
    #[default]
    Unit,
    Product,
    Min,
}

impl ZKind {
    pub fn eval(self, p_count: u32, q_count: u32) -> f64 {
        match self {
            ZKind::Unit => 1.0,
            ZKind::Product => f64::from(p_count) * f64::from(q_count),
            ZKind::Min => f64::from(p_count.min(q_count)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ZonePair {
    TT,
    TA,
    TF,
    AA,
    AF,
    FF,
}

impl ZonePair {
    pub const ALL: [ZonePair; 6] = [
        ZonePair::TT,
        ZonePair::TA,
        ZonePair::TF,
        ZonePair::AA,
        ZonePair::AF,
        ZonePair::FF,
    ];

    /// The (left, right) multisets of this pair within a document.
    pub fn operands(self, zones: &ZoneExtraction) -> (&TermMultiset, &TermMultiset) {
        let (t, a, f) = (
            &zones.title_terms,
            &zones.abstract_terms,
            &zones.fulltext_terms,
        );
        match self {
            ZonePair::TT => (t, t),
            ZonePair::TA => (t, a),
            ZonePair::TF => (t, f),
            ZonePair::AA => (a, a),
            ZonePair::AF => (a, f),
            ZonePair::FF => (f, f),
        }
    }
}

/// Per zone-pair weight coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneWeights {
    #[serde(rename = "TT")]
    pub tt: f64,
    #[serde(rename = "TA")]
    pub ta: f64,
    #[serde(rename = "TF")]
    pub tf: f64,
    #[serde(rename = "AA")]
    pub aa: f64,
    #[serde(rename = "AF")]
    pub af: f64,
    #[serde(rename = "FF")]
    pub ff: f64,
}

impl ZoneWeights {
    pub fn get(&self, pair: ZonePair) -> f64 {
        match pair {
            ZonePair::TT => self.tt,
            ZonePair::TA => self.ta,
            ZonePair::TF => self.tf,
            ZonePair::AA => self.aa,
            ZonePair::AF => self.af,
            ZonePair::FF => self.ff,
        }
    }
}

impl Default for ZoneWeights {
    fn default() -> Self {
        ZoneWeights {
            tt: 8.0,
            ta: 4.0,
            tf: 2.0,
            aa: 2.0,
            af: 1.0,
            ff: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub z_kind: ZKind,
    pub w: ZoneWeights,
}

impl WeightConfig {
    pub fn from_json(text: &str) -> Result<Self, CoocError> {
        let cfg: WeightConfig =
            serde_json::from_str(text).map_err(|e| CoocError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CoocError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CoocError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CoocError> {
        let weights = ZonePair::ALL.map(|p| self.w.get(p));
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CoocError::InvalidConfig(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(CoocError::InvalidConfig(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The co-occurrence operator: every ordered pair from `P' × Q'` with the
/// weight function applied to the two occurrence counts.
pub fn cooccur(
    p: &TermMultiset,
    q: &TermMultiset,
    z_kind: ZKind,
) -> Vec<(ConceptId, ConceptId, f64)> {
    let mut out = Vec::with_capacity(p.len() * q.len());
    for (a, a_count) in p.iter() {
        for (b, b_count) in q.iter() {
            out.push((a.clone(), b.clone(), z_kind.eval(a_count, b_count)));
        }
    }
    out
}

/// Bijection between concept ids and matrix indices `1..=|M|`, assigned in
/// ascending id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptIndexMap {
    forward: HashMap<ConceptId, u32>,
    reverse: Vec<ConceptId>,
}

impl ConceptIndexMap {
    pub fn from_dictionary(dict: &Dictionary) -> Self {
        Self::from_sorted_ids(dict.concepts().map(|c| c.id.clone()).collect())
            .expect("dictionary ids are sorted and unique")
    }

    /// Accepts ids already in strictly ascending order.
    pub fn from_sorted_ids(ids: Vec<ConceptId>) -> Option<Self> {
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        let forward = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32 + 1))
            .collect();
        Some(ConceptIndexMap {
            forward,
            reverse: ids,
        })
    }

    pub fn index(&self, id: &ConceptId) -> Option<u32> {
        self.forward.get(id).copied()
    }

    pub fn concept(&self, index: u32) -> Option<&ConceptId> {
        index
            .checked_sub(1)
            .and_then(|i| self.reverse.get(i as usize))
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    /// Ids in index order (index `i + 1` for position `i`).
    pub fn ids(&self) -> &[ConceptId] {
        &self.reverse
    }
}

/// Sparse `|M| × |M|` score matrix. Never stores zeros.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CooccurrenceMatrix {
    entries: BTreeMap<(u32, u32), f64>,
}

impl CooccurrenceMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, row: u32, col: u32, amount: f64) {
        if amount != 0.0 {
            *self.entries.entry((row, col)).or_insert(0.0) += amount;
        }
    }

    pub fn get(&self, row: u32, col: u32) -> f64 {
        self.entries.get(&(row, col)).copied().unwrap_or(0.0)
    }

    /// Entries in (row, col) order.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn merge(&mut self, other: &CooccurrenceMatrix) {
        for (&(r, c), &v) in &other.entries {
            self.add(r, c, v);
        }
    }
}

/// Unordered concept pair, stored with the smaller id first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    low: ConceptId,
    high: ConceptId,
}

impl EdgeKey {
    /// `None` when both ends are the same concept.
    pub fn new(a: ConceptId, b: ConceptId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(EdgeKey { low: a, high: b }),
            std::cmp::Ordering::Greater => Some(EdgeKey { low: b, high: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn low(&self) -> &ConceptId {
        &self.low
    }

    pub fn high(&self) -> &ConceptId {
        &self.high
    }

    /// The end that is not `id`, if `id` is one of the ends.
    pub fn other(&self, id: &ConceptId) -> Option<&ConceptId> {
        if &self.low == id {
            Some(&self.high)
        } else if &self.high == id {
            Some(&self.low)
        } else {
            None
        }
    }
}

/// One document supporting an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: String,
    pub pub_year: i32,
    pub source_kind: SourceKind,
    pub subject_concept: Option<ConceptId>,
}

/// Edge → supporting documents, keyed by doc id so a document appears at
/// most once per edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeEvidence {
    postings: BTreeMap<EdgeKey, BTreeMap<String, Posting>>,
}

impl EdgeEvidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: EdgeKey, posting: Posting) {
        self.postings
            .entry(key)
            .or_default()
            .entry(posting.doc_id.clone())
            .or_insert(posting);
    }

    pub fn get(&self, key: &EdgeKey) -> Option<impl Iterator<Item = &Posting>> {
        self.postings.get(key).map(|p| p.values())
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeKey, impl Iterator<Item = &Posting>)> {
        self.postings.iter().map(|(k, v)| (k, v.values()))
    }

    /// Edges incident to `id`, with the opposite end.
    pub fn incident<'a>(
        &'a self,
        id: &'a ConceptId,
    ) -> impl Iterator<Item = (&'a ConceptId, impl Iterator<Item = &'a Posting>)> + 'a {
        self.postings
            .iter()
            .filter_map(move |(k, v)| k.other(id).map(|n| (n, v.values())))
    }

    pub fn edge_count(&self) -> usize {
        self.postings.len()
    }

    pub fn posting_count(&self) -> usize {
        self.postings.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.postings.is_empty()
    }

    /// Union by doc id.
    pub fn merge(&mut self, other: &EdgeEvidence) {
        for (key, postings) in &other.postings {
            for posting in postings.values() {
                self.insert(key.clone(), posting.clone());
            }
        }
    }
}

/// What the publication panel needs to know about a document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub doc_id: String,
    pub source_kind: SourceKind,
    pub title: String,
    pub pub_date: PubDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

impl From<&DocumentRecord> for DocumentMeta {
    fn from(doc: &DocumentRecord) -> Self {
        DocumentMeta {
            doc_id: doc.doc_id.clone(),
            source_kind: doc.source_kind,
            title: doc.title.clone(),
            pub_date: doc.pub_date,
            url: doc.url.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub documents_processed: u64,
    pub documents_skipped: u64,
    pub matched_spans: u64,
    pub distinct_edges: u64,
}

/// Adds one document's zone-pair tuples to the matrix and its concept pairs
/// to the evidence.
pub fn accumulate_document(
    zones: &ZoneExtraction,
    cfg: &WeightConfig,
    fmap: &ConceptIndexMap,
    matrix: &mut CooccurrenceMatrix,
    evidence: &mut EdgeEvidence,
    doc: &DocumentRecord,
) -> Result<(), CoocError> {
    let index = |id: &ConceptId| {
        fmap.index(id)
            .ok_or_else(|| CoocError::UnknownConcept(id.clone()))
    };

    for pair in ZonePair::ALL {
        let weight = cfg.w.get(pair);
        let (left, right) = pair.operands(zones);
        for (p, q, z) in cooccur(left, right, cfg.z_kind) {
            matrix.add(index(&p)?, index(&q)?, weight * z);
        }
    }

    let concepts = zones.all_concepts();
    for (i, a) in concepts.iter().enumerate() {
        for b in &concepts[i + 1..] {
            let key = EdgeKey::new((*a).clone(), (*b).clone()).expect("distinct concepts");
            evidence.insert(
                key,
                Posting {
                    doc_id: doc.doc_id.clone(),
                    pub_year: doc.pub_date.year,
                    source_kind: doc.source_kind,
                    subject_concept: doc.subject_concept.clone(),
                },
            );
        }
    }
    Ok(())
}

/// A freshly built index.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildOutput {
    pub fmap: ConceptIndexMap,
    pub matrix: CooccurrenceMatrix,
    pub evidence: EdgeEvidence,
    pub documents: BTreeMap<String, DocumentMeta>,
    pub stats: BuildStats,
}

/// Builds the index over corpus lines (one JSON document per line).
///
/// Blank lines are ignored. Lines that fail to parse or validate, that name
/// an encyclopedia subject missing from the dictionary, or that repeat an
/// earlier doc id are skipped and counted.
pub fn build_index<I, S>(lines: I, dict: &Dictionary, cfg: &WeightConfig) -> BuildOutput
where
    I: IntoIterator<Item = S>,
    S: AsRef<str> + Sync,
{
    let lines: Vec<S> = lines
        .into_iter()
        .filter(|l| !l.as_ref().trim().is_empty())
        .collect();
    let parsed: Vec<Option<(DocumentRecord, ZoneExtraction)>> = lines
        .par_iter()
        .map(|line| {
            let doc = match DocumentRecord::parse_line(line.as_ref()) {
                Ok(doc) => doc,
                Err(e) => {
                    log::warn!("skipping document: {e}");
                    return None;
                }
            };
            if let Some(subject) = &doc.subject_concept {
                if !dict.contains(subject) {
                    log::warn!(
                        "skipping document {}: unknown subject concept {subject}",
                        doc.doc_id
                    );
                    return None;
                }
            }
            let zones = extract_document(&doc, dict);
            Some((doc, zones))
        })
        .collect();

    let mut builder = IndexBuilder::new(dict, *cfg);
    for item in parsed {
        match item {
            Some((doc, zones)) => {
                builder.add_extracted(&doc, &zones);
            }
            None => builder.stats.documents_skipped += 1,
        }
    }
    builder.finish()
}

/// Builds from already-parsed documents, validating each.
pub fn build_from_documents(
    docs: &[DocumentRecord],
    dict: &Dictionary,
    cfg: &WeightConfig,
) -> BuildOutput {
    let mut builder = IndexBuilder::new(dict, *cfg);
    for doc in docs {
        builder.add_document(doc);
    }
    builder.finish()
}

/// Incremental single-threaded builder.
pub struct IndexBuilder<'d> {
    dict: &'d Dictionary,
    cfg: WeightConfig,
    fmap: ConceptIndexMap,
    matrix: CooccurrenceMatrix,
    evidence: EdgeEvidence,
    documents: BTreeMap<String, DocumentMeta>,
    stats: BuildStats,
}

impl<'d> IndexBuilder<'d> {
    pub fn new(dict: &'d Dictionary, cfg: WeightConfig) -> Self {
        IndexBuilder {
            dict,
            cfg,
            fmap: ConceptIndexMap::from_dictionary(dict),
            matrix: CooccurrenceMatrix::new(),
            evidence: EdgeEvidence::new(),
            documents: BTreeMap::new(),
            stats: BuildStats::default(),
        }
    }

    /// Returns false (and counts a skip) for invalid or duplicate documents.
    pub fn add_document(&mut self, doc: &DocumentRecord) -> bool {
        let subject_ok = doc
            .subject_concept
            .as_ref()
            .is_none_or(|s| self.dict.contains(s));
        if doc.validate().is_err() || !subject_ok {
            self.stats.documents_skipped += 1;
            return false;
        }
        let zones = extract_document(doc, self.dict);
        self.add_extracted(doc, &zones)
    }

    fn add_extracted(&mut self, doc: &DocumentRecord, zones: &ZoneExtraction) -> bool {
        if self.documents.contains_key(&doc.doc_id) {
            log::warn!("skipping duplicate document id {}", doc.doc_id);
            self.stats.documents_skipped += 1;
            return false;
        }
        accumulate_document(
            zones,
            &self.cfg,
            &self.fmap,
            &mut self.matrix,
            &mut self.evidence,
            doc,
        )
        .expect("extracted concepts come from the dictionary");
        self.documents
            .insert(doc.doc_id.clone(), DocumentMeta::from(doc));
        self.stats.documents_processed += 1;
        self.stats.matched_spans += zones.matched_spans();
        true
    }

    pub fn finish(mut self) -> BuildOutput {
        self.stats.distinct_edges = self.evidence.edge_count() as u64;
        BuildOutput {
            fmap: self.fmap,
            matrix: self.matrix,
            evidence: self.evidence,
            documents: self.documents,
            stats: self.stats,
        }
    }
}

/// Symmetrized relatedness: `C(a,b) + C(b,a)` for distinct concepts, the
/// diagonal entry otherwise.
pub fn relatedness(
    matrix: &CooccurrenceMatrix,
    fmap: &ConceptIndexMap,
    a: &ConceptId,
    b: &ConceptId,
) -> Result<f64, CoocError> {
    let ia = fmap
        .index(a)
        .ok_or_else(|| CoocError::UnknownConcept(a.clone()))?;
    let ib = fmap
        .index(b)
        .ok_or_else(|| CoocError::UnknownConcept(b.clone()))?;
    if ia == ib {
        Ok(matrix.get(ia, ia))
    } else {
        Ok(matrix.get(ia, ib) + matrix.get(ib, ia))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::ConceptRecord;

    fn id(s: &str) -> ConceptId {
        ConceptId::new(s).unwrap()
    }

    fn multiset(items: &[(&str, u32)]) -> TermMultiset {
        let mut m = TermMultiset::new();
        for (k, n) in items {
            m.add(id(k), *n);
        }
        m
    }

    fn dict() -> Dictionary {
        let records: Vec<ConceptRecord> = [("a", "alpha"), ("b", "beta"), ("c", "gamma")]
            .iter()
            .map(|(i, t)| ConceptRecord {
                id: i.to_string(),
                preferred_term: t.to_string(),
                synonyms: vec![],
                tree_numbers: vec![],
                semantic_types: vec![],
            })
            .collect();
        Dictionary::from_records(&records).unwrap()
    }

    fn doc(doc_id: &str, title: &str, abs: Option<&str>) -> DocumentRecord {
        DocumentRecord {
            doc_id: doc_id.into(),
            source_kind: SourceKind::Research,
            title: title.into(),
            abstract_text: abs.map(String::from),
            full_text: None,
            pub_date: "2010".parse().unwrap(),
            url: None,
            subject_concept: None,
        }
    }

    fn cfg(tt: f64, ta: f64, aa: f64) -> WeightConfig {
        WeightConfig {
            z_kind: ZKind::Unit,
            w: ZoneWeights {
                tt,
                ta,
                tf: 0.0,
                aa,
                af: 0.0,
                ff: 0.0,
            },
        }
    }

    #[test]
    fn cooccur_examples() {
        let got = cooccur(
            &multiset(&[("a", 1)]),
            &multiset(&[("a", 1), ("b", 2)]),
            ZKind::Unit,
        );
        assert_eq!(got, vec![(id("a"), id("a"), 1.0), (id("a"), id("b"), 1.0)]);
        assert!(cooccur(&TermMultiset::new(), &multiset(&[("b", 2)]), ZKind::Unit).is_empty());
        let got = cooccur(
            &multiset(&[("a", 2)]),
            &multiset(&[("b", 3)]),
            ZKind::Product,
        );
        assert_eq!(got, vec![(id("a"), id("b"), 6.0)]);
        let got = cooccur(&multiset(&[("a", 2)]), &multiset(&[("b", 3)]), ZKind::Min);
        assert_eq!(got, vec![(id("a"), id("b"), 2.0)]);
    }

    #[test]
    fn title_pair_accumulation() {
        let d = dict();
        let out = build_from_documents(&[doc("d1", "alpha beta", None)], &d, &cfg(8.0, 4.0, 2.0));
        let f = &out.fmap;
        let (a, b) = (f.index(&id("a")).unwrap(), f.index(&id("b")).unwrap());
        for (r, c) in [(a, a), (a, b), (b, a), (b, b)] {
            assert_eq!(out.matrix.get(r, c), 8.0);
        }
        assert_eq!(out.matrix.len(), 4);
        let key = EdgeKey::new(id("a"), id("b")).unwrap();
        assert_eq!(out.evidence.get(&key).unwrap().count(), 1);
    }

    #[test]
    fn title_abstract_is_one_directional() {
        let d = dict();
        let out =
            build_from_documents(&[doc("d1", "alpha", Some("beta"))], &d, &cfg(8.0, 4.0, 2.0));
        let f = &out.fmap;
        let (a, b) = (f.index(&id("a")).unwrap(), f.index(&id("b")).unwrap());
        assert_eq!(out.matrix.get(a, a), 8.0);
        assert_eq!(out.matrix.get(a, b), 4.0);
        assert_eq!(out.matrix.get(b, a), 0.0);
        assert_eq!(out.matrix.get(b, b), 2.0);
        assert_eq!(
            relatedness(&out.matrix, f, &id("a"), &id("b")).unwrap(),
            4.0
        );
        assert_eq!(
            relatedness(&out.matrix, f, &id("b"), &id("a")).unwrap(),
            4.0
        );
        assert_eq!(
            relatedness(&out.matrix, f, &id("a"), &id("c")).unwrap(),
            0.0
        );
        assert_eq!(
            relatedness(&out.matrix, f, &id("a"), &id("a")).unwrap(),
            8.0
        );
        assert!(matches!(
            relatedness(&out.matrix, f, &id("a"), &id("zz")),
            Err(CoocError::UnknownConcept(_))
        ));
        assert_eq!(out.evidence.edge_count(), 1);
    }

    #[test]
    fn single_concept_document_has_no_evidence() {
        let d = dict();
        let out = build_from_documents(
            &[doc("d1", "alpha alpha", Some("alpha"))],
            &d,
            &WeightConfig::default(),
        );
        assert!(out.evidence.is_empty());
        assert!(out.matrix.iter().all(|((r, c), _)| r == c));
    }

    #[test]
    fn two_documents_accumulate() {
        let d = dict();
        let out = build_from_documents(
            &[
                doc("d1", "alpha beta", None),
                doc("d2", "beta, alpha", None),
            ],
            &d,
            &WeightConfig::default(),
        );
        let (a, b) = (
            out.fmap.index(&id("a")).unwrap(),
            out.fmap.index(&id("b")).unwrap(),
        );
        assert_eq!(out.matrix.get(a, b), 16.0);
        let key = EdgeKey::new(id("a"), id("b")).unwrap();
        assert_eq!(out.evidence.get(&key).unwrap().count(), 2);
        assert_eq!(out.stats.documents_processed, 2);
        assert_eq!(out.stats.distinct_edges, 1);
        assert_eq!(out.stats.matched_spans, 4);
    }

    #[test]
    fn empty_corpus() {
        let out = build_index(Vec::<String>::new(), &dict(), &WeightConfig::default());
        assert!(out.matrix.is_empty() && out.evidence.is_empty());
        assert_eq!(out.stats, BuildStats::default());
        assert_eq!(out.fmap.len(), 3);
    }

    #[test]
    fn malformed_lines_are_skipped() {
        let mut lines: Vec<String> = (0..9)
            .map(|i| format!(r#"{{"doc_id":"d{i}","source_kind":"research","title":"alpha beta","pub_date":"2001"}}"#))
            .collect();
        lines.insert(4, "{not json".to_string());
        let out = build_index(&lines, &dict(), &WeightConfig::default());
        assert_eq!(out.stats.documents_processed, 9);
        assert_eq!(out.stats.documents_skipped, 1);
    }

    #[test]
    fn duplicate_doc_ids_are_skipped() {
        let d = dict();
        let out = build_from_documents(
            &[
                doc("d1", "alpha beta", None),
                doc("d1", "alpha gamma", None),
            ],
            &d,
            &WeightConfig::default(),
        );
        assert_eq!(out.stats.documents_processed, 1);
        assert_eq!(out.stats.documents_skipped, 1);
    }

    #[test]
    fn index_map_is_ascending_and_one_based() {
        let f = ConceptIndexMap::from_dictionary(&dict());
        assert_eq!(f.index(&id("a")), Some(1));
        assert_eq!(f.index(&id("c")), Some(3));
        assert_eq!(f.concept(2), Some(&id("b")));
        assert_eq!(f.concept(0), None);
        assert_eq!(f.concept(4), None);
        assert!(ConceptIndexMap::from_sorted_ids(vec![id("b"), id("a")]).is_none());
    }

    #[test]
    fn weight_config_parsing() {
        let cfg = WeightConfig::from_json(
            r#"{"z_kind":"unit","w":{"TT":8,"TA":4,"TF":2,"AA":2,"AF":1,"FF":1}}"#,
        )
        .unwrap();
        assert_eq!(cfg, WeightConfig::default());
        assert!(WeightConfig::from_json(r#"{"z_kind":"unit","w":{"TT":8}}"#).is_err());
        assert!(WeightConfig::from_json(
            r#"{"z_kind":"unit","w":{"TT":0,"TA":0,"TF":0,"AA":0,"AF":0,"FF":0}}"#
        )
        .is_err());
        assert!(WeightConfig::from_json(
            r#"{"z_kind":"unit","w":{"TT":-1,"TA":0,"TF":0,"AA":0,"AF":0,"FF":1}}"#
        )
        .is_err());
        assert!(WeightConfig::from_json(
            r#"{"z_kind":"cube","w":{"TT":1,"TA":0,"TF":0,"AA":0,"AF":0,"FF":1}}"#
        )
        .is_err());
    }

    #[test]
    fn zero_weights_store_nothing() {
        let d = dict();
        let out =
            build_from_documents(&[doc("d1", "alpha", Some("beta"))], &d, &cfg(1.0, 0.0, 0.0));
        assert_eq!(out.matrix.len(), 1);
    }
}
