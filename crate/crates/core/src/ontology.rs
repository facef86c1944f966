//! Controlled vocabulary: concept records, synonym resolution, tree-number
//! hierarchy names and semantic types.
//!
//! A dictionary file holds one JSON object per line:
//!
//! ```text
//! {"id":"D012279","preferred_term":"Rickets","synonyms":[],"tree_numbers":["C18.654.521.500.133.770.734"],"semantic_types":["T047"]}
//! ```
//!
//! Unknown fields are ignored. Every surface form (preferred term and
//! synonyms) is normalized with [`crate::extract::normalize`] before it is
//! indexed, so lookups are case- and punctuation-insensitive.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::extract::{normalize, TermMatcher};

/// Label of the synthetic category holding concepts without tree numbers.
pub const UNCLASSIFIED: &str = "Unclassified";

#[derive(Debug, thiserror::Error)]
pub enum OntologyError {
    #[error("line {line}: malformed dictionary record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate concept id {0}")]
    DuplicateConceptId(ConceptId),
    #[error("dictionary contains no concepts")]
    EmptyDictionary,
    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Opaque vocabulary identifier, e.g. `D014806`.
///
/// Nonempty and free of whitespace so it can be written into the
/// space-delimited index files unescaped.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptId(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid concept id {0:?}: must be nonempty and contain no whitespace")]
pub struct InvalidConceptId(pub String);

impl ConceptId {
    pub fn new(value: impl Into<String>) -> Result<Self, InvalidConceptId> {
        let value = value.into();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(InvalidConceptId(value));
        }
        Ok(ConceptId(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ConceptId {
    type Error = InvalidConceptId;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        ConceptId::new(value)
    }
}

impl From<ConceptId> for String {
    fn from(id: ConceptId) -> String {
        id.0
    }
}

impl FromStr for ConceptId {
    type Err = InvalidConceptId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConceptId::new(s)
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ConceptId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// One line of the dictionary file, as written on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptRecord {
    pub id: String,
    pub preferred_term: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default)]
    pub tree_numbers: Vec<String>,
    #[serde(default)]
    pub semantic_types: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Concept {
    pub id: ConceptId,
    pub preferred_term: String,
    /// Synonyms with normalized duplicates of the preferred term removed.
    pub synonyms: Vec<String>,
    pub tree_numbers: Vec<String>,
    pub semantic_types: Vec<String>,
}

impl Concept {
    /// The tree number used to place this concept in a result hierarchy:
    /// the lexicographically smallest one.
    pub fn grouping_tree_number(&self) -> Option<&str> {
        self.tree_numbers.iter().map(String::as_str).min()
    }

    pub fn has_semantic_type(&self, code: &str) -> bool {
        self.semantic_types.iter().any(|t| t == code)
    }

    /// Preferred term followed by synonyms.
    pub fn surface_forms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.preferred_term.as_str())
            .chain(self.synonyms.iter().map(String::as_str))
    }
}

/// Where a normalized surface form points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceEntry {
    pub concept: ConceptId,
    /// The form as written in the dictionary (original casing).
    pub display: String,
}

/// A normalized surface form claimed by more than one concept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ambiguity {
    pub surface: String,
    pub winner: ConceptId,
    pub losers: Vec<ConceptId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadSummary {
    pub concepts: usize,
    pub surface_forms: usize,
    pub ambiguities: Vec<Ambiguity>,
}

/// Immutable vocabulary. Cheap to share across threads behind an `Arc`.
#[derive(Debug)]
pub struct Dictionary {
    concepts: BTreeMap<ConceptId, Concept>,
    surface_index: BTreeMap<String, SurfaceEntry>,
    tree_names: BTreeMap<String, String>,
    matcher: TermMatcher,
    ambiguities: Vec<Ambiguity>,
    checksum: String,
}

/// Reads and validates a dictionary file.
pub fn load_dictionary(path: impl AsRef<Path>) -> Result<Dictionary, OntologyError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| OntologyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Dictionary::from_bytes(&bytes)
}

impl Dictionary {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, OntologyError> {
        let checksum = hex::encode(Sha256::digest(bytes));
        let text = std::str::from_utf8(bytes).map_err(|e| OntologyError::MalformedRecord {
            line: line_of_offset(bytes, e.valid_up_to()),
            reason: "invalid UTF-8".to_string(),
        })?;

        let mut records = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: ConceptRecord =
                serde_json::from_str(line).map_err(|e| OntologyError::MalformedRecord {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            records.push((idx + 1, record));
        }
        Self::build(records, checksum)
    }

    /// Builds a dictionary from in-memory records. The checksum is taken over
    /// the JSON-lines rendering of the records, so it equals the checksum of
    /// a file holding exactly that rendering.
    pub fn from_records(records: &[ConceptRecord]) -> Result<Self, OntologyError> {
        Self::from_bytes(render_records(records).as_bytes())
    }

    fn build(
        records: Vec<(usize, ConceptRecord)>,
        checksum: String,
    ) -> Result<Self, OntologyError> {
        if records.is_empty() {
            return Err(OntologyError::EmptyDictionary);
        }

        let mut concepts = BTreeMap::new();
        for (line, record) in records {
            let concept = validate_record(line, record)?;
            if concepts.contains_key(&concept.id) {
                return Err(OntologyError::DuplicateConceptId(concept.id));
            }
            concepts.insert(concept.id.clone(), concept);
        }

        // Concepts are visited in ascending id order, so the first claimant
        // of a normalized form is the lexicographically smallest id.
        let mut surface_index: BTreeMap<String, SurfaceEntry> = BTreeMap::new();
        let mut conflicts: BTreeMap<String, Vec<ConceptId>> = BTreeMap::new();
        for concept in concepts.values() {
            for form in concept.surface_forms() {
                let key = normalize(form);
                match surface_index.get(&key) {
                    None => {
                        surface_index.insert(
                            key,
                            SurfaceEntry {
                                concept: concept.id.clone(),
                                display: form.to_string(),
                            },
                        );
                    }
                    Some(existing) if existing.concept == concept.id => {}
                    Some(_) => conflicts.entry(key).or_default().push(concept.id.clone()),
                }
            }
        }
        let ambiguities: Vec<Ambiguity> =
            conflicts
                .into_iter()
                .map(|(surface, mut losers)| {
                    losers.dedup();
                    let winner = surface_index[&surface].concept.clone();
                    log::warn!(
                    "ambiguous surface form {surface:?}: resolved to {winner}, also claimed by {}",
                    losers.iter().map(ConceptId::as_str).collect::<Vec<_>>().join(", ")
                );
                    Ambiguity {
                        surface,
                        winner,
                        losers,
                    }
                })
                .collect();

        let mut tree_names = BTreeMap::new();
        for concept in concepts.values() {
            for tn in &concept.tree_numbers {
                tree_names
                    .entry(tn.clone())
                    .or_insert_with(|| concept.preferred_term.clone());
            }
        }

        let matcher = TermMatcher::new(
            surface_index
                .iter()
                .map(|(form, entry)| (form.as_str(), entry.concept.clone())),
        );

        Ok(Dictionary {
            concepts,
            surface_index,
            tree_names,
            matcher,
            ambiguities,
            checksum,
        })
    }

    /// Resolves a surface string to its concept, after normalization.
    pub fn resolve_term(&self, surface: &str) -> Option<&ConceptId> {
        self.surface_index
            .get(&normalize(surface))
            .map(|e| &e.concept)
    }

    /// Display name for a tree-number prefix: the preferred term of the
    /// concept owning that tree number, otherwise the prefix itself.
    pub fn category_name<'a>(&'a self, tree_prefix: &'a str) -> &'a str {
        self.tree_names
            .get(tree_prefix)
            .map(String::as_str)
            .unwrap_or(tree_prefix)
    }

    pub fn concept(&self, id: &ConceptId) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        self.concepts.contains_key(id)
    }

    /// Concepts in ascending id order.
    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Normalized surface forms in ascending order.
    pub fn surface_forms(&self) -> impl Iterator<Item = (&str, &SurfaceEntry)> {
        self.surface_index.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn summary(&self) -> LoadSummary {
        LoadSummary {
            concepts: self.concepts.len(),
            surface_forms: self.surface_index.len(),
            ambiguities: self.ambiguities.clone(),
        }
    }

    /// Hex SHA-256 of the source bytes.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub(crate) fn matcher(&self) -> &TermMatcher {
        &self.matcher
    }
}

/// Renders records as dictionary-file lines.
pub fn render_records(records: &[ConceptRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn is_valid_tree_number(tn: &str) -> bool {
    !tn.is_empty()
        && tn
            .split('.')
            .all(|seg| !seg.is_empty() && !seg.chars().any(char::is_whitespace))
}

fn validate_record(line: usize, record: ConceptRecord) -> Result<Concept, OntologyError> {
    let malformed = |reason: String| OntologyError::MalformedRecord { line, reason };

    let id = ConceptId::new(record.id).map_err(|e| malformed(e.to_string()))?;
    let preferred_key = normalize(&record.preferred_term);
    if preferred_key.is_empty() {
        return Err(malformed("preferred_term is empty".into()));
    }
    if let Some(tn) = record
        .tree_numbers
        .iter()
        .find(|tn| !is_valid_tree_number(tn))
    {
        return Err(malformed(format!("invalid tree number {tn:?}")));
    }
    if record.semantic_types.iter().any(|t| t.trim().is_empty()) {
        return Err(malformed("empty semantic type code".into()));
    }

    let mut seen = vec![preferred_key];
    let mut synonyms = Vec::with_capacity(record.synonyms.len());
    for syn in record.synonyms {
        let key = normalize(&syn);
        if key.is_empty() || seen.contains(&key) {
            continue;
        }
        seen.push(key);
        synonyms.push(syn);
    }

    let mut tree_numbers = record.tree_numbers;
    tree_numbers.dedup();

    Ok(Concept {
        id,
        preferred_term: record.preferred_term,
        synonyms,
        tree_numbers,
        semantic_types: record.semantic_types,
    })
}

fn line_of_offset(bytes: &[u8], offset: usize) -> usize {
    bytes[..offset].iter().filter(|&&b| b == b'\n').count() + 1
}
