//! Text normalization and dictionary term extraction.
//!
//! Matching is token-aligned and greedy leftmost-longest: at each token
//! position the longest dictionary surface form starting there is taken and
//! the scan resumes after it. A token trie keyed by normalized tokens makes
//! this a single left-to-right pass.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::ontology::{ConceptId, Dictionary};

const PUNCTUATION: &[char] = &[
    '.', ',', ';', ':', '(', ')', '[', ']', '{', '}', '!', '?', '\'', '"',
];

/// Lowercases, turns punctuation into spaces and collapses whitespace.
/// Hyphens (ASCII or otherwise) are kept.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_whitespace() || PUNCTUATION.contains(&ch) {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.extend(ch.to_lowercase());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Research,
    Encyclopedia,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Research => "research",
            SourceKind::Encyclopedia => "encyclopedia",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "research" => Ok(SourceKind::Research),
            "encyclopedia" => Ok(SourceKind::Encyclopedia),
            other => Err(format!("unknown source kind {other:?}")),
        }
    }
}

/// Publication date: `YYYY`, `YYYY-MM` or `YYYY-MM-DD`.
///
/// Orders chronologically; a bare year sorts before any dated entry in the
/// same year.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PubDate {
    pub year: i32,
    pub month: Option<u32>,
    pub day: Option<u32>,
}

pub const MIN_YEAR: i32 = 1500;
pub const MAX_YEAR: i32 = 2200;

impl FromStr for PubDate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid publication date {s:?}");
        let parts: Vec<&str> = s.split('-').collect();
        let num = |p: &str, width: usize| -> Result<u32, String> {
            if p.len() != width || !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            p.parse().map_err(|_| bad())
        };
        let date = match parts.as_slice() {
            [y] => PubDate {
                year: num(y, 4)? as i32,
                month: None,
                day: None,
            },
            [y, m] => {
                let month = num(m, 2)?;
                if !(1..=12).contains(&month) {
                    return Err(bad());
                }
                PubDate {
                    year: num(y, 4)? as i32,
                    month: Some(month),
                    day: None,
                }
            }
            [y, m, d] => {
                let (year, month, day) = (num(y, 4)? as i32, num(m, 2)?, num(d, 2)?);
                NaiveDate::from_ymd_opt(year, month, day).ok_or_else(bad)?;
                PubDate {
                    year,
                    month: Some(month),
                    day: Some(day),
                }
            }
            _ => return Err(bad()),
        };
        if !(MIN_YEAR..=MAX_YEAR).contains(&date.year) {
            return Err(format!(
                "publication year {} outside [{MIN_YEAR}, {MAX_YEAR}]",
                date.year
            ));
        }
        Ok(date)
    }
}

impl TryFrom<String> for PubDate {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<PubDate> for String {
    fn from(d: PubDate) -> String {
        d.to_string()
    }
}

impl fmt::Display for PubDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
        }
        if let Some(d) = self.day {
            write!(f, "-{d:02}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DocumentError {
    #[error("malformed document record: {0}")]
    Parse(String),
    #[error("document {doc_id:?}: {reason}")]
    Invalid { doc_id: String, reason: String },
}

/// One corpus line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub source_kind: SourceKind,
    pub title: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_text: Option<String>,
    pub pub_date: PubDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    /// The concept an encyclopedia page is about.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_concept: Option<ConceptId>,
}

impl DocumentRecord {
    /// Parses and validates one corpus line.
    pub fn parse_line(line: &str) -> Result<Self, DocumentError> {
        let doc: DocumentRecord =
            serde_json::from_str(line).map_err(|e| DocumentError::Parse(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), DocumentError> {
        let invalid = |reason: &str| DocumentError::Invalid {
            doc_id: self.doc_id.clone(),
            reason: reason.to_string(),
        };
        if self.doc_id.is_empty() || self.doc_id.chars().any(char::is_whitespace) {
            return Err(invalid("doc_id must be nonempty and contain no whitespace"));
        }
        if self.title.trim().is_empty() {
            return Err(invalid("title is empty"));
        }
        match (self.source_kind, &self.subject_concept) {
            (SourceKind::Encyclopedia, None) => {
                Err(invalid("encyclopedia page without subject_concept"))
            }
            (SourceKind::Research, Some(_)) => {
                Err(invalid("subject_concept on a research document"))
            }
            _ => Ok(()),
        }
    }
}

/// Concept occurrence counts for one text zone.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermMultiset {
    counts: BTreeMap<ConceptId, u32>,
}

impl TermMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of occurrences of `id`; zero when absent.
    pub fn count(&self, id: &ConceptId) -> u32 {
        self.counts.get(id).copied().unwrap_or(0)
    }

    pub fn add(&mut self, id: ConceptId, n: u32) {
        if n > 0 {
            *self.counts.entry(id).or_insert(0) += n;
        }
    }

    /// Distinct concepts present, ascending.
    pub fn support(&self) -> impl Iterator<Item = &ConceptId> {
        self.counts.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ConceptId, u32)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        self.counts.contains_key(id)
    }

    /// Number of distinct concepts.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.counts.values().map(|&v| u64::from(v)).sum()
    }
}

impl<'a> FromIterator<&'a ConceptId> for TermMultiset {
    fn from_iter<I: IntoIterator<Item = &'a ConceptId>>(iter: I) -> Self {
        let mut m = TermMultiset::new();
        for id in iter {
            m.add(id.clone(), 1);
        }
        m
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ZoneExtraction {
    pub title_terms: TermMultiset,
    pub abstract_terms: TermMultiset,
    pub fulltext_terms: TermMultiset,
}

impl ZoneExtraction {
    /// Concepts present in any zone, ascending and deduplicated.
    pub fn all_concepts(&self) -> Vec<&ConceptId> {
        let mut ids: Vec<&ConceptId> = self
            .title_terms
            .support()
            .chain(self.abstract_terms.support())
            .chain(self.fulltext_terms.support())
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn matched_spans(&self) -> u64 {
        self.title_terms.total() + self.abstract_terms.total() + self.fulltext_terms.total()
    }
}

/// A dictionary match over the normalized token sequence: tokens
/// `start..end` resolve to `concept`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchSpan {
    pub start: usize,
    pub end: usize,
    pub concept: ConceptId,
}

#[derive(Debug, Default)]
struct TrieNode {
    children: HashMap<String, usize>,
    concept: Option<ConceptId>,
}

/// Token trie over normalized surface forms.
#[derive(Debug)]
pub(crate) struct TermMatcher {
    nodes: Vec<TrieNode>,
}

impl TermMatcher {
    pub(crate) fn new<'a>(forms: impl IntoIterator<Item = (&'a str, ConceptId)>) -> Self {
        let mut nodes = vec![TrieNode::default()];
        for (form, concept) in forms {
            if form.is_empty() {
                continue;
            }
            let mut at = 0;
            for token in form.split(' ') {
                at = match nodes[at].children.get(token) {
                    Some(&next) => next,
                    None => {
                        nodes.push(TrieNode::default());
                        let next = nodes.len() - 1;
                        nodes[at].children.insert(token.to_string(), next);
                        next
                    }
                };
            }
            nodes[at].concept = Some(concept);
        }
        TermMatcher { nodes }
    }

    fn longest_at(&self, tokens: &[&str], start: usize) -> Option<(usize, &ConceptId)> {
        let mut at = 0;
        let mut best = None;
        for (offset, token) in tokens[start..].iter().enumerate() {
            match self.nodes[at].children.get(*token) {
                Some(&next) => at = next,
                None => break,
            }
            if let Some(concept) = &self.nodes[at].concept {
                best = Some((start + offset + 1, concept));
            }
        }
        best
    }

    fn scan(&self, normalized: &str) -> Vec<MatchSpan> {
        let tokens: Vec<&str> = if normalized.is_empty() {
            Vec::new()
        } else {
            normalized.split(' ').collect()
        };
        let mut spans = Vec::new();
        let mut pos = 0;
        while pos < tokens.len() {
            match self.longest_at(&tokens, pos) {
                Some((end, concept)) => {
                    spans.push(MatchSpan {
                        start: pos,
                        end,
                        concept: concept.clone(),
                    });
                    pos = end;
                }
                None => pos += 1,
            }
        }
        spans
    }
}

/// Leftmost-longest non-overlapping matches in `text`, in position order.
/// Positions index the tokens of `normalize(text)`.
pub fn match_spans(text: &str, dict: &Dictionary) -> Vec<MatchSpan> {
    dict.matcher().scan(&normalize(text))
}

/// Concept multiset of the leftmost-longest matches in `text`.
pub fn extract_terms(text: &str, dict: &Dictionary) -> TermMultiset {
    let mut terms = TermMultiset::new();
    for span in match_spans(text, dict) {
        terms.add(span.concept, 1);
    }
    terms
}

/// Extracts each zone independently. Encyclopedia pages always count their
/// subject concept in the title zone at least once.
pub fn extract_document(doc: &DocumentRecord, dict: &Dictionary) -> ZoneExtraction {
    let zone = |text: Option<&String>| text.map(|t| extract_terms(t, dict)).unwrap_or_default();
    let mut zones = ZoneExtraction {
        title_terms: extract_terms(&doc.title, dict),
        abstract_terms: zone(doc.abstract_text.as_ref()),
        fulltext_terms: zone(doc.full_text.as_ref()),
    };
    if doc.source_kind == SourceKind::Encyclopedia {
        if let Some(subject) = &doc.subject_concept {
            if dict.contains(subject) && !zones.title_terms.contains(subject) {
                zones.title_terms.add(subject.clone(), 1);
            }
        }
    }
    zones
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::ConceptRecord;
    use proptest::prelude::*;

    fn dict(entries: &[(&str, &str)]) -> Dictionary {
        let records: Vec<ConceptRecord> = entries
            .iter()
            .map(|(id, term)| ConceptRecord {
                id: id.to_string(),
                preferred_term: term.to_string(),
                synonyms: vec![],
                tree_numbers: vec![],
                semantic_types: vec!["T047".into()],
            })
            .collect();
        Dictionary::from_records(&records).unwrap()
    }

    fn id(s: &str) -> ConceptId {
        ConceptId::new(s).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize("Vitamin  B12, Deficiency"),
            "vitamin b12 deficiency"
        );
        assert_eq!(normalize(""), "");
        assert_eq!(
            normalize("Takotsubo\u{2010}Cardiomyopathy (acute)"),
            "takotsubo\u{2010}cardiomyopathy acute"
        );
        assert_eq!(normalize("  \t(x)\u{00a0}\n y!  "), "x y");
        assert_eq!(normalize("anti-inflammatory"), "anti-inflammatory");
    }

    #[test]
    fn longer_match_wins() {
        let d = dict(&[
            ("D014806", "vitamin b12 deficiency"),
            ("D014805", "vitamin b12"),
            ("D000740", "anemia"),
        ]);
        let terms = extract_terms("vitamin b12 deficiency and anemia", &d);
        assert_eq!(
            terms.iter().collect::<Vec<_>>(),
            vec![(&id("D000740"), 1), (&id("D014806"), 1)]
        );
        assert!(!terms.contains(&id("D014805")));
    }

    #[test]
    fn falls_back_to_shorter_prefix() {
        let d = dict(&[
            ("D014806", "vitamin b12 deficiency"),
            ("D014805", "vitamin b12"),
        ]);
        let spans = match_spans("Vitamin B12 supplementation", &d);
        assert_eq!(
            spans,
            vec![MatchSpan {
                start: 0,
                end: 2,
                concept: id("D014805")
            }]
        );
    }

    #[test]
    fn counts_repeats_and_ignores_unknown_text() {
        let d = dict(&[("D001249", "asthma")]);
        assert_eq!(
            extract_terms("asthma asthma asthma", &d).count(&id("D001249")),
            3
        );
        assert!(extract_terms("nothing to see here", &d).is_empty());
        assert!(extract_terms("", &d).is_empty());
    }

    #[test]
    fn no_mid_word_matches() {
        let d = dict(&[("D012279", "rickets")]);
        assert!(extract_terms("crickets chirp", &d).is_empty());
        assert_eq!(extract_terms("Rickets; crickets.", &d).total(), 1);
    }

    fn research(title: &str) -> DocumentRecord {
        DocumentRecord {
            doc_id: "doc1".into(),
            source_kind: SourceKind::Research,
            title: title.into(),
            abstract_text: None,
            full_text: None,
            pub_date: "2001".parse().unwrap(),
            url: None,
            subject_concept: None,
        }
    }

    #[test]
    fn title_only_document() {
        let d = dict(&[("D001249", "asthma"), ("D012279", "rickets")]);
        let z = extract_document(&research("Asthma and rickets"), &d);
        assert_eq!(z.title_terms.len(), 2);
        assert!(z.abstract_terms.is_empty() && z.fulltext_terms.is_empty());
    }

    #[test]
    fn encyclopedia_subject_is_injected() {
        let d = dict(&[("D001249", "asthma"), ("D012279", "rickets")]);
        let mut doc = research("Reactive airway disease overview");
        doc.source_kind = SourceKind::Encyclopedia;
        doc.subject_concept = Some(id("D001249"));
        let z = extract_document(&doc, &d);
        assert_eq!(
            z.title_terms.iter().collect::<Vec<_>>(),
            vec![(&id("D001249"), 1)]
        );

        doc.title = "Asthma, asthma".into();
        let z = extract_document(&doc, &d);
        assert_eq!(z.title_terms.count(&id("D001249")), 2);
    }

    #[test]
    fn zones_are_independent() {
        let d = dict(&[
            ("D001249", "asthma"),
            ("D012279", "rickets"),
            ("D3", "psychosis"),
        ]);
        let mut doc = research("Asthma");
        doc.abstract_text = Some("Rickets and asthma".into());
        doc.full_text = Some("psychosis psychosis".into());
        let z = extract_document(&doc, &d);
        assert_eq!(z.title_terms, extract_terms("Asthma", &d));
        assert_eq!(z.abstract_terms, extract_terms("Rickets and asthma", &d));
        assert_eq!(z.fulltext_terms, extract_terms("psychosis psychosis", &d));
        assert_eq!(z.matched_spans(), 5);
        assert_eq!(z.all_concepts().len(), 3);
    }

    #[test]
    fn pub_date_parsing() {
        let d: PubDate = "1985-06-01".parse().unwrap();
        assert_eq!((d.year, d.month, d.day), (1985, Some(6), Some(1)));
        assert_eq!(d.to_string(), "1985-06-01");
        assert_eq!("1985".parse::<PubDate>().unwrap().to_string(), "1985");
        assert!("1985-02-30".parse::<PubDate>().is_err());
        assert!("1499".parse::<PubDate>().is_err());
        assert!("2201-01-01".parse::<PubDate>().is_err());
        assert!("85".parse::<PubDate>().is_err());
        assert!("1985".parse::<PubDate>().unwrap() < "1985-01-01".parse::<PubDate>().unwrap());
    }

    #[test]
    fn document_validation() {
        let line =
            r#"{"doc_id":"e1","source_kind":"encyclopedia","title":"Asthma","pub_date":"2015"}"#;
        assert!(matches!(
            DocumentRecord::parse_line(line),
            Err(DocumentError::Invalid { .. })
        ));
        let line = r#"{"doc_id":"r1","source_kind":"research","title":"x","pub_date":"2015","subject_concept":"D1"}"#;
        assert!(matches!(
            DocumentRecord::parse_line(line),
            Err(DocumentError::Invalid { .. })
        ));
        let line = r#"{"doc_id":"r1","source_kind":"research","title":"  ","pub_date":"2015"}"#;
        assert!(DocumentRecord::parse_line(line).is_err());
        let line = r#"{"doc_id":"r1","source_kind":"research","title":"x","pub_date":"1200"}"#;
        assert!(matches!(
            DocumentRecord::parse_line(line),
            Err(DocumentError::Parse(_))
        ));
        let line = r#"{"doc_id":"r1","source_kind":"research","title":"x","abstract":"y","pub_date":"1999-12"}"#;
        let doc = DocumentRecord::parse_line(line).unwrap();
        assert_eq!(doc.abstract_text.as_deref(), Some("y"));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once.clone());
            prop_assert!(!once.starts_with(' ') && !once.ends_with(' ') && !once.contains("  "));
        }

        #[test]
        fn spans_are_ordered_and_counted(words in prop::collection::vec(
            prop::sample::select(vec!["vitamin", "b12", "deficiency", "anemia", "and", "Asthma,", "x"]), 0..30)) {
            let d = dict(&[
                ("D1", "vitamin b12 deficiency"),
                ("D2", "vitamin b12"),
                ("D3", "anemia"),
                ("D4", "b12 deficiency"),
                ("D5", "asthma"),
            ]);
            let text = words.join(" ");
            let spans = match_spans(&text, &d);
            for w in spans.windows(2) {
                prop_assert!(w[0].end <= w[1].start);
            }
            for s in &spans {
                prop_assert!(s.start < s.end);
            }
            let terms = extract_terms(&text, &d);
            prop_assert_eq!(terms.total(), spans.len() as u64);
            prop_assert_eq!(terms, extract_terms(&normalize(&text), &d));
        }
    }
}
