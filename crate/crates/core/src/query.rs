//! Exploration queries: spelling suggestions, neighbour sets and per-edge
//! publication lists.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::cooc::{relatedness, EdgeKey, Posting};
use crate::extract::{normalize, PubDate, SourceKind};
use crate::ontology::{ConceptId, Dictionary};
use crate::store::IndexBundle;

/// Forms farther than this edit distance are not suggested (unless they
/// contain the query).
pub const MAX_SUGGESTION_DISTANCE: usize = 3;

/// Research documents needed before a co-occurrence is shown on its own.
pub const MIN_RESEARCH_DOCUMENTS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("no evidence links {0} and {1}")]
    UnknownEdge(ConceptId, ConceptId),
}

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(ca != cb);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Suggestion {
    pub concept_id: ConceptId,
    /// The surface form that matched, as written in the dictionary.
    pub display: String,
    pub distance: usize,
}

/// Vocabulary entries spelled like `query`, best first.
///
/// Candidates are forms containing the normalized query (ranked by length
/// difference) and forms within [`MAX_SUGGESTION_DISTANCE`] edits. Each
/// concept appears once, via its best form.
pub fn suggest(dict: &Dictionary, query: &str, k: usize) -> Vec<Suggestion> {
    let q = normalize(query);
    if q.is_empty() || k == 0 {
        return Vec::new();
    }
    let q_len = q.chars().count();

    let mut best: HashMap<&ConceptId, (usize, &str)> = HashMap::new();
    for (form, entry) in dict.surface_forms() {
        let len_diff = form.chars().count().abs_diff(q_len);
        let distance = if form.contains(&q) {
            len_diff
        } else if len_diff <= MAX_SUGGESTION_DISTANCE {
            match levenshtein(form, &q) {
                d if d <= MAX_SUGGESTION_DISTANCE => d,
                _ => continue,
            }
        } else {
            continue;
        };
        let candidate = (distance, entry.display.as_str());
        best.entry(&entry.concept)
            .and_modify(|cur| {
                if candidate < *cur {
                    *cur = candidate;
                }
            })
            .or_insert(candidate);
    }

    let mut out: Vec<Suggestion> = best
        .into_iter()
        .map(|(id, (distance, display))| Suggestion {
            concept_id: id.clone(),
            display: display.to_string(),
            distance,
        })
        .collect();
    out.sort_by(|a, b| {
        (a.distance, &a.display, &a.concept_id).cmp(&(b.distance, &b.display, &b.concept_id))
    });
    out.truncate(k);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceColor {
    /// Research articles only.
    Orange,
    /// Encyclopedia only.
    Green,
    /// Both.
    Yellow,
}

impl SourceColor {
    pub fn classify(research_count: usize, encyclopedia_hit: bool) -> Option<Self> {
        match (research_count > 0, encyclopedia_hit) {
            (true, false) => Some(SourceColor::Orange),
            (false, true) => Some(SourceColor::Green),
            (true, true) => Some(SourceColor::Yellow),
            (false, false) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborEntry {
    pub concept_id: ConceptId,
    pub score: f64,
    pub research_count: usize,
    /// An encyclopedia page about either end mentions both.
    pub encyclopedia_hit: bool,
    pub source_color: SourceColor,
}

impl NeighborEntry {
    /// Number of supporting documents, counting a qualifying encyclopedia
    /// page once.
    pub fn weight(&self) -> u64 {
        self.research_count as u64 + u64::from(self.encyclopedia_hit)
    }
}

/// Whether an edge with this evidence is displayed.
pub fn passes_threshold(research_count: usize, encyclopedia_hit: bool) -> bool {
    research_count >= MIN_RESEARCH_DOCUMENTS || encyclopedia_hit
}

/// Classifies the postings of the edge `{query, neighbor}`.
pub fn evidence_summary<'a>(
    postings: impl Iterator<Item = &'a Posting>,
    query: &ConceptId,
    neighbor: &ConceptId,
) -> (usize, bool) {
    let mut research = 0;
    let mut encyclopedia_hit = false;
    for p in postings {
        match p.source_kind {
            SourceKind::Research => research += 1,
            SourceKind::Encyclopedia => {
                let subject = p.subject_concept.as_ref();
                encyclopedia_hit |= subject == Some(query) || subject == Some(neighbor);
            }
        }
    }
    (research, encyclopedia_hit)
}

/// Concepts linked to `query_id` with enough evidence, optionally filtered
/// by semantic type, ordered by score (desc) then id.
pub fn neighbors(
    bundle: &IndexBundle,
    dict: &Dictionary,
    query_id: &ConceptId,
    semantic_type: Option<&str>,
) -> Result<Vec<NeighborEntry>, QueryError> {
    if !dict.contains(query_id) || bundle.fmap.index(query_id).is_none() {
        return Err(QueryError::UnknownConcept(query_id.clone()));
    }
    let mut out = Vec::new();
    for (neighbor, postings) in bundle.evidence.incident(query_id) {
        if let Some(code) = semantic_type {
            let matches = dict
                .concept(neighbor)
                .is_some_and(|c| c.has_semantic_type(code));
            if !matches {
                continue;
            }
        }
        let (research_count, encyclopedia_hit) = evidence_summary(postings, query_id, neighbor);
        if !passes_threshold(research_count, encyclopedia_hit) {
            continue;
        }
        let score = relatedness(&bundle.matrix, &bundle.fmap, query_id, neighbor)
            .map_err(|_| QueryError::UnknownConcept(neighbor.clone()))?;
        if score <= 0.0 {
            continue;
        }
        let source_color = SourceColor::classify(research_count, encyclopedia_hit)
            .expect("threshold implies some evidence");
        out.push(NeighborEntry {
            concept_id: neighbor.clone(),
            score,
            research_count,
            encyclopedia_hit,
            source_color,
        });
    }
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.concept_id.cmp(&b.concept_id))
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PublicationItem {
    pub doc_id: String,
    pub title: String,
    pub pub_date: PubDate,
    pub year: i32,
    pub url: Option<String>,
    pub source_kind: SourceKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PublicationList {
    pub total: usize,
    pub items: Vec<PublicationItem>,
    /// Decade start year → research documents in that decade.
    pub decade_histogram: BTreeMap<i32, usize>,
}

pub fn decade_of(year: i32) -> i32 {
    year - year.rem_euclid(10)
}

/// Documents supporting the edge `{a, b}`: encyclopedia pages first, then
/// newest first.
pub fn edge_publications(
    bundle: &IndexBundle,
    a: &ConceptId,
    b: &ConceptId,
) -> Result<PublicationList, QueryError> {
    let unknown = || QueryError::UnknownEdge(a.clone(), b.clone());
    let key = EdgeKey::new(a.clone(), b.clone()).ok_or_else(unknown)?;
    let postings = bundle.evidence.get(&key).ok_or_else(unknown)?;

    let mut items: Vec<PublicationItem> = postings
        .map(|p| match bundle.documents.get(&p.doc_id) {
            Some(meta) => PublicationItem {
                doc_id: meta.doc_id.clone(),
                title: meta.title.clone(),
                pub_date: meta.pub_date,
                year: meta.pub_date.year,
                url: meta.url.clone(),
                source_kind: meta.source_kind,
            },
            None => PublicationItem {
                doc_id: p.doc_id.clone(),
                title: p.doc_id.clone(),
                pub_date: PubDate {
                    year: p.pub_year,
                    month: None,
                    day: None,
                },
                year: p.pub_year,
                url: None,
                source_kind: p.source_kind,
            },
        })
        .collect();
    items.sort_by(|x, y| {
        let encyclopedia_first = (y.source_kind == SourceKind::Encyclopedia)
            .cmp(&(x.source_kind == SourceKind::Encyclopedia));
        encyclopedia_first
            .then_with(|| y.pub_date.cmp(&x.pub_date))
            .then_with(|| x.doc_id.cmp(&y.doc_id))
    });

    let mut decade_histogram = BTreeMap::new();
    for item in items
        .iter()
        .filter(|i| i.source_kind == SourceKind::Research)
    {
        *decade_histogram.entry(decade_of(item.year)).or_insert(0) += 1;
    }
    Ok(PublicationList {
        total: items.len(),
        items,
        decade_histogram,
    })
}
