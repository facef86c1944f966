//! Independent oracles and fixture helpers shared by the integration tests.
//!
//! Nothing here calls the matcher, the accumulator or the tree builder of the
//! library; the oracles work from raw JSON and plain string operations.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use medcooc::ontology::ConceptRecord;
use medcooc::query::{NeighborEntry, SourceColor};
use medcooc::treeviz::{NodeKind, ResultTree, TreeMode, TreeNode};
use medcooc::ConceptId;
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn dictionary_path() -> PathBuf {
    fixtures_dir().join("dictionary.jsonl")
}

pub fn corpus_path() -> PathBuf {
    fixtures_dir().join("corpus.jsonl")
}

/// Every corpus under `fixtures/small`, sorted by name.
pub fn small_corpora() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = fs::read_dir(fixtures_dir().join("small"))
        .expect("small fixtures")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    paths
}

pub fn read_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .expect("readable fixture")
        .lines()
        .map(str::to_string)
        .collect()
}

pub fn read_records(path: &Path) -> Vec<ConceptRecord> {
    read_lines(path)
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("dictionary record"))
        .collect()
}

pub fn id(s: &str) -> ConceptId {
    ConceptId::new(s).expect("valid id")
}

// ---------------------------------------------------------------------------
// Matcher oracle

pub fn oracle_normalize(text: &str) -> Vec<String> {
    const PUNCT: &str = ".,;:()[]{}!?'\"";
    let mapped: String = text
        .chars()
        .map(|c| if PUNCT.contains(c) { ' ' } else { c })
        .flat_map(char::to_lowercase)
        .collect();
    mapped.split_whitespace().map(str::to_string).collect()
}

/// Surface form lookup table built by string joining; ties go to the
/// smallest id.
pub struct OracleVocabulary {
    forms: HashMap<String, String>,
    max_tokens: usize,
}

impl OracleVocabulary {
    pub fn new(records: &[ConceptRecord]) -> Self {
        let mut forms: HashMap<String, String> = HashMap::new();
        let mut max_tokens = 0;
        for r in records {
            for surface in std::iter::once(&r.preferred_term).chain(&r.synonyms) {
                let tokens = oracle_normalize(surface);
                if tokens.is_empty() {
                    continue;
                }
                max_tokens = max_tokens.max(tokens.len());
                let key = tokens.join(" ");
                match forms.get(&key) {
                    Some(existing) if existing <= &r.id => {}
                    _ => {
                        forms.insert(key, r.id.clone());
                    }
                }
            }
        }
        OracleVocabulary { forms, max_tokens }
    }

    /// (start, end, id) for every leftmost-longest match.
    pub fn spans(&self, text: &str) -> Vec<(usize, usize, String)> {
        let tokens = oracle_normalize(text);
        let mut out = Vec::new();
        let mut i = 0;
        'scan: while i < tokens.len() {
            let longest = self.max_tokens.min(tokens.len() - i);
            for len in (1..=longest).rev() {
                if let Some(id) = self.forms.get(&tokens[i..i + len].join(" ")) {
                    out.push((i, i + len, id.clone()));
                    i += len;
                    continue 'scan;
                }
            }
            i += 1;
        }
        out
    }

    pub fn counts(&self, text: &str) -> BTreeMap<String, u32> {
        let mut counts = BTreeMap::new();
        for (_, _, id) in self.spans(text) {
            *counts.entry(id).or_insert(0) += 1;
        }
        counts
    }
}

// ---------------------------------------------------------------------------
// Matrix oracle

/// Zone weights in TT, TA, TF, AA, AF, FF order.
pub const DEFAULT_WEIGHTS: [f64; 6] = [8.0, 4.0, 2.0, 2.0, 1.0, 1.0];

pub struct OracleIndex {
    pub matrix: BTreeMap<(u32, u32), f64>,
    /// Unordered concept pair → supporting doc ids.
    pub edges: BTreeMap<(String, String), Vec<String>>,
    pub processed: usize,
    pub skipped: usize,
}

/// Materializes the six zone-pair tuple sets of every document and sums
/// `w * z` into `C[f(p), f(q)]` with unit `z`.
pub fn oracle_index(
    records: &[ConceptRecord],
    corpus: &[String],
    weights: [f64; 6],
) -> OracleIndex {
    let vocab = OracleVocabulary::new(records);
    let mut ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
    ids.sort();
    let f: HashMap<&str, u32> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i as u32 + 1))
        .collect();

    let mut matrix: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut edges: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    let mut seen: HashSet<String> = HashSet::new();
    let (mut processed, mut skipped) = (0, 0);

    for line in corpus.iter().filter(|l| !l.trim().is_empty()) {
        let Ok(doc) = serde_json::from_str::<serde_json::Value>(line) else {
            skipped += 1;
            continue;
        };
        let doc_id = doc["doc_id"].as_str().unwrap_or_default().to_string();
        let subject = doc["subject_concept"].as_str();
        if subject.is_some_and(|s| !f.contains_key(s)) || !seen.insert(doc_id.clone()) {
            skipped += 1;
            continue;
        }
        processed += 1;

        let zone = |key: &str| {
            doc[key]
                .as_str()
                .map(|t| vocab.counts(t))
                .unwrap_or_default()
        };
        let mut t = zone("title");
        let a = zone("abstract");
        let fz = zone("full_text");
        if let Some(s) = subject {
            t.entry(s.to_string()).or_insert(1);
        }

        let zones = [
            (&t, &t),
            (&t, &a),
            (&t, &fz),
            (&a, &a),
            (&a, &fz),
            (&fz, &fz),
        ];
        for ((p_zone, q_zone), w) in zones.iter().zip(weights) {
            let tuples: Vec<(&String, &String, f64)> = p_zone
                .keys()
                .flat_map(|p| q_zone.keys().map(move |q| (p, q, 1.0)))
                .collect();
            for (p, q, z) in tuples {
                if w * z != 0.0 {
                    *matrix.entry((f[p.as_str()], f[q.as_str()])).or_insert(0.0) += w * z;
                }
            }
        }

        let mut concepts: Vec<&String> = t.keys().chain(a.keys()).chain(fz.keys()).collect();
        concepts.sort();
        concepts.dedup();
        for (i, x) in concepts.iter().enumerate() {
            for y in &concepts[i + 1..] {
                edges
                    .entry(((*x).clone(), (*y).clone()))
                    .or_default()
                    .push(doc_id.clone());
            }
        }
    }
    for docs in edges.values_mut() {
        docs.sort();
    }
    OracleIndex {
        matrix,
        edges,
        processed,
        skipped,
    }
}

// ---------------------------------------------------------------------------
// Random generators

const VOCAB: &[&str] = &[
    "heart",
    "failure",
    "acute",
    "syndrome",
    "vitamin",
    "d",
    "deficiency",
    "b12",
    "disease",
    "of",
    "the",
    "stress",
    "chronic",
    "kidney",
    "lung",
    "cancer",
    "type",
    "2",
    "non-small",
    "cell",
];

fn random_form(rng: &mut impl Rng) -> String {
    let len = rng.random_range(1..=4);
    let tokens: Vec<String> = (0..len)
        .map(|_| {
            let t = VOCAB.choose(rng).expect("vocab");
            if rng.random_bool(0.2) {
                t.to_uppercase()
            } else {
                t.to_string()
            }
        })
        .collect();
    tokens.join(if rng.random_bool(0.1) { "  " } else { " " })
}

/// A small dictionary whose forms share many tokens and prefixes.
pub fn random_records(rng: &mut impl Rng) -> Vec<ConceptRecord> {
    let n = rng.random_range(1..=25);
    (0..n)
        .map(|i| ConceptRecord {
            id: format!("R{:03}", rng.random_range(0..1000) * 100 + i),
            preferred_term: random_form(rng),
            synonyms: (0..rng.random_range(0..3))
                .map(|_| random_form(rng))
                .collect(),
            tree_numbers: vec![],
            semantic_types: vec!["T047".into()],
        })
        .collect()
}

/// Up to `max_tokens` vocabulary tokens with random punctuation and case.
pub fn random_text(rng: &mut impl Rng, max_tokens: usize) -> String {
    const SEPARATORS: &[&str] = &[
        " ", " ", " ", ", ", ". ", " (", ") ", "; ", "\t", "\n", " '", "\" ",
    ];
    let n = rng.random_range(0..=max_tokens);
    let mut text = String::new();
    for _ in 0..n {
        let t = VOCAB.choose(rng).expect("vocab");
        if rng.random_bool(0.15) {
            text.push_str(&t.to_uppercase());
        } else {
            text.push_str(t);
        }
        text.push_str(SEPARATORS.choose(rng).expect("separators"));
    }
    text
}

pub fn neighbor_entry(
    concept: &str,
    score: f64,
    research_count: usize,
    encyclopedia_hit: bool,
) -> NeighborEntry {
    NeighborEntry {
        concept_id: id(concept),
        score,
        research_count,
        encyclopedia_hit,
        source_color: SourceColor::classify(research_count, encyclopedia_hit)
            .unwrap_or(SourceColor::Orange),
    }
}

/// A random tree of at most `max_nodes` nodes. Categories may be empty or
/// have any number of children.
pub fn random_tree(rng: &mut impl Rng, max_nodes: usize) -> ResultTree {
    let budget = rng.random_range(1..=max_nodes);
    let mut used = 1;
    let mut counter = 0;
    let children = random_children(rng, &mut used, budget, &mut counter, 0);
    ResultTree {
        mode: TreeMode::Hierarchical,
        root: TreeNode {
            kind: NodeKind::Root,
            label: "root".into(),
            id: Some(id("ROOT")),
            path: None,
            weight: children.iter().map(|c| c.weight).sum(),
            collapsed: None,
            color: None,
            score: None,
            children,
        },
    }
}

fn random_children(
    rng: &mut impl Rng,
    used: &mut usize,
    budget: usize,
    counter: &mut usize,
    depth: usize,
) -> Vec<TreeNode> {
    let mut out = Vec::new();
    let want = rng.random_range(0..=4);
    for _ in 0..want {
        if *used >= budget {
            break;
        }
        *used += 1;
        *counter += 1;
        if depth < 6 && rng.random_bool(0.45) {
            let kids = random_children(rng, used, budget, counter, depth + 1);
            out.push(TreeNode::category(
                format!("cat{counter}"),
                Some(format!("P{counter}")),
                kids,
            ));
        } else {
            let entry = neighbor_entry(
                &format!("L{counter}"),
                rng.random_range(1..100) as f64,
                rng.random_range(0..5),
                rng.random_bool(0.3),
            );
            out.push(TreeNode::leaf(&entry, format!("leaf{counter}")));
        }
    }
    out
}
