//! Response bodies shared by the HTTP server and the CLI, so both print
//! byte-identical JSON for the same request.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::cooc::BuildStats;
use crate::explorer::{Explorer, ExplorerError};
use crate::ontology::ConceptId;
use crate::query::{PublicationList, QueryError, Suggestion};
use crate::store::FORMAT_VERSION;
use crate::treeviz::{ResultTree, TreeMode};

pub const DEFAULT_SUGGESTIONS: usize = 10;
pub const MAX_SUGGESTIONS: usize = 50;
/// Semantic type applied when a graph request names none: diseases.
pub const DEFAULT_SEMANTIC_TYPE: &str = "T047";
/// `semantic_type` value that disables the filter.
pub const ANY_SEMANTIC_TYPE: &str = "any";
pub const MAX_FEEDBACK_CHARS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
}

impl ApiError {
    pub fn status(&self) -> u16 {
        match self {
            ApiError::BadRequest(_) => 400,
            ApiError::NotFound(_) => 404,
        }
    }

    pub fn body(&self) -> String {
        serde_json::json!({ "error": self.to_string() }).to_string()
    }
}

fn not_found(e: ExplorerError) -> ApiError {
    match e {
        ExplorerError::Query(QueryError::UnknownConcept(id)) => {
            ApiError::NotFound(format!("unknown concept {id}"))
        }
        ExplorerError::Query(QueryError::UnknownEdge(a, b)) => {
            ApiError::NotFound(format!("no evidence links {a} and {b}"))
        }
        other => ApiError::NotFound(other.to_string()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("response serializes")
}

fn concept_param(raw: &str) -> Result<ConceptId, ApiError> {
    ConceptId::new(raw).map_err(|_| ApiError::NotFound(format!("unknown concept {raw}")))
}

/// `GET /api/suggest?q=&k=`
pub fn suggest_body(
    explorer: &Explorer,
    q: Option<&str>,
    k: Option<&str>,
) -> Result<String, ApiError> {
    let q = q.unwrap_or("");
    if q.trim().is_empty() {
        return Err(ApiError::BadRequest(
            "query parameter q must be nonempty".into(),
        ));
    }
    let k = match k {
        None => DEFAULT_SUGGESTIONS,
        Some(raw) => match raw.parse::<usize>() {
            Ok(k) if k >= 1 => k.min(MAX_SUGGESTIONS),
            _ => {
                return Err(ApiError::BadRequest(format!(
                    "k must be a positive integer, got {raw:?}"
                )))
            }
        },
    };
    let suggestions: Vec<Suggestion> = explorer.suggest(q, k);
    Ok(to_json(&suggestions))
}

#[derive(Serialize)]
struct GraphResponse<'a> {
    concept_id: &'a ConceptId,
    semantic_type: Option<&'a str>,
    #[serde(flatten)]
    tree: &'a ResultTree,
}

pub fn parse_mode(mode: Option<&str>) -> Result<TreeMode, ApiError> {
    match mode.unwrap_or("hierarchical") {
        "hierarchical" => Ok(TreeMode::Hierarchical),
        "flat" => Ok(TreeMode::Flat),
        other => Err(ApiError::BadRequest(format!(
            "mode must be hierarchical or flat, got {other:?}"
        ))),
    }
}

/// `GET /api/graph/{concept_id}?semantic_type=&mode=`
pub fn graph_body(
    explorer: &Explorer,
    concept: &str,
    semantic_type: Option<&str>,
    mode: Option<&str>,
) -> Result<String, ApiError> {
    let mode = parse_mode(mode)?;
    let id = concept_param(concept)?;
    let filter = match semantic_type {
        None | Some("") => Some(DEFAULT_SEMANTIC_TYPE),
        Some(ANY_SEMANTIC_TYPE) => None,
        Some(code) => Some(code),
    };
    let tree = explorer.graph(&id, filter, mode).map_err(not_found)?;
    Ok(to_json(&GraphResponse {
        concept_id: &id,
        semantic_type: filter,
        tree: &tree,
    }))
}

/// `GET /api/edge/{a}/{b}/publications`
pub fn edge_body(explorer: &Explorer, a: &str, b: &str) -> Result<String, ApiError> {
    let (a, b) = (concept_param(a)?, concept_param(b)?);
    let list: PublicationList = explorer.edge_publications(&a, &b).map_err(not_found)?;
    Ok(to_json(&list))
}

#[derive(Serialize)]
struct Health<'a> {
    status: &'static str,
    format_version: u32,
    dictionary_checksum: &'a str,
    concepts: usize,
    build_stats: &'a BuildStats,
}

/// `GET /api/health`
pub fn health_body(explorer: &Explorer) -> String {
    let bundle = explorer.bundle();
    to_json(&Health {
        status: "ok",
        format_version: FORMAT_VERSION,
        dictionary_checksum: &bundle.dictionary_checksum,
        concepts: bundle.fmap.len(),
        build_stats: &bundle.build_stats,
    })
}

#[derive(Clone, Debug, Deserialize)]
pub struct FeedbackRequest {
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub context_url: Option<String>,
}

impl FeedbackRequest {
    pub fn validate(&self) -> Result<(), ApiError> {
        if self.text.trim().is_empty() {
            return Err(ApiError::BadRequest(
                "feedback text must be nonempty".into(),
            ));
        }
        if self.text.chars().count() > MAX_FEEDBACK_CHARS {
            return Err(ApiError::BadRequest(format!(
                "feedback text exceeds {MAX_FEEDBACK_CHARS} characters"
            )));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct FeedbackLine<'a> {
    timestamp: String,
    text: &'a str,
    context_url: Option<&'a str>,
}

/// Append-only feedback log; one JSON object per line. Writes go through a
/// single lock so concurrent submissions never interleave.
#[derive(Debug)]
pub struct FeedbackLog {
    file: Mutex<File>,
}

impl FeedbackLog {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(FeedbackLog {
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, request: &FeedbackRequest) -> io::Result<()> {
        let line = FeedbackLine {
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            text: &request.text,
            context_url: request.context_url.as_deref(),
        };
        let mut text = serde_json::to_string(&line).expect("feedback serializes");
        text.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(text.as_bytes())?;
        file.flush()
    }
}
