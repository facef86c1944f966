//! C ABI over the explorer.
//!
//! Every function returns an [`MccStatus`]. On failure a message is kept per
//! thread and can be read with [`mcc_last_error`]. Strings handed out through
//! `out_json` are owned by the caller and must be released with
//! [`mcc_string_free`]; explorer handles with [`mcc_explorer_free`].
//!
//! The JSON bodies are byte-identical to the HTTP API responses.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use medcooc::api::{self, ApiError};
use medcooc::cooc::{CoocError, WeightConfig};
use medcooc::ontology::OntologyError;
use medcooc::store::{self, StoreError};
use medcooc::{build_index, load_dictionary, Explorer, ExplorerError, IndexBundle};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MccStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// A request parameter was rejected.
    InvalidArgument = 3,
    /// Unknown concept, or no evidence for the requested edge.
    NotFound = 4,
    /// A file could not be read or written.
    Io = 5,
    /// Dictionary, corpus config or index contents are invalid.
    InvalidData = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// Opaque handle to a loaded index.
pub struct MccExplorer {
    inner: Explorer,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

struct Failure(MccStatus, String);

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        let status = match e {
            ApiError::BadRequest(_) => MccStatus::InvalidArgument,
            ApiError::NotFound(_) => MccStatus::NotFound,
        };
        Failure(status, e.to_string())
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::IoFailure { .. } | StoreError::MissingFile(_) => MccStatus::Io,
            _ => MccStatus::InvalidData,
        };
        Failure(status, e.to_string())
    }
}

impl From<OntologyError> for Failure {
    fn from(e: OntologyError) -> Self {
        let status = match e {
            OntologyError::Io { .. } => MccStatus::Io,
            _ => MccStatus::InvalidData,
        };
        Failure(status, e.to_string())
    }
}

impl From<CoocError> for Failure {
    fn from(e: CoocError) -> Self {
        let status = match e {
            CoocError::Io { .. } => MccStatus::Io,
            _ => MccStatus::InvalidData,
        };
        Failure(status, e.to_string())
    }
}

impl From<ExplorerError> for Failure {
    fn from(e: ExplorerError) -> Self {
        match e {
            ExplorerError::Store(e) => e.into(),
            ExplorerError::Ontology(e) => e.into(),
            other => Failure(MccStatus::InvalidData, other.to_string()),
        }
    }
}

/// Runs `body`, recording the error message and catching panics.
fn guarded(body: impl FnOnce() -> Result<(), Failure>) -> MccStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            MccStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal error");
            MccStatus::Internal
        }
    }
}

/// # Safety
/// `ptr` is null or a NUL-terminated string valid for the call.
unsafe fn required_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure(MccStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(MccStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

/// # Safety
/// As [`required_str`]; null maps to `None`.
unsafe fn optional_str<'a>(ptr: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if ptr.is_null() {
        Ok(None)
    } else {
        required_str(ptr, name).map(Some)
    }
}

/// # Safety
/// `handle` is null or a live pointer from [`mcc_explorer_open`].
unsafe fn explorer<'a>(handle: *const MccExplorer) -> Result<&'a Explorer, Failure> {
    handle
        .as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Failure(MccStatus::NullArgument, "explorer is null".into()))
}

/// # Safety
/// `out` is null or valid for one pointer write.
unsafe fn write_json(out: *mut *mut c_char, json: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(MccStatus::NullArgument, "out_json is null".into()));
    }
    let text = CString::new(json)
        .map_err(|_| Failure(MccStatus::Internal, "response contains NUL".into()))?;
    *out = text.into_raw();
    Ok(())
}

/// Opens an index directory built by `medcooc build`.
///
/// # Safety
/// `index_dir` is a NUL-terminated string; `out` is valid for one pointer
/// write. On failure `*out` is set to null.
#[no_mangle]
pub unsafe extern "C" fn mcc_explorer_open(
    index_dir: *const c_char,
    out: *mut *mut MccExplorer,
) -> MccStatus {
    guarded(|| {
        if out.is_null() {
            return Err(Failure(MccStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let dir = required_str(index_dir, "index_dir")?;
        let inner = Explorer::open(dir)?;
        *out = Box::into_raw(Box::new(MccExplorer { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` is null or came from [`mcc_explorer_open`] and is not used again.
#[no_mangle]
pub unsafe extern "C" fn mcc_explorer_free(handle: *mut MccExplorer) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Spelling suggestions for `query`; `k` of 0 is rejected.
///
/// # Safety
/// String arguments are NUL-terminated; `out_json` is valid for one pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn mcc_suggest(
    handle: *const MccExplorer,
    query: *const c_char,
    k: u32,
    out_json: *mut *mut c_char,
) -> MccStatus {
    guarded(|| {
        let explorer = explorer(handle)?;
        let query = required_str(query, "query")?;
        let json = api::suggest_body(explorer, Some(query), Some(&k.to_string()))?;
        write_json(out_json, json)
    })
}

/// Result tree for a concept. Null `semantic_type` applies the disease
/// filter, `"any"` disables it; null `mode` means hierarchical.
///
/// # Safety
/// String arguments are NUL-terminated; `out_json` is valid for one pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn mcc_graph(
    handle: *const MccExplorer,
    concept_id: *const c_char,
    semantic_type: *const c_char,
    mode: *const c_char,
    out_json: *mut *mut c_char,
) -> MccStatus {
    guarded(|| {
        let explorer = explorer(handle)?;
        let concept = required_str(concept_id, "concept_id")?;
        let semantic_type = optional_str(semantic_type, "semantic_type")?;
        let mode = optional_str(mode, "mode")?;
        write_json(
            out_json,
            api::graph_body(explorer, concept, semantic_type, mode)?,
        )
    })
}

/// Publications supporting the edge between two concepts.
///
/// # Safety
/// String arguments are NUL-terminated; `out_json` is valid for one pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn mcc_edge_publications(
    handle: *const MccExplorer,
    concept_a: *const c_char,
    concept_b: *const c_char,
    out_json: *mut *mut c_char,
) -> MccStatus {
    guarded(|| {
        let explorer = explorer(handle)?;
        let a = required_str(concept_a, "concept_a")?;
        let b = required_str(concept_b, "concept_b")?;
        write_json(out_json, api::edge_body(explorer, a, b)?)
    })
}

/// Index metadata and build statistics.
///
/// # Safety
/// String arguments are NUL-terminated; `out_json` is valid for one pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn mcc_health(
    handle: *const MccExplorer,
    out_json: *mut *mut c_char,
) -> MccStatus {
    guarded(|| {
        let explorer = explorer(handle)?;
        write_json(out_json, api::health_body(explorer))
    })
}

/// Builds an index directory from a dictionary and a corpus. Null
/// `weights_path` applies the default weights.
///
/// # Safety
/// String arguments are NUL-terminated; `out_json` is valid for one pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn mcc_build_index(
    dictionary_path: *const c_char,
    corpus_path: *const c_char,
    weights_path: *const c_char,
    out_dir: *const c_char,
) -> MccStatus {
    guarded(|| {
        let dictionary_path = required_str(dictionary_path, "dictionary_path")?;
        let corpus_path = required_str(corpus_path, "corpus_path")?;
        let weights_path = optional_str(weights_path, "weights_path")?;
        let out_dir = PathBuf::from(required_str(out_dir, "out_dir")?);

        let dict = load_dictionary(dictionary_path)?;
        let cfg = match weights_path {
            Some(path) => WeightConfig::load(path)?,
            None => WeightConfig::default(),
        };
        let corpus = fs::read_to_string(corpus_path).map_err(|e| {
            Failure(
                MccStatus::Io,
                format!("cannot read corpus {corpus_path}: {e}"),
            )
        })?;
        let output = build_index(corpus.lines(), &dict, &cfg);
        let bundle = IndexBundle::from_build(output, &dict, cfg);
        store::save_index(&bundle, &out_dir)?;
        store::copy_dictionary(dictionary_path, &out_dir)?;
        Ok(())
    })
}

/// Releases a string returned through `out_json`. Null is ignored.
///
/// # Safety
/// `s` is null or came from this library and is not used again.
#[no_mangle]
pub unsafe extern "C" fn mcc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mcc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
