//! Concept co-occurrence network engine.
//!
//! Builds a weighted co-occurrence network of controlled-vocabulary concepts
//! from a document corpus (titles, abstracts, full text and encyclopedia
//! pages) and answers exploration queries over it: spelling suggestions,
//! evidence-thresholded neighbour sets grouped by the vocabulary hierarchy,
//! and per-edge publication lists.
//!
//! The pipeline is:
//!
//! 1. [`ontology`] loads the dictionary of concepts.
//! 2. [`extract`] finds leftmost-longest dictionary matches per document zone.
//! 3. [`cooc`] accumulates the co-occurrence matrix and per-edge evidence.
//! 4. [`store`] persists and merges built indexes.
//! 5. [`query`] and [`treeviz`] turn an index into view models, which
//!    [`api`] serializes for both the HTTP [`server`] and the CLI.

pub mod api;
pub mod cooc;
pub mod explorer;
pub mod extract;
pub mod ontology;
pub mod query;
pub mod server;
pub mod store;
pub mod treeviz;

pub use cooc::{build_index, BuildOutput, BuildStats, WeightConfig, ZKind};
pub use explorer::{Explorer, ExplorerError};
pub use extract::{extract_document, extract_terms, normalize, DocumentRecord, SourceKind};
pub use ontology::{load_dictionary, Concept, ConceptId, Dictionary};
pub use store::{load_index, save_index, IndexBundle};
