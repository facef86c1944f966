//! A loaded index together with its dictionary: the read-only state every
//! query worker shares.

use std::path::Path;

use crate::ontology::{load_dictionary, ConceptId, Dictionary, OntologyError};
use crate::query::{self, NeighborEntry, PublicationList, QueryError, Suggestion};
use crate::store::{load_index, IndexBundle, StoreError, DICTIONARY_FILE};
use crate::treeviz::{build_hierarchy, flat_view, ResultTree, TreeError, TreeMode};

#[derive(Debug, thiserror::Error)]
pub enum ExplorerError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("dictionary: {0}")]
    Ontology(#[from] OntologyError),
    #[error(
        "index was built from a different dictionary (index {index}, dictionary {dictionary})"
    )]
    ChecksumMismatch { index: String, dictionary: String },
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug)]
pub struct Explorer {
    dict: Dictionary,
    bundle: IndexBundle,
}

impl Explorer {
    /// Loads an index directory and the dictionary copy stored in it.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, ExplorerError> {
        let dir = dir.as_ref();
        let bundle = load_index(dir)?;
        let dict_path = dir.join(DICTIONARY_FILE);
        if !dict_path.exists() {
            return Err(StoreError::MissingFile(DICTIONARY_FILE).into());
        }
        let dict = load_dictionary(dict_path)?;
        Self::new(dict, bundle)
    }

    pub fn new(dict: Dictionary, bundle: IndexBundle) -> Result<Self, ExplorerError> {
        if dict.checksum() != bundle.dictionary_checksum {
            return Err(ExplorerError::ChecksumMismatch {
                index: bundle.dictionary_checksum.clone(),
                dictionary: dict.checksum().to_string(),
            });
        }
        Ok(Explorer { dict, bundle })
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn bundle(&self) -> &IndexBundle {
        &self.bundle
    }

    pub fn suggest(&self, query: &str, k: usize) -> Vec<Suggestion> {
        query::suggest(&self.dict, query, k)
    }

    pub fn neighbors(
        &self,
        id: &ConceptId,
        semantic_type: Option<&str>,
    ) -> Result<Vec<NeighborEntry>, ExplorerError> {
        Ok(query::neighbors(
            &self.bundle,
            &self.dict,
            id,
            semantic_type,
        )?)
    }

    pub fn graph(
        &self,
        id: &ConceptId,
        semantic_type: Option<&str>,
        mode: TreeMode,
    ) -> Result<ResultTree, ExplorerError> {
        let entries = self.neighbors(id, semantic_type)?;
        Ok(match mode {
            TreeMode::Hierarchical => build_hierarchy(id, &entries, &self.dict)?,
            TreeMode::Flat => flat_view(id, &entries, &self.dict),
        })
    }

    pub fn edge_publications(
        &self,
        a: &ConceptId,
        b: &ConceptId,
    ) -> Result<PublicationList, ExplorerError> {
        Ok(query::edge_publications(&self.bundle, a, b)?)
    }
}
