//! Skip-gram, structured skip-gram and subword skip-gram embeddings with
//! negative sampling, the shared embedding store, cosine similarity and the
//! type-cosine feature.

pub mod probe;
mod sgns;
mod store;

pub use sgns::{
    train_sgns, train_sgns_model, train_subword_model, train_subword_sgns, unigram_table, SgnsConfig,
    SgnsModel,
};
pub use store::{cosine, type_cosine_vector, EmbeddingKind, EmbeddingStore, SubwordTable};
