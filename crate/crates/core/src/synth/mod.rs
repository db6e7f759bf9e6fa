//! Synthetic corpora and datasets for self-contained experiments.

mod mixed;
mod order;

pub use mixed::{generate_synthetic, SyntheticData, SyntheticSpec};
pub use order::{order_corpus, OrderCorpus, OrderCorpusSpec};
