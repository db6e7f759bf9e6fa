//! Entity representations at character, word and entity level, hand-crafted
//! name features, and their concatenation into one input vector.

mod assemble;
pub mod chars;
mod clr;
mod desc;
mod features;
mod spec;
mod wlr;

pub use assemble::{feature_dump, EntityInput, Featurizer, InputPart, Resources, Segment, SegmentKind};
pub use chars::{char_lookup, CharInventory, CharMatrix};
pub use clr::{ClrEncoder, ClrHyper, ClrKind, ClrNet, ClrTrace, DEFAULT_MAX_LEN};
pub use desc::{avg_des, rank_by_tfidf, Descriptions};
pub use features::{bow_features, name_shape, normalize_name, nsl_features, FeatureIndex, SparseFeatureVector};
pub use spec::{Level, RepresentationSpec, DEFAULT_CHAR_MIN_COUNT, DEFAULT_DES_K};
pub use wlr::{wlr, word_vector, WordLookup};
