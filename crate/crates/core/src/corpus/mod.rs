//! Annotated corpus parsing, the three-copy token stream that puts words,
//! entities and types into one embedding space, vocabularies and subword
//! inventories.

mod annotated;
mod stream;
mod subword;
mod vocab;

pub use annotated::{parse_line, tokenize, AnnotatedCorpus, Mention, Sentence};
pub use stream::{
    build_three_copy_corpus, entity_key, load_notable_types, parse_notable_types, type_key, Token,
    TokenKind, TokenStream,
};
pub use subword::{extract_subwords, SubwordIndex, BOW, EOW};
pub use vocab::{build_vocabulary, Vocabulary};
