use std::collections::HashMap;

use super::{Token, TokenKind, TokenStream};
use crate::error::{Error, Result};

/// Token inventory with counts. Word tokens below `min_count` are dropped;
/// entity and type tokens are always kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<Token>,
    counts: Vec<u64>,
    index: HashMap<Token, usize>,
    min_count: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn index_of(&self, t: &Token) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn token(&self, i: usize) -> &Token {
        &self.tokens[i]
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Maps every sentence to vocabulary indices, dropping unknown tokens.
    pub fn encode(&self, stream: &TokenStream) -> Vec<Vec<u32>> {
        stream
            .sentences
            .iter()
            .map(|s| {
                s.iter()
                    .filter_map(|t| self.index_of(t).map(|i| i as u32))
                    .collect()
            })
            .collect()
    }
}

/// Counts tokens and assigns dense indices by descending count, ties broken
/// by key in lexicographic order.
pub fn build_vocabulary(stream: &TokenStream, min_count: u64) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    if stream.is_empty() {
        return Err(Error::Validation("cannot build a vocabulary from an empty stream".into()));
    }
    let mut counts: HashMap<&Token, u64> = HashMap::new();
    for t in stream.sentences.iter().flatten() {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut entries: Vec<(String, &Token, u64)> = counts
        .into_iter()
        .filter(|(t, c)| t.kind() != TokenKind::Word || *c >= min_count)
        .map(|(t, c)| (t.key(), t, c))
        .collect();
    entries.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    let tokens: Vec<Token> = entries.iter().map(|(_, t, _)| (*t).clone()).collect();
    let counts = entries.iter().map(|e| e.2).collect();
    let index = tokens.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    Ok(Vocabulary {
        tokens,
        counts,
        index,
        min_count,
    })
}
