use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{TokenKind, Vocabulary};
use crate::error::{Error, Result};

pub const BOW: char = '<';
pub const EOW: char = '>';

/// Character ngrams of `<word>` with lengths in `n_min..=n_max`, in order of
/// length then position, followed by the whole bracketed word as one unit.
/// Ngrams as long as the bracketed word are covered by the whole-word unit
/// and not repeated. Duplicates are kept.
pub fn extract_subwords(word: &str, n_min: usize, n_max: usize) -> Vec<String> {
    if word.is_empty() {
        return Vec::new();
    }
    let chars: Vec<char> = std::iter::once(BOW)
        .chain(word.chars())
        .chain(std::iter::once(EOW))
        .collect();
    let len = chars.len();
    let mut out = Vec::new();
    for n in n_min.max(1)..=n_max {
        if n >= len {
            break;
        }
        for start in 0..=len - n {
            out.push(chars[start..start + n].iter().collect());
        }
    }
    out.push(chars.iter().collect());
    out
}

/// Explicit ngram inventory; ngrams below `min_count` are not indexed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubwordIndex {
    ngrams: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pub n_min: usize,
    pub n_max: usize,
    pub min_count: u64,
}

impl SubwordIndex {
    /// Counts ngrams over the vocabulary's word tokens, weighted by token
    /// count, and indexes those seen at least `min_count` times. Indices are
    /// assigned by descending count, ties lexicographic.
    pub fn build(vocab: &Vocabulary, n_min: usize, n_max: usize, min_count: u64) -> Result<Self> {
        if n_min < 1 || n_min > n_max {
            return Err(Error::Config(format!(
                "subword bounds must satisfy 1 <= n_min <= n_max, got {n_min}..{n_max}"
            )));
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        for (i, t) in vocab.tokens().iter().enumerate() {
            if t.kind() != TokenKind::Word {
                continue;
            }
            for g in extract_subwords(t.text(), n_min, n_max) {
                *counts.entry(g).or_insert(0) += vocab.count(i);
            }
        }
        let mut entries: Vec<(String, u64)> =
            counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(Self::from_ngrams(
            entries.into_iter().map(|(g, _)| g).collect(),
            n_min,
            n_max,
            min_count,
        ))
    }

    pub fn from_ngrams(ngrams: Vec<String>, n_min: usize, n_max: usize, min_count: u64) -> Self {
        let index = ngrams.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        SubwordIndex {
            ngrams,
            index,
            n_min,
            n_max,
            min_count,
        }
    }

    /// Restores the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.ngrams.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
    }

    pub fn len(&self) -> usize {
        self.ngrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }

    pub fn ngrams(&self) -> &[String] {
        &self.ngrams
    }

    pub fn index_of(&self, ngram: &str) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    /// Indices of the word's indexed ngrams, in extraction order, duplicates kept.
    pub fn ngram_ids(&self, word: &str) -> Vec<usize> {
        extract_subwords(word, self.n_min, self.n_max)
            .iter()
            .filter_map(|g| self.index_of(g))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, Token, TokenStream};

    #[test]
    fn hand_enumerations() {
        assert_eq!(extract_subwords("ab", 2, 3), ["<a", "ab", "b>", "<ab", "ab>", "<ab>"]);
        assert_eq!(extract_subwords("x", 3, 3), ["<x>"]);
        assert_eq!(extract_subwords("aa", 2, 2), ["<a", "aa", "a>", "<aa>"]);
        assert!(extract_subwords("", 3, 6).is_empty());
    }

    #[test]
    fn multibyte_characters_are_units() {
        assert_eq!(extract_subwords("é", 2, 2), ["<é", "é>", "<é>"]);
    }

    #[test]
    fn index_thresholds_and_lookup() {
        let mut s = Vec::new();
        for _ in 0..5 {
            s.push(Token::Word("lake".into()));
        }
        s.push(Token::Word("lakes".into()));
        s.push(Token::Entity("m.1".into()));
        let vocab = build_vocabulary(&TokenStream { sentences: vec![s] }, 1).unwrap();
        let idx = SubwordIndex::build(&vocab, 3, 4, 5).unwrap();
        assert!(idx.index_of("<la").is_some());
        assert!(idx.index_of("<lake>").is_some());
        assert!(idx.index_of("<lakes>").is_none());
        assert!(idx.index_of("es>").is_none());
        assert!(idx.index_of("<m.").is_none());
        // "lakelet" shares indexed ngrams with "lake" but its own whole-word unit is absent.
        let ids = idx.ngram_ids("lakelet");
        assert!(!ids.is_empty());
        assert!(idx.ngram_ids("zzz").is_empty());
        assert!(SubwordIndex::build(&vocab, 4, 3, 1).is_err());
    }
}
