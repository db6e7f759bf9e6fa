//! Hand-crafted sparse name features: bag of words (BOW) and
//! ngram/shape/length (NSL).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Binary sparse features, identified by name.
pub type SparseFeatureVector = BTreeSet<String>;

pub fn bow_features(name: &str) -> SparseFeatureVector {
    let mut f = BTreeSet::new();
    for w in name.split_whitespace() {
        f.insert(format!("w={w}"));
        f.insert(format!("wl={}", w.to_lowercase()));
    }
    f
}

fn char_class(c: char) -> char {
    if c.is_uppercase() {
        'A'
    } else if c.is_alphabetic() {
        'a'
    } else if c.is_numeric() {
        '7'
    } else {
        '.'
    }
}

/// Per-token character classes with runs collapsed, tokens joined by spaces.
pub fn name_shape(name: &str) -> String {
    let tokens: Vec<String> = name
        .split_whitespace()
        .map(|tok| {
            let mut s = String::new();
            for c in tok.chars().map(char_class) {
                if !s.ends_with(c) {
                    s.push(c);
                }
            }
            s
        })
        .collect();
    tokens.join(" ")
}

fn length_bucket(n: usize) -> &'static str {
    match n {
        0..=5 => "1-5",
        6..=10 => "6-10",
        11..=20 => "11-20",
        _ => "21+",
    }
}

/// Lowercases, maps digits to `7` and punctuation to `.`; whitespace is kept.
pub fn normalize_name(name: &str) -> String {
    name.chars()
        .flat_map(char::to_lowercase)
        .map(|c| {
            if c.is_numeric() {
                '7'
            } else if c.is_alphabetic() || c.is_whitespace() {
                c
            } else {
                '.'
            }
        })
        .collect()
}

fn char_ngrams(text: &str, max_n: usize, prefix: &str, out: &mut SparseFeatureVector) {
    let chars: Vec<char> = format!("^{text}$").chars().collect();
    for n in 1..=max_n {
        for w in chars.windows(n) {
            out.insert(format!("{prefix}{}", w.iter().collect::<String>()));
        }
    }
}

pub fn nsl_features(name: &str) -> SparseFeatureVector {
    let mut f = BTreeSet::new();
    if name.trim().is_empty() {
        return f;
    }
    f.insert(format!("shape={}", name_shape(name)));
    f.insert(format!("len={}", length_bucket(name.chars().count())));
    f.insert(format!("ntok={}", name.split_whitespace().count()));
    char_ngrams(name, 5, "ng=", &mut f);
    char_ngrams(&normalize_name(name), 5, "nng=", &mut f);
    f
}

/// Column ids of the features seen while building; unseen features are dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureIndex {
    index: BTreeMap<String, usize>,
}

impl FeatureIndex {
    pub fn build<'a>(vectors: impl IntoIterator<Item = &'a SparseFeatureVector>) -> Self {
        let all: BTreeSet<&String> = vectors.into_iter().flatten().collect();
        FeatureIndex {
            index: all.into_iter().cloned().enumerate().map(|(i, f)| (f, i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Sorted active column ids.
    pub fn columns(&self, v: &SparseFeatureVector) -> Vec<usize> {
        let mut ids: Vec<usize> = v.iter().filter_map(|f| self.index.get(f).copied()).collect();
        ids.sort_unstable();
        ids
    }
}
