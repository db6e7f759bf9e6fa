use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use super::wlr::{word_vector, WordLookup};
use crate::corpus::tokenize;
use crate::embed::EmbeddingStore;
use crate::error::{Error, Result};

/// Tokenized entity descriptions keyed by entity id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Descriptions {
    pub texts: BTreeMap<String, Vec<String>>,
}

impl Descriptions {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Rows `entity_id<TAB>free text`; blank lines are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut texts = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (id, body) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `entity_id<TAB>text`"))?;
            if texts.insert(id.to_string(), tokenize(body)).is_some() {
                return Err(Error::parse(origin, i + 1, format!("duplicate description for `{id}`")));
            }
        }
        Ok(Descriptions { texts })
    }

    pub fn get(&self, id: &str) -> Option<&[String]> {
        self.texts.get(id).map(Vec::as_slice)
    }

    /// `log(N / df)` for every word of the collection.
    pub fn idf(&self) -> HashMap<String, f64> {
        let n = self.texts.len() as f64;
        let mut df: HashMap<String, usize> = HashMap::new();
        for toks in self.texts.values() {
            let distinct: HashSet<&String> = toks.iter().collect();
            for w in distinct {
                *df.entry(w.clone()).or_insert(0) += 1;
            }
        }
        df.into_iter().map(|(w, d)| (w, (n / d as f64).ln())).collect()
    }
}

/// Description words ordered by tf·idf, highest first, ties lexicographic.
pub fn rank_by_tfidf(description: &[String], idf: &HashMap<String, f64>) -> Vec<(String, f64)> {
    let mut tf: BTreeMap<&str, usize> = BTreeMap::new();
    for w in description {
        *tf.entry(w).or_insert(0) += 1;
    }
    let mut ranked: Vec<(String, f64)> = tf
        .into_iter()
        .map(|(w, c)| (w.to_string(), c as f64 * idf.get(w).copied().unwrap_or(0.0)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Mean vector of the `k` best-ranked description words present in `store`.
/// The flag is set when none is present (result is the zero vector).
pub fn avg_des(
    description: &[String],
    idf: &HashMap<String, f64>,
    store: &EmbeddingStore,
    k: usize,
) -> Result<(Vec<f64>, bool)> {
    if k == 0 {
        return Err(Error::Config("AVG-DES needs k ≥ 1".into()));
    }
    let mut sum = vec![0.0; store.dim()];
    let mut n = 0;
    for (w, _) in rank_by_tfidf(description, idf) {
        if n == k {
            break;
        }
        if let Some(v) = word_vector(&w, store, WordLookup::Whole) {
            crate::nn::axpy(1.0, &v, &mut sum);
            n += 1;
        }
    }
    if n == 0 {
        return Ok((sum, true));
    }
    sum.iter_mut().for_each(|x| *x /= n as f64);
    Ok((sum, false))
}
