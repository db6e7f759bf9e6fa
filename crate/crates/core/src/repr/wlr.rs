use crate::embed::EmbeddingStore;

/// How missing name words are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordLookup {
    /// Whole-word vectors only.
    Whole,
    /// Whole-word vectors, then subword composition for words still missing.
    Subword,
}

/// Vector for one name word: as-is, then lowercased, then (for subword
/// lookup) composed from ngrams in the same order.
pub fn word_vector(word: &str, store: &EmbeddingStore, lookup: WordLookup) -> Option<Vec<f64>> {
    let lower = word.to_lowercase();
    if let Some(v) = store.get(word).or_else(|| store.get(&lower)) {
        return Some(v.to_vec());
    }
    match lookup {
        WordLookup::Whole => None,
        WordLookup::Subword => {
            let table = store.subwords()?;
            table.compose(word).or_else(|| table.compose(&lower))
        }
    }
}

/// Mean of the available name-word vectors. The flag is set when no word
/// had a vector, in which case the result is the zero vector.
pub fn wlr(name: &str, store: &EmbeddingStore, lookup: WordLookup) -> (Vec<f64>, bool) {
    let mut sum = vec![0.0; store.dim()];
    let mut n = 0usize;
    for w in name.split_whitespace() {
        if let Some(v) = word_vector(w, store, lookup) {
            crate::nn::axpy(1.0, &v, &mut sum);
            n += 1;
        }
    }
    if n == 0 {
        return (sum, true);
    }
    sum.iter_mut().for_each(|x| *x /= n as f64);
    (sum, false)
}
