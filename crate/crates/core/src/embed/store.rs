use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{entity_key, type_key, SubwordIndex};
use crate::dataset::TypeSystem;
use crate::error::{shape_err, Error, Result};
use crate::nn::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EmbeddingKind {
    Skip,
    Sskip,
    Subword,
}

impl EmbeddingKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "skip" => Some(EmbeddingKind::Skip),
            "sskip" => Some(EmbeddingKind::Sskip),
            "subword" => Some(EmbeddingKind::Subword),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EmbeddingKind::Skip => "skip",
            EmbeddingKind::Sskip => "sskip",
            EmbeddingKind::Subword => "subword",
        }
    }
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Ngram vectors of a subword model; words are composed as the mean of
/// their indexed ngram vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SubwordTable {
    pub index: SubwordIndex,
    pub vectors: Matrix,
}

impl SubwordTable {
    /// Mean of the word's indexed ngram vectors; `None` when none is indexed.
    pub fn compose(&self, word: &str) -> Option<Vec<f64>> {
        let ids = self.index.ngram_ids(word);
        if ids.is_empty() {
            return None;
        }
        let mut v = vec![0.0; self.vectors.cols()];
        for &i in &ids {
            crate::nn::axpy(1.0, self.vectors.row(i), &mut v);
        }
        let n = ids.len() as f64;
        v.iter_mut().for_each(|x| *x /= n);
        Some(v)
    }
}

/// Token keys mapped to vectors of one fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    kind: EmbeddingKind,
    keys: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Matrix,
    subwords: Option<SubwordTable>,
}

impl EmbeddingStore {
    pub fn new(
        kind: EmbeddingKind,
        keys: Vec<String>,
        vectors: Matrix,
        subwords: Option<SubwordTable>,
    ) -> Result<Self> {
        if keys.len() != vectors.rows() {
            return Err(shape_err(format!(
                "{} keys for {} vectors",
                keys.len(),
                vectors.rows()
            )));
        }
        if let Some(t) = &subwords {
            if t.vectors.cols() != vectors.cols() || t.vectors.rows() != t.index.len() {
                return Err(shape_err("subword table disagrees with the store".to_string()));
            }
            if !t.vectors.as_slice().iter().all(|x| x.is_finite()) {
                return Err(Error::Numeric("non-finite subword vector".into()));
            }
        }
        if let Some(i) = vectors.as_slice().iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite value in the vector of `{}`",
                keys[i / vectors.cols().max(1)]
            )));
        }
        let mut index = HashMap::with_capacity(keys.len());
        for (i, k) in keys.iter().enumerate() {
            if index.insert(k.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate embedding key `{k}`")));
            }
        }
        Ok(EmbeddingStore {
            kind,
            keys,
            index,
            vectors,
            subwords,
        })
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn subwords(&self) -> Option<&SubwordTable> {
        self.subwords.as_ref()
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.index.get(key).map(|&i| self.vectors.row(i))
    }

    pub fn entity(&self, id: &str) -> Option<&[f64]> {
        self.get(&entity_key(id))
    }

    pub fn type_vector(&self, id: &str) -> Option<&[f64]> {
        self.get(&type_key(id))
    }

    /// Stored vector for `word`, or for subword stores the composition of
    /// its ngrams. `None` when neither exists.
    pub fn word_or_compose(&self, word: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.get(word) {
            return Some(v.to_vec());
        }
        self.subwords.as_ref().and_then(|t| t.compose(word))
    }

    /// Writes `count dim` followed by `key v1 … vd` rows. Subword stores also
    /// write their ngram table to `<path>.ngrams` with header
    /// `count dim n_min n_max min_count`.
    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_rows(path, &format!("{} {}", self.len(), self.dim()), &self.keys, &self.vectors)?;
        if let Some(t) = &self.subwords {
            let p = ngram_path(path);
            let header = format!(
                "{} {} {} {} {}",
                t.index.len(),
                self.dim(),
                t.index.n_min,
                t.index.n_max,
                t.index.min_count
            );
            write_rows(&p, &header, t.index.ngrams(), &t.vectors)?;
        }
        Ok(())
    }

    /// Reads a store written by [`save_text`](Self::save_text). A sibling
    /// `.ngrams` file, if present, marks a subword store.
    pub fn load_text(path: impl AsRef<Path>, kind: EmbeddingKind) -> Result<Self> {
        let path = path.as_ref();
        let (header, keys, vectors) = read_rows(path)?;
        check_header(path, &header, keys.len(), vectors.cols(), 2)?;
        let np = ngram_path(path);
        let subwords = if np.exists() {
            let (h, grams, gv) = read_rows(&np)?;
            check_header(&np, &h, grams.len(), gv.cols(), 5)?;
            let n_min = h[2] as usize;
            let n_max = h[3] as usize;
            let index = SubwordIndex::from_ngrams(grams, n_min, n_max, h[4]);
            Some(SubwordTable { index, vectors: gv })
        } else {
            None
        };
        let kind = if subwords.is_some() { EmbeddingKind::Subword } else { kind };
        EmbeddingStore::new(kind, keys, vectors, subwords)
    }
}

fn ngram_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".ngrams");
    PathBuf::from(s)
}

fn write_rows(path: &Path, header: &str, keys: &[String], m: &Matrix) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        for (i, k) in keys.iter().enumerate() {
            write!(w, "{k}")?;
            for v in m.row(i) {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

fn read_rows(path: &Path) -> Result<(Vec<u64>, Vec<String>, Matrix)> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut lines = BufReader::new(f).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::parse(&origin, 1, "missing `count dim` header"))?
        .map_err(|e| Error::io(path, e))?;
    let header: Vec<u64> = header_line
        .split_whitespace()
        .map(|x| x.parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(&origin, 1, "malformed header"))?;
    if header.len() < 2 {
        return Err(Error::parse(&origin, 1, "header needs `count dim`"));
    }
    let dim = header[1] as usize;
    let mut keys = Vec::new();
    let mut data = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let key = parts.next().unwrap_or_default();
        let before = data.len();
        for p in parts {
            let v: f64 = p
                .parse()
                .map_err(|_| Error::parse(&origin, i + 2, format!("bad number `{p}`")))?;
            data.push(v);
        }
        if data.len() - before != dim {
            return Err(Error::parse(
                &origin,
                i + 2,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        keys.push(key.to_string());
    }
    let m = Matrix::from_vec(keys.len(), dim, data)?;
    Ok((header, keys, m))
}

fn check_header(path: &Path, h: &[u64], rows: usize, dim: usize, fields: usize) -> Result<()> {
    if h.len() != fields || h[0] as usize != rows || h[1] as usize != dim {
        return Err(Error::parse(
            path.display().to_string(),
            1,
            format!("header {h:?} does not match {rows} rows of dimension {dim}"),
        ));
    }
    Ok(())
}

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(shape_err(format!("cosine of vectors of length {} and {}", a.len(), b.len())));
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine of the entity's vector with every type vector, in type order.
pub fn type_cosine_vector(entity: &str, store: &EmbeddingStore, types: &TypeSystem) -> Result<Vec<f64>> {
    let v = store.entity(entity).ok_or_else(|| Error::MissingVector {
        kind: "entity",
        key: entity.to_string(),
    })?;
    types
        .types()
        .iter()
        .map(|t| {
            let tv = store.type_vector(t).ok_or_else(|| Error::MissingVector {
                kind: "type",
                key: t.clone(),
            })?;
            cosine(v, tv)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_cases() {
        assert!((cosine(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, -2.0], &[-1.0, 2.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0], &[1.0, 2.0]).is_err());
    }

    fn store_with(entries: &[(&str, Vec<f64>)]) -> EmbeddingStore {
        let keys = entries.iter().map(|(k, _)| k.to_string()).collect();
        let rows: Vec<Vec<f64>> = entries.iter().map(|(_, v)| v.clone()).collect();
        EmbeddingStore::new(EmbeddingKind::Skip, keys, Matrix::from_rows(&rows).unwrap(), None).unwrap()
    }

    #[test]
    fn type_cosine_components() {
        let types = TypeSystem::parse("person\nlocation\n", "h").unwrap();
        let s = store_with(&[
            ("ENT:m.1", vec![1.0, 0.0]),
            ("ENT:m.2", vec![0.0, 0.0]),
            ("TYPE:person", vec![2.0, 0.0]),
            ("TYPE:location", vec![0.0, 1.0]),
        ]);
        assert_eq!(type_cosine_vector("m.1", &s, &types).unwrap(), vec![1.0, 0.0]);
        assert_eq!(type_cosine_vector("m.2", &s, &types).unwrap(), vec![0.0, 0.0]);
        let err = type_cosine_vector("m.9", &s, &types).unwrap_err();
        assert!(err.to_string().contains("m.9"));
    }

    #[test]
    fn tc_length_matches_type_count() {
        let names: Vec<String> = (0..102).map(|i| format!("t{i}")).collect();
        let types = TypeSystem::new(names.clone(), &[]).unwrap();
        let mut entries = vec![("ENT:e".to_string(), vec![1.0, 0.5, -0.25])];
        for (i, n) in names.iter().enumerate() {
            entries.push((format!("TYPE:{n}"), vec![i as f64, 1.0, 0.0]));
        }
        let keys = entries.iter().map(|(k, _)| k.clone()).collect();
        let rows: Vec<Vec<f64>> = entries.into_iter().map(|(_, v)| v).collect();
        let s = EmbeddingStore::new(EmbeddingKind::Skip, keys, Matrix::from_rows(&rows).unwrap(), None)
            .unwrap();
        assert_eq!(type_cosine_vector("e", &s, &types).unwrap().len(), 102);
    }

    #[test]
    fn rejects_non_finite_and_duplicates() {
        let m = Matrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(EmbeddingStore::new(EmbeddingKind::Skip, vec!["a".into()], m, None).is_err());
        let m = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(EmbeddingStore::new(EmbeddingKind::Skip, vec!["a".into(), "a".into()], m, None).is_err());
    }

    #[test]
    fn text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.vec");
        let s = store_with(&[("a", vec![0.1, -1e-17]), ("ENT:m.1", vec![3.0, 1.0 / 3.0])]);
        s.save_text(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("2 2\n"));
        assert_eq!(EmbeddingStore::load_text(&p, EmbeddingKind::Skip).unwrap(), s);
    }
}
