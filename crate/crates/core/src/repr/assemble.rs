use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chars::CharInventory;
use super::clr::ClrEncoder;
use super::desc::{avg_des, Descriptions};
use super::features::{bow_features, nsl_features, FeatureIndex, SparseFeatureVector};
use super::spec::{Level, RepresentationSpec};
use super::wlr::{wlr, WordLookup};
use crate::dataset::{EntityRecord, TypeSystem};
use crate::embed::{type_cosine_vector, EmbeddingKind, EmbeddingStore};
use crate::error::{shape_err, Error, Result};

/// Read-only inputs shared by every representation level.
#[derive(Debug, Clone)]
pub struct Resources {
    pub types: TypeSystem,
    stores: HashMap<EmbeddingKind, EmbeddingStore>,
    descriptions: Option<Descriptions>,
    idf: HashMap<String, f64>,
}

impl Resources {
    pub fn new(types: TypeSystem) -> Self {
        Resources {
            types,
            stores: HashMap::new(),
            descriptions: None,
            idf: HashMap::new(),
        }
    }

    pub fn with_store(mut self, store: EmbeddingStore) -> Self {
        self.stores.insert(store.kind(), store);
        self
    }

    pub fn with_descriptions(mut self, d: Descriptions) -> Self {
        self.idf = d.idf();
        self.descriptions = Some(d);
        self
    }

    pub fn store(&self, kind: EmbeddingKind) -> Result<&EmbeddingStore> {
        self.stores
            .get(&kind)
            .ok_or_else(|| Error::Config(format!("no {kind} embedding store loaded")))
    }

    pub fn descriptions(&self) -> Option<&Descriptions> {
        self.descriptions.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    /// Precomputed, not updated in training.
    Frozen,
    /// Output of the CLR encoder with this index.
    Clr(usize),
    /// Binary features over a fixed column index.
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub level: String,
    pub kind: SegmentKind,
    pub dim: usize,
}

/// The per-level inputs of one (entity, name) pair.
#[derive(Debug, Clone, PartialEq)]
pub enum InputPart {
    Dense(Vec<f64>),
    Chars(Vec<usize>),
    /// Sorted active columns.
    Sparse(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityInput {
    pub parts: Vec<InputPart>,
    /// Fallbacks taken while building the input (all-zero levels, empty names).
    pub flags: Vec<String>,
}

/// Fixed, non-trainable part of a representation: the level layout and
/// the sparse feature columns learned from training names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Featurizer {
    pub spec: RepresentationSpec,
    pub segments: Vec<Segment>,
    sparse: Vec<Option<FeatureIndex>>,
}

fn sparse_of(level: &Level, name: &str) -> SparseFeatureVector {
    match level {
        Level::Bow => bow_features(name),
        _ => nsl_features(name),
    }
}

impl Featurizer {
    /// Lays out `spec` and creates one randomly initialized encoder per CLR level.
    pub fn build<R: Rng>(
        spec: &RepresentationSpec,
        res: &Resources,
        train: &[EntityRecord],
        rng: &mut R,
    ) -> Result<(Featurizer, Vec<ClrEncoder>)> {
        spec.validate()?;
        let names: Vec<&str> = train.iter().flat_map(|e| e.names.iter().map(String::as_str)).collect();
        let mut segments = Vec::new();
        let mut sparse = Vec::new();
        let mut encoders = Vec::new();
        for level in &spec.levels {
            let mut index = None;
            let (kind, dim) = match level {
                Level::Clr(k, hyper) => {
                    let inv = CharInventory::build(names.iter().copied(), spec.char_min_count);
                    let enc = ClrEncoder::new(*k, hyper, inv, rng)?;
                    let dim = enc.output_dim();
                    encoders.push(enc);
                    (SegmentKind::Clr(encoders.len() - 1), dim)
                }
                Level::Bow | Level::Nsl => {
                    let feats: Vec<SparseFeatureVector> = names.iter().map(|n| sparse_of(level, n)).collect();
                    let idx = FeatureIndex::build(&feats);
                    let dim = idx.len();
                    index = Some(idx);
                    (SegmentKind::Sparse, dim)
                }
                Level::Wwlr(s) | Level::Elr(s) | Level::AvgDes { store: s, .. } => {
                    if matches!(level, Level::AvgDes { .. }) && res.descriptions.is_none() {
                        return Err(Error::Config("AVG-DES requested but no descriptions loaded".into()));
                    }
                    (SegmentKind::Frozen, res.store(*s)?.dim())
                }
                Level::Swlr => {
                    let store = res.store(EmbeddingKind::Subword)?;
                    if store.subwords().is_none() {
                        return Err(Error::Config("SWLR needs a store with a subword table".into()));
                    }
                    (SegmentKind::Frozen, store.dim())
                }
                Level::Tc(s) => {
                    let store = res.store(*s)?;
                    let missing: Vec<&str> = res
                        .types
                        .types()
                        .iter()
                        .filter(|t| store.type_vector(t).is_none())
                        .map(String::as_str)
                        .collect();
                    if !missing.is_empty() {
                        return Err(Error::MissingVector {
                            kind: "type",
                            key: missing.join(", "),
                        });
                    }
                    (SegmentKind::Frozen, res.types.len())
                }
            };
            segments.push(Segment {
                level: level.label(),
                kind,
                dim,
            });
            sparse.push(index);
        }
        Ok((
            Featurizer {
                spec: spec.clone(),
                segments,
                sparse,
            },
            encoders,
        ))
    }

    pub fn dim(&self) -> usize {
        self.segments.iter().map(|s| s.dim).sum()
    }

    /// `level:dim` pairs in concatenation order.
    pub fn layout(&self) -> String {
        self.segments
            .iter()
            .map(|s| format!("{}:{}", s.level, s.dim))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn input(&self, res: &Resources, encoders: &[ClrEncoder], entity: &str, name: &str) -> Result<EntityInput> {
        let mut parts = Vec::with_capacity(self.segments.len());
        let mut flags = Vec::new();
        let mut flag = |on: bool, what: &str| {
            if on {
                flags.push(what.to_string());
            }
        };
        for ((level, seg), index) in self.spec.levels.iter().zip(&self.segments).zip(&self.sparse) {
            let part = match (level, seg.kind) {
                (Level::Clr(..), SegmentKind::Clr(i)) => {
                    let enc = encoders
                        .get(i)
                        .ok_or_else(|| shape_err(format!("no encoder for CLR segment {i}")))?;
                    let (ids, empty) = enc.inventory.encode(name, enc.max_len)?;
                    flag(empty, "empty-name");
                    InputPart::Chars(ids)
                }
                (Level::Bow | Level::Nsl, _) => {
                    let idx = index.as_ref().expect("sparse levels carry an index");
                    InputPart::Sparse(idx.columns(&sparse_of(level, name)))
                }
                (Level::Wwlr(s), _) => {
                    let (v, none) = wlr(name, res.store(*s)?, WordLookup::Whole);
                    flag(none, "wwlr-zero");
                    InputPart::Dense(v)
                }
                (Level::Swlr, _) => {
                    let (v, none) = wlr(name, res.store(EmbeddingKind::Subword)?, WordLookup::Subword);
                    flag(none, "swlr-zero");
                    InputPart::Dense(v)
                }
                (Level::Elr(s), _) => {
                    let v = res.store(*s)?.entity(entity).ok_or_else(|| Error::MissingVector {
                        kind: "entity",
                        key: entity.to_string(),
                    })?;
                    InputPart::Dense(v.to_vec())
                }
                (Level::Tc(s), _) => InputPart::Dense(type_cosine_vector(entity, res.store(*s)?, &res.types)?),
                (Level::AvgDes { store, k }, _) => {
                    let desc = res.descriptions.as_ref().and_then(|d| d.get(entity)).unwrap_or(&[]);
                    let (v, none) = avg_des(desc, &res.idf, res.store(*store)?, *k)?;
                    flag(none, "avg-des-zero");
                    InputPart::Dense(v)
                }
                (Level::Clr(..), _) => return Err(shape_err("CLR level without an encoder slot")),
            };
            if let InputPart::Dense(v) = &part {
                if v.len() != seg.dim {
                    return Err(shape_err(format!(
                        "level {} produced {} values, layout expects {}",
                        seg.level,
                        v.len(),
                        seg.dim
                    )));
                }
            }
            parts.push(part);
        }
        Ok(EntityInput { parts, flags })
    }

    /// Per-segment dense values: CLR segments run their encoder, sparse
    /// segments expand to 0/1.
    pub fn segment_values(&self, input: &EntityInput, encoders: &[ClrEncoder]) -> Result<Vec<Vec<f64>>> {
        self.segments
            .iter()
            .zip(&input.parts)
            .map(|(seg, part)| match (part, seg.kind) {
                (InputPart::Dense(v), _) => Ok(v.clone()),
                (InputPart::Chars(ids), SegmentKind::Clr(i)) => Ok(encoders[i].forward(ids)?.output),
                (InputPart::Sparse(cols), _) => {
                    let mut v = vec![0.0; seg.dim];
                    cols.iter().for_each(|&c| v[c] = 1.0);
                    Ok(v)
                }
                _ => Err(shape_err(format!("input does not match segment {}", seg.level))),
            })
            .collect()
    }

    /// The full concatenated representation v(e).
    pub fn vector(&self, input: &EntityInput, encoders: &[ClrEncoder]) -> Result<Vec<f64>> {
        Ok(self.segment_values(input, encoders)?.concat())
    }
}

/// Debug rows `entity_id<TAB>level<TAB>dim<TAB>values…`, one per level,
/// using each entity's first name.
pub fn feature_dump(
    featurizer: &Featurizer,
    res: &Resources,
    encoders: &[ClrEncoder],
    entities: &[EntityRecord],
) -> Result<String> {
    let mut out = String::new();
    for e in entities {
        let input = featurizer.input(res, encoders, &e.id, e.name())?;
        let values = featurizer.segment_values(&input, encoders)?;
        for (seg, v) in featurizer.segments.iter().zip(values) {
            write!(out, "{}\t{}\t{}", e.id, seg.level, seg.dim).unwrap();
            for x in v {
                write!(out, "\t{x}").unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{entity_key, type_key};
    use crate::nn::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn resources() -> Resources {
        let types = TypeSystem::new(vec!["a".into(), "b".into(), "c".into()], &[]).unwrap();
        let keys = vec![
            entity_key("e1"),
            type_key("a"),
            type_key("b"),
            type_key("c"),
            "walter".to_string(),
            "leaf".to_string(),
        ];
        let m = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0, 0.0],
            vec![1.0, 2.0, 0.0, 0.0],
            vec![3.0, 4.0, 0.0, 0.0],
        ])
        .unwrap();
        Resources::new(types).with_store(EmbeddingStore::new(EmbeddingKind::Sskip, keys, m, None).unwrap())
    }

    fn train() -> Vec<EntityRecord> {
        vec![EntityRecord {
            id: "e1".into(),
            names: vec!["Walter Leaf".into()],
            gold_types: BTreeSet::from(["a".to_string()]),
            corpus_frequency: 10,
        }]
    }

    #[test]
    fn elr_plus_tc_dim_and_values() {
        let res = resources();
        let spec = RepresentationSpec::parse("elr,tc").unwrap();
        let (f, enc) = Featurizer::build(&spec, &res, &train(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(f.dim(), 4 + 3);
        let input = f.input(&res, &enc, "e1", "Walter Leaf").unwrap();
        assert_eq!(f.vector(&input, &enc).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
    }

    #[test]
    fn single_wwlr_level_equals_wlr() {
        let res = resources();
        let spec = RepresentationSpec::parse("wwlr").unwrap();
        let (f, enc) = Featurizer::build(&spec, &res, &train(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let input = f.input(&res, &enc, "e1", "Walter Leaf").unwrap();
        let direct = wlr("Walter Leaf", res.store(EmbeddingKind::Sskip).unwrap(), WordLookup::Whole).0;
        assert_eq!(f.vector(&input, &enc).unwrap(), direct);
    }

    #[test]
    fn missing_entity_is_named() {
        let res = resources();
        let spec = RepresentationSpec::parse("elr").unwrap();
        let (f, enc) = Featurizer::build(&spec, &res, &train(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let err = f.input(&res, &enc, "ghost", "x").unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn order_changes_layout_not_content() {
        let res = resources();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, _) = Featurizer::build(&RepresentationSpec::parse("bow,elr").unwrap(), &res, &train(), &mut rng).unwrap();
        let (b, _) = Featurizer::build(&RepresentationSpec::parse("elr,bow").unwrap(), &res, &train(), &mut rng).unwrap();
        assert_ne!(a.layout(), b.layout());
        let mut la: Vec<_> = a.layout().split(',').map(String::from).collect();
        let mut lb: Vec<_> = b.layout().split(',').map(String::from).collect();
        la.sort();
        lb.sort();
        assert_eq!(la, lb);
    }

    #[test]
    fn every_subset_dim_is_the_sum() {
        let res = resources();
        let all = ["elr", "tc", "wwlr", "bow", "nsl", "clr-cnn", "clr-forward"];
        let single: Vec<usize> = all
            .iter()
            .map(|l| {
                let spec = RepresentationSpec::parse(l).unwrap();
                Featurizer::build(&spec, &res, &train(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap().0.dim()
            })
            .collect();
        for mask in 1u32..(1 << all.len()) {
            let chosen: Vec<usize> = (0..all.len()).filter(|i| mask & (1 << i) != 0).collect();
            let spec = RepresentationSpec::parse(&chosen.iter().map(|&i| all[i]).collect::<Vec<_>>().join(",")).unwrap();
            let (f, enc) = Featurizer::build(&spec, &res, &train(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            let expect: usize = chosen.iter().map(|&i| single[i]).sum();
            assert_eq!(f.dim(), expect);
            let input = f.input(&res, &enc, "e1", "Walter Leaf").unwrap();
            assert_eq!(f.vector(&input, &enc).unwrap().len(), expect);
        }
    }

    #[test]
    fn missing_store_or_types_is_a_config_error() {
        let res = resources();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(Featurizer::build(&RepresentationSpec::parse("swlr").unwrap(), &res, &train(), &mut rng).is_err());
        assert!(Featurizer::build(&RepresentationSpec::parse("elr-skip").unwrap(), &res, &train(), &mut rng).is_err());
        assert!(Featurizer::build(&RepresentationSpec::parse("avg-des").unwrap(), &res, &train(), &mut rng).is_err());
    }

    #[test]
    fn dump_has_one_row_per_level() {
        let res = resources();
        let spec = RepresentationSpec::parse("elr,tc").unwrap();
        let (f, enc) = Featurizer::build(&spec, &res, &train(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let dump = feature_dump(&f, &res, &enc, &train()).unwrap();
        let rows: Vec<&str> = dump.lines().collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].starts_with("e1\ttc-sskip\t3\t1\t0\t-1"));
    }
}
