//! Entities, the type hierarchy, dataset splits and test-set slices.
//!
//! Dataset files are UTF-8 TSV with `#train`, `#dev` and `#test` section
//! markers and rows `id<TAB>name1|name2|name3<TAB>t1,t2,...<TAB>frequency`.
//! Names are listed most frequent first; train entities keep at most
//! [`MAX_TRAIN_NAMES`] of them, dev and test entities keep only the first.
//! Generated datasets list equally frequent names in lexicographic order.

mod types;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

pub use types::TypeSystem;

use crate::error::{Error, Result};

pub const MAX_TRAIN_NAMES: usize = 3;

/// Test entities mentioned more than this many times are "head".
pub const HEAD_MIN_EXCLUSIVE: u64 = 100;
/// Test entities mentioned fewer than this many times are "tail".
pub const TAIL_MAX_EXCLUSIVE: u64 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRecord {
    pub id: String,
    pub names: Vec<String>,
    pub gold_types: BTreeSet<String>,
    pub corpus_frequency: u64,
}

impl EntityRecord {
    /// The most frequent name.
    pub fn name(&self) -> &str {
        &self.names[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Train,
    Dev,
    Test,
}

impl Part {
    pub fn label(self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Dev => "dev",
            Part::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<EntityRecord>,
    pub dev: Vec<EntityRecord>,
    pub test: Vec<EntityRecord>,
}

impl DatasetSplit {
    pub fn part(&self, part: Part) -> &[EntityRecord] {
        match part {
            Part::Train => &self.train,
            Part::Dev => &self.dev,
            Part::Test => &self.test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.dev.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &EntityRecord> {
        self.train.iter().chain(&self.dev).chain(&self.test)
    }

    pub fn test_ids(&self) -> HashSet<&str> {
        self.test.iter().map(|e| e.id.as_str()).collect()
    }

    /// Checks every split invariant against `types`.
    pub fn validate(&self, types: &TypeSystem) -> Result<()> {
        let mut seen: HashMap<&str, Part> = HashMap::new();
        for part in [Part::Train, Part::Dev, Part::Test] {
            for e in self.part(part) {
                if let Some(prev) = seen.insert(&e.id, part) {
                    return Err(Error::Validation(format!(
                        "entity `{}` appears in both {} and {}",
                        e.id,
                        prev.label(),
                        part.label()
                    )));
                }
                validate_record(e, part, types)?;
            }
        }
        Ok(())
    }

    /// Adds every ancestor type to every entity's gold set.
    pub fn close_under_parents(&self, types: &TypeSystem) -> DatasetSplit {
        let close = |v: &[EntityRecord]| v.iter().map(|e| close_under_parents(e, types)).collect();
        DatasetSplit {
            train: close(&self.train),
            dev: close(&self.dev),
            test: close(&self.test),
        }
    }

    /// Serializes in the dataset TSV format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for part in [Part::Train, Part::Dev, Part::Test] {
            let _ = writeln!(out, "#{}", part.label());
            for e in self.part(part) {
                let types: Vec<&str> = e.gold_types.iter().map(String::as_str).collect();
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    e.id,
                    e.names.join("|"),
                    types.join(","),
                    e.corpus_frequency
                );
            }
        }
        out
    }
}

fn validate_record(e: &EntityRecord, part: Part, types: &TypeSystem) -> Result<()> {
    if e.names.is_empty() || e.names.iter().any(|n| n.trim().is_empty()) {
        return Err(Error::Validation(format!("entity `{}` has an empty name", e.id)));
    }
    let max = if part == Part::Train { MAX_TRAIN_NAMES } else { 1 };
    if e.names.len() > max {
        return Err(Error::Validation(format!(
            "{} entity `{}` carries {} names (at most {max})",
            part.label(),
            e.id,
            e.names.len()
        )));
    }
    for t in &e.gold_types {
        if types.index_of(t).is_none() {
            return Err(Error::Validation(format!(
                "entity `{}` has unknown type `{t}`",
                e.id
            )));
        }
    }
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>, types: &TypeSystem) -> Result<DatasetSplit> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, &path.display().to_string(), types)
}

/// Parses dataset TSV text; `origin` names the source in error messages.
pub fn parse_dataset(text: &str, origin: &str, types: &TypeSystem) -> Result<DatasetSplit> {
    let mut split = DatasetSplit::default();
    let mut part: Option<Part> = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        match line.trim() {
            "#train" => {
                part = Some(Part::Train);
                continue;
            }
            "#dev" => {
                part = Some(Part::Dev);
                continue;
            }
            "#test" => {
                part = Some(Part::Test);
                continue;
            }
            _ => {}
        }
        let Some(part) = part else {
            return Err(Error::parse(origin, lineno, "row before any #train/#dev/#test section"));
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::parse(origin, lineno, "empty entity id"));
        }
        let mut names: Vec<String> = Vec::new();
        for n in fields[1].split('|') {
            let n = n.trim();
            if n.is_empty() {
                return Err(Error::parse(origin, lineno, "empty entity name"));
            }
            names.push(n.to_string());
        }
        names.truncate(if part == Part::Train { MAX_TRAIN_NAMES } else { 1 });
        let mut gold_types = BTreeSet::new();
        for t in fields[2].split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if types.index_of(t).is_none() {
                return Err(Error::parse(origin, lineno, format!("unknown type `{t}`")));
            }
            gold_types.insert(t.to_string());
        }
        let corpus_frequency = fields[3].trim().parse::<u64>().map_err(|_| {
            Error::parse(origin, lineno, format!("bad frequency `{}`", fields[3].trim()))
        })?;
        let record = EntityRecord {
            id: id.to_string(),
            names,
            gold_types,
            corpus_frequency,
        };
        match part {
            Part::Train => split.train.push(record),
            Part::Dev => split.dev.push(record),
            Part::Test => split.test.push(record),
        }
    }
    if split.is_empty() {
        return Err(Error::Validation(format!("{origin}: no entities")));
    }
    split.validate(types)?;
    Ok(split)
}

/// Smallest superset of the entity's gold types that is closed under `parent`.
pub fn close_under_parents(e: &EntityRecord, types: &TypeSystem) -> EntityRecord {
    let mut gold = e.gold_types.clone();
    for t in &e.gold_types {
        if let Some(idx) = types.index_of(t) {
            for a in types.ancestors(idx) {
                gold.insert(types.name(a).to_string());
            }
        }
    }
    EntityRecord {
        gold_types: gold,
        ..e.clone()
    }
}

/// Case-folded whitespace tokens of a name; the unit for known/unknown slicing.
pub fn name_words(name: &str) -> impl Iterator<Item = String> + '_ {
    name.split_whitespace().map(str::to_lowercase)
}

/// Indices into `split.test` for each evaluation slice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntitySlices {
    pub all: Vec<usize>,
    pub head: Vec<usize>,
    pub tail: Vec<usize>,
    pub known: Vec<usize>,
    pub unknown: Vec<usize>,
}

impl EntitySlices {
    pub fn get(&self, slice: Slice) -> &[usize] {
        match slice {
            Slice::All => &self.all,
            Slice::Head => &self.head,
            Slice::Tail => &self.tail,
            Slice::Known => &self.known,
            Slice::Unknown => &self.unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slice {
    All,
    Head,
    Tail,
    Known,
    Unknown,
}

impl Slice {
    pub const ALL: [Slice; 5] = [Slice::All, Slice::Head, Slice::Tail, Slice::Known, Slice::Unknown];

    pub fn label(self) -> &'static str {
        match self {
            Slice::All => "all",
            Slice::Head => "head",
            Slice::Tail => "tail",
            Slice::Known => "known",
            Slice::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Slice> {
        Slice::ALL.into_iter().find(|x| x.label() == s)
    }
}

/// Splits the test entities by corpus frequency and by whether any name word
/// also occurs in some training entity's name.
pub fn slice_entities(split: &DatasetSplit) -> EntitySlices {
    let train_words: HashSet<String> = split
        .train
        .iter()
        .flat_map(|e| e.names.iter())
        .flat_map(|n| name_words(n))
        .collect();
    let mut s = EntitySlices::default();
    for (i, e) in split.test.iter().enumerate() {
        s.all.push(i);
        if e.corpus_frequency > HEAD_MIN_EXCLUSIVE {
            s.head.push(i);
        } else if e.corpus_frequency < TAIL_MAX_EXCLUSIVE {
            s.tail.push(i);
        }
        let known = e
            .names
            .iter()
            .flat_map(|n| name_words(n))
            .any(|w| train_words.contains(&w));
        if known {
            s.known.push(i);
        } else {
            s.unknown.push(i);
        }
    }
    s
}
