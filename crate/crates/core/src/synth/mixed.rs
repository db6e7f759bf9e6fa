use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedCorpus, Mention, Sentence};
use crate::dataset::{DatasetSplit, EntityRecord, TypeSystem, HEAD_MIN_EXCLUSIVE, TAIL_MAX_EXCLUSIVE};
use crate::error::{Error, Result};
use crate::repr::Descriptions;

const SUFFIX_POOL: &[&str] = &[
    "ish", "ov", "ez", "ium", "ard", "ese", "ski", "ula", "ton", "ix", "ane", "ock", "ette", "berg", "wyn", "ado",
    "ius", "land", "ga", "uk",
];
const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "kr", "pl", "st", "tr",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
const CODAS: &[&str] = &["", "", "", "n", "r", "l", "m"];
const NOVEL_ENDINGS: &[&str] = &["o", "a", "i", "er", "et"];

/// Knobs of the mixed-signal generator. Every type gets characteristic
/// context words, name words and name suffixes; the `*_strength` fields set
/// how often each signal is actually emitted, so levels can be ablated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_types: usize,
    /// Types without a parent; the rest are spread over them as children.
    pub n_roots: usize,
    pub n_entities: usize,
    /// Entity counts per type fall off as `1 / (rank + 1)^type_skew`.
    pub type_skew: f64,
    pub min_entities_per_type: usize,
    /// Fractions of entities with more than 100 and fewer than 5 mentions.
    pub head_fraction: f64,
    pub tail_fraction: f64,
    pub head_max_mentions: u64,
    pub mid_max_mentions: u64,
    pub filler_words: usize,
    pub context_words_per_type: usize,
    /// Words on each side of a mention.
    pub context_window: usize,
    /// Chance that a slot next to a mention holds a context word at all.
    pub context_rate: f64,
    /// Chance that a context word comes from the entity's own type.
    pub context_strength: f64,
    /// Own-type context words each entity draws from, picked per entity
    /// from its type's pool; 0 uses the whole pool.
    pub topic_words: usize,
    /// Entities that occur in the corpus with a notable type but are not
    /// part of the dataset, the same number for every type.
    pub corpus_only_entities: usize,
    pub name_words_per_type: usize,
    pub generic_name_words: usize,
    pub name_word_strength: f64,
    /// Sentences per type name word outside any mention, surrounded by the
    /// type's context words only.
    pub name_word_contexts: usize,
    /// Explicit suffixes per type; generated when empty.
    pub suffixes: Vec<Vec<String>>,
    pub suffix_strength: f64,
    pub max_name_tokens: usize,
    /// Fraction of test name words replaced by unseen variants that keep
    /// most of the original's character ngrams.
    pub novel_word_rate: f64,
    pub description_words: usize,
    pub description_strength: f64,
    pub dev_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_types: 10,
            n_roots: 4,
            n_entities: 2000,
            type_skew: 1.0,
            min_entities_per_type: 20,
            head_fraction: 0.1,
            tail_fraction: 0.4,
            head_max_mentions: 130,
            mid_max_mentions: 30,
            filler_words: 300,
            context_words_per_type: 20,
            context_window: 3,
            context_rate: 0.5,
            context_strength: 0.35,
            topic_words: 0,
            corpus_only_entities: 0,
            name_words_per_type: 150,
            generic_name_words: 60,
            name_word_strength: 0.5,
            name_word_contexts: 10,
            suffixes: Vec::new(),
            suffix_strength: 0.5,
            max_name_tokens: 3,
            novel_word_rate: 0.0,
            description_words: 12,
            description_strength: 0.3,
            dev_fraction: 0.2,
            test_fraction: 0.3,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_types == 0 || self.n_roots == 0 || self.n_roots > self.n_types {
            return bad("need at least one type and 1..=n_types roots");
        }
        if self.min_entities_per_type == 0 || self.n_entities < self.n_types * self.min_entities_per_type {
            return bad("too few entities for the per-type minimum");
        }
        if self.filler_words == 0 || self.context_words_per_type == 0 || self.name_words_per_type == 0 {
            return bad("word pools must be non-empty");
        }
        if self.generic_name_words == 0 || self.max_name_tokens == 0 || self.context_window == 0 {
            return bad("name and window sizes must be positive");
        }
        if self.head_max_mentions <= HEAD_MIN_EXCLUSIVE || self.mid_max_mentions < TAIL_MAX_EXCLUSIVE {
            return bad("mention ranges do not cover the head and mid buckets");
        }
        if self.mid_max_mentions > HEAD_MIN_EXCLUSIVE {
            return bad("mid bucket overlaps the head bucket");
        }
        for (name, p) in [
            ("head_fraction", self.head_fraction),
            ("tail_fraction", self.tail_fraction),
            ("context_rate", self.context_rate),
            ("context_strength", self.context_strength),
            ("name_word_strength", self.name_word_strength),
            ("suffix_strength", self.suffix_strength),
            ("novel_word_rate", self.novel_word_rate),
            ("description_strength", self.description_strength),
            ("dev_fraction", self.dev_fraction),
            ("test_fraction", self.test_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        if self.head_fraction + self.tail_fraction > 1.0 || self.dev_fraction + self.test_fraction >= 1.0 {
            return bad("fractions add up to more than one");
        }
        if !(self.type_skew >= 0.0 && self.type_skew.is_finite()) {
            return bad("type_skew must be non-negative");
        }
        if !self.suffixes.is_empty() && self.suffixes.len() != self.n_types {
            return bad("explicit suffixes must list one group per type");
        }
        if self.topic_words > self.context_words_per_type {
            return bad("topic_words exceeds context_words_per_type");
        }
        if self.suffixes.is_empty() && self.n_types > SUFFIX_POOL.len() {
            return bad("too many types for the built-in suffix pool");
        }
        check_suffixes(&self.suffixes)
    }
}

/// Suffix groups contradict each other when one type's suffix ends with
/// another type's, since a name would then carry both signals.
fn check_suffixes(groups: &[Vec<String>]) -> Result<()> {
    let all: Vec<(usize, &String)> = groups.iter().enumerate().flat_map(|(t, g)| g.iter().map(move |s| (t, s))).collect();
    for &(t, s) in &all {
        if s.is_empty() || !s.chars().all(|c| c.is_ascii_lowercase()) {
            return Err(Error::Config(format!("suffix `{s}` must be non-empty lowercase ASCII")));
        }
        for &(u, r) in &all {
            if t != u && s.ends_with(r.as_str()) {
                return Err(Error::Config(format!(
                    "contradictory patterns: suffix `{s}` of type {t} ends with `{r}` of type {u}"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub corpus: AnnotatedCorpus,
    pub split: DatasetSplit,
    pub types: TypeSystem,
    /// Entity → the type it was generated from (its most specific type).
    pub notable: HashMap<String, String>,
    pub descriptions: Descriptions,
}

impl SyntheticData {
    pub fn notable_tsv(&self) -> String {
        let sorted: BTreeMap<_, _> = self.notable.iter().collect();
        sorted.into_iter().map(|(e, t)| format!("{e}\t{t}\n")).collect()
    }

    pub fn descriptions_tsv(&self) -> String {
        let mut out = String::new();
        for (id, words) in &self.descriptions.texts {
            writeln!(out, "{id}\t{}", words.join(" ")).unwrap();
        }
        out
    }

    /// Writes `corpus.txt`, `dataset.tsv`, `hierarchy.tsv`, `notable.tsv`
    /// and `descriptions.tsv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (file, text) in [
            ("corpus.txt", self.corpus.to_markup()),
            ("dataset.tsv", self.split.to_tsv()),
            ("hierarchy.tsv", self.types.to_hierarchy()),
            ("notable.tsv", self.notable_tsv()),
            ("descriptions.tsv", self.descriptions_tsv()),
        ] {
            let p = dir.join(file);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

/// Unique pseudo-words that avoid every reserved suffix.
struct WordMaker<'a> {
    used: HashSet<String>,
    suffixes: &'a [String],
}

impl WordMaker<'_> {
    fn make(&mut self, rng: &mut ChaCha8Rng, min_syl: usize, max_syl: usize) -> String {
        loop {
            let mut w = String::new();
            for _ in 0..rng.gen_range(min_syl..=max_syl) {
                w.push_str(ONSETS.choose(rng).unwrap());
                w.push_str(VOWELS.choose(rng).unwrap());
                w.push_str(CODAS.choose(rng).unwrap());
            }
            if self.accept(&w) {
                return w;
            }
        }
    }

    fn accept(&mut self, w: &str) -> bool {
        if self.suffixes.iter().any(|s| w.contains(s.as_str())) || self.used.contains(w) {
            return false;
        }
        self.used.insert(w.to_string());
        true
    }

    /// An unused variant of `w` sharing all of its interior ngrams.
    fn variant(&mut self, rng: &mut ChaCha8Rng, w: &str) -> String {
        for _ in 0..64 {
            let v = format!("{w}{}", NOVEL_ENDINGS.choose(rng).unwrap());
            if self.accept(&v) {
                return v;
            }
        }
        let extra = self.make(rng, 1, 1);
        format!("{w}{extra}")
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Largest-remainder apportionment of `total` over `weights`, each part at least `floor`.
fn apportion(total: usize, weights: &[f64], floor: usize) -> Vec<usize> {
    let rest = total - floor * weights.len();
    let sum: f64 = weights.iter().sum();
    let raw: Vec<f64> = weights.iter().map(|w| rest as f64 * w / sum).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    let missing = rest - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts.iter().map(|c| c + floor).collect()
}

struct TypeVocab {
    context: Vec<String>,
    names: Vec<String>,
    suffixes: Vec<String>,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let type_names: Vec<String> = (0..spec.n_types).map(|i| format!("type{i:02}")).collect();
    let edges: Vec<(String, String)> = (spec.n_roots..spec.n_types)
        .map(|i| (type_names[i].clone(), type_names[(i - spec.n_roots) % spec.n_roots].clone()))
        .collect();
    let types = TypeSystem::new(type_names.clone(), &edges)?;

    let suffixes: Vec<Vec<String>> = if spec.suffixes.is_empty() {
        SUFFIX_POOL[..spec.n_types].iter().map(|s| vec![s.to_string()]).collect()
    } else {
        spec.suffixes.clone()
    };
    let all_suffixes: Vec<String> = suffixes.iter().flatten().cloned().collect();
    let mut words = WordMaker {
        used: HashSet::new(),
        suffixes: &all_suffixes,
    };
    let fillers: Vec<String> = (0..spec.filler_words).map(|_| words.make(&mut rng, 1, 2)).collect();
    let vocab: Vec<TypeVocab> = suffixes
        .iter()
        .map(|sfx| TypeVocab {
            context: (0..spec.context_words_per_type).map(|_| words.make(&mut rng, 2, 3)).collect(),
            names: (0..spec.name_words_per_type).map(|_| words.make(&mut rng, 2, 3)).collect(),
            suffixes: sfx.clone(),
        })
        .collect();
    let generic: Vec<String> = (0..spec.generic_name_words).map(|_| words.make(&mut rng, 1, 3)).collect();

    // Entities per type, then a stratified split so every type has training entities.
    let weights: Vec<f64> = (0..spec.n_types).map(|r| 1.0 / ((r + 1) as f64).powf(spec.type_skew)).collect();
    let per_type = apportion(spec.n_entities, &weights, spec.min_entities_per_type);
    let mut class_of = Vec::with_capacity(spec.n_entities);
    for (t, &n) in per_type.iter().enumerate() {
        class_of.extend(std::iter::repeat_n(t, n));
    }
    let n = class_of.len();
    let mut part = vec![0u8; n];
    let mut start = 0;
    for &count in &per_type {
        let mut idx: Vec<usize> = (start..start + count).collect();
        idx.shuffle(&mut rng);
        let n_test = (count as f64 * spec.test_fraction).round() as usize;
        let n_dev = (count as f64 * spec.dev_fraction).round() as usize;
        let n_test = n_test.min(count - 1);
        let n_dev = n_dev.min(count - 1 - n_test);
        for (k, &i) in idx.iter().enumerate() {
            part[i] = if k < n_test {
                2
            } else if k < n_test + n_dev {
                1
            } else {
                0
            };
        }
        start += count;
    }

    // Frequency buckets with exact sizes.
    let n_head = (n as f64 * spec.head_fraction).round() as usize;
    let n_tail = ((n as f64 * spec.tail_fraction).round() as usize).min(n - n_head);
    let mut by_bucket: Vec<usize> = (0..n).collect();
    by_bucket.shuffle(&mut rng);
    let mut freq = vec![0u64; n];
    for (k, &i) in by_bucket.iter().enumerate() {
        freq[i] = if k < n_head {
            rng.gen_range(HEAD_MIN_EXCLUSIVE + 1..=spec.head_max_mentions)
        } else if k < n_head + n_tail {
            rng.gen_range(1..TAIL_MAX_EXCLUSIVE)
        } else {
            rng.gen_range(TAIL_MAX_EXCLUSIVE..=spec.mid_max_mentions)
        };
    }

    // Corpus-only entities follow the dataset entities, spread evenly over
    // types and with mid-range frequencies.
    let extra_per_type = apportion(spec.corpus_only_entities, &vec![1.0; spec.n_types], 0);
    for (t, &k) in extra_per_type.iter().enumerate() {
        class_of.extend(std::iter::repeat_n(t, k));
    }
    part.resize(class_of.len(), 3);
    for _ in n..class_of.len() {
        freq.push(rng.gen_range(TAIL_MAX_EXCLUSIVE..=spec.mid_max_mentions));
    }

    // Names: generic tokens, one possibly swapped for a type word and one
    // possibly carrying the type suffix, at a random position.
    let mut names = Vec::with_capacity(class_of.len());
    for (i, &c) in class_of.iter().enumerate() {
        let len = rng.gen_range(1..=spec.max_name_tokens);
        let mut toks: Vec<String> = (0..len).map(|_| generic.choose(&mut rng).unwrap().clone()).collect();
        if rng.gen_bool(spec.name_word_strength) {
            let pos = rng.gen_range(0..len);
            toks[pos] = vocab[c].names.choose(&mut rng).unwrap().clone();
        }
        if part[i] == 2 && spec.novel_word_rate > 0.0 {
            for t in toks.iter_mut() {
                if rng.gen_bool(spec.novel_word_rate) {
                    *t = words.variant(&mut rng, t);
                }
            }
        }
        if rng.gen_bool(spec.suffix_strength) {
            let pos = rng.gen_range(0..len);
            toks[pos].push_str(vocab[c].suffixes.choose(&mut rng).unwrap());
        }
        names.push(toks.iter().map(|t| capitalize(t)).collect::<Vec<_>>().join(" "));
    }

    let ids: Vec<String> = (0..class_of.len())
        .map(|i| if i < n { format!("e{i:05}") } else { format!("x{:05}", i - n) })
        .collect();
    let topics: Vec<Vec<String>> = class_of
        .iter()
        .map(|&c| {
            let pool = &vocab[c].context;
            match spec.topic_words {
                0 => pool.clone(),
                k => pool.choose_multiple(&mut rng, k).cloned().collect(),
            }
        })
        .collect();
    let context_word = |rng: &mut ChaCha8Rng, own: &[String]| -> String {
        if rng.gen_bool(spec.context_rate) {
            if rng.gen_bool(spec.context_strength) {
                own.choose(rng).unwrap().clone()
            } else {
                vocab.choose(rng).unwrap().context.choose(rng).unwrap().clone()
            }
        } else {
            fillers.choose(rng).unwrap().clone()
        }
    };
    let mut sentences = Vec::new();
    for i in 0..class_of.len() {
        let surface: Vec<String> = names[i].split(' ').map(str::to_string).collect();
        for _ in 0..freq[i] {
            let mut tokens: Vec<String> = (0..spec.context_window).map(|_| context_word(&mut rng, &topics[i])).collect();
            let start = tokens.len();
            tokens.extend(surface.iter().cloned());
            let end = tokens.len();
            tokens.extend((0..spec.context_window).map(|_| context_word(&mut rng, &topics[i])));
            sentences.push(Sentence {
                tokens,
                mentions: vec![Mention {
                    start,
                    end,
                    entity: ids[i].clone(),
                }],
            });
        }
    }
    for v in &vocab {
        for w in &v.names {
            let w = capitalize(w);
            for _ in 0..spec.name_word_contexts {
                let mut tokens: Vec<String> = (0..spec.context_window).map(|_| v.context.choose(&mut rng).unwrap().clone()).collect();
                tokens.push(w.clone());
                tokens.extend((0..spec.context_window).map(|_| v.context.choose(&mut rng).unwrap().clone()));
                sentences.push(Sentence {
                    tokens,
                    mentions: Vec::new(),
                });
            }
        }
    }
    sentences.shuffle(&mut rng);

    let mut texts = BTreeMap::new();
    for i in 0..n {
        let words: Vec<String> = (0..spec.description_words)
            .map(|_| {
                if rng.gen_bool(spec.description_strength) {
                    vocab[class_of[i]].context.choose(&mut rng).unwrap().clone()
                } else {
                    fillers.choose(&mut rng).unwrap().clone()
                }
            })
            .collect();
        texts.insert(ids[i].clone(), words);
    }

    let mut split = DatasetSplit::default();
    let mut notable = HashMap::new();
    for i in n..class_of.len() {
        notable.insert(ids[i].clone(), type_names[class_of[i]].clone());
    }
    for i in 0..n {
        let c = class_of[i];
        let mut gold: BTreeSet<String> = BTreeSet::from([type_names[c].clone()]);
        gold.extend(types.ancestors(c).map(|a| type_names[a].clone()));
        let rec = EntityRecord {
            id: ids[i].clone(),
            names: vec![names[i].clone()],
            gold_types: gold,
            corpus_frequency: freq[i],
        };
        notable.insert(ids[i].clone(), type_names[c].clone());
        match part[i] {
            0 => split.train.push(rec),
            1 => split.dev.push(rec),
            _ => split.test.push(rec),
        }
    }

    Ok(SyntheticData {
        corpus: AnnotatedCorpus { sentences },
        split,
        types,
        notable,
        descriptions: Descriptions { texts },
    })
}
