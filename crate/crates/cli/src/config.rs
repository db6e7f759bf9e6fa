//! Experiment configuration: an INI file with sections.
//!
//! ```ini
//! [experiment]
//! seed = 1
//! threads = 1
//!
//! ; or a [data] section with corpus/dataset/hierarchy/notable paths
//! [synthetic]
//! n_entities = 2000
//!
//! [embed]
//! dim = 50
//!
//! [train]
//! hidden = 100
//!
//! [levels]
//! widths = 1,2,3,4,5
//!
//! [configs]
//! base = elr
//! joint = elr,clr-cnn
//! ```
//!
//! The only environment override is `MULR_THREADS`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::Ini;
use mulr::embed::{EmbeddingKind, SgnsConfig};
use mulr::eval::TypeSliceBounds;
use mulr::repr::{Level, RepresentationSpec, DEFAULT_CHAR_MIN_COUNT, DEFAULT_DES_K};
use mulr::synth::SyntheticSpec;
use mulr::typer::TrainConfig;
use mulr::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const THREADS_ENV: &str = "MULR_THREADS";

const SECTIONS: &[&str] = &["experiment", "data", "synthetic", "embed", "train", "levels", "report", "configs"];

#[derive(Debug, Clone, PartialEq)]
pub struct DataPaths {
    pub corpus: PathBuf,
    pub dataset: PathBuf,
    pub hierarchy: PathBuf,
    pub notable: PathBuf,
    pub descriptions: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Files(DataPaths),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedSettings {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
    pub min_count: u64,
    pub shrink_window: bool,
    pub table_size: usize,
    pub subword_min: usize,
    pub subword_max: usize,
    pub subword_min_count: u64,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        let s = SgnsConfig::default();
        EmbedSettings {
            dim: s.dim,
            window: s.window,
            negatives: s.negatives,
            epochs: s.epochs,
            lr: s.lr,
            min_count: 1,
            shrink_window: s.shrink_window,
            table_size: s.table_size,
            subword_min: 3,
            subword_max: 6,
            subword_min_count: 1,
        }
    }
}

impl EmbedSettings {
    pub fn sgns(&self, kind: EmbeddingKind, seed: u64, threads: usize) -> SgnsConfig {
        SgnsConfig {
            dim: self.dim,
            negatives: self.negatives,
            window: self.window,
            epochs: self.epochs,
            lr: self.lr,
            seed,
            positional: kind == EmbeddingKind::Sskip,
            shrink_window: self.shrink_window,
            threads,
            table_size: self.table_size,
        }
    }
}

/// Hyperparameters applied to every level that has them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelSettings {
    pub d_c: Option<usize>,
    pub max_len: Option<usize>,
    pub widths: Option<Vec<usize>>,
    pub filters_per_width: Option<usize>,
    pub d_h: Option<usize>,
    pub char_min_count: usize,
    pub des_k: usize,
}

impl Default for LevelSettings {
    fn default() -> Self {
        LevelSettings {
            d_c: None,
            max_len: None,
            widths: None,
            filters_per_width: None,
            d_h: None,
            char_min_count: DEFAULT_CHAR_MIN_COUNT,
            des_k: DEFAULT_DES_K,
        }
    }
}

impl LevelSettings {
    pub fn apply(&self, spec: &mut RepresentationSpec) {
        spec.char_min_count = self.char_min_count;
        spec.set_clr(None, |h| {
            if let Some(v) = self.d_c {
                h.d_c = v;
            }
            if let Some(v) = self.max_len {
                h.max_len = v;
            }
            if let Some(v) = &self.widths {
                h.widths = v.clone();
            }
            if let Some(v) = self.filters_per_width {
                h.filters_per_width = v;
            }
            if let Some(v) = self.d_h {
                h.d_h = v;
            }
        });
        for l in &mut spec.levels {
            if let Level::AvgDes { k, .. } = l {
                *k = self.des_k;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    /// Significance level of the pairwise equal-proportions tests.
    pub alpha: f64,
    pub head_type_min: usize,
    pub tail_type_max: usize,
}

impl Default for ReportSettings {
    fn default() -> Self {
        let b = TypeSliceBounds::default();
        ReportSettings {
            alpha: 0.05,
            head_type_min: b.head_min,
            tail_type_max: b.tail_max_exclusive,
        }
    }
}

impl ReportSettings {
    pub fn bounds(&self) -> TypeSliceBounds {
        TypeSliceBounds {
            head_min: self.head_type_min,
            tail_max_exclusive: self.tail_type_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub threads: usize,
    pub data: Option<DataSource>,
    pub embed: EmbedSettings,
    pub train: TrainConfig,
    pub levels: LevelSettings,
    pub report: ReportSettings,
    /// Named representation specs, in file order, with level settings applied.
    pub configs: Vec<(String, RepresentationSpec)>,
    /// SHA-256 over the normalized settings; thread count excluded.
    pub hash: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::parse("", Path::new(".")).expect("empty config is valid")
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn scalar(v: &str) -> Value {
    let v = v.trim();
    if let Ok(i) = v.parse::<u64>() {
        return Value::from(i);
    }
    if let Ok(f) = v.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(f) {
            return Value::Number(n);
        }
    }
    match v {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(v.to_string()),
    }
}

fn list(v: &str) -> Value {
    Value::Array(v.split(',').filter(|x| !x.trim().is_empty()).map(scalar).collect())
}

/// Deserializes one section into `T`, starting from `T::default()`.
fn section<T: DeserializeOwned + Default>(ini: &Ini, name: &str, lists: &[&str]) -> Result<T> {
    let Some(props) = ini.section(Some(name)) else {
        return Ok(T::default());
    };
    let mut map = Map::new();
    for (k, v) in props.iter() {
        if k == "seed" && name != "experiment" {
            return Err(config_err(format!("[{name}] seed: set the seed in [experiment]")));
        }
        let value = match k {
            "suffixes" => Value::Array(v.split(';').map(list).collect()),
            _ if lists.contains(&k) => list(v),
            _ => scalar(v),
        };
        map.insert(k.to_string(), value);
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| config_err(format!("[{name}]: {e}")))
}

fn check_layout(ini: &Ini) -> Result<()> {
    for (sec, props) in ini.iter() {
        let Some(sec) = sec else {
            if let Some((k, _)) = props.iter().next() {
                return Err(config_err(format!("key `{k}` outside any section")));
            }
            continue;
        };
        if !SECTIONS.contains(&sec) {
            return Err(config_err(format!("unknown section [{sec}]")));
        }
        let mut seen = std::collections::HashSet::new();
        for (k, _) in props.iter() {
            if !seen.insert(k) {
                return Err(config_err(format!("[{sec}] sets `{k}` twice")));
            }
        }
    }
    Ok(())
}

/// Threads from `MULR_THREADS` when set, else `fallback`.
pub fn threads_from_env(fallback: usize) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| config_err(format!("{THREADS_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(fallback),
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses config text; relative data paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| config_err(e.to_string()))?;
        check_layout(&ini)?;

        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Experiment {
            #[serde(default = "one")]
            seed: u64,
            #[serde(default = "one_usize")]
            threads: usize,
        }
        fn one() -> u64 {
            1
        }
        fn one_usize() -> usize {
            1
        }
        impl Default for Experiment {
            fn default() -> Self {
                Experiment { seed: 1, threads: 1 }
            }
        }
        let exp: Experiment = section(&ini, "experiment", &[])?;
        if exp.threads == 0 {
            return Err(config_err("[experiment] threads must be positive"));
        }

        let data = match (ini.section(Some("data")), ini.section(Some("synthetic"))) {
            (Some(_), Some(_)) => return Err(config_err("use either [data] or [synthetic], not both")),
            (Some(props), None) => {
                let mut paths = BTreeMap::new();
                for (k, v) in props.iter() {
                    if !["corpus", "dataset", "hierarchy", "notable", "descriptions"].contains(&k) {
                        return Err(config_err(format!("[data] unknown key `{k}`")));
                    }
                    paths.insert(k, base.join(v.trim()));
                }
                let mut take = |k: &str| paths.remove(k).ok_or_else(|| config_err(format!("[data] needs `{k}`")));
                Some(DataSource::Files(DataPaths {
                    corpus: take("corpus")?,
                    dataset: take("dataset")?,
                    hierarchy: take("hierarchy")?,
                    notable: take("notable")?,
                    descriptions: paths.remove("descriptions"),
                }))
            }
            (None, Some(_)) => {
                let mut spec: SyntheticSpec = section(&ini, "synthetic", &[])?;
                spec.seed = exp.seed;
                spec.validate()?;
                Some(DataSource::Synthetic(spec))
            }
            (None, None) => None,
        };

        let embed: EmbedSettings = section(&ini, "embed", &[])?;
        let mut train: TrainConfig = section(&ini, "train", &[])?;
        train.seed = exp.seed;
        train.validate()?;
        let levels: LevelSettings = section(&ini, "levels", &["widths"])?;
        let report: ReportSettings = section(&ini, "report", &[])?;
        if !(report.alpha > 0.0 && report.alpha < 1.0) {
            return Err(config_err("[report] alpha must be in (0, 1)"));
        }

        let mut configs = Vec::new();
        if let Some(props) = ini.section(Some("configs")) {
            for (name, levels_text) in props.iter() {
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                    return Err(config_err(format!("config name `{name}` must be alphanumeric, `-` or `_`")));
                }
                let mut spec = RepresentationSpec::parse(levels_text)
                    .map_err(|e| config_err(format!("[configs] {name}: {e}")))?;
                levels.apply(&mut spec);
                configs.push((name.to_string(), spec));
            }
        }

        let mut normalized: Vec<String> = Vec::new();
        for (sec, props) in ini.iter() {
            for (k, v) in props.iter() {
                let sec = sec.unwrap_or_default();
                if sec == "experiment" && k == "threads" {
                    continue;
                }
                normalized.push(format!("{sec}.{k}={}", v.trim()));
            }
        }
        normalized.sort();
        let hash = hex::encode(Sha256::digest(normalized.join("\n").as_bytes()));

        Ok(ExperimentConfig {
            seed: exp.seed,
            threads: exp.threads,
            data,
            embed,
            train,
            levels,
            report,
            configs,
            hash,
        })
    }

    /// Embedding stores the configured levels read from.
    pub fn store_kinds(&self) -> Vec<EmbeddingKind> {
        let mut kinds: Vec<EmbeddingKind> = self.configs.iter().flat_map(|(_, s)| spec_store_kinds(s)).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }
}

pub fn spec_store_kinds(spec: &RepresentationSpec) -> Vec<EmbeddingKind> {
    let mut kinds: Vec<EmbeddingKind> = spec
        .levels
        .iter()
        .filter_map(|l| match l {
            Level::Elr(k) | Level::Wwlr(k) | Level::Tc(k) | Level::AvgDes { store: k, .. } => Some(*k),
            Level::Swlr => Some(EmbeddingKind::Subword),
            Level::Clr(..) | Level::Nsl | Level::Bow => None,
        })
        .collect();
    kinds.sort();
    kinds.dedup();
    kinds
}
