//! corpus → embeddings → train → calibrate → predict → evaluate → report,
//! each stage cached under the output directory.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mulr::corpus::{
    build_three_copy_corpus, build_vocabulary, load_notable_types, AnnotatedCorpus, SubwordIndex, TokenStream,
};
use mulr::dataset::{load_dataset, DatasetSplit, EntityRecord, Slice, TypeSystem};
use mulr::embed::{train_sgns, train_subword_sgns, EmbeddingKind, EmbeddingStore};
use mulr::eval::{evaluate, render_matrix, significance_matrix, EvalReport, TypeSliceBounds};
use mulr::repr::{Descriptions, RepresentationSpec, Resources};
use mulr::synth::generate_synthetic;
use mulr::typer::{train, TyperModel};
use mulr::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::artifacts::{
    align_predictions, digest, ensure_parent, file_digest, format_predictions, load_predictions, read, write, PredictionRow,
    Provenance, StageCache,
};
use crate::config::{spec_store_kinds, DataPaths, DataSource, EmbedSettings, ExperimentConfig};

/// Dataset, hierarchy and optional descriptions, loaded and validated.
pub struct LoadedData {
    pub types: TypeSystem,
    pub split: DatasetSplit,
    pub descriptions: Option<Descriptions>,
}

pub fn load_data(hierarchy: &Path, dataset: &Path, descriptions: Option<&Path>) -> Result<LoadedData> {
    let types = TypeSystem::load(hierarchy)?;
    let split = load_dataset(dataset, &types)?.close_under_parents(&types);
    split.validate(&types)?;
    let descriptions = descriptions.map(Descriptions::load).transpose()?;
    Ok(LoadedData {
        types,
        split,
        descriptions,
    })
}

/// The three-copy token stream with the dataset's test entities held out
/// of the type copy.
pub fn build_corpus(corpus: &Path, notable: &Path, split: &DatasetSplit) -> Result<TokenStream> {
    let corpus = AnnotatedCorpus::load(corpus)?;
    let notable = load_notable_types(notable)?;
    let exclude: HashSet<String> = split.test.iter().map(|e| e.id.clone()).collect();
    build_three_copy_corpus(&corpus, &notable, &exclude)
}

pub fn train_store(
    stream: &TokenStream,
    kind: EmbeddingKind,
    settings: &EmbedSettings,
    seed: u64,
    threads: usize,
) -> Result<EmbeddingStore> {
    let vocab = build_vocabulary(stream, settings.min_count)?;
    let cfg = settings.sgns(kind, seed, threads);
    match kind {
        EmbeddingKind::Subword => {
            let index = SubwordIndex::build(&vocab, settings.subword_min, settings.subword_max, settings.subword_min_count)?;
            train_subword_sgns(stream, &vocab, &index, &cfg)
        }
        _ => train_sgns(stream, &vocab, &cfg),
    }
}

/// Resources for a model, loading each store it needs from `stores`.
pub fn resources(
    types: &TypeSystem,
    spec: &RepresentationSpec,
    stores: &BTreeMap<EmbeddingKind, PathBuf>,
    descriptions: Option<&Descriptions>,
) -> Result<Resources> {
    let mut res = Resources::new(types.clone());
    for kind in spec_store_kinds(spec) {
        let path = stores
            .get(&kind)
            .ok_or_else(|| Error::Config(format!("no {} embedding store given", kind.label())))?;
        res = res.with_store(EmbeddingStore::load_text(path, kind)?);
    }
    if let Some(d) = descriptions {
        res = res.with_descriptions(d.clone());
    }
    Ok(res)
}

/// Predicted types with probabilities, most probable first.
pub fn predict_rows(model: &TyperModel, res: &Resources, entities: &[EntityRecord]) -> Result<Vec<PredictionRow>> {
    let probs = model.probabilities_many(res, entities)?;
    Ok(entities
        .iter()
        .zip(probs)
        .map(|(e, p)| {
            let mut types: Vec<(String, f64)> = model
                .types
                .iter()
                .zip(&p)
                .zip(&model.thresholds)
                .filter(|((_, prob), thr)| prob > thr)
                .map(|((t, prob), _)| (t.clone(), *prob))
                .collect();
            types.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            (e.id.clone(), types)
        })
        .collect())
}

pub fn evaluate_file(
    predictions: &Path,
    split: &DatasetSplit,
    types: &TypeSystem,
    bounds: TypeSliceBounds,
) -> Result<EvalReport> {
    let preds = align_predictions(&load_predictions(predictions)?, &split.test)?;
    evaluate(split, &preds, types, bounds)
}

/// Slice tables per system and, for several systems, the significance matrix.
pub fn render_report(prov: &Provenance, systems: &[(String, String, EvalReport)], alpha: f64) -> Result<String> {
    let mut out = prov.header();
    out.push('\n');
    for (name, label, report) in systems {
        writeln!(out, "\n== {name} ({label}) ==").unwrap();
        out.push_str(&report.to_table());
    }
    if systems.len() > 1 {
        let all: Vec<&mulr::eval::SliceRow> = systems
            .iter()
            .map(|(_, _, r)| r.slice(Slice::All).expect("every report has the all slice"))
            .collect();
        let correct: Vec<usize> = all.iter().map(|r| r.correct).collect();
        let m = significance_matrix(&correct, all[0].count, alpha)?;
        let names: Vec<String> = systems.iter().map(|s| s.0.clone()).collect();
        writeln!(
            out,
            "\nsignificance of strict accuracy (alpha = {alpha}); `*`: row beats column"
        )
        .unwrap();
        out.push_str(&render_matrix(&names, &m));
    }
    Ok(out)
}

/// Rows `config<TAB>slice<TAB>metric<TAB>value`.
pub fn report_rows(prov: &Provenance, systems: &[(String, String, EvalReport)]) -> String {
    let mut out = prov.header();
    out.push('\n');
    for (name, _, r) in systems {
        for line in r.to_rows().lines() {
            writeln!(out, "{name}\t{line}").unwrap();
        }
    }
    out
}

/// An evaluation report with the provenance of the predictions it scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config_hash: String,
    pub seed: u64,
    pub name: String,
    pub levels: String,
    pub report: EvalReport,
}

impl ReportFile {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&read(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, &serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineOutcome {
    /// `(name, levels, report)` per configured system.
    pub systems: Vec<(String, String, EvalReport)>,
    pub report_path: PathBuf,
    /// Stages that ran rather than being served from cache.
    pub ran: Vec<String>,
}

struct DataFiles {
    paths: DataPaths,
    key: String,
}

fn store_file(kind: EmbeddingKind) -> String {
    format!("{}.vec", kind.label())
}

/// Runs every stage for `cfg` under `out`, reusing cached stages.
pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path) -> Result<PipelineOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_stages(cfg, out))
}

fn run_stages(cfg: &ExperimentConfig, out: &Path) -> Result<PipelineOutcome> {
    if cfg.configs.is_empty() {
        return Err(Error::Config("[configs] lists no representation".into()));
    }
    let prov = Provenance {
        config_hash: cfg.hash.clone(),
        seed: cfg.seed,
    };
    let mut cache = StageCache::new(out);
    let seed = cfg.seed.to_string();

    // Data.
    let data = match &cfg.data {
        None => return Err(Error::Config("needs a [data] or [synthetic] section".into())),
        Some(DataSource::Files(paths)) => {
            let mut parts = vec!["data".to_string()];
            for p in [&paths.corpus, &paths.dataset, &paths.hierarchy, &paths.notable]
                .into_iter()
                .chain(paths.descriptions.as_ref())
            {
                parts.push(file_digest(p).map_err(|e| Error::stage("data", e))?);
            }
            let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
            DataFiles {
                paths: paths.clone(),
                key: digest(&refs),
            }
        }
        Some(DataSource::Synthetic(spec)) => {
            let dir = out.join("data");
            let paths = DataPaths {
                corpus: dir.join("corpus.txt"),
                dataset: dir.join("dataset.tsv"),
                hierarchy: dir.join("hierarchy.tsv"),
                notable: dir.join("notable.tsv"),
                descriptions: Some(dir.join("descriptions.tsv")),
            };
            let spec_json = serde_json::to_string(spec)?;
            let key = digest(&["data", &spec_json]);
            let outputs: Vec<PathBuf> = vec![
                paths.corpus.clone(),
                paths.dataset.clone(),
                paths.hierarchy.clone(),
                paths.notable.clone(),
                dir.join("descriptions.tsv"),
            ];
            cache.run("data", &key, &outputs, || {
                generate_synthetic(spec)?.write_to(&dir)?;
                prov.write_sidecar(&dir, "synthetic data")
            })?;
            DataFiles { paths, key }
        }
    };
    let loaded = load_data(&data.paths.hierarchy, &data.paths.dataset, data.paths.descriptions.as_deref())
        .map_err(|e| Error::stage("data", e))?;

    // Corpus.
    let corpus_path = out.join("corpus.tok");
    let corpus_key = digest(&["corpus", &data.key]);
    cache.run("corpus", &corpus_key, &[corpus_path.clone()], || {
        let stream = build_corpus(&data.paths.corpus, &data.paths.notable, &loaded.split)?;
        ensure_parent(&corpus_path)?;
        stream.save(&corpus_path)?;
        prov.write_sidecar(&corpus_path, "three-copy token stream")
    })?;

    // Embeddings.
    let embed_json = serde_json::to_string(&cfg.embed)?;
    let mut stores = BTreeMap::new();
    let mut store_keys = HashMap::new();
    let mut stream: Option<TokenStream> = None;
    for kind in cfg.store_kinds() {
        let path = out.join("embeddings").join(store_file(kind));
        let key = digest(&["embed", &corpus_key, kind.label(), &embed_json, &seed]);
        let stage = format!("embed/{}", kind.label());
        cache.run(&stage, &key, &[path.clone()], || {
            if stream.is_none() {
                stream = Some(TokenStream::load(&corpus_path)?);
            }
            let store = train_store(stream.as_ref().unwrap(), kind, &cfg.embed, cfg.seed, cfg.threads)?;
            ensure_parent(&path)?;
            store.save_text(&path)?;
            prov.write_sidecar(&path, &format!("{} embeddings", kind.label()))
        })?;
        stores.insert(kind, path);
        store_keys.insert(kind, key);
    }

    // Per-config model stages.
    let train_json = serde_json::to_string(&cfg.train)?;
    let report_json = serde_json::to_string(&cfg.report)?;
    let mut eval_keys = Vec::new();
    let mut systems = Vec::new();
    for (name, spec) in &cfg.configs {
        let res = || resources(&loaded.types, spec, &stores, loaded.descriptions.as_ref());
        let spec_label = format!("{}|char_min_count={}|{:?}", spec.label(), spec.char_min_count, spec.levels);
        let mut parts = vec!["train".to_string(), data.key.clone(), spec_label, train_json.clone()];
        parts.extend(spec_store_kinds(spec).iter().map(|k| store_keys[k].clone()));
        let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
        let train_key = digest(&refs);

        let models = out.join("models");
        let trained = models.join(format!("{name}.trained.json"));
        cache.run(&format!("train/{name}"), &train_key, &[trained.clone()], || {
            let mut model = train(&loaded.split, spec, &res()?, &cfg.train)?.model;
            model.meta.config_hash = cfg.hash.clone();
            model.meta.stores = spec_store_kinds(spec)
                .into_iter()
                .map(|k| (k.label().to_string(), format!("../embeddings/{}", store_file(k))))
                .collect();
            ensure_parent(&trained)?;
            model.save(&trained)
        })?;

        let calibrated = models.join(format!("{name}.json"));
        let cal_key = digest(&["calibrate", &train_key]);
        cache.run(&format!("calibrate/{name}"), &cal_key, &[calibrated.clone()], || {
            let mut model = TyperModel::load(&trained)?;
            model.calibrate(&res()?, &loaded.split.dev)?;
            model.save(&calibrated)
        })?;

        let preds = out.join("predictions").join(format!("{name}.tsv"));
        let pred_key = digest(&["predict", &cal_key]);
        cache.run(&format!("predict/{name}"), &pred_key, &[preds.clone()], || {
            let model = TyperModel::load(&calibrated)?;
            let rows = predict_rows(&model, &res()?, &loaded.split.test)?;
            write(&preds, &format_predictions(&prov, &rows))
        })?;

        let eval_json = out.join("reports").join(format!("{name}.json"));
        let eval_tsv = out.join("reports").join(format!("{name}.tsv"));
        let eval_key = digest(&["evaluate", &pred_key, &report_json]);
        cache.run(&format!("evaluate/{name}"), &eval_key, &[eval_json.clone(), eval_tsv.clone()], || {
            let report = evaluate_file(&preds, &loaded.split, &loaded.types, cfg.report.bounds())?;
            write(&eval_tsv, &format!("{}\n{}", prov.header(), report.to_rows()))?;
            ReportFile {
                config_hash: cfg.hash.clone(),
                seed: cfg.seed,
                name: name.clone(),
                levels: spec.label(),
                report,
            }
            .save(&eval_json)
        })?;
        eval_keys.push(eval_key);
        let file = ReportFile::load(&eval_json)?;
        systems.push((file.name, file.levels, file.report));
    }

    let report_path = out.join("report.txt");
    let rows_path = out.join("report.tsv");
    let mut parts: Vec<&str> = vec!["report", &report_json];
    parts.extend(eval_keys.iter().map(String::as_str));
    let names: Vec<&str> = cfg.configs.iter().map(|c| c.0.as_str()).collect();
    let joined = names.join(",");
    parts.push(&joined);
    let report_key = digest(&parts);
    cache.run("report", &report_key, &[report_path.clone(), rows_path.clone()], || {
        write(&report_path, &render_report(&prov, &systems, cfg.report.alpha)?)?;
        write(&rows_path, &report_rows(&prov, &systems))
    })?;

    Ok(PipelineOutcome {
        systems,
        report_path,
        ran: cache.ran,
    })
}
