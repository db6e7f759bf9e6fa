//! Subcommands of the `mulr` binary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mulr::dataset::{load_dataset, TypeSystem};
use mulr::embed::{EmbeddingKind, EmbeddingStore};
use mulr::repr::{Descriptions, RepresentationSpec, Resources};
use mulr::synth::{generate_synthetic, SyntheticSpec};
use mulr::typer::{train, TyperModel};
use mulr::{Error, Result};

use crate::artifacts::{digest, ensure_parent, file_digest, format_predictions, parse_header, read, write, Provenance};
use crate::config::{threads_from_env, DataSource, ExperimentConfig};
use crate::pipeline::{
    build_corpus, evaluate_file, load_data, predict_rows, render_report, report_rows, run_pipeline, train_store,
    ReportFile,
};

pub const EXIT_USAGE: i32 = 1;

#[derive(Parser)]
#[command(name = "mulr", version, about = "Multi-level entity representations and fine-grained entity typing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus, dataset, hierarchy, notable types and descriptions.
    GenSynthetic {
        /// Config whose [synthetic] section to use; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the three-copy token stream, holding out test entities.
    BuildCorpus {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        notable: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train SKIP, SSKIP or subword embeddings on a token stream.
    Embed(EmbedArgs),
    /// Train a typer.
    Train {
        /// Comma-separated levels, e.g. `elr,swlr,clr-cnn,tc`.
        #[arg(long)]
        levels: String,
        #[command(flatten)]
        common: ModelArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Set per-type thresholds on the dev split.
    Calibrate {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        common: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write `entity_id<TAB>type:score,...` rows for the entities of a dataset file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Dataset TSV whose entities to type.
        #[arg(long)]
        entities: PathBuf,
        #[command(flatten)]
        common: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against the test split.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        /// System name recorded in the report.
        #[arg(long, default_value = "system")]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage of an experiment config, reusing cached stages.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Combine evaluation reports into slice tables and a significance matrix.
    Report {
        /// Report files written by `evaluate` or `pipeline`.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Also write the rows as TSV next to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    hierarchy: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    descriptions: Option<PathBuf>,
    /// Embedding store as `kind=path`, repeatable; kind is skip, sskip or subword.
    #[arg(long = "store", value_name = "KIND=PATH")]
    stores: Vec<String>,
    /// Config supplying [train], [levels] and [data] settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    mode: String,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    neg: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Token stream written by `build-corpus`.
    corpus: PathBuf,
    out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => ExperimentConfig::parse("", Path::new(".")),
    }
}

/// `--threads`, then `MULR_THREADS`, then the config value.
fn resolve_threads(flag: Option<usize>, config: usize) -> Result<usize> {
    match flag {
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(n) => Ok(n),
        None => threads_from_env(config),
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?
        .install(f)
}

impl DataArgs {
    /// Flags first, then the config's [data] paths.
    fn resolve(&self, cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf)> {
        let files = match &cfg.data {
            Some(DataSource::Files(p)) => Some(p),
            _ => None,
        };
        let pick = |flag: &Option<PathBuf>, from: Option<&PathBuf>, name: &str| {
            flag.clone()
                .or_else(|| from.cloned())
                .ok_or_else(|| Error::Config(format!("--{name} is required")))
        };
        Ok((
            pick(&self.dataset, files.map(|p| &p.dataset), "dataset")?,
            pick(&self.hierarchy, files.map(|p| &p.hierarchy), "hierarchy")?,
        ))
    }
}

fn parse_kind(s: &str) -> Result<EmbeddingKind> {
    EmbeddingKind::parse(s).ok_or_else(|| Error::Config(format!("unknown embedding kind `{s}`; use skip, sskip or subword")))
}

fn parse_store_flags(flags: &[String]) -> Result<BTreeMap<EmbeddingKind, PathBuf>> {
    let mut out = BTreeMap::new();
    for f in flags {
        let (k, p) = f
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--store `{f}`: expected KIND=PATH")))?;
        let kind = parse_kind(k.trim())?;
        if out.insert(kind, PathBuf::from(p.trim())).is_some() {
            return Err(Error::Config(format!("--store {k} given twice")));
        }
    }
    Ok(out)
}

fn relative_to(path: &Path, dir: &Path) -> String {
    let abs = |p: &Path| {
        std::fs::canonicalize(p)
            .or_else(|_| std::path::absolute(p))
            .unwrap_or_else(|_| p.to_path_buf())
    };
    let dir = abs(if dir.as_os_str().is_empty() { Path::new(".") } else { dir });
    pathdiff::diff_paths(abs(path), dir)
        .unwrap_or_else(|| path.to_path_buf())
        .to_string_lossy()
        .into_owned()
}

fn parent(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new(""))
}

/// Stores for `model`: `--store` flags win, then the paths in its metadata,
/// which are relative to the model file.
fn model_resources(
    model: &TyperModel,
    model_path: &Path,
    types: TypeSystem,
    flags: &[String],
    descriptions: Option<&Path>,
) -> Result<(Resources, BTreeMap<EmbeddingKind, PathBuf>)> {
    let mut stores = parse_store_flags(flags)?;
    for (label, rel) in &model.meta.stores {
        let kind = parse_kind(label)?;
        stores.entry(kind).or_insert_with(|| parent(model_path).join(rel));
    }
    let mut res = Resources::new(types);
    for (&kind, path) in &stores {
        res = res.with_store(EmbeddingStore::load_text(path, kind)?);
    }
    if let Some(d) = descriptions {
        res = res.with_descriptions(Descriptions::load(d)?);
    }
    Ok((res, stores))
}

fn store_meta(stores: &BTreeMap<EmbeddingKind, PathBuf>, model_out: &Path) -> BTreeMap<String, String> {
    stores
        .iter()
        .map(|(k, p)| (k.label().to_string(), relative_to(p, parent(model_out))))
        .collect()
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenSynthetic { config, seed, out } => {
            let cfg = load_config(config.as_deref())?;
            let mut spec = match cfg.data {
                Some(DataSource::Synthetic(s)) => s,
                Some(DataSource::Files(_)) => {
                    return Err(Error::Config("config has [data], not [synthetic]".into()));
                }
                None => SyntheticSpec::default(),
            };
            if let Some(s) = seed {
                spec.seed = s;
            }
            spec.validate()?;
            generate_synthetic(&spec)?.write_to(&out)?;
            let prov = Provenance {
                config_hash: digest(&["synthetic", &serde_json::to_string(&spec)?]),
                seed: spec.seed,
            };
            prov.write_sidecar(&out, "synthetic data")?;
            eprintln!("wrote synthetic data to {}", out.display());
            Ok(())
        }
        Command::BuildCorpus {
            data,
            corpus,
            notable,
            out,
        } => {
            let cfg = load_config(None)?;
            let (dataset, hierarchy) = data.resolve(&cfg)?;
            let loaded = load_data(&hierarchy, &dataset, None)?;
            let stream = build_corpus(&corpus, &notable, &loaded.split)?;
            ensure_parent(&out)?;
            stream.save(&out)?;
            let parts = [corpus, notable, dataset, hierarchy]
                .iter()
                .map(|p| file_digest(p))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
            Provenance {
                config_hash: digest(&refs),
                seed: 0,
            }
            .write_sidecar(&out, "three-copy token stream")?;
            eprintln!("wrote {} tokens to {}", stream.token_count(), out.display());
            Ok(())
        }
        Command::Embed(a) => {
            let kind = parse_kind(&a.mode)?;
            let mut s = crate::config::EmbedSettings::default();
            if let Some(v) = a.dim {
                s.dim = v;
            }
            if let Some(v) = a.neg {
                s.negatives = v;
            }
            if let Some(v) = a.window {
                s.window = v;
            }
            if let Some(v) = a.min_count {
                s.min_count = v;
            }
            if let Some(v) = a.epochs {
                s.epochs = v;
            }
            if let Some(v) = a.lr {
                s.lr = v;
            }
            let threads = resolve_threads(a.threads, 1)?;
            let stream = mulr::corpus::TokenStream::load(&a.corpus)?;
            let store = in_pool(threads, || train_store(&stream, kind, &s, a.seed, threads))?;
            ensure_parent(&a.out)?;
            store.save_text(&a.out)?;
            Provenance {
                config_hash: digest(&["embed", kind.label(), &serde_json::to_string(&s)?, &file_digest(&a.corpus)?]),
                seed: a.seed,
            }
            .write_sidecar(&a.out, &format!("{} embeddings", kind.label()))?;
            Ok(())
        }
        Command::Train {
            levels,
            common,
            seed,
            out,
        } => {
            let mut cfg = load_config(common.config.as_deref())?;
            if let Some(s) = seed {
                cfg.train.seed = s;
                cfg.seed = s;
            }
            let mut spec = RepresentationSpec::parse(&levels)?;
            cfg.levels.apply(&mut spec);
            let (dataset, hierarchy) = common.data.resolve(&cfg)?;
            let loaded = load_data(&hierarchy, &dataset, common.descriptions.as_deref())?;
            let stores = parse_store_flags(&common.stores)?;
            let res = crate::pipeline::resources(&loaded.types, &spec, &stores, loaded.descriptions.as_ref())?;
            let threads = resolve_threads(common.threads, cfg.threads)?;
            let outcome = in_pool(threads, || train(&loaded.split, &spec, &res, &cfg.train))?;
            let mut model = outcome.model;
            model.meta.config_hash = cfg.hash.clone();
            let used: BTreeMap<EmbeddingKind, PathBuf> = crate::config::spec_store_kinds(&spec)
                .into_iter()
                .map(|k| (k, stores[&k].clone()))
                .collect();
            ensure_parent(&out)?;
            model.meta.stores = store_meta(&used, &out);
            model.save(&out)?;
            eprintln!(
                "trained {} for {} epochs; best dev micro F1 {:.4} at epoch {}",
                spec.label(),
                model.meta.epochs_run,
                model.meta.dev_micro_f1,
                model.meta.best_epoch
            );
            Ok(())
        }
        Command::Calibrate { model, common, out } => {
            let cfg = load_config(common.config.as_deref())?;
            let (dataset, hierarchy) = common.data.resolve(&cfg)?;
            let loaded = load_data(&hierarchy, &dataset, None)?;
            let mut m = TyperModel::load(&model)?;
            let (res, stores) = model_resources(&m, &model, loaded.types, &common.stores, common.descriptions.as_deref())?;
            let threads = resolve_threads(common.threads, cfg.threads)?;
            in_pool(threads, || m.calibrate(&res, &loaded.split.dev))?;
            ensure_parent(&out)?;
            m.meta.stores = store_meta(&stores, &out);
            m.save(&out)?;
            if !m.meta.fallback_types.is_empty() {
                eprintln!("default threshold kept for {}", m.meta.fallback_types.join(", "));
            }
            Ok(())
        }
        Command::Predict {
            model,
            entities,
            common,
            out,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let hierarchy = common
                .data
                .hierarchy
                .clone()
                .or_else(|| match &cfg.data {
                    Some(DataSource::Files(p)) => Some(p.hierarchy.clone()),
                    _ => None,
                })
                .ok_or_else(|| Error::Config("--hierarchy is required".into()))?;
            let types = TypeSystem::load(&hierarchy)?;
            let split = load_dataset(&entities, &types)?;
            let m = TyperModel::load(&model)?;
            let (res, _) = model_resources(&m, &model, types, &common.stores, common.descriptions.as_deref())?;
            let all: Vec<_> = split.iter().cloned().collect();
            let threads = resolve_threads(common.threads, cfg.threads)?;
            let rows = in_pool(threads, || predict_rows(&m, &res, &all))?;
            let prov = Provenance {
                config_hash: m.meta.config_hash.clone(),
                seed: m.meta.seed,
            };
            write(&out, &format_predictions(&prov, &rows))
        }
        Command::Evaluate {
            predictions,
            data,
            config,
            name,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let (dataset, hierarchy) = data.resolve(&cfg)?;
            let loaded = load_data(&hierarchy, &dataset, None)?;
            let prov = parse_header(&read(&predictions)?)
                .ok_or_else(|| Error::Validation(format!("{}: no provenance header", predictions.display())))?;
            let report = evaluate_file(&predictions, &loaded.split, &loaded.types, cfg.report.bounds())?;
            print!("{}", report.to_table());
            ReportFile {
                config_hash: prov.config_hash,
                seed: prov.seed,
                levels: name.clone(),
                name,
                report,
            }
            .save(&out)
        }
        Command::Pipeline { config, out, threads } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.threads = resolve_threads(threads, cfg.threads)?;
            let outcome = run_pipeline(&cfg, &out)?;
            print!("{}", read(&outcome.report_path)?);
            if outcome.ran.is_empty() {
                eprintln!("every stage was cached");
            } else {
                eprintln!("ran: {}", outcome.ran.join(", "));
            }
            Ok(())
        }
        Command::Report { reports, alpha, out } => {
            let files = reports.iter().map(|p| ReportFile::load(p)).collect::<Result<Vec<_>>>()?;
            let mut hashes: Vec<&str> = files.iter().map(|f| f.config_hash.as_str()).collect();
            hashes.sort();
            hashes.dedup();
            let seeds: Vec<u64> = files.iter().map(|f| f.seed).collect();
            if seeds.iter().any(|&s| s != seeds[0]) {
                return Err(Error::Validation("reports come from different seeds".into()));
            }
            let prov = Provenance {
                config_hash: if hashes.len() == 1 { hashes[0].to_string() } else { digest(&hashes) },
                seed: seeds[0],
            };
            let systems: Vec<_> = files.into_iter().map(|f| (f.name, f.levels, f.report)).collect();
            let text = render_report(&prov, &systems, alpha)?;
            print!("{text}");
            if let Some(out) = out {
                write(&out, &text)?;
                let mut tsv = out.clone().into_os_string();
                tsv.push(".tsv");
                write(Path::new(&tsv), &report_rows(&prov, &systems))?;
            }
            Ok(())
        }
    }
}
