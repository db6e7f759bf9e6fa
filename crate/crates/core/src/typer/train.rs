use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::net::TyperNet;
use super::thresholds::DEFAULT_THRESHOLD;
use super::{ModelMeta, TyperModel};
use crate::dataset::{DatasetSplit, EntityRecord};
use crate::error::{Error, Result};
use crate::eval::f1_from_counts;
use crate::nn::{adagrad_update, Params};
use crate::repr::{EntityInput, Featurizer, RepresentationSpec, Resources, Segment, SegmentKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub eps: f64,
    pub seed: u64,
    /// Stop after this many epochs without a dev improvement.
    pub patience: usize,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 128,
            lr: 0.01,
            eps: 1e-8,
            seed: 1,
            patience: 5,
            hidden: 400,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 {
            return Err(Error::Config("epochs, batch size and hidden size must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.eps > 0.0) {
            return Err(Error::Config("learning rate and epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-instance loss over the epoch.
    pub train_loss: f64,
    /// Dev micro F1 at threshold 0.5.
    pub dev_micro_f1: f64,
}

/// Inputs and gold indicator vectors for a list of instances.
pub struct Instances {
    pub inputs: Vec<EntityInput>,
    pub gold: Vec<Vec<f64>>,
}

pub fn gold_vector(e: &EntityRecord, types: &[String]) -> Vec<f64> {
    types.iter().map(|t| e.gold_types.contains(t) as u8 as f64).collect()
}

/// One instance per listed name of each entity when `all_names`, else per
/// entity (first name).
pub fn build_instances(
    featurizer: &Featurizer,
    res: &Resources,
    net: &TyperNet,
    entities: &[EntityRecord],
    all_names: bool,
) -> Result<Instances> {
    let types = res.types.types();
    let mut inputs = Vec::new();
    let mut gold = Vec::new();
    for e in entities {
        let names = if all_names { &e.names[..] } else { &e.names[..1] };
        for n in names {
            inputs.push(featurizer.input(res, &net.encoders, &e.id, n)?);
            gold.push(gold_vector(e, types));
        }
    }
    Ok(Instances { inputs, gold })
}

/// Micro F1 of thresholding `probs` at `threshold` against `gold`.
pub fn micro_f1_at(probs: &[Vec<f64>], gold: &[Vec<f64>], threshold: f64) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, g) in probs.iter().zip(gold) {
        for (&pi, &gi) in p.iter().zip(g) {
            match (pi > threshold, gi > 0.5) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
    }
    f1_from_counts(tp, fp, fn_).0
}

/// AdaGrad over a [`TyperNet`], updating only touched rows of sparse segments.
struct Optimizer {
    lr: f64,
    eps: f64,
    acc: Vec<Vec<f64>>,
    sparse: Vec<bool>,
}

impl Optimizer {
    fn new(net: &TyperNet, segments: &[Segment], lr: f64, eps: f64) -> Self {
        let mut sparse: Vec<bool> = segments.iter().map(|s| s.kind == SegmentKind::Sparse).collect();
        let slices = net.param_slices();
        sparse.resize(slices.len(), false);
        Optimizer {
            lr,
            eps,
            acc: slices.iter().map(|s| vec![0.0; s.len()]).collect(),
            sparse,
        }
    }

    /// Applies and then clears `grad`.
    fn step(&mut self, net: &mut TyperNet, grad: &mut TyperNet, touched: &mut Vec<(usize, usize)>) {
        let h = net.hidden();
        touched.sort_unstable();
        touched.dedup();
        let mut ps = net.param_slices_mut();
        let mut gs = grad.param_slices_mut();
        for &(s, r) in touched.iter() {
            let span = r * h..(r + 1) * h;
            adagrad_update(
                self.lr,
                self.eps,
                &mut ps[s][span.clone()],
                &gs[s][span.clone()],
                &mut self.acc[s][span.clone()],
            );
            gs[s][span].iter_mut().for_each(|g| *g = 0.0);
        }
        touched.clear();
        for (i, (p, g)) in ps.iter_mut().zip(gs.iter_mut()).enumerate() {
            if self.sparse[i] {
                continue;
            }
            adagrad_update(self.lr, self.eps, p, g, &mut self.acc[i]);
            g.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

pub struct TrainOutcome {
    pub model: TyperModel,
    pub history: Vec<EpochStats>,
}

fn predict_all(net: &TyperNet, segments: &[Segment], inputs: &[EntityInput]) -> Result<Vec<Vec<f64>>> {
    inputs.iter().map(|x| net.predict_proba(segments, x)).collect()
}

/// Trains the typer with AdaGrad minibatches and keeps the checkpoint with
/// the best dev micro F1 (at threshold 0.5). Thresholds stay at 0.5 until
/// calibrated.
pub fn train(split: &DatasetSplit, spec: &RepresentationSpec, res: &Resources, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (featurizer, encoders) = Featurizer::build(spec, res, &split.train, &mut rng)?;
    let n_types = res.types.len();
    let mut net = TyperNet::new(&featurizer.segments, encoders, cfg.hidden, n_types, &mut rng);
    let segs = featurizer.segments.clone();

    let train = build_instances(&featurizer, res, &net, &split.train, true)?;
    if train.inputs.is_empty() {
        return Err(Error::Validation("no training instance could be assembled".into()));
    }
    // Without dev entities, model selection falls back to training data.
    let dev = if split.dev.is_empty() {
        build_instances(&featurizer, res, &net, &split.train, false)?
    } else {
        build_instances(&featurizer, res, &net, &split.dev, false)?
    };

    let mut opt = Optimizer::new(&net, &segs, cfg.lr, cfg.eps);
    let mut grad = net.zeros_like();
    let mut touched = Vec::new();
    let mut order: Vec<usize> = (0..train.inputs.len()).collect();
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, TyperNet)> = None;
    let mut since_best = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let trace = net.forward(&segs, &train.inputs[i])?;
                total += crate::nn::bce_loss(&trace.probs, &train.gold[i]);
                net.backward(&trace, &train.gold[i], scale, &mut grad, &mut touched);
            }
            opt.step(&mut net, &mut grad, &mut touched);
        }
        if !total.is_finite() || !net.all_finite() {
            return Err(Error::Numeric(format!("training diverged in epoch {epoch}")));
        }
        let dev_f1 = micro_f1_at(&predict_all(&net, &segs, &dev.inputs)?, &dev.gold, DEFAULT_THRESHOLD);
        history.push(EpochStats {
            epoch,
            train_loss: total / train.inputs.len() as f64,
            dev_micro_f1: dev_f1,
        });
        if best.as_ref().is_none_or(|b| dev_f1 > b.0) {
            best = Some((dev_f1, epoch, net.clone()));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= cfg.patience {
            break;
        }
    }

    let (dev_f1, best_epoch, net) = best.expect("at least one epoch ran");
    let model = TyperModel {
        featurizer,
        net,
        types: res.types.types().to_vec(),
        thresholds: vec![DEFAULT_THRESHOLD; n_types],
        meta: ModelMeta {
            seed: cfg.seed,
            train: cfg.clone(),
            best_epoch,
            epochs_run: history.len(),
            dev_micro_f1: dev_f1,
            ..ModelMeta::default()
        },
    };
    Ok(TrainOutcome { model, history })
}
