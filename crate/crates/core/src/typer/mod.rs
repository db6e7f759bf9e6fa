//! The multi-label typer: a one-hidden-layer MLP over the concatenated
//! representation, `σ(W_out relu(W_in v(e)))`, trained with AdaGrad and
//! thresholded per type.

mod net;
mod thresholds;
mod train;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use net::{NetTrace, TyperNet};
pub use thresholds::{calibrate_thresholds, calibrate_type, candidate_cuts, f1_at, Calibration, DEFAULT_THRESHOLD};
pub use train::{build_instances, gold_vector, micro_f1_at, train, EpochStats, Instances, TrainConfig, TrainOutcome};

use crate::dataset::EntityRecord;
use crate::error::{Error, Result};
use crate::repr::{EntityInput, Featurizer, Resources};

/// Provenance recorded with every checkpoint.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub config_hash: String,
    pub seed: u64,
    pub train: TrainConfig,
    /// Store kind → path of the frozen embeddings the model was trained on.
    pub stores: BTreeMap<String, String>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub dev_micro_f1: f64,
    /// Types whose threshold fell back to the default.
    pub fallback_types: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TyperModel {
    pub featurizer: Featurizer,
    pub net: TyperNet,
    pub types: Vec<String>,
    pub thresholds: Vec<f64>,
    pub meta: ModelMeta,
}

impl TyperModel {
    pub fn input(&self, res: &Resources, entity: &str, name: &str) -> Result<EntityInput> {
        self.featurizer.input(res, &self.net.encoders, entity, name)
    }

    /// P(t | e) for every type, from the entity's first name.
    pub fn probabilities(&self, res: &Resources, e: &EntityRecord) -> Result<Vec<f64>> {
        let input = self.input(res, &e.id, e.name())?;
        self.net.predict_proba(&self.featurizer.segments, &input)
    }

    /// Probabilities for many entities, computed in parallel.
    pub fn probabilities_many(&self, res: &Resources, entities: &[EntityRecord]) -> Result<Vec<Vec<f64>>> {
        entities.par_iter().map(|e| self.probabilities(res, e)).collect()
    }

    /// Types whose probability is strictly above their threshold.
    pub fn assign(&self, probs: &[f64]) -> BTreeSet<String> {
        probs
            .iter()
            .zip(&self.thresholds)
            .zip(&self.types)
            .filter(|((p, t), _)| p > t)
            .map(|(_, name)| name.clone())
            .collect()
    }

    pub fn predict(&self, res: &Resources, e: &EntityRecord) -> Result<BTreeSet<String>> {
        Ok(self.assign(&self.probabilities(res, e)?))
    }

    /// Sets every type's threshold to the cut maximizing its dev F1.
    pub fn calibrate(&mut self, res: &Resources, dev: &[EntityRecord]) -> Result<Vec<Calibration>> {
        let scores = self.probabilities_many(res, dev)?;
        let gold: Vec<Vec<bool>> = dev
            .iter()
            .map(|e| self.types.iter().map(|t| e.gold_types.contains(t)).collect())
            .collect();
        let cal = calibrate_thresholds(&scores, &gold, self.types.len());
        self.thresholds = cal.iter().map(|c| c.threshold).collect();
        self.meta.fallback_types = self
            .types
            .iter()
            .zip(&cal)
            .filter(|(_, c)| c.fallback)
            .map(|(t, _)| t.clone())
            .collect();
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        if self.types.len() != self.net.n_types() || self.thresholds.len() != self.types.len() {
            return Err(Error::Validation(format!(
                "model has {} types, {} outputs and {} thresholds",
                self.types.len(),
                self.net.n_types(),
                self.thresholds.len()
            )));
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::Validation(format!("threshold {t} outside (0, 1)")));
        }
        Ok(())
    }

    /// Checks that `res` provides the types this model predicts.
    pub fn check_types(&self, res: &Resources) -> Result<()> {
        if res.types.types() != self.types.as_slice() {
            return Err(Error::Validation("type inventory differs from the model's".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut m: TyperModel = serde_json::from_str(text)?;
        for e in &mut m.net.encoders {
            e.inventory.reindex();
        }
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
