use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::EntityRecord;
use crate::error::{Error, Result};

pub type TypeSet = BTreeSet<String>;

/// Entity ids paired with type sets.
pub type Labels = [(String, TypeSet)];

/// Types with at least this many train entities are head types.
pub const HEAD_TYPE_MIN: usize = 3000;
/// Types with fewer than this many train entities are tail types.
pub const TAIL_TYPE_MAX_EXCLUSIVE: usize = 200;

/// F1 from decision counts. No predictions and no golds gives 1.0, with
/// the flag set.
pub fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> (f64, bool) {
    if tp + fp + fn_ == 0 {
        return (1.0, true);
    }
    (2.0 * tp as f64 / (2 * tp + fp + fn_) as f64, false)
}

fn set_counts(pred: &TypeSet, gold: &TypeSet) -> (usize, usize, usize) {
    let tp = pred.intersection(gold).count();
    (tp, pred.len() - tp, gold.len() - tp)
}

pub fn check_aligned(preds: &Labels, golds: &Labels) -> Result<()> {
    if preds.len() != golds.len() {
        return Err(Error::Validation(format!(
            "{} predictions for {} gold entities",
            preds.len(),
            golds.len()
        )));
    }
    if let Some((p, g)) = preds.iter().zip(golds).find(|(p, g)| p.0 != g.0) {
        return Err(Error::Validation(format!(
            "prediction for `{}` aligned with gold entity `{}`",
            p.0, g.0
        )));
    }
    Ok(())
}

/// Fraction of entities whose predicted set equals the gold set. 0 for no entities.
pub fn strict_accuracy(preds: &Labels, golds: &Labels) -> Result<f64> {
    check_aligned(preds, golds)?;
    if golds.is_empty() {
        return Ok(0.0);
    }
    let ok = preds.iter().zip(golds).filter(|(p, g)| p.1 == g.1).count();
    Ok(ok as f64 / golds.len() as f64)
}

/// F1 over all pooled entity-type decisions.
pub fn micro_f1(preds: &Labels, golds: &Labels) -> Result<f64> {
    check_aligned(preds, golds)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, g) in preds.iter().zip(golds) {
        let (a, b, c) = set_counts(&p.1, &g.1);
        tp += a;
        fp += b;
        fn_ += c;
    }
    Ok(f1_from_counts(tp, fp, fn_).0)
}

/// Per-entity F1, averaged over entities. 0 for no entities.
pub fn entity_macro_f1(preds: &Labels, golds: &Labels) -> Result<f64> {
    check_aligned(preds, golds)?;
    if golds.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = preds
        .iter()
        .zip(golds)
        .map(|(p, g)| {
            let (a, b, c) = set_counts(&p.1, &g.1);
            f1_from_counts(a, b, c).0
        })
        .sum();
    Ok(sum / golds.len() as f64)
}

/// Entities whose predicted and gold sets are both empty.
pub fn both_empty_count(preds: &Labels, golds: &Labels) -> usize {
    preds
        .iter()
        .zip(golds)
        .filter(|(p, g)| p.1.is_empty() && g.1.is_empty())
        .count()
}

/// F1 of the decisions for type `t`; `None` when no gold entity has `t`.
pub fn type_f1(preds: &Labels, golds: &Labels, t: &str) -> Result<Option<f64>> {
    check_aligned(preds, golds)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, g) in preds.iter().zip(golds) {
        match (p.1.contains(t), g.1.contains(t)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    if tp + fn_ == 0 {
        return Ok(None);
    }
    Ok(Some(f1_from_counts(tp, fp, fn_).0))
}

/// Mean per-type F1 over `types`, skipping types without gold entities.
/// Returns the mean (`None` if every type was skipped) and the number skipped.
pub fn type_macro_f1(preds: &Labels, golds: &Labels, types: &[String]) -> Result<(Option<f64>, usize)> {
    let mut sum = 0.0;
    let mut n = 0;
    let mut skipped = 0;
    for t in types {
        match type_f1(preds, golds, t)? {
            Some(f) => {
                sum += f;
                n += 1;
            }
            None => skipped += 1,
        }
    }
    Ok(((n > 0).then(|| sum / n as f64), skipped))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeSliceBounds {
    /// Head types have at least this many train entities.
    pub head_min: usize,
    /// Tail types have fewer than this many train entities.
    pub tail_max_exclusive: usize,
}

impl Default for TypeSliceBounds {
    fn default() -> Self {
        TypeSliceBounds {
            head_min: HEAD_TYPE_MIN,
            tail_max_exclusive: TAIL_TYPE_MAX_EXCLUSIVE,
        }
    }
}

impl TypeSliceBounds {
    pub fn is_head(&self, train_count: usize) -> bool {
        train_count >= self.head_min
    }

    pub fn is_tail(&self, train_count: usize) -> bool {
        train_count < self.tail_max_exclusive
    }
}

/// Number of train entities carrying each type (zero for unused types).
pub fn train_type_counts(train: &[EntityRecord], types: &[String]) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = types.iter().map(|t| (t.clone(), 0)).collect();
    for e in train {
        for t in &e.gold_types {
            *counts.entry(t.clone()).or_insert(0) += 1;
        }
    }
    counts
}
