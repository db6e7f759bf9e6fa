use serde::{Deserialize, Serialize};

use crate::eval::f1_from_counts;

/// Threshold used before calibration and for types without dev positives.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub threshold: f64,
    /// Dev F1 of the type at this threshold.
    pub f1: f64,
    /// Set when the type had no dev positives and fell back to the default.
    pub fallback: bool,
}

/// Cut points for one type's dev scores: below the minimum, midpoints
/// between consecutive distinct scores, and above the maximum. Assigning
/// with strict `>` at each cut realizes every distinct prediction set.
pub fn candidate_cuts(scores: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = scores.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    let Some((&lo, &hi)) = s.first().zip(s.last()) else {
        return vec![DEFAULT_THRESHOLD];
    };
    let mut cuts = Vec::with_capacity(s.len() + 1);
    cuts.push(lo / 2.0);
    cuts.extend(s.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    cuts.push((hi + 1.0) / 2.0);
    cuts
}

/// F1 of assigning the type to dev entities scoring strictly above `threshold`.
pub fn f1_at(scores: &[f64], gold: &[bool], threshold: f64) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&s, &g) in scores.iter().zip(gold) {
        match (s > threshold, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    f1_from_counts(tp, fp, fn_).0
}

/// Chooses the cut maximizing the type's dev F1, smallest cut on ties.
/// Single sweep over scores sorted high to low.
pub fn calibrate_type(scores: &[f64], gold: &[bool]) -> Calibration {
    assert_eq!(scores.len(), gold.len());
    let positives = gold.iter().filter(|&&g| g).count();
    if positives == 0 {
        return Calibration {
            threshold: DEFAULT_THRESHOLD,
            f1: f1_at(scores, gold, DEFAULT_THRESHOLD),
            fallback: true,
        };
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    // Start with everything below the cut (cut above the maximum), then
    // lower the cut past one group of equal scores at a time.
    let hi = scores[order[0]];
    let mut best = Calibration {
        threshold: (hi + 1.0) / 2.0,
        f1: f1_from_counts(0, 0, positives).0,
        fallback: false,
    };
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if gold[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let cut = match order.get(i) {
            Some(&next) => (scores[next] + s) / 2.0,
            None => s / 2.0,
        };
        let f1 = f1_from_counts(tp, fp, positives - tp).0;
        // Cuts only decrease along the sweep, so ties move to the smaller cut.
        if f1 >= best.f1 {
            best = Calibration {
                threshold: cut,
                f1,
                fallback: false,
            };
        }
    }
    best
}

/// Per-type calibration from dev probabilities (`scores[entity][type]`).
pub fn calibrate_thresholds(scores: &[Vec<f64>], gold: &[Vec<bool>], n_types: usize) -> Vec<Calibration> {
    (0..n_types)
        .map(|t| {
            let s: Vec<f64> = scores.iter().map(|row| row[t]).collect();
            let g: Vec<bool> = gold.iter().map(|row| row[t]).collect();
            calibrate_type(&s, &g)
        })
        .collect()
}
