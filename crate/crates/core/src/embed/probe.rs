//! Linear probe: L2-regularized logistic regression on held-out halves,
//! used to measure how linearly separable two classes of vectors are.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::nn::{dot, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    /// Held-out accuracy at probability threshold 0.5.
    pub accuracy: f64,
    /// Held-out area under the ROC curve.
    pub auc: f64,
}

/// Trains on a random half of `(xs, labels)` and scores the other half.
pub fn linear_probe(xs: &[Vec<f64>], labels: &[bool], seed: u64) -> ProbeResult {
    assert_eq!(xs.len(), labels.len());
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = order.split_at(xs.len() / 2);
    let dim = xs.first().map_or(0, Vec::len);

    // Standardize with training statistics.
    let mut mean = vec![0.0; dim];
    let mut sd = vec![0.0; dim];
    for &i in train {
        for (m, x) in mean.iter_mut().zip(&xs[i]) {
            *m += x / train.len() as f64;
        }
    }
    for &i in train {
        for ((s, x), m) in sd.iter_mut().zip(&xs[i]).zip(&mean) {
            *s += (x - m).powi(2) / train.len() as f64;
        }
    }
    let norm = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(&mean)
            .zip(&sd)
            .map(|((v, m), s)| (v - m) / s.sqrt().max(1e-12))
            .collect()
    };
    let train_x: Vec<Vec<f64>> = train.iter().map(|&i| norm(&xs[i])).collect();
    let train_y: Vec<f64> = train.iter().map(|&i| labels[i] as u8 as f64).collect();

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let lambda = 1e-2;
    let lr = 0.5;
    let n = train_x.len().max(1) as f64;
    for _ in 0..500 {
        let mut gw = vec![0.0; dim];
        let mut gb = 0.0;
        for (x, y) in train_x.iter().zip(&train_y) {
            let err = sigmoid(dot(&w, x) + b) - y;
            for (g, xi) in gw.iter_mut().zip(x) {
                *g += err * xi / n;
            }
            gb += err / n;
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= lr * (g + lambda * *wi);
        }
        b -= lr * gb;
    }

    let scored: Vec<(f64, bool)> = test
        .iter()
        .map(|&i| (dot(&w, &norm(&xs[i])) + b, labels[i]))
        .collect();
    let correct = scored.iter().filter(|(s, y)| (*s > 0.0) == *y).count();
    ProbeResult {
        accuracy: correct as f64 / scored.len().max(1) as f64,
        auc: auc(&scored),
    }
}

/// Probability that a random positive outscores a random negative (ties count half).
pub fn auc(scored: &[(f64, bool)]) -> f64 {
    let pos: Vec<f64> = scored.iter().filter(|p| p.1).map(|p| p.0).collect();
    let neg: Vec<f64> = scored.iter().filter(|p| !p.1).map(|p| p.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return 0.5;
    }
    let mut wins = 0.0;
    for p in &pos {
        for q in &neg {
            wins += if p > q {
                1.0
            } else if p == q {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}
