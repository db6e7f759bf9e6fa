/// Probability clamp used by [`bce_loss`].
pub const BCE_EPS: f64 = 1e-7;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Rectifier; the sub-gradient at 0 is taken to be 0.
#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[inline]
pub fn relu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Binary cross entropy summed over components, with probabilities clamped
/// to `[ε, 1−ε]`.
pub fn bce_loss(p: &[f64], m: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), m.len());
    p.iter()
        .zip(m)
        .map(|(&p, &m)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            -(m * p.ln() + (1.0 - m) * (1.0 - p).ln())
        })
        .sum()
}

/// Gradient of [`bce_loss`] with respect to the pre-sigmoid logits.
///
/// Where the clamp is active the loss is locally constant and the gradient is 0.
pub fn bce_logit_grad(p: &[f64], m: &[f64]) -> Vec<f64> {
    p.iter()
        .zip(m)
        .map(|(&p, &m)| {
            if !(BCE_EPS..=1.0 - BCE_EPS).contains(&p) {
                0.0
            } else {
                p - m
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction_is_near_zero() {
        let m = [1.0, 0.0, 1.0];
        let loss = bce_loss(&m, &m);
        let expected = 3.0 * -(1.0 - BCE_EPS).ln();
        assert!((loss - expected).abs() < 1e-15);
        assert!(loss < 1e-6);
    }

    #[test]
    fn uniform_half_is_n_log2() {
        let p = [0.5; 4];
        for m in [[0.0, 1.0, 1.0, 0.0], [1.0; 4]] {
            assert!((bce_loss(&p, &m) - 4.0 * 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_arithmetic() {
        let loss = bce_loss(&[0.9, 0.1], &[1.0, 0.0]);
        assert!((loss - 0.210_721_031_315_652_3).abs() < 1e-12);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn bce_is_non_negative(p in prop::collection::vec(0.0f64..=1.0, 1..8), seed in 0u64..1000) {
            let m: Vec<f64> = (0..p.len()).map(|i| ((seed >> (i % 60)) & 1) as f64).collect();
            prop_assert!(bce_loss(&p, &m) >= 0.0);
        }

        #[test]
        fn complementary_targets_bound(p in prop::collection::vec(0.01f64..0.99, 1..6), half in any::<bool>()) {
            // bce(p, m) + bce(p, 1−m) = Σ −log(p(1−p)) ≥ 2n·log 2, tight iff every p is 0.5.
            let p: Vec<f64> = if half { vec![0.5; p.len()] } else { p };
            let m: Vec<f64> = (0..p.len()).map(|i| (i % 2) as f64).collect();
            let flipped: Vec<f64> = m.iter().map(|x| 1.0 - x).collect();
            let total = bce_loss(&p, &m) + bce_loss(&p, &flipped);
            let bound = 2.0 * p.len() as f64 * 2f64.ln();
            prop_assert!(total >= bound - 1e-12);
            if p.iter().all(|&x| x == 0.5) {
                prop_assert!((total - bound).abs() < 1e-12);
            } else {
                prop_assert!(total > bound);
            }
        }
    }
}
