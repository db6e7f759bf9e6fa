use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{shape_err, Error, Result};

#[derive(Debug, Clone)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub step: f64,
    /// Check at most this many coordinates, chosen at random; `None` checks all.
    pub max_params: Option<usize>,
    /// Lower bound on the relative-error denominator `|a| + |n|`, so that
    /// coordinates with vanishing gradients are compared absolutely.
    pub denom_floor: f64,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            step: 1e-4,
            max_params: None,
            denom_floor: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Flat index of the worst coordinate.
    pub worst: usize,
    pub analytic_at_worst: f64,
    pub numeric_at_worst: f64,
    pub checked: usize,
}

/// Compares `analytic` against central finite differences of `loss` around
/// `params`; returns the largest relative error `|a − n| / max(|a| + |n|, floor)`.
pub fn grad_check<F>(
    params: &[f64],
    analytic: &[f64],
    mut loss: F,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if params.len() != analytic.len() {
        return Err(shape_err(format!(
            "{} parameters but {} gradient entries",
            params.len(),
            analytic.len()
        )));
    }
    let indices: Vec<usize> = match opts.max_params {
        Some(k) if k < params.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut idx = sample(&mut rng, params.len(), k).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..params.len()).collect(),
    };
    let mut point = params.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: 0,
        analytic_at_worst: 0.0,
        numeric_at_worst: 0.0,
        checked: indices.len(),
    };
    for &i in &indices {
        let orig = point[i];
        point[i] = orig + opts.step;
        let up = loss(&point)?;
        point[i] = orig - opts.step;
        let down = loss(&point)?;
        point[i] = orig;
        if !up.is_finite() || !down.is_finite() || !analytic[i].is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite value while checking coordinate {i}"
            )));
        }
        let numeric = (up - down) / (2.0 * opts.step);
        let a = analytic[i];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(opts.denom_floor);
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst = i;
            report.analytic_at_worst = a;
            report.numeric_at_worst = numeric;
        }
    }
    Ok(report)
}
