use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::relu;
use super::{Matrix, Params};
use crate::error::{shape_err, Error, Result};

/// Widest convolution window the filter bank accepts.
pub const MAX_WIDTH: usize = 10;

/// Filters sharing one window width. Each row of `filters` is a flattened
/// `width × d_c` filter laid out position-major, matching consecutive rows
/// of the input matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterGroup {
    pub width: usize,
    pub filters: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvFilterBank {
    pub d_c: usize,
    pub groups: Vec<FilterGroup>,
}

impl ConvFilterBank {
    /// `n` filters for every width in `widths`, weights uniform in `±scale`.
    pub fn uniform<R: Rng>(
        d_c: usize,
        widths: &[usize],
        n: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let groups = widths
            .iter()
            .map(|&width| FilterGroup {
                width,
                filters: Matrix::uniform(n, width * d_c, scale, rng),
                bias: vec![0.0; n],
            })
            .collect();
        let bank = ConvFilterBank { d_c, groups };
        bank.validate()?;
        Ok(bank)
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::Validation("filter bank has no filters".into()));
        }
        for g in &self.groups {
            if !(1..=MAX_WIDTH).contains(&g.width) {
                return Err(Error::Validation(format!(
                    "filter width {} outside 1..={MAX_WIDTH}",
                    g.width
                )));
            }
            if g.filters.cols() != g.width * self.d_c || g.filters.rows() != g.bias.len() {
                return Err(shape_err(format!(
                    "filter group of width {} has shape {:?} and {} biases",
                    g.width,
                    g.filters.shape(),
                    g.bias.len()
                )));
            }
        }
        Ok(())
    }

    pub fn max_width(&self) -> usize {
        self.groups.iter().map(|g| g.width).max().unwrap_or(0)
    }

    /// Total number of filters, i.e. the pooled output length.
    pub fn num_filters(&self) -> usize {
        self.groups.iter().map(|g| g.filters.rows()).sum()
    }
}

impl Params for ConvFilterBank {
    fn param_slices(&self) -> Vec<&[f64]> {
        self.groups
            .iter()
            .flat_map(|g| [g.filters.as_slice(), g.bias.as_slice()])
            .collect()
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.groups
            .iter_mut()
            .flat_map(|g| [g.filters.as_mut_slice(), g.bias.as_mut_slice()])
            .collect()
    }
}

/// Forward record of [`conv_maxpool`], sufficient for the backward pass.
#[derive(Debug, Clone)]
pub struct ConvTrace {
    /// Pooled, rectified features in filter order.
    pub output: Vec<f64>,
    /// Start row of the winning window per filter.
    pub argmax: Vec<usize>,
    /// Pre-activation value at the winning window per filter.
    pub best: Vec<f64>,
    /// Gap between the best and second-best window per filter (∞ if only one window).
    pub runner_up_gap: Vec<f64>,
}

impl ConvTrace {
    /// Distance of the forward pass from a non-differentiable point: either
    /// a pooling tie or a rectifier kink.
    pub fn kink_margin(&self) -> f64 {
        self.best
            .iter()
            .zip(&self.runner_up_gap)
            .map(|(b, g)| b.abs().min(*g))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Narrow convolution of every filter over the rows of `c` (shape `l × d_c`),
/// rectified and max-pooled over positions.
pub fn conv_maxpool(c: &Matrix, bank: &ConvFilterBank) -> Result<ConvTrace> {
    if c.cols() != bank.d_c {
        return Err(shape_err(format!(
            "input has {} columns but filters expect d_c = {}",
            c.cols(),
            bank.d_c
        )));
    }
    if c.rows() < bank.max_width() {
        return Err(shape_err(format!(
            "input of length {} shorter than widest filter ({})",
            c.rows(),
            bank.max_width()
        )));
    }
    let k = bank.num_filters();
    let mut trace = ConvTrace {
        output: Vec::with_capacity(k),
        argmax: Vec::with_capacity(k),
        best: Vec::with_capacity(k),
        runner_up_gap: Vec::with_capacity(k),
    };
    for g in &bank.groups {
        let positions = c.rows() - g.width + 1;
        for f in 0..g.filters.rows() {
            let h = g.filters.row(f);
            let mut best = f64::NEG_INFINITY;
            let mut second = f64::NEG_INFINITY;
            let mut arg = 0;
            for i in 0..positions {
                let window = c.row_block(i, g.width);
                let s = super::dot(window, h) + g.bias[f];
                if s > best {
                    second = best;
                    best = s;
                    arg = i;
                } else if s > second {
                    second = s;
                }
            }
            trace.output.push(relu(best));
            trace.argmax.push(arg);
            trace.best.push(best);
            trace.runner_up_gap.push(best - second);
        }
    }
    Ok(trace)
}

/// Backward pass of [`conv_maxpool`]. Accumulates filter gradients into
/// `grad` and input gradients into `dc`.
pub fn conv_maxpool_backward(
    c: &Matrix,
    bank: &ConvFilterBank,
    trace: &ConvTrace,
    dout: &[f64],
    grad: &mut ConvFilterBank,
    dc: &mut Matrix,
) {
    let mut k = 0;
    for (g, gg) in bank.groups.iter().zip(grad.groups.iter_mut()) {
        let span = g.width * bank.d_c;
        for f in 0..g.filters.rows() {
            let d = dout[k];
            if trace.best[k] > 0.0 && d != 0.0 {
                let start = trace.argmax[k];
                let window = c.row_block(start, g.width);
                super::axpy(d, window, gg.filters.row_mut(f));
                gg.bias[f] += d;
                let off = start * bank.d_c;
                let dwin = &mut dc.as_mut_slice()[off..off + span];
                super::axpy(d, g.filters.row(f), dwin);
            }
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bank_with(width: usize, d_c: usize, filter: Vec<f64>, bias: f64) -> ConvFilterBank {
        ConvFilterBank {
            d_c,
            groups: vec![FilterGroup {
                width,
                filters: Matrix::from_vec(1, width * d_c, filter).unwrap(),
                bias: vec![bias],
            }],
        }
    }

    #[test]
    fn pattern_match_is_translation_invariant() {
        // Padding column is all zeros; the pattern [1, -1] then [0, 2] sits
        // at different offsets. Filter equals the pattern, so the match score
        // is 1 + 1 + 0 + 4 = 6 and every other window scores less.
        let pattern = [[1.0, -1.0], [0.0, 2.0]];
        let filter = vec![1.0, -1.0, 0.0, 2.0];
        let bank = bank_with(2, 2, filter, 0.0);
        let mut outputs = Vec::new();
        for pos in 0..5 {
            let mut c = Matrix::zeros(6, 2);
            c.row_mut(pos).copy_from_slice(&pattern[0]);
            c.row_mut(pos + 1).copy_from_slice(&pattern[1]);
            let t = conv_maxpool(&c, &bank).unwrap();
            assert_eq!(t.argmax[0], pos);
            outputs.push(t.output[0]);
        }
        assert!(outputs.iter().all(|&o| o == 6.0));
    }

    #[test]
    fn zero_filter_pools_to_zero() {
        let bank = bank_with(3, 2, vec![0.0; 6], 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = Matrix::uniform(7, 2, 1.0, &mut rng);
        assert_eq!(conv_maxpool(&c, &bank).unwrap().output, vec![0.0]);
    }

    #[test]
    fn feature_map_length_is_narrow() {
        let bank = bank_with(3, 1, vec![1.0, 1.0, 1.0], 0.0);
        let c = Matrix::from_vec(10, 1, (0..10).map(f64::from).collect()).unwrap();
        let t = conv_maxpool(&c, &bank).unwrap();
        // Windows start at 0..=7, i.e. l − w + 1 = 8 positions; the last wins.
        assert_eq!(t.argmax[0], 7);
        assert_eq!(t.output[0], 7.0 + 8.0 + 9.0);
    }

    #[test]
    fn figure_bank_has_seven_outputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut bank = ConvFilterBank::uniform(5, &[2], 3, 0.1, &mut rng).unwrap();
        bank.groups
            .extend(ConvFilterBank::uniform(5, &[4], 4, 0.1, &mut rng).unwrap().groups);
        let c = Matrix::uniform(9, 5, 1.0, &mut rng);
        assert_eq!(conv_maxpool(&c, &bank).unwrap().output.len(), 7);
    }

    #[test]
    fn too_short_input_rejected() {
        let bank = bank_with(4, 1, vec![1.0; 4], 0.0);
        assert!(conv_maxpool(&Matrix::zeros(3, 1), &bank).is_err());
    }

    #[test]
    fn width_bounds_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(ConvFilterBank::uniform(2, &[11], 1, 0.1, &mut rng).is_err());
        assert!(ConvFilterBank::uniform(2, &[0], 1, 0.1, &mut rng).is_err());
        assert!(ConvFilterBank::uniform(2, &[1, 10], 1, 0.1, &mut rng).is_ok());
    }
}
