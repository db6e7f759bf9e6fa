use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Matrix, Params};
use crate::error::{shape_err, Result};

/// Affine layer `W·x + b` with `W` of shape `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl DenseLayer {
    pub fn new(w: Matrix, b: Vec<f64>) -> Result<Self> {
        if w.rows() != b.len() {
            return Err(shape_err(format!(
                "dense layer with {} rows and bias of length {}",
                w.rows(),
                b.len()
            )));
        }
        Ok(DenseLayer { w, b })
    }

    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        DenseLayer {
            w: Matrix::zeros(out_dim, in_dim),
            b: vec![0.0; out_dim],
        }
    }

    pub fn uniform<R: Rng>(out_dim: usize, in_dim: usize, scale: f64, rng: &mut R) -> Self {
        DenseLayer {
            w: Matrix::uniform(out_dim, in_dim, scale, rng),
            b: vec![0.0; out_dim],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.w.matvec(x)?;
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        Ok(y)
    }

    /// Accumulates parameter gradients into `grad` and returns `∂L/∂x`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut DenseLayer) -> Vec<f64> {
        grad.w.add_outer(dy, x);
        for (g, d) in grad.b.iter_mut().zip(dy) {
            *g += d;
        }
        let mut dx = vec![0.0; x.len()];
        self.w.matvec_t_add(dy, &mut dx);
        dx
    }
}

impl Params for DenseLayer {
    fn param_slices(&self) -> Vec<&[f64]> {
        vec![self.w.as_slice(), &self.b]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.w.as_mut_slice(), &mut self.b]
    }
}

/// Functional form of the dense forward pass.
pub fn dense_forward(layer: &DenseLayer, x: &[f64]) -> Result<Vec<f64>> {
    layer.forward(x)
}
