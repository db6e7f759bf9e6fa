use serde::{Deserialize, Serialize};

use super::Params;

/// AdaGrad with per-coordinate accumulated squared gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaGrad {
    pub lr: f64,
    pub eps: f64,
    acc: Vec<Vec<f64>>,
}

impl Default for AdaGrad {
    fn default() -> Self {
        AdaGrad::new(0.01, 1e-8)
    }
}

impl AdaGrad {
    pub fn new(lr: f64, eps: f64) -> Self {
        AdaGrad {
            lr,
            eps,
            acc: Vec::new(),
        }
    }

    /// One update of every parameter slice of `params` from the matching slice of `grads`.
    pub fn step<P: Params>(&mut self, params: &mut P, grads: &P) {
        let gs = grads.param_slices();
        let ps = params.param_slices_mut();
        assert_eq!(ps.len(), gs.len(), "parameter and gradient layouts differ");
        if self.acc.is_empty() {
            self.acc = gs.iter().map(|g| vec![0.0; g.len()]).collect();
        }
        for ((p, g), acc) in ps.into_iter().zip(gs).zip(self.acc.iter_mut()) {
            adagrad_update(self.lr, self.eps, p, g, acc);
        }
    }

    pub fn accumulators(&self) -> &[Vec<f64>] {
        &self.acc
    }
}

/// `acc += g²; p −= lr·g / (√acc + ε)`, element-wise. Zero gradients leave
/// both the accumulator and the parameter untouched.
pub fn adagrad_update(lr: f64, eps: f64, params: &mut [f64], grads: &[f64], acc: &mut [f64]) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), acc.len());
    for ((p, &g), a) in params.iter_mut().zip(grads).zip(acc.iter_mut()) {
        if g != 0.0 {
            *a += g * g;
            *p -= lr * g / (a.sqrt() + eps);
        }
    }
}
