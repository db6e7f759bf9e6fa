//! Numeric kernels: dense layers, narrow convolution with max pooling, an
//! LSTM cell, binary cross entropy, AdaGrad and a finite-difference checker.
//!
//! Every layer exposes an explicit forward/backward pair; there is no
//! autodiff graph. Parameters and their gradients share a type and are
//! walked through the [`Params`] trait.

mod adagrad;
mod conv;
mod dense;
mod gradcheck;
mod loss;
mod lstm;
mod matrix;
mod params;

pub use adagrad::{adagrad_update, AdaGrad};
pub use conv::{conv_maxpool, conv_maxpool_backward, ConvFilterBank, ConvTrace, FilterGroup, MAX_WIDTH};
pub use dense::{dense_forward, DenseLayer};
pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport};
pub use loss::{bce_logit_grad, bce_loss, relu, relu_grad, sigmoid, BCE_EPS};
pub use lstm::{lstm_backward, lstm_forward, LstmCell, LstmInputGrads, LstmTrace};
pub use matrix::{axpy, dot, Matrix};
pub use params::Params;

/// Uniform init range for non-embedding parameters.
pub const INIT_SCALE: f64 = 0.05;
