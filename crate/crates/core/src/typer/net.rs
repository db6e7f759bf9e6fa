use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result};
use crate::nn::{axpy, bce_logit_grad, bce_loss, relu, relu_grad, sigmoid, DenseLayer, Matrix, Params};
use crate::repr::{ClrEncoder, ClrTrace, EntityInput, InputPart, Segment, SegmentKind};

/// Trainable part of the typer: the input layer split by representation
/// segment, the output layer, and the CLR encoders.
///
/// Dense and CLR segments use an `h × dim` weight block; sparse segments
/// store theirs transposed (`dim × h`) so an active feature is one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TyperNet {
    pub w_in: Vec<Matrix>,
    pub b_in: Vec<f64>,
    pub out: DenseLayer,
    pub encoders: Vec<ClrEncoder>,
}

pub struct NetTrace<'a> {
    xs: Vec<SegInput<'a>>,
    z: Vec<f64>,
    a: Vec<f64>,
    pub probs: Vec<f64>,
}

enum SegInput<'a> {
    Dense(&'a [f64]),
    Clr(usize, ClrTrace),
    Sparse(&'a [usize]),
}

impl TyperNet {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng>(segments: &[Segment], encoders: Vec<ClrEncoder>, hidden: usize, n_types: usize, rng: &mut R) -> Self {
        let d: usize = segments.iter().map(|s| s.dim).sum();
        let scale_in = (6.0 / (d + hidden) as f64).sqrt();
        let w_in = segments
            .iter()
            .map(|s| match s.kind {
                SegmentKind::Sparse => Matrix::uniform(s.dim, hidden, scale_in, rng),
                _ => Matrix::uniform(hidden, s.dim, scale_in, rng),
            })
            .collect();
        let scale_out = (6.0 / (hidden + n_types) as f64).sqrt();
        TyperNet {
            w_in,
            b_in: vec![0.0; hidden],
            out: DenseLayer::uniform(n_types, hidden, scale_out, rng),
            encoders,
        }
    }

    pub fn hidden(&self) -> usize {
        self.b_in.len()
    }

    pub fn n_types(&self) -> usize {
        self.out.out_dim()
    }

    pub fn zeros_like(&self) -> Self {
        let mut g = self.clone();
        g.zero();
        g
    }

    pub fn forward<'a>(&self, segments: &[Segment], input: &'a EntityInput) -> Result<NetTrace<'a>> {
        if input.parts.len() != segments.len() || segments.len() != self.w_in.len() {
            return Err(shape_err(format!(
                "input has {} parts, model expects {}",
                input.parts.len(),
                self.w_in.len()
            )));
        }
        let mut z = self.b_in.clone();
        let mut xs = Vec::with_capacity(segments.len());
        for ((seg, part), w) in segments.iter().zip(&input.parts).zip(&self.w_in) {
            let x = match (part, seg.kind) {
                (InputPart::Dense(v), SegmentKind::Frozen) => {
                    if v.len() != w.cols() {
                        return Err(shape_err(format!("{} has {} values, model expects {}", seg.level, v.len(), w.cols())));
                    }
                    w.matvec_add(v, &mut z);
                    SegInput::Dense(v)
                }
                (InputPart::Chars(ids), SegmentKind::Clr(i)) => {
                    let t = self.encoders[i].forward(ids)?;
                    w.matvec_add(&t.output, &mut z);
                    SegInput::Clr(i, t)
                }
                (InputPart::Sparse(cols), SegmentKind::Sparse) => {
                    for &c in cols {
                        if c >= w.rows() {
                            return Err(shape_err(format!("feature column {c} outside {}", seg.level)));
                        }
                        axpy(1.0, w.row(c), &mut z);
                    }
                    SegInput::Sparse(cols)
                }
                _ => return Err(shape_err(format!("input part does not match segment {}", seg.level))),
            };
            xs.push(x);
        }
        let a: Vec<f64> = z.iter().map(|&v| relu(v)).collect();
        let probs = self.out.forward(&a)?.into_iter().map(sigmoid).collect();
        Ok(NetTrace { xs, z, a, probs })
    }

    pub fn predict_proba(&self, segments: &[Segment], input: &EntityInput) -> Result<Vec<f64>> {
        Ok(self.forward(segments, input)?.probs)
    }

    /// Summed binary cross entropy of one instance against gold indicators.
    pub fn loss(&self, segments: &[Segment], input: &EntityInput, gold: &[f64]) -> Result<f64> {
        Ok(bce_loss(&self.forward(segments, input)?.probs, gold))
    }

    /// Accumulates `scale ·` the gradient of the instance loss into `grad`.
    /// Sparse rows that receive gradient are appended to `touched` as `(segment, row)`.
    pub fn backward(&self, trace: &NetTrace<'_>, gold: &[f64], scale: f64, grad: &mut TyperNet, touched: &mut Vec<(usize, usize)>) {
        let mut dl = bce_logit_grad(&trace.probs, gold);
        dl.iter_mut().for_each(|d| *d *= scale);
        let da = self.out.backward(&trace.a, &dl, &mut grad.out);
        let dz: Vec<f64> = da.iter().zip(&trace.z).map(|(d, &z)| d * relu_grad(z)).collect();
        axpy(1.0, &dz, &mut grad.b_in);
        for (s, x) in trace.xs.iter().enumerate() {
            match x {
                SegInput::Dense(v) => grad.w_in[s].add_outer(&dz, v),
                SegInput::Clr(i, t) => {
                    grad.w_in[s].add_outer(&dz, &t.output);
                    let mut dx = vec![0.0; t.output.len()];
                    self.w_in[s].matvec_t_add(&dz, &mut dx);
                    self.encoders[*i].backward(t, &dx, &mut grad.encoders[*i]);
                }
                SegInput::Sparse(cols) => {
                    for &c in *cols {
                        axpy(1.0, &dz, grad.w_in[s].row_mut(c));
                        touched.push((s, c));
                    }
                }
            }
        }
    }

    /// Smallest distance of the forward pass from a kink (hidden rectifier
    /// or CNN pooling); used to keep finite-difference checks honest.
    pub fn kink_margin(&self, trace: &NetTrace<'_>) -> f64 {
        let hidden = trace.z.iter().map(|z| z.abs()).fold(f64::INFINITY, f64::min);
        trace
            .xs
            .iter()
            .filter_map(|x| match x {
                SegInput::Clr(_, t) => Some(t.kink_margin()),
                _ => None,
            })
            .fold(hidden, f64::min)
    }
}

impl Params for TyperNet {
    fn param_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.w_in.iter().map(Matrix::as_slice).collect();
        out.push(&self.b_in);
        out.extend(self.out.param_slices());
        for e in &self.encoders {
            out.extend(e.param_slices());
        }
        out
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self.w_in.iter_mut().map(Matrix::as_mut_slice).collect();
        out.push(&mut self.b_in);
        out.extend(self.out.param_slices_mut());
        for e in &mut self.encoders {
            out.extend(e.param_slices_mut());
        }
        out
    }
}
