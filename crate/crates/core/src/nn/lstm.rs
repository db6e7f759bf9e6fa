use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::sigmoid;
use super::{Matrix, Params};
use crate::error::{shape_err, Error, Result};

/// LSTM cell without peepholes. Gate rows are stacked as
/// `[input, forget, output, candidate]`, each `hidden` rows tall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl LstmCell {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmCell {
            w: Matrix::zeros(4 * hidden, input_dim),
            u: Matrix::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        }
    }

    pub fn uniform<R: Rng>(input_dim: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        LstmCell {
            w: Matrix::uniform(4 * hidden, input_dim, scale, rng),
            u: Matrix::uniform(4 * hidden, hidden, scale, rng),
            b: vec![0.0; 4 * hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden();
        if self.u.rows() != 4 * h || self.w.rows() != 4 * h || self.b.len() != 4 * h {
            return Err(shape_err(format!(
                "LSTM gate shapes W {:?}, U {:?}, b {} disagree with hidden size {h}",
                self.w.shape(),
                self.u.shape(),
                self.b.len()
            )));
        }
        Ok(())
    }
}

impl Params for LstmCell {
    fn param_slices(&self) -> Vec<&[f64]> {
        vec![self.w.as_slice(), self.u.as_slice(), &self.b]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.w.as_mut_slice(), self.u.as_mut_slice(), &mut self.b]
    }
}

/// Everything the backward pass needs from a forward run.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    /// Hidden states `h_0 … h_n` (index 0 is the initial state).
    pub h: Vec<Vec<f64>>,
    /// Cell states `c_0 … c_n`.
    pub c: Vec<Vec<f64>>,
    /// Post-activation gates per step, `[i, f, o, g]` stacked.
    gates: Vec<Vec<f64>>,
}

impl LstmTrace {
    /// Hidden states produced by the inputs, `h_1 … h_n`.
    pub fn states(&self) -> &[Vec<f64>] {
        &self.h[1..]
    }

    pub fn last(&self) -> &[f64] {
        self.h.last().expect("trace always holds the initial state")
    }
}

/// Gradients reaching the inputs of an unrolled LSTM.
#[derive(Debug, Clone)]
pub struct LstmInputGrads {
    pub dxs: Vec<Vec<f64>>,
    pub dh0: Vec<f64>,
    pub dc0: Vec<f64>,
}

/// Runs the cell over `xs` (one input per row), from initial states `h0`, `c0`.
pub fn lstm_forward(cell: &LstmCell, xs: &Matrix, h0: &[f64], c0: &[f64]) -> Result<LstmTrace> {
    let n = xs.rows();
    let hd = cell.hidden();
    if n == 0 {
        return Err(Error::Validation("LSTM over an empty sequence".into()));
    }
    if xs.cols() != cell.input_dim() || h0.len() != hd || c0.len() != hd {
        return Err(shape_err(format!(
            "LSTM with input dim {} and hidden {hd} given inputs of width {}, h0 {}, c0 {}",
            cell.input_dim(),
            xs.cols(),
            h0.len(),
            c0.len()
        )));
    }
    let mut trace = LstmTrace {
        h: Vec::with_capacity(n + 1),
        c: Vec::with_capacity(n + 1),
        gates: Vec::with_capacity(n),
    };
    trace.h.push(h0.to_vec());
    trace.c.push(c0.to_vec());
    for t in 0..n {
        let mut z = cell.b.clone();
        cell.w.matvec_add(xs.row(t), &mut z);
        cell.u.matvec_add(&trace.h[t], &mut z);
        for (j, zj) in z.iter_mut().enumerate() {
            *zj = if j < 3 * hd { sigmoid(*zj) } else { zj.tanh() };
        }
        let c_prev = &trace.c[t];
        let mut c = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        for k in 0..hd {
            let (i, f, o, g) = (z[k], z[hd + k], z[2 * hd + k], z[3 * hd + k]);
            c[k] = f * c_prev[k] + i * g;
            h[k] = o * c[k].tanh();
        }
        trace.gates.push(z);
        trace.c.push(c);
        trace.h.push(h);
    }
    Ok(trace)
}

/// Backpropagation through time from a gradient on the last hidden state.
pub fn lstm_backward(
    cell: &LstmCell,
    xs: &Matrix,
    trace: &LstmTrace,
    dh_last: &[f64],
    grad: &mut LstmCell,
) -> LstmInputGrads {
    let n = xs.rows();
    let hd = cell.hidden();
    let mut dh = dh_last.to_vec();
    let mut dc = vec![0.0; hd];
    let mut dxs = vec![vec![0.0; xs.cols()]; n];
    let mut dz = vec![0.0; 4 * hd];
    for t in (0..n).rev() {
        let gates = &trace.gates[t];
        let c_prev = &trace.c[t];
        let c = &trace.c[t + 1];
        for k in 0..hd {
            let (i, f, o, g) = (gates[k], gates[hd + k], gates[2 * hd + k], gates[3 * hd + k]);
            let tc = c[k].tanh();
            let d_o = dh[k] * tc;
            dc[k] += dh[k] * o * (1.0 - tc * tc);
            let di = dc[k] * g;
            let dg = dc[k] * i;
            let df = dc[k] * c_prev[k];
            dz[k] = di * i * (1.0 - i);
            dz[hd + k] = df * f * (1.0 - f);
            dz[2 * hd + k] = d_o * o * (1.0 - o);
            dz[3 * hd + k] = dg * (1.0 - g * g);
            dc[k] *= f;
        }
        grad.w.add_outer(&dz, xs.row(t));
        grad.u.add_outer(&dz, &trace.h[t]);
        for (gb, d) in grad.b.iter_mut().zip(&dz) {
            *gb += d;
        }
        cell.w.matvec_t_add(&dz, &mut dxs[t]);
        let mut dh_prev = vec![0.0; hd];
        cell.u.matvec_t_add(&dz, &mut dh_prev);
        dh = dh_prev;
    }
    LstmInputGrads {
        dxs,
        dh0: dh,
        dc0: dc,
    }
}
