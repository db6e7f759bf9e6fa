use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chars::{gather_rows, CharInventory};
use crate::error::{Error, Result};
use crate::nn::{
    axpy, conv_maxpool, conv_maxpool_backward, lstm_backward, lstm_forward, ConvFilterBank, ConvTrace, LstmCell,
    LstmTrace, Matrix, Params, INIT_SCALE,
};

/// Default maximum padded name length, markers included.
pub const DEFAULT_MAX_LEN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClrKind {
    Forward,
    Cnn,
    Lstm,
    BiLstm,
}

impl ClrKind {
    pub fn label(self) -> &'static str {
        match self {
            ClrKind::Forward => "forward",
            ClrKind::Cnn => "cnn",
            ClrKind::Lstm => "lstm",
            ClrKind::BiLstm => "bilstm",
        }
    }
}

impl fmt::Display for ClrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClrHyper {
    pub d_c: usize,
    pub max_len: usize,
    /// CNN filter widths.
    pub widths: Vec<usize>,
    /// CNN feature maps per width.
    pub filters_per_width: usize,
    /// LSTM hidden size.
    pub d_h: usize,
}

impl ClrHyper {
    pub fn defaults(kind: ClrKind) -> Self {
        let (d_c, d_h) = match kind {
            ClrKind::Forward => (15, 0),
            ClrKind::Cnn => (10, 0),
            ClrKind::Lstm => (70, 70),
            ClrKind::BiLstm => (50, 50),
        };
        ClrHyper {
            d_c,
            max_len: DEFAULT_MAX_LEN,
            widths: (1..=7).collect(),
            filters_per_width: 50,
            d_h,
        }
    }

    pub fn validate(&self, kind: ClrKind) -> Result<()> {
        if self.d_c == 0 {
            return Err(Error::Config("character embedding size must be positive".into()));
        }
        if self.max_len < 3 {
            return Err(Error::Config(format!(
                "padded name length must be at least 3, got {}",
                self.max_len
            )));
        }
        match kind {
            ClrKind::Cnn => {
                if self.widths.is_empty() || self.filters_per_width == 0 {
                    return Err(Error::Config("CNN needs at least one filter width and one filter".into()));
                }
                if let Some(&w) = self.widths.iter().find(|&&w| w > self.max_len) {
                    return Err(Error::Config(format!(
                        "filter width {w} exceeds padded name length {}",
                        self.max_len
                    )));
                }
            }
            ClrKind::Lstm | ClrKind::BiLstm if self.d_h == 0 => {
                return Err(Error::Config("LSTM hidden size must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClrNet {
    Forward,
    Cnn(ConvFilterBank),
    Lstm(LstmCell),
    BiLstm { fwd: LstmCell, bwd: LstmCell },
}

/// A character-level encoder: its own character table plus the network
/// reading the character matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClrEncoder {
    pub kind: ClrKind,
    pub inventory: CharInventory,
    pub max_len: usize,
    pub table: Matrix,
    pub net: ClrNet,
}

/// Forward record of a [`ClrEncoder`] run.
#[derive(Debug, Clone)]
pub struct ClrTrace {
    pub ids: Vec<usize>,
    pub chars: Matrix,
    pub output: Vec<f64>,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Forward,
    Cnn(ConvTrace),
    Lstm(LstmTrace),
    BiLstm {
        fwd: LstmTrace,
        reversed: Matrix,
        bwd: LstmTrace,
    },
}

impl ClrTrace {
    /// Distance from the nearest rectifier kink or pooling tie; infinite for
    /// smooth encoders.
    pub fn kink_margin(&self) -> f64 {
        match &self.inner {
            Inner::Cnn(t) => t.kink_margin(),
            _ => f64::INFINITY,
        }
    }
}

fn reverse_rows(m: &Matrix) -> Matrix {
    let rows: Vec<usize> = (0..m.rows()).rev().collect();
    gather_rows(m, &rows)
}

impl ClrEncoder {
    pub fn new<R: Rng>(kind: ClrKind, hyper: &ClrHyper, inventory: CharInventory, rng: &mut R) -> Result<Self> {
        hyper.validate(kind)?;
        let table = Matrix::uniform(inventory.len(), hyper.d_c, INIT_SCALE, rng);
        let net = match kind {
            ClrKind::Forward => ClrNet::Forward,
            ClrKind::Cnn => ClrNet::Cnn(ConvFilterBank::uniform(
                hyper.d_c,
                &hyper.widths,
                hyper.filters_per_width,
                INIT_SCALE,
                rng,
            )?),
            ClrKind::Lstm => ClrNet::Lstm(LstmCell::uniform(hyper.d_c, hyper.d_h, INIT_SCALE, rng)),
            ClrKind::BiLstm => ClrNet::BiLstm {
                fwd: LstmCell::uniform(hyper.d_c, hyper.d_h, INIT_SCALE, rng),
                bwd: LstmCell::uniform(hyper.d_c, hyper.d_h, INIT_SCALE, rng),
            },
        };
        Ok(ClrEncoder {
            kind,
            inventory,
            max_len: hyper.max_len,
            table,
            net,
        })
    }

    pub fn d_c(&self) -> usize {
        self.table.cols()
    }

    pub fn output_dim(&self) -> usize {
        match &self.net {
            ClrNet::Forward => self.d_c() * self.max_len,
            ClrNet::Cnn(bank) => bank.num_filters(),
            ClrNet::Lstm(cell) => cell.hidden(),
            ClrNet::BiLstm { fwd, .. } => 2 * fwd.hidden(),
        }
    }

    /// A zeroed copy, used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        let mut g = self.clone();
        g.zero();
        g
    }

    pub fn encode_name(&self, name: &str) -> Result<Vec<usize>> {
        Ok(self.inventory.encode(name, self.max_len)?.0)
    }

    pub fn forward(&self, ids: &[usize]) -> Result<ClrTrace> {
        if ids.len() != self.max_len {
            return Err(crate::error::shape_err(format!(
                "{} character ids for an encoder of length {}",
                ids.len(),
                self.max_len
            )));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= self.table.rows()) {
            return Err(crate::error::shape_err(format!(
                "character id {bad} outside a table of {} rows",
                self.table.rows()
            )));
        }
        let chars = gather_rows(&self.table, ids);
        let (output, inner) = match &self.net {
            ClrNet::Forward => (chars.as_slice().to_vec(), Inner::Forward),
            ClrNet::Cnn(bank) => {
                let t = conv_maxpool(&chars, bank)?;
                (t.output.clone(), Inner::Cnn(t))
            }
            ClrNet::Lstm(cell) => {
                let z = vec![0.0; cell.hidden()];
                let t = lstm_forward(cell, &chars, &z, &z)?;
                (t.last().to_vec(), Inner::Lstm(t))
            }
            ClrNet::BiLstm { fwd, bwd } => {
                let z = vec![0.0; fwd.hidden()];
                let tf = lstm_forward(fwd, &chars, &z, &z)?;
                let reversed = reverse_rows(&chars);
                let tb = lstm_forward(bwd, &reversed, tf.last(), &vec![0.0; bwd.hidden()])?;
                let mut out = tf.last().to_vec();
                out.extend_from_slice(tb.last());
                (
                    out,
                    Inner::BiLstm {
                        fwd: tf,
                        reversed,
                        bwd: tb,
                    },
                )
            }
        };
        Ok(ClrTrace {
            ids: ids.to_vec(),
            chars,
            output,
            inner,
        })
    }

    /// Accumulates into `grad` the gradient of a loss whose gradient with
    /// respect to the encoder output is `dout`.
    pub fn backward(&self, trace: &ClrTrace, dout: &[f64], grad: &mut ClrEncoder) {
        let d_c = self.d_c();
        let mut dc = Matrix::zeros(trace.chars.rows(), d_c);
        match (&self.net, &mut grad.net, &trace.inner) {
            (ClrNet::Forward, ClrNet::Forward, Inner::Forward) => {
                dc.as_mut_slice().copy_from_slice(dout);
            }
            (ClrNet::Cnn(bank), ClrNet::Cnn(gbank), Inner::Cnn(t)) => {
                conv_maxpool_backward(&trace.chars, bank, t, dout, gbank, &mut dc);
            }
            (ClrNet::Lstm(cell), ClrNet::Lstm(gcell), Inner::Lstm(t)) => {
                let g = lstm_backward(cell, &trace.chars, t, dout, gcell);
                for (r, dx) in g.dxs.iter().enumerate() {
                    dc.row_mut(r).copy_from_slice(dx);
                }
            }
            (ClrNet::BiLstm { fwd, bwd }, ClrNet::BiLstm { fwd: gf, bwd: gb }, Inner::BiLstm { fwd: tf, reversed, bwd: tb }) => {
                let hd = fwd.hidden();
                let gback = lstm_backward(bwd, reversed, tb, &dout[hd..], gb);
                let mut dlast = dout[..hd].to_vec();
                axpy(1.0, &gback.dh0, &mut dlast);
                let gfwd = lstm_backward(fwd, &trace.chars, tf, &dlast, gf);
                let n = trace.chars.rows();
                for r in 0..n {
                    let row = dc.row_mut(r);
                    axpy(1.0, &gfwd.dxs[r], row);
                    axpy(1.0, &gback.dxs[n - 1 - r], row);
                }
            }
            _ => panic!("gradient accumulator has a different encoder layout"),
        }
        for (r, &id) in trace.ids.iter().enumerate() {
            axpy(1.0, dc.row(r), grad.table.row_mut(id));
        }
    }
}

impl Params for ClrEncoder {
    fn param_slices(&self) -> Vec<&[f64]> {
        let mut out = vec![self.table.as_slice()];
        match &self.net {
            ClrNet::Forward => {}
            ClrNet::Cnn(b) => out.extend(b.param_slices()),
            ClrNet::Lstm(c) => out.extend(c.param_slices()),
            ClrNet::BiLstm { fwd, bwd } => {
                out.extend(fwd.param_slices());
                out.extend(bwd.param_slices());
            }
        }
        out
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![self.table.as_mut_slice()];
        match &mut self.net {
            ClrNet::Forward => {}
            ClrNet::Cnn(b) => out.extend(b.param_slices_mut()),
            ClrNet::Lstm(c) => out.extend(c.param_slices_mut()),
            ClrNet::BiLstm { fwd, bwd } => {
                out.extend(fwd.param_slices_mut());
                out.extend(bwd.param_slices_mut());
            }
        }
        out
    }
}
