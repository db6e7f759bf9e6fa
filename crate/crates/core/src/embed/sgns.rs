use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::store::{EmbeddingKind, EmbeddingStore, SubwordTable};
use crate::corpus::{SubwordIndex, TokenKind, TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::nn::{axpy, dot, sigmoid, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub negatives: usize,
    pub window: usize,
    pub epochs: usize,
    /// Initial learning rate; decays linearly to `1e-4` of this value.
    pub lr: f64,
    pub seed: u64,
    /// Position-dependent output parameters (structured skip-gram).
    pub positional: bool,
    /// Sample the effective window uniformly from `1..=window` per token.
    pub shrink_window: bool,
    /// Worker threads. More than one enables unsynchronized updates and
    /// gives up run-to-run reproducibility.
    pub threads: usize,
    pub table_size: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 200,
            negatives: 10,
            window: 5,
            epochs: 5,
            lr: 0.025,
            seed: 1,
            positional: false,
            shrink_window: true,
            threads: 1,
            table_size: 1_000_000,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.negatives == 0 || self.window == 0 {
            return Err(Error::Config(
                "dim, negatives and window must all be positive".into(),
            ));
        }
        if self.epochs == 0 || self.threads == 0 || self.table_size == 0 {
            return Err(Error::Config("epochs, threads and table size must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} is not positive", self.lr)));
        }
        Ok(())
    }
}

/// Trained parameters, kept for diagnostics beyond the exported store.
#[derive(Debug, Clone)]
pub struct SgnsModel {
    pub kind: EmbeddingKind,
    pub vocab: Vocabulary,
    /// Input rows: one per vocabulary token, or ngram rows followed by one
    /// row per non-word token for subword models.
    pub input: Matrix,
    /// Input rows averaged into each vocabulary token's vector.
    pub input_rows: Vec<Vec<u32>>,
    /// Output parameters: one block, or `2·window` blocks indexed by offset.
    pub outputs: Vec<Matrix>,
    pub window: usize,
    pub subwords: Option<SubwordIndex>,
    /// Mean training loss per (center, context) pair, per epoch.
    pub epoch_loss: Vec<f64>,
}

impl SgnsModel {
    /// Output block used for a context at signed offset `off`.
    pub fn block_for_offset(&self, off: isize) -> usize {
        if self.outputs.len() == 1 {
            0
        } else {
            offset_block(off, self.window)
        }
    }

    pub fn input_vector(&self, token: usize) -> Vec<f64> {
        mean_rows(&self.input, &self.input_rows[token])
    }

    /// Keys of vocabulary tokens whose vector is zero because none of their
    /// input rows exists.
    pub fn uncovered(&self) -> Vec<String> {
        self.input_rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_empty())
            .map(|(i, _)| self.vocab.token(i).key())
            .collect()
    }

    pub fn to_store(&self) -> Result<EmbeddingStore> {
        let keys: Vec<String> = self.vocab.tokens().iter().map(|t| t.key()).collect();
        let dim = self.input.cols();
        let mut vectors = Matrix::zeros(keys.len(), dim);
        let table = self.subwords.as_ref().map(|idx| SubwordTable {
            index: idx.clone(),
            vectors: Matrix::from_vec(idx.len(), dim, self.input.row_block(0, idx.len()).to_vec())
                .expect("ngram rows come first"),
        });
        for (i, t) in self.vocab.tokens().iter().enumerate() {
            let v = match (&table, t.kind()) {
                (Some(tab), TokenKind::Word) => tab.compose(t.text()).unwrap_or_else(|| vec![0.0; dim]),
                _ => self.input_vector(i),
            };
            vectors.row_mut(i).copy_from_slice(&v);
        }
        EmbeddingStore::new(self.kind, keys, vectors, table)
    }

    /// Negative-sampling objective with the sampled negatives replaced by
    /// their expectation under the noise distribution, over every pair in a
    /// full (unshrunk) window. Deterministic; used to compare parameter sets.
    pub fn expected_loss(&self, encoded: &[Vec<u32>], negatives: usize) -> f64 {
        let noise = noise_distribution(self.vocab.counts());
        let mut total = 0.0;
        let w = self.window as isize;
        for s in encoded {
            for (pos, &center) in s.iter().enumerate() {
                if self.input_rows[center as usize].is_empty() {
                    continue;
                }
                let h = self.input_vector(center as usize);
                for off in -w..=w {
                    let j = pos as isize + off;
                    if off == 0 || j < 0 || j >= s.len() as isize {
                        continue;
                    }
                    let out = &self.outputs[self.block_for_offset(off)];
                    total += softplus(-dot(&h, out.row(s[j as usize] as usize)));
                    let neg: f64 = noise
                        .iter()
                        .enumerate()
                        .map(|(k, p)| p * softplus(dot(&h, out.row(k))))
                        .sum();
                    total += negatives as f64 * neg;
                }
            }
        }
        total
    }
}

fn offset_block(off: isize, window: usize) -> usize {
    let w = window as isize;
    debug_assert!(off != 0 && off.abs() <= w);
    if off < 0 {
        (off + w) as usize
    } else {
        (off + w - 1) as usize
    }
}

fn mean_rows(m: &Matrix, rows: &[u32]) -> Vec<f64> {
    let mut v = vec![0.0; m.cols()];
    if rows.is_empty() {
        return v;
    }
    for &r in rows {
        axpy(1.0, m.row(r as usize), &mut v);
    }
    let n = rows.len() as f64;
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// `log(1 + e^x)`
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn noise_distribution(counts: &[u64]) -> Vec<f64> {
    let pow: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let z: f64 = pow.iter().sum();
    pow.into_iter().map(|p| p / z).collect()
}

/// Sampling table for the unigram distribution raised to 0.75.
pub fn unigram_table(counts: &[u64], size: usize) -> Vec<u32> {
    let probs = noise_distribution(counts);
    let mut table = Vec::with_capacity(size);
    let mut i = 0usize;
    let mut cum = probs[0];
    for a in 0..size {
        table.push(i as u32);
        if (a + 1) as f64 / size as f64 > cum && i + 1 < probs.len() {
            i += 1;
            cum += probs[i];
        }
    }
    table
}

/// Trains skip-gram (or structured skip-gram when `cfg.positional`) with
/// negative sampling and returns the input-side vectors of every vocabulary token.
pub fn train_sgns(stream: &TokenStream, vocab: &Vocabulary, cfg: &SgnsConfig) -> Result<EmbeddingStore> {
    train_sgns_model(stream, vocab, cfg)?.to_store()
}

pub fn train_sgns_model(stream: &TokenStream, vocab: &Vocabulary, cfg: &SgnsConfig) -> Result<SgnsModel> {
    let rows = (0..vocab.len() as u32).map(|i| vec![i]).collect();
    let kind = if cfg.positional { EmbeddingKind::Sskip } else { EmbeddingKind::Skip };
    train(stream, vocab, None, rows, vocab.len(), kind, cfg)
}

/// Subword skip-gram: a word's input vector is the mean of its indexed
/// ngram vectors (whole-word unit included); entity and type tokens keep
/// a vector of their own.
pub fn train_subword_sgns(
    stream: &TokenStream,
    vocab: &Vocabulary,
    subwords: &SubwordIndex,
    cfg: &SgnsConfig,
) -> Result<EmbeddingStore> {
    train_subword_model(stream, vocab, subwords, cfg)?.to_store()
}

pub fn train_subword_model(
    stream: &TokenStream,
    vocab: &Vocabulary,
    subwords: &SubwordIndex,
    cfg: &SgnsConfig,
) -> Result<SgnsModel> {
    let mut next = subwords.len() as u32;
    let rows: Vec<Vec<u32>> = vocab
        .tokens()
        .iter()
        .map(|t| match t.kind() {
            TokenKind::Word => subwords.ngram_ids(t.text()).into_iter().map(|i| i as u32).collect(),
            _ => {
                next += 1;
                vec![next - 1]
            }
        })
        .collect();
    train(
        stream,
        vocab,
        Some(subwords.clone()),
        rows,
        next as usize,
        EmbeddingKind::Subword,
        cfg,
    )
}

/// Raw parameter pointers shared by workers. With one worker this is plain
/// single-threaded access; with several, updates race without locks.
struct SharedParams {
    input: *mut f64,
    outputs: Vec<*mut f64>,
    dim: usize,
}

unsafe impl Send for SharedParams {}
unsafe impl Sync for SharedParams {}

impl SharedParams {
    #[allow(clippy::mut_from_ref)]
    unsafe fn input_row(&self, r: u32) -> &mut [f64] {
        std::slice::from_raw_parts_mut(self.input.add(r as usize * self.dim), self.dim)
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn output_row(&self, block: usize, r: u32) -> &mut [f64] {
        std::slice::from_raw_parts_mut(self.outputs[block].add(r as usize * self.dim), self.dim)
    }
}

struct EpochStats {
    loss: Vec<f64>,
    pairs: Vec<u64>,
}

fn train(
    stream: &TokenStream,
    vocab: &Vocabulary,
    subwords: Option<SubwordIndex>,
    input_rows: Vec<Vec<u32>>,
    n_input_rows: usize,
    kind: EmbeddingKind,
    cfg: &SgnsConfig,
) -> Result<SgnsModel> {
    cfg.validate()?;
    if vocab.is_empty() {
        return Err(Error::Validation("empty vocabulary".into()));
    }
    let encoded = vocab.encode(stream);
    let total_tokens: u64 = encoded.iter().map(|s| s.len() as u64).sum();
    if total_tokens == 0 {
        return Err(Error::Validation("token stream has no in-vocabulary tokens".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = 0.5 / cfg.dim as f64;
    let mut input = Matrix::uniform(n_input_rows, cfg.dim, scale, &mut rng);
    let n_blocks = if cfg.positional && kind != EmbeddingKind::Subword { 2 * cfg.window } else { 1 };
    let mut outputs: Vec<Matrix> = (0..n_blocks).map(|_| Matrix::zeros(vocab.len(), cfg.dim)).collect();
    let table = unigram_table(vocab.counts(), cfg.table_size);

    let shared = SharedParams {
        input: input.as_mut_slice().as_mut_ptr(),
        outputs: outputs.iter_mut().map(|m| m.as_mut_slice().as_mut_ptr()).collect(),
        dim: cfg.dim,
    };
    let processed = AtomicU64::new(0);
    let budget = cfg.epochs as u64 * total_tokens;
    let chunks = split_chunks(&encoded, cfg.threads);
    let ctx = WorkerCtx {
        params: &shared,
        input_rows: &input_rows,
        table: &table,
        cfg,
        positional: n_blocks > 1,
        processed: &processed,
        budget,
    };
    let stats: Vec<EpochStats> = if chunks.len() == 1 {
        vec![ctx.run(chunks[0], ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed))]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .enumerate()
                .map(|(t, chunk)| {
                    let ctx = &ctx;
                    let seed = cfg.seed ^ 0x5eed ^ ((t as u64 + 1) << 32);
                    scope.spawn(move || ctx.run(chunk, ChaCha8Rng::seed_from_u64(seed)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    drop(shared);

    let epoch_loss = (0..cfg.epochs)
        .map(|e| {
            let loss: f64 = stats.iter().map(|s| s.loss[e]).sum();
            let pairs: u64 = stats.iter().map(|s| s.pairs[e]).sum();
            if pairs == 0 {
                0.0
            } else {
                loss / pairs as f64
            }
        })
        .collect();
    if !input.as_slice().iter().all(|x| x.is_finite()) {
        return Err(Error::Numeric("embedding training diverged".into()));
    }
    Ok(SgnsModel {
        kind,
        vocab: vocab.clone(),
        input,
        input_rows,
        outputs,
        window: cfg.window,
        subwords,
        epoch_loss,
    })
}

fn split_chunks(encoded: &[Vec<u32>], threads: usize) -> Vec<&[Vec<u32>]> {
    if threads <= 1 || encoded.len() < 2 {
        return vec![encoded];
    }
    let n = threads.min(encoded.len());
    let per = encoded.len().div_ceil(n);
    encoded.chunks(per).collect()
}

struct WorkerCtx<'a> {
    params: &'a SharedParams,
    input_rows: &'a [Vec<u32>],
    table: &'a [u32],
    cfg: &'a SgnsConfig,
    positional: bool,
    processed: &'a AtomicU64,
    budget: u64,
}

impl WorkerCtx<'_> {
    fn run(&self, sentences: &[Vec<u32>], mut rng: ChaCha8Rng) -> EpochStats {
        let cfg = self.cfg;
        let dim = cfg.dim;
        let window = cfg.window as isize;
        let mut stats = EpochStats {
            loss: vec![0.0; cfg.epochs],
            pairs: vec![0; cfg.epochs],
        };
        let mut h = vec![0.0; dim];
        let mut neu1e = vec![0.0; dim];
        for epoch in 0..cfg.epochs {
            for s in sentences {
                let done = self.processed.fetch_add(s.len() as u64, Ordering::Relaxed);
                let progress = done as f64 / (self.budget + 1) as f64;
                let lr = cfg.lr * (1.0 - progress).max(1e-4);
                for (pos, &center) in s.iter().enumerate() {
                    let rows = &self.input_rows[center as usize];
                    if rows.is_empty() {
                        continue;
                    }
                    let b = if cfg.shrink_window {
                        rng.gen_range(1..=window)
                    } else {
                        window
                    };
                    h.iter_mut().for_each(|x| *x = 0.0);
                    for &r in rows {
                        // SAFETY: rows index into the input matrix; see SharedParams.
                        axpy(1.0, unsafe { self.params.input_row(r) }, &mut h);
                    }
                    let inv = 1.0 / rows.len() as f64;
                    h.iter_mut().for_each(|x| *x *= inv);
                    for off in -b..=b {
                        let j = pos as isize + off;
                        if off == 0 || j < 0 || j >= s.len() as isize {
                            continue;
                        }
                        let context = s[j as usize];
                        let block = if self.positional {
                            offset_block(off, cfg.window)
                        } else {
                            0
                        };
                        neu1e.iter_mut().for_each(|x| *x = 0.0);
                        for d in 0..=cfg.negatives {
                            let (target, label) = if d == 0 {
                                (context, 1.0)
                            } else {
                                let t = self.table[rng.gen_range(0..self.table.len())];
                                if t == context {
                                    continue;
                                }
                                (t, 0.0)
                            };
                            // SAFETY: target is a vocabulary index, block < number of blocks.
                            let out = unsafe { self.params.output_row(block, target) };
                            let f = dot(&h, out);
                            stats.loss[epoch] += if label == 1.0 { softplus(-f) } else { softplus(f) };
                            let g = (label - sigmoid(f)) * lr;
                            axpy(g, out, &mut neu1e);
                            axpy(g, &h, out);
                        }
                        stats.pairs[epoch] += 1;
                        for &r in rows {
                            axpy(1.0, &neu1e, unsafe { self.params.input_row(r) });
                        }
                        axpy(1.0, &neu1e, &mut h);
                    }
                }
            }
        }
        stats
    }
}
