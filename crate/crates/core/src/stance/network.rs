//! Bag-of-features linear classifier: averaged embedding rows, one linear
//! layer with biases, softmax over the three labels.
//!
//! Rows are addressed by compact index. Only rows that were touched during
//! training are stored; any other row of the virtual table is its
//! deterministic initial value (see [`init_row`]).

use std::collections::HashMap;

use super::label::{Label, NUM_LABELS};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Initial value of embedding row `id`: uniform in `[-1/dim, 1/dim]`,
/// rounded to f32 precision, a pure function of `(seed, id)`.
pub fn init_row(seed: u64, id: u32, dim: usize) -> Vec<f64> {
    let base = splitmix64(seed ^ splitmix64(id as u64 + 1));
    let scale = 1.0 / dim as f64;
    (0..dim)
        .map(|j| {
            let bits = splitmix64(base.wrapping_add(j as u64));
            let unit = (bits >> 11) as f64 / (1u64 << 53) as f64;
            round_f32((2.0 * unit - 1.0) * scale)
        })
        .collect()
}

pub(crate) fn round_f32(x: f64) -> f64 {
    x as f32 as f64
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64; NUM_LABELS]) -> [f64; NUM_LABELS] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; NUM_LABELS];
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in &mut out {
        *o /= sum;
    }
    out
}

/// Dense parameters over a compact set of embedding rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearNet {
    dim: usize,
    rows: Vec<f64>,
    /// `NUM_LABELS x dim`, row-major by label.
    output: Vec<f64>,
    bias: [f64; NUM_LABELS],
}

/// Intermediate values of one forward pass.
struct Forward {
    hidden: Vec<f64>,
    probs: [f64; NUM_LABELS],
}

impl LinearNet {
    /// Rows from `init_row`, zero output layer and biases.
    pub fn new(dim: usize, seed: u64, row_ids: &[u32]) -> Self {
        let mut rows = Vec::with_capacity(row_ids.len() * dim);
        for &id in row_ids {
            rows.extend(init_row(seed, id, dim));
        }
        LinearNet {
            dim,
            rows,
            output: vec![0.0; NUM_LABELS * dim],
            bias: [0.0; NUM_LABELS],
        }
    }

    /// Every parameter drawn uniformly from `[-scale, scale]`.
    pub fn random(dim: usize, n_rows: usize, scale: f64, seed: u64) -> Self {
        let mut state = seed;
        let mut draw = || {
            state = splitmix64(state);
            ((state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0) * scale
        };
        let rows = (0..n_rows * dim).map(|_| draw()).collect();
        let output = (0..NUM_LABELS * dim).map(|_| draw()).collect();
        let bias = [draw(), draw(), draw()];
        LinearNet {
            dim,
            rows,
            output,
            bias,
        }
    }

    pub(crate) fn from_parts(dim: usize, rows: Vec<f64>, output: Vec<f64>, bias: [f64; NUM_LABELS]) -> Self {
        LinearNet {
            dim,
            rows,
            output,
            bias,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len() / self.dim.max(1)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn bias(&self) -> &[f64; NUM_LABELS] {
        &self.bias
    }

    /// Number of scalar parameters: rows, then output weights, then biases.
    pub fn param_count(&self) -> usize {
        self.rows.len() + self.output.len() + NUM_LABELS
    }

    pub fn param(&self, i: usize) -> f64 {
        let (r, o) = (self.rows.len(), self.output.len());
        if i < r {
            self.rows[i]
        } else if i < r + o {
            self.output[i - r]
        } else {
            self.bias[i - r - o]
        }
    }

    pub fn set_param(&mut self, i: usize, v: f64) {
        let (r, o) = (self.rows.len(), self.output.len());
        if i < r {
            self.rows[i] = v;
        } else if i < r + o {
            self.output[i - r] = v;
        } else {
            self.bias[i - r - o] = v;
        }
    }

    pub(crate) fn round_to_f32(&mut self) {
        for x in self.rows.iter_mut().chain(self.output.iter_mut()).chain(self.bias.iter_mut()) {
            *x = round_f32(*x);
        }
    }

    /// Label probabilities for an averaged hidden vector.
    pub fn probs_for_hidden(&self, hidden: &[f64]) -> [f64; NUM_LABELS] {
        let mut logits = self.bias;
        for (k, logit) in logits.iter_mut().enumerate() {
            let w = &self.output[k * self.dim..(k + 1) * self.dim];
            *logit += w.iter().zip(hidden).map(|(a, b)| a * b).sum::<f64>();
        }
        softmax(&logits)
    }

    fn hidden(&self, features: &[usize]) -> Vec<f64> {
        let mut h = vec![0.0; self.dim];
        if features.is_empty() {
            return h;
        }
        for &f in features {
            for (hj, r) in h.iter_mut().zip(self.row(f)) {
                *hj += r;
            }
        }
        let inv = 1.0 / features.len() as f64;
        for hj in &mut h {
            *hj *= inv;
        }
        h
    }

    fn forward(&self, features: &[usize]) -> Forward {
        let hidden = self.hidden(features);
        let probs = self.probs_for_hidden(&hidden);
        Forward { hidden, probs }
    }

    pub fn probs(&self, features: &[usize]) -> [f64; NUM_LABELS] {
        self.forward(features).probs
    }

    /// Cross-entropy of one example.
    pub fn loss(&self, features: &[usize], label: Label) -> f64 {
        -self.forward(features).probs[label.index()].max(f64::MIN_POSITIVE).ln()
    }

    /// Gradient of the logits' loss: `p - onehot(label)`, and the gradient
    /// with respect to the hidden vector, `W^T (p - y)`.
    fn backward(&self, fwd: &Forward, label: Label) -> ([f64; NUM_LABELS], Vec<f64>) {
        let mut g = fwd.probs;
        g[label.index()] -= 1.0;
        let mut grad_hidden = vec![0.0; self.dim];
        for (k, gk) in g.iter().enumerate() {
            let w = &self.output[k * self.dim..(k + 1) * self.dim];
            for (gh, wkj) in grad_hidden.iter_mut().zip(w) {
                *gh += gk * wkj;
            }
        }
        (g, grad_hidden)
    }

    /// Analytic gradient of [`LinearNet::loss`] over all parameters, in
    /// [`LinearNet::param`] order.
    pub fn gradient(&self, features: &[usize], label: Label) -> Vec<f64> {
        let fwd = self.forward(features);
        let (g, grad_hidden) = self.backward(&fwd, label);
        let mut grad = vec![0.0; self.param_count()];
        if !features.is_empty() {
            let inv = 1.0 / features.len() as f64;
            for &f in features {
                for j in 0..self.dim {
                    grad[f * self.dim + j] += grad_hidden[j] * inv;
                }
            }
        }
        let off = self.rows.len();
        for k in 0..NUM_LABELS {
            for j in 0..self.dim {
                grad[off + k * self.dim + j] = g[k] * fwd.hidden[j];
            }
        }
        let off = off + self.output.len();
        grad[off..off + NUM_LABELS].copy_from_slice(&g);
        grad
    }

    /// One SGD step on cross-entropy. Every gradient is taken at the
    /// parameters before the update.
    pub fn sgd_step(&mut self, features: &[usize], label: Label, lr: f64) {
        let fwd = self.forward(features);
        let (g, grad_hidden) = self.backward(&fwd, label);
        for k in 0..NUM_LABELS {
            let w = &mut self.output[k * self.dim..(k + 1) * self.dim];
            for (wkj, hj) in w.iter_mut().zip(&fwd.hidden) {
                *wkj -= lr * g[k] * hj;
            }
            self.bias[k] -= lr * g[k];
        }
        if features.is_empty() {
            return;
        }
        let step = lr / features.len() as f64;
        for &f in features {
            let row = &mut self.rows[f * self.dim..(f + 1) * self.dim];
            for (r, gh) in row.iter_mut().zip(&grad_hidden) {
                *r -= step * gh;
            }
        }
    }
}

/// Maps global feature ids to compact row indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RowIndex {
    ids: Vec<u32>,
    index: HashMap<u32, usize>,
}

impl RowIndex {
    /// From sorted, unique ids.
    pub fn from_sorted(ids: Vec<u32>) -> Self {
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        RowIndex { ids, index }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn get(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }
}
