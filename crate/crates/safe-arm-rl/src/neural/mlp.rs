//! Fully-connected network with tanh hidden activations and identity output.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Dense network `dims[0] -> dims[1] -> ... -> dims.last()`. All weights and
/// biases are stored in one flat vector, layer by layer: W0 (row-major,
/// out x in), b0, W1, b1, ...
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    params: Vec<f64>,
}

/// Per-layer activations captured by a forward pass, consumed by `backward`.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// acts[0] is the input; acts[l] for l >= 1 is the post-activation output
    /// of layer l-1 (the final entry is the raw network output).
    acts: Vec<Vec<f64>>,
}

impl Mlp {
    /// Zero-initialized network.
    pub fn zeros(dims: &[usize]) -> Mlp {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let n = Self::param_count_for(dims);
        Mlp {
            dims: dims.to_vec(),
            params: vec![0.0; n],
        }
    }

    /// Orthogonal init scaled by `hidden_gain` for hidden layers and
    /// `output_gain` for the final layer; biases start at zero.
    pub fn init(dims: &[usize], hidden_gain: f64, output_gain: f64, rng: &mut Rng) -> Mlp {
        let mut net = Mlp::zeros(dims);
        let layers = net.layer_count();
        for l in 0..layers {
            let gain = if l + 1 == layers { output_gain } else { hidden_gain };
            let (rows, cols) = (net.dims[l + 1], net.dims[l]);
            let w = orthogonal_matrix(rows, cols, gain, rng);
            let (w_off, _) = net.layer_offsets(l);
            net.params[w_off..w_off + rows * cols].copy_from_slice(&w);
        }
        net
    }

    fn param_count_for(dims: &[usize]) -> usize {
        dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Gradient (or moment) buffer with the same layout as `params`.
    pub fn zeros_like(&self) -> Vec<f64> {
        vec![0.0; self.params.len()]
    }

    /// (weight offset, bias offset) of layer `l` inside the flat vector.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let mut off = 0;
        for i in 0..l {
            off += self.dims[i + 1] * self.dims[i] + self.dims[i + 1];
        }
        (off, off + self.dims[l + 1] * self.dims[l])
    }

    /// Forward pass returning the output and the cache needed by `backward`.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, MlpCache)> {
        if x.len() != self.input_dim() {
            return Err(Error::contract(format!(
                "input has {} entries, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let layers = self.layer_count();
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        for l in 0..layers {
            let (w_off, b_off) = self.layer_offsets(l);
            let (in_dim, out_dim) = (self.dims[l], self.dims[l + 1]);
            let input = &acts[l];
            let mut out = Vec::with_capacity(out_dim);
            for r in 0..out_dim {
                let row = &self.params[w_off + r * in_dim..w_off + (r + 1) * in_dim];
                let mut z = self.params[b_off + r];
                for (wi, xi) in row.iter().zip(input) {
                    z += wi * xi;
                }
                out.push(if l + 1 == layers { z } else { z.tanh() });
            }
            acts.push(out);
        }
        let y = acts.last().unwrap().clone();
        Ok((y, MlpCache { acts }))
    }

    /// Output without keeping the cache.
    pub fn forward_value(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.0)
    }

    /// Reverse-mode gradients of `y . grad_y` with respect to all parameters,
    /// accumulated into `grads` (same layout as `params`). Returns the
    /// gradient with respect to the input.
    pub fn backward(&self, cache: &MlpCache, grad_y: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        if grad_y.len() != self.output_dim() {
            return Err(Error::contract("grad_y dimension mismatch"));
        }
        if grads.len() != self.params.len() {
            return Err(Error::contract("gradient buffer layout mismatch"));
        }
        let layers = self.layer_count();
        let mut g = grad_y.to_vec();
        for l in (0..layers).rev() {
            let (w_off, b_off) = self.layer_offsets(l);
            let (in_dim, out_dim) = (self.dims[l], self.dims[l + 1]);
            let input = &cache.acts[l];
            let mut g_prev = vec![0.0; in_dim];
            for r in 0..out_dim {
                let gr = g[r];
                grads[b_off + r] += gr;
                let row_off = w_off + r * in_dim;
                for c in 0..in_dim {
                    grads[row_off + c] += gr * input[c];
                    g_prev[c] += self.params[row_off + c] * gr;
                }
            }
            if l > 0 {
                // tanh'(z) expressed through the cached activation a = tanh(z)
                for (gp, a) in g_prev.iter_mut().zip(&cache.acts[l]) {
                    *gp *= 1.0 - a * a;
                }
            }
            g = g_prev;
        }
        Ok(g)
    }

    /// Tensors as (name suffix, shape, data) triples for checkpointing.
    pub fn tensors(&self, prefix: &str) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        let mut out = Vec::new();
        for l in 0..self.layer_count() {
            let (w_off, b_off) = self.layer_offsets(l);
            let (in_dim, out_dim) = (self.dims[l], self.dims[l + 1]);
            out.push((
                format!("{prefix}.layer{l}.weight"),
                vec![out_dim, in_dim],
                self.params[w_off..w_off + out_dim * in_dim].to_vec(),
            ));
            out.push((
                format!("{prefix}.layer{l}.bias"),
                vec![out_dim],
                self.params[b_off..b_off + out_dim].to_vec(),
            ));
        }
        out
    }
}

/// Orthogonal matrix scaled by `gain`, rows x cols row-major. Rows are
/// orthonormalized when rows <= cols, columns otherwise (then scaled).
fn orthogonal_matrix(rows: usize, cols: usize, gain: f64, rng: &mut Rng) -> Vec<f64> {
    let transpose = rows > cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    // n vectors of dimension m, n <= m: Gram-Schmidt always succeeds
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    let mut w = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let val = if transpose { basis[c][r] } else { basis[r][c] };
            w[r * cols + c] = gain * val;
        }
    }
    w
}
