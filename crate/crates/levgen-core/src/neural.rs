//! Minimal dense network stack with hand-derived gradients.
//!
//! Architecture family: fully-connected layers, leaky-rectifier (slope 0.2)
//! on hidden layers, identity output. Gradients for the three training
//! losses are closed-form backpropagation, checked against central finite
//! differences in the tests:
//!
//! * discriminator hinge loss
//!   `L_D = -1/b · sum min(0, -1 + D(real)) - 1/b · sum min(0, -1 - D(fake))`,
//!   subgradient 0 at the hinge corners;
//! * minmax generator loss `1/b · sum -D(G(z))`;
//! * least-squares generator loss `1/b · sum (D(G(z)) - 1)^2`.
//!
//! The discriminator consumes flattened `H*W*V` grids: exact one-hots for
//! corpus levels, raw generator logits for fakes, so generator gradients
//! flow through `D` without an argmax in the way.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::fill_standard_normal;

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("checkpoint arch is inconsistent")]
    BadCheckpoint,
}

/// One dense layer, weights stored row-major `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, w: vec![0.0; in_dim * out_dim], b: vec![0.0; out_dim] }
    }
}

/// Parameter container; also reused as the gradient container since the
/// shapes are identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<DenseLayer>,
}

impl MlpParams {
    /// Glorot-uniform init: `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`.
    pub fn init(dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2, "need input and output dims");
        let layers = dims
            .windows(2)
            .map(|d| {
                let (fan_in, fan_out) = (d[0], d[1]);
                let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
                DenseLayer {
                    in_dim: fan_in,
                    out_dim: fan_out,
                    w: (0..fan_in * fan_out).map(|_| rng.gen_range(-a..=a)).collect(),
                    b: vec![0.0; fan_out],
                }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| DenseLayer::zeros(l.in_dim, l.out_dim)).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].in_dim];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for layer in &mut self.layers {
            layer.w.iter_mut().for_each(&mut f);
            layer.b.iter_mut().for_each(&mut f);
        }
    }

    fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }
}

/// Gaussian latent batch, `b` rows of `z_dim` values.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBatch {
    pub rows: Vec<Vec<f64>>,
}

impl NoiseBatch {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Draws a `b x z_dim` batch of i.i.d. standard normals.
pub fn gaussian_noise_batch(b: usize, z_dim: usize, rng: &mut ChaCha8Rng) -> NoiseBatch {
    let rows = (0..b)
        .map(|_| {
            let mut row = vec![0.0; z_dim];
            fill_standard_normal(rng, &mut row);
            row
        })
        .collect();
    NoiseBatch { rows }
}

fn leaky(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

fn leaky_grad(pre: f64) -> f64 {
    if pre >= 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

/// Per-sample activations captured by a forward pass, laid out per layer so
/// the backward pass can replay them.
struct ForwardTrace {
    /// `inputs[l][s]` = input vector of layer `l` for sample `s`.
    inputs: Vec<Vec<Vec<f64>>>,
    /// Pre-activation vectors per hidden layer (output layer is linear).
    pre: Vec<Vec<Vec<f64>>>,
    outputs: Vec<Vec<f64>>,
}

fn forward_batch(params: &MlpParams, xs: &[Vec<f64>]) -> Result<ForwardTrace, NeuralError> {
    let n_layers = params.layers.len();
    let mut inputs: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(xs.len()); n_layers];
    let mut pre: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(xs.len()); n_layers];
    let mut outputs = Vec::with_capacity(xs.len());

    for x in xs {
        if x.len() != params.in_dim() {
            return Err(NeuralError::ShapeMismatch(format!(
                "input dim {} expected {}",
                x.len(),
                params.in_dim()
            )));
        }
        let mut cur = x.clone();
        for (l, layer) in params.layers.iter().enumerate() {
            inputs[l].push(cur.clone());
            let mut z = layer.b.clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut acc = 0.0;
                for (wi, xi) in row.iter().zip(&cur) {
                    acc += wi * xi;
                }
                *zo += acc;
            }
            let last = l + 1 == n_layers;
            if last {
                cur = z;
            } else {
                pre[l].push(z.clone());
                cur = z.into_iter().map(leaky).collect();
            }
        }
        outputs.push(cur);
    }
    Ok(ForwardTrace { inputs, pre, outputs })
}

/// Backpropagates `d_out` (per-sample gradients of the loss w.r.t. the
/// network outputs), accumulating parameter gradients into `grads` and
/// returning the per-sample gradients w.r.t. the network inputs.
fn backward_batch(
    params: &MlpParams,
    trace: &ForwardTrace,
    d_out: &[Vec<f64>],
    grads: &mut MlpParams,
) -> Vec<Vec<f64>> {
    let n_layers = params.layers.len();
    let mut d_inputs = Vec::with_capacity(d_out.len());
    for (s, d) in d_out.iter().enumerate() {
        let mut delta = d.clone();
        for l in (0..n_layers).rev() {
            let layer = &params.layers[l];
            if l + 1 != n_layers {
                for (i, dv) in delta.iter_mut().enumerate() {
                    *dv *= leaky_grad(trace.pre[l][s][i]);
                }
            }
            let input = &trace.inputs[l][s];
            let g = &mut grads.layers[l];
            for o in 0..layer.out_dim {
                let dv = delta[o];
                g.b[o] += dv;
                let row = &mut g.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (gw, xi) in row.iter_mut().zip(input) {
                    *gw += dv * xi;
                }
            }
            let mut next = vec![0.0; layer.in_dim];
            for o in 0..layer.out_dim {
                let dv = delta[o];
                let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (nx, wi) in next.iter_mut().zip(row) {
                    *nx += dv * wi;
                }
            }
            delta = next;
        }
        d_inputs.push(delta);
    }
    d_inputs
}

/// Forward pass of a generator over a noise batch; one `H*W*V` logit row
/// per latent vector.
pub fn generator_forward(g: &MlpParams, z: &NoiseBatch) -> Result<Vec<Vec<f64>>, NeuralError> {
    Ok(forward_batch(g, &z.rows)?.outputs)
}

/// Scalar critic score of one flattened level grid.
pub fn discriminator_forward(d: &MlpParams, x: &[f64]) -> Result<f64, NeuralError> {
    if d.out_dim() != 1 {
        return Err(NeuralError::ShapeMismatch("discriminator output must be scalar".into()));
    }
    let batch = [x.to_vec()];
    Ok(forward_batch(d, &batch)?.outputs[0][0])
}

fn scores(trace: &ForwardTrace) -> Vec<f64> {
    trace.outputs.iter().map(|o| o[0]).collect()
}

/// Gradient of the hinge loss w.r.t. the discriminator. Fake samples are
/// treated as constants: nothing flows back into the generators here.
pub fn d_hinge_gradients(
    d: &MlpParams,
    reals: &[Vec<f64>],
    fakes: &[Vec<f64>],
) -> Result<MlpParams, NeuralError> {
    if reals.len() != fakes.len() || reals.is_empty() {
        return Err(NeuralError::ShapeMismatch(format!(
            "real/fake batch sizes {} vs {}",
            reals.len(),
            fakes.len()
        )));
    }
    let b = reals.len() as f64;
    let mut grads = d.zeros_like();

    let trace_r = forward_batch(d, reals)?;
    let d_out: Vec<Vec<f64>> = scores(&trace_r)
        .iter()
        .map(|&s| vec![if s < 1.0 { -1.0 / b } else { 0.0 }])
        .collect();
    backward_batch(d, &trace_r, &d_out, &mut grads);

    let trace_f = forward_batch(d, fakes)?;
    let d_out: Vec<Vec<f64>> = scores(&trace_f)
        .iter()
        .map(|&s| vec![if s > -1.0 { 1.0 / b } else { 0.0 }])
        .collect();
    backward_batch(d, &trace_f, &d_out, &mut grads);

    Ok(grads)
}

fn generator_loss_gradients(
    g: &MlpParams,
    d: &MlpParams,
    z: &NoiseBatch,
    d_score: impl Fn(f64, f64) -> f64,
) -> Result<MlpParams, NeuralError> {
    if z.is_empty() {
        return Err(NeuralError::ShapeMismatch("empty noise batch".into()));
    }
    if g.out_dim() != d.in_dim() {
        return Err(NeuralError::ShapeMismatch(format!(
            "generator out {} vs discriminator in {}",
            g.out_dim(),
            d.in_dim()
        )));
    }
    let b = z.len() as f64;
    let trace_g = forward_batch(g, &z.rows)?;
    let trace_d = forward_batch(d, &trace_g.outputs)?;
    let d_out: Vec<Vec<f64>> =
        scores(&trace_d).iter().map(|&s| vec![d_score(s, b)]).collect();
    // discriminator parameters are constants; only its input gradient is kept
    let mut d_sink = d.zeros_like();
    let d_x = backward_batch(d, &trace_d, &d_out, &mut d_sink);
    let mut grads = g.zeros_like();
    backward_batch(g, &trace_g, &d_x, &mut grads);
    Ok(grads)
}

/// Gradient w.r.t. the generator of `1/b · sum -D(G(z_i))`.
pub fn g_minmax_gradients(
    g: &MlpParams,
    d: &MlpParams,
    z: &NoiseBatch,
) -> Result<MlpParams, NeuralError> {
    generator_loss_gradients(g, d, z, |_s, b| -1.0 / b)
}

/// Gradient w.r.t. the generator of `1/b · sum (D(G(z_i)) - 1)^2`.
pub fn g_lsq_gradients(
    g: &MlpParams,
    d: &MlpParams,
    z: &NoiseBatch,
) -> Result<MlpParams, NeuralError> {
    generator_loss_gradients(g, d, z, |s, b| 2.0 * (s - 1.0) / b)
}

/// Adam with decoupled weight decay: parameters are first scaled by
/// `1 - lr * wd`, then the bias-corrected Adam step is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: MlpParams,
    pub v: MlpParams,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl AdamState {
    pub fn new(shape: &MlpParams, lr: f64, beta1: f64, beta2: f64, weight_decay: f64) -> Self {
        Self {
            m: shape.zeros_like(),
            v: shape.zeros_like(),
            t: 0,
            lr,
            beta1,
            beta2,
            eps: 1e-8,
            weight_decay,
        }
    }
}

pub fn adam_update(
    params: &mut MlpParams,
    grads: &MlpParams,
    state: &mut AdamState,
) -> Result<(), NeuralError> {
    if !grads.all_finite() {
        return Err(NeuralError::NonFiniteGradient);
    }
    let (lr, b1, b2, eps) = (state.lr, state.beta1, state.beta2, state.eps);
    if state.weight_decay != 0.0 {
        let decay = 1.0 - lr * state.weight_decay;
        params.for_each_mut(|p| *p *= decay);
    }
    state.t += 1;
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    for l in 0..params.layers.len() {
        adam_step_slice(
            &mut params.layers[l].w,
            &grads.layers[l].w,
            &mut state.m.layers[l].w,
            &mut state.v.layers[l].w,
            lr, b1, b2, eps, bc1, bc2,
        );
        adam_step_slice(
            &mut params.layers[l].b,
            &grads.layers[l].b,
            &mut state.m.layers[l].b,
            &mut state.v.layers[l].b,
            lr, b1, b2, eps, bc1, bc2,
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn adam_step_slice(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    b1: f64,
    b2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..p.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// On-disk model format. `params` holds one `{w, b}` object per layer;
/// floats round-trip bit-exactly through JSON.
#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub arch: Vec<usize>,
    pub activation: String,
    pub height: usize,
    pub width: usize,
    pub vocab_size: usize,
    pub params: Vec<CheckpointLayer>,
    pub rng_note: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckpointLayer {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Checkpoint {
    pub fn from_params(
        params: &MlpParams,
        height: usize,
        width: usize,
        vocab_size: usize,
        rng_note: String,
    ) -> Self {
        Self {
            arch: params.dims(),
            activation: format!("leaky_relu({LEAKY_SLOPE})"),
            height,
            width,
            vocab_size,
            params: params
                .layers
                .iter()
                .map(|l| CheckpointLayer { w: l.w.clone(), b: l.b.clone() })
                .collect(),
            rng_note,
        }
    }

    pub fn to_params(&self) -> Result<MlpParams, NeuralError> {
        if self.arch.len() != self.params.len() + 1 {
            return Err(NeuralError::BadCheckpoint);
        }
        let layers = self
            .arch
            .windows(2)
            .zip(&self.params)
            .map(|(d, l)| {
                if l.w.len() != d[0] * d[1] || l.b.len() != d[1] {
                    return Err(NeuralError::BadCheckpoint);
                }
                Ok(DenseLayer { in_dim: d[0], out_dim: d[1], w: l.w.clone(), b: l.b.clone() })
            })
            .collect::<Result<_, _>>()?;
        Ok(MlpParams { layers })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), NeuralError> {
        Ok(std::fs::write(path, serde_json::to_string(self)?)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, NeuralError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
