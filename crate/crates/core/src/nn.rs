//! Self-contained MLP engine: forward, analytic backprop, Adam, and a
//! finite-difference gradient checker.
//!
//! Layers are dense `[out x in]` weight matrices plus bias, applied as
//! `a_{k+1} = act(a_k W^T + b)`. Parameters and activations are f32 in
//! row-major layout. The forward/backward math lives in one generic kernel
//! instantiated at f32 for training and at f64 for the gradient checker, so
//! the checker exercises the exact same algorithm at full precision. All
//! reductions run in a fixed order, so results are bit-deterministic.

use crate::array::DenseArray;
use crate::error::{CoreError, Result};
use crate::rng::Pcg64;

/// Elementwise nonlinearity applied after each affine layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

/// Scalar abstraction so the same kernel runs at f32 and f64.
trait Real:
    Copy
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    fn tanh_(self) -> Self;
}

impl Real for f32 {
    const ZERO: f32 = 0.0;
    const ONE: f32 = 1.0;
    fn tanh_(self) -> f32 {
        self.tanh()
    }
}

impl Real for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn tanh_(self) -> f64 {
        self.tanh()
    }
}

impl Activation {
    #[inline]
    fn apply<T: Real>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh_(),
            Activation::Relu => {
                if z > T::ZERO {
                    z
                } else {
                    T::ZERO
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative given both pre-activation `z` and post-activation `a`.
    #[inline]
    fn derivative<T: Real>(self, z: T, a: T) -> T {
        match self {
            Activation::Tanh => T::ONE - a * a,
            Activation::Relu => {
                if z > T::ZERO {
                    T::ONE
                } else {
                    T::ZERO
                }
            }
            Activation::Identity => T::ONE,
        }
    }
}

/// One dense layer: weight `[out x in]`, bias `[out]`, activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: DenseArray,
    pub bias: DenseArray,
    pub activation: Activation,
}

impl Layer {
    pub fn out_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[1]
    }
}

/// Ordered dense layers with chained dimensions. Houses all learnable
/// parameters of an encoder or head, and doubles as the gradient container
/// (gradients are parameter-congruent).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    layers: Vec<Layer>,
}

impl ParamSet {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(CoreError::InvalidConfig("ParamSet needs >= 1 layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(CoreError::ShapeMismatch(format!(
                    "layer dims do not chain: out {} then in {}",
                    pair[0].out_dim(),
                    pair[1].in_dim()
                )));
            }
        }
        Ok(ParamSet { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// A congruent all-zero ParamSet (gradient accumulator).
    pub fn zeros_like(&self) -> ParamSet {
        ParamSet {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weight: DenseArray::zeros(l.weight.shape().to_vec()),
                    bias: DenseArray::zeros(l.bias.shape().to_vec()),
                    activation: l.activation,
                })
                .collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.all_finite() && l.bias.all_finite())
    }

    /// Scale every parameter (used for global gradient clipping).
    pub fn scale(&mut self, factor: f32) {
        for layer in &mut self.layers {
            for w in layer.weight.data_mut() {
                *w *= factor;
            }
            for b in layer.bias.data_mut() {
                *b *= factor;
            }
        }
    }
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitScheme {
    /// Orthogonal rows/columns scaled by the gain; `W^T W = gain^2 I` when
    /// `out >= in`, `W W^T = gain^2 I` otherwise. Biases zero.
    Orthogonal(f32),
    /// Elementwise uniform in `[-scale, scale]`. Biases zero.
    Uniform(f32),
}

/// Build an MLP. `layer_sizes` lists every width including input and output,
/// `activations` has one entry per affine layer. Deterministic given the
/// rng stream.
pub fn init_mlp(
    layer_sizes: &[usize],
    activations: &[Activation],
    rng: &mut Pcg64,
    scheme: InitScheme,
) -> Result<ParamSet> {
    if layer_sizes.len() < 2 {
        return Err(CoreError::InvalidConfig(format!(
            "need at least input and output sizes, got {layer_sizes:?}"
        )));
    }
    if activations.len() != layer_sizes.len() - 1 {
        return Err(CoreError::InvalidConfig(format!(
            "expected {} activations for {} sizes, got {}",
            layer_sizes.len() - 1,
            layer_sizes.len(),
            activations.len()
        )));
    }
    if layer_sizes.iter().any(|&d| d == 0) {
        return Err(CoreError::InvalidConfig("zero-width layer".into()));
    }
    let mut layers = Vec::with_capacity(activations.len());
    for (k, &act) in activations.iter().enumerate() {
        let (inp, out) = (layer_sizes[k], layer_sizes[k + 1]);
        let weight = match scheme {
            InitScheme::Orthogonal(gain) => orthogonal_matrix(out, inp, gain, rng),
            InitScheme::Uniform(scale) => {
                let data = (0..out * inp)
                    .map(|_| rng.uniform_f32(-scale, scale))
                    .collect();
                DenseArray::from_rows(out, inp, data)?
            }
        };
        layers.push(Layer {
            weight,
            bias: DenseArray::zeros(vec![out]),
            activation: act,
        });
    }
    ParamSet::from_layers(layers)
}

/// Orthogonal `[rows x cols]` matrix scaled by `gain`: a Gaussian matrix is
/// orthonormalized along its shorter side with twice-iterated modified
/// Gram-Schmidt in f64.
fn orthogonal_matrix(rows: usize, cols: usize, gain: f32, rng: &mut Pcg64) -> DenseArray {
    let (n, m, transpose) = if rows >= cols {
        (rows, cols, false)
    } else {
        (cols, rows, true)
    };
    // q[j] is the j-th orthonormal column of length n.
    let mut q: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.normal_f64()).collect())
        .collect();
    for j in 0..m {
        for _pass in 0..2 {
            for i in 0..j {
                let r: f64 = (0..n).map(|t| q[i][t] * q[j][t]).sum();
                for t in 0..n {
                    q[j][t] -= r * q[i][t];
                }
            }
        }
        let norm: f64 = (0..n).map(|t| q[j][t] * q[j][t]).sum::<f64>().sqrt();
        for t in 0..n {
            q[j][t] /= norm;
        }
    }
    let mut data = vec![0.0f32; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let v = if transpose { q[r][c] } else { q[c][r] };
            data[r * cols + c] = (gain as f64 * v) as f32;
        }
    }
    DenseArray::from_rows(rows, cols, data).expect("orthogonal shape")
}

// ---------------------------------------------------------------------------
// Generic kernel
// ---------------------------------------------------------------------------

/// Borrowed view of one layer for the generic kernel.
#[derive(Clone, Copy)]
struct LayerView<'a, T> {
    weight: &'a [T],
    bias: &'a [T],
    activation: Activation,
    out_dim: usize,
    in_dim: usize,
}

fn f32_views(params: &ParamSet) -> Vec<LayerView<'_, f32>> {
    params
        .layers
        .iter()
        .map(|l| LayerView {
            weight: l.weight.data(),
            bias: l.bias.data(),
            activation: l.activation,
            out_dim: l.out_dim(),
            in_dim: l.in_dim(),
        })
        .collect()
}

/// Owned f64 promotion of a ParamSet, used by the gradient checker.
struct PromotedNet {
    layers: Vec<(Vec<f64>, Vec<f64>, Activation, usize, usize)>,
}

impl PromotedNet {
    fn from_params(params: &ParamSet) -> Self {
        PromotedNet {
            layers: params
                .layers
                .iter()
                .map(|l| {
                    (
                        l.weight.data().iter().map(|&w| w as f64).collect(),
                        l.bias.data().iter().map(|&b| b as f64).collect(),
                        l.activation,
                        l.out_dim(),
                        l.in_dim(),
                    )
                })
                .collect(),
        }
    }

    fn views(&self) -> Vec<LayerView<'_, f64>> {
        self.layers
            .iter()
            .map(|(w, b, act, out, inp)| LayerView {
                weight: w,
                bias: b,
                activation: *act,
                out_dim: *out,
                in_dim: *inp,
            })
            .collect()
    }
}

/// Kernel output: per-layer pre- and post-activations (flat `[batch x dim]`).
struct KernelCache<T> {
    /// `activations[0]` is the input; one post-activation per layer after.
    activations: Vec<Vec<T>>,
    pre: Vec<Vec<T>>,
}

fn forward_kernel<T: Real>(net: &[LayerView<'_, T>], input: &[T], batch: usize) -> KernelCache<T> {
    let mut activations = vec![input.to_vec()];
    let mut pre = Vec::with_capacity(net.len());
    let mut width = input.len() / batch;
    for layer in net {
        let a_prev = activations.last().unwrap();
        let mut z = vec![T::ZERO; batch * layer.out_dim];
        for b in 0..batch {
            let row_in = &a_prev[b * width..(b + 1) * width];
            let row_out = &mut z[b * layer.out_dim..(b + 1) * layer.out_dim];
            for o in 0..layer.out_dim {
                let w_row = &layer.weight[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut acc = layer.bias[o];
                for i in 0..layer.in_dim {
                    acc = acc + row_in[i] * w_row[i];
                }
                row_out[o] = acc;
            }
        }
        let a: Vec<T> = z.iter().map(|&v| layer.activation.apply(v)).collect();
        pre.push(z);
        activations.push(a);
        width = layer.out_dim;
    }
    KernelCache { activations, pre }
}

/// Parameter gradients plus the gradient with respect to the input.
struct KernelGrads<T> {
    weights: Vec<Vec<T>>,
    biases: Vec<Vec<T>>,
    grad_input: Vec<T>,
}

fn backward_kernel<T: Real>(
    net: &[LayerView<'_, T>],
    cache: &KernelCache<T>,
    grad_output: &[T],
    batch: usize,
) -> KernelGrads<T> {
    let n_layers = net.len();
    let mut weights: Vec<Vec<T>> = net
        .iter()
        .map(|l| vec![T::ZERO; l.out_dim * l.in_dim])
        .collect();
    let mut biases: Vec<Vec<T>> = net.iter().map(|l| vec![T::ZERO; l.out_dim]).collect();
    // delta = dL/dz for the current layer, walked backwards.
    let mut delta = grad_output.to_vec();
    for k in (0..n_layers).rev() {
        let layer = &net[k];
        let (o_dim, i_dim) = (layer.out_dim, layer.in_dim);
        let z = &cache.pre[k];
        let a = &cache.activations[k + 1];
        for (d, (&zv, &av)) in delta.iter_mut().zip(z.iter().zip(a.iter())) {
            *d = *d * layer.activation.derivative(zv, av);
        }
        let a_prev = &cache.activations[k];
        {
            let gw = &mut weights[k];
            let gb = &mut biases[k];
            for b in 0..batch {
                let drow = &delta[b * o_dim..(b + 1) * o_dim];
                let arow = &a_prev[b * i_dim..(b + 1) * i_dim];
                for o in 0..o_dim {
                    let d = drow[o];
                    gb[o] = gb[o] + d;
                    let grow = &mut gw[o * i_dim..(o + 1) * i_dim];
                    for i in 0..i_dim {
                        grow[i] = grow[i] + d * arow[i];
                    }
                }
            }
        }
        let mut next_delta = vec![T::ZERO; batch * i_dim];
        for b in 0..batch {
            let drow = &delta[b * o_dim..(b + 1) * o_dim];
            let nrow = &mut next_delta[b * i_dim..(b + 1) * i_dim];
            for o in 0..o_dim {
                let d = drow[o];
                let w_row = &layer.weight[o * i_dim..(o + 1) * i_dim];
                for i in 0..i_dim {
                    nrow[i] = nrow[i] + d * w_row[i];
                }
            }
        }
        delta = next_delta;
    }
    KernelGrads {
        weights,
        biases,
        grad_input: delta,
    }
}

// ---------------------------------------------------------------------------
// Public f32 API
// ---------------------------------------------------------------------------

/// Per-layer activations retained by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<DenseArray>,
    pre: Vec<DenseArray>,
}

impl ForwardCache {
    pub fn batch(&self) -> usize {
        self.activations[0].rows()
    }

    /// Post-activation output of layer `k` (the features for the last layer).
    pub fn activation(&self, k: usize) -> &DenseArray {
        &self.activations[k + 1]
    }
}

/// Run the affine+activation chain on a `[batch x in]` input. Returns the
/// `[batch x out]` output and the cache needed by [`backward`].
pub fn forward(params: &ParamSet, input: &DenseArray) -> Result<(DenseArray, ForwardCache)> {
    if input.cols() != params.in_dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "input shape {:?} does not match first layer [{} x {}]",
            input.shape(),
            params.layers[0].out_dim(),
            params.in_dim()
        )));
    }
    let batch = input.rows();
    let views = f32_views(params);
    let kc = forward_kernel(&views, input.data(), batch);
    let mut activations = Vec::with_capacity(kc.activations.len());
    let mut widths = vec![params.in_dim()];
    widths.extend(params.layers.iter().map(|l| l.out_dim()));
    for (a, w) in kc.activations.into_iter().zip(widths.iter()) {
        activations.push(DenseArray::from_rows(batch, *w, a)?);
    }
    let mut pre = Vec::with_capacity(kc.pre.len());
    for (z, layer) in kc.pre.into_iter().zip(params.layers.iter()) {
        pre.push(DenseArray::from_rows(batch, layer.out_dim(), z)?);
    }
    let output = activations.last().unwrap().clone();
    Ok((output, ForwardCache { activations, pre }))
}

/// Backpropagate `grad_output` (the gradient of a scalar with respect to the
/// forward output) through the cached computation. Returns parameter
/// gradients and the gradient with respect to the input.
pub fn backward(
    params: &ParamSet,
    cache: &ForwardCache,
    grad_output: &DenseArray,
) -> Result<(ParamSet, DenseArray)> {
    let n_layers = params.layers.len();
    if cache.pre.len() != n_layers || cache.activations.len() != n_layers + 1 {
        return Err(CoreError::ShapeMismatch(
            "cache does not match this ParamSet".into(),
        ));
    }
    if cache.activations[0].cols() != params.in_dim()
        || cache.activations[n_layers].cols() != params.out_dim()
    {
        return Err(CoreError::ShapeMismatch(
            "cache was produced by a different network shape".into(),
        ));
    }
    let batch = cache.activations[0].rows();
    let out_dim = params.out_dim();
    if grad_output.rows() != batch || grad_output.cols() != out_dim {
        return Err(CoreError::ShapeMismatch(format!(
            "grad_output shape {:?} does not match output [{batch} x {out_dim}]",
            grad_output.shape()
        )));
    }

    let views = f32_views(params);
    let kcache = KernelCache {
        activations: cache.activations.iter().map(|a| a.data().to_vec()).collect(),
        pre: cache.pre.iter().map(|z| z.data().to_vec()).collect(),
    };
    let kg = backward_kernel(&views, &kcache, grad_output.data(), batch);

    let mut grads = params.zeros_like();
    for (k, layer) in grads.layers.iter_mut().enumerate() {
        layer.weight.data_mut().copy_from_slice(&kg.weights[k]);
        layer.bias.data_mut().copy_from_slice(&kg.biases[k]);
    }
    let grad_input = DenseArray::from_rows(batch, params.in_dim(), kg.grad_input)?;
    Ok((grads, grad_input))
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct AdamHyper {
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamHyper {
    pub fn with_lr(lr: f32) -> Self {
        AdamHyper {
            lr,
            ..AdamHyper::default()
        }
    }
}

/// Adam moment estimates, congruent to a ParamSet.
#[derive(Debug, Clone)]
pub struct AdamState {
    first: ParamSet,
    second: ParamSet,
    step_count: u64,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        AdamState {
            first: params.zeros_like(),
            second: params.zeros_like(),
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }
}

/// One bias-corrected Adam update. Errors on any non-finite gradient
/// element before touching the parameters.
pub fn adam_step(
    params: &mut ParamSet,
    grads: &ParamSet,
    state: &mut AdamState,
    hyper: &AdamHyper,
) -> Result<()> {
    if params.layers.len() != grads.layers.len() {
        return Err(CoreError::ShapeMismatch("grads not congruent".into()));
    }
    if !grads.all_finite() {
        return Err(CoreError::NonFiniteGradient);
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    // Element math runs in f64 and rounds once on store, so moment drift
    // stays below f32 resolution.
    let (b1, b2) = (hyper.beta1 as f64, hyper.beta2 as f64);
    let (lr, eps) = (hyper.lr as f64, hyper.eps as f64);
    let bias1 = 1.0 - b1.powi(t);
    let bias2 = 1.0 - b2.powi(t);
    for (k, layer) in params.layers.iter_mut().enumerate() {
        let g = &grads.layers[k];
        if g.weight.shape() != layer.weight.shape() || g.bias.shape() != layer.bias.shape() {
            return Err(CoreError::ShapeMismatch("grads not congruent".into()));
        }
        let update = |p: &mut [f32], g: &[f32], m: &mut [f32], v: &mut [f32]| {
            for i in 0..p.len() {
                let gi = g[i] as f64;
                let mi = b1 * m[i] as f64 + (1.0 - b1) * gi;
                let vi = b2 * v[i] as f64 + (1.0 - b2) * gi * gi;
                m[i] = mi as f32;
                v[i] = vi as f32;
                let m_hat = mi / bias1;
                let v_hat = vi / bias2;
                p[i] = (p[i] as f64 - lr * m_hat / (v_hat.sqrt() + eps)) as f32;
            }
        };
        update(
            layer.weight.data_mut(),
            g.weight.data(),
            state.first.layers[k].weight.data_mut(),
            state.second.layers[k].weight.data_mut(),
        );
        update(
            layer.bias.data_mut(),
            g.bias.data(),
            state.first.layers[k].bias.data_mut(),
            state.second.layers[k].bias.data_mut(),
        );
    }
    Ok(())
}

/// Global L2 norm across several gradient sets.
pub fn grad_global_norm(grad_sets: &[&ParamSet]) -> f64 {
    let mut acc = 0.0f64;
    for g in grad_sets {
        for layer in &g.layers {
            for &w in layer.weight.data() {
                acc += (w as f64) * (w as f64);
            }
            for &b in layer.bias.data() {
                acc += (b as f64) * (b as f64);
            }
        }
    }
    acc.sqrt()
}

/// Scale gradient sets in place so their global norm is at most `max_norm`.
/// Returns the pre-clip norm.
pub fn clip_global_norm(grad_sets: &mut [&mut ParamSet], max_norm: f64) -> f64 {
    let refs: Vec<&ParamSet> = grad_sets.iter().map(|g| &**g).collect();
    let norm = grad_global_norm(&refs);
    if norm > max_norm && norm > 0.0 {
        let factor = (max_norm / norm) as f32;
        for g in grad_sets.iter_mut() {
            g.scale(factor);
        }
    }
    norm
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

/// Scalar reduction used by the gradient checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTag {
    /// `L = sum(output)`
    Sum,
    /// `L = sum(output^2)`
    SumOfSquares,
}

impl LossTag {
    /// dL/d(output) at f32 for the production backward path.
    pub fn grad_output(self, output: &DenseArray) -> DenseArray {
        let mut g = output.clone();
        match self {
            LossTag::Sum => {
                for v in g.data_mut() {
                    *v = 1.0;
                }
            }
            LossTag::SumOfSquares => {
                for v in g.data_mut() {
                    *v *= 2.0;
                }
            }
        }
        g
    }

    fn eval_f64(self, output: &[f64]) -> f64 {
        match self {
            LossTag::Sum => output.iter().sum(),
            LossTag::SumOfSquares => output.iter().map(|v| v * v).sum(),
        }
    }

    fn grad_output_f64(self, output: &[f64]) -> Vec<f64> {
        match self {
            LossTag::Sum => vec![1.0; output.len()],
            LossTag::SumOfSquares => output.iter().map(|v| 2.0 * v).collect(),
        }
    }
}

fn eval_loss_f64(net: &PromotedNet, input: &[f64], batch: usize, loss: LossTag) -> f64 {
    let views = net.views();
    let cache = forward_kernel(&views, input, batch);
    loss.eval_f64(cache.activations.last().unwrap())
}

/// Maximum relative disagreement between the analytic backward pass and
/// central finite differences over every parameter, for the scalar loss
/// `loss(forward(params, input))`. The whole check runs at f64.
pub fn grad_check(params: &ParamSet, input: &DenseArray, loss: LossTag, eps: f64) -> Result<f64> {
    if input.cols() != params.in_dim() {
        return Err(CoreError::ShapeMismatch(format!(
            "input shape {:?} does not match net input {}",
            input.shape(),
            params.in_dim()
        )));
    }
    let batch = input.rows();
    let net = PromotedNet::from_params(params);
    let views = net.views();
    let input64: Vec<f64> = input.data().iter().map(|&x| x as f64).collect();
    let cache = forward_kernel(&views, &input64, batch);
    let grad_out = loss.grad_output_f64(cache.activations.last().unwrap());
    let kg = backward_kernel(&views, &cache, &grad_out, batch);
    compare_to_numeric(params, input, loss, eps, |k, part, idx| {
        if part == 0 {
            kg.weights[k][idx]
        } else {
            kg.biases[k][idx]
        }
    })
}

/// The comparison half of [`grad_check`], taking externally supplied
/// analytic gradients (lets tests inject faults into a backward result).
pub fn grad_check_against(
    params: &ParamSet,
    input: &DenseArray,
    loss: LossTag,
    eps: f64,
    analytic: &ParamSet,
) -> Result<f64> {
    compare_to_numeric(params, input, loss, eps, |k, part, idx| {
        if part == 0 {
            analytic.layers()[k].weight.data()[idx] as f64
        } else {
            analytic.layers()[k].bias.data()[idx] as f64
        }
    })
}

fn compare_to_numeric(
    params: &ParamSet,
    input: &DenseArray,
    loss: LossTag,
    eps: f64,
    analytic: impl Fn(usize, usize, usize) -> f64,
) -> Result<f64> {
    if eps <= 0.0 {
        return Err(CoreError::InvalidConfig("eps must be > 0".into()));
    }
    let batch = input.rows();
    let input64: Vec<f64> = input.data().iter().map(|&x| x as f64).collect();
    let mut net = PromotedNet::from_params(params);
    let mut max_rel = 0.0f64;
    for k in 0..params.layers.len() {
        for part in 0..2usize {
            let len = if part == 0 {
                net.layers[k].0.len()
            } else {
                net.layers[k].1.len()
            };
            for idx in 0..len {
                let saved = if part == 0 {
                    net.layers[k].0[idx]
                } else {
                    net.layers[k].1[idx]
                };
                let set = |net: &mut PromotedNet, v: f64| {
                    if part == 0 {
                        net.layers[k].0[idx] = v;
                    } else {
                        net.layers[k].1[idx] = v;
                    }
                };
                set(&mut net, saved + eps);
                let plus = eval_loss_f64(&net, &input64, batch, loss);
                set(&mut net, saved - eps);
                let minus = eval_loss_f64(&net, &input64, batch, loss);
                set(&mut net, saved);
                let numeric = (plus - minus) / (2.0 * eps);
                let a = analytic(k, part, idx);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
                if rel > max_rel {
                    max_rel = rel;
                }
            }
        }
    }
    Ok(max_rel)
}
