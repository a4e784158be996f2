//! A multilayer perceptron written from scratch: LeakyReLU hidden layers, a
//! linear output layer, minibatch backpropagation and adagrad.
//!
//! Networks work on encoded quantities. A [`Head`] fixes how physical data
//! (readouts, λ, Pauli coefficients, χ) is scaled on the way in and out, so
//! that training and prediction agree.

mod checkpoint;
mod heads;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use heads::{predict_process, predict_state, StatePrediction};

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::{derive_seed, seeded};

/// Negative-side slope of the hidden activations.
pub const LEAKY_ALPHA: f64 = 0.5;

/// How a network's inputs and outputs relate to physical quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Head {
    /// No interpretation; data is used as given.
    Raw,
    /// Readout vector in, Pauli coefficients out. Outputs are trained as
    /// expectation values `Tr(ρP) = 2^n c_P`.
    State { n_qubits: usize },
    /// Compact λ in, compact χ out, both multiplied by `2^n` so the network
    /// sees expectation values and the χ of the normalized Pauli basis.
    Process { n_qubits: usize },
}

impl Head {
    pub fn input_scale(self) -> f64 {
        match self {
            Head::Raw | Head::State { .. } => 1.0,
            Head::Process { n_qubits } => (1u64 << n_qubits) as f64,
        }
    }

    pub fn output_scale(self) -> f64 {
        match self {
            Head::Raw => 1.0,
            Head::State { n_qubits } | Head::Process { n_qubits } => (1u64 << n_qubits) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Input size, hidden sizes, output size.
    pub layer_sizes: Vec<usize>,
    pub leaky_alpha: f64,
    pub head: Head,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(layer_sizes: Vec<usize>, head: Head, seed: u64) -> Result<Self> {
        let cfg = Self { layer_sizes, leaky_alpha: LEAKY_ALPHA, head, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The state-tomography architecture for `n` qubits taking readout
    /// vectors of length `input_len`.
    pub fn qst(n_qubits: usize, input_len: usize, seed: u64) -> Result<Self> {
        let hidden = match n_qubits {
            2 => vec![100, 100, 50],
            3 => vec![300, 200, 100],
            n => return Err(Error::UnsupportedQubits(n)),
        };
        let mut sizes = vec![input_len];
        sizes.extend(hidden);
        sizes.push(1 << (2 * n_qubits));
        Self::new(sizes, Head::State { n_qubits }, seed)
    }

    /// The two-qubit process-tomography architecture on compact λ and χ.
    pub fn qpt(n_qubits: usize, seed: u64) -> Result<Self> {
        if n_qubits != 2 {
            return Err(Error::UnsupportedQubits(n_qubits));
        }
        Self::new(vec![256, 600, 400, 300, 256], Head::Process { n_qubits }, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 3 {
            return Err(Error::InvalidConfig("a network needs at least one hidden layer".into()));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig("layer sizes must be positive".into()));
        }
        if self.leaky_alpha.is_nan() || self.leaky_alpha <= 0.0 {
            return Err(Error::InvalidConfig("LeakyReLU slope must be positive".into()));
        }
        Ok(())
    }

    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }
}

/// Weights `w` (out × in), bias `b` and their adagrad accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub g_w: Array2<f64>,
    pub g_b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub config: NetworkConfig,
    pub layers: Vec<Layer>,
    /// Completed training epochs.
    pub epochs_trained: usize,
}

/// Glorot-uniform weights, zero biases, zero accumulators.
pub fn init_network(cfg: &NetworkConfig) -> Result<NetworkParams> {
    cfg.validate()?;
    let mut rng = seeded(derive_seed(cfg.seed, "init"));
    let layers = cfg
        .layer_sizes
        .windows(2)
        .map(|io| {
            let (fan_in, fan_out) = (io[0], io[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
            let w = Array2::from_shape_simple_fn((fan_out, fan_in), || dist.sample(&mut rng));
            Layer {
                w,
                b: Array1::zeros(fan_out),
                g_w: Array2::zeros((fan_out, fan_in)),
                g_b: Array1::zeros(fan_out),
            }
        })
        .collect();
    Ok(NetworkParams { config: cfg.clone(), layers, epochs_trained: 0 })
}

/// Layer inputs of a batched forward pass; `acts[0]` is the batch itself and
/// the last entry is the network output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub acts: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().unwrap()
    }
}

fn leaky(alpha: f64) -> impl Fn(f64) -> f64 {
    move |v| if v >= 0.0 { v } else { alpha * v }
}

impl NetworkParams {
    pub fn input_len(&self) -> usize {
        self.config.input_len()
    }

    pub fn output_len(&self) -> usize {
        self.config.output_len()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Batched forward pass over the rows of `x`.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        check_dim(self.input_len(), x.ncols())?;
        let act = leaky(self.config.leaky_alpha);
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = acts[k].dot(&layer.w.t());
            z += &layer.b;
            if k < last {
                z.mapv_inplace(&act);
            }
            acts.push(z);
        }
        Ok(ForwardCache { acts })
    }

    /// Forward pass of one input vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, x.len()), x).expect("row shape");
        Ok(self.forward_batch(x)?.output().row(0).to_vec())
    }
}

/// Gradients with the same shapes as the network's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Vec<Array2<f64>>,
    pub b: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn is_zero(&self) -> bool {
        self.w.iter().all(|g| g.iter().all(|&v| v == 0.0))
            && self.b.iter().all(|g| g.iter().all(|&v| v == 0.0))
    }
}

/// Gradients of `scale · Σ_rows ‖ŷ − y‖²` from a forward cache.
pub fn batch_grads(
    params: &NetworkParams,
    cache: &ForwardCache,
    y: ArrayView2<f64>,
    scale: f64,
) -> Result<Gradients> {
    let out = cache.output();
    check_dim(out.nrows(), y.nrows())?;
    check_dim(out.ncols(), y.ncols())?;
    let alpha = params.config.leaky_alpha;
    let n_layers = params.layers.len();
    let mut w = Vec::with_capacity(n_layers);
    let mut b = Vec::with_capacity(n_layers);
    let mut delta = (out - &y) * (2.0 * scale);
    for k in (0..n_layers).rev() {
        w.push(delta.t().dot(&cache.acts[k]));
        b.push(delta.sum_axis(Axis(0)));
        if k > 0 {
            let mut d = delta.dot(&params.layers[k].w);
            // The sign of a LeakyReLU output matches its input, so the
            // derivative can be read from the cached activation.
            d.zip_mut_with(&cache.acts[k], |g, &a| {
                if a < 0.0 {
                    *g *= alpha;
                }
            });
            delta = d;
        }
    }
    w.reverse();
    b.reverse();
    Ok(Gradients { w, b })
}

/// Exact gradients of the single-sample loss `‖y − f(x)‖²`.
pub fn backprop_grads(params: &NetworkParams, x: &[f64], y: &[f64]) -> Result<Gradients> {
    check_dim(params.output_len(), y.len())?;
    let xv = ArrayView2::from_shape((1, x.len()), x).expect("row shape");
    let yv = ArrayView2::from_shape((1, y.len()), y).expect("row shape");
    let cache = params.forward_batch(xv)?;
    batch_grads(params, &cache, yv, 1.0)
}

fn check_grad_shapes(params: &NetworkParams, grads: &Gradients) -> Result<()> {
    check_dim(params.layers.len(), grads.w.len())?;
    check_dim(params.layers.len(), grads.b.len())?;
    for (l, (gw, gb)) in params.layers.iter().zip(grads.w.iter().zip(&grads.b)) {
        if l.w.dim() != gw.dim() {
            return Err(Error::DimensionMismatch { expected: l.w.len(), actual: gw.len() });
        }
        check_dim(l.b.len(), gb.len())?;
    }
    Ok(())
}

/// Adagrad hyperparameters. The step is
/// `θ −= η g / (√(G₀ + G) + ε)` with `G` the running sum of squared
/// gradients stored in the network and `G₀` a constant floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adagrad {
    pub eta: f64,
    pub epsilon: f64,
    pub initial_accumulator: f64,
}

impl Default for Adagrad {
    fn default() -> Self {
        Self { eta: 0.5, epsilon: 1e-8, initial_accumulator: 0.1 }
    }
}

pub fn adagrad_step(params: &mut NetworkParams, grads: &Gradients, opt: &Adagrad) -> Result<()> {
    check_grad_shapes(params, grads)?;
    let Adagrad { eta, epsilon, initial_accumulator: g0 } = *opt;
    let update = |theta: &mut f64, acc: &mut f64, g: f64| {
        *acc += g * g;
        *theta -= eta * g / ((g0 + *acc).sqrt() + epsilon);
    };
    for (layer, (gw, gb)) in params.layers.iter_mut().zip(grads.w.iter().zip(&grads.b)) {
        ndarray::Zip::from(&mut layer.w)
            .and(&mut layer.g_w)
            .and(gw)
            .for_each(|t, a, &g| update(t, a, g));
        ndarray::Zip::from(&mut layer.b)
            .and(&mut layer.g_b)
            .and(gb)
            .for_each(|t, a, &g| update(t, a, g));
    }
    Ok(())
}

/// Plain gradient descent `θ −= η g`; accumulators are left untouched.
pub fn sgd_step(params: &mut NetworkParams, grads: &Gradients, eta: f64) -> Result<()> {
    check_grad_shapes(params, grads)?;
    for (layer, (gw, gb)) in params.layers.iter_mut().zip(grads.w.iter().zip(&grads.b)) {
        layer.w.scaled_add(-eta, gw);
        layer.b.scaled_add(-eta, gb);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Adagrad(Adagrad),
    Sgd { eta: f64 },
}

/// Normalization of the minibatch loss. Both variants average over the
/// batch; they differ in whether squared errors are also averaged over
/// output components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossReduction {
    MeanOverOutputs,
    SumOverOutputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub loss: LossReduction,
    /// Fraction of samples held out for the validation cosine loss.
    pub validation_fraction: f64,
    /// Seeds the validation split and the per-epoch shuffles.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 150,
            batch_size: 32,
            optimizer: Optimizer::Adagrad(Adagrad::default()),
            loss: LossReduction::MeanOverOutputs,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean squared error per output component over the epoch's batches,
    /// in encoded units.
    pub train_mse: f64,
    /// Mean cosine loss on the validation split; `None` without one.
    pub val_cosine: Option<f64>,
}

/// Training inputs and targets, one row per sample, in physical units.
#[derive(Debug, Clone, Copy)]
pub struct Examples<'a> {
    pub inputs: ArrayView2<'a, f64>,
    pub targets: ArrayView2<'a, f64>,
}

impl<'a> Examples<'a> {
    pub fn new(inputs: ArrayView2<'a, f64>, targets: ArrayView2<'a, f64>) -> Result<Self> {
        check_dim(inputs.nrows(), targets.nrows())?;
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Trains `params` in place, calling `on_epoch` after every epoch.
pub fn train_with(
    params: &mut NetworkParams,
    data: Examples<'_>,
    tcfg: &TrainConfig,
    mut on_epoch: impl FnMut(&NetworkParams, &EpochRecord),
) -> Result<Vec<EpochRecord>> {
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    check_dim(params.input_len(), data.inputs.ncols())?;
    check_dim(params.output_len(), data.targets.ncols())?;
    if tcfg.epochs == 0 {
        return Err(Error::InvalidConfig("epochs must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&tcfg.validation_fraction) {
        return Err(Error::InvalidConfig("validation fraction must lie in [0, 1)".into()));
    }

    let head = params.config.head;
    let x = data.inputs.mapv(|v| v * head.input_scale());
    let y = data.targets.mapv(|v| v * head.output_scale());

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut seeded(derive_seed(tcfg.seed, "validation")));
    let n_val = (data.len() as f64 * tcfg.validation_fraction).floor() as usize;
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut train_idx = train_idx.to_vec();
    if train_idx.is_empty() {
        return Err(Error::Empty("training split"));
    }
    if tcfg.batch_size == 0 || tcfg.batch_size > train_idx.len() {
        return Err(Error::InvalidConfig(format!(
            "batch size {} outside 1..={}",
            tcfg.batch_size,
            train_idx.len()
        )));
    }
    let val_x = x.select(Axis(0), val_idx);
    let val_y = y.select(Axis(0), val_idx);

    let out_len = params.output_len() as f64;
    let mut shuffle_rng = seeded(derive_seed(tcfg.seed, "shuffle"));
    let mut history = Vec::with_capacity(tcfg.epochs);
    for _ in 0..tcfg.epochs {
        train_idx.shuffle(&mut shuffle_rng);
        let mut sq_err = 0.0;
        for batch in train_idx.chunks(tcfg.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb = y.select(Axis(0), batch);
            let cache = params.forward_batch(xb.view())?;
            sq_err += (cache.output() - &yb).mapv(|d| d * d).sum();
            let scale = match tcfg.loss {
                LossReduction::MeanOverOutputs => 1.0 / (batch.len() as f64 * out_len),
                LossReduction::SumOverOutputs => 1.0 / batch.len() as f64,
            };
            let grads = batch_grads(params, &cache, yb.view(), scale)?;
            match &tcfg.optimizer {
                Optimizer::Adagrad(opt) => adagrad_step(params, &grads, opt)?,
                Optimizer::Sgd { eta } => sgd_step(params, &grads, *eta)?,
            }
        }
        params.epochs_trained += 1;
        let val_cosine = if val_idx.is_empty() {
            None
        } else {
            Some(mean_cosine_loss(params, val_x.view(), val_y.view())?)
        };
        let record = EpochRecord {
            epoch: params.epochs_trained,
            train_mse: sq_err / (train_idx.len() as f64 * out_len),
            val_cosine,
        };
        on_epoch(params, &record);
        history.push(record);
    }
    Ok(history)
}

pub fn train(
    params: &mut NetworkParams,
    data: Examples<'_>,
    tcfg: &TrainConfig,
) -> Result<Vec<EpochRecord>> {
    train_with(params, data, tcfg, |_, _| {})
}

fn mean_cosine_loss(params: &NetworkParams, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    const CHUNK: usize = 1024;
    let mut total = 0.0;
    for start in (0..x.nrows()).step_by(CHUNK) {
        let end = (start + CHUNK).min(x.nrows());
        let cache = params.forward_batch(x.slice(s![start..end, ..]))?;
        for (p, t) in cache.output().rows().into_iter().zip(y.slice(s![start..end, ..]).rows()) {
            total += cosine_loss(p.as_slice().unwrap(), &t.to_vec())?;
        }
    }
    Ok(total / x.nrows() as f64)
}

/// `arccos` of the normalized dot product, in `[0, π]`.
pub fn cosine_loss(y_hat: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(y.len(), y_hat.len())?;
    let dot: f64 = y_hat.iter().zip(y).map(|(a, b)| a * b).sum();
    let na: f64 = y_hat.iter().map(|a| a * a).sum();
    let nb: f64 = y.iter().map(|b| b * b).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    // sqrt(s·s) == s exactly, so identical vectors give a loss of exactly 0.
    Ok((dot / (na * nb).sqrt()).clamp(-1.0, 1.0).acos())
}

/// Runs the network on physical inputs and returns physical outputs.
pub fn predict_batch(params: &NetworkParams, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
    let head = params.config.head;
    let x = inputs.mapv(|v| v * head.input_scale());
    let mut out = params.forward_batch(x.view())?.acts.pop().unwrap();
    out.mapv_inplace(|v| v / head.output_scale());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn small_net(seed: u64, sizes: Vec<usize>) -> NetworkParams {
        init_network(&NetworkConfig::new(sizes, Head::Raw, seed).unwrap()).unwrap()
    }

    fn randomize_biases(p: &mut NetworkParams, seed: u64) {
        let mut rng = stream(seed, 99);
        for l in &mut p.layers {
            l.b.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        }
    }

    fn loss(p: &NetworkParams, x: &[f64], y: &[f64]) -> f64 {
        p.forward(x).unwrap().iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()
    }

    #[test]
    fn init_is_deterministic_and_glorot() {
        let a = small_net(3, vec![33, 100, 100, 50, 16]);
        let b = small_net(3, vec![33, 100, 100, 50, 16]);
        assert_eq!(a, b);
        assert!(a.layers.iter().all(|l| l.b.iter().all(|&v| v == 0.0)));
        let w = &a.layers[1].w;
        let limit = (6.0f64 / 200.0).sqrt();
        assert!(w.iter().all(|v| v.abs() <= limit));
        // Uniform(±L) has σ = L/√3.
        let mean = w.mean().unwrap();
        let sigma = limit / 3f64.sqrt();
        assert!(mean.abs() < 3.0 * sigma / (w.len() as f64).sqrt());
    }

    #[test]
    fn forward_examples() {
        let mut p = small_net(0, vec![3, 3, 3]);
        for l in &mut p.layers {
            l.w = Array2::eye(3);
        }
        assert_eq!(p.forward(&[0.5, 1.0, 2.0]).unwrap(), vec![0.5, 1.0, 2.0]);

        let mut q = small_net(0, vec![1, 1, 1]);
        q.layers[0].w[(0, 0)] = 1.0;
        q.layers[1].w[(0, 0)] = 1.0;
        assert_eq!(q.forward(&[-1.0]).unwrap(), vec![-0.5]);

        for l in &mut p.layers {
            l.w.fill(0.0);
        }
        assert_eq!(p.forward(&[-3.0, 1.0, 2.0]).unwrap(), vec![0.0; 3]);
        assert!(p.forward(&[1.0]).is_err());
    }

    pub(crate) fn finite_difference_error(seed: u64) -> f64 {
        let mut rng = stream(seed, 0);
        let sizes = vec![
            rng.random_range(2..6),
            rng.random_range(2..7),
            rng.random_range(2..7),
            rng.random_range(1..5),
        ];
        let mut p = small_net(seed, sizes.clone());
        randomize_biases(&mut p, seed);
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..sizes[3]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = backprop_grads(&p, &x, &y).unwrap();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for k in 0..p.layers.len() {
            let (rows, cols) = p.layers[k].w.dim();
            for i in 0..rows {
                for j in 0..cols {
                    let mut plus = p.clone();
                    plus.layers[k].w[(i, j)] += h;
                    let mut minus = p.clone();
                    minus.layers[k].w[(i, j)] -= h;
                    let fd = (loss(&plus, &x, &y) - loss(&minus, &x, &y)) / (2.0 * h);
                    worst = worst.max(rel_err(fd, g.w[k][(i, j)]));
                }
                let mut plus = p.clone();
                plus.layers[k].b[i] += h;
                let mut minus = p.clone();
                minus.layers[k].b[i] -= h;
                let fd = (loss(&plus, &x, &y) - loss(&minus, &x, &y)) / (2.0 * h);
                worst = worst.max(rel_err(fd, g.b[k][i]));
            }
        }
        worst
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..5 {
            let e = finite_difference_error(seed);
            assert!(e < 1e-5, "seed {seed}: {e}");
        }
    }

    #[test]
    fn gradient_is_zero_at_target_and_linear_in_residual() {
        let p = small_net(1, vec![4, 5, 3]);
        let x = [0.1, -0.2, 0.3, 0.4];
        let y = p.forward(&x).unwrap();
        assert!(backprop_grads(&p, &x, &y).unwrap().is_zero());

        let y1: Vec<f64> = y.iter().map(|v| v - 1.0).collect();
        let y2: Vec<f64> = y.iter().map(|v| v - 2.0).collect();
        let g1 = backprop_grads(&p, &x, &y1).unwrap();
        let g2 = backprop_grads(&p, &x, &y2).unwrap();
        for (a, b) in g1.b[1].iter().zip(&g2.b[1]) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adagrad_closed_forms() {
        let opt = Adagrad { eta: 0.5, epsilon: 1e-8, initial_accumulator: 0.0 };
        let mut p = small_net(2, vec![2, 2, 1]);
        let zero = Gradients {
            w: p.layers.iter().map(|l| Array2::zeros(l.w.dim())).collect(),
            b: p.layers.iter().map(|l| Array1::zeros(l.b.len())).collect(),
        };
        let before = p.clone();
        adagrad_step(&mut p, &zero, &opt).unwrap();
        assert_eq!(p, before);

        let mut g = zero.clone();
        g.b[1][0] = 0.3;
        g.w[0][(1, 0)] = -2.0;
        let mut steps = Vec::new();
        for k in 1..=4 {
            let b_before = p.layers[1].b[0];
            let w_before = p.layers[0].w[(1, 0)];
            adagrad_step(&mut p, &g, &opt).unwrap();
            let db = p.layers[1].b[0] - b_before;
            if k == 1 {
                assert!((db + 0.5 * 0.3 / (0.3 + 1e-8)).abs() < 1e-15);
                assert!((p.layers[0].w[(1, 0)] - w_before - 0.5).abs() < 1e-8);
            }
            steps.push(db.abs());
        }
        for (k, s) in steps.iter().enumerate() {
            assert!((s * ((k + 1) as f64).sqrt() - steps[0]).abs() < 1e-8);
        }
        assert!((p.layers[1].g_b[0] - 4.0 * 0.09).abs() < 1e-15);
    }

    #[test]
    fn overfits_a_single_sample() {
        let cfg = NetworkConfig::new(vec![4, 16, 16, 3], Head::Raw, 5).unwrap();
        let mut p = init_network(&cfg).unwrap();
        let x = Array2::from_shape_vec((1, 4), vec![0.2, -0.1, 0.7, 0.3]).unwrap();
        let y = Array2::from_shape_vec((1, 3), vec![0.5, -0.25, 0.1]).unwrap();
        let tcfg = TrainConfig {
            epochs: 500,
            batch_size: 1,
            validation_fraction: 0.0,
            ..Default::default()
        };
        let history = train(&mut p, Examples::new(x.view(), y.view()).unwrap(), &tcfg).unwrap();
        assert_eq!(history.len(), 500);
        let out = p.forward(x.row(0).as_slice().unwrap()).unwrap();
        let mse: f64 = out.iter().zip(y.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 3.0;
        assert!(mse < 1e-4, "{mse}");
    }

    #[test]
    fn training_is_deterministic_and_records_history() {
        let mut rng = stream(8, 0);
        let x = Array2::from_shape_simple_fn((64, 5), || rng.random_range(-1.0..1.0));
        let y = x.slice(s![.., 0..2]).mapv(|v| 2.0 * v);
        let cfg = NetworkConfig::new(vec![5, 8, 2], Head::Raw, 1).unwrap();
        let tcfg = TrainConfig { epochs: 7, batch_size: 8, ..Default::default() };
        let run = || {
            let mut p = init_network(&cfg).unwrap();
            let h = train(&mut p, Examples::new(x.view(), y.view()).unwrap(), &tcfg).unwrap();
            (p, h)
        };
        let (a, ha) = run();
        let (b, hb) = run();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
        assert_eq!(ha.len(), 7);
        assert_eq!(a.epochs_trained, 7);
        assert!(ha.iter().all(|r| r.val_cosine.is_some()));
        assert!(ha[6].train_mse < ha[0].train_mse);
    }

    #[test]
    fn train_rejects_bad_input() {
        let cfg = NetworkConfig::new(vec![2, 3, 1], Head::Raw, 1).unwrap();
        let mut p = init_network(&cfg).unwrap();
        let x = Array2::<f64>::zeros((0, 2));
        let y = Array2::<f64>::zeros((0, 1));
        let r = train(&mut p, Examples::new(x.view(), y.view()).unwrap(), &TrainConfig::default());
        assert!(matches!(r, Err(Error::Empty(_))));
        assert!(NetworkConfig::new(vec![2, 1], Head::Raw, 0).is_err());
    }

    #[test]
    fn cosine_loss_examples() {
        let y = [1.0, 2.0, -0.5];
        assert_eq!(cosine_loss(&y, &y).unwrap(), 0.0);
        assert!(
            (cosine_loss(&[1.0, 0.0], &[0.0, 3.0]).unwrap() - std::f64::consts::FRAC_PI_2).abs()
                < 1e-15
        );
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert!((cosine_loss(&neg, &y).unwrap() - std::f64::consts::PI).abs() < 1e-7);
        assert!(matches!(cosine_loss(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn sgd_moves_against_gradient() {
        let mut p = small_net(4, vec![2, 2, 1]);
        let x = [0.3, 0.9];
        let y = [2.0];
        let before = loss(&p, &x, &y);
        let g = backprop_grads(&p, &x, &y).unwrap();
        sgd_step(&mut p, &g, 0.01).unwrap();
        assert!(loss(&p, &x, &y) < before);
    }
}
