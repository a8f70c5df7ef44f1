//! A small two-head classifier over average-pooled clips.
//!
//! The probe stands in for a full video backbone: clips are average-pooled
//! onto a coarse time/space grid, fed through one shared ReLU layer, and
//! classified by two linear heads — one for the spatial transform class, one
//! for the temporal class. The joint loss is the plain sum of the two
//! cross-entropies. Everything is double precision with hand-written
//! analytic gradients, verified against central finite differences.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::video::Clip;

/// Probability floor inside the cross-entropy log.
const PROB_FLOOR: f64 = 1e-12;

/// Average-pooling grid for turning a clip into a fixed-length vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolConfig {
    pub time_bins: usize,
    pub height_bins: usize,
    pub width_bins: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig { time_bins: 4, height_bins: 8, width_bins: 8 }
    }
}

impl PoolConfig {
    pub fn feature_len(&self, channels: usize) -> usize {
        self.time_bins * self.height_bins * self.width_bins * channels
    }
}

/// Averages the clip over a `time x height x width` grid of bins, flattened
/// in `[t][y][x][channel]` order. Bin boundaries are `(i * extent) / bins`,
/// so uneven divisions spread the remainder without dropping samples.
pub fn pool_clip(clip: &Clip, config: &PoolConfig) -> Result<Vec<f64>> {
    let (t_len, h_len, w_len) = (clip.len(), clip.height(), clip.width());
    if t_len < config.time_bins || h_len < config.height_bins || w_len < config.width_bins {
        return Err(Error::DimensionMismatch(format!(
            "clip {t_len}x{h_len}x{w_len} is smaller than the {}x{}x{} pooling grid",
            config.time_bins, config.height_bins, config.width_bins
        )));
    }
    let channels = clip.channels();
    let bound = |i: usize, extent: usize, bins: usize| (i * extent) / bins;
    let mut out = Vec::with_capacity(config.feature_len(channels));
    for tb in 0..config.time_bins {
        let (t0, t1) = (bound(tb, t_len, config.time_bins), bound(tb + 1, t_len, config.time_bins));
        for yb in 0..config.height_bins {
            let (y0, y1) = (
                bound(yb, h_len, config.height_bins),
                bound(yb + 1, h_len, config.height_bins),
            );
            for xb in 0..config.width_bins {
                let (x0, x1) = (
                    bound(xb, w_len, config.width_bins),
                    bound(xb + 1, w_len, config.width_bins),
                );
                let count = ((t1 - t0) * (y1 - y0) * (x1 - x0)) as f64;
                for c in 0..channels {
                    let mut sum = 0.0f64;
                    for t in t0..t1 {
                        let frame = clip.frame(t);
                        for y in y0..y1 {
                            for x in x0..x1 {
                                sum += frame.get(x, y, c) as f64;
                            }
                        }
                    }
                    out.push(sum / count);
                }
            }
        }
    }
    Ok(out)
}

/// One training example: pooled features plus the two class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub x: Vec<f64>,
    pub spatial_class: usize,
    pub temporal_class: usize,
}

/// Shared-trunk two-head MLP. Weight matrices are row-major with one row
/// per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub n_spatial: usize,
    pub n_temporal: usize,
    pub trunk_w: Vec<f64>,
    pub trunk_b: Vec<f64>,
    pub head_s_w: Vec<f64>,
    pub head_s_b: Vec<f64>,
    pub head_t_w: Vec<f64>,
    pub head_t_b: Vec<f64>,
}

impl ProbeModel {
    /// All parameters drawn uniformly from `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`.
    pub fn init<R: Rng>(
        input_dim: usize,
        hidden_dim: usize,
        n_spatial: usize,
        n_temporal: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || n_spatial == 0 || n_temporal == 0 {
            return Err(Error::DimensionMismatch(
                "probe dimensions must all be nonzero".into(),
            ));
        }
        let mut draw = |n: usize, fan_in: usize| -> Vec<f64> {
            let bound = 1.0 / (fan_in as f64).sqrt();
            (0..n).map(|_| rng.gen_range(-bound..=bound)).collect()
        };
        Ok(ProbeModel {
            input_dim,
            hidden_dim,
            n_spatial,
            n_temporal,
            trunk_w: draw(hidden_dim * input_dim, input_dim),
            trunk_b: draw(hidden_dim, input_dim),
            head_s_w: draw(n_spatial * hidden_dim, hidden_dim),
            head_s_b: draw(n_spatial, hidden_dim),
            head_t_w: draw(n_temporal * hidden_dim, hidden_dim),
            head_t_b: draw(n_temporal, hidden_dim),
        })
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize, n_spatial: usize, n_temporal: usize) -> Self {
        ProbeModel {
            input_dim,
            hidden_dim,
            n_spatial,
            n_temporal,
            trunk_w: vec![0.0; hidden_dim * input_dim],
            trunk_b: vec![0.0; hidden_dim],
            head_s_w: vec![0.0; n_spatial * hidden_dim],
            head_s_b: vec![0.0; n_spatial],
            head_t_w: vec![0.0; n_temporal * hidden_dim],
            head_t_b: vec![0.0; n_temporal],
        }
    }

    /// Hidden activations: `ReLU(W x + b)`.
    fn hidden(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "input length {} does not match model input_dim {}",
                x.len(),
                self.input_dim
            )));
        }
        let mut h = vec![0.0f64; self.hidden_dim];
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.trunk_w[j * self.input_dim..(j + 1) * self.input_dim];
            let mut z = self.trunk_b[j];
            for (w, xi) in row.iter().zip(x.iter()) {
                z += w * xi;
            }
            *hj = z.max(0.0);
        }
        Ok(h)
    }

    /// Trunk features for a pooled input; what retrieval indexes.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.hidden(x)
    }
}

fn affine(w: &[f64], b: &[f64], h: &[f64]) -> Vec<f64> {
    let out_dim = b.len();
    let in_dim = h.len();
    let mut out = b.to_vec();
    for (i, oi) in out.iter_mut().enumerate() {
        let row = &w[i * in_dim..(i + 1) * in_dim];
        for (wij, hj) in row.iter().zip(h.iter()) {
            *oi += wij * hj;
        }
    }
    debug_assert_eq!(out.len(), out_dim);
    out
}

/// Both heads' logits for one input.
pub fn forward(model: &ProbeModel, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = model.hidden(x)?;
    Ok((
        affine(&model.head_s_w, &model.head_s_b, &h),
        affine(&model.head_t_w, &model.head_t_b, &h),
    ))
}

/// Numerically stable softmax (max subtraction before exponentiation).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `-log(p[true_class])`, with the probability floored at 1e-12.
pub fn cross_entropy(probs: &[f64], true_class: usize) -> f64 {
    -probs[true_class].max(PROB_FLOOR).ln()
}

/// Sum of the two head losses for one sample.
pub fn joint_loss(model: &ProbeModel, sample: &TrainSample) -> Result<f64> {
    if sample.spatial_class >= model.n_spatial || sample.temporal_class >= model.n_temporal {
        return Err(Error::DimensionMismatch(format!(
            "labels ({}, {}) out of range for {}x{} heads",
            sample.spatial_class, sample.temporal_class, model.n_spatial, model.n_temporal
        )));
    }
    let (ls, lt) = forward(model, &sample.x)?;
    Ok(cross_entropy(&softmax(&ls), sample.spatial_class)
        + cross_entropy(&softmax(&lt), sample.temporal_class))
}

/// Mean joint loss over a batch, plus the optional L2 penalty
/// `weight_decay/2 * ||W||^2` over the weight matrices (biases excluded).
pub fn batch_loss(model: &ProbeModel, batch: &[TrainSample], weight_decay: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::DimensionMismatch("batch must be non-empty".into()));
    }
    let mut total = 0.0;
    for s in batch {
        total += joint_loss(model, s)?;
    }
    let mut loss = total / batch.len() as f64;
    if weight_decay != 0.0 {
        let sq = |v: &[f64]| v.iter().map(|w| w * w).sum::<f64>();
        loss += weight_decay / 2.0 * (sq(&model.trunk_w) + sq(&model.head_s_w) + sq(&model.head_t_w));
    }
    Ok(loss)
}

/// Gradient (or momentum velocity) storage matching `ProbeModel`'s layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub trunk_w: Vec<f64>,
    pub trunk_b: Vec<f64>,
    pub head_s_w: Vec<f64>,
    pub head_s_b: Vec<f64>,
    pub head_t_w: Vec<f64>,
    pub head_t_b: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &ProbeModel) -> Self {
        Gradients {
            trunk_w: vec![0.0; model.trunk_w.len()],
            trunk_b: vec![0.0; model.trunk_b.len()],
            head_s_w: vec![0.0; model.head_s_w.len()],
            head_s_b: vec![0.0; model.head_s_b.len()],
            head_t_w: vec![0.0; model.head_t_w.len()],
            head_t_b: vec![0.0; model.head_t_b.len()],
        }
    }
}

/// Analytic gradients of `batch_loss` with respect to every parameter.
pub fn grad(model: &ProbeModel, batch: &[TrainSample], weight_decay: f64) -> Result<Gradients> {
    if batch.is_empty() {
        return Err(Error::DimensionMismatch("batch must be non-empty".into()));
    }
    let mut g = Gradients::zeros_like(model);
    let scale = 1.0 / batch.len() as f64;

    for sample in batch {
        if sample.spatial_class >= model.n_spatial || sample.temporal_class >= model.n_temporal {
            return Err(Error::DimensionMismatch(format!(
                "labels ({}, {}) out of range for {}x{} heads",
                sample.spatial_class, sample.temporal_class, model.n_spatial, model.n_temporal
            )));
        }
        let h = model.hidden(&sample.x)?;
        let logits_s = affine(&model.head_s_w, &model.head_s_b, &h);
        let logits_t = affine(&model.head_t_w, &model.head_t_b, &h);
        let mut d_s = softmax(&logits_s);
        d_s[sample.spatial_class] -= 1.0;
        let mut d_t = softmax(&logits_t);
        d_t[sample.temporal_class] -= 1.0;

        // Head parameters: dL/dU = d_logits ⊗ h, dL/dc = d_logits.
        for (i, di) in d_s.iter().enumerate() {
            g.head_s_b[i] += scale * di;
            let row = &mut g.head_s_w[i * model.hidden_dim..(i + 1) * model.hidden_dim];
            for (gj, hj) in row.iter_mut().zip(h.iter()) {
                *gj += scale * di * hj;
            }
        }
        for (i, di) in d_t.iter().enumerate() {
            g.head_t_b[i] += scale * di;
            let row = &mut g.head_t_w[i * model.hidden_dim..(i + 1) * model.hidden_dim];
            for (gj, hj) in row.iter_mut().zip(h.iter()) {
                *gj += scale * di * hj;
            }
        }

        // Back through both heads into the trunk, gated by ReLU.
        let mut d_h = vec![0.0f64; model.hidden_dim];
        for (i, di) in d_s.iter().enumerate() {
            let row = &model.head_s_w[i * model.hidden_dim..(i + 1) * model.hidden_dim];
            for (dhj, wij) in d_h.iter_mut().zip(row.iter()) {
                *dhj += di * wij;
            }
        }
        for (i, di) in d_t.iter().enumerate() {
            let row = &model.head_t_w[i * model.hidden_dim..(i + 1) * model.hidden_dim];
            for (dhj, wij) in d_h.iter_mut().zip(row.iter()) {
                *dhj += di * wij;
            }
        }
        for (j, dhj) in d_h.iter().enumerate() {
            if h[j] <= 0.0 {
                continue;
            }
            g.trunk_b[j] += scale * dhj;
            let row = &mut g.trunk_w[j * model.input_dim..(j + 1) * model.input_dim];
            for (gw, xi) in row.iter_mut().zip(sample.x.iter()) {
                *gw += scale * dhj * xi;
            }
        }
    }

    if weight_decay != 0.0 {
        for (gw, w) in g.trunk_w.iter_mut().zip(model.trunk_w.iter()) {
            *gw += weight_decay * w;
        }
        for (gw, w) in g.head_s_w.iter_mut().zip(model.head_s_w.iter()) {
            *gw += weight_decay * w;
        }
        for (gw, w) in g.head_t_w.iter_mut().zip(model.head_t_w.iter()) {
            *gw += weight_decay * w;
        }
    }
    Ok(g)
}

/// Maximum relative error between `grad` and central finite differences of
/// `batch_loss` over every parameter.
pub fn finite_difference_check(
    model: &ProbeModel,
    batch: &[TrainSample],
    weight_decay: f64,
    epsilon: f64,
) -> Result<f64> {
    let analytic = grad(model, batch, weight_decay)?;
    let mut probe = model.clone();
    let mut max_rel = 0.0f64;

    // (selector for the parameter vector, matching analytic gradient)
    let fields: [(fn(&mut ProbeModel) -> &mut Vec<f64>, &Vec<f64>); 6] = [
        (|m| &mut m.trunk_w, &analytic.trunk_w),
        (|m| &mut m.trunk_b, &analytic.trunk_b),
        (|m| &mut m.head_s_w, &analytic.head_s_w),
        (|m| &mut m.head_s_b, &analytic.head_s_b),
        (|m| &mut m.head_t_w, &analytic.head_t_w),
        (|m| &mut m.head_t_b, &analytic.head_t_b),
    ];
    for (select, grads) in fields {
        for i in 0..grads.len() {
            let original = select(&mut probe)[i];
            select(&mut probe)[i] = original + epsilon;
            let plus = batch_loss(&probe, batch, weight_decay)?;
            select(&mut probe)[i] = original - epsilon;
            let minus = batch_loss(&probe, batch, weight_decay)?;
            select(&mut probe)[i] = original;
            let fd = (plus - minus) / (2.0 * epsilon);
            let g = grads[i];
            if g.abs() < 1e-8 && fd.abs() < 1e-8 {
                continue;
            }
            let rel = (g - fd).abs() / g.abs().max(fd.abs());
            max_rel = max_rel.max(rel);
        }
    }
    Ok(max_rel)
}

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            epochs: 30,
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be nonnegative, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::Config(format!(
                "weight decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Per-epoch training record: mean batch loss and within-epoch accuracies
/// (predictions taken before each batch's update).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub spatial_accuracy: f64,
    pub temporal_accuracy: f64,
}

/// Argmax class of each head; ties resolve to the lower index.
pub fn predict(model: &ProbeModel, x: &[f64]) -> Result<(usize, usize)> {
    let (ls, lt) = forward(model, x)?;
    Ok((argmax(&ls), argmax(&lt)))
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Mean loss and head accuracies over a dataset, without updating anything.
pub fn evaluate(model: &ProbeModel, dataset: &[TrainSample]) -> Result<EpochStats> {
    if dataset.is_empty() {
        return Err(Error::DimensionMismatch("dataset must be non-empty".into()));
    }
    let mut loss = 0.0;
    let (mut hit_s, mut hit_t) = (0usize, 0usize);
    for s in dataset {
        loss += joint_loss(model, s)?;
        let (ps, pt) = predict(model, &s.x)?;
        hit_s += (ps == s.spatial_class) as usize;
        hit_t += (pt == s.temporal_class) as usize;
    }
    let n = dataset.len() as f64;
    Ok(EpochStats {
        epoch: 0,
        mean_loss: loss / n,
        spatial_accuracy: hit_s as f64 / n,
        temporal_accuracy: hit_t as f64 / n,
    })
}

/// Minibatch SGD with classical momentum (`v = mu*v + g; p -= lr*v`).
/// The shuffle order is drawn from `config.seed`, so training is
/// deterministic end to end.
pub fn train(
    model: &mut ProbeModel,
    dataset: &[TrainSample],
    config: &TrainConfig,
) -> Result<Vec<EpochStats>> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::DimensionMismatch("dataset must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut velocity = Gradients::zeros_like(model);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let (mut hit_s, mut hit_t) = (0usize, 0usize);

        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<TrainSample> = chunk.iter().map(|&i| dataset[i].clone()).collect();
            for s in &batch {
                let (ps, pt) = predict(model, &s.x)?;
                hit_s += (ps == s.spatial_class) as usize;
                hit_t += (pt == s.temporal_class) as usize;
                loss_sum += joint_loss(model, s)?;
            }
            let g = grad(model, &batch, config.weight_decay)?;
            sgd_step(model, &mut velocity, &g, config.learning_rate, config.momentum);
        }

        let n = dataset.len() as f64;
        history.push(EpochStats {
            epoch,
            mean_loss: loss_sum / n,
            spatial_accuracy: hit_s as f64 / n,
            temporal_accuracy: hit_t as f64 / n,
        });
    }
    Ok(history)
}

fn sgd_step(model: &mut ProbeModel, velocity: &mut Gradients, g: &Gradients, lr: f64, mu: f64) {
    let step = |p: &mut [f64], v: &mut [f64], g: &[f64]| {
        for ((pi, vi), gi) in p.iter_mut().zip(v.iter_mut()).zip(g.iter()) {
            *vi = mu * *vi + gi;
            *pi -= lr * *vi;
        }
    };
    step(&mut model.trunk_w, &mut velocity.trunk_w, &g.trunk_w);
    step(&mut model.trunk_b, &mut velocity.trunk_b, &g.trunk_b);
    step(&mut model.head_s_w, &mut velocity.head_s_w, &g.head_s_w);
    step(&mut model.head_s_b, &mut velocity.head_s_b, &g.head_s_b);
    step(&mut model.head_t_w, &mut velocity.head_t_w, &g.head_t_w);
    step(&mut model.head_t_b, &mut velocity.head_t_b, &g.head_t_b);
}
