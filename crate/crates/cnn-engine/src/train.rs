use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::layers::{loss_value, LossKind};
use crate::network::{network_forward, ForwardCache, Mode};
use crate::params::{GradientSet, LayerGrads, LayerParams, NetworkParams};
use crate::spec::NetworkSpec;
use crate::tensor::LabeledExample;
use crate::CnnError;

/// Learning-rate schedule; the default keeps epsilon constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    StepDecay { factor: f64, every_n_epochs: usize },
}

/// Stochastic-gradient-descent training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub mini_batch: usize,
    pub learning_rate: f64,
    pub lr_schedule: LrSchedule,
    pub loss: LossKind,
    pub shuffle_seed: u64,
    pub weight_init_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            mini_batch: 1,
            learning_rate: 1e-3,
            lr_schedule: LrSchedule::Constant,
            loss: LossKind::CrossEntropy,
            shuffle_seed: 0,
            weight_init_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CnnError> {
        if self.epochs == 0 {
            return Err(CnnError::BadConfig("epochs must be >= 1".into()));
        }
        if self.mini_batch == 0 {
            return Err(CnnError::BadConfig("mini_batch must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CnnError::BadConfig(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    fn lr_at_epoch(&self, epoch: usize) -> f64 {
        match self.lr_schedule {
            LrSchedule::Constant => self.learning_rate,
            LrSchedule::StepDecay {
                factor,
                every_n_epochs,
            } => {
                let drops = (epoch - 1) / every_n_epochs.max(1);
                self.learning_rate * factor.powi(drops as i32)
            }
        }
    }
}

/// One descent step: `p <- p - lr * g` over every trainable coordinate.
pub fn sgd_step(params: &mut NetworkParams, grads: &GradientSet, lr: f64) {
    let step = |p: &mut Vec<f64>, g: &[f64]| {
        for (pv, gv) in p.iter_mut().zip(g) {
            *pv -= lr * gv;
        }
    };
    for (lp, lg) in params.layers.iter_mut().zip(&grads.layers) {
        match (lp, lg) {
            (
                LayerParams::Conv1d { weights, bias, .. },
                LayerGrads::Conv1d {
                    weights: gw,
                    bias: gb,
                },
            ) => {
                step(weights, gw);
                step(bias, gb);
            }
            (
                LayerParams::BatchNorm { gamma, beta, .. },
                LayerGrads::BatchNorm {
                    gamma: gg,
                    beta: gb,
                },
            ) => {
                step(gamma, gg);
                step(beta, gb);
            }
            (LayerParams::Stateless, LayerGrads::Stateless) => {}
            _ => unreachable!("gradient set misaligned with params"),
        }
    }
    step(&mut params.fc_weight, &grads.fc_weight);
    step(&mut params.fc_bias, &grads.fc_bias);
}

/// Per-iteration training record.
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iteration: usize,
    pub epoch: usize,
    pub train_loss: f64,
    /// Whether this example was classified correctly at this iteration.
    pub correct: bool,
    /// Running accuracy over the current epoch up to this iteration.
    pub train_acc: f64,
    /// Validation accuracy, present on the last iteration of each epoch.
    pub val_acc: Option<f64>,
}

/// Full training history plus the configuration it was produced with.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub rows: Vec<IterRecord>,
    pub config: TrainConfig,
    pub final_val_acc: Option<f64>,
}

impl TrainReport {
    /// First iteration at which the trailing-window training accuracy
    /// (window = max(train set size, 10)) reaches `threshold`; None if never.
    pub fn iterations_to_accuracy(&self, threshold: f64, window: usize) -> Option<usize> {
        let window = window.max(1);
        let mut hits = 0usize;
        for (i, row) in self.rows.iter().enumerate() {
            if row.correct {
                hits += 1;
            }
            if i >= window && self.rows[i - window].correct {
                hits -= 1;
            }
            let denom = window.min(i + 1);
            if denom == window && hits as f64 / denom as f64 >= threshold {
                return Some(row.iteration);
            }
        }
        None
    }
}

/// Trains the network by per-example stochastic gradient descent (the
/// default mini-batch of 1 updates after every signal; larger mini-batches
/// average the gradients). Weights are freshly initialized from
/// `cfg.weight_init_seed` unless `initial` is supplied.
pub fn train(
    spec: &NetworkSpec,
    initial: Option<NetworkParams>,
    train_set: &[LabeledExample],
    val_set: &[LabeledExample],
    cfg: &TrainConfig,
) -> Result<(NetworkParams, TrainReport), CnnError> {
    spec.validate()?;
    cfg.validate()?;
    for class in 0..spec.num_classes {
        if !train_set.iter().any(|e| e.class == class) {
            return Err(CnnError::EmptyClass(class));
        }
    }
    let mut params = match initial {
        Some(p) => p,
        None => NetworkParams::init(spec, cfg.weight_init_seed)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut rows: Vec<IterRecord> = Vec::with_capacity(cfg.epochs * train_set.len());
    let mut iteration = 0usize;
    let mut final_val = None;

    for epoch in 1..=cfg.epochs {
        let lr = cfg.lr_at_epoch(epoch);
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut rng);
        let mut epoch_correct = 0usize;
        let mut epoch_seen = 0usize;

        for chunk in order.chunks(cfg.mini_batch) {
            let mut batch_grads: Option<GradientSet> = None;
            for &idx in chunk {
                let example = &train_set[idx];
                iteration += 1;
                let target = example.target();
                let (probs, cache) =
                    network_forward(spec, &mut params, &example.input, Mode::Train)?;
                let cache: ForwardCache = cache.expect("training forward returns a cache");
                let loss = loss_value(&probs, &target, cfg.loss);
                if !loss.is_finite() {
                    return Err(CnnError::Diverged(iteration));
                }
                let grads = crate::network::network_backward(spec, &params, &cache, &target, cfg.loss)?;
                if !grads.is_finite() {
                    return Err(CnnError::Diverged(iteration));
                }
                match batch_grads.as_mut() {
                    Some(acc) => acc.accumulate(&grads),
                    None => batch_grads = Some(grads),
                }

                let predicted = argmax(&probs);
                let correct = predicted == example.class;
                epoch_seen += 1;
                if correct {
                    epoch_correct += 1;
                }
                rows.push(IterRecord {
                    iteration,
                    epoch,
                    train_loss: loss,
                    correct,
                    train_acc: epoch_correct as f64 / epoch_seen as f64,
                    val_acc: None,
                });
            }
            let mut grads = batch_grads.expect("non-empty chunk");
            if chunk.len() > 1 {
                grads.scale(1.0 / chunk.len() as f64);
            }
            sgd_step(&mut params, &grads, lr);
        }

        if !val_set.is_empty() {
            let acc = evaluate_accuracy(spec, &params, val_set)?;
            final_val = Some(acc);
            if let Some(last) = rows.last_mut() {
                last.val_acc = Some(acc);
            }
        }
    }

    Ok((
        params,
        TrainReport {
            rows,
            config: cfg.clone(),
            final_val_acc: final_val,
        },
    ))
}

/// Fraction of examples classified correctly (inference mode).
pub fn evaluate_accuracy(
    spec: &NetworkSpec,
    params: &NetworkParams,
    examples: &[LabeledExample],
) -> Result<f64, CnnError> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for e in examples {
        let (class, _) = crate::network::classify(spec, params, &e.input)?;
        if class == e.class {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
