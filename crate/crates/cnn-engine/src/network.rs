use crate::layers::{
    batchnorm_backward, batchnorm_infer, batchnorm_train, conv1d_backward, conv1d_forward,
    fc_backward, fc_forward, global_avg_pool, global_avg_pool_backward, loss_logit_gradient,
    loss_value, relu_backward, relu_forward, softmax, BatchNormCache, LossKind,
};
use crate::params::{GradientSet, LayerGrads, LayerParams, NetworkParams};
use crate::spec::{LayerKind, NetworkSpec};
use crate::tensor::Tensor1D;
use crate::CnnError;

/// Forward execution mode. `TrainFrozenStats` evaluates the training-mode
/// computation (batch statistics) without touching the running statistics;
/// the finite-difference checks rely on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    TrainFrozenStats,
    Infer,
}

/// Intermediate values retained for backpropagation.
pub struct ForwardCache {
    /// Input to each trunk layer, in order.
    inputs: Vec<Tensor1D>,
    /// Normalization caches for batch-norm layers (None elsewhere).
    bn: Vec<Option<BatchNormCache>>,
    /// Pooled feature vector entering the head.
    pooled: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Composes the trunk layers, pooling, head, and softmax. Returns class
/// probabilities, plus the cache when running in a training mode.
pub fn network_forward(
    spec: &NetworkSpec,
    params: &mut NetworkParams,
    input: &Tensor1D,
    mode: Mode,
) -> Result<(Vec<f64>, Option<ForwardCache>), CnnError> {
    if input.channels() != spec.input_channels {
        return Err(CnnError::ShapeMismatch(format!(
            "input has {} channels, spec expects {}",
            input.channels(),
            spec.input_channels
        )));
    }
    let keep_cache = mode != Mode::Infer;
    let mut inputs = Vec::new();
    let mut bn_caches = Vec::new();
    let mut current = input.clone();
    let mut pooled: Option<Vec<f64>> = None;

    for (layer, p) in spec.layers.iter().zip(params.layers.iter_mut()) {
        let mut bn_cache = None;
        let next = match (layer, p) {
            (
                LayerKind::Conv1d { .. },
                LayerParams::Conv1d {
                    in_channels,
                    out_channels,
                    kernel_len,
                    weights,
                    bias,
                },
            ) => conv1d_forward(&current, weights, bias, *in_channels, *out_channels, *kernel_len)?,
            (LayerKind::Relu, LayerParams::Stateless) => relu_forward(&current),
            (
                LayerKind::BatchNorm,
                LayerParams::BatchNorm {
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                    ..
                },
            ) => match mode {
                Mode::Infer => batchnorm_infer(&current, gamma, beta, running_mean, running_var),
                Mode::Train | Mode::TrainFrozenStats => {
                    let (out, cache) = batchnorm_train(
                        &current,
                        gamma,
                        beta,
                        running_mean,
                        running_var,
                        mode == Mode::Train,
                    )?;
                    bn_cache = Some(cache);
                    out
                }
            },
            (LayerKind::GlobalAvgPool, LayerParams::Stateless) => {
                pooled = Some(global_avg_pool(&current));
                if keep_cache {
                    inputs.push(current.clone());
                    bn_caches.push(None);
                }
                break;
            }
            _ => {
                return Err(CnnError::BadSpec(
                    "parameters misaligned with network spec".into(),
                ))
            }
        };
        if keep_cache {
            inputs.push(current);
            bn_caches.push(bn_cache);
        }
        current = next;
    }

    let pooled = pooled.ok_or_else(|| CnnError::BadSpec("trunk has no pooling layer".into()))?;
    let logits = fc_forward(&pooled, &params.fc_weight, &params.fc_bias, params.num_classes);
    let probs = softmax(&logits);
    let cache = keep_cache.then_some(ForwardCache {
        inputs,
        bn: bn_caches,
        pooled,
        probs: probs.clone(),
    });
    Ok((probs, cache))
}

/// Training loss of one example (training-mode forward).
pub fn example_loss(
    spec: &NetworkSpec,
    params: &mut NetworkParams,
    input: &Tensor1D,
    target: &[f64],
    kind: LossKind,
    mode: Mode,
) -> Result<f64, CnnError> {
    let (probs, _) = network_forward(spec, params, input, mode)?;
    Ok(loss_value(&probs, target, kind))
}

/// Exact analytic gradients for every trainable parameter, walking the
/// cached trunk in reverse. The cache must come from a matching forward
/// pass on the same parameters.
pub fn network_backward(
    spec: &NetworkSpec,
    params: &NetworkParams,
    cache: &ForwardCache,
    target: &[f64],
    kind: LossKind,
) -> Result<GradientSet, CnnError> {
    if target.len() != params.num_classes {
        return Err(CnnError::ShapeMismatch(format!(
            "target has {} entries, network has {} classes",
            target.len(),
            params.num_classes
        )));
    }
    let mut grads = params.zeros_like();
    let d_logits = loss_logit_gradient(&cache.probs, target, kind);
    let (d_pooled, d_fc_w, d_fc_b) = fc_backward(&cache.pooled, &params.fc_weight, &d_logits);
    grads.fc_weight = d_fc_w;
    grads.fc_bias = d_fc_b;

    // pooling layer is last in the trunk
    let pool_idx = spec.layers.len() - 1;
    let pool_input = &cache.inputs[pool_idx];
    let mut d_current =
        global_avg_pool_backward(&d_pooled, pool_input.channels(), pool_input.len());

    for idx in (0..pool_idx).rev() {
        let layer_input = &cache.inputs[idx];
        d_current = match (&spec.layers[idx], &params.layers[idx]) {
            (
                LayerKind::Conv1d { .. },
                LayerParams::Conv1d {
                    in_channels,
                    out_channels,
                    kernel_len,
                    weights,
                    ..
                },
            ) => {
                let (d_in, d_w, d_b) = conv1d_backward(
                    layer_input,
                    &d_current,
                    weights,
                    *in_channels,
                    *out_channels,
                    *kernel_len,
                );
                grads.layers[idx] = LayerGrads::Conv1d {
                    weights: d_w,
                    bias: d_b,
                };
                d_in
            }
            (LayerKind::Relu, LayerParams::Stateless) => relu_backward(layer_input, &d_current),
            (LayerKind::BatchNorm, LayerParams::BatchNorm { gamma, .. }) => {
                let bn_cache = cache.bn[idx]
                    .as_ref()
                    .expect("batch-norm cache present in training forward");
                let (d_in, d_gamma, d_beta) = batchnorm_backward(bn_cache, gamma, &d_current);
                grads.layers[idx] = LayerGrads::BatchNorm {
                    gamma: d_gamma,
                    beta: d_beta,
                };
                d_in
            }
            _ => unreachable!("spec/params alignment checked in forward"),
        };
    }
    Ok(grads)
}

/// Class selection for one signal: argmax of the softmax output, ties
/// resolved toward the lowest class index. Inference mode (frozen
/// statistics), so the parameters are untouched.
pub fn classify(
    spec: &NetworkSpec,
    params: &NetworkParams,
    input: &Tensor1D,
) -> Result<(usize, Vec<f64>), CnnError> {
    let mut scratch = params.clone();
    let (probs, _) = network_forward(spec, &mut scratch, input, Mode::Infer)?;
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    Ok((best, probs))
}
