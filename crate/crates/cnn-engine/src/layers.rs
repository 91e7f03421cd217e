//! Layer primitives: causal 1D convolution, ReLU, per-example batch
//! normalization, global average pooling, the affine head, softmax, and the
//! two loss kinds. Forward functions have matching backward counterparts
//! that propagate exact analytic gradients.

use crate::tensor::Tensor1D;
use crate::CnnError;

pub const BATCHNORM_EPSILON: f64 = 1e-5;
pub const BATCHNORM_MOMENTUM: f64 = 0.1;
const CROSS_ENTROPY_CLAMP: f64 = 1e-15;

/// Causal convolution: output length equals input length, left zero padding
/// of `kernel_len - 1` taps, so out[o][t] depends only on in[.][<= t].
pub fn conv1d_forward(
    input: &Tensor1D,
    weights: &[f64],
    bias: &[f64],
    in_channels: usize,
    out_channels: usize,
    kernel_len: usize,
) -> Result<Tensor1D, CnnError> {
    if input.channels() != in_channels {
        return Err(CnnError::ShapeMismatch(format!(
            "conv input has {} channels, weights expect {in_channels}",
            input.channels()
        )));
    }
    debug_assert_eq!(weights.len(), out_channels * in_channels * kernel_len);
    let len = input.len();
    let mut out = Tensor1D::zeros(out_channels, len);
    for o in 0..out_channels {
        let row = out.channel_mut(o);
        row.fill(bias[o]);
        for i in 0..in_channels {
            let src = input.channel(i);
            let w_base = (o * in_channels + i) * kernel_len;
            for (tap, &w) in weights[w_base..w_base + kernel_len.min(len)].iter().enumerate() {
                // row[tap..] += w * src[..len-tap]
                for (d, s) in row[tap..].iter_mut().zip(&src[..len - tap]) {
                    *d += w * s;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of the causal convolution: returns (d_input, d_weights, d_bias).
pub fn conv1d_backward(
    input: &Tensor1D,
    d_out: &Tensor1D,
    weights: &[f64],
    in_channels: usize,
    out_channels: usize,
    kernel_len: usize,
) -> (Tensor1D, Vec<f64>, Vec<f64>) {
    let len = input.len();
    let mut d_in = Tensor1D::zeros(in_channels, len);
    let mut d_w = vec![0.0; weights.len()];
    let mut d_b = vec![0.0; out_channels];
    for o in 0..out_channels {
        let g = d_out.channel(o);
        d_b[o] = g.iter().sum();
        for i in 0..in_channels {
            let src = input.channel(i);
            let dst = d_in.channel_mut(i);
            let w_base = (o * in_channels + i) * kernel_len;
            for tap in 0..kernel_len.min(len) {
                // dW[o][i][tap] = sum_t g[t] * src[t - tap]
                let mut acc = 0.0;
                for (gv, sv) in g[tap..].iter().zip(&src[..len - tap]) {
                    acc += gv * sv;
                }
                d_w[w_base + tap] = acc;
                // dIn[i][t - tap] += w * g[t]
                let w = weights[w_base + tap];
                for (dv, gv) in dst[..len - tap].iter_mut().zip(&g[tap..]) {
                    *dv += w * gv;
                }
            }
        }
    }
    (d_in, d_w, d_b)
}

pub fn relu_forward(input: &Tensor1D) -> Tensor1D {
    let mut out = input.clone();
    for v in out.values_mut() {
        *v = v.max(0.0);
    }
    out
}

/// ReLU gradient masked by the forward input's sign.
pub fn relu_backward(input: &Tensor1D, d_out: &Tensor1D) -> Tensor1D {
    let mut d_in = d_out.clone();
    for (d, &x) in d_in.values_mut().iter_mut().zip(input.values()) {
        if x <= 0.0 {
            *d = 0.0;
        }
    }
    d_in
}

/// Per-channel normalization statistics retained for the backward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    pub xhat: Tensor1D,
    pub inv_std: Vec<f64>,
}

/// Train-mode batch normalization for mini-batch 1: statistics are taken
/// per channel over the temporal dimension of the single example. Updates
/// the running statistics in place (unless `update_running` is false, used
/// by finite-difference checks) with momentum 0.1.
#[allow(clippy::too_many_arguments)]
pub fn batchnorm_train(
    input: &Tensor1D,
    gamma: &[f64],
    beta: &[f64],
    running_mean: &mut [f64],
    running_var: &mut [f64],
    update_running: bool,
) -> Result<(Tensor1D, BatchNormCache), CnnError> {
    let len = input.len();
    if len < 2 {
        return Err(CnnError::BatchNormTooShort(len));
    }
    let channels = input.channels();
    let mut out = Tensor1D::zeros(channels, len);
    let mut xhat = Tensor1D::zeros(channels, len);
    let mut inv_std = vec![0.0; channels];
    for c in 0..channels {
        let x = input.channel(c);
        let mean = x.iter().sum::<f64>() / len as f64;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len as f64;
        let istd = 1.0 / (var + BATCHNORM_EPSILON).sqrt();
        inv_std[c] = istd;
        let xh = xhat.channel_mut(c);
        for (dst, &v) in xh.iter_mut().zip(x) {
            *dst = (v - mean) * istd;
        }
        let y = out.channel_mut(c);
        for (dst, &h) in y.iter_mut().zip(xhat.channel(c)) {
            *dst = gamma[c] * h + beta[c];
        }
        if update_running {
            running_mean[c] = (1.0 - BATCHNORM_MOMENTUM) * running_mean[c] + BATCHNORM_MOMENTUM * mean;
            running_var[c] = (1.0 - BATCHNORM_MOMENTUM) * running_var[c] + BATCHNORM_MOMENTUM * var;
        }
    }
    Ok((out, BatchNormCache { xhat, inv_std }))
}

/// Inference-mode batch normalization from the running statistics.
pub fn batchnorm_infer(
    input: &Tensor1D,
    gamma: &[f64],
    beta: &[f64],
    running_mean: &[f64],
    running_var: &[f64],
) -> Tensor1D {
    let channels = input.channels();
    let mut out = Tensor1D::zeros(channels, input.len());
    for c in 0..channels {
        let scale = gamma[c] / (running_var[c] + BATCHNORM_EPSILON).sqrt();
        let shift = beta[c] - scale * running_mean[c];
        for (dst, &v) in out.channel_mut(c).iter_mut().zip(input.channel(c)) {
            *dst = scale * v + shift;
        }
    }
    out
}

/// Gradients through the train-mode normalization:
/// `dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat .* xhat))`
/// per channel. Returns (d_input, d_gamma, d_beta).
pub fn batchnorm_backward(
    cache: &BatchNormCache,
    gamma: &[f64],
    d_out: &Tensor1D,
) -> (Tensor1D, Vec<f64>, Vec<f64>) {
    let channels = d_out.channels();
    let len = d_out.len();
    let mut d_in = Tensor1D::zeros(channels, len);
    let mut d_gamma = vec![0.0; channels];
    let mut d_beta = vec![0.0; channels];
    for c in 0..channels {
        let g = d_out.channel(c);
        let xh = cache.xhat.channel(c);
        let mut sum_g = 0.0;
        let mut sum_gx = 0.0;
        let mut dgam = 0.0;
        for (&gv, &hv) in g.iter().zip(xh) {
            sum_g += gv;
            sum_gx += gv * hv;
            dgam += gv * hv;
        }
        d_gamma[c] = dgam;
        d_beta[c] = sum_g;
        let mean_g = sum_g / len as f64;
        let mean_gx = sum_gx / len as f64;
        let scale = gamma[c] * cache.inv_std[c];
        for ((dst, &gv), &hv) in d_in.channel_mut(c).iter_mut().zip(g).zip(xh) {
            *dst = scale * (gv - mean_g - hv * mean_gx);
        }
    }
    (d_in, d_gamma, d_beta)
}

/// Temporal mean per channel.
pub fn global_avg_pool(input: &Tensor1D) -> Vec<f64> {
    let len = input.len() as f64;
    (0..input.channels())
        .map(|c| input.channel(c).iter().sum::<f64>() / len)
        .collect()
}

pub fn global_avg_pool_backward(d_out: &[f64], channels: usize, len: usize) -> Tensor1D {
    let mut d_in = Tensor1D::zeros(channels, len);
    for (c, &g) in d_out.iter().enumerate() {
        let share = g / len as f64;
        d_in.channel_mut(c).fill(share);
    }
    d_in
}

/// Affine classification head: `logits = W v + b`.
pub fn fc_forward(features: &[f64], weight: &[f64], bias: &[f64], classes: usize) -> Vec<f64> {
    let n = features.len();
    debug_assert_eq!(weight.len(), classes * n);
    (0..classes)
        .map(|c| {
            bias[c]
                + weight[c * n..(c + 1) * n]
                    .iter()
                    .zip(features)
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
        })
        .collect()
}

/// Returns (d_features, d_weight, d_bias).
pub fn fc_backward(
    features: &[f64],
    weight: &[f64],
    d_logits: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = features.len();
    let classes = d_logits.len();
    let mut d_features = vec![0.0; n];
    let mut d_weight = vec![0.0; classes * n];
    for (c, &g) in d_logits.iter().enumerate() {
        for (j, &v) in features.iter().enumerate() {
            d_weight[c * n + j] = g * v;
            d_features[j] += weight[c * n + j] * g;
        }
    }
    (d_features, d_weight, d_logits.to_vec())
}

/// Softmax with the max-shift guard; entries are positive and sum to one.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Loss applied to the softmax output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `-ln p_true`, probabilities clamped at 1e-15.
    CrossEntropy,
    /// Squared error between the probability vector and the one-hot target.
    Mse,
}

pub fn loss_value(probs: &[f64], target: &[f64], kind: LossKind) -> f64 {
    match kind {
        LossKind::CrossEntropy => {
            let p_true: f64 = probs
                .iter()
                .zip(target)
                .map(|(p, r)| p * r)
                .sum::<f64>()
                .max(CROSS_ENTROPY_CLAMP);
            -p_true.ln()
        }
        LossKind::Mse => probs
            .iter()
            .zip(target)
            .map(|(p, r)| (p - r) * (p - r))
            .sum(),
    }
}

/// Gradient of the loss with respect to the logits, with softmax folded in.
pub fn loss_logit_gradient(probs: &[f64], target: &[f64], kind: LossKind) -> Vec<f64> {
    match kind {
        // the classic softmax + cross-entropy cancellation
        LossKind::CrossEntropy => probs.iter().zip(target).map(|(p, r)| p - r).collect(),
        LossKind::Mse => {
            // dE/dp = 2 (p - r), then through the softmax Jacobian
            let dp: Vec<f64> = probs.iter().zip(target).map(|(p, r)| 2.0 * (p - r)).collect();
            let dot: f64 = dp.iter().zip(probs).map(|(d, p)| d * p).sum();
            probs.iter().zip(&dp).map(|(p, d)| p * (d - dot)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_identity_kernel() {
        let input = Tensor1D::single_channel(vec![1.0, 2.0, 3.0]).unwrap();
        let out = conv1d_forward(&input, &[1.0], &[0.0], 1, 1, 1).unwrap();
        assert_eq!(out.channel(0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn conv_first_difference_with_causal_padding() {
        let input = Tensor1D::single_channel(vec![1.0, 2.0, 3.0]).unwrap();
        // taps [w(0), w(1)] = [1, -1]: out[t] = x[t] - x[t-1], x[-1] = 0
        let out = conv1d_forward(&input, &[1.0, -1.0], &[0.0], 1, 1, 2).unwrap();
        assert_eq!(out.channel(0), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn conv_matches_nested_loop_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (in_ch, out_ch, klen, len) = (4, 3, 5, 32);
        let input = Tensor1D::from_data(
            in_ch,
            len,
            (0..in_ch * len).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let weights: Vec<f64> = (0..out_ch * in_ch * klen)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let bias: Vec<f64> = (0..out_ch).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = conv1d_forward(&input, &weights, &bias, in_ch, out_ch, klen).unwrap();
        // direct definition: out[o][t] = b[o] + sum_{i, tap} w * x[i][t - tap]
        for o in 0..out_ch {
            for t in 0..len {
                let mut acc = bias[o];
                for i in 0..in_ch {
                    for tap in 0..klen {
                        if t >= tap {
                            acc += weights[(o * in_ch + i) * klen + tap] * input.channel(i)[t - tap];
                        }
                    }
                }
                assert!((fast.channel(o)[t] - acc).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn conv_kernel_longer_than_signal() {
        let input = Tensor1D::single_channel(vec![2.0, 4.0]).unwrap();
        let out = conv1d_forward(&input, &[1.0, 1.0, 1.0, 1.0], &[0.5], 1, 1, 4).unwrap();
        assert_eq!(out.channel(0), &[2.5, 6.5]);
    }

    #[test]
    fn relu_examples() {
        let x = Tensor1D::single_channel(vec![-1.0, 0.0, 2.0]).unwrap();
        let y = relu_forward(&x);
        assert_eq!(y.channel(0), &[0.0, 0.0, 2.0]);
        let all_neg = Tensor1D::single_channel(vec![-3.0, -0.5]).unwrap();
        assert!(relu_forward(&all_neg).values().iter().all(|&v| v == 0.0));
        assert_eq!(relu_forward(&y), y); // idempotent
    }

    #[test]
    fn batchnorm_train_normalizes() {
        let x = Tensor1D::from_data(2, 5, vec![1.0, 2.0, 3.0, 4.0, 5.0, -3.0, 0.0, 3.0, 1.0, -1.0])
            .unwrap();
        let mut rm = vec![0.0; 2];
        let mut rv = vec![1.0; 2];
        let (y, _) =
            batchnorm_train(&x, &[1.0, 1.0], &[0.0, 0.0], &mut rm, &mut rv, true).unwrap();
        for c in 0..2 {
            let row = y.channel(c);
            let mean: f64 = row.iter().sum::<f64>() / row.len() as f64;
            let var: f64 = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / row.len() as f64;
            assert!(mean.abs() <= 1e-10);
            assert!((var - 1.0).abs() <= 1e-4); // epsilon shifts it slightly
        }
        // running stats moved toward the batch stats with momentum 0.1
        assert!((rm[0] - 0.1 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn batchnorm_constant_channel_outputs_beta() {
        let x = Tensor1D::single_channel(vec![4.0; 8]).unwrap();
        let mut rm = vec![0.0];
        let mut rv = vec![1.0];
        let (y, _) = batchnorm_train(&x, &[2.0], &[0.7], &mut rm, &mut rv, true).unwrap();
        for &v in y.channel(0) {
            assert!((v - 0.7).abs() <= 1e-9);
        }
    }

    #[test]
    fn batchnorm_infer_uses_running_stats() {
        let x = Tensor1D::single_channel(vec![1.0, 2.0, 3.0]).unwrap();
        let y = batchnorm_infer(&x, &[2.0], &[-1.0], &[0.5], &[4.0]);
        for (k, &v) in y.channel(0).iter().enumerate() {
            let expected = 2.0 * (x.channel(0)[k] - 0.5) / (4.0f64 + BATCHNORM_EPSILON).sqrt() - 1.0;
            assert!((v - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn batchnorm_rejects_single_sample_in_train() {
        let x = Tensor1D::single_channel(vec![1.0]).unwrap();
        let mut rm = vec![0.0];
        let mut rv = vec![1.0];
        assert!(matches!(
            batchnorm_train(&x, &[1.0], &[0.0], &mut rm, &mut rv, true),
            Err(CnnError::BatchNormTooShort(1))
        ));
    }

    #[test]
    fn pool_examples() {
        let x = Tensor1D::from_data(2, 3, vec![1.0, 2.0, 3.0, 5.0, 5.0, 5.0]).unwrap();
        assert_eq!(global_avg_pool(&x), vec![2.0, 5.0]);
        // linearity
        let y = Tensor1D::from_data(2, 3, vec![1.0; 6]).unwrap();
        let mut sum = x.clone();
        for (s, v) in sum.values_mut().iter_mut().zip(y.values()) {
            *s += v;
        }
        let lhs = global_avg_pool(&sum);
        let rhs: Vec<f64> = global_avg_pool(&x)
            .iter()
            .zip(global_avg_pool(&y))
            .map(|(a, b)| a + b)
            .collect();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn fc_zero_and_picking() {
        assert_eq!(
            fc_forward(&[1.0, 2.0], &[0.0; 6], &[0.0; 3], 3),
            vec![0.0; 3]
        );
        // identity-like weight picks coordinates
        let w = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let out = fc_forward(&[3.0, 7.0, 9.0], &w, &[0.0, 0.0], 2);
        assert_eq!(out, vec![3.0, 7.0]);
    }

    #[test]
    fn fc_matches_hand_matmul() {
        let w = [0.5, -1.0, 2.0, 0.25, 1.5, -0.75];
        let v = [2.0, 3.0, -1.0];
        let b = [0.1, -0.2];
        let out = fc_forward(&v, &w, &b, 2);
        assert!((out[0] - (0.5 * 2.0 - 3.0 - 2.0 + 0.1)).abs() < 1e-12);
        assert!((out[1] - (0.25 * 2.0 + 1.5 * 3.0 + 0.75 - 0.2)).abs() < 1e-12);
    }

    #[test]
    fn softmax_examples() {
        let u = softmax(&[0.0, 0.0, 0.0]);
        for p in &u {
            assert!((p - 1.0 / 3.0).abs() <= 1e-12);
        }
        let big = softmax(&[1000.0, 0.0]);
        assert!(big[0] > 0.999999 && big.iter().all(|p| p.is_finite()));
        let a = softmax(&[0.3, -0.7, 1.1]);
        let b = softmax(&[0.3 + 42.0, -0.7 + 42.0, 1.1 + 42.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(a.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn loss_examples() {
        let target = [0.0, 1.0, 0.0];
        assert_eq!(
            loss_value(&[0.0, 1.0, 0.0], &target, LossKind::CrossEntropy),
            0.0
        );
        let uniform = [1.0 / 3.0; 3];
        assert!(
            (loss_value(&uniform, &target, LossKind::CrossEntropy) - 3.0f64.ln()).abs() <= 1e-12
        );
        assert_eq!(loss_value(&[0.0, 1.0, 0.0], &target, LossKind::Mse), 0.0);
    }
}
