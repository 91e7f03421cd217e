use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spec::{LayerKind, NetworkSpec};
use crate::CnnError;

/// Per-layer trainable state, aligned index-for-index with the spec's
/// trunk layers. Conv weights are flat `[out][in][tap]`.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel_len: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
    BatchNorm {
        channels: usize,
        gamma: Vec<f64>,
        beta: Vec<f64>,
        running_mean: Vec<f64>,
        running_var: Vec<f64>,
    },
    /// ReLU / pooling layers carry no parameters.
    Stateless,
}

/// All trainable weights: trunk layers plus the classification head
/// (`fc_weight` is flat `[class][feature]`).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layers: Vec<LayerParams>,
    pub fc_weight: Vec<f64>,
    pub fc_bias: Vec<f64>,
    pub head_features: usize,
    pub num_classes: usize,
}

fn glorot(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize, count: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..count).map(|_| rng.gen_range(-limit..limit)).collect()
}

impl NetworkParams {
    /// Random initialization: uniform in +/- sqrt(6 / (fan_in + fan_out))
    /// for conv and head weights, zero biases, identity batch norm.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Result<Self, CnnError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut channels = spec.input_channels;
        let mut layers = Vec::with_capacity(spec.layers.len());
        for layer in &spec.layers {
            layers.push(match *layer {
                LayerKind::Conv1d {
                    kernel_len,
                    out_channels,
                } => {
                    let fan_in = channels * kernel_len;
                    let fan_out = out_channels * kernel_len;
                    let weights = glorot(
                        &mut rng,
                        fan_in,
                        fan_out,
                        out_channels * channels * kernel_len,
                    );
                    let p = LayerParams::Conv1d {
                        in_channels: channels,
                        out_channels,
                        kernel_len,
                        weights,
                        bias: vec![0.0; out_channels],
                    };
                    channels = out_channels;
                    p
                }
                LayerKind::BatchNorm => LayerParams::BatchNorm {
                    channels,
                    gamma: vec![1.0; channels],
                    beta: vec![0.0; channels],
                    running_mean: vec![0.0; channels],
                    running_var: vec![1.0; channels],
                },
                LayerKind::Relu | LayerKind::GlobalAvgPool => LayerParams::Stateless,
            });
        }
        let head_features = spec.head_features();
        let fc_weight = glorot(
            &mut rng,
            head_features,
            spec.num_classes,
            spec.num_classes * head_features,
        );
        Ok(NetworkParams {
            layers,
            fc_weight,
            fc_bias: vec![0.0; spec.num_classes],
            head_features,
            num_classes: spec.num_classes,
        })
    }

    /// Zero-filled counterpart used for gradients and tests.
    pub fn zeros_like(&self) -> GradientSet {
        GradientSet {
            layers: self
                .layers
                .iter()
                .map(|l| match l {
                    LayerParams::Conv1d { weights, bias, .. } => LayerGrads::Conv1d {
                        weights: vec![0.0; weights.len()],
                        bias: vec![0.0; bias.len()],
                    },
                    LayerParams::BatchNorm { channels, .. } => LayerGrads::BatchNorm {
                        gamma: vec![0.0; *channels],
                        beta: vec![0.0; *channels],
                    },
                    LayerParams::Stateless => LayerGrads::Stateless,
                })
                .collect(),
            fc_weight: vec![0.0; self.fc_weight.len()],
            fc_bias: vec![0.0; self.fc_bias.len()],
        }
    }

    /// Flat views over every trainable coordinate, paired by name. Batch
    /// norm running statistics are not trainable and are excluded.
    pub fn coordinate_count(&self) -> usize {
        let mut count = self.fc_weight.len() + self.fc_bias.len();
        for l in &self.layers {
            count += match l {
                LayerParams::Conv1d { weights, bias, .. } => weights.len() + bias.len(),
                LayerParams::BatchNorm { gamma, beta, .. } => gamma.len() + beta.len(),
                LayerParams::Stateless => 0,
            };
        }
        count
    }

    pub(crate) fn coordinate_mut(&mut self, idx: usize) -> (&mut f64, String) {
        let mut offset = idx;
        for (li, l) in self.layers.iter_mut().enumerate() {
            match l {
                LayerParams::Conv1d { weights, bias, .. } => {
                    if offset < weights.len() {
                        return (&mut weights[offset], format!("layer{li}.conv.w[{offset}]"));
                    }
                    offset -= weights.len();
                    if offset < bias.len() {
                        return (&mut bias[offset], format!("layer{li}.conv.b[{offset}]"));
                    }
                    offset -= bias.len();
                }
                LayerParams::BatchNorm { gamma, beta, .. } => {
                    if offset < gamma.len() {
                        return (&mut gamma[offset], format!("layer{li}.bn.gamma[{offset}]"));
                    }
                    offset -= gamma.len();
                    if offset < beta.len() {
                        return (&mut beta[offset], format!("layer{li}.bn.beta[{offset}]"));
                    }
                    offset -= beta.len();
                }
                LayerParams::Stateless => {}
            }
        }
        if offset < self.fc_weight.len() {
            return (&mut self.fc_weight[offset], format!("fc.w[{offset}]"));
        }
        offset -= self.fc_weight.len();
        (&mut self.fc_bias[offset], format!("fc.b[{offset}]"))
    }

    pub(crate) fn gradient_at(grads: &GradientSet, params: &NetworkParams, idx: usize) -> f64 {
        let mut offset = idx;
        for (l, g) in params.layers.iter().zip(&grads.layers) {
            match (l, g) {
                (
                    LayerParams::Conv1d { weights, bias, .. },
                    LayerGrads::Conv1d {
                        weights: gw,
                        bias: gb,
                    },
                ) => {
                    if offset < weights.len() {
                        return gw[offset];
                    }
                    offset -= weights.len();
                    if offset < bias.len() {
                        return gb[offset];
                    }
                    offset -= bias.len();
                }
                (
                    LayerParams::BatchNorm { gamma, beta, .. },
                    LayerGrads::BatchNorm {
                        gamma: gg,
                        beta: gb,
                    },
                ) => {
                    if offset < gamma.len() {
                        return gg[offset];
                    }
                    offset -= gamma.len();
                    if offset < beta.len() {
                        return gb[offset];
                    }
                    offset -= beta.len();
                }
                (LayerParams::Stateless, LayerGrads::Stateless) => {}
                _ => unreachable!("gradient set misaligned with params"),
            }
        }
        if offset < grads.fc_weight.len() {
            return grads.fc_weight[offset];
        }
        offset -= grads.fc_weight.len();
        grads.fc_bias[offset]
    }
}

/// Loss gradients for every trainable parameter; mirrors `NetworkParams`.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerGrads {
    Conv1d { weights: Vec<f64>, bias: Vec<f64> },
    BatchNorm { gamma: Vec<f64>, beta: Vec<f64> },
    Stateless,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerGrads>,
    pub fc_weight: Vec<f64>,
    pub fc_bias: Vec<f64>,
}

impl GradientSet {
    pub fn is_finite(&self) -> bool {
        let all = |v: &[f64]| v.iter().all(|x| x.is_finite());
        self.layers.iter().all(|l| match l {
            LayerGrads::Conv1d { weights, bias } => all(weights) && all(bias),
            LayerGrads::BatchNorm { gamma, beta } => all(gamma) && all(beta),
            LayerGrads::Stateless => true,
        }) && all(&self.fc_weight)
            && all(&self.fc_bias)
    }

    /// `self += other` (gradient accumulation across a mini batch).
    pub fn accumulate(&mut self, other: &GradientSet) {
        let add = |a: &mut Vec<f64>, b: &[f64]| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        };
        for (l, o) in self.layers.iter_mut().zip(&other.layers) {
            match (l, o) {
                (
                    LayerGrads::Conv1d { weights, bias },
                    LayerGrads::Conv1d {
                        weights: ow,
                        bias: ob,
                    },
                ) => {
                    add(weights, ow);
                    add(bias, ob);
                }
                (
                    LayerGrads::BatchNorm { gamma, beta },
                    LayerGrads::BatchNorm {
                        gamma: og,
                        beta: ob,
                    },
                ) => {
                    add(gamma, og);
                    add(beta, ob);
                }
                (LayerGrads::Stateless, LayerGrads::Stateless) => {}
                _ => unreachable!("gradient sets misaligned"),
            }
        }
        add(&mut self.fc_weight, &other.fc_weight);
        add(&mut self.fc_bias, &other.fc_bias);
    }

    pub fn scale(&mut self, factor: f64) {
        let mul = |a: &mut Vec<f64>| {
            for x in a.iter_mut() {
                *x *= factor;
            }
        };
        for l in self.layers.iter_mut() {
            match l {
                LayerGrads::Conv1d { weights, bias } => {
                    mul(weights);
                    mul(bias);
                }
                LayerGrads::BatchNorm { gamma, beta } => {
                    mul(gamma);
                    mul(beta);
                }
                LayerGrads::Stateless => {}
            }
        }
        mul(&mut self.fc_weight);
        mul(&mut self.fc_bias);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seed_deterministic_and_bounded() {
        let spec = NetworkSpec::classifier(1, 3, 5, 4, 6);
        let a = NetworkParams::init(&spec, 7).unwrap();
        let b = NetworkParams::init(&spec, 7).unwrap();
        let c = NetworkParams::init(&spec, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        if let LayerParams::Conv1d { weights, .. } = &a.layers[0] {
            let limit = (6.0f64 / (5 + 20) as f64).sqrt();
            assert!(weights.iter().all(|w| w.abs() < limit));
        } else {
            panic!("layer 0 should be conv");
        }
    }

    #[test]
    fn coordinate_walk_covers_everything() {
        let spec = NetworkSpec::classifier(2, 3, 3, 4, 5);
        let mut p = NetworkParams::init(&spec, 1).unwrap();
        let n = p.coordinate_count();
        // conv1: 4*2*3 + 4; bn1: 4+4; conv2: 5*4*3 + 5; bn2: 5+5; fc: 3*5+3
        assert_eq!(n, 24 + 4 + 8 + 60 + 5 + 10 + 15 + 3);
        for i in 0..n {
            let (v, _name) = p.coordinate_mut(i);
            *v += 0.0;
        }
    }
}
