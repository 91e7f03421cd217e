use serde::{Deserialize, Serialize};

use crate::CnnError;

/// One trunk layer. Convolutions are causal (left zero padding of
/// `kernel_len - 1`), so every layer preserves the temporal length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerKind {
    Conv1d { kernel_len: usize, out_channels: usize },
    Relu,
    BatchNorm,
    GlobalAvgPool,
}

/// Network topology: a configurable trunk ending in global average pooling,
/// then the fixed head (fully connected to `num_classes`, softmax).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_channels: usize,
    pub num_classes: usize,
    pub layers: Vec<LayerKind>,
}

impl NetworkSpec {
    /// Two conv blocks (conv -> relu -> batchnorm), global average pooling,
    /// classification head.
    pub fn classifier(
        input_channels: usize,
        num_classes: usize,
        kernel_len: usize,
        channels_1: usize,
        channels_2: usize,
    ) -> Self {
        NetworkSpec {
            input_channels,
            num_classes,
            layers: vec![
                LayerKind::Conv1d {
                    kernel_len,
                    out_channels: channels_1,
                },
                LayerKind::Relu,
                LayerKind::BatchNorm,
                LayerKind::Conv1d {
                    kernel_len,
                    out_channels: channels_2,
                },
                LayerKind::Relu,
                LayerKind::BatchNorm,
                LayerKind::GlobalAvgPool,
            ],
        }
    }

    /// Full-size architecture: kernel length 2048, 128 then 256 feature
    /// maps. Far too heavy for desktop training; kept for completeness.
    pub fn paper_scale(input_channels: usize, num_classes: usize) -> Self {
        NetworkSpec::classifier(input_channels, num_classes, 2048, 128, 256)
    }

    /// Reduced architecture used by the runnable experiments:
    /// kernel length 64, 16 then 32 feature maps.
    pub fn desk_scale(input_channels: usize, num_classes: usize) -> Self {
        NetworkSpec::classifier(input_channels, num_classes, 64, 16, 32)
    }

    /// Deliberately under-sized configuration (kernel length 3, 8 feature
    /// maps) for the sensitivity study.
    pub fn sensitivity(input_channels: usize, num_classes: usize) -> Self {
        NetworkSpec::classifier(input_channels, num_classes, 3, 8, 8)
    }

    /// Channel count entering the classification head.
    pub fn head_features(&self) -> usize {
        let mut ch = self.input_channels;
        for layer in &self.layers {
            if let LayerKind::Conv1d { out_channels, .. } = layer {
                ch = *out_channels;
            }
        }
        ch
    }

    pub fn validate(&self) -> Result<(), CnnError> {
        if self.input_channels == 0 {
            return Err(CnnError::BadSpec("input_channels must be >= 1".into()));
        }
        if self.num_classes < 2 {
            return Err(CnnError::BadSpec("num_classes must be >= 2".into()));
        }
        let pools = self
            .layers
            .iter()
            .filter(|l| matches!(l, LayerKind::GlobalAvgPool))
            .count();
        if pools != 1 || !matches!(self.layers.last(), Some(LayerKind::GlobalAvgPool)) {
            return Err(CnnError::BadSpec(
                "the trunk must end with exactly one global_avg_pool".into(),
            ));
        }
        for layer in &self.layers {
            if let LayerKind::Conv1d {
                kernel_len,
                out_channels,
            } = layer
            {
                if *kernel_len == 0 || *out_channels == 0 {
                    return Err(CnnError::BadSpec(
                        "conv layers need kernel_len >= 1 and out_channels >= 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}
