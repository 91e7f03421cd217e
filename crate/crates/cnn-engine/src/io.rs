use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::params::{LayerParams, NetworkParams};
use crate::spec::NetworkSpec;
use crate::train::{TrainConfig, TrainReport};
use crate::CnnError;

pub const WEIGHTS_FORMAT_VERSION: u32 = 1;

/// Serialized network: topology, every trainable value (nested decimal
/// arrays), and the training configuration/seeds that produced it.
#[derive(Debug, Serialize, Deserialize)]
pub struct WeightsFile {
    pub format_version: u32,
    pub spec: NetworkSpec,
    pub layers: Vec<LayerValues>,
    /// `[class][feature]`
    pub fc_weight: Vec<Vec<f64>>,
    pub fc_bias: Vec<f64>,
    pub train_config: Option<TrainConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerValues {
    Conv1d {
        /// `[out_channel][in_channel][tap]`
        weights: Vec<Vec<Vec<f64>>>,
        bias: Vec<f64>,
    },
    BatchNorm {
        gamma: Vec<f64>,
        beta: Vec<f64>,
        running_mean: Vec<f64>,
        running_var: Vec<f64>,
    },
    Stateless,
}

pub fn save_weights(
    path: &Path,
    spec: &NetworkSpec,
    params: &NetworkParams,
    train_config: Option<&TrainConfig>,
) -> Result<(), CnnError> {
    let layers = params
        .layers
        .iter()
        .map(|l| match l {
            LayerParams::Conv1d {
                in_channels,
                out_channels,
                kernel_len,
                weights,
                bias,
            } => LayerValues::Conv1d {
                weights: (0..*out_channels)
                    .map(|o| {
                        (0..*in_channels)
                            .map(|i| {
                                let base = (o * in_channels + i) * kernel_len;
                                weights[base..base + kernel_len].to_vec()
                            })
                            .collect()
                    })
                    .collect(),
                bias: bias.clone(),
            },
            LayerParams::BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                ..
            } => LayerValues::BatchNorm {
                gamma: gamma.clone(),
                beta: beta.clone(),
                running_mean: running_mean.clone(),
                running_var: running_var.clone(),
            },
            LayerParams::Stateless => LayerValues::Stateless,
        })
        .collect();
    let file = WeightsFile {
        format_version: WEIGHTS_FORMAT_VERSION,
        spec: spec.clone(),
        layers,
        fc_weight: (0..params.num_classes)
            .map(|c| params.fc_weight[c * params.head_features..(c + 1) * params.head_features].to_vec())
            .collect(),
        fc_bias: params.fc_bias.clone(),
        train_config: train_config.cloned(),
    };
    let json = serde_json::to_string_pretty(&file).expect("weights serialize");
    fs::write(path, json).map_err(|e| CnnError::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<(NetworkSpec, NetworkParams, Option<TrainConfig>), CnnError> {
    let text = fs::read_to_string(path).map_err(|e| CnnError::io(path, e))?;
    let file: WeightsFile = serde_json::from_str(&text).map_err(|e| CnnError::WeightsFormat {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if file.format_version != WEIGHTS_FORMAT_VERSION {
        return Err(CnnError::WeightsFormat {
            path: path.to_path_buf(),
            message: format!("unsupported format_version {}", file.format_version),
        });
    }
    file.spec.validate()?;
    let bad = |message: String| CnnError::WeightsFormat {
        path: path.to_path_buf(),
        message,
    };
    if file.layers.len() != file.spec.layers.len() {
        return Err(bad(format!(
            "{} layer value blocks for {} spec layers",
            file.layers.len(),
            file.spec.layers.len()
        )));
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for (idx, lv) in file.layers.into_iter().enumerate() {
        layers.push(match lv {
            LayerValues::Conv1d { weights, bias } => {
                let out_channels = weights.len();
                let in_channels = weights.first().map(Vec::len).unwrap_or(0);
                let kernel_len = weights
                    .first()
                    .and_then(|r| r.first())
                    .map(Vec::len)
                    .unwrap_or(0);
                if out_channels == 0 || in_channels == 0 || kernel_len == 0 {
                    return Err(bad(format!("layer {idx}: empty conv weights")));
                }
                let mut flat = Vec::with_capacity(out_channels * in_channels * kernel_len);
                for row in &weights {
                    if row.len() != in_channels {
                        return Err(bad(format!("layer {idx}: ragged conv weights")));
                    }
                    for taps in row {
                        if taps.len() != kernel_len {
                            return Err(bad(format!("layer {idx}: ragged conv taps")));
                        }
                        flat.extend_from_slice(taps);
                    }
                }
                if bias.len() != out_channels {
                    return Err(bad(format!("layer {idx}: bias length mismatch")));
                }
                LayerParams::Conv1d {
                    in_channels,
                    out_channels,
                    kernel_len,
                    weights: flat,
                    bias,
                }
            }
            LayerValues::BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
            } => {
                let channels = gamma.len();
                if beta.len() != channels
                    || running_mean.len() != channels
                    || running_var.len() != channels
                {
                    return Err(bad(format!("layer {idx}: batch-norm length mismatch")));
                }
                if running_var.iter().any(|&v| v < 0.0) {
                    return Err(bad(format!("layer {idx}: negative running variance")));
                }
                LayerParams::BatchNorm {
                    channels,
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                }
            }
            LayerValues::Stateless => LayerParams::Stateless,
        });
    }
    let head_features = file.spec.head_features();
    let num_classes = file.spec.num_classes;
    if file.fc_weight.len() != num_classes || file.fc_bias.len() != num_classes {
        return Err(bad("head shape mismatch".into()));
    }
    let mut fc_weight = Vec::with_capacity(num_classes * head_features);
    for row in &file.fc_weight {
        if row.len() != head_features {
            return Err(bad("head weight row length mismatch".into()));
        }
        fc_weight.extend_from_slice(row);
    }
    let params = NetworkParams {
        layers,
        fc_weight,
        fc_bias: file.fc_bias,
        head_features,
        num_classes,
    };
    Ok((file.spec, params, file.train_config))
}

/// Plot-ready training history: one row per iteration, validation accuracy
/// filled on each epoch's last row.
pub fn report_to_csv(report: &TrainReport) -> String {
    let mut out = String::from("iteration,epoch,train_loss,train_acc,val_acc\n");
    for row in &report.rows {
        let val = row
            .val_acc
            .map(|v| format!("{v:.6}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:.12e},{:.6},{}",
            row.iteration, row.epoch, row.train_loss, row.train_acc, val
        );
    }
    out
}

pub fn save_report(path: &Path, report: &TrainReport) -> Result<(), CnnError> {
    fs::write(path, report_to_csv(report)).map_err(|e| CnnError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::classify;
    use crate::tensor::Tensor1D;

    #[test]
    fn weights_roundtrip_preserves_behavior() {
        let spec = NetworkSpec::classifier(2, 3, 5, 4, 6);
        let params = NetworkParams::init(&spec, 31).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.json");
        save_weights(&path, &spec, &params, Some(&TrainConfig::default())).unwrap();
        let (spec2, params2, cfg) = load_weights(&path).unwrap();
        assert_eq!(spec2, spec);
        assert_eq!(params2, params);
        assert_eq!(cfg, Some(TrainConfig::default()));
        let input = Tensor1D::from_data(2, 20, (0..40).map(|i| (i as f64 * 0.21).sin()).collect())
            .unwrap();
        let a = classify(&spec, &params, &input).unwrap();
        let b = classify(&spec2, &params2, &input).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_weights_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.json");
        std::fs::write(&path, "{\"format_version\": 99}").unwrap();
        assert!(matches!(
            load_weights(&path),
            Err(CnnError::WeightsFormat { .. })
        ));
    }

    #[test]
    fn csv_header_and_epoch_rows() {
        use crate::train::IterRecord;
        let report = TrainReport {
            rows: vec![
                IterRecord {
                    iteration: 1,
                    epoch: 1,
                    train_loss: 1.5,
                    correct: false,
                    train_acc: 0.0,
                    val_acc: None,
                },
                IterRecord {
                    iteration: 2,
                    epoch: 1,
                    train_loss: 0.5,
                    correct: true,
                    train_acc: 0.5,
                    val_acc: Some(1.0),
                },
            ],
            config: TrainConfig::default(),
            final_val_acc: Some(1.0),
        };
        let csv = report_to_csv(&report);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,epoch,train_loss,train_acc,val_acc"
        );
        assert!(lines.next().unwrap().ends_with(','));
        assert!(lines.next().unwrap().ends_with("1.000000"));
    }
}
