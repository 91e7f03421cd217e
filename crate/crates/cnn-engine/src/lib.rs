//! From-scratch 1D convolutional neural network for signal classification:
//! causal convolutions, ReLU, per-example batch normalization, global
//! average pooling, a softmax head, exact backpropagation, per-example
//! stochastic gradient descent, and a finite-difference gradient checker.
//! Plain `f64` arrays throughout; no autodiff framework behind it.

mod error;
mod gradcheck;
mod io;
pub mod layers;
mod network;
mod params;
mod spec;
mod tensor;
mod train;

pub use error::CnnError;
pub use gradcheck::{grad_check, GradCheckReport};
pub use io::{
    load_weights, report_to_csv, save_report, save_weights, LayerValues, WeightsFile,
    WEIGHTS_FORMAT_VERSION,
};
pub use layers::LossKind;
pub use network::{classify, example_loss, network_backward, network_forward, ForwardCache, Mode};
pub use params::{GradientSet, LayerGrads, LayerParams, NetworkParams};
pub use spec::{LayerKind, NetworkSpec};
pub use tensor::{LabeledExample, Tensor1D};
pub use train::{
    evaluate_accuracy, sgd_step, train, IterRecord, LrSchedule, TrainConfig, TrainReport,
};
