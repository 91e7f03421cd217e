//! Uniformly sampled multi-channel time series, measurement-noise injection,
//! trapezoidal integration of acceleration records, and the text file formats
//! (signal CSV + JSON metadata sidecar, dataset manifest) shared by every
//! stage of the classification pipeline.

mod error;
mod integrate;
mod io;
mod manifest;
mod noise;
mod seed;
mod series;

pub use error::SignalError;
pub use integrate::double_integrate;
pub use io::{read_signal, write_signal, META_FORMAT_VERSION};
pub use manifest::{DatasetManifest, ManifestEntry, Split, MANIFEST_FORMAT_VERSION};
pub use noise::{add_measurement_noise, add_noise_all_channels, noise_std, rms, NoiseModel};
pub use seed::derive_seed;
pub use series::{Channel, LabeledSignal, Provenance, TimeSeries};

pub type Result<T> = std::result::Result<T, SignalError>;
