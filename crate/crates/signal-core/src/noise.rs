use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{derive_seed, Result, SignalError, TimeSeries};

/// Additive Gaussian measurement noise scaled to a fraction of the signal's
/// own root-mean-square level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// RMS noise-to-signal ratio (>= 0); 0.1 means 10% noise.
    pub ratio: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(ratio: f64, seed: u64) -> Self {
        assert!(ratio >= 0.0 && ratio.is_finite(), "noise ratio must be >= 0");
        NoiseModel { ratio, seed }
    }
}

/// Root-mean-square of a single-channel signal: `sqrt(mean(x^2))`.
pub fn rms(series: &TimeSeries) -> Result<f64> {
    let samples = series.require_single()?;
    Ok(rms_slice(samples))
}

pub(crate) fn rms_slice(samples: &[f64]) -> f64 {
    let sum_sq: f64 = samples.iter().map(|v| v * v).sum();
    (sum_sq / samples.len() as f64).sqrt()
}

/// Standard deviation the noise model would inject into this signal.
pub fn noise_std(series: &TimeSeries, ratio: f64) -> Result<f64> {
    Ok(ratio * rms(series)?)
}

/// Adds zero-mean i.i.d. Gaussian noise with standard deviation
/// `ratio * rms(series)`. Deterministic for a given seed.
pub fn add_measurement_noise(series: &TimeSeries, noise: &NoiseModel) -> Result<TimeSeries> {
    let samples = series.require_single()?;
    if noise.ratio == 0.0 {
        return Ok(series.clone());
    }
    let std = noise.ratio * rms_slice(samples);
    let noisy = contaminate(samples, std, noise.seed);
    TimeSeries::new(
        series.dt(),
        series.t0(),
        series.channels().to_vec(),
        vec![noisy],
    )
}

/// Multi-channel variant: each channel gets noise scaled to its own RMS,
/// from a per-channel seed derived from `noise.seed`.
pub fn add_noise_all_channels(series: &TimeSeries, noise: &NoiseModel) -> Result<TimeSeries> {
    if noise.ratio == 0.0 {
        return Ok(series.clone());
    }
    let data = (0..series.num_channels())
        .map(|c| {
            let samples = series.channel_data(c);
            let std = noise.ratio * rms_slice(samples);
            contaminate(samples, std, derive_seed(noise.seed, &[0x6e6f_6973, c as u64]))
        })
        .collect();
    TimeSeries::new(series.dt(), series.t0(), series.channels().to_vec(), data)
}

fn contaminate(samples: &[f64], std: f64, seed: u64) -> Vec<f64> {
    if std == 0.0 {
        return samples.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, std).expect("std is finite and non-negative");
    samples.iter().map(|v| v + dist.sample(&mut rng)).collect()
}

/// Guard used by callers that accept externally produced signals.
pub(crate) fn ensure_finite(samples: &[f64], channel: &str) -> Result<()> {
    if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
        return Err(SignalError::NonFiniteSample {
            channel: channel.to_string(),
            index,
        });
    }
    Ok(())
}
