use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use signal_core::{Channel, TimeSeries};

use crate::SimError;

/// Number of integration steps covering `duration`; errors unless
/// `duration/dt` is a positive integer (within rounding slack).
pub fn step_count(dt: f64, duration: f64) -> Result<usize, SimError> {
    if !(dt.is_finite() && dt > 0.0 && duration.is_finite() && duration > 0.0) {
        return Err(SimError::BadStepCount { dt, duration });
    }
    let ratio = duration / dt;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-6 * steps.max(1.0) {
        return Err(SimError::BadStepCount { dt, duration });
    }
    Ok(steps as usize)
}

/// Zero-mean i.i.d. Gaussian force per DOF, sampled on the grid
/// `t = 0, dt, ..., duration` (one channel per DOF, `steps + 1` samples).
pub fn white_noise_force(
    n: usize,
    variance: f64,
    dt: f64,
    duration: f64,
    seed: u64,
) -> Result<TimeSeries, SimError> {
    if variance < 0.0 || !variance.is_finite() {
        return Err(SimError::BadSystem(format!(
            "force variance must be >= 0, got {variance}"
        )));
    }
    let samples = step_count(dt, duration)? + 1;
    let channels: Vec<Channel> = (1..=n)
        .map(|i| Channel::new(format!("f{i}"), "N"))
        .collect();
    let data: Vec<Vec<f64>> = if variance == 0.0 {
        vec![vec![0.0; samples]; n]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, variance.sqrt()).expect("finite std");
        (0..n)
            .map(|_| (0..samples).map(|_| dist.sample(&mut rng)).collect())
            .collect()
    };
    Ok(TimeSeries::new(dt, 0.0, channels, data)?)
}
