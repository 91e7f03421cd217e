use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signal_core::TimeSeries;
use sim_gendamp::step_count;

use crate::NonlinearError;

const BAND_LOW_HZ: f64 = 0.5;
const BAND_HIGH_HZ: f64 = 10.0;

/// Synthetic band-limited ground motion: a random-phase harmonic sum over
/// 0.5-10 Hz shaped by a trapezoidal strong-motion envelope and rescaled so
/// `max |a| = peak_accel`. Deterministic per seed; a desk-scale stand-in for
/// recorded accelerograms.
pub fn synth_ground_motion(
    seed: u64,
    duration: f64,
    dt: f64,
    peak_accel: f64,
) -> Result<TimeSeries, NonlinearError> {
    if !(peak_accel > 0.0 && peak_accel.is_finite()) {
        return Err(NonlinearError::BadSystem(format!(
            "peak acceleration must be > 0, got {peak_accel}"
        )));
    }
    let steps = step_count(dt, duration)?;
    let n = steps + 1;

    // harmonics of the record length inside the band
    let j_min = (BAND_LOW_HZ * duration).ceil().max(1.0) as usize;
    let j_max = (BAND_HIGH_HZ * duration).floor() as usize;
    if j_max < j_min {
        return Err(NonlinearError::BadSystem(format!(
            "duration {duration} s too short for the {BAND_LOW_HZ}-{BAND_HIGH_HZ} Hz band"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (j_min..=j_max)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();

    let envelope = |t: f64| -> f64 {
        let ramp_end = 0.1 * duration;
        let flat_end = 0.6 * duration;
        if t < ramp_end {
            t / ramp_end
        } else if t <= flat_end {
            1.0
        } else {
            ((duration - t) / (duration - flat_end)).max(0.0)
        }
    };

    let mut samples = Vec::with_capacity(n);
    let mut max_abs = 0.0f64;
    for k in 0..n {
        let t = k as f64 * dt;
        let mut v = 0.0;
        for (idx, j) in (j_min..=j_max).enumerate() {
            let omega = std::f64::consts::TAU * j as f64 / duration;
            v += (omega * t + phases[idx]).cos();
        }
        v *= envelope(t);
        max_abs = max_abs.max(v.abs());
        samples.push(v);
    }
    let scale = peak_accel / max_abs;
    for v in &mut samples {
        *v *= scale;
    }
    Ok(TimeSeries::single(dt, "ag", "m/s^2", samples)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_is_exact() {
        let peak = 0.827 * 9.81;
        let g = synth_ground_motion(5, 40.0, 0.02, peak).unwrap();
        let max_abs = g
            .channel_data(0)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((max_abs - peak).abs() <= 1e-9);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synth_ground_motion(11, 20.0, 0.02, 1.0).unwrap();
        let b = synth_ground_motion(11, 20.0, 0.02, 1.0).unwrap();
        let c = synth_ground_motion(12, 20.0, 0.02, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_peak() {
        assert!(synth_ground_motion(1, 20.0, 0.02, 0.0).is_err());
        assert!(synth_ground_motion(1, 20.0, 0.02, -1.0).is_err());
    }
}
