//! Spectral content of the synthetic ground motion: the generator targets
//! 0.5-10 Hz, so energy outside a generous 0.25-20 Hz window must be
//! negligible.

use rustfft::{num_complex::Complex, FftPlanner};
use sim_nonlinear::synth_ground_motion;

#[test]
fn spectral_energy_concentrated_in_band() {
    let duration = 40.0;
    let dt = 0.02;
    let g = synth_ground_motion(21, duration, dt, 9.81).unwrap();
    let samples = g.channel_data(0);

    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);

    let n = buf.len();
    let df = 1.0 / (n as f64 * dt);
    let mut total = 0.0;
    let mut in_band = 0.0;
    for (j, v) in buf.iter().enumerate().take(n / 2 + 1) {
        let freq = j as f64 * df;
        let energy = v.norm_sqr();
        total += energy;
        if (0.25..=20.0).contains(&freq) {
            in_band += energy;
        }
    }
    let outside = 1.0 - in_band / total;
    assert!(outside < 0.05, "out-of-band energy fraction {outside:.4}");
}
