use nalgebra::DVector;
use signal_core::{Channel, TimeSeries};

use crate::scheme::{ConvolutionHistory, ConvolutionPath, SchemeMatrices};
use crate::{step_count, GenDampedSystem, SimError};

/// Simulated response of a hereditary-damped linear system: displacement,
/// velocity, and acceleration per DOF (channels `x1..xn, v1..vn, a1..an`).
pub fn simulate_gendamp(
    system: &GenDampedSystem,
    force: &TimeSeries,
    x0: &[f64],
    v0: &[f64],
    dt: f64,
    duration: f64,
) -> Result<TimeSeries, SimError> {
    let n = system.n();
    let steps = step_count(dt, duration)?;
    if force.num_channels() != n {
        return Err(SimError::ForceShape {
            got: force.num_channels(),
            want: n,
        });
    }
    if (force.dt() - dt).abs() > 1e-12 * dt {
        return Err(SimError::DtMismatch {
            force_dt: force.dt(),
            dt,
        });
    }
    if force.len() < steps + 1 {
        return Err(SimError::ForceTooShort {
            got: force.len(),
            need: steps + 1,
        });
    }
    if x0.len() != n || v0.len() != n {
        return Err(SimError::BadSystem(format!(
            "initial conditions must have {n} entries"
        )));
    }

    let kernel = system.kernel();
    let mut history = if kernel.is_dirac() {
        None
    } else {
        Some(ConvolutionHistory::new(kernel, dt, steps, n)?)
    };
    let path = match &history {
        Some(h) => ConvolutionPath::Hereditary {
            current_weight: h.current_weight(),
        },
        None => ConvolutionPath::Dirac,
    };
    let matrices = SchemeMatrices::assemble(
        system.mass(),
        system.damping(),
        system.stiffness(),
        dt,
        path,
    )?;

    let force_at = |k: usize| DVector::from_fn(n, |i, _| force.channel_data(i)[k]);
    let x0 = DVector::from_column_slice(x0);
    let v0 = DVector::from_column_slice(v0);

    // initial acceleration from the equation of motion at t = 0; the
    // convolution term is empty there (w0 = xd0 for the Dirac kernel)
    let w0 = if kernel.is_dirac() {
        v0.clone()
    } else {
        DVector::zeros(n)
    };
    let rhs0 = force_at(0) - system.damping() * &w0 - system.stiffness() * &x0;
    let a0 = system
        .mass()
        .clone()
        .lu()
        .solve(&rhs0)
        .ok_or(SimError::SingularMatrix { step: 0 })?;

    let mut z = DVector::<f64>::zeros(4 * n);
    z.rows_mut(0, n).copy_from(&a0);
    z.rows_mut(n, n).copy_from(&v0);
    z.rows_mut(2 * n, n).copy_from(&w0);
    z.rows_mut(3 * n, n).copy_from(&x0);

    let mut disp = vec![Vec::with_capacity(steps + 1); n];
    let mut vel = vec![Vec::with_capacity(steps + 1); n];
    let mut acc = vec![Vec::with_capacity(steps + 1); n];
    let mut record = |z: &DVector<f64>| {
        for i in 0..n {
            acc[i].push(z[i]);
            vel[i].push(z[n + i]);
            disp[i].push(z[3 * n + i]);
        }
    };
    record(&z);
    if let Some(h) = history.as_mut() {
        h.push_velocity((0..n).map(|i| v0[i]));
    }

    let mut u = DVector::<f64>::zeros(4 * n);
    for k in 1..=steps {
        u.rows_mut(0, n).copy_from(&force_at(k));
        if let Some(h) = history.as_ref() {
            u.rows_mut(3 * n, n).copy_from(&h.history_load(k));
        }
        z = matrices.step(&z, &u);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Diverged { step: k });
        }
        record(&z);
        if let Some(h) = history.as_mut() {
            h.push_velocity((0..n).map(|i| z[n + i]));
        }
    }

    let mut channels = Vec::with_capacity(3 * n);
    let mut data = Vec::with_capacity(3 * n);
    for (prefix, unit, cols) in [("x", "m", disp), ("v", "m/s", vel), ("a", "m/s^2", acc)] {
        for (i, col) in cols.into_iter().enumerate() {
            channels.push(Channel::new(format!("{prefix}{}", i + 1), unit));
            data.push(col);
        }
    }
    Ok(TimeSeries::new(dt, 0.0, channels, data)?)
}

/// Total mechanical energy `0.5 xd' M xd + 0.5 x' K x` along a simulated
/// trajectory; used by the dissipativity checks.
pub fn mechanical_energy(system: &GenDampedSystem, response: &TimeSeries) -> Vec<f64> {
    let n = system.n();
    let len = response.len();
    let mut out = Vec::with_capacity(len);
    let mut x = DVector::<f64>::zeros(n);
    let mut v = DVector::<f64>::zeros(n);
    for k in 0..len {
        for i in 0..n {
            x[i] = response.channel_data(i)[k];
            v[i] = response.channel_data(n + i)[k];
        }
        let e = 0.5 * (v.dot(&(system.mass() * &v)) + x.dot(&(system.stiffness() * &x)));
        out.push(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{benchmark_two_dof, white_noise_force, KernelSpec};

    fn zero_force(n: usize, dt: f64, duration: f64) -> TimeSeries {
        white_noise_force(n, 0.0, dt, duration, 0).unwrap()
    }

    #[test]
    fn zero_input_zero_response() {
        let sys = benchmark_two_dof(KernelSpec::Exponential(1.5));
        let force = zero_force(2, 0.01, 1.0);
        let out = simulate_gendamp(&sys, &force, &[0.0, 0.0], &[0.0, 0.0], 0.01, 1.0).unwrap();
        for c in 0..6 {
            assert!(out.channel_data(c).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn response_is_linear_in_force() {
        let sys = benchmark_two_dof(KernelSpec::Gaussian(1.5));
        let force = white_noise_force(2, 9.0, 0.01, 2.0, 11).unwrap();
        let doubled = TimeSeries::new(
            force.dt(),
            force.t0(),
            force.channels().to_vec(),
            (0..2)
                .map(|c| force.channel_data(c).iter().map(|v| 2.0 * v).collect())
                .collect(),
        )
        .unwrap();
        let base = simulate_gendamp(&sys, &force, &[0.0; 2], &[0.0; 2], 0.01, 2.0).unwrap();
        let twice = simulate_gendamp(&sys, &doubled, &[0.0; 2], &[0.0; 2], 0.01, 2.0).unwrap();
        for c in 0..6 {
            for (a, b) in base.channel_data(c).iter().zip(twice.channel_data(c)) {
                assert!((2.0 * a - b).abs() <= 1e-9 * b.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn force_shape_checked() {
        let sys = benchmark_two_dof(KernelSpec::Dirac);
        let force = zero_force(1, 0.01, 1.0);
        assert!(matches!(
            simulate_gendamp(&sys, &force, &[0.0; 2], &[0.0; 2], 0.01, 1.0),
            Err(SimError::ForceShape { .. })
        ));
    }

    fn free_decay_energy(kernel: KernelSpec) -> Vec<f64> {
        let sys = benchmark_two_dof(kernel);
        let force = zero_force(2, 0.01, 40.0);
        let out = simulate_gendamp(&sys, &force, &[1.0, 1.0], &[0.0, 0.5], 0.01, 40.0).unwrap();
        mechanical_energy(&sys, &out)
    }

    #[test]
    fn exponential_free_decay_energy_peaks_non_increasing() {
        // short memory relative to the modal periods: successive local
        // maxima of the mechanical energy must already be monotone
        let energy = free_decay_energy(KernelSpec::Exponential(1.5));
        let mut peaks = Vec::new();
        for k in 1..energy.len() - 1 {
            if energy[k] >= energy[k - 1] && energy[k] > energy[k + 1] {
                peaks.push(energy[k]);
            }
        }
        assert!(peaks.len() > 3, "too few energy peaks");
        for pair in peaks.windows(2) {
            assert!(
                pair[1] <= pair[0] * (1.0 + 1e-9),
                "energy peak grew from {} to {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn free_decay_envelope_non_increasing_all_kernels() {
        // dissipativity across the kernel family. Parameters are chosen so
        // each kernel's transform has positive real part at the modal
        // frequencies (1.9 and 5.2 rad/s); t*exp(-mu t) turns anti-dissipative
        // above omega = mu, so it needs a short memory here. Kernels with
        // memory comparable to the period exchange energy with the damper
        // within a cycle, so the envelope is taken per fundamental period
        // (~3.3 s -> 4 s windows).
        let kernels = [
            KernelSpec::Exponential(1.5),
            KernelSpec::TimesTExponential(20.0),
            KernelSpec::Gaussian(1.5),
            KernelSpec::Rectangular(0.05),
            KernelSpec::RaisedCosine(0.05),
            KernelSpec::Dirac,
        ];
        for kernel in kernels {
            let energy = free_decay_energy(kernel);
            let window = 400;
            let envelope: Vec<f64> = energy
                .chunks(window)
                .map(|c| c.iter().copied().fold(0.0, f64::max))
                .collect();
            assert!(envelope.len() >= 10);
            for pair in envelope.windows(2) {
                assert!(
                    pair[1] <= pair[0] * (1.0 + 1e-9),
                    "{kernel:?}: envelope grew from {} to {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }
}
