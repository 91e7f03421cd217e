use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use signal_core::{Channel, TimeSeries};
use sim_gendamp::scheme::{ConvolutionHistory, ConvolutionPath, SchemeMatrices};
use sim_gendamp::{step_count, white_noise_force, KernelSpec};

use crate::NonlinearError;

/// When the base material is engaged. The stiffness and damping act only
/// while the body touches the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "level", rename_all = "snake_case")]
pub enum ContactRule {
    /// In contact when displacement is at or below this level.
    Below(f64),
    /// Contact forced on (degenerates to a linear oscillator).
    Always,
    /// Contact forced off (pure ballistic motion).
    Never,
}

impl ContactRule {
    fn indicator(&self, x: f64) -> bool {
        match *self {
            ContactRule::Below(level) => x <= level,
            ContactRule::Always => true,
            ContactRule::Never => false,
        }
    }
}

/// Mass in free fall over a hereditarily damped base: while in contact the
/// base exerts `c xd + c w + k x` with `w` the kernel convolution of the
/// velocity history; gravity (plus optional white-noise excitation) drives
/// the fall.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeFallSystem {
    pub mass: f64,
    pub damper: f64,
    pub stiffness: f64,
    pub kernel: KernelSpec,
    pub gravity: f64,
    pub force_variance: f64,
    pub contact: ContactRule,
}

impl FreeFallSystem {
    /// Benchmark values: m = 1 kg, c = 3 N s/m, k = 1000 N/m, g = 9.81,
    /// white-noise force variance 9, contact at x <= 0.
    pub fn benchmark(kernel: KernelSpec) -> Self {
        FreeFallSystem {
            mass: 1.0,
            damper: 3.0,
            stiffness: 1000.0,
            kernel,
            gravity: 9.81,
            force_variance: 9.0,
            contact: ContactRule::Below(0.0),
        }
    }

    /// The two free-fall model classes: exponential(100) and gaussian(100).
    pub fn model_classes() -> [FreeFallSystem; 2] {
        [
            FreeFallSystem::benchmark(KernelSpec::Exponential(100.0)),
            FreeFallSystem::benchmark(KernelSpec::Gaussian(100.0)),
        ]
    }

    fn validate(&self) -> Result<(), NonlinearError> {
        if !(self.mass > 0.0 && self.stiffness > 0.0 && self.damper >= 0.0) {
            return Err(NonlinearError::BadSystem(format!(
                "need m > 0, k > 0, c >= 0; got m = {}, k = {}, c = {}",
                self.mass, self.stiffness, self.damper
            )));
        }
        self.kernel.validate()?;
        Ok(())
    }
}

/// Free-fall trajectory plus the per-step contact indicator.
#[derive(Debug, Clone)]
pub struct FreeFallResponse {
    /// Channels `x` (m), `v` (m/s), `a` (m/s^2).
    pub series: TimeSeries,
    pub contact: Vec<bool>,
}

const PICARD_TOL: f64 = 1e-10;
const PICARD_MAX_ITER: usize = 50;

/// Steps the coupled pair {stack update, contact force} forward. Each step
/// solves `f_n = H(x) (c xd + c w + k x)` by fixed-point iteration on `f_n`
/// starting from the previous step's value. If the contact switch makes the
/// iteration alternate between branches, the indicator is frozen at the
/// previous step's contact state for that step, which makes the map affine
/// and contractive.
pub fn simulate_freefall(
    system: &FreeFallSystem,
    dt: f64,
    duration: f64,
    seed: u64,
    x0: f64,
    v0: f64,
) -> Result<FreeFallResponse, NonlinearError> {
    system.validate()?;
    let steps = step_count(dt, duration)?;
    let noise = white_noise_force(1, system.force_variance, dt, duration, seed)?;
    let applied: Vec<f64> = noise
        .channel_data(0)
        .iter()
        .map(|w| -system.mass * system.gravity + w)
        .collect();

    let dirac = system.kernel.is_dirac();
    let mut history = if dirac {
        None
    } else {
        Some(ConvolutionHistory::new(system.kernel, dt, steps, 1)?)
    };
    let path = match &history {
        Some(h) => ConvolutionPath::Hereditary {
            current_weight: h.current_weight(),
        },
        None => ConvolutionPath::Dirac,
    };
    let mass_mat = DMatrix::from_element(1, 1, system.mass);
    let zero = DMatrix::zeros(1, 1);
    // the contact force enters through the input, so the stack matrices
    // carry no damping or stiffness blocks
    let matrices = SchemeMatrices::assemble(&mass_mat, &zero, &zero, dt, path)
        .map_err(NonlinearError::Scheme)?;

    let contact_force = |contact: bool, x: f64, xd: f64, w: f64| -> f64 {
        if contact {
            system.damper * xd + system.damper * w + system.stiffness * x
        } else {
            0.0
        }
    };

    let w0 = if dirac { v0 } else { 0.0 };
    let mut in_contact = system.contact.indicator(x0);
    let mut f_n = contact_force(in_contact, x0, v0, w0);
    let a0 = (applied[0] - f_n) / system.mass;

    let mut z = DVector::from_vec(vec![a0, v0, w0, x0]);
    let mut x_out = Vec::with_capacity(steps + 1);
    let mut v_out = Vec::with_capacity(steps + 1);
    let mut a_out = Vec::with_capacity(steps + 1);
    let mut contact_out = Vec::with_capacity(steps + 1);
    x_out.push(x0);
    v_out.push(v0);
    a_out.push(a0);
    contact_out.push(in_contact);
    if let Some(h) = history.as_mut() {
        h.push_velocity(std::iter::once(v0));
    }

    let mut u = DVector::<f64>::zeros(4);
    for k in 1..=steps {
        let f_w = history.as_ref().map_or(0.0, |h| h.history_load(k)[0]);
        u[3] = f_w;

        let mut frozen_contact: Option<bool> = None;
        let mut accepted: Option<(DVector<f64>, bool)> = None;
        'attempts: for attempt in 0..2 {
            if attempt == 1 {
                frozen_contact = Some(in_contact);
            }
            let mut guess = f_n;
            for _ in 0..PICARD_MAX_ITER {
                u[0] = applied[k] - guess;
                let trial = matrices.step(&z, &u);
                let (xd, w, x) = (trial[1], trial[2], trial[3]);
                let contact = frozen_contact.unwrap_or_else(|| system.contact.indicator(x));
                let next = contact_force(contact, x, xd, w);
                if (next - guess).abs() <= PICARD_TOL {
                    f_n = next;
                    accepted = Some((trial, contact));
                    break 'attempts;
                }
                guess = next;
            }
        }
        let (next_z, contact) = accepted.ok_or(NonlinearError::FixedPointDiverged { step: k })?;
        z = next_z;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(NonlinearError::Diverged { step: k });
        }
        in_contact = contact;
        x_out.push(z[3]);
        v_out.push(z[1]);
        a_out.push(z[0]);
        contact_out.push(in_contact);
        if let Some(h) = history.as_mut() {
            h.push_velocity(std::iter::once(z[1]));
        }
    }

    let series = TimeSeries::new(
        dt,
        0.0,
        vec![
            Channel::new("x", "m"),
            Channel::new("v", "m/s"),
            Channel::new("a", "m/s^2"),
        ],
        vec![x_out, v_out, a_out],
    )?;
    Ok(FreeFallResponse {
        series,
        contact: contact_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ballistic_closed_form_without_contact() {
        let mut sys = FreeFallSystem::benchmark(KernelSpec::Exponential(100.0));
        sys.contact = ContactRule::Never;
        sys.force_variance = 0.0;
        let out = simulate_freefall(&sys, 0.01, 1.0, 0, 0.1, 0.0).unwrap();
        for (k, t) in out.series.times().enumerate() {
            let expected = 0.1 - 0.5 * 9.81 * t * t;
            assert!(
                (out.series.channel_data(0)[k] - expected).abs() <= 1e-6,
                "t = {t}"
            );
        }
        assert!(out.contact.iter().all(|&c| !c));
    }

    #[test]
    fn benchmark_bounces_and_stays_finite() {
        let sys = FreeFallSystem::benchmark(KernelSpec::Exponential(100.0));
        let out = simulate_freefall(&sys, 0.01, 100.0, 42, 0.1, 0.0).unwrap();
        assert_eq!(out.series.len(), 10_001);
        // contact state must toggle at least once (the body bounces)
        let toggles = out.contact.windows(2).filter(|w| w[0] != w[1]).count();
        assert!(toggles >= 2, "only {toggles} contact transitions");
    }

    #[test]
    fn trajectory_is_continuous() {
        let sys = FreeFallSystem::benchmark(KernelSpec::Gaussian(100.0));
        let out = simulate_freefall(&sys, 0.01, 20.0, 7, 0.1, 0.0).unwrap();
        let x = out.series.channel_data(0);
        let v = out.series.channel_data(1);
        let a = out.series.channel_data(2);
        let dt = 0.01;
        for k in 1..x.len() {
            let bound = v[k].abs().max(v[k - 1].abs()) * dt
                + 0.5 * a[k].abs().max(a[k - 1].abs()) * dt * dt
                + 1e-6;
            assert!(
                (x[k] - x[k - 1]).abs() <= bound,
                "jump at step {k}: {} > {bound}",
                (x[k] - x[k - 1]).abs()
            );
        }
    }

    #[test]
    fn same_seed_identical_trajectory() {
        let sys = FreeFallSystem::benchmark(KernelSpec::Exponential(100.0));
        let a = simulate_freefall(&sys, 0.01, 5.0, 9, 0.1, 0.0).unwrap();
        let b = simulate_freefall(&sys, 0.01, 5.0, 9, 0.1, 0.0).unwrap();
        assert_eq!(a.series, b.series);
    }
}
