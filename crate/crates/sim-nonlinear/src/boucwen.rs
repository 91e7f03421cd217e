use serde::{Deserialize, Serialize};
use signal_core::{Channel, TimeSeries};
use sim_gendamp::step_count;

use crate::NonlinearError;

/// Hysteresis law governing story 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HysteresisKind {
    /// Plain Wen evolution, no degradation.
    Standard,
    /// Strength degradation: the evolution is divided by
    /// `eta = 1 + delta_eta * eps1` with `eps1` the dissipated-energy proxy.
    Degrading,
    /// Slip-lock pinching in series with the hysteretic element; the slip
    /// length grows as `s = delta_sigma * eps1`.
    Pinching,
}

/// Bouc-Wen variant with its shape and degradation/pinching parameters.
///
/// The evolution equations, with `b = A xd - (beta |xd| |r|^(n-1) r
/// + gamma xd |r|^n)` the Wen rate and `q = A - (beta sgn(xd) |r|^(n-1) r
/// + gamma |r|^n)` the corresponding hysteretic slope (`b = xd q`):
///
///   standard:  rd = b
///   degrading: rd = b / (1 + delta_eta * eps1)
///   pinching:  rd = b / (1 + sqrt(2/pi) (s/sigma) exp(-r^2/(2 sigma^2)) q),
///              s = delta_sigma * eps1
///
/// The pinching denominator is the series combination of the hysteretic
/// element with a Gaussian slip-lock element whose slip length grows with
/// dissipated energy; it reduces to the standard law when delta_sigma = 0.
/// In all variants `eps1` evolves as `epsd = r xd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoucWenVariant {
    pub kind: HysteresisKind,
    pub a: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n: f64,
    pub delta_eta: f64,
    pub sigma: f64,
    pub delta_sigma: f64,
}

impl BoucWenVariant {
    fn shape(kind: HysteresisKind) -> Self {
        BoucWenVariant {
            kind,
            a: 1.0,
            beta: 2.0,
            gamma: 1.0,
            n: 2.0,
            delta_eta: 0.4,
            sigma: 0.1,
            delta_sigma: 0.4,
        }
    }

    /// Model class A: plain Wen with A = 1, beta = 2, gamma = 1, n = 2.
    pub fn standard() -> Self {
        BoucWenVariant::shape(HysteresisKind::Standard)
    }

    /// Model class B: degradation with delta_eta = 0.4.
    pub fn degrading() -> Self {
        BoucWenVariant::shape(HysteresisKind::Degrading)
    }

    /// Model class C: pinching with sigma = 0.1, delta_sigma = 0.4.
    pub fn pinching() -> Self {
        BoucWenVariant::shape(HysteresisKind::Pinching)
    }

    pub fn validate(&self) -> Result<(), NonlinearError> {
        if self.n < 1.0 {
            return Err(NonlinearError::BadSystem(format!(
                "hysteresis exponent n must be >= 1, got {}",
                self.n
            )));
        }
        if self.kind == HysteresisKind::Pinching && !(self.sigma > 0.0) {
            return Err(NonlinearError::BadSystem(format!(
                "pinching requires sigma > 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Ultimate hysteretic displacement of the standard law,
    /// `(A / (beta + gamma))^(1/n)`.
    pub fn ultimate(&self) -> f64 {
        (self.a / (self.beta + self.gamma)).powf(1.0 / self.n)
    }
}

/// Evolution rate of the hysteretic displacement `r1`.
pub fn boucwen_rdot(
    variant: &BoucWenVariant,
    xdot1: f64,
    r1: f64,
    eps1: f64,
) -> Result<f64, NonlinearError> {
    if !(xdot1.is_finite() && r1.is_finite() && eps1.is_finite()) {
        return Err(NonlinearError::BadSystem(
            "non-finite hysteresis state".into(),
        ));
    }
    let pow_sign = r1.abs().powf(variant.n - 1.0) * r1;
    let pow_abs = r1.abs().powf(variant.n);
    let wen_rate =
        variant.a * xdot1 - (variant.beta * xdot1.abs() * pow_sign + variant.gamma * xdot1 * pow_abs);
    match variant.kind {
        HysteresisKind::Standard => Ok(wen_rate),
        HysteresisKind::Degrading => {
            let eta = 1.0 + variant.delta_eta * eps1;
            if eta <= 0.0 {
                return Err(NonlinearError::DegradationNonPositive { eta });
            }
            Ok(wen_rate / eta)
        }
        HysteresisKind::Pinching => {
            let slope =
                variant.a - (variant.beta * xdot1.signum() * pow_sign + variant.gamma * pow_abs);
            let slip = variant.delta_sigma * eps1;
            let gauss = (2.0 / std::f64::consts::PI).sqrt() / variant.sigma
                * (-r1 * r1 / (2.0 * variant.sigma * variant.sigma)).exp();
            let denom = 1.0 + slip * gauss * slope;
            if denom <= 0.0 {
                return Err(NonlinearError::PinchingDenomNonPositive { denom });
            }
            Ok(wen_rate / denom)
        }
    }
}

/// Dissipated-energy proxy rate co-integrated with `r1`.
pub fn dissipation_rate(r1: f64, xdot1: f64) -> f64 {
    r1 * xdot1
}

/// Shear-type building: lumped story masses in a chain, linear interstory
/// springs and dampers, with story 1's restoring force replaced by the
/// hysteretic `k_1 * r1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShearBuilding {
    pub mass: Vec<f64>,
    pub stiffness: Vec<f64>,
    pub damping: Vec<f64>,
    pub variant: BoucWenVariant,
}

impl ShearBuilding {
    /// Uniform six-story benchmark: m = 1, k = 9, c = 0.25 per story.
    pub fn benchmark(variant: BoucWenVariant) -> Self {
        ShearBuilding::uniform(6, 1.0, 9.0, 0.25, variant)
    }

    pub fn uniform(stories: usize, m: f64, k: f64, c: f64, variant: BoucWenVariant) -> Self {
        ShearBuilding {
            mass: vec![m; stories],
            stiffness: vec![k; stories],
            damping: vec![c; stories],
            variant,
        }
    }

    /// The three hysteretic model classes on the benchmark building.
    pub fn model_classes() -> [ShearBuilding; 3] {
        [
            ShearBuilding::benchmark(BoucWenVariant::standard()),
            ShearBuilding::benchmark(BoucWenVariant::degrading()),
            ShearBuilding::benchmark(BoucWenVariant::pinching()),
        ]
    }

    pub fn stories(&self) -> usize {
        self.mass.len()
    }

    fn validate(&self) -> Result<(), NonlinearError> {
        let s = self.stories();
        if s == 0 || self.stiffness.len() != s || self.damping.len() != s {
            return Err(NonlinearError::BadSystem(
                "story property lists must be equal length and non-empty".into(),
            ));
        }
        if self
            .mass
            .iter()
            .chain(&self.stiffness)
            .any(|&v| !(v > 0.0 && v.is_finite()))
        {
            return Err(NonlinearError::BadSystem(
                "story masses and stiffnesses must be positive".into(),
            ));
        }
        self.variant.validate()
    }
}

/// Which acceleration the output channels report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccelFrame {
    /// Relative to the ground (the integration variable).
    Relative,
    /// Total = relative + ground acceleration.
    Total,
}

/// Shear-building response plus the story-1 hysteretic trajectories.
#[derive(Debug, Clone)]
pub struct ShearResponse {
    /// Channels `x1..xs` (m), `v1..vs` (m/s), `a1..as` (m/s^2).
    pub series: TimeSeries,
    pub r1: Vec<f64>,
    pub eps1: Vec<f64>,
}

struct GroundInterp<'a> {
    samples: &'a [f64],
    dt: f64,
}

impl GroundInterp<'_> {
    fn at(&self, t: f64) -> f64 {
        let pos = t / self.dt;
        if pos <= 0.0 {
            return self.samples[0];
        }
        let j = pos.floor() as usize;
        if j + 1 >= self.samples.len() {
            return *self.samples.last().unwrap();
        }
        let frac = pos - j as f64;
        self.samples[j] * (1.0 - frac) + self.samples[j + 1] * frac
    }
}

/// Classical fourth-order Runge-Kutta integration of the building under a
/// ground acceleration record (linearly interpolated between samples).
/// Zero initial state.
pub fn simulate_shear_boucwen(
    building: &ShearBuilding,
    ground_accel: &TimeSeries,
    dt: f64,
    frame: AccelFrame,
) -> Result<ShearResponse, NonlinearError> {
    building.validate()?;
    let ag_samples = ground_accel.require_single()?;
    let duration = ground_accel.duration();
    let steps = step_count(dt, duration)?;
    let ground = GroundInterp {
        samples: ag_samples,
        dt: ground_accel.dt(),
    };

    let s = building.stories();
    let dim = 2 * s + 2; // [x_1..x_s, v_1..v_s, r1, eps1]
    let mut state = vec![0.0; dim];

    let deriv = |t: f64, y: &[f64], out: &mut [f64]| -> Result<(), NonlinearError> {
        let (x, rest) = y.split_at(s);
        let (v, tail) = rest.split_at(s);
        let (r1, eps1) = (tail[0], tail[1]);
        let ag = ground.at(t);
        for i in 0..s {
            // force transmitted by story i (below floor i) and story i+1
            let below_drift = if i == 0 { x[0] } else { x[i] - x[i - 1] };
            let below_dvel = if i == 0 { v[0] } else { v[i] - v[i - 1] };
            let below = if i == 0 {
                building.stiffness[0] * r1 + building.damping[0] * below_dvel
            } else {
                building.stiffness[i] * below_drift + building.damping[i] * below_dvel
            };
            let above = if i + 1 < s {
                building.stiffness[i + 1] * (x[i + 1] - x[i])
                    + building.damping[i + 1] * (v[i + 1] - v[i])
            } else {
                0.0
            };
            out[i] = v[i];
            out[s + i] = -ag + (above - below) / building.mass[i];
        }
        out[2 * s] = boucwen_rdot(&building.variant, v[0], r1, eps1)?;
        out[2 * s + 1] = dissipation_rate(r1, v[0]);
        Ok(())
    };

    let mut disp = vec![Vec::with_capacity(steps + 1); s];
    let mut vel = vec![Vec::with_capacity(steps + 1); s];
    let mut acc = vec![Vec::with_capacity(steps + 1); s];
    let mut r1_out = Vec::with_capacity(steps + 1);
    let mut eps_out = Vec::with_capacity(steps + 1);

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];

    let mut record = |state: &[f64], deriv_now: &[f64], t: f64| {
        let ag = if frame == AccelFrame::Total {
            ground.at(t)
        } else {
            0.0
        };
        for i in 0..s {
            disp[i].push(state[i]);
            vel[i].push(state[s + i]);
            acc[i].push(deriv_now[s + i] + ag);
        }
        r1_out.push(state[2 * s]);
        eps_out.push(state[2 * s + 1]);
    };

    deriv(0.0, &state, &mut k1)?;
    record(&state, &k1, 0.0);

    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        deriv(t, &state, &mut k1).map_err(|e| e.at_step(step))?;
        for i in 0..dim {
            stage[i] = state[i] + 0.5 * dt * k1[i];
        }
        deriv(t + 0.5 * dt, &stage, &mut k2).map_err(|e| e.at_step(step))?;
        for i in 0..dim {
            stage[i] = state[i] + 0.5 * dt * k2[i];
        }
        deriv(t + 0.5 * dt, &stage, &mut k3).map_err(|e| e.at_step(step))?;
        for i in 0..dim {
            stage[i] = state[i] + dt * k3[i];
        }
        deriv(t + dt, &stage, &mut k4).map_err(|e| e.at_step(step))?;
        for i in 0..dim {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(NonlinearError::Diverged { step });
        }
        let t_new = step as f64 * dt;
        deriv(t_new, &state, &mut k1).map_err(|e| e.at_step(step))?;
        record(&state, &k1, t_new);
    }

    let mut channels = Vec::with_capacity(3 * s);
    let mut data = Vec::with_capacity(3 * s);
    for (prefix, unit, cols) in [("x", "m", disp), ("v", "m/s", vel), ("a", "m/s^2", acc)] {
        for (i, col) in cols.into_iter().enumerate() {
            channels.push(Channel::new(format!("{prefix}{}", i + 1), unit));
            data.push(col);
        }
    }
    let series = TimeSeries::new(dt, 0.0, channels, data)?;
    Ok(ShearResponse {
        series,
        r1: r1_out,
        eps1: eps_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rdot_reduces_to_velocity_without_nonlinear_terms() {
        let mut v = BoucWenVariant::standard();
        v.beta = 0.0;
        v.gamma = 0.0;
        for xd in [-2.0, 0.3, 5.0] {
            for r in [-0.4, 0.0, 0.9] {
                assert_eq!(boucwen_rdot(&v, xd, r, 0.0).unwrap(), xd);
            }
        }
    }

    #[test]
    fn rdot_at_zero_hysteresis_equals_a_xdot() {
        let v = BoucWenVariant::standard();
        assert_eq!(boucwen_rdot(&v, 1.0, 0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn degrading_with_zero_rate_matches_standard() {
        let a = BoucWenVariant::standard();
        let mut b = BoucWenVariant::degrading();
        b.delta_eta = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let xd = rng.gen_range(-3.0..3.0);
            let r = rng.gen_range(-0.57..0.57);
            let eps = rng.gen_range(0.0..10.0);
            let ra = boucwen_rdot(&a, xd, r, eps).unwrap();
            let rb = boucwen_rdot(&b, xd, r, eps).unwrap();
            assert!((ra - rb).abs() <= 1e-14);
        }
    }

    #[test]
    fn pinching_with_zero_slip_matches_standard() {
        let a = BoucWenVariant::standard();
        let mut c = BoucWenVariant::pinching();
        c.delta_sigma = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let xd = rng.gen_range(-3.0..3.0);
            let r = rng.gen_range(-0.57..0.57);
            let eps = rng.gen_range(0.0..10.0);
            let ra = boucwen_rdot(&a, xd, r, eps).unwrap();
            let rc = boucwen_rdot(&c, xd, r, eps).unwrap();
            assert!((ra - rc).abs() <= 1e-14);
        }
    }

    #[test]
    fn degradation_slows_evolution() {
        let a = BoucWenVariant::standard();
        let b = BoucWenVariant::degrading();
        let rd_a = boucwen_rdot(&a, 1.0, 0.2, 5.0).unwrap();
        let rd_b = boucwen_rdot(&b, 1.0, 0.2, 5.0).unwrap();
        assert!(rd_b.abs() < rd_a.abs());
        assert_eq!(rd_b, rd_a / 3.0); // eta = 1 + 0.4 * 5
    }

    #[test]
    fn non_positive_degradation_is_an_error() {
        let b = BoucWenVariant::degrading();
        assert!(matches!(
            boucwen_rdot(&b, 1.0, 0.1, -3.0),
            Err(NonlinearError::DegradationNonPositive { .. })
        ));
    }

    #[test]
    fn ultimate_value() {
        let v = BoucWenVariant::standard();
        assert!((v.ultimate() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_ground_zero_response() {
        let building = ShearBuilding::benchmark(BoucWenVariant::standard());
        let ground = TimeSeries::single(0.02, "ag", "m/s^2", vec![0.0; 101]).unwrap();
        let out = simulate_shear_boucwen(&building, &ground, 0.02, AccelFrame::Relative).unwrap();
        for c in 0..out.series.num_channels() {
            assert!(out.series.channel_data(c).iter().all(|&v| v == 0.0));
        }
        assert!(out.r1.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pinching_requires_positive_sigma() {
        let mut v = BoucWenVariant::pinching();
        v.sigma = 0.0;
        let building = ShearBuilding::benchmark(v);
        let ground = TimeSeries::single(0.02, "ag", "m/s^2", vec![0.0; 11]).unwrap();
        assert!(simulate_shear_boucwen(&building, &ground, 0.02, AccelFrame::Relative).is_err());
    }
}
