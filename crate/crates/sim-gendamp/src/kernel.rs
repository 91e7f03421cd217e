use serde::{Deserialize, Serialize};

/// Errors from kernel evaluation and quadrature.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KernelError {
    #[error("dirac kernel is not pointwise-evaluable")]
    DiracNotPointwise,

    #[error("dirac kernel has no quadrature weights")]
    DiracNoWeights,

    #[error("kernel time must be >= 0, got {0}")]
    NegativeTime(f64),

    #[error("kernel parameter must be positive and finite, got {0}")]
    BadParameter(f64),

    #[error("quadrature index {i} out of range 1..={k}")]
    IndexOutOfRange { i: usize, k: usize },
}

/// Normalized damping memory kernel `g(t)` with unit integral. The `Dirac`
/// kernel recovers classical viscous damping and is handled as a special
/// case by the integrator rather than through pointwise values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "mu", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `mu * exp(-mu t)`
    Exponential(f64),
    /// `mu^2 * t * exp(-mu t)`
    TimesTExponential(f64),
    /// `2 sqrt(mu/pi) * exp(-mu t^2)` (half-Gaussian on t >= 0)
    Gaussian(f64),
    /// `1/mu` on `0 < t < mu`, else 0
    Rectangular(f64),
    /// `(1/mu) (1 + cos(pi t / mu))` on `0 < t < mu`, else 0
    RaisedCosine(f64),
    /// `delta(t)`: no memory, reduces the hereditary model to viscous damping
    Dirac,
}

impl KernelSpec {
    pub fn is_dirac(&self) -> bool {
        matches!(self, KernelSpec::Dirac)
    }

    /// Kernel parameter, if the kind has one.
    pub fn mu(&self) -> Option<f64> {
        match *self {
            KernelSpec::Exponential(mu)
            | KernelSpec::TimesTExponential(mu)
            | KernelSpec::Gaussian(mu)
            | KernelSpec::Rectangular(mu)
            | KernelSpec::RaisedCosine(mu) => Some(mu),
            KernelSpec::Dirac => None,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        match self.mu() {
            Some(mu) if !(mu.is_finite() && mu > 0.0) => Err(KernelError::BadParameter(mu)),
            _ => Ok(()),
        }
    }

    /// Pointwise value `g(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<f64, KernelError> {
        self.validate()?;
        if t < 0.0 || !t.is_finite() {
            return Err(KernelError::NegativeTime(t));
        }
        match *self {
            KernelSpec::Exponential(mu) => Ok(mu * (-mu * t).exp()),
            KernelSpec::TimesTExponential(mu) => Ok(mu * mu * t * (-mu * t).exp()),
            KernelSpec::Gaussian(mu) => Ok(2.0 * (mu / std::f64::consts::PI).sqrt() * (-mu * t * t).exp()),
            KernelSpec::Rectangular(mu) => Ok(if t < mu { 1.0 / mu } else { 0.0 }),
            KernelSpec::RaisedCosine(mu) => Ok(if t < mu {
                (1.0 + (std::f64::consts::PI * t / mu).cos()) / mu
            } else {
                0.0
            }),
            KernelSpec::Dirac => Err(KernelError::DiracNotPointwise),
        }
    }

    /// Cumulative integral `int_0^t g(s) ds` in closed form. Tends to 1 as
    /// `t -> inf` for every kind (unit energy-dissipation normalization).
    pub fn cumulative(&self, t: f64) -> Result<f64, KernelError> {
        self.validate()?;
        if t < 0.0 || !t.is_finite() {
            return Err(KernelError::NegativeTime(t));
        }
        match *self {
            KernelSpec::Exponential(mu) => Ok(1.0 - (-mu * t).exp()),
            KernelSpec::TimesTExponential(mu) => Ok(1.0 - (-mu * t).exp() * (1.0 + mu * t)),
            KernelSpec::Gaussian(mu) => Ok(libm::erf(mu.sqrt() * t)),
            KernelSpec::Rectangular(mu) => Ok((t / mu).min(1.0)),
            KernelSpec::RaisedCosine(mu) => Ok(if t < mu {
                t / mu + (std::f64::consts::PI * t / mu).sin() / std::f64::consts::PI
            } else {
                1.0
            }),
            KernelSpec::Dirac => Err(KernelError::DiracNoWeights),
        }
    }

    /// Quadrature weight `W_i = int_{(i-1)dt}^{i dt} g(k dt - tau) dtau` of
    /// the stepping scheme. By substitution this equals
    /// `cumulative((k-i+1) dt) - cumulative((k-i) dt)`, so it depends on k
    /// and i only through the lag `k - i`.
    pub fn weight(&self, i: usize, k: usize, dt: f64) -> Result<f64, KernelError> {
        if self.is_dirac() {
            return Err(KernelError::DiracNoWeights);
        }
        if i < 1 || i > k {
            return Err(KernelError::IndexOutOfRange { i, k });
        }
        let lag = (k - i) as f64;
        Ok(self.cumulative((lag + 1.0) * dt)? - self.cumulative(lag * dt)?)
    }

    /// All distinct weights `V_j = W_{i = k - j}` for lags `j = 0..count`,
    /// precomputed for a fixed step size.
    pub fn lag_weights(&self, dt: f64, count: usize) -> Result<Vec<f64>, KernelError> {
        let mut prev = self.cumulative(0.0)?;
        let mut out = Vec::with_capacity(count);
        for j in 1..=count {
            let next = self.cumulative(j as f64 * dt)?;
            out.push(next - prev);
            prev = next;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_at_zero_is_mu() {
        let k = KernelSpec::Exponential(1.5);
        assert_eq!(k.eval(0.0).unwrap(), 1.5);
    }

    #[test]
    fn rectangular_outside_support_is_zero() {
        let k = KernelSpec::Rectangular(2.0);
        assert_eq!(k.eval(3.0).unwrap(), 0.0);
        assert_eq!(k.eval(1.0).unwrap(), 0.5);
    }

    #[test]
    fn gaussian_at_zero() {
        let k = KernelSpec::Gaussian(1.5);
        let expected = 2.0 * (1.5f64 / std::f64::consts::PI).sqrt();
        assert!((k.eval(0.0).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 1.38198).abs() < 1e-5);
    }

    #[test]
    fn dirac_is_not_pointwise() {
        assert_eq!(
            KernelSpec::Dirac.eval(0.0).unwrap_err(),
            KernelError::DiracNotPointwise
        );
    }

    #[test]
    fn negative_time_rejected() {
        assert!(KernelSpec::Exponential(1.0).eval(-0.1).is_err());
    }

    #[test]
    fn bad_parameter_rejected() {
        for mu in [0.0, -1.0, f64::NAN] {
            assert!(KernelSpec::Gaussian(mu).eval(0.5).is_err());
        }
    }

    #[test]
    fn all_kernels_normalize_to_one() {
        let kernels = [
            KernelSpec::Exponential(1.5),
            KernelSpec::TimesTExponential(2.0),
            KernelSpec::Gaussian(1.5),
            KernelSpec::Rectangular(0.4),
            KernelSpec::RaisedCosine(0.7),
        ];
        for k in kernels {
            assert!((k.cumulative(1e4).unwrap() - 1.0).abs() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn current_step_weight_for_exponential() {
        // closed form: int_0^dt mu e^{-mu s} ds = 1 - e^{-mu dt}
        let k = KernelSpec::Exponential(1.5);
        let w = k.weight(10, 10, 0.01).unwrap();
        assert!((w - (1.0 - (-0.015f64).exp())).abs() < 1e-15);
        assert!((w - 0.014888).abs() < 1e-6);
    }

    #[test]
    fn exponential_weights_telescope_to_cdf() {
        let k = KernelSpec::Exponential(1.5);
        let dt = 0.01;
        for steps in [1usize, 7, 400] {
            let sum: f64 = (1..=steps).map(|i| k.weight(i, steps, dt).unwrap()).sum();
            let expected = 1.0 - (-1.5 * steps as f64 * dt).exp();
            assert!((sum - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn rectangular_weight_inside_support() {
        // k dt - tau spans [0, dt] for i = k; inside the support the kernel
        // is flat at 1/mu, so W = dt/mu.
        let k = KernelSpec::Rectangular(0.05);
        let w = k.weight(10, 10, 0.01).unwrap();
        assert!((w - 0.2).abs() < 1e-14);
    }

    #[test]
    fn weight_index_bounds() {
        let k = KernelSpec::Exponential(1.0);
        assert!(k.weight(0, 5, 0.01).is_err());
        assert!(k.weight(6, 5, 0.01).is_err());
        assert!(KernelSpec::Dirac.weight(1, 1, 0.01).is_err());
    }

    #[test]
    fn lag_weights_match_weight() {
        let k = KernelSpec::RaisedCosine(0.3);
        let dt = 0.02;
        let v = k.lag_weights(dt, 40).unwrap();
        for i in 1..=40 {
            let w = k.weight(i, 40, dt).unwrap();
            assert!((v[40 - i] - w).abs() < 1e-15);
        }
    }

    #[test]
    fn serde_shape() {
        let k = KernelSpec::Exponential(1.5);
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, r#"{"kind":"exponential","mu":1.5}"#);
        let d = KernelSpec::Dirac;
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"{"kind":"dirac"}"#);
        let back: KernelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, k);
    }
}
