//! Kinematic Kalman filter: acceleration drives the process model of a
//! 2-state (displacement, velocity) constant-acceleration kinematics chain,
//! displacement measurements correct it. No structural model is involved, so
//! the filter applies to response-only records of unknown systems.

use nalgebra::{Matrix2, RowVector2, Vector2};
use serde::{Deserialize, Serialize};
use signal_core::{Channel, TimeSeries};

/// Errors from filter configuration and signal alignment.
#[derive(Debug, thiserror::Error)]
pub enum FusionError {
    #[error("invalid config: {0}")]
    BadConfig(String),

    #[error("non-positive innovation variance {0}")]
    BadInnovationVariance(f64),

    #[error("non-finite input at step {0}")]
    NonFinite(usize),

    #[error(
        "displacement series misaligned: acceleration has {accel_len} samples at dt {dt}, \
         displacement has {disp_len} at decimation {decimation} (expected {expected})"
    )]
    Misaligned {
        accel_len: usize,
        disp_len: usize,
        dt: f64,
        decimation: usize,
        expected: usize,
    },

    #[error(transparent)]
    Signal(#[from] signal_core::SignalError),
}

/// Filter state: estimate `x = [displacement, velocity]`, covariance `P`,
/// and the step index.
#[derive(Debug, Clone, PartialEq)]
pub struct KfState {
    pub x: Vector2<f64>,
    pub p: Matrix2<f64>,
    pub k: usize,
}

impl KfState {
    pub fn new(x0: Vector2<f64>, p0: Matrix2<f64>) -> Self {
        KfState { x: x0, p: p0, k: 0 }
    }
}

/// Discrete kinematic model and noise covariances.
///
/// `A_d = [[1, dt], [0, 1]]`, `B_d = [dt^2/2, dt]`, `H = [1, 0]`; the process
/// covariance defaults to `1e-9 I` and the scalar displacement measurement
/// variance to `1e-3`. A decimation factor of d means a displacement sample
/// exists every d-th acceleration step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KfConfig {
    pub dt: f64,
    pub q_scale: f64,
    pub r: f64,
    pub disp_decimation: usize,
}

impl KfConfig {
    pub fn new(dt: f64) -> Self {
        KfConfig {
            dt,
            q_scale: 1e-9,
            r: 1e-3,
            disp_decimation: 1,
        }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(FusionError::BadConfig(format!("dt = {}", self.dt)));
        }
        if !(self.q_scale.is_finite() && self.q_scale >= 0.0) {
            return Err(FusionError::BadConfig(format!(
                "q_scale = {}",
                self.q_scale
            )));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(FusionError::BadConfig(format!("r = {}", self.r)));
        }
        if self.disp_decimation == 0 {
            return Err(FusionError::BadConfig("disp_decimation = 0".into()));
        }
        Ok(())
    }

    pub fn transition(&self) -> Matrix2<f64> {
        Matrix2::new(1.0, self.dt, 0.0, 1.0)
    }

    pub fn input(&self) -> Vector2<f64> {
        Vector2::new(self.dt * self.dt / 2.0, self.dt)
    }

    pub fn observation(&self) -> RowVector2<f64> {
        RowVector2::new(1.0, 0.0)
    }

    pub fn process_noise(&self) -> Matrix2<f64> {
        Matrix2::identity() * self.q_scale
    }
}

/// Diagnostics of a single update step.
#[derive(Debug, Clone)]
pub struct KfStepTrace {
    pub gain: Vector2<f64>,
    pub innovation: f64,
    pub prior_x: Vector2<f64>,
    pub prior_p: Matrix2<f64>,
    pub posterior_x: Vector2<f64>,
    pub posterior_p: Matrix2<f64>,
}

/// Prediction: `x <- A_d x + B_d a`, `P <- A_d P A_d' + Q_d`.
pub fn kf_predict(state: &KfState, accel: f64, cfg: &KfConfig) -> Result<KfState, FusionError> {
    if !accel.is_finite() {
        return Err(FusionError::NonFinite(state.k));
    }
    let a = cfg.transition();
    let x = a * state.x + cfg.input() * accel;
    let p = a * state.p * a.transpose() + cfg.process_noise();
    Ok(KfState {
        x,
        p: symmetrize(&p),
        k: state.k + 1,
    })
}

/// Measurement update with the Joseph-form covariance
/// `P <- (I - J H) P (I - J H)' + J R J'`, which preserves symmetry and
/// positive semi-definiteness.
pub fn kf_update(
    state: &KfState,
    disp: f64,
    cfg: &KfConfig,
) -> Result<(KfState, KfStepTrace), FusionError> {
    if !disp.is_finite() {
        return Err(FusionError::NonFinite(state.k));
    }
    let h = cfg.observation();
    let s = cfg.r + (h * state.p * h.transpose())[(0, 0)];
    if !(s.is_finite() && s > 0.0) {
        return Err(FusionError::BadInnovationVariance(s));
    }
    let gain = state.p * h.transpose() / s;
    let innovation = disp - (h * state.x)[(0, 0)];
    let x = state.x + gain * innovation;
    let i_jh = Matrix2::identity() - gain * h;
    let p = i_jh * state.p * i_jh.transpose() + gain * cfg.r * gain.transpose();
    let p = symmetrize(&p);
    let trace = KfStepTrace {
        gain,
        innovation,
        prior_x: state.x,
        prior_p: state.p,
        posterior_x: x,
        posterior_p: p,
    };
    Ok((KfState { x, p, k: state.k }, trace))
}

fn symmetrize(p: &Matrix2<f64>) -> Matrix2<f64> {
    (p + p.transpose()) * 0.5
}

/// Default initialization: displacement from the first displacement sample,
/// zero velocity, covariance `1e-2 I`.
pub fn default_init(first_disp: f64) -> KfState {
    KfState::new(Vector2::new(first_disp, 0.0), Matrix2::identity() * 1e-2)
}

/// Runs the filter over full records: prediction with every acceleration
/// sample, update wherever a displacement sample exists (every
/// `disp_decimation`-th step). Returns the two-channel estimate history
/// (displacement, velocity), aligned with the acceleration grid.
pub fn fuse_signals(
    accel: &TimeSeries,
    disp: &TimeSeries,
    cfg: &KfConfig,
    init: KfState,
) -> Result<TimeSeries, FusionError> {
    cfg.validate()?;
    let a = accel.require_single()?;
    let d = disp.require_single()?;
    if (accel.dt() - cfg.dt).abs() > 1e-12 * cfg.dt {
        return Err(FusionError::BadConfig(format!(
            "acceleration dt {} does not match config dt {}",
            accel.dt(),
            cfg.dt
        )));
    }
    let dec = cfg.disp_decimation;
    let expected_disp_dt = cfg.dt * dec as f64;
    let n = a.len();
    // displacement samples sit at steps 0, dec, 2*dec, ...
    let expected = (n - 1) / dec + 1;
    if (disp.dt() - expected_disp_dt).abs() > 1e-12 * expected_disp_dt || d.len() < expected {
        return Err(FusionError::Misaligned {
            accel_len: n,
            disp_len: d.len(),
            dt: cfg.dt,
            decimation: dec,
            expected,
        });
    }

    let mut state = init;
    let mut disp_est = Vec::with_capacity(n);
    let mut vel_est = Vec::with_capacity(n);
    // the displacement sample at step 0 is available before any prediction
    let (updated, _) = kf_update(&state, d[0], cfg)?;
    state = updated;
    disp_est.push(state.x[0]);
    vel_est.push(state.x[1]);
    for k in 1..n {
        state = kf_predict(&state, a[k - 1], cfg)?;
        if k % dec == 0 {
            let (updated, _) = kf_update(&state, d[k / dec], cfg)?;
            state = updated;
        }
        disp_est.push(state.x[0]);
        vel_est.push(state.x[1]);
    }

    Ok(TimeSeries::new(
        accel.dt(),
        accel.t0(),
        vec![Channel::new("x", "m"), Channel::new("v", "m/s")],
        vec![disp_est, vel_est],
    )?)
}

/// Smallest eigenvalue of a symmetric 2x2 matrix (closed form).
pub fn min_eigenvalue(p: &Matrix2<f64>) -> f64 {
    let half_tr = 0.5 * (p[(0, 0)] + p[(1, 1)]);
    let det = p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)];
    half_tr - (half_tr * half_tr - det).max(0.0).sqrt()
}
