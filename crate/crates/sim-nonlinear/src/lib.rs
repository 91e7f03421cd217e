//! Nonlinear synthetic-response generators: a mass in free fall over a
//! hereditarily damped base (contact nonlinearity solved per step by
//! fixed-point iteration) and a 6-story shear building whose first story
//! follows one of three Bouc-Wen hysteresis variants, integrated by
//! fourth-order Runge-Kutta under ground excitation. A band-limited
//! synthetic ground-motion generator stands in for recorded accelerograms.

mod boucwen;
mod freefall;
mod ground;

pub use boucwen::{
    boucwen_rdot, dissipation_rate, simulate_shear_boucwen, AccelFrame, BoucWenVariant,
    HysteresisKind, ShearBuilding, ShearResponse,
};
pub use freefall::{simulate_freefall, ContactRule, FreeFallResponse, FreeFallSystem};
pub use ground::synth_ground_motion;

/// Errors from the nonlinear simulators.
#[derive(Debug, thiserror::Error)]
pub enum NonlinearError {
    #[error("invalid system: {0}")]
    BadSystem(String),

    #[error("kernel: {0}")]
    Kernel(#[from] sim_gendamp::KernelError),

    #[error("scheme: {0}")]
    Scheme(sim_gendamp::SimError),

    #[error("degradation function non-positive (eta = {eta})")]
    DegradationNonPositive { eta: f64 },

    #[error("pinching denominator non-positive ({denom})")]
    PinchingDenomNonPositive { denom: f64 },

    #[error("fixed-point iteration did not converge at step {step}")]
    FixedPointDiverged { step: usize },

    #[error("integration diverged at step {step}")]
    Diverged { step: usize },

    #[error("at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<NonlinearError>,
    },

    #[error(transparent)]
    Signal(#[from] signal_core::SignalError),
}

impl NonlinearError {
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            NonlinearError::AtStep { .. } => self,
            other => NonlinearError::AtStep {
                step,
                source: Box::new(other),
            },
        }
    }
}

impl From<sim_gendamp::SimError> for NonlinearError {
    fn from(e: sim_gendamp::SimError) -> Self {
        match e {
            sim_gendamp::SimError::Kernel(k) => NonlinearError::Kernel(k),
            sim_gendamp::SimError::Signal(s) => NonlinearError::Signal(s),
            other => NonlinearError::Scheme(other),
        }
    }
}
