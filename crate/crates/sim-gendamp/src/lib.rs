//! Synthetic response generation for n-DOF linear systems whose damping is a
//! convolution of a memory kernel with the velocity history. The stepping
//! scheme advances a stacked state `[xdd, xd, w, x]` with per-interval kernel
//! quadrature weights; the Dirac kernel degenerates to classical viscous
//! damping and is integrated by the same machinery.

mod force;
mod integrator;
mod kernel;
pub mod scheme;
mod system;

pub use force::{step_count, white_noise_force};
pub use integrator::{mechanical_energy, simulate_gendamp};
pub use kernel::{KernelError, KernelSpec};
pub use system::{benchmark_two_dof, linear_model_classes, GenDampedSystem};

/// Simulation and system-definition errors.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid system: {0}")]
    BadSystem(String),

    #[error("kernel: {0}")]
    Kernel(#[from] KernelError),

    #[error("duration {duration} is not a positive integer multiple of dt {dt}")]
    BadStepCount { dt: f64, duration: f64 },

    #[error("force has {got} channels, system has {want} DOFs")]
    ForceShape { got: usize, want: usize },

    #[error("force dt {force_dt} does not match integration dt {dt}")]
    DtMismatch { force_dt: f64, dt: f64 },

    #[error("force too short: {got} samples, need {need}")]
    ForceTooShort { got: usize, need: usize },

    #[error("integration matrix singular at step {step}")]
    SingularMatrix { step: usize },

    #[error("integration diverged at step {step}")]
    Diverged { step: usize },

    #[error(transparent)]
    Signal(#[from] signal_core::SignalError),
}
