//! Stepping machinery for the hereditary-damping equation of motion.
//!
//! One step advances the stacked state `z = [xdd, xd, w, x]` (blocks of
//! length n) through `z_k = F z_{k-1} + B u_k` with
//! `u_k = [f_k, 0, 0, f_w_k]`. Rows of the underlying implicit system:
//!
//!   M xdd_k + C w_k + K x_k = f_k                       (equation of motion)
//!   x_k  = x_{k-1} + dt xd_k - dt^2/4 (xdd_k + xdd_{k-1})
//!   xd_k = xd_{k-1} + dt/2 (xdd_k + xdd_{k-1})          (average acceleration)
//!   w_k  = W0/2 (xd_k + xd_{k-1}) + f_w_k               (trapezoid quadrature)
//!
//! `f_w_k` collects the older history terms; for the Dirac kernel the last
//! row degenerates to `w_k = xd_k` and the scheme is exactly the viscous
//! average-acceleration method.

use nalgebra::{DMatrix, DVector};

use crate::{KernelSpec, SimError};

/// Transition (`F = A^{-1} G`) and input (`B = A^{-1}`) matrices of the
/// stepping scheme. Constant while the current-step kernel weight is.
#[derive(Debug, Clone)]
pub struct SchemeMatrices {
    pub transition: DMatrix<f64>,
    pub input: DMatrix<f64>,
    n: usize,
}

/// How the damping convolution enters the stack equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvolutionPath {
    /// Finite-memory kernel with current-step quadrature weight `W0`.
    Hereditary { current_weight: f64 },
    /// Dirac kernel: `w = xd` identically.
    Dirac,
}

impl SchemeMatrices {
    pub fn assemble(
        mass: &DMatrix<f64>,
        damping: &DMatrix<f64>,
        stiffness: &DMatrix<f64>,
        dt: f64,
        path: ConvolutionPath,
    ) -> Result<Self, SimError> {
        let n = mass.nrows();
        let size = 4 * n;
        let mut a = DMatrix::<f64>::zeros(size, size);
        let mut g = DMatrix::<f64>::zeros(size, size);
        let set = |m: &mut DMatrix<f64>, bi: usize, bj: usize, block: &DMatrix<f64>| {
            m.view_mut((bi * n, bj * n), (n, n)).copy_from(block);
        };
        let ident = DMatrix::<f64>::identity(n, n);

        set(&mut a, 0, 0, mass);
        set(&mut a, 0, 2, damping);
        set(&mut a, 0, 3, stiffness);
        set(&mut a, 1, 0, &(dt * dt / 4.0 * &ident));
        set(&mut a, 1, 1, &(-dt * &ident));
        set(&mut a, 1, 3, &ident);
        set(&mut a, 2, 0, &(-dt / 2.0 * &ident));
        set(&mut a, 2, 1, &ident);
        set(&mut a, 3, 2, &ident);

        set(&mut g, 1, 0, &(-dt * dt / 4.0 * &ident));
        set(&mut g, 1, 3, &ident);
        set(&mut g, 2, 0, &(dt / 2.0 * &ident));
        set(&mut g, 2, 1, &ident);

        match path {
            ConvolutionPath::Hereditary { current_weight } => {
                set(&mut a, 3, 1, &(-current_weight / 2.0 * &ident));
                set(&mut g, 3, 1, &(current_weight / 2.0 * &ident));
            }
            ConvolutionPath::Dirac => {
                set(&mut a, 3, 1, &(-&ident));
            }
        }

        let input = a
            .lu()
            .try_inverse()
            .ok_or(SimError::SingularMatrix { step: 0 })?;
        let transition = &input * g;
        Ok(SchemeMatrices {
            transition,
            input,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `z_k = F z_{k-1} + B u_k`.
    pub fn step(&self, z: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.transition * z + &self.input * u
    }
}

/// Velocity history and precomputed lag weights for the convolution load
/// term `f_w_k = sum_{i=1}^{k-1} V_{k-i} (xd_i + xd_{i-1}) / 2`.
#[derive(Debug, Clone)]
pub struct ConvolutionHistory {
    weights: Vec<f64>,
    /// Per-DOF velocity history, one growing vector per DOF.
    velocities: Vec<Vec<f64>>,
}

impl ConvolutionHistory {
    pub fn new(kernel: KernelSpec, dt: f64, steps: usize, n: usize) -> Result<Self, SimError> {
        let weights = kernel.lag_weights(dt, steps + 1)?;
        Ok(ConvolutionHistory {
            weights,
            velocities: vec![Vec::with_capacity(steps + 1); n],
        })
    }

    /// Current-step quadrature weight `W0`.
    pub fn current_weight(&self) -> f64 {
        self.weights[0]
    }

    pub fn push_velocity(&mut self, v: impl Iterator<Item = f64>) {
        for (store, value) in self.velocities.iter_mut().zip(v) {
            store.push(value);
        }
    }

    /// History load at step `k` (1-based). Requires velocities `0..k-1` to
    /// have been pushed.
    pub fn history_load(&self, k: usize) -> DVector<f64> {
        let n = self.velocities.len();
        let mut out = DVector::zeros(n);
        for (d, hist) in self.velocities.iter().enumerate() {
            debug_assert!(hist.len() >= k);
            let mut acc = 0.0;
            for i in 1..k {
                acc += self.weights[k - i] * (hist[i] + hist[i - 1]);
            }
            out[d] = 0.5 * acc;
        }
        out
    }
}
