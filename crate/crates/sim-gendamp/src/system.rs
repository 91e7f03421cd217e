use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{KernelSpec, SimError};

/// n-DOF linear system whose damping force is the convolution of a memory
/// kernel with the velocity history:
/// `M xdd(t) + C int_0^t g(t - tau) xd(tau) dtau + K x(t) = f(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr", into = "SystemRepr")]
pub struct GenDampedSystem {
    n: usize,
    mass: DMatrix<f64>,
    damping: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    kernel: KernelSpec,
}

impl GenDampedSystem {
    pub fn new(
        mass: DMatrix<f64>,
        damping: DMatrix<f64>,
        stiffness: DMatrix<f64>,
        kernel: KernelSpec,
    ) -> Result<Self, SimError> {
        let n = mass.nrows();
        if n == 0 {
            return Err(SimError::BadSystem("zero degrees of freedom".into()));
        }
        for (name, m) in [("M", &mass), ("C", &damping), ("K", &stiffness)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(SimError::BadSystem(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(SimError::BadSystem(format!("{name} has non-finite entries")));
            }
        }
        let scale_m = mass.amax().max(1e-300);
        if (&mass - mass.transpose()).amax() > 1e-9 * scale_m {
            return Err(SimError::BadSystem("M is not symmetric".into()));
        }
        if mass.clone().cholesky().is_none() {
            return Err(SimError::BadSystem("M is not positive definite".into()));
        }
        let scale_k = stiffness.amax().max(1e-300);
        if (&stiffness - stiffness.transpose()).amax() > 1e-9 * scale_k {
            return Err(SimError::BadSystem("K is not symmetric".into()));
        }
        let min_eig = stiffness
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 * scale_k {
            return Err(SimError::BadSystem(
                "K is not positive semi-definite".into(),
            ));
        }
        kernel.validate()?;
        Ok(GenDampedSystem {
            n,
            mass,
            damping,
            stiffness,
            kernel,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn damping(&self) -> &DMatrix<f64> {
        &self.damping
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn with_kernel(&self, kernel: KernelSpec) -> Result<Self, SimError> {
        kernel.validate()?;
        let mut out = self.clone();
        out.kernel = kernel;
        Ok(out)
    }
}

/// Two-DOF benchmark system shared by the linear model classes:
/// unit masses, `C = [[3, -2], [-2, 2]]`, `K = [[20, -11], [-11, 11]]`.
pub fn benchmark_two_dof(kernel: KernelSpec) -> GenDampedSystem {
    let mass = DMatrix::identity(2, 2);
    let damping = DMatrix::from_row_slice(2, 2, &[3.0, -2.0, -2.0, 2.0]);
    let stiffness = DMatrix::from_row_slice(2, 2, &[20.0, -11.0, -11.0, 11.0]);
    GenDampedSystem::new(mass, damping, stiffness, kernel).expect("benchmark system is valid")
}

/// The three linear model classes: identical matrices, different kernels.
/// A = exponential(1.5), B = gaussian(1.5), C = dirac (pure viscous).
pub fn linear_model_classes() -> [GenDampedSystem; 3] {
    [
        benchmark_two_dof(KernelSpec::Exponential(1.5)),
        benchmark_two_dof(KernelSpec::Gaussian(1.5)),
        benchmark_two_dof(KernelSpec::Dirac),
    ]
}

/// Serialization mirror: matrices as row-major nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemRepr {
    m: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    kernel: KernelSpec,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err("matrix rows must form a square matrix".into());
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl From<GenDampedSystem> for SystemRepr {
    fn from(s: GenDampedSystem) -> Self {
        SystemRepr {
            m: to_rows(&s.mass),
            c: to_rows(&s.damping),
            k: to_rows(&s.stiffness),
            kernel: s.kernel,
        }
    }
}

impl TryFrom<SystemRepr> for GenDampedSystem {
    type Error = SimError;

    fn try_from(r: SystemRepr) -> Result<Self, SimError> {
        let mass = from_rows(&r.m).map_err(SimError::BadSystem)?;
        let damping = from_rows(&r.c).map_err(SimError::BadSystem)?;
        let stiffness = from_rows(&r.k).map_err(SimError::BadSystem)?;
        GenDampedSystem::new(mass, damping, stiffness, r.kernel)
    }
}
