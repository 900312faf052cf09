//! Hermitian operators on labeled bases: validation, eigendecomposition,
//! exact exponential stepping, and subspace projection.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{same_basis, Basis, QuantumState};
use crate::linalg;

/// Relative tolerance of the Hermiticity contract.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A Hermitian matrix over a labeled basis, in units of angular frequency
/// (hbar = 1).
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    basis: Arc<Basis>,
    matrix: Array2<C64>,
}

impl HermitianOperator {
    /// Validate Hermiticity (`max |M - M^dag|  <  1e-12 * max |M|`) and wrap.
    pub fn new(basis: Arc<Basis>, matrix: Array2<C64>) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::BasisMismatch(format!(
                "matrix is {}x{} but basis dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                d
            )));
        }
        let scale = linalg::max_abs(&matrix);
        let (row, col, asymmetry) = linalg::hermiticity_defect(&matrix);
        let tol = HERMITICITY_TOL * scale.max(f64::MIN_POSITIVE);
        if asymmetry >= tol && scale > 0.0 {
            return Err(Error::NotHermitian { row, col, asymmetry, tol });
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Eigenvalues in nondecreasing order together with orthonormal
    /// eigenvectors. The global phase of each vector is fixed so that its
    /// largest-magnitude component is real and positive; degenerate clusters
    /// are re-orthonormalized deterministically in index order.
    pub fn eigendecompose(&self) -> Result<Eigendecomposition> {
        let (values, vectors) = linalg::eigh(&self.matrix)?;
        let states = (0..self.dim())
            .map(|j| {
                QuantumState::new(self.basis.clone(), vectors.column(j).to_owned())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Eigendecomposition {
            values: values.to_vec(),
            vectors: states,
            vector_matrix: vectors,
        })
    }
}

/// Result of [`HermitianOperator::eigendecompose`].
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<QuantumState>,
    /// Eigenvectors as the columns of a unitary matrix.
    pub vector_matrix: Array2<C64>,
}

/// The unitary `U = exp(-i H dt)`, computed through the eigendecomposition
/// of `H`. Exact for constant `H`, and the per-step kernel of the
/// piecewise-constant propagation backend.
pub fn matrix_exponential_step(h: &HermitianOperator, dt: f64) -> Result<Array2<C64>> {
    if !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt = {dt} is not finite")));
    }
    let eig = h.eigendecompose()?;
    let d = h.dim();
    let v = &eig.vector_matrix;
    let phases: Array1<C64> = eig
        .values
        .iter()
        .map(|&lambda| (-C64::i() * lambda * dt).exp())
        .collect();
    // U = V diag(e^{-i lambda dt}) V^dag
    let mut u = Array2::<C64>::zeros((d, d));
    for r in 0..d {
        for c in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += v[[r, k]] * phases[k] * v[[c, k]].conj();
            }
            u[[r, c]] = acc;
        }
    }
    Ok(u)
}

type EvalFn = dyn Fn(f64) -> Array2<C64> + Send + Sync;

/// A time-dependent Hermitian operator `t -> H(t)` over a fixed basis.
///
/// The evaluator must return matrices on the declared basis; Hermiticity is
/// validated lazily at sampled times through [`Self::at`].
#[derive(Clone)]
pub struct TimeDependentHamiltonian {
    basis: Arc<Basis>,
    eval: Arc<EvalFn>,
    piecewise_smooth: bool,
}

impl std::fmt::Debug for TimeDependentHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeDependentHamiltonian")
            .field("dim", &self.basis.dim())
            .field("piecewise_smooth", &self.piecewise_smooth)
            .finish()
    }
}

impl TimeDependentHamiltonian {
    pub fn new<F>(basis: Arc<Basis>, eval: F) -> Self
    where
        F: Fn(f64) -> Array2<C64> + Send + Sync + 'static,
    {
        Self { basis, eval: Arc::new(eval), piecewise_smooth: true }
    }

    /// A constant Hamiltonian.
    pub fn constant(h: HermitianOperator) -> Self {
        let m = h.matrix().clone();
        Self::new(h.basis().clone(), move |_| m.clone())
    }

    pub fn with_smoothness(mut self, piecewise_smooth: bool) -> Self {
        self.piecewise_smooth = piecewise_smooth;
        self
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn piecewise_smooth(&self) -> bool {
        self.piecewise_smooth
    }

    /// Raw matrix sample without the Hermiticity re-check (hot path).
    pub fn matrix_at(&self, t: f64) -> Array2<C64> {
        (self.eval)(t)
    }

    /// Validated sample at time `t`.
    pub fn at(&self, t: f64) -> Result<HermitianOperator> {
        HermitianOperator::new(self.basis.clone(), (self.eval)(t))
    }

    /// Restriction to the subspace spanned by the named labels, re-indexed in
    /// the order given.
    pub fn project_subspace(&self, labels: &[&str]) -> Result<TimeDependentHamiltonian> {
        let indices = labels
            .iter()
            .map(|name| self.basis.index_of(name))
            .collect::<Result<Vec<_>>>()?;
        let sub_basis = Basis::new(labels.iter().map(|s| s.to_string()))?;
        let eval = self.eval.clone();
        let d = indices.len();
        Ok(TimeDependentHamiltonian {
            basis: sub_basis,
            eval: Arc::new(move |t| {
                let full = eval(t);
                let mut sub = Array2::<C64>::zeros((d, d));
                for (r, &ir) in indices.iter().enumerate() {
                    for (c, &ic) in indices.iter().enumerate() {
                        sub[[r, c]] = full[[ir, ic]];
                    }
                }
                sub
            }),
            piecewise_smooth: self.piecewise_smooth,
        })
    }
}

/// Check that a state and an operator share a basis.
pub fn check_same_basis(state: &QuantumState, h: &TimeDependentHamiltonian) -> Result<()> {
    if !same_basis(state.basis(), h.basis()) {
        return Err(Error::BasisMismatch(
            "state basis differs from Hamiltonian basis".into(),
        ));
    }
    Ok(())
}
