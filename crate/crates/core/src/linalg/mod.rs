//! Sparse storage and the linear solvers behind the discrete operator.

mod banded;
mod krylov;
mod sparse;

pub use banded::BandedLu;
pub use krylov::{bicgstab, KrylovOutcome};
pub use sparse::CsrMatrix;

use num_traits::{Float, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{lit, Field, Real};

/// Policy for choosing and checking linear solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Systems with more unknowns than this use the iterative path.
    pub direct_limit: usize,
    /// Upper bound on band-storage entries for the direct path.
    pub band_storage_limit: usize,
    /// Required backward error `‖r‖∞ / ‖|A||x| + |b|‖∞`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Iterative-refinement sweeps applied after a direct solve.
    pub refinement_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            direct_limit: 250_000,
            band_storage_limit: 64 << 20,
            tolerance: 1e-10,
            max_iterations: 20_000,
            refinement_steps: 3,
        }
    }
}

/// Backward error `‖b − Ax‖∞ / ‖|A||x| + |b|‖∞`; zero when both sides vanish.
pub fn backward_error<S: Field>(a: &CsrMatrix<S>, x: &[S], b: &[S]) -> S::Real {
    let mut r = vec![S::zero(); b.len()];
    a.mul_vec(x, &mut r);
    let mag = a.abs_mul(x);
    let mut num = S::Real::zero();
    let mut den = S::Real::zero();
    for i in 0..b.len() {
        num = num.max((b[i] - r[i]).modulus());
        den = den.max(mag[i] + b[i].modulus());
    }
    if den == S::Real::zero() {
        S::Real::zero()
    } else {
        num / den
    }
}

/// A factorised (or preconditioned) system ready for repeated solves.
#[derive(Debug, Clone)]
pub struct LinearSolver<S: Field> {
    matrix: CsrMatrix<S>,
    backend: Backend<S>,
    options: SolverOptions,
}

#[derive(Debug, Clone)]
enum Backend<S: Field> {
    Direct(BandedLu<S>),
    Iterative { inv_diag: Vec<S> },
}

impl<S: Field> LinearSolver<S> {
    pub fn new(matrix: CsrMatrix<S>, options: SolverOptions) -> Result<Self> {
        let n = matrix.n();
        let bw = matrix.bandwidth();
        let storage = n.saturating_mul(2 * bw + 1);
        let backend = if n <= options.direct_limit && storage <= options.band_storage_limit {
            Backend::Direct(BandedLu::factor(&matrix)?)
        } else {
            let inv_diag = matrix
                .diagonal()
                .into_iter()
                .enumerate()
                .map(|(row, d)| {
                    if d.modulus() == S::Real::zero() {
                        Err(Error::Singular { row })
                    } else {
                        Ok(S::one() / d)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Backend::Iterative { inv_diag }
        };
        Ok(LinearSolver {
            matrix,
            backend,
            options,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix<S> {
        &self.matrix
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct(_))
    }

    /// Solves `A x = b`, failing if the backward error stays above tolerance.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let (x, eta) = self.solve_unchecked(b);
        if eta <= lit(self.options.tolerance) {
            Ok(x)
        } else {
            Err(Error::SolverBreakdown {
                residual: eta.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Solves and returns the attained backward error without judging it.
    pub fn solve_unchecked(&self, b: &[S]) -> (Vec<S>, S::Real) {
        let tol: S::Real = lit(self.options.tolerance);
        match &self.backend {
            Backend::Direct(lu) => {
                let mut x = lu.solve(b);
                let mut eta = backward_error(&self.matrix, &x, b);
                let mut r = vec![S::zero(); b.len()];
                for _ in 0..self.options.refinement_steps {
                    if eta <= tol * lit(1e-2) || !eta.is_finite() {
                        break;
                    }
                    self.matrix.mul_vec(&x, &mut r);
                    for (ri, bi) in r.iter_mut().zip(b) {
                        *ri = *bi - *ri;
                    }
                    let dx = lu.solve(&r);
                    let cand: Vec<S> = x.iter().zip(&dx).map(|(a, d)| *a + *d).collect();
                    let e2 = backward_error(&self.matrix, &cand, b);
                    if e2 < eta {
                        x = cand;
                        eta = e2;
                    } else {
                        break;
                    }
                }
                (x, eta)
            }
            Backend::Iterative { inv_diag } => {
                let out = bicgstab(
                    &self.matrix,
                    b,
                    inv_diag,
                    tol,
                    self.options.max_iterations,
                );
                (out.x, out.backward_error)
            }
        }
    }
}

/// Matrix-free check that a real matrix is an M-matrix candidate:
/// positive diagonal and nonpositive off-diagonal entries.
pub fn has_m_matrix_signs<T: Real + Field<Real = T>>(a: &CsrMatrix<T>) -> bool {
    (0..a.n()).all(|i| {
        a.row(i).all(|(j, v)| {
            if i == j {
                v > T::zero()
            } else {
                v <= T::zero()
            }
        })
    })
}
