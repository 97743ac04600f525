//! The discrete operator `A_h = −Δ_h + U·∇_h + diag(V)` on a cell-centred
//! mesh with homogeneous Dirichlet ghosts, its formal adjoint, and resolvent
//! and direct solves.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{CsrMatrix, LinearSolver, SolverOptions};
use crate::mesh::Mesh;
use crate::model::FlowField;
use crate::scalar::{lit, RealScalar};

/// Largest discrete divergence accepted by [`assemble`].
pub const DIVERGENCE_TOLERANCE: f64 = 1e-8;

/// Assembled sparse operator. Immutable; clone or share behind an `Arc`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T: RealScalar> {
    mesh: Arc<Mesh<T>>,
    laplacian: CsrMatrix<T>,
    convection: CsrMatrix<T>,
    potential: GridFunction<T>,
    flow: FlowField<T>,
    principal_part: CsrMatrix<T>,
    matrix: CsrMatrix<T>,
}

/// Builds `−Δ_h` with ghost value `−u` across every boundary face.
pub fn dirichlet_laplacian<T: RealScalar>(mesh: &Mesh<T>) -> CsrMatrix<T> {
    let [nx, ny] = mesh.counts();
    let h = mesh.spacing();
    let two = lit::<T>(2.0);
    let mut trip = Vec::with_capacity(5 * mesh.len());
    let axes = if mesh.dim() == 1 { 1 } else { 2 };
    for j in 0..ny {
        for i in 0..nx {
            let k = mesh.index(i, j);
            let mut diag = T::zero();
            for axis in 0..axes {
                let w = T::one() / (h[axis] * h[axis]);
                let (pos, n) = if axis == 0 { (i, nx) } else { (j, ny) };
                for step in [-1isize, 1] {
                    let nb = pos as isize + step;
                    if nb < 0 || nb >= n as isize {
                        diag += two * w;
                    } else {
                        diag += w;
                        let nk = if axis == 0 {
                            mesh.index(nb as usize, j)
                        } else {
                            mesh.index(i, nb as usize)
                        };
                        trip.push((k, nk, -w));
                    }
                }
            }
            trip.push((k, k, diag));
        }
    }
    CsrMatrix::from_triplets(mesh.len(), trip)
}

/// Central convection from face fluxes: `K[i, nb] = F/(2·vol)` with `F` the
/// outward flux of cell `i` through the shared face, so `K = −Kᵀ` exactly.
pub fn convection_matrix<T: RealScalar>(flow: &FlowField<T>) -> CsrMatrix<T> {
    let mesh = flow.mesh();
    let [nx, ny] = mesh.counts();
    let h = mesh.spacing();
    let half = lit::<T>(0.5);
    let mut trip = Vec::new();
    let fx = flow.face_x();
    for j in 0..ny {
        for i in 1..nx {
            let v = fx[i + (nx + 1) * j] * half / h[0];
            if v != T::zero() {
                let left = mesh.index(i - 1, j);
                let right = mesh.index(i, j);
                trip.push((left, right, v));
                trip.push((right, left, -v));
            }
        }
    }
    if mesh.dim() == 2 {
        let fy = flow.face_y();
        for j in 1..ny {
            for i in 0..nx {
                let v = fy[i + nx * j] * half / h[1];
                if v != T::zero() {
                    let below = mesh.index(i, j - 1);
                    let above = mesh.index(i, j);
                    trip.push((below, above, v));
                    trip.push((above, below, -v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(mesh.len(), trip)
}

/// Assembles `A_h` from cell samples of `V ≥ 0` and a divergence-free flow.
pub fn assemble<T: RealScalar>(
    mesh: &Arc<Mesh<T>>,
    potential: &GridFunction<T>,
    flow: &FlowField<T>,
) -> Result<DiscreteOperator<T>> {
    potential.check_mesh(mesh)?;
    if !flow.mesh().same_cells(mesh) {
        return Err(Error::MeshMismatch("flow sampled on a different mesh".into()));
    }
    potential.check_finite()?;
    if let Some((cell, &v)) = potential.values().iter().enumerate().find(|(_, v)| **v < T::zero()) {
        return Err(Error::NegativeValue {
            cell,
            value: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    let div = flow.divergence().max_abs();
    if !(div <= lit(DIVERGENCE_TOLERANCE)) {
        return Err(Error::NotDivergenceFree {
            divergence: div.to_f64().unwrap_or(f64::NAN),
            boundary_flux: flow.max_boundary_flux().to_f64().unwrap_or(f64::NAN),
        });
    }
    let peclet = flow.peclet();
    if peclet > T::one() {
        return Err(Error::PecletViolation {
            peclet: peclet.to_f64().unwrap_or(f64::NAN),
        });
    }
    let laplacian = dirichlet_laplacian(mesh);
    let convection = convection_matrix(flow);
    let principal_part = laplacian.add(&convection);
    let n = mesh.len();
    let diag = CsrMatrix::from_triplets(
        n,
        potential.values().iter().enumerate().map(|(k, &v)| (k, k, v)).collect(),
    );
    let matrix = principal_part.add(&diag);
    Ok(DiscreteOperator {
        mesh: Arc::clone(mesh),
        laplacian,
        convection,
        potential: potential.clone(),
        flow: flow.clone(),
        principal_part,
        matrix,
    })
}

impl<T: RealScalar> DiscreteOperator<T> {
    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    /// Full system matrix `A_h`.
    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    /// `L_h = −Δ_h + K` without the potential.
    pub fn principal_part(&self) -> &CsrMatrix<T> {
        &self.principal_part
    }

    pub fn laplacian(&self) -> &CsrMatrix<T> {
        &self.laplacian
    }

    pub fn convection(&self) -> &CsrMatrix<T> {
        &self.convection
    }

    pub fn potential(&self) -> &GridFunction<T> {
        &self.potential
    }

    pub fn flow(&self) -> &FlowField<T> {
        &self.flow
    }

    pub fn has_flow(&self) -> bool {
        self.convection.nnz() > 0
    }

    /// The same operator with `V` replaced.
    pub fn with_potential(&self, potential: &GridFunction<T>) -> Result<Self> {
        assemble(&self.mesh, potential, &self.flow)
    }

    /// `A_h u`.
    pub fn apply(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        u.check_mesh(&self.mesh)?;
        GridFunction::new(&self.mesh, self.matrix.apply(u.values()))
    }

    /// `L_h u = −Δ_h u + (U·∇)_h u`.
    pub fn apply_principal(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        u.check_mesh(&self.mesh)?;
        GridFunction::new(&self.mesh, self.principal_part.apply(u.values()))
    }

    /// `L*φ = −Δ_h φ − (U·∇)_h φ`, plus `Vφ` when requested.
    pub fn apply_adjoint(&self, phi: &GridFunction<T>, include_potential: bool) -> Result<GridFunction<T>> {
        phi.check_mesh(&self.mesh)?;
        let mut out = self.laplacian.apply(phi.values());
        let k = self.convection.apply(phi.values());
        for (o, kv) in out.iter_mut().zip(k) {
            *o -= kv;
        }
        if include_potential {
            for ((o, v), p) in out.iter_mut().zip(self.potential.values()).zip(phi.values()) {
                *o += *v * *p;
            }
        }
        GridFunction::new(&self.mesh, out)
    }

    /// Factors `I + λA_h` once for repeated solves.
    pub fn resolvent(&self, lambda: T, options: SolverOptions) -> Result<Resolvent<T>> {
        if !(lambda > T::zero() && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("resolvent parameter λ = {lambda} must be > 0")));
        }
        let m = self.matrix.shifted(T::one(), lambda);
        Ok(Resolvent {
            mesh: Arc::clone(&self.mesh),
            lambda,
            solver: LinearSolver::new(m, options)?,
        })
    }

    /// Factors `A_h` once for repeated solves.
    pub fn factor(&self, options: SolverOptions) -> Result<Resolvent<T>> {
        Ok(Resolvent {
            mesh: Arc::clone(&self.mesh),
            lambda: T::infinity(),
            solver: LinearSolver::new(self.matrix.clone(), options)?,
        })
    }
}

/// A factored system `I + λA_h` (or `A_h` itself when `λ = ∞`).
#[derive(Debug, Clone)]
pub struct Resolvent<T: RealScalar> {
    mesh: Arc<Mesh<T>>,
    lambda: T,
    solver: LinearSolver<T>,
}

impl<T: RealScalar> Resolvent<T> {
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn solver(&self) -> &LinearSolver<T> {
        &self.solver
    }

    pub fn solve(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        f.check_mesh(&self.mesh)?;
        f.check_finite()?;
        GridFunction::new(&self.mesh, self.solver.solve(f.values())?)
    }

    pub fn solve_values(&self, f: &[T]) -> Result<Vec<T>> {
        self.solver.solve(f)
    }
}

/// Solves `(I + λA_h)u = f`.
pub fn resolvent_solve<T: RealScalar>(
    op: &DiscreteOperator<T>,
    lambda: T,
    f: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    op.resolvent(lambda, SolverOptions::default())?.solve(f)
}

/// Solves `A_h u = f`.
pub fn direct_solve<T: RealScalar>(op: &DiscreteOperator<T>, f: &GridFunction<T>) -> Result<GridFunction<T>> {
    op.factor(SolverOptions::default())?.solve(f)
}
