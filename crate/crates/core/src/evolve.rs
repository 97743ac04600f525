//! Time evolution: implicit-Euler parabolic stepping with contraction
//! checks, and Schrödinger evolution by spectral Galerkin expansion or
//! Crank–Nicolson on an enclosing box.

use std::sync::Arc;

use num_complex::Complex;
use thiserror::Error as ThisError;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{CsrMatrix, LinearSolver, SolverOptions};
use crate::mesh::Mesh;
use crate::model::BoxEmbedding;
use crate::operator::{assemble, DiscreteOperator};
use crate::rearrange::weighted_lp_norm;
use crate::scalar::{from_usize, lit, Field, RealScalar};
use crate::spectral::{flatness_fit, principal_eigenpair, DecayFit, EigenOptions, EigenSystem, PrincipalPair};
use crate::stationary::distance_function;

/// Time-dependent source sampled on the mesh.
pub type TimeSource<T> = Arc<dyn Fn(T) -> GridFunction<T> + Send + Sync>;

/// Right-hand side of the parabolic problem.
#[derive(Clone)]
pub enum Source<T: RealScalar> {
    Zero,
    Steady(GridFunction<T>),
    Time(TimeSource<T>),
}

impl<T: RealScalar> std::fmt::Debug for Source<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::Steady(_) => write!(f, "Steady(..)"),
            Source::Time(_) => write!(f, "Time(<fn>)"),
        }
    }
}

impl<T: RealScalar> Source<T> {
    pub fn sample(&self, t: T, mesh: &Arc<Mesh<T>>) -> Result<GridFunction<T>> {
        let g = match self {
            Source::Zero => GridFunction::zeros(mesh),
            Source::Steady(g) => g.clone(),
            Source::Time(f) => f(t),
        };
        g.check_mesh(mesh)?;
        Ok(g)
    }
}

/// Weighted `L¹` norm `∫|u|·w`.
fn weighted_l1<T: RealScalar>(u: &GridFunction<T>, w: &GridFunction<T>) -> T {
    u.values()
        .iter()
        .zip(w.values())
        .map(|(x, y)| x.abs() * *y)
        .sum::<T>()
        * u.mesh().cell_volume()
}

/// Implicit-Euler trajectory `(I + Δt·A)u_{k+1} = u_k + Δt·f(t_{k+1})`.
#[derive(Debug, Clone)]
pub struct ParabolicTrajectory<T: RealScalar> {
    pub times: Vec<T>,
    pub states: Vec<GridFunction<T>>,
    /// `f(t_k)` for every time, including `t₀`.
    pub sources: Vec<GridFunction<T>>,
    pub alpha: T,
    /// `‖u(t_k)‖_{L¹(δ^α)}`.
    pub weighted_norms: Vec<T>,
}

impl<T: RealScalar> ParabolicTrajectory<T> {
    pub fn step(&self) -> T {
        self.times[1] - self.times[0]
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_state(&self) -> &GridFunction<T> {
        self.states.last().expect("initial state is always recorded")
    }

    /// `‖u_k + Δt f_{k+1}‖_w − ‖u_{k+1}‖_w` for each step, with `w = ψ^α`.
    pub fn nonexpansive_margins(&self, psi: &GridFunction<T>, alpha: T) -> Result<Vec<T>> {
        let w = psi.map(|p| p.max(T::zero()).powf(alpha));
        let dt = self.step();
        let mut out = Vec::with_capacity(self.steps());
        for k in 0..self.steps() {
            let input = self.states[k].axpy(dt, &self.sources[k + 1])?;
            out.push(weighted_l1(&input, &w) - weighted_l1(&self.states[k + 1], &w));
        }
        Ok(out)
    }
}

/// Failure at step `step`, carrying the states computed before it.
#[derive(Debug, ThisError)]
#[error("parabolic step {step} failed: {source}")]
pub struct StepError<T: RealScalar> {
    pub step: usize,
    pub partial: Box<ParabolicTrajectory<T>>,
    #[source]
    pub source: Error,
}

/// `K` backward-Euler resolvent steps of size `T/K`.
pub fn parabolic_evolve<T: RealScalar>(
    op: &DiscreteOperator<T>,
    u0: &GridFunction<T>,
    source: &Source<T>,
    t_final: T,
    steps: usize,
    alpha: T,
) -> std::result::Result<ParabolicTrajectory<T>, StepError<T>> {
    let mesh = op.mesh();
    let delta = distance_function(mesh);
    let mut traj = ParabolicTrajectory {
        times: vec![T::zero()],
        states: Vec::new(),
        sources: Vec::new(),
        alpha,
        weighted_norms: Vec::new(),
    };
    let fail = |traj: ParabolicTrajectory<T>, step: usize, e: Error| StepError {
        step,
        partial: Box::new(traj),
        source: e,
    };
    if steps == 0 || !(t_final > T::zero()) {
        return Err(fail(traj, 0, Error::InvalidArgument("need K ≥ 1 steps and T > 0".into())));
    }
    let setup = (|| -> Result<_> {
        u0.check_mesh(mesh)?;
        u0.check_finite()?;
        let dt = t_final / from_usize(steps);
        let res = op.resolvent(dt, SolverOptions::default())?;
        let f0 = source.sample(T::zero(), mesh)?;
        let n0 = weighted_lp_norm(u0, &delta, alpha, T::one())?;
        Ok((dt, res, f0, n0))
    })();
    let (dt, res, f0, n0) = match setup {
        Ok(x) => x,
        Err(e) => return Err(fail(traj, 0, e)),
    };
    traj.states.push(u0.clone());
    traj.sources.push(f0);
    traj.weighted_norms.push(n0);
    for k in 1..=steps {
        let t = if k == steps { t_final } else { dt * from_usize(k) };
        let step = (|| -> Result<_> {
            let f = source.sample(t, mesh)?;
            let rhs = traj.states[k - 1].axpy(dt, &f)?;
            let u = res.solve(&rhs)?;
            let n = weighted_lp_norm(&u, &delta, alpha, T::one())?;
            Ok((f, u, n))
        })();
        match step {
            Ok((f, u, n)) => {
                traj.times.push(t);
                traj.sources.push(f);
                traj.states.push(u);
                traj.weighted_norms.push(n);
            }
            Err(e) => return Err(fail(traj, k, e)),
        }
    }
    Ok(traj)
}

/// Per-step sides of the positive-part contraction inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport<T> {
    /// `‖(u − û)₊(t_k)‖_w`.
    pub lhs: Vec<T>,
    /// `‖(u₀ − û₀)₊‖_w + Σ_{i ≤ k} Δt‖(f − f̂)₊(t_i)‖_w`.
    pub rhs: Vec<T>,
    pub margins: Vec<T>,
    pub scale: T,
    pub pass: bool,
}

/// Compares two trajectories in the `L¹(ψ^α)` norm of the positive part.
pub fn contraction_margin<T: RealScalar>(
    traj: &ParabolicTrajectory<T>,
    traj_hat: &ParabolicTrajectory<T>,
    alpha: T,
    psi1: &GridFunction<T>,
) -> Result<ContractionReport<T>> {
    if traj.times.len() != traj_hat.times.len()
        || traj.times.iter().zip(&traj_hat.times).any(|(a, b)| a != b)
    {
        return Err(Error::MeshMismatch("trajectories use different time grids".into()));
    }
    traj.states[0].check_same(&traj_hat.states[0])?;
    psi1.check_same(&traj.states[0])?;
    let w = psi1.map(|p| p.max(T::zero()).powf(alpha));
    let pos = |a: &GridFunction<T>, b: &GridFunction<T>| -> Result<T> {
        Ok(weighted_l1(&a.sub(b)?.positive_part(), &w))
    };
    let mut lhs = Vec::with_capacity(traj.times.len());
    let mut rhs = Vec::with_capacity(traj.times.len());
    let mut acc = pos(&traj.states[0], &traj_hat.states[0])?;
    let mut total = weighted_l1(&traj.states[0].sub(&traj_hat.states[0])?, &w);
    for k in 0..traj.times.len() {
        if k > 0 {
            let dt = traj.times[k] - traj.times[k - 1];
            acc += dt * pos(&traj.sources[k], &traj_hat.sources[k])?;
            total += dt * weighted_l1(&traj.sources[k].sub(&traj_hat.sources[k])?, &w);
        }
        lhs.push(pos(&traj.states[k], &traj_hat.states[k])?);
        rhs.push(acc);
    }
    let margins: Vec<T> = rhs.iter().zip(&lhs).map(|(r, l)| *r - *l).collect();
    let scale = total.max(T::min_positive_value());
    let floor = -lit::<T>(1e-8) * scale;
    Ok(ContractionReport {
        pass: margins.iter().all(|&m| m >= floor),
        lhs,
        rhs,
        margins,
        scale,
    })
}

/// Principal eigenpair of the adjoint `L* = −Δ − U·∇` with `V = 0`.
pub fn adjoint_principal<T: RealScalar>(op: &DiscreteOperator<T>) -> Result<PrincipalPair<T>> {
    let mesh = op.mesh();
    let adj = assemble(mesh, &GridFunction::zeros(mesh), &op.flow().reversed())?;
    principal_eigenpair(&adj, &EigenOptions::default())
}

/// `J_ε = ∫ū·L*ψ_{1ε}` with `ψ_{1ε} = (ψ₁ + ε)^α − ε^α`.
pub fn auxiliary_functional<T: RealScalar>(
    op: &DiscreteOperator<T>,
    u_bar: &GridFunction<T>,
    psi1: &GridFunction<T>,
    alpha: T,
    eps: T,
) -> Result<T> {
    let base = eps.powf(alpha);
    let psi_eps = psi1.map(|p| (p.max(T::zero()) + eps).powf(alpha) - base);
    u_bar.inner(&op.apply_adjoint(&psi_eps, false)?)
}

/// `‖f‖_{L^p(δ^α)} − ‖u‖_{L^p(δ^α)}` for `Au + u = f`.
pub fn lp_resolvent_margin<T: RealScalar>(op: &DiscreteOperator<T>, f: &GridFunction<T>, p: T, alpha: T) -> Result<(T, GridFunction<T>)> {
    let u = op.resolvent(T::one(), SolverOptions::default())?.solve(f)?;
    let delta = distance_function(op.mesh());
    let margin = weighted_lp_norm(f, &delta, alpha, p)? - weighted_lp_norm(&u, &delta, alpha, p)?;
    Ok((margin, u))
}

/// Complex Schrödinger trajectory.
#[derive(Debug, Clone)]
pub struct WaveTrajectory<T: RealScalar>
where
    Complex<T>: Field<Real = T>,
{
    pub times: Vec<T>,
    pub states: Vec<GridFunction<Complex<T>>>,
    /// `‖ψ(t_k)‖²_{L²}`.
    pub mass: Vec<T>,
    /// `∫_{box∖Ω}|ψ(t_k)|²`; zero for trajectories living on `Ω`.
    pub outside_mass: Vec<T>,
    /// Galerkin coefficients `a_m`, when the trajectory is modal.
    pub coefficients: Option<Vec<Complex<T>>>,
}

impl<T: RealScalar> WaveTrajectory<T>
where
    Complex<T>: Field<Real = T>,
{
    /// `max_k |mass_k − mass_0| / mass_0`, zero for the zero state.
    pub fn mass_drift(&self) -> T {
        let m0 = self.mass[0];
        if m0 == T::zero() {
            return self.mass.iter().copied().fold(T::zero(), T::max);
        }
        self.mass.iter().map(|m| (*m - m0).abs() / m0).fold(T::zero(), T::max)
    }

    pub fn final_state(&self) -> &GridFunction<Complex<T>> {
        self.states.last().expect("initial state is always recorded")
    }
}

/// Modal coefficients of an initial state.
#[derive(Debug, Clone)]
pub struct GalerkinExpansion<T> {
    pub coefficients: Vec<Complex<T>>,
    /// `1 − Σ|a_m|²/‖ψ₀‖²`; zero for `ψ₀ = 0`.
    pub truncated_mass_fraction: T,
}

/// `a_m = ⟨ψ₀, u_m⟩`.
pub fn galerkin_coefficients<T: RealScalar>(
    psi0: &GridFunction<Complex<T>>,
    eig: &EigenSystem<T>,
) -> Result<GalerkinExpansion<T>>
where
    Complex<T>: Field<Real = T>,
{
    let defect = eig.orthonormality_defect();
    if !eig.symmetric || defect > lit(1e-8) {
        return Err(Error::NotOrthonormal {
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut coefficients = Vec::with_capacity(eig.len());
    for u in &eig.eigenfunctions {
        coefficients.push(psi0.inner(&u.complexify())?);
    }
    let total = psi0.norm_l2().powi(2);
    let captured: T = coefficients.iter().map(|a| a.norm_sqr()).sum();
    Ok(GalerkinExpansion {
        truncated_mass_fraction: if total == T::zero() { T::zero() } else { T::one() - captured / total },
        coefficients,
    })
}

/// `ψ(t) = Σ a_m e^{−iλ_m t} u_m` at the requested times.
pub fn schrodinger_galerkin<T: RealScalar>(
    coefficients: &[Complex<T>],
    eig: &EigenSystem<T>,
    times: &[T],
) -> Result<WaveTrajectory<T>>
where
    Complex<T>: Field<Real = T>,
{
    if coefficients.len() != eig.len() || eig.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for {} eigenpairs",
            coefficients.len(),
            eig.len()
        )));
    }
    let mesh = eig.eigenfunctions[0].mesh();
    let mut states = Vec::with_capacity(times.len());
    let mut mass = Vec::with_capacity(times.len());
    for &t in times {
        let mut v = vec![Complex::new(T::zero(), T::zero()); mesh.len()];
        for ((a, u), &lam) in coefficients.iter().zip(&eig.eigenfunctions).zip(&eig.eigenvalues) {
            let c = *a * Complex::from_polar(T::one(), -lam * t);
            for (o, &x) in v.iter_mut().zip(u.values()) {
                *o += c.scale(x);
            }
        }
        let g = GridFunction::new(mesh, v)?;
        mass.push(g.norm_l2().powi(2));
        states.push(g);
    }
    Ok(WaveTrajectory {
        times: times.to_vec(),
        outside_mass: vec![T::zero(); times.len()],
        states,
        mass,
        coefficients: Some(coefficients.to_vec()),
    })
}

/// Crank–Nicolson settings.
#[derive(Debug, Clone, Copy)]
pub struct CnOptions {
    /// Record every `record_every`-th state; the final state is always kept.
    pub record_every: usize,
    pub solver: SolverOptions,
}

impl Default for CnOptions {
    fn default() -> Self {
        CnOptions {
            record_every: 1,
            solver: SolverOptions::default(),
        }
    }
}

/// `(I + iΔt/2·A)ψ_{k+1} = (I − iΔt/2·A)ψ_k` over `K` steps of `Δt = T/K`.
/// A negative `T` runs backwards in time. `omega_mask` marks the `Ω`-cells
/// of the box mesh for the outside-mass history.
pub fn schrodinger_cn<T: RealScalar>(
    op: &DiscreteOperator<T>,
    psi0: &GridFunction<Complex<T>>,
    t_final: T,
    steps: usize,
    omega_mask: Option<&[bool]>,
    options: &CnOptions,
) -> Result<WaveTrajectory<T>>
where
    Complex<T>: Field<Real = T>,
{
    let mesh = op.mesh();
    psi0.check_mesh(mesh)?;
    psi0.check_finite()?;
    if steps == 0 || t_final == T::zero() || !t_final.is_finite() {
        return Err(Error::InvalidArgument("need K ≥ 1 steps and a finite T ≠ 0".into()));
    }
    if let Some(mask) = omega_mask {
        if mask.len() != mesh.len() {
            return Err(Error::MeshMismatch("Ω-mask length differs from the box mesh".into()));
        }
    }
    let dt = t_final / from_usize(steps);
    let half = dt / lit(2.0);
    let a = op.matrix();
    let implicit: CsrMatrix<Complex<T>> = a
        .map(|v| Complex::new(T::zero(), half * v))
        .add(&CsrMatrix::identity(mesh.len()));
    let explicit: CsrMatrix<Complex<T>> = a
        .map(|v| Complex::new(T::zero(), -half * v))
        .add(&CsrMatrix::identity(mesh.len()));
    let solver = LinearSolver::new(implicit, options.solver)?;
    let outside = |g: &GridFunction<Complex<T>>| -> T {
        match omega_mask {
            None => T::zero(),
            Some(mask) => {
                g.values()
                    .iter()
                    .zip(mask)
                    .filter(|(_, inside)| !**inside)
                    .map(|(v, _)| v.norm_sqr())
                    .sum::<T>()
                    * mesh.cell_volume()
            }
        }
    };
    let every = options.record_every.max(1);
    let mut traj = WaveTrajectory {
        times: vec![T::zero()],
        mass: vec![psi0.norm_l2().powi(2)],
        outside_mass: vec![outside(psi0)],
        states: vec![psi0.clone()],
        coefficients: None,
    };
    let mut psi = psi0.values().to_vec();
    for k in 1..=steps {
        let rhs = explicit.apply(&psi);
        psi = solver.solve(&rhs)?;
        if k % every == 0 || k == steps {
            let t = if k == steps { t_final } else { dt * from_usize(k) };
            let g = GridFunction::new(mesh, psi.clone())?;
            traj.times.push(t);
            traj.mass.push(g.norm_l2().powi(2));
            traj.outside_mass.push(outside(&g));
            traj.states.push(g);
        }
    }
    Ok(traj)
}

/// Limits for the confinement verdict.
#[derive(Debug, Clone, Copy)]
pub struct ConfinementThresholds<T> {
    pub max_outside_fraction: T,
    pub min_exponent: T,
}

/// Outside-mass history and boundary-decay fits of `|ψ(t)|` inside `Ω`.
#[derive(Debug, Clone)]
pub struct ConfinementReport<T> {
    pub times: Vec<T>,
    /// Outside mass divided by total mass (zero for the zero state).
    pub outside_fraction: Vec<T>,
    pub fits: Vec<(T, DecayFit<T>)>,
    pub max_outside_fraction: T,
    pub min_exponent: T,
    pub pass: bool,
}

/// Summarises confinement of a trajectory. `embedding` is required when the
/// trajectory lives on a box mesh; fits use the `Ω`-restriction at each
/// recorded time nearest to `fit_times`.
pub fn confinement_report<T: RealScalar>(
    traj: &WaveTrajectory<T>,
    embedding: Option<&BoxEmbedding<T>>,
    fit_times: &[T],
    window: Option<(T, T)>,
    thresholds: ConfinementThresholds<T>,
) -> Result<ConfinementReport<T>>
where
    Complex<T>: Field<Real = T>,
{
    let outside_fraction: Vec<T> = traj
        .mass
        .iter()
        .zip(&traj.outside_mass)
        .map(|(m, o)| if *m == T::zero() { T::zero() } else { *o / *m })
        .collect();
    let mut fits = Vec::with_capacity(fit_times.len());
    for &t in fit_times {
        let k = (0..traj.times.len())
            .min_by(|&a, &b| {
                (traj.times[a] - t)
                    .abs()
                    .partial_cmp(&(traj.times[b] - t).abs())
                    .expect("finite times")
            })
            .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
        let state = match embedding {
            Some(e) => e.restrict(&traj.states[k])?,
            None => traj.states[k].clone(),
        };
        let modulus = state.abs();
        let w = window.unwrap_or_else(|| crate::spectral::default_window(modulus.mesh()));
        fits.push((traj.times[k], flatness_fit(&modulus, w)?));
    }
    let max_outside_fraction = outside_fraction.iter().copied().fold(T::zero(), T::max);
    let min_exponent = fits.iter().map(|(_, f)| f.exponent).fold(T::infinity(), T::min);
    Ok(ConfinementReport {
        pass: max_outside_fraction <= thresholds.max_outside_fraction && min_exponent >= thresholds.min_exponent,
        times: traj.times.clone(),
        outside_fraction,
        fits,
        max_outside_fraction,
        min_exponent,
    })
}
