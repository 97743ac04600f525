//! Truncated approximation of the stationary problem `A u = f` and the
//! measurements built on it: weighted estimates, weak residuals, the Kato
//! margin and the maximum principle.

use std::sync::Arc;

use thiserror::Error as ThisError;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::SolverOptions;
use crate::mesh::Mesh;
use crate::model::{sample_flow, sample_potential, truncate, truncate_rhs, FlowSpec, PotentialSpec};
use crate::operator::{assemble, DiscreteOperator};
use crate::rearrange::{gradient, lorentz_norm, weighted_norm};
use crate::scalar::{from_usize, lit, RealScalar};

/// Boundary-distance field `δ` of a mesh as a grid function.
pub fn distance_function<T: RealScalar>(mesh: &Arc<Mesh<T>>) -> GridFunction<T> {
    GridFunction::new(mesh, mesh.delta().to_vec()).expect("one value per cell")
}

/// Weak-type exponent `n′ = n/(n−1)`; infinite in 1D.
pub fn weak_exponent<T: RealScalar>(dim: usize) -> T {
    if dim <= 1 {
        T::infinity()
    } else {
        let n = from_usize::<T>(dim);
        n / (n - T::one())
    }
}

/// `∫ V|u|δ^α`.
pub fn weighted_potential_integral<T: RealScalar>(
    u: &GridFunction<T>,
    potential: &GridFunction<T>,
    alpha: T,
) -> Result<T> {
    let vu = potential.zip_map(u, |v, x| v * x.abs())?;
    weighted_norm(&vu, &distance_function(u.mesh()), alpha)
}

/// `∫ |f|δ^α`.
pub fn weighted_source_integral<T: RealScalar>(f: &GridFunction<T>, alpha: T) -> Result<T> {
    weighted_norm(f, &distance_function(f.mesh()), alpha)
}

/// Settings for [`solve_truncated_sequence`].
#[derive(Debug, Clone, Copy)]
pub struct SequenceOptions {
    /// Convergence is declared once `‖u_j − u_prev‖∞ ≤ tolerance·‖f‖∞`.
    pub convergence_tolerance: f64,
    pub solver: SolverOptions,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            convergence_tolerance: 1e-8,
            solver: SolverOptions::default(),
        }
    }
}

/// Per-level measurements of a truncated solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDiagnostics<T> {
    pub j: T,
    /// `∫ V_j|u_j|δ`.
    pub weighted_potential: T,
    /// `∫ |f_j|δ`.
    pub weighted_source: T,
    /// `‖u_j‖_{n′,∞}`.
    pub weak_norm: T,
    /// `‖u_j − u_prev‖∞`, absent at the first level.
    pub successive_difference: Option<T>,
}

impl<T: RealScalar> LevelDiagnostics<T> {
    /// `∫V_j|u_j|δ ÷ ∫|f_j|δ`, zero when both vanish.
    pub fn estimate_ratio(&self) -> T {
        safe_ratio(self.weighted_potential, self.weighted_source)
    }
}

fn safe_ratio<T: RealScalar>(num: T, den: T) -> T {
    if den == T::zero() {
        if num == T::zero() {
            T::zero()
        } else {
            T::infinity()
        }
    } else {
        num / den
    }
}

/// Solutions `u_j` of the truncated problems over a schedule of levels.
#[derive(Debug, Clone)]
pub struct ApproximationRun<T: RealScalar> {
    pub j_schedule: Vec<T>,
    pub iterates: Vec<GridFunction<T>>,
    pub diagnostics: Vec<LevelDiagnostics<T>>,
    /// Index of the first level whose successive difference met the tolerance.
    pub converged_at: Option<usize>,
    /// `‖U‖∞` of the sampled flow (the flow is bounded, so `U_j = U`).
    pub flow_norm: T,
}

impl<T: RealScalar> ApproximationRun<T> {
    pub fn is_converged(&self) -> bool {
        self.converged_at.is_some()
    }

    /// Smallest `c` with `∫V_j|u_j|δ ≤ c(1 + ‖U‖)∫|f_j|δ` at every level.
    pub fn estimate_constant(&self) -> T {
        self.diagnostics
            .iter()
            .map(|d| d.estimate_ratio() / (T::one() + self.flow_norm))
            .fold(T::zero(), T::max)
    }

    pub fn last(&self) -> Option<&GridFunction<T>> {
        self.iterates.last()
    }
}

/// Failure inside a truncated sequence, carrying the levels solved so far.
#[derive(Debug, ThisError)]
#[error("truncated solve failed at level j = {level}: {source}")]
pub struct SequenceError<T: RealScalar> {
    pub level: f64,
    pub partial: Box<ApproximationRun<T>>,
    #[source]
    pub source: Error,
}

/// Solves `−Δu_j + U·∇u_j + V_j u_j = f_j` for every `j` of the schedule.
pub fn solve_truncated_sequence<T: RealScalar>(
    mesh: &Arc<Mesh<T>>,
    potential: &PotentialSpec<T>,
    flow: &FlowSpec<T>,
    f: &GridFunction<T>,
    j_schedule: &[T],
    options: &SequenceOptions,
) -> std::result::Result<ApproximationRun<T>, SequenceError<T>> {
    let mut run = ApproximationRun {
        j_schedule: j_schedule.to_vec(),
        iterates: Vec::new(),
        diagnostics: Vec::new(),
        converged_at: None,
        flow_norm: T::zero(),
    };
    let fail = |run: ApproximationRun<T>, level: T, source: Error| SequenceError {
        level: level.to_f64().unwrap_or(f64::NAN),
        partial: Box::new(run),
        source,
    };
    let first = j_schedule.first().copied().unwrap_or_else(T::nan);
    if j_schedule.is_empty() {
        return Err(fail(run, first, Error::InvalidArgument("empty truncation schedule".into())));
    }
    if j_schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(fail(
            run,
            first,
            Error::InvalidArgument("truncation schedule must be strictly increasing".into()),
        ));
    }
    if let Err(e) = f.check_mesh(mesh).and_then(|_| f.check_finite()) {
        return Err(fail(run, first, e));
    }
    let flow_field = match sample_flow(flow, mesh) {
        Ok(fl) => fl,
        Err(e) => return Err(fail(run, first, e)),
    };
    run.flow_norm = flow_field.cell_velocity().magnitude().max_abs();
    let f_scale = f.max_abs();
    let tol = lit::<T>(options.convergence_tolerance) * f_scale;
    let p = weak_exponent::<T>(mesh.dim());
    for &j in j_schedule {
        let level = (|| -> Result<(GridFunction<T>, LevelDiagnostics<T>)> {
            let vj = sample_potential(&truncate(potential, j)?, mesh)?;
            let fj = truncate_rhs(f, j)?;
            let op = assemble(mesh, &vj, &flow_field)?;
            let u = op.factor(options.solver)?.solve(&fj)?;
            let diag = LevelDiagnostics {
                j,
                weighted_potential: weighted_potential_integral(&u, &vj, T::one())?,
                weighted_source: weighted_source_integral(&fj, T::one())?,
                weak_norm: lorentz_norm(&u, p, T::infinity())?,
                successive_difference: None,
            };
            Ok((u, diag))
        })();
        let (u, mut diag) = match level {
            Ok(x) => x,
            Err(e) => return Err(fail(run, j, e)),
        };
        if let Some(prev) = run.iterates.last() {
            let d = u.sub(prev).expect("same mesh").max_abs();
            diag.successive_difference = Some(d);
            if run.converged_at.is_none() && d <= tol {
                run.converged_at = Some(run.iterates.len());
            }
        }
        run.iterates.push(u);
        run.diagnostics.push(diag);
    }
    Ok(run)
}

/// One weighted estimate `∫V|u|δ^α ≤ ratio·∫|f|δ^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedRatio<T> {
    pub alpha: T,
    pub lhs: T,
    pub rhs: T,
    pub ratio: T,
}

/// Measured sides of the weighted estimates for one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport<T> {
    /// Ratios for `α = 0`, the requested `α`, and `α = 1`.
    pub ratios: Vec<WeightedRatio<T>>,
    /// `‖u‖_{n′,∞}`.
    pub weak_norm: T,
    /// `‖∇u‖_{n′,∞}` in 2D, `‖∇u‖∞` in 1D.
    pub gradient_norm: T,
    /// `‖∇u‖ ÷ ∫|f|`.
    pub gradient_ratio: T,
    pub flow_norm_proxy: T,
    pub ceiling: T,
    pub violation: bool,
}

/// Measures the weighted estimates for a solution `u` of `Au = f`.
///
/// A violation is flagged when any ratio exceeds `ceiling·(1 + flow_norm_proxy)`.
pub fn verify_estimates<T: RealScalar>(
    u: &GridFunction<T>,
    potential: &GridFunction<T>,
    f: &GridFunction<T>,
    alpha: T,
    flow_norm_proxy: T,
    ceiling: T,
) -> Result<EstimateReport<T>> {
    u.check_same(potential)?;
    u.check_same(f)?;
    let mut ratios = Vec::with_capacity(3);
    for a in [T::zero(), alpha, T::one()] {
        let lhs = weighted_potential_integral(u, potential, a)?;
        let rhs = weighted_source_integral(f, a)?;
        ratios.push(WeightedRatio {
            alpha: a,
            lhs,
            rhs,
            ratio: safe_ratio(lhs, rhs),
        });
    }
    let p = weak_exponent::<T>(u.mesh().dim());
    let weak_norm = lorentz_norm(u, p, T::infinity())?;
    let grad = gradient(u).magnitude();
    let gradient_norm = lorentz_norm(&grad, p, T::infinity())?;
    let gradient_ratio = safe_ratio(gradient_norm, f.norm_l1());
    let limit = ceiling * (T::one() + flow_norm_proxy);
    let violation = ratios.iter().any(|r| r.ratio > limit);
    Ok(EstimateReport {
        ratios,
        weak_norm,
        gradient_norm,
        gradient_ratio,
        flow_norm_proxy,
        ceiling,
        violation,
    })
}

/// Test function `φ`, optionally multiplied by the boundary cutoff `h_j`.
#[derive(Debug, Clone)]
pub struct TestFunction<T: RealScalar> {
    pub base: GridFunction<T>,
    pub cutoff_level: Option<T>,
    values: GridFunction<T>,
}

impl<T: RealScalar> TestFunction<T> {
    pub fn uncut(phi: &GridFunction<T>) -> Self {
        TestFunction {
            base: phi.clone(),
            cutoff_level: None,
            values: phi.clone(),
        }
    }

    /// Cellwise values of `h_j·φ` (or `φ`).
    pub fn values(&self) -> &GridFunction<T> {
        &self.values
    }
}

/// Quintic smoothstep: 0 below 1, 1 above 2.
pub fn smoothstep<T: RealScalar>(s: T) -> T {
    let t = (s - T::one()).max(T::zero()).min(T::one());
    t * t * t * (t * (t * lit(6.0) - lit(15.0)) + lit(10.0))
}

/// `h_j(x) = h((δ − 1/j)·j)`: zero for `δ ≤ 2/j`, one for `δ ≥ 3/j`.
pub fn cutoff<T: RealScalar>(delta: T, j: T) -> T {
    smoothstep((delta - T::one() / j) * j)
}

/// Multiplies `φ` by `h_j`. The transition band `2/j ≤ δ ≤ 3/j` must span
/// at least three cells.
pub fn make_cutoff_test<T: RealScalar>(phi: &GridFunction<T>, j: T, mesh: &Arc<Mesh<T>>) -> Result<TestFunction<T>> {
    phi.check_mesh(mesh)?;
    if !(j > T::zero() && j.is_finite()) {
        return Err(Error::InvalidArgument(format!("cutoff level j = {j} must be > 0")));
    }
    let band = T::one() / j;
    if band < lit::<T>(3.0) * mesh.max_spacing() {
        return Err(Error::InvalidArgument(format!(
            "cutoff band 1/j = {band} is narrower than three cells"
        )));
    }
    let values = phi.zip_map(&distance_function(mesh), |p, d| p * cutoff(d, j))?;
    Ok(TestFunction {
        base: phi.clone(),
        cutoff_level: Some(j),
        values,
    })
}

/// `|∫u(L*φ + Vφ) − ∫fφ|`.
pub fn weak_residual<T: RealScalar>(
    op: &DiscreteOperator<T>,
    u: &GridFunction<T>,
    f: &GridFunction<T>,
    phi: &TestFunction<T>,
) -> Result<T> {
    let phi = phi.values();
    let lphi = op.apply_adjoint(phi, true)?;
    Ok((u.inner(&lphi)? - f.inner(phi)?).abs())
}

/// Sides of the Kato-type inequality `∫|ū|L*φ ≤ ∫φ sign(ū) Lū`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatoMargin<T> {
    /// `∫|ū|L*φ`.
    pub lhs: T,
    /// `∫φ sign(ū) Lū`.
    pub rhs: T,
    /// `rhs − lhs`.
    pub margin: T,
    /// Magnitude against which the margin is judged.
    pub scale: T,
}

/// Evaluates the Kato margin with `Lū = f − Vū`.
pub fn kato_margin<T: RealScalar>(
    op: &DiscreteOperator<T>,
    u_bar: &GridFunction<T>,
    phi: &GridFunction<T>,
    f: &GridFunction<T>,
) -> Result<KatoMargin<T>> {
    u_bar.check_mesh(op.mesh())?;
    phi.check_mesh(op.mesh())?;
    f.check_mesh(op.mesh())?;
    if let Some((cell, &v)) = phi.values().iter().enumerate().find(|(_, v)| **v < T::zero()) {
        return Err(Error::NegativeValue {
            cell,
            value: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    let l_u = f.zip_map(&op.potential().zip_map(u_bar, |v, x| v * x)?, |a, b| a - b)?;
    let signed = GridFunction::new(
        op.mesh(),
        u_bar
            .values()
            .iter()
            .zip(l_u.values())
            .map(|(&x, &l)| signum0(x) * l)
            .collect(),
    )?;
    let rhs = phi.inner(&signed)?;
    let lhs = u_bar.abs().inner(&op.apply_adjoint(phi, false)?)?;
    let scale = phi.max_abs() * (l_u.norm_l1() + op.principal_part().abs_mul(u_bar.values()).iter().copied().sum::<T>() * op.mesh().cell_volume());
    Ok(KatoMargin {
        lhs,
        rhs,
        margin: rhs - lhs,
        scale,
    })
}

fn signum0<T: RealScalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Outcome of a maximum-principle check for `f ≤ 0`.
#[derive(Debug, Clone)]
pub struct MaximumPrincipleReport<T: RealScalar> {
    pub solution: GridFunction<T>,
    pub max_value: T,
    pub threshold: T,
    pub pass: bool,
}

/// Solves `Au = f` with `f ≤ 0` and checks `max u ≤ 1e−12·‖f‖∞`.
pub fn maximum_principle_check<T: RealScalar>(
    op: &DiscreteOperator<T>,
    f: &GridFunction<T>,
) -> Result<MaximumPrincipleReport<T>> {
    f.check_mesh(op.mesh())?;
    if let Some(cell) = f.values().iter().position(|&v| v > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "maximum principle needs f ≤ 0; f is positive at cell {cell}"
        )));
    }
    let solution = op.factor(SolverOptions::default())?.solve(f)?;
    let max_value = solution.max();
    let threshold = lit::<T>(1e-12) * f.max_abs();
    Ok(MaximumPrincipleReport {
        pass: max_value <= threshold,
        solution,
        max_value,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FlowField;
    use crate::rearrange::weighted_lp_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn line(n: usize) -> Arc<Mesh<f64>> {
        Arc::new(Mesh::build_interval(0.0, 1.0, n).unwrap())
    }

    fn inverse_square(c: f64) -> PotentialSpec<f64> {
        PotentialSpec::new(c, 2.0).unwrap()
    }

    fn solve(mesh: &Arc<Mesh<f64>>, v: &GridFunction<f64>, f: &GridFunction<f64>) -> (DiscreteOperator<f64>, GridFunction<f64>) {
        let op = assemble(mesh, v, &FlowField::zero(mesh)).unwrap();
        let u = op.factor(SolverOptions::default()).unwrap().solve(f).unwrap();
        (op, u)
    }

    #[test]
    fn saturated_truncation_is_inactive() {
        let m = line(200);
        let spec = PotentialSpec::new(0.0, 0.0).unwrap().with_offset(3.0);
        let f = GridFunction::<f64>::from_fn(&m, |p| (PI * p[0]).sin());
        let run = solve_truncated_sequence(&m, &spec, &FlowSpec::Zero, &f, &[5.0, 10.0], &Default::default()).unwrap();
        assert_eq!(run.iterates[0].values(), run.iterates[1].values());
        assert_eq!(run.converged_at, Some(1));
    }

    #[test]
    fn zero_source_gives_zero_iterates() {
        let m = line(100);
        let f = GridFunction::zeros(&m);
        let run = solve_truncated_sequence(&m, &inverse_square(2.0), &FlowSpec::Zero, &f, &[1e2, 1e3], &Default::default()).unwrap();
        assert!(run.iterates.iter().all(|u| u.max_abs() == 0.0));
        assert!(run.diagnostics.iter().all(|d| d.estimate_ratio() == 0.0));
    }

    #[test]
    fn truncated_sequence_is_cauchy() {
        let m = line(2000);
        let f = GridFunction::<f64>::from_fn(&m, |_| 1.0);
        let run = solve_truncated_sequence(&m, &inverse_square(2.0), &FlowSpec::Zero, &f, &[1e2, 1e3, 1e4, 1e5], &Default::default()).unwrap();
        let d: Vec<f64> = run.diagnostics.iter().filter_map(|d| d.successive_difference).collect();
        assert_eq!(d.len(), 3);
        assert!(d[2] < d[1] && d[1] < d[0]);
        assert!(run.estimate_constant().is_finite());
    }

    #[test]
    fn bad_schedules_are_rejected() {
        let m = line(10);
        let f = GridFunction::zeros(&m);
        let spec = inverse_square(1.0);
        assert!(solve_truncated_sequence(&m, &spec, &FlowSpec::Zero, &f, &[], &Default::default()).is_err());
        let e = solve_truncated_sequence(&m, &spec, &FlowSpec::Zero, &f, &[2.0, 1.0], &Default::default()).unwrap_err();
        assert!(e.partial.iterates.is_empty());
    }

    #[test]
    fn failure_reports_level() {
        let m = line(50);
        let f = GridFunction::<f64>::from_fn(&m, |_| 1.0);
        let spec = PotentialSpec::new(1.0, 2.0).unwrap().with_offset(-5.0);
        let e = solve_truncated_sequence(&m, &spec, &FlowSpec::Zero, &f, &[10.0, 20.0], &Default::default()).unwrap_err();
        assert_eq!(e.level, 10.0);
        assert!(matches!(e.source, Error::NegativeValue { .. }));
        assert!(e.partial.iterates.is_empty());
    }

    #[test]
    fn estimate_ratios_are_bounded_by_one() {
        let m = line(500);
        let v = sample_potential(&inverse_square(2.0), &m).unwrap();
        let f = GridFunction::<f64>::from_fn(&m, |_| 1.0);
        let (_, u) = solve(&m, &v, &f);
        let r = verify_estimates(&u, &v, &f, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(r.ratios.len(), 3);
        assert!(!r.violation, "{:?}", r.ratios);
        let zero = verify_estimates(&GridFunction::zeros(&m), &v, &GridFunction::zeros(&m), 0.5, 0.0, 1.0).unwrap();
        assert!(zero.ratios.iter().all(|r| r.lhs == 0.0));
    }

    #[test]
    fn alpha_one_ratio_is_mesh_stable() {
        let ratios: Vec<f64> = [500usize, 1000, 2000]
            .iter()
            .map(|&n| {
                let m = line(n);
                let v = sample_potential(&inverse_square(2.0), &m).unwrap();
                let f = GridFunction::<f64>::from_fn(&m, |_| 1.0);
                let (_, u) = solve(&m, &v, &f);
                verify_estimates(&u, &v, &f, 1.0, 0.0, 1.0).unwrap().ratios[2].ratio
            })
            .collect();
        let mean = ratios.iter().sum::<f64>() / 3.0;
        assert!(ratios.iter().all(|r| (r - mean).abs() <= 0.05 * mean), "{ratios:?}");
    }

    #[test]
    fn random_sources_respect_half_weight() {
        let m = line(400);
        let v = sample_potential(&inverse_square(2.0), &m).unwrap();
        let op = assemble(&m, &v, &FlowField::zero(&m)).unwrap();
        let solver = op.factor(SolverOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let f = GridFunction::new(&m, (0..400).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
            let u = solver.solve(&f).unwrap();
            worst = worst.max(verify_estimates(&u, &v, &f, 0.5, 0.0, 1.0).unwrap().ratios[1].ratio);
        }
        assert!(worst <= 1.0 + 1e-10, "{worst}");
    }

    #[test]
    fn cutoff_profile() {
        let m = line(1000);
        let phi = GridFunction::<f64>::from_fn(&m, |p| (PI * p[0]).sin());
        let j = 20.0;
        let t = make_cutoff_test(&phi, j, &m).unwrap();
        for (k, &d) in m.delta().iter().enumerate() {
            if d >= 3.0 / j {
                assert_eq!(t.values().values()[k], phi.values()[k]);
            }
            if d <= 2.0 / j {
                assert_eq!(t.values().values()[k], 0.0);
            }
        }
        assert!(make_cutoff_test(&phi, 400.0, &m).is_err());
        assert_eq!(smoothstep(1.5f64), 0.5);
    }

    #[test]
    fn cutoff_error_halves_with_doubling_j() {
        let m = line(4000);
        let phi = GridFunction::<f64>::from_fn(&m, |p| (PI * p[0]).sin());
        let err = |j: f64| make_cutoff_test(&phi, j, &m).unwrap().values().sub(&phi).unwrap().max_abs();
        for j in [10.0, 20.0, 40.0] {
            let ratio = err(j) / err(2.0 * j);
            assert!((ratio - 2.0).abs() <= 0.4, "j={j}: {ratio}");
        }
    }

    #[test]
    fn weak_residual_vanishes_for_discrete_solutions() {
        let m = line(300);
        let v = sample_potential(&truncate(&inverse_square(2.0), 1e4).unwrap(), &m).unwrap();
        let f = GridFunction::<f64>::from_fn(&m, |p| 1.0 + p[0]);
        let (op, u) = solve(&m, &v, &f);
        let phi = GridFunction::<f64>::from_fn(&m, |p| (PI * p[0]).sin());
        let test = TestFunction::uncut(&phi);
        let r = weak_residual(&op, &u, &f, &test).unwrap();
        assert!(r <= 1e-8 * (f.norm_l1() + u.norm_l1()));
        let mut bumped = u.clone();
        bumped.values_mut()[150] += 1.0;
        let jump = weak_residual(&op, &bumped, &f, &test).unwrap();
        let expect = op.apply_adjoint(&phi, true).unwrap().values()[150].abs() * m.cell_volume();
        assert!((jump - r - expect).abs() <= 1e-8 * expect.max(1.0) || (jump + r - expect).abs() <= 1e-8 * expect.max(1.0));
    }

    #[test]
    fn kato_margin_cases() {
        let m = line(200);
        let spec = inverse_square(2.0);
        let f = GridFunction::<f64>::from_fn(&m, |p| (6.0 * p[0]).sin() + 0.3);
        let phi = GridFunction::<f64>::from_fn(&m, |p| (PI * p[0]).sin());
        let v = sample_potential(&spec, &m).unwrap();
        let (op, u) = solve(&m, &v, &f);
        let k = kato_margin(&op, &u, &phi, &f).unwrap();
        assert!(k.margin >= -1e-8 * k.scale);
        let pos = GridFunction::<f64>::from_fn(&m, |_| 1.0);
        let (_, up) = solve(&m, &v, &pos);
        let kp = kato_margin(&op, &up, &phi, &pos).unwrap();
        assert!(kp.margin.abs() <= 1e-8 * kp.scale);
        let k0 = kato_margin(&op, &u, &GridFunction::zeros(&m), &f).unwrap();
        assert_eq!(k0.margin, 0.0);
        assert!(kato_margin(&op, &u, &phi.scaled(-1.0), &f).is_err());
    }

    #[test]
    fn kato_for_difference_of_levels() {
        let m = line(400);
        let spec = inverse_square(2.0);
        let f = GridFunction::<f64>::from_fn(&m, |p| (9.0 * p[0]).cos());
        let phi = GridFunction::<f64>::from_fn(&m, |p| (PI * p[0]).sin());
        let run = solve_truncated_sequence(&m, &spec, &FlowSpec::Zero, &f, &[1e3, 1e5], &Default::default()).unwrap();
        let v_hi = sample_potential(&truncate(&spec, 1e5).unwrap(), &m).unwrap();
        let v_lo = sample_potential(&truncate(&spec, 1e3).unwrap(), &m).unwrap();
        let u_bar = run.iterates[1].sub(&run.iterates[0]).unwrap();
        // L ū + V_hi ū = (V_lo − V_hi) u_lo.
        let rhs = v_lo.sub(&v_hi).unwrap().zip_map(&run.iterates[0], |a, b| a * b).unwrap();
        let op = assemble(&m, &v_hi, &FlowField::zero(&m)).unwrap();
        let k = kato_margin(&op, &u_bar, &phi, &rhs).unwrap();
        assert!(k.margin >= -1e-8 * k.scale, "{k:?}");
    }

    #[test]
    fn maximum_principle() {
        let m = line(50);
        let v = sample_potential(&inverse_square(2.0), &m).unwrap();
        let op = assemble(&m, &v, &FlowField::zero(&m)).unwrap();
        let r = maximum_principle_check(&op, &GridFunction::<f64>::from_fn(&m, |_| -1.0)).unwrap();
        assert!(r.pass && r.max_value <= 1e-12);
        let z = maximum_principle_check(&op, &GridFunction::zeros(&m)).unwrap();
        assert!(z.pass && z.solution.max_abs() == 0.0);
        assert!(maximum_principle_check(&op, &GridFunction::<f64>::from_fn(&m, |_| 1.0)).is_err());
        let sq = Arc::new(Mesh::build_rectangle(1.0, 1.0, 40, 40).unwrap());
        let flow = sample_flow(&FlowSpec::cellular(5.0, sq.domain()), &sq).unwrap();
        let op2 = assemble(&sq, &GridFunction::zeros(&sq), &flow).unwrap();
        let f = GridFunction::<f64>::from_fn(&sq, |p| -(PI * p[0]).sin() * (PI * p[1]).sin());
        assert!(maximum_principle_check(&op2, &f).unwrap().pass);
    }

    #[test]
    fn half_weight_matches_lp_helper() {
        let m = line(64);
        let u = GridFunction::<f64>::from_fn(&m, |p| p[0]);
        let one = GridFunction::<f64>::from_fn(&m, |_| 1.0);
        let a = weighted_potential_integral(&u, &one, 0.5).unwrap();
        let b = weighted_lp_norm(&u, &distance_function(&m), 0.5, 1.0).unwrap();
        assert!((a - b).abs() <= 1e-14);
    }
}
