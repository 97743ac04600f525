//! Principal and low eigenpairs of the discrete operator, and boundary-decay
//! fits of eigenfunctions.


use nalgebra::{Complex, DMatrix, Schur, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{CsrMatrix, SolverOptions};
use crate::mesh::Mesh;
use crate::operator::DiscreteOperator;
use crate::scalar::{from_usize, lit, RealScalar};

/// Stopping rules for the eigen-solvers.
#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Target relative residual `‖Au − λu‖₂ / |λ|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest `|Im λ| / |λ|` for a Ritz value to count as real.
    pub imaginary_tolerance: f64,
    pub solver: SolverOptions,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tolerance: 1e-10,
            max_iterations: 10_000,
            imaginary_tolerance: 1e-8,
            solver: SolverOptions::default(),
            seed: 0x5eed,
        }
    }
}

/// Relative residual `‖Au − λu‖₂/|λ|` together with its rounding floor
/// `16·ε·‖|A||u|‖₂/|λ|`.
fn eigen_residual<T: RealScalar>(a: &CsrMatrix<T>, u: &[T], lambda: T) -> (T, T) {
    let au = a.apply(u);
    let mag = a.abs_mul(u);
    let norm = |v: &mut dyn Iterator<Item = T>| v.map(|x| x * x).sum::<T>().sqrt();
    let un = norm(&mut u.iter().copied());
    let r = norm(&mut au.iter().zip(u).map(|(&x, &y)| x - lambda * y));
    let m = norm(&mut mag.into_iter());
    let l = lambda.abs().max(T::min_positive_value());
    (r / (un * l), lit::<T>(16.0) * T::epsilon() * m / (un * l))
}

fn l2_normalize<T: RealScalar>(mesh: &Mesh<T>, v: &mut [T]) {
    let n = (v.iter().map(|&x| x * x).sum::<T>() * mesh.cell_volume()).sqrt();
    if n > T::zero() {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Flips the sign so the sum (or, failing that, the largest entry) is positive.
fn orient<T: RealScalar>(v: &mut [T]) {
    let s: T = v.iter().copied().sum();
    let flip = if s != T::zero() {
        s < T::zero()
    } else {
        let big = v.iter().copied().fold(T::zero(), |m, x| if x.abs() > m.abs() { x } else { m });
        big < T::zero()
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Principal eigenpair with convergence data.
#[derive(Debug, Clone)]
pub struct PrincipalPair<T: RealScalar> {
    pub lambda: T,
    /// Normalised to `‖ψ‖_{L²} = 1` with nonnegative entries.
    pub psi: GridFunction<T>,
    /// Relative residual `‖Aψ − λψ‖₂/|λ|`.
    pub residual: T,
    pub iterations: usize,
    /// `min ψ / max ψ`.
    pub min_ratio: T,
}

/// Power iteration on `(I + A)^{-1}` from a positive start.
pub fn principal_eigenpair<T: RealScalar>(op: &DiscreteOperator<T>, options: &EigenOptions) -> Result<PrincipalPair<T>> {
    let mesh = op.mesh();
    let a = op.matrix();
    let res = op.resolvent(T::one(), options.solver)?;
    let mut v = vec![T::one(); mesh.len()];
    l2_normalize(mesh, &mut v);
    let tol = lit::<T>(options.tolerance);
    let mut residual = T::infinity();
    for it in 1..=options.max_iterations {
        let mut w = res.solve_values(&v)?;
        let vw: T = v.iter().zip(&w).map(|(&x, &y)| x * y).sum();
        let ww: T = w.iter().map(|&y| y * y).sum();
        let lambda = vw / ww - T::one();
        l2_normalize(mesh, &mut w);
        v = w;
        let (r, floor) = eigen_residual(a, &v, lambda);
        residual = r;
        if r <= tol.max(floor) {
            return finish_principal(op, v, lambda, r, it);
        }
    }
    Err(Error::NotConverged {
        iterations: options.max_iterations,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

fn finish_principal<T: RealScalar>(
    op: &DiscreteOperator<T>,
    mut v: Vec<T>,
    lambda: T,
    residual: T,
    iterations: usize,
) -> Result<PrincipalPair<T>> {
    orient(&mut v);
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    let min = v.iter().copied().fold(T::infinity(), T::min);
    let min_ratio = min / max;
    if min < T::zero() {
        return Err(Error::PerronViolation {
            ratio: min_ratio.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(PrincipalPair {
        lambda,
        psi: GridFunction::new(op.mesh(), v)?,
        residual,
        iterations,
        min_ratio,
    })
}

/// Low end of the spectrum.
#[derive(Debug, Clone)]
pub struct EigenSystem<T: RealScalar> {
    /// Real eigenvalues in ascending order. Fewer than requested when some of
    /// the lowest Ritz values form complex pairs.
    pub eigenvalues: Vec<T>,
    /// Eigenfunctions with `‖u_m‖_{L²} = 1`; the first is nonnegative.
    pub eigenfunctions: Vec<GridFunction<T>>,
    /// Relative residuals `‖Au_m − λ_m u_m‖₂/|λ_m|`.
    pub residuals: Vec<T>,
    /// Ritz values with non-negligible imaginary part, ascending by real part.
    pub complex_pairs: Vec<Complex<f64>>,
    pub iterations: usize,
    pub symmetric: bool,
}

impl<T: RealScalar> EigenSystem<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max |⟨u_i, u_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.eigenfunctions.iter().enumerate() {
            for (j, b) in self.eigenfunctions.iter().enumerate().skip(i) {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((a.inner(b).expect("shared mesh") - target).abs());
            }
        }
        worst
    }
}

fn dot<T: RealScalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Modified Gram–Schmidt, applied twice.
fn orthonormalize<T: RealScalar>(cols: &mut [Vec<T>]) -> Result<()> {
    for k in 0..cols.len() {
        for _ in 0..2 {
            for j in 0..k {
                let (head, tail) = cols.split_at_mut(k);
                let c = dot(&head[j], &tail[0]);
                tail[0].iter_mut().zip(&head[j]).for_each(|(x, &y)| *x -= c * y);
            }
        }
        let n = dot(&cols[k], &cols[k]).sqrt();
        if !(n > T::zero()) {
            return Err(Error::NotOrthonormal {
                defect: f64::INFINITY,
            });
        }
        cols[k].iter_mut().for_each(|x| *x /= n);
    }
    Ok(())
}

fn combine<T: RealScalar>(cols: &[Vec<T>], coef: &[f64]) -> Vec<T> {
    let mut out = vec![T::zero(); cols[0].len()];
    for (c, &w) in cols.iter().zip(coef) {
        let w = lit::<T>(w);
        out.iter_mut().zip(c).for_each(|(o, &x)| *o += w * x);
    }
    out
}

/// Null vector of a small real matrix via its smallest singular value.
fn null_vector(m: DMatrix<f64>) -> Vec<f64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    v_t.row(k).iter().copied().collect()
}

/// Relative residual and rounding floor of the complex Ritz pair `(μ, Xy)`.
fn complex_residual<T: RealScalar>(a: &CsrMatrix<T>, x: &[Vec<T>], h: &DMatrix<f64>, mu: Complex<f64>) -> (f64, f64) {
    let b = h.nrows();
    let shifted = h.map(|v| Complex::new(v, 0.0)) - DMatrix::<Complex<f64>>::identity(b, b) * mu;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(q.1))
        .expect("nonempty");
    let y: Vec<Complex<f64>> = v_t.row(k).iter().map(|c| c.conj()).collect();
    let re = combine(x, &y.iter().map(|c| c.re).collect::<Vec<_>>());
    let im = combine(x, &y.iter().map(|c| c.im).collect::<Vec<_>>());
    let (are, aim) = (a.apply(&re), a.apply(&im));
    let (mre, mim) = (a.abs_mul(&re), a.abs_mul(&im));
    let f = |t: T| t.to_f64().unwrap_or(f64::NAN);
    let mut r2 = 0.0;
    let mut u2 = 0.0;
    let mut m2 = 0.0;
    for i in 0..re.len() {
        let u = Complex::new(f(re[i]), f(im[i]));
        let au = Complex::new(f(are[i]), f(aim[i]));
        r2 += (au - mu * u).norm_sqr();
        u2 += u.norm_sqr();
        m2 += f(mre[i]).powi(2) + f(mim[i]).powi(2);
    }
    let l = mu.norm() * u2.sqrt();
    (r2.sqrt() / l, 16.0 * f64::EPSILON * m2.sqrt() / l)
}

/// The `m_max` smallest eigenpairs by shift-invert block subspace iteration
/// with Rayleigh–Ritz extraction.
pub fn eigen_spectrum<T: RealScalar>(op: &DiscreteOperator<T>, m_max: usize, options: &EigenOptions) -> Result<EigenSystem<T>> {
    let mesh = op.mesh();
    let n = mesh.len();
    if m_max == 0 || 4 * m_max > n {
        return Err(Error::InvalidArgument(format!(
            "m_max = {m_max} must be between 1 and a quarter of the {n} cells"
        )));
    }
    let symmetric = !op.has_flow();
    let block = (2 * m_max + 4).min(n / 2);
    let a = op.matrix();
    let solver = op.factor(options.solver)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut x: Vec<Vec<T>> = (0..block)
        .map(|_| (0..n).map(|_| lit::<T>(rng.gen_range(-1.0..1.0))).collect())
        .collect();
    orthonormalize(&mut x)?;
    let tol = lit::<T>(options.tolerance);
    let imag_tol = options.imaginary_tolerance;
    let mut worst = T::infinity();
    for it in 1..=options.max_iterations {
        let mut y = x
            .iter()
            .map(|c| solver.solve_values(c))
            .collect::<Result<Vec<_>>>()?;
        orthonormalize(&mut y)?;
        x = y;
        let ax: Vec<Vec<T>> = x.iter().map(|c| a.apply(c)).collect();
        let h = DMatrix::from_fn(block, block, |i, j| dot(&x[i], &ax[j]).to_f64().unwrap_or(f64::NAN));
        let mut values = Vec::new();
        let mut vectors = Vec::new();
        let mut complex_pairs = Vec::new();
        let mut residuals = Vec::with_capacity(m_max);
        let mut done = true;
        worst = T::zero();
        if symmetric {
            let hs = (&h + h.transpose()) * 0.5;
            let eig = SymmetricEigen::new(hs);
            let mut idx: Vec<usize> = (0..block).collect();
            idx.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
            x = idx
                .iter()
                .map(|&k| combine(&x, eig.eigenvectors.column(k).as_slice()))
                .collect();
            for (pos, &k) in idx.iter().enumerate().take(m_max) {
                values.push(eig.eigenvalues[k]);
                vectors.push(x[pos].clone());
            }
        } else {
            let mut ritz: Vec<Complex<f64>> = Schur::new(h.clone()).complex_eigenvalues().iter().copied().collect();
            ritz.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
            let mut taken = 0;
            for mu in ritz {
                if taken >= m_max {
                    break;
                }
                if mu.im.abs() > imag_tol * mu.norm() {
                    // Each conjugate pair is judged once, through its upper member.
                    if mu.im > 0.0 {
                        let (r, floor) = complex_residual(a, &x, &h, mu);
                        let r = lit::<T>(r);
                        worst = worst.max(r);
                        done &= r <= tol.max(lit(floor));
                        complex_pairs.push(mu);
                        taken += 2;
                    }
                    continue;
                }
                let shifted = &h - DMatrix::identity(block, block) * mu.re;
                values.push(mu.re);
                vectors.push(combine(&x, &null_vector(shifted)));
                taken += 1;
            }
        }
        for (v, &mu) in vectors.iter().zip(&values) {
            let (r, floor) = eigen_residual(a, v, lit::<T>(mu));
            residuals.push(r);
            worst = worst.max(r);
            done &= r <= tol.max(floor);
        }
        if done {
            let mut eigenfunctions = Vec::with_capacity(values.len());
            for (m, mut v) in vectors.into_iter().enumerate() {
                l2_normalize(mesh, &mut v);
                orient(&mut v);
                if m == 0 && v.iter().any(|&z| z < T::zero()) {
                    let max = v.iter().copied().fold(T::zero(), T::max);
                    let min = v.iter().copied().fold(T::zero(), T::min);
                    return Err(Error::PerronViolation {
                        ratio: (min / max).to_f64().unwrap_or(f64::NAN),
                    });
                }
                eigenfunctions.push(GridFunction::new(mesh, v)?);
            }
            let system = EigenSystem {
                eigenvalues: values.into_iter().map(lit::<T>).collect(),
                eigenfunctions,
                residuals,
                complex_pairs,
                iterations: it,
                symmetric,
            };
            if symmetric {
                let defect = system.orthonormality_defect();
                if defect > lit(1e-8) {
                    return Err(Error::NotOrthonormal {
                        defect: defect.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
            return Ok(system);
        }
    }
    Err(Error::NotConverged {
        iterations: options.max_iterations,
        residual: worst.to_f64().unwrap_or(f64::NAN),
    })
}

/// Indicial root `p = (1 + √(1 + 4C))/2` of `p(p−1) = C`.
pub fn indicial_exponent<T: RealScalar>(c: T) -> T {
    (T::one() + (T::one() + lit::<T>(4.0) * c).sqrt()) / lit(2.0)
}

/// Decay rate `K̂ = 2√C` of the model `−u″ + Cδ^{−r}u = λu` in the
/// normalisation `exp(−K̂ δ^{−(r−2)/2}/(r−2))`.
pub fn wkb_rate<T: RealScalar>(c: T) -> T {
    lit::<T>(2.0) * c.sqrt()
}

/// Default fitting window `[5h, 20h]`.
pub fn default_window<T: RealScalar>(mesh: &Mesh<T>) -> (T, T) {
    let h = mesh.max_spacing();
    (lit::<T>(5.0) * h, lit::<T>(20.0) * h)
}

/// Parameters of `|u| ≈ K̄ δ^{r/4} exp(−K̂ δ^{−(r−2)/2}/(r−2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialModel<T> {
    pub r: T,
    pub k_bar: T,
    pub k_hat: T,
}

/// Least-squares fit of boundary decay.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit<T> {
    pub window: (T, T),
    /// Fitted slope: `p̂` for the power model, `K̂` for the exponential model.
    /// Infinite when the function vanishes on the window.
    pub exponent: T,
    /// Half-width of the 95% confidence interval of the slope.
    pub half_width: T,
    pub intercept: T,
    pub r_squared: T,
    /// Root-mean-square fit residual.
    pub residual: T,
    /// Cells inside the window.
    pub cells: usize,
    /// Distinct δ-bins used in the regression.
    pub points: usize,
    pub exponential: Option<ExponentialModel<T>>,
}

/// `(δ, max |u|)` over cells in the window, one entry per distinct δ.
fn binned<T: RealScalar>(u: &GridFunction<T>, window: (T, T)) -> Result<(Vec<(T, T)>, usize)> {
    let mesh = u.mesh();
    let (lo, hi) = window;
    let lo_d = mesh.delta().iter().copied().fold(T::infinity(), T::min);
    let ext: T = {
        let l = mesh.domain().lower();
        let h = mesh.domain().upper();
        (0..mesh.dim()).map(|k| (h[k] - l[k]) * (h[k] - l[k])).sum::<T>().sqrt()
    };
    if !(lo < hi) || lo < lo_d * (T::one() - lit(1e-12)) || hi > ext / lit(4.0) {
        return Err(Error::InvalidArgument(format!(
            "window ({lo}, {hi}) must lie in [{lo_d}, {}]",
            ext / lit(4.0)
        )));
    }
    let mut pts: Vec<(T, T)> = mesh
        .delta()
        .iter()
        .zip(u.values())
        .filter(|(&d, _)| d >= lo && d <= hi)
        .map(|(&d, &v)| (d, v.abs()))
        .collect();
    let cells = pts.len();
    if cells < 10 {
        return Err(Error::WindowStarved { found: cells, needed: 10 });
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite δ"));
    let mut bins: Vec<(T, T)> = Vec::new();
    let rel = lit::<T>(1e-9);
    for (d, v) in pts {
        match bins.last_mut() {
            Some(last) if (d - last.0).abs() <= rel * d => last.1 = last.1.max(v),
            _ => bins.push((d, v)),
        }
    }
    Ok((bins, cells))
}

fn regress<T: RealScalar>(xy: &[(T, T)]) -> (T, T, T, T, T) {
    let n = from_usize::<T>(xy.len());
    let mx = xy.iter().map(|p| p.0).sum::<T>() / n;
    let my = xy.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: T = xy.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: T = xy
        .iter()
        .map(|p| {
            let e = p.1 - intercept - slope * p.0;
            e * e
        })
        .sum();
    let r2 = if syy > T::zero() { T::one() - sse / syy } else { T::one() };
    let dof = (n - lit(2.0)).max(T::one());
    let se = (sse / dof / sxx).sqrt();
    (slope, intercept, lit::<T>(1.96) * se, r2, (sse / n).sqrt())
}

fn fit<T: RealScalar>(
    u: &GridFunction<T>,
    window: (T, T),
    transform: impl Fn(T, T) -> (T, T),
    exponential_r: Option<T>,
) -> Result<DecayFit<T>> {
    let (bins, cells) = binned(u, window)?;
    let xy: Vec<(T, T)> = bins
        .iter()
        .filter(|(_, v)| *v > T::zero())
        .map(|&(d, v)| transform(d, v))
        .collect();
    if xy.len() < 3 {
        return Ok(DecayFit {
            window,
            exponent: T::infinity(),
            half_width: T::zero(),
            intercept: T::neg_infinity(),
            r_squared: T::zero(),
            residual: T::zero(),
            cells,
            points: xy.len(),
            exponential: None,
        });
    }
    let (slope, intercept, half_width, r_squared, residual) = regress(&xy);
    Ok(DecayFit {
        window,
        exponent: slope,
        half_width,
        intercept,
        r_squared,
        residual,
        cells,
        points: xy.len(),
        exponential: exponential_r.map(|r| ExponentialModel {
            r,
            k_bar: intercept.exp(),
            k_hat: slope,
        }),
    })
}

/// Fits `log|u| ≈ p̂ log δ + c` over cells with `δ` in the window; in 2D
/// the largest `|u|` per distinct `δ` is used.
pub fn flatness_fit<T: RealScalar>(u: &GridFunction<T>, window: (T, T)) -> Result<DecayFit<T>> {
    fit(u, window, |d, v| (d.ln(), v.ln()), None)
}

/// Fits `log|u| − (r/4)log δ ≈ log K̄ + K̂·(−δ^{−(r−2)/2}/(r−2))`.
pub fn exponential_fit<T: RealScalar>(u: &GridFunction<T>, r: T, window: (T, T)) -> Result<DecayFit<T>> {
    if !(r > lit(2.0)) {
        return Err(Error::InvalidArgument(format!("exponential model needs r > 2, got {r}")));
    }
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    fit(
        u,
        window,
        |d, v| (-(d.powf(-(r - two) / two)) / (r - two), v.ln() - r / four * d.ln()),
        Some(r),
    )
}

/// `(δ, |u|)` pairs of a grid function, ascending in δ.
pub fn boundary_profile<T: RealScalar>(u: &GridFunction<T>) -> Vec<(T, T)> {
    let mut pts: Vec<(T, T)> = u.mesh().delta().iter().copied().zip(u.values().iter().map(|v| v.abs())).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite δ").then(b.1.partial_cmp(&a.1).expect("finite")));
    pts
}
