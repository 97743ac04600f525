//! Measuring instruments: distribution functions, decreasing rearrangements,
//! Lorentz norms, weighted `L¹`/`Lᵖ` norms, discrete gradients and the Hardy
//! quotient.

use num_traits::{Float, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, VectorField};
use crate::scalar::{from_usize, lit, Field, RealScalar};

/// Measure of the super-level set `{u > t}`.
pub fn distribution_function<T: RealScalar>(u: &GridFunction<T>, t: T) -> T {
    let count = u.values().iter().filter(|&&v| v > t).count();
    from_usize::<T>(count) * u.mesh().cell_volume()
}

/// Decreasing rearrangement of `|u|` on `(0, |Ω|)`.
///
/// The rearrangement is a step function: piece `k` occupies
/// `[breakpoints[k], breakpoints[k+1])` with value `u_star[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement<T> {
    breakpoints: Vec<T>,
    u_star: Vec<T>,
    cumulative: Vec<T>,
    order: Vec<usize>,
}

impl<T: RealScalar> Rearrangement<T> {
    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    /// Non-increasing piece values.
    pub fn u_star(&self) -> &[T] {
        &self.u_star
    }

    /// `∫₀^{s_k} u_*` at every breakpoint.
    pub fn cumulative(&self) -> &[T] {
        &self.cumulative
    }

    /// Cell index that produced each piece.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Total measure `|Ω_*|`.
    pub fn measure(&self) -> T {
        *self.breakpoints.last().unwrap()
    }

    fn piece(&self, s: T) -> Option<usize> {
        if s < T::zero() || s >= self.measure() {
            return None;
        }
        let k = self.breakpoints.partition_point(|&b| b <= s);
        Some(k.saturating_sub(1).min(self.u_star.len() - 1))
    }

    pub fn u_star_at(&self, s: T) -> T {
        self.piece(s).map_or(T::zero(), |k| self.u_star[k])
    }

    /// Running average `(1/t) ∫₀ᵗ u_*`; `u_**(0⁺) = u_*(0)`.
    pub fn u_star_star_at(&self, t: T) -> T {
        if t <= T::zero() {
            return self.u_star.first().copied().unwrap_or_else(T::zero);
        }
        match self.piece(t) {
            Some(k) => (self.cumulative[k] + self.u_star[k] * (t - self.breakpoints[k])) / t,
            None => *self.cumulative.last().unwrap() / t,
        }
    }

    /// `u_**` at the right end of each piece.
    pub fn u_star_star(&self) -> Vec<T> {
        self.cumulative[1..]
            .iter()
            .zip(&self.breakpoints[1..])
            .map(|(&c, &s)| c / s)
            .collect()
    }

    /// Coefficients `(a, b)` with `u_**(t) = a + b/t` on piece `k`.
    fn affine_pieces(&self) -> impl Iterator<Item = (T, T, T, T)> + '_ {
        (0..self.u_star.len()).map(move |k| {
            let a = self.u_star[k];
            let s0 = self.breakpoints[k];
            let b = (self.cumulative[k] - a * s0).max(T::zero());
            (s0, self.breakpoints[k + 1], a, b)
        })
    }
}

/// Sorts `|u|` into non-increasing order, ties broken by cell index.
pub fn decreasing_rearrangement<S: Field>(u: &GridFunction<S>) -> Result<Rearrangement<S::Real>>
where
    S::Real: RealScalar,
{
    u.check_finite()?;
    let mags: Vec<S::Real> = u.values().iter().map(|v| v.modulus()).collect();
    let mut order: Vec<usize> = (0..mags.len()).collect();
    order.sort_by(|&i, &j| mags[j].partial_cmp(&mags[i]).unwrap().then(i.cmp(&j)));
    let vol = u.mesh().cell_volume();
    let n = order.len();
    let mut breakpoints = Vec::with_capacity(n + 1);
    let mut cumulative = Vec::with_capacity(n + 1);
    breakpoints.push(S::Real::zero());
    cumulative.push(S::Real::zero());
    let mut acc = S::Real::zero();
    let u_star: Vec<S::Real> = order.iter().map(|&i| mags[i]).collect();
    for (k, &v) in u_star.iter().enumerate() {
        acc += v * vol;
        breakpoints.push(from_usize::<S::Real>(k + 1) * vol);
        cumulative.push(acc);
    }
    Ok(Rearrangement {
        breakpoints,
        u_star,
        cumulative,
        order,
    })
}

// 10-point Gauss–Legendre rule on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn gauss_legendre<T: RealScalar>(lo: T, hi: T, f: impl Fn(T) -> T) -> T {
    let mid = lit::<T>(0.5) * (lo + hi);
    let half = lit::<T>(0.5) * (hi - lo);
    let mut acc = T::zero();
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let dx = half * lit(*x);
        acc += lit::<T>(w) * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

/// `∫_{s0}^{s1} t^{e-1} dt` for `0 < s0 < s1`, accurate for close endpoints.
fn power_integral<T: RealScalar>(s0: T, s1: T, e: T) -> T {
    let log_ratio = ((s1 - s0) / s0).ln_1p();
    if e.abs() <= lit(1e-14) {
        log_ratio
    } else {
        s0.powf(e) * (e * log_ratio).exp_m1() / e
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Lorentz norm `‖u‖_{p,q}` built on `|u|_**`.
///
/// `p ∈ [1, ∞]`, `q ∈ (0, ∞]`; `p = ∞` is only admitted with `q = ∞`, which
/// gives the sup norm. The integral is evaluated piece by piece on the exact
/// form `u_**(t) = a + b/t`: in closed form for integer `q`, by Gauss–Legendre
/// on geometrically split sub-pieces otherwise.
pub fn lorentz_norm<S: Field>(u: &GridFunction<S>, p: S::Real, q: S::Real) -> Result<S::Real>
where
    S::Real: RealScalar,
{
    type R<S> = <S as Field>::Real;
    let invalid = || Error::InvalidExponents {
        p: p.to_f64().unwrap_or(f64::NAN),
        q: q.to_f64().unwrap_or(f64::NAN),
    };
    if p.is_nan() || q.is_nan() || p < R::<S>::one() || q <= R::<S>::zero() {
        return Err(invalid());
    }
    if p.is_infinite() && !q.is_infinite() {
        return Err(invalid());
    }
    let re = decreasing_rearrangement(u)?;
    let zero = R::<S>::zero();
    let one = R::<S>::one();
    if re.u_star().first().is_none_or(|&v| v == zero) {
        return Ok(zero);
    }
    if q.is_infinite() {
        if p.is_infinite() {
            return Ok(re.u_star()[0]);
        }
        let inv_p = one / p;
        let g = |t: R<S>, a: R<S>, b: R<S>| t.powf(inv_p) * (a + b / t);
        let mut sup = zero;
        for (s0, s1, a, b) in re.affine_pieces() {
            sup = sup.max(g(s1, a, b));
            if s0 > zero {
                sup = sup.max(g(s0, a, b));
            }
            if p > one && a > zero {
                let t_star = b * (p - one) / a;
                if t_star > s0 && t_star < s1 {
                    sup = sup.max(g(t_star, a, b));
                }
            }
        }
        return Ok(sup);
    }
    let ratio = q / p;
    let q_int = q.round();
    let integer_q = (q - q_int).abs() <= lit(1e-12) && q_int <= lit(32.0);
    let mut total = zero;
    for (s0, s1, a, b) in re.affine_pieces() {
        if a == zero && b == zero {
            continue;
        }
        if s0 == zero || b == zero {
            // u_** is the constant a here.
            let upper = s1.powf(ratio);
            let lower = if s0 == zero { zero } else { s0.powf(ratio) };
            total += a.powf(q) * (upper - lower) / ratio;
            continue;
        }
        if integer_q {
            let n = q_int.to_u32().unwrap();
            for m in 0..=n {
                let coef = lit::<R<S>>(binomial(n, m));
                let am = if n - m == 0 { one } else { a.powi((n - m) as i32) };
                let bm = if m == 0 { one } else { b.powi(m as i32) };
                if am == zero || bm == zero {
                    continue;
                }
                let e = ratio - from_usize::<R<S>>(m as usize);
                total += coef * am * bm * power_integral(s0, s1, e);
            }
        } else {
            let integrand = |t: R<S>| t.powf(ratio - one) * (a + b / t).powf(q);
            let two = lit::<R<S>>(2.0);
            let mut lo = s0;
            while lo < s1 {
                let hi = (lo * two).min(s1);
                total += gauss_legendre(lo, hi, integrand);
                lo = hi;
            }
        }
    }
    Ok(total.powf(one / q))
}

/// `∫ |u| · weight^α` with a strictly positive weight.
pub fn weighted_norm<S: Field>(
    u: &GridFunction<S>,
    weight: &GridFunction<S::Real>,
    alpha: S::Real,
) -> Result<S::Real>
where
    S::Real: RealScalar,
{
    weighted_lp_norm(u, weight, alpha, S::Real::one())
}

/// `(∫ |u|^p · weight^α)^{1/p}`; `p = ∞` gives `max |u|`.
pub fn weighted_lp_norm<S: Field>(
    u: &GridFunction<S>,
    weight: &GridFunction<S::Real>,
    alpha: S::Real,
    p: S::Real,
) -> Result<S::Real>
where
    S::Real: RealScalar,
{
    u.check_mesh(weight.mesh())?;
    if alpha.is_nan() || alpha < S::Real::zero() || alpha > S::Real::one() {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} outside [0, 1]")));
    }
    if p.is_nan() || p < S::Real::one() {
        return Err(Error::InvalidArgument(format!("p = {p} below 1")));
    }
    if let Some((cell, &w)) = weight
        .values()
        .iter()
        .enumerate()
        .find(|(_, &w)| !(w > S::Real::zero()))
    {
        return Err(Error::NonPositiveWeight {
            cell,
            value: w.to_f64().unwrap_or(f64::NAN),
        });
    }
    if p.is_infinite() {
        return Ok(u.max_abs());
    }
    let sum: S::Real = u
        .values()
        .iter()
        .zip(weight.values())
        .map(|(v, &w)| {
            let m = v.modulus();
            let mp = if p == S::Real::one() { m } else { m.powf(p) };
            if alpha == S::Real::zero() {
                mp
            } else {
                mp * w.powf(alpha)
            }
        })
        .sum();
    Ok((sum * u.mesh().cell_volume()).powf(S::Real::one() / p))
}

/// Discrete gradient with the homogeneous Dirichlet convention.
///
/// Central differences inside; next to `∂Ω` a three-point one-sided formula
/// through the boundary face, where the function is taken to vanish.
pub fn gradient<S: Field>(u: &GridFunction<S>) -> VectorField<S>
where
    S::Real: RealScalar,
{
    let mesh = u.mesh();
    let [nx, ny] = mesh.counts();
    let h = mesh.spacing();
    let vals = u.values();
    let mut components = Vec::with_capacity(mesh.dim());
    for axis in 0..mesh.dim() {
        let (n, stride) = if axis == 0 { (nx, 1) } else { (ny, nx) };
        let hh = S::from_real(h[axis]);
        let two = S::from_real(lit(2.0));
        let three = S::from_real(lit(3.0));
        let mut out = vec![S::zero(); vals.len()];
        for (k, o) in out.iter_mut().enumerate() {
            let (ci, cj) = mesh.cell(k);
            let i = if axis == 0 { ci } else { cj };
            let at = |off: isize| vals[(k as isize + off * stride as isize) as usize];
            *o = if i == 0 {
                (at(0) + at(1) / three) / hh
            } else if i == n - 1 {
                -(at(0) + at(-1) / three) / hh
            } else {
                (at(1) - at(-1)) / (two * hh)
            };
        }
        components.push(GridFunction::new(mesh, out).expect("same mesh"));
    }
    VectorField { components }
}

/// Ratio `∫|u|/δ ÷ ‖∇u‖_{n′,∞}`; in 1D the denominator is `‖∇u‖_∞`.
pub fn hardy_quotient<T: RealScalar>(u: &GridFunction<T>) -> Result<T> {
    let mesh = u.mesh();
    let num: T = u
        .values()
        .iter()
        .zip(mesh.delta())
        .map(|(v, &d)| v.abs() / d)
        .sum::<T>()
        * mesh.cell_volume();
    let grad = gradient(u).magnitude();
    let den = match mesh.dim() {
        1 => grad.max_abs(),
        n => {
            let nf = from_usize::<T>(n);
            lorentz_norm(&grad, nf / (nf - T::one()), T::infinity())?
        }
    };
    if den == T::zero() {
        return Err(Error::ZeroGradient);
    }
    Ok(num / den)
}
