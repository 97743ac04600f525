//! Cell-centred grids over intervals and rectangles.
//!
//! No sample point ever sits on the boundary: every cell centre is at least
//! half a cell width away from `∂Ω`, so potentials of the form `C·δ^(-r)`
//! stay finite on the grid.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::scalar::{from_usize, lit, Field, Real};

/// A point in the plane; 1D meshes use only the first coordinate.
pub type Point<T> = [T; 2];

/// Computational domain `Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain<T> {
    /// The open interval `(a, b)`.
    Interval { a: T, b: T },
    /// The open rectangle `origin + (0, size[0]) × (0, size[1])`.
    Rectangle { origin: Point<T>, size: Point<T> },
}

impl<T: Real> Domain<T> {
    pub fn interval(a: T, b: T) -> Result<Self> {
        let d = Domain::Interval { a, b };
        d.validate()?;
        Ok(d)
    }

    /// Rectangle `(0, lx) × (0, ly)`.
    pub fn rectangle(lx: T, ly: T) -> Result<Self> {
        Self::rectangle_at([T::zero(), T::zero()], [lx, ly])
    }

    pub fn rectangle_at(origin: Point<T>, size: Point<T>) -> Result<Self> {
        let d = Domain::Rectangle { origin, size };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return Err(Error::InvalidDomain(format!(
                        "interval needs finite b > a, got ({a}, {b})"
                    )));
                }
            }
            Domain::Rectangle { origin, size } => {
                let finite = origin.iter().chain(size.iter()).all(|v| v.is_finite());
                if !finite || size[0] <= T::zero() || size[1] <= T::zero() {
                    return Err(Error::InvalidDomain(format!(
                        "rectangle needs positive finite sides, got {} × {}",
                        size[0], size[1]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    /// Lebesgue measure `|Ω|`.
    pub fn measure(&self) -> T {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rectangle { size, .. } => size[0] * size[1],
        }
    }

    pub fn lower(&self) -> Point<T> {
        match *self {
            Domain::Interval { a, .. } => [a, T::zero()],
            Domain::Rectangle { origin, .. } => origin,
        }
    }

    pub fn upper(&self) -> Point<T> {
        match *self {
            Domain::Interval { b, .. } => [b, T::zero()],
            Domain::Rectangle { origin, size } => [origin[0] + size[0], origin[1] + size[1]],
        }
    }

    /// Whether `p` lies in the open set `Ω`.
    pub fn contains(&self, p: Point<T>) -> bool {
        let (lo, hi) = (self.lower(), self.upper());
        (0..self.dim()).all(|k| p[k] > lo[k] && p[k] < hi[k])
    }

    /// Whether the closure of `inner` lies inside the closure of `self`.
    pub fn encloses(&self, inner: &Domain<T>) -> bool {
        if self.dim() != inner.dim() {
            return false;
        }
        let (lo, hi) = (self.lower(), self.upper());
        let (ilo, ihi) = (inner.lower(), inner.upper());
        (0..self.dim()).all(|k| ilo[k] >= lo[k] && ihi[k] <= hi[k])
    }

    /// Euclidean distance from an interior point to `∂Ω`.
    pub fn distance_to_boundary(&self, p: Point<T>) -> T {
        let (lo, hi) = (self.lower(), self.upper());
        (0..self.dim())
            .map(|k| (p[k] - lo[k]).min(hi[k] - p[k]))
            .fold(T::infinity(), T::min)
    }
}

/// Uniform cell-centred grid with the boundary-distance field `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    domain: Domain<T>,
    counts: [usize; 2],
    spacing: Point<T>,
    centers: Vec<Point<T>>,
    cell_volume: T,
    delta: Vec<T>,
}

impl<T: Real> Mesh<T> {
    /// Cells of width `(b - a)/n` over `(a, b)`.
    pub fn build_interval(a: T, b: T, n: usize) -> Result<Self> {
        Self::build(Domain::interval(a, b)?, [n, 1])
    }

    /// `nx × ny` cells over `(0, lx) × (0, ly)`.
    pub fn build_rectangle(lx: T, ly: T, nx: usize, ny: usize) -> Result<Self> {
        Self::build(Domain::rectangle(lx, ly)?, [nx, ny])
    }

    /// Builds a mesh on any domain; `counts[1]` is ignored for intervals.
    pub fn build(domain: Domain<T>, counts: [usize; 2]) -> Result<Self> {
        domain.validate()?;
        let dim = domain.dim();
        let counts = if dim == 1 { [counts[0], 1] } else { counts };
        if counts[..dim].iter().any(|&n| n < 2) {
            return Err(Error::InvalidDomain(format!(
                "need at least 2 cells per axis, got {:?}",
                &counts[..dim]
            )));
        }
        let lo = domain.lower();
        let hi = domain.upper();
        let mut spacing = [T::one(), T::one()];
        for k in 0..dim {
            spacing[k] = (hi[k] - lo[k]) / from_usize(counts[k]);
        }
        let half = lit::<T>(0.5);
        let mut centers = Vec::with_capacity(counts[0] * counts[1]);
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                let x = lo[0] + (from_usize::<T>(i) + half) * spacing[0];
                let y = if dim == 2 {
                    lo[1] + (from_usize::<T>(j) + half) * spacing[1]
                } else {
                    T::zero()
                };
                centers.push([x, y]);
            }
        }
        // Distance is taken in index space so that mirror cells get bitwise
        // identical values.
        let mut delta = Vec::with_capacity(centers.len());
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                let dx = (from_usize::<T>(i.min(counts[0] - 1 - i)) + half) * spacing[0];
                let d = if dim == 2 {
                    let dy = (from_usize::<T>(j.min(counts[1] - 1 - j)) + half) * spacing[1];
                    dx.min(dy)
                } else {
                    dx
                };
                delta.push(d);
            }
        }
        let cell_volume = if dim == 1 {
            spacing[0]
        } else {
            spacing[0] * spacing[1]
        };
        Ok(Mesh {
            domain,
            counts,
            spacing,
            centers,
            cell_volume,
            delta,
        })
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Cells per axis; the second entry is 1 for intervals.
    pub fn counts(&self) -> [usize; 2] {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn spacing(&self) -> Point<T> {
        self.spacing
    }

    /// Smallest cell width over the active axes.
    pub fn min_spacing(&self) -> T {
        self.spacing[..self.dim()]
            .iter()
            .copied()
            .fold(T::infinity(), T::min)
    }

    pub fn max_spacing(&self) -> T {
        self.spacing[..self.dim()]
            .iter()
            .copied()
            .fold(T::zero(), T::max)
    }

    pub fn centers(&self) -> &[Point<T>] {
        &self.centers
    }

    pub fn cell_volume(&self) -> T {
        self.cell_volume
    }

    /// Boundary distance `δ` at each cell centre.
    pub fn delta(&self) -> &[T] {
        &self.delta
    }

    pub fn measure(&self) -> T {
        self.domain.measure()
    }

    /// Linear index of cell `(i, j)`; x varies fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.counts[0] * j
    }

    #[inline]
    pub fn cell(&self, k: usize) -> (usize, usize) {
        (k % self.counts[0], k / self.counts[0])
    }

    /// Whether another mesh samples exactly the same cells.
    pub fn same_cells(&self, other: &Mesh<T>) -> bool {
        std::ptr::eq(self, other)
            || (self.domain == other.domain && self.counts == other.counts)
    }

    /// Midpoint rule on raw per-cell values.
    pub fn quadrature<S: Field<Real = T>>(&self, values: &[S]) -> S {
        let sum: S = values.iter().copied().sum();
        sum * S::from_real(self.cell_volume)
    }
}

/// Midpoint-rule integral `Σ g_i · vol_i` of a grid function.
pub fn integrate<S: Field>(mesh: &Mesh<S::Real>, g: &GridFunction<S>) -> Result<S> {
    g.check_mesh(mesh)?;
    Ok(mesh.quadrature(g.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn interval_centres_and_delta() {
        let m = Mesh::build_interval(0.0_f64, 1.0, 4).unwrap();
        let xs: Vec<f64> = m.centers().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(m.delta(), &[0.125, 0.375, 0.375, 0.125]);
        assert_eq!(m.cell_volume(), 0.25);
    }

    #[test]
    fn shifted_interval() {
        let m = Mesh::build_interval(-2.0_f64, 3.0, 10).unwrap();
        assert_eq!(m.spacing()[0], 0.5);
        assert_eq!(m.delta()[0], 0.25);
        assert_eq!(m.centers()[0][0], -1.75);
    }

    #[test]
    fn volumes_partition_domain() {
        for n in [2usize, 3, 7, 100, 1001] {
            let m = Mesh::build_interval(0.0_f64, 1.0, n).unwrap();
            let total = m.cell_volume() * n as f64;
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        }
        let r = Mesh::build_rectangle(1.0_f64, 2.0, 4, 8).unwrap();
        assert_eq!(r.cell_volume(), 0.0625);
        assert_relative_eq!(r.cell_volume() * r.len() as f64, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn rectangle_two_by_two() {
        let m = Mesh::build_rectangle(1.0_f64, 1.0, 2, 2).unwrap();
        assert_eq!(
            m.centers(),
            &[[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]]
        );
        assert!(m.delta().iter().all(|&d| d == 0.25));
    }

    #[test]
    fn square_delta_has_dihedral_symmetry() {
        let n = 9;
        let m = Mesh::build_rectangle(1.0_f64, 1.0, n, n).unwrap();
        let d = |i: usize, j: usize| m.delta()[m.index(i, j)];
        for j in 0..n {
            for i in 0..n {
                let v = d(i, j);
                assert_eq!(v, d(j, i));
                assert_eq!(v, d(n - 1 - i, j));
                assert_eq!(v, d(i, n - 1 - j));
                assert_eq!(v, d(n - 1 - j, n - 1 - i));
            }
        }
    }

    #[test]
    fn delta_matches_exact_distance_and_is_interior() {
        let m = Mesh::build_rectangle(1.5_f64, 0.7, 13, 9).unwrap();
        let half = 0.5 * m.min_spacing();
        for (p, &d) in m.centers().iter().zip(m.delta()) {
            assert_relative_eq!(d, m.domain().distance_to_boundary(*p), epsilon = 1e-14);
            assert!(d >= half - 1e-15);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Mesh::build_interval(0.0_f64, 1.0, 1).is_err());
        assert!(Mesh::build_interval(1.0_f64, 1.0, 10).is_err());
        assert!(Mesh::build_interval(2.0_f64, 1.0, 10).is_err());
        assert!(Mesh::build_rectangle(0.0_f64, 1.0, 4, 4).is_err());
        assert!(Mesh::build_rectangle(1.0_f64, -1.0, 4, 4).is_err());
        assert!(Mesh::build_rectangle(1.0_f64, 1.0, 4, 1).is_err());
    }

    #[test]
    fn integrates_analytic_functions() {
        let m = Arc::new(Mesh::build_interval(0.0_f64, 1.0, 1000).unwrap());
        let one = GridFunction::<f64>::from_fn(&m, |_| 1.0);
        assert_relative_eq!(integrate(&m, &one).unwrap(), 1.0, epsilon = 1e-12);
        let x = GridFunction::<f64>::from_fn(&m, |p| p[0]);
        assert!((integrate(&m, &x).unwrap() - 0.5).abs() <= 1e-6);
        let s = GridFunction::<f64>::from_fn(&m, |p| (std::f64::consts::PI * p[0]).sin());
        assert!((integrate(&m, &s).unwrap() - 2.0 / std::f64::consts::PI).abs() <= 1e-5);
    }

    #[test]
    fn integrate_rejects_foreign_grid_function() {
        let m = Arc::new(Mesh::build_interval(0.0_f64, 1.0, 10).unwrap());
        let other = Arc::new(Mesh::build_interval(0.0_f64, 1.0, 11).unwrap());
        let g = GridFunction::<f64>::from_fn(&other, |_| 1.0);
        assert!(matches!(integrate(&m, &g), Err(Error::MeshMismatch(_))));
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        // ∫₀¹ e^x dx = e - 1
        let exact = std::f64::consts::E - 1.0;
        let errs: Vec<f64> = [100usize, 200, 400]
            .iter()
            .map(|&n| {
                let m = Arc::new(Mesh::build_interval(0.0, 1.0, n).unwrap());
                let g = GridFunction::<f64>::from_fn(&m, |p| p[0].exp());
                (integrate(&m, &g).unwrap() - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9);
        }
        // Cauchy differences of a smooth 2D integrand.
        let vals: Vec<f64> = [10usize, 20, 40, 80]
            .iter()
            .map(|&n| {
                let m = Arc::new(Mesh::build_rectangle(1.0, 1.0, n, n).unwrap());
                let g = GridFunction::<f64>::from_fn(&m, |p| (p[0] * p[1]).cos() + p[0] * p[0]);
                integrate(&m, &g).unwrap()
            })
            .collect();
        let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in diffs.windows(2) {
            assert!(w[0] / w[1] >= 3.5);
        }
    }

    #[test]
    fn single_precision_mesh() {
        let m = Arc::new(Mesh::<f32>::build_interval(0.0, 1.0, 200).unwrap());
        let x = GridFunction::<f32>::from_fn(&m, |p| p[0]);
        assert!((integrate(&m, &x).unwrap() - 0.5).abs() < 1e-5);
    }
}
