//! Functions sampled at mesh cells.

use std::sync::Arc;

use num_complex::Complex;


use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::scalar::{Field, RealScalar};
use num_traits::{Float, Zero};

/// Real- or complex-valued samples at the cells of a mesh.
///
/// The value kind is carried by the type parameter: `GridFunction<f64>` is
/// real, `GridFunction<Complex<f64>>` is complex.
#[derive(Debug, Clone)]
pub struct GridFunction<S: Field> {
    mesh: Arc<Mesh<S::Real>>,
    values: Vec<S>,
}

impl<S: Field> GridFunction<S> {
    pub fn new(mesh: &Arc<Mesh<S::Real>>, values: Vec<S>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::MeshMismatch(format!(
                "{} values for {} cells",
                values.len(),
                mesh.len()
            )));
        }
        Ok(GridFunction {
            mesh: Arc::clone(mesh),
            values,
        })
    }

    pub fn zeros(mesh: &Arc<Mesh<S::Real>>) -> Self {
        GridFunction {
            mesh: Arc::clone(mesh),
            values: vec![S::zero(); mesh.len()],
        }
    }

    pub fn from_fn(mesh: &Arc<Mesh<S::Real>>, f: impl Fn(Point<S::Real>) -> S) -> Self {
        GridFunction {
            mesh: Arc::clone(mesh),
            values: mesh.centers().iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh<S::Real>> {
        &self.mesh
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check_mesh(&self, mesh: &Mesh<S::Real>) -> Result<()> {
        if self.mesh.same_cells(mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch(
                "grid function sampled on a different mesh".into(),
            ))
        }
    }

    pub(crate) fn check_same(&self, other: &GridFunction<S>) -> Result<()> {
        self.check_mesh(&other.mesh)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.finite()) {
            Some(cell) => Err(Error::NonFinite { cell }),
            None => Ok(()),
        }
    }

    pub fn map<R: Field<Real = S::Real>>(&self, f: impl Fn(S) -> R) -> GridFunction<R> {
        GridFunction {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Cellwise combination of two grid functions on the same mesh.
    pub fn zip_map(&self, other: &GridFunction<S>, f: impl Fn(S, S) -> S) -> Result<Self> {
        self.check_same(other)?;
        Ok(GridFunction {
            mesh: Arc::clone(&self.mesh),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, c: S) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &GridFunction<S>) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction<S>) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self + c·other`
    pub fn axpy(&self, c: S, other: &GridFunction<S>) -> Result<Self> {
        self.zip_map(other, |a, b| a + c * b)
    }

    /// Quadrature inner product `∫ u · conj(v)`.
    pub fn inner(&self, other: &GridFunction<S>) -> Result<S> {
        self.check_same(other)?;
        let s: S = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b.conj())
            .sum();
        Ok(s * S::from_real(self.mesh.cell_volume()))
    }

    pub fn integral(&self) -> S {
        self.mesh.quadrature(&self.values)
    }

    pub fn norm_l1(&self) -> S::Real {
        let s: S::Real = self.values.iter().map(|v| v.modulus()).sum();
        s * self.mesh.cell_volume()
    }

    pub fn norm_l2(&self) -> S::Real {
        let s: S::Real = self.values.iter().map(|v| v.modulus_sqr()).sum();
        (s * self.mesh.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> S::Real {
        self.values
            .iter()
            .map(|v| v.modulus())
            .fold(S::Real::zero(), |a, b| a.max(b))
    }

    pub fn abs(&self) -> GridFunction<S::Real> {
        GridFunction {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|v| v.modulus()).collect(),
        }
    }
}

impl<T: RealScalar> GridFunction<T> {
    pub fn complexify(&self) -> GridFunction<Complex<T>>
    where
        Complex<T>: Field<Real = T>,
    {
        GridFunction {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Positive part `max(u, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(T::zero()))
    }
}

/// Vector-valued grid function with one component per spatial axis.
#[derive(Debug, Clone)]
pub struct VectorField<S: Field> {
    pub components: Vec<GridFunction<S>>,
}

impl<S: Field> VectorField<S> {
    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> GridFunction<S::Real> {
        let first = &self.components[0];
        let mut out = vec![S::Real::zero(); first.len()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.values()) {
                *o += v.modulus_sqr();
            }
        }
        GridFunction {
            mesh: Arc::clone(first.mesh()),
            values: out.into_iter().map(|v| v.sqrt()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_norms() {
        let m = Arc::new(Mesh::build_interval(0.0_f64, 1.0, 4).unwrap());
        let u: GridFunction<f64> = GridFunction::new(&m, vec![1.0, -2.0, 3.0, -4.0]).unwrap();
        assert_eq!(u.max_abs(), 4.0);
        assert_eq!(u.norm_l1(), 2.5);
        assert_eq!(u.positive_part().values(), &[1.0, 0.0, 3.0, 0.0]);
        let v = u.axpy(2.0, &u).unwrap();
        assert_eq!(v.values(), &[3.0, -6.0, 9.0, -12.0]);
        assert!((u.inner(&u).unwrap() - u.norm_l2().powi(2)).abs() < 1e-14);
        assert!(GridFunction::new(&m, vec![1.0; 3]).is_err());
    }

    #[test]
    fn complex_inner_product_is_hermitian() {
        let m = Arc::new(Mesh::build_interval(0.0_f64, 1.0, 3).unwrap());
        let u: GridFunction<Complex<f64>> = GridFunction::new(
            &m,
            vec![Complex::new(1.0, 1.0), Complex::new(0.0, 2.0), Complex::new(-1.0, 0.5)],
        )
        .unwrap();
        let n = u.inner(&u).unwrap();
        assert!(n.im.abs() < 1e-15);
        assert!((n.re - u.norm_l2().powi(2)).abs() < 1e-14);
    }
}
