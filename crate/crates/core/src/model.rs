//! Potentials `V = C·δ^(-r) + V₀`, their truncations and finite extensions,
//! divergence-free flows generated by stream functions, and right-hand-side
//! truncation.

use std::fmt;
use std::sync::Arc;


use crate::error::{Error, Result};
use crate::grid::{GridFunction, VectorField};
use crate::mesh::{Domain, Mesh, Point};
use crate::scalar::{from_usize, lit, RealScalar};

/// Shared scalar field `Ω̄ → ℝ`.
pub type ScalarFn<T> = Arc<dyn Fn(Point<T>) -> T + Send + Sync>;

/// Symbolic potential `V(x) = C·δ(x)^(-r) + V₀(x)`, optionally truncated at `j`.
#[derive(Clone)]
pub struct PotentialSpec<T> {
    strength: T,
    exponent: T,
    bounded_part: Option<ScalarFn<T>>,
    truncation: Option<T>,
}

impl<T: fmt::Debug> fmt::Debug for PotentialSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("strength", &self.strength)
            .field("exponent", &self.exponent)
            .field("bounded_part", &self.bounded_part.as_ref().map(|_| "<fn>"))
            .field("truncation", &self.truncation)
            .finish()
    }
}

impl<T: RealScalar> PotentialSpec<T> {
    /// `C·δ^(-r)` with `C ≥ 0`, `r ≥ 0`.
    pub fn new(strength: T, exponent: T) -> Result<Self> {
        if !(strength >= T::zero() && strength.is_finite()) {
            return Err(Error::InvalidArgument(format!("strength C = {strength} must be ≥ 0")));
        }
        if !(exponent >= T::zero() && exponent.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent r = {exponent} must be ≥ 0")));
        }
        Ok(PotentialSpec {
            strength,
            exponent,
            bounded_part: None,
            truncation: None,
        })
    }

    /// The zero potential.
    pub fn zero() -> Self {
        PotentialSpec {
            strength: T::zero(),
            exponent: T::zero(),
            bounded_part: None,
            truncation: None,
        }
    }

    pub fn with_bounded_part(mut self, f: ScalarFn<T>) -> Self {
        self.bounded_part = Some(f);
        self
    }

    /// Adds a constant `c` to the potential.
    pub fn with_offset(self, c: T) -> Self {
        self.with_bounded_part(Arc::new(move |_| c))
    }

    pub fn strength(&self) -> T {
        self.strength
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    pub fn truncation(&self) -> Option<T> {
        self.truncation
    }

    /// Untruncated value at a point with boundary distance `delta`.
    pub fn raw_value(&self, p: Point<T>, delta: T) -> T {
        let singular = if self.strength == T::zero() {
            T::zero()
        } else if self.exponent == T::zero() {
            self.strength
        } else {
            self.strength * delta.powf(-self.exponent)
        };
        singular + self.bounded_part.as_ref().map_or(T::zero(), |f| f(p))
    }

    /// Value including truncation.
    pub fn value(&self, p: Point<T>, delta: T) -> T {
        let v = self.raw_value(p, delta);
        match self.truncation {
            Some(j) => v.min(j),
            None => v,
        }
    }
}

/// Samples `V` (truncated if requested) at every cell of `mesh`.
pub fn sample_potential<T: RealScalar>(
    spec: &PotentialSpec<T>,
    mesh: &Arc<Mesh<T>>,
) -> Result<GridFunction<T>> {
    let values: Vec<T> = mesh
        .centers()
        .iter()
        .zip(mesh.delta())
        .map(|(&p, &d)| spec.value(p, d))
        .collect();
    check_potential_values(&values)?;
    GridFunction::new(mesh, values)
}

fn check_potential_values<T: RealScalar>(values: &[T]) -> Result<()> {
    for (cell, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { cell });
        }
        if v < T::zero() {
            return Err(Error::NegativeValue {
                cell,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// `V_j = min(V, j)`.
pub fn truncate<T: RealScalar>(spec: &PotentialSpec<T>, j: T) -> Result<PotentialSpec<T>> {
    if !(j > T::zero()) {
        return Err(Error::InvalidArgument(format!("truncation level j = {j} must be > 0")));
    }
    let mut out = spec.clone();
    out.truncation = Some(j);
    Ok(out)
}

/// `f_j = sign(f)·min(|f|, j)`.
pub fn truncate_rhs<T: RealScalar>(f: &GridFunction<T>, j: T) -> Result<GridFunction<T>> {
    if !(j > T::zero()) {
        return Err(Error::InvalidArgument(format!("truncation level j = {j} must be > 0")));
    }
    Ok(f.map(|v| v.signum() * v.abs().min(j) * if v == T::zero() { T::zero() } else { T::one() }))
}

/// Convective flow description.
#[derive(Clone)]
pub enum FlowSpec<T> {
    Zero,
    /// `U = (∂σ/∂y, −∂σ/∂x)` from a stream function constant on `∂Ω`.
    Stream(ScalarFn<T>),
}

impl<T> fmt::Debug for FlowSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowSpec::Zero => write!(f, "Zero"),
            FlowSpec::Stream(_) => write!(f, "Stream(<fn>)"),
        }
    }
}

impl<T: RealScalar> FlowSpec<T> {
    /// Single cellular vortex `σ = A·sin(πx̂)·sin(πŷ)` in rescaled coordinates.
    pub fn cellular(amplitude: T, domain: &Domain<T>) -> Self {
        let lo = domain.lower();
        let hi = domain.upper();
        let pi = T::PI();
        FlowSpec::Stream(Arc::new(move |p: Point<T>| {
            let sx = (pi * (p[0] - lo[0]) / (hi[0] - lo[0])).sin();
            let sy = (pi * (p[1] - lo[1]) / (hi[1] - lo[1])).sin();
            amplitude * sx * sy
        }))
    }
}

/// Face-centred velocity field on a mesh (staggered layout).
///
/// `face_x[i + (nx+1)·j]` is the x-velocity on the face between cells
/// `(i-1, j)` and `(i, j)`; `face_y[i + nx·j]` the y-velocity on the face
/// between `(i, j-1)` and `(i, j)`. Boundary faces are included.
#[derive(Debug, Clone)]
pub struct FlowField<T: RealScalar> {
    mesh: Arc<Mesh<T>>,
    face_x: Vec<T>,
    face_y: Vec<T>,
}

impl<T: RealScalar> FlowField<T> {
    pub fn zero(mesh: &Arc<Mesh<T>>) -> Self {
        let [nx, ny] = mesh.counts();
        let fy = if mesh.dim() == 2 { nx * (ny + 1) } else { 0 };
        FlowField {
            mesh: Arc::clone(mesh),
            face_x: vec![T::zero(); (nx + 1) * ny],
            face_y: vec![T::zero(); fy],
        }
    }

    pub fn from_faces(mesh: &Arc<Mesh<T>>, face_x: Vec<T>, face_y: Vec<T>) -> Result<Self> {
        let z = Self::zero(mesh);
        if face_x.len() != z.face_x.len() || face_y.len() != z.face_y.len() {
            return Err(Error::MeshMismatch(format!(
                "expected {} x-faces and {} y-faces",
                z.face_x.len(),
                z.face_y.len()
            )));
        }
        Ok(FlowField {
            mesh: Arc::clone(mesh),
            face_x,
            face_y,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn face_x(&self) -> &[T] {
        &self.face_x
    }

    pub fn face_y(&self) -> &[T] {
        &self.face_y
    }

    pub fn is_zero(&self) -> bool {
        self.face_x.iter().chain(&self.face_y).all(|&v| v == T::zero())
    }

    /// Flipped flow `-U`.
    pub fn reversed(&self) -> Self {
        FlowField {
            mesh: Arc::clone(&self.mesh),
            face_x: self.face_x.iter().map(|&v| -v).collect(),
            face_y: self.face_y.iter().map(|&v| -v).collect(),
        }
    }

    /// Cell-centred velocity, averaging the two faces on each axis.
    pub fn cell_velocity(&self) -> VectorField<T> {
        let [nx, ny] = self.mesh.counts();
        let half = lit::<T>(0.5);
        let mut ux = Vec::with_capacity(self.mesh.len());
        let mut uy = Vec::with_capacity(self.mesh.len());
        for j in 0..ny {
            for i in 0..nx {
                ux.push(half * (self.face_x[i + (nx + 1) * j] + self.face_x[i + 1 + (nx + 1) * j]));
                if self.mesh.dim() == 2 {
                    uy.push(half * (self.face_y[i + nx * j] + self.face_y[i + nx * (j + 1)]));
                }
            }
        }
        let mut components = vec![GridFunction::new(&self.mesh, ux).unwrap()];
        if self.mesh.dim() == 2 {
            components.push(GridFunction::new(&self.mesh, uy).unwrap());
        }
        VectorField { components }
    }

    /// Net outward flux per unit volume of every cell, boundary faces included.
    pub fn divergence(&self) -> GridFunction<T> {
        let [nx, ny] = self.mesh.counts();
        let h = self.mesh.spacing();
        let mut out = Vec::with_capacity(self.mesh.len());
        for j in 0..ny {
            for i in 0..nx {
                let mut d = (self.face_x[i + 1 + (nx + 1) * j] - self.face_x[i + (nx + 1) * j]) / h[0];
                if self.mesh.dim() == 2 {
                    d += (self.face_y[i + nx * (j + 1)] - self.face_y[i + nx * j]) / h[1];
                }
                out.push(d);
            }
        }
        GridFunction::new(&self.mesh, out).unwrap()
    }

    /// Largest normal velocity on a boundary face.
    pub fn max_boundary_flux(&self) -> T {
        let [nx, ny] = self.mesh.counts();
        let mut m = T::zero();
        for j in 0..ny {
            m = m.max(self.face_x[(nx + 1) * j].abs());
            m = m.max(self.face_x[nx + (nx + 1) * j].abs());
        }
        if self.mesh.dim() == 2 {
            for i in 0..nx {
                m = m.max(self.face_y[i].abs());
                m = m.max(self.face_y[i + nx * ny].abs());
            }
        }
        m
    }

    /// Mesh Péclet number `max |U_face|·h/2`.
    pub fn peclet(&self) -> T {
        let h = self.mesh.spacing();
        let half = lit::<T>(0.5);
        let px = self.face_x.iter().fold(T::zero(), |m, v| m.max(v.abs())) * h[0] * half;
        let py = self.face_y.iter().fold(T::zero(), |m, v| m.max(v.abs())) * h[1] * half;
        px.max(py)
    }
}

/// Samples a flow on the staggered faces of `mesh`.
///
/// Stream functions are evaluated at cell corners, so the face fluxes of
/// every cell telescope: the discrete divergence vanishes up to rounding,
/// and boundary fluxes vanish when `σ` is constant on `∂Ω`.
pub fn sample_flow<T: RealScalar>(spec: &FlowSpec<T>, mesh: &Arc<Mesh<T>>) -> Result<FlowField<T>> {
    let sigma = match spec {
        FlowSpec::Zero => return Ok(FlowField::zero(mesh)),
        FlowSpec::Stream(s) => s,
    };
    if mesh.dim() != 2 {
        return Err(Error::InvalidArgument(
            "stream-function flows need a 2D mesh".into(),
        ));
    }
    let [nx, ny] = mesh.counts();
    let h = mesh.spacing();
    let lo = mesh.domain().lower();
    let corner = |i: usize, j: usize| -> T {
        sigma([
            lo[0] + from_usize::<T>(i) * h[0],
            lo[1] + from_usize::<T>(j) * h[1],
        ])
    };
    let mut s = vec![T::zero(); (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            s[i + (nx + 1) * j] = corner(i, j);
        }
    }
    let sc = |i: usize, j: usize| s[i + (nx + 1) * j];
    let mut face_x = vec![T::zero(); (nx + 1) * ny];
    for j in 0..ny {
        for i in 0..=nx {
            face_x[i + (nx + 1) * j] = (sc(i, j + 1) - sc(i, j)) / h[1];
        }
    }
    let mut face_y = vec![T::zero(); nx * (ny + 1)];
    for j in 0..=ny {
        for i in 0..nx {
            face_y[i + nx * j] = -(sc(i + 1, j) - sc(i, j)) / h[0];
        }
    }
    let field = FlowField {
        mesh: Arc::clone(mesh),
        face_x,
        face_y,
    };
    let speed = field
        .face_x
        .iter()
        .chain(&field.face_y)
        .fold(T::zero(), |m, v| m.max(v.abs()));
    let flux = field.max_boundary_flux();
    if flux > lit::<T>(1e-10) * (T::one() + speed) {
        return Err(Error::NotDivergenceFree {
            divergence: field.divergence().max_abs().to_f64().unwrap_or(f64::NAN),
            boundary_flux: flux.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(field)
}

/// Box mesh whose cells are aligned with an `Ω`-mesh that sits inside it.
#[derive(Debug, Clone)]
pub struct BoxEmbedding<T: RealScalar> {
    omega: Arc<Mesh<T>>,
    boxed: Arc<Mesh<T>>,
    offset: [usize; 2],
}

impl<T: RealScalar> BoxEmbedding<T> {
    /// Pads `omega` by `padding[k]` cells on both sides of each axis.
    pub fn padded(omega: &Arc<Mesh<T>>, padding: [usize; 2]) -> Result<Self> {
        let dim = omega.dim();
        let h = omega.spacing();
        let lo = omega.domain().lower();
        let hi = omega.domain().upper();
        let pad = |k: usize| from_usize::<T>(padding[k]) * h[k];
        let [nx, ny] = omega.counts();
        let domain = if dim == 1 {
            Domain::interval(lo[0] - pad(0), hi[0] + pad(0))?
        } else {
            Domain::rectangle_at(
                [lo[0] - pad(0), lo[1] - pad(1)],
                [hi[0] - lo[0] + lit::<T>(2.0) * pad(0), hi[1] - lo[1] + lit::<T>(2.0) * pad(1)],
            )?
        };
        let counts = [nx + 2 * padding[0], ny + 2 * padding[1]];
        let boxed = Arc::new(Mesh::build(domain, counts)?);
        let offset = if dim == 1 { [padding[0], 0] } else { padding };
        Ok(BoxEmbedding {
            omega: Arc::clone(omega),
            boxed,
            offset,
        })
    }

    /// Validates that `boxed` contains `omega` with coinciding cells.
    pub fn from_meshes(omega: &Arc<Mesh<T>>, boxed: &Arc<Mesh<T>>) -> Result<Self> {
        if !boxed.domain().encloses(omega.domain()) {
            return Err(Error::NotContained(format!(
                "{:?} does not enclose {:?}",
                boxed.domain(),
                omega.domain()
            )));
        }
        let dim = omega.dim();
        let mut offset = [0usize; 2];
        let tol = lit::<T>(1e-9);
        for k in 0..dim {
            let hb = boxed.spacing()[k];
            let ho = omega.spacing()[k];
            let shift = (omega.domain().lower()[k] - boxed.domain().lower()[k]) / hb;
            let rounded = shift.round();
            if (ho - hb).abs() > tol * hb || (shift - rounded).abs() > tol {
                return Err(Error::InvalidArgument(
                    "box mesh cells are not aligned with the Ω-mesh".into(),
                ));
            }
            offset[k] = rounded.to_usize().unwrap();
        }
        Ok(BoxEmbedding {
            omega: Arc::clone(omega),
            boxed: Arc::clone(boxed),
            offset,
        })
    }

    pub fn omega(&self) -> &Arc<Mesh<T>> {
        &self.omega
    }

    pub fn boxed(&self) -> &Arc<Mesh<T>> {
        &self.boxed
    }

    /// `Ω`-cell index of a box cell, if it lies in `Ω`.
    pub fn omega_index(&self, box_cell: usize) -> Option<usize> {
        let (i, j) = self.boxed.cell(box_cell);
        let [nx, ny] = self.omega.counts();
        let ii = i.checked_sub(self.offset[0])?;
        let jj = j.checked_sub(self.offset[1])?;
        (ii < nx && jj < ny).then(|| self.omega.index(ii, jj))
    }

    /// Whether each box cell lies in `Ω`.
    pub fn mask(&self) -> Vec<bool> {
        (0..self.boxed.len()).map(|k| self.omega_index(k).is_some()).collect()
    }

    /// Restriction of a box grid function to `Ω`.
    pub fn restrict<S: crate::Field<Real = T>>(&self, g: &GridFunction<S>) -> Result<GridFunction<S>> {
        g.check_mesh(&self.boxed)?;
        let mut out = vec![S::zero(); self.omega.len()];
        for (k, v) in g.values().iter().enumerate() {
            if let Some(o) = self.omega_index(k) {
                out[o] = *v;
            }
        }
        GridFunction::new(&self.omega, out)
    }

    /// Extension by zero of an `Ω` grid function to the box.
    pub fn extend_by_zero<S: crate::Field<Real = T>>(&self, g: &GridFunction<S>) -> Result<GridFunction<S>> {
        g.check_mesh(&self.omega)?;
        let out = (0..self.boxed.len())
            .map(|k| self.omega_index(k).map_or(S::zero(), |o| g.values()[o]))
            .collect();
        GridFunction::new(&self.boxed, out)
    }
}

/// Potential extended by a constant level `q` outside `Ω`.
#[derive(Debug, Clone)]
pub struct ExtendedPotential<T: RealScalar> {
    pub inner: PotentialSpec<T>,
    pub q: T,
    pub omega: Domain<T>,
}

impl<T: RealScalar> ExtendedPotential<T> {
    pub fn sample(&self, mesh_box: &Arc<Mesh<T>>, omega_mesh: &Arc<Mesh<T>>) -> Result<GridFunction<T>> {
        if omega_mesh.domain() != &self.omega {
            return Err(Error::MeshMismatch("Ω-mesh does not cover the extended potential's Ω".into()));
        }
        extend_potential(&self.inner, self.q, omega_mesh, mesh_box)
    }
}

/// `V` on `Ω`-cells and `q` elsewhere, on a box mesh aligned with `omega_mesh`.
pub fn extend_potential<T: RealScalar>(
    inner: &PotentialSpec<T>,
    q: T,
    omega_mesh: &Arc<Mesh<T>>,
    mesh_box: &Arc<Mesh<T>>,
) -> Result<GridFunction<T>> {
    if !(q >= T::zero() && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("exterior level q = {q} must be ≥ 0")));
    }
    let emb = BoxEmbedding::from_meshes(omega_mesh, mesh_box)?;
    let inside = sample_potential(inner, omega_mesh)?;
    let values = (0..mesh_box.len())
        .map(|k| emb.omega_index(k).map_or(q, |o| inside.values()[o]))
        .collect();
    GridFunction::new(mesh_box, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Arc<Mesh<f64>> {
        Arc::new(Mesh::build_interval(0.0, 1.0, n).unwrap())
    }

    #[test]
    fn inverse_square_samples() {
        let spec = PotentialSpec::new(2.0, 2.0).unwrap();
        assert_eq!(spec.value([0.5, 0.0], 0.5), 8.0);
        let t = truncate(&spec, 100.0).unwrap();
        assert_eq!(t.value([0.5, 0.0], 0.5), 8.0);
        let m = unit(100);
        let v = sample_potential(&PotentialSpec::new(1.0, 2.0).unwrap(), &m).unwrap();
        assert!((v.values()[0] - 40_000.0).abs() < 1e-8);
        let vt = sample_potential(&truncate(&PotentialSpec::new(1.0, 2.0).unwrap(), 100.0).unwrap(), &m).unwrap();
        assert_eq!(vt.values()[0], 100.0);
    }

    #[test]
    fn truncation_properties() {
        let m = unit(200);
        let spec = PotentialSpec::new(1.0, 2.0).unwrap().with_offset(1.0);
        let full = sample_potential(&spec, &m).unwrap();
        let sat = sample_potential(&truncate(&spec, 0.5).unwrap(), &m).unwrap();
        assert!(sat.values().iter().all(|&v| v == 0.5));
        let mut prev_gap = f64::INFINITY;
        let mut prev: Option<GridFunction<f64>> = None;
        for j in [1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6] {
            let s = sample_potential(&truncate(&spec, j).unwrap(), &m).unwrap();
            assert!(s.values().iter().zip(full.values()).all(|(a, b)| a <= b));
            if let Some(p) = &prev {
                assert!(p.values().iter().zip(s.values()).all(|(a, b)| a <= b));
            }
            let gap = full.sub(&s).unwrap().max_abs();
            assert!(gap <= prev_gap);
            prev_gap = gap;
            prev = Some(s);
        }
        let top = full.max_abs();
        let exact = sample_potential(&truncate(&spec, top).unwrap(), &m).unwrap();
        assert_eq!(full.sub(&exact).unwrap().max_abs(), 0.0);
        assert!(truncate(&spec, 0.0).is_err());
    }

    #[test]
    fn negative_potential_is_rejected() {
        let m = unit(10);
        let spec = PotentialSpec::new(1.0, 1.0).unwrap().with_offset(-100.0);
        assert!(matches!(sample_potential(&spec, &m), Err(Error::NegativeValue { .. })));
        assert!(PotentialSpec::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn rhs_truncation() {
        let m = unit(4);
        let f = GridFunction::new(&m, vec![-5.0, 0.0, 1.5, 3.0]).unwrap();
        let fj = truncate_rhs(&f, 2.0).unwrap();
        assert_eq!(fj.values(), &[-2.0, 0.0, 1.5, 2.0]);
        let small = GridFunction::new(&m, vec![0.1, -0.2, 0.3, 0.0]).unwrap();
        assert_eq!(truncate_rhs(&small, 1.0).unwrap().values(), small.values());
        assert!(truncate_rhs(&f, -1.0).is_err());
    }

    #[test]
    fn cellular_flow_is_divergence_free() {
        let m = Arc::new(Mesh::build_rectangle(1.0, 1.0, 64, 64).unwrap());
        let flow = sample_flow(&FlowSpec::cellular(1.0, m.domain()), &m).unwrap();
        assert!(flow.divergence().max_abs() <= 1e-10);
        assert!(flow.max_boundary_flux() <= 1e-12);
        let cv = flow.cell_velocity();
        for (k, p) in m.centers().iter().enumerate() {
            let ux = PI * (PI * p[0]).sin() * (PI * p[1]).cos();
            let uy = -PI * (PI * p[0]).cos() * (PI * p[1]).sin();
            assert!((cv.components[0].values()[k] - ux).abs() < 5e-3);
            assert!((cv.components[1].values()[k] - uy).abs() < 5e-3);
        }
    }

    #[test]
    fn trivial_streams() {
        let m = Arc::new(Mesh::build_rectangle(1.0, 1.0, 8, 8).unwrap());
        assert!(sample_flow(&FlowSpec::Zero, &m).unwrap().is_zero());
        let c = sample_flow(&FlowSpec::Stream(Arc::new(|_| 3.0)), &m).unwrap();
        assert!(c.is_zero());
        let line = unit(8);
        assert!(sample_flow(&FlowSpec::Stream(Arc::new(|_| 3.0)), &line).is_err());
        // σ not constant on ∂Ω leaks through the boundary.
        let leaky = FlowSpec::Stream(Arc::new(|p: Point<f64>| p[0]));
        assert!(matches!(sample_flow(&leaky, &m), Err(Error::NotDivergenceFree { .. })));
    }

    #[test]
    fn extension_by_constant() {
        let omega = unit(10);
        let emb = BoxEmbedding::padded(&omega, [5, 0]).unwrap();
        let spec = PotentialSpec::new(2.0, 2.0).unwrap();
        let ext = extend_potential(&spec, 7.0, &omega, emb.boxed()).unwrap();
        let inner = sample_potential(&spec, &omega).unwrap();
        for k in 0..emb.boxed().len() {
            match emb.omega_index(k) {
                Some(o) => assert_eq!(ext.values()[k], inner.values()[o]),
                None => assert_eq!(ext.values()[k], 7.0),
            }
        }
        let zero_ext = extend_potential(&spec, 0.0, &omega, emb.boxed()).unwrap();
        assert_eq!(zero_ext.values()[0], 0.0);
        // Middle cell of a three-cell Ω-mesh sits at δ_Ω = 0.5.
        let coarse = Arc::new(Mesh::build_interval(0.0, 1.0, 3).unwrap());
        let bigger = BoxEmbedding::padded(&coarse, [3, 0]).unwrap();
        let e = extend_potential(&spec, 0.0, &coarse, bigger.boxed()).unwrap();
        assert_eq!(e.values()[3 + 1], 8.0);
    }

    #[test]
    fn extension_rejects_small_box() {
        let omega = unit(10);
        let small = Arc::new(Mesh::build_interval(0.2, 1.0, 8).unwrap());
        let spec = PotentialSpec::new(2.0, 2.0).unwrap();
        assert!(matches!(
            extend_potential(&spec, 0.0, &omega, &small),
            Err(Error::NotContained(_))
        ));
    }

    #[test]
    fn embedding_round_trip_2d() {
        let omega = Arc::new(Mesh::build_rectangle(1.0, 1.0, 6, 4).unwrap());
        let emb = BoxEmbedding::padded(&omega, [2, 3]).unwrap();
        let g = GridFunction::<f64>::from_fn(&omega, |p| p[0] + 10.0 * p[1]);
        let back = emb.restrict(&emb.extend_by_zero(&g).unwrap()).unwrap();
        assert_eq!(back.values(), g.values());
        assert_eq!(emb.mask().iter().filter(|&&b| b).count(), omega.len());
        let again = BoxEmbedding::from_meshes(&omega, emb.boxed()).unwrap();
        assert_eq!(again.mask(), emb.mask());
    }
}
