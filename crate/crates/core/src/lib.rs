pub mod error;
pub mod evolve;
pub mod grid;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod operator;
pub mod rearrange;
pub mod scalar;
pub mod spectral;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{GridFunction, VectorField};
pub use mesh::{Domain, Mesh, Point};
pub use scalar::{Field, Real, RealScalar};

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type GridFunction64 = GridFunction<f64>;
pub type GridFunction32 = GridFunction<f32>;
pub type Operator64 = operator::DiscreteOperator<f64>;
pub type Operator32 = operator::DiscreteOperator<f32>;
