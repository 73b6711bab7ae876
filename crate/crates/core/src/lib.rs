//! Conley pairs of isolated critical points, gradient-flow thickenings of unstable
//! manifolds, GF(2) (co)homology and Lusternik-Schnirelmann bounds on closed surfaces.
//!
//! Numerical types are generic over [`Real`]; the aliases below fix the scalar.

mod error;
pub mod conley;
pub mod flow;
pub mod geometry;
pub mod homology;
pub mod minimax;
pub mod thicken;
mod real;

pub use error::{Error, Result};
pub use real::Real;

pub type Surface = geometry::Surface<f64>;
pub type ScalarField = geometry::ScalarField<f64>;
pub type Mesh = geometry::Mesh<f64>;
pub type CriticalPoint = geometry::CriticalPoint<f64>;
pub type Flow<'a> = flow::Flow<'a, f64>;
pub type FlowParams = flow::FlowParams<f64>;
pub type ConleyPair = conley::ConleyPair<f64>;
pub type Thickening = thicken::Thickening<f64>;
pub type Filtration = minimax::Filtration<f64>;

pub type Surface32 = geometry::Surface<f32>;
pub type ScalarField32 = geometry::ScalarField<f32>;
pub type Mesh32 = geometry::Mesh<f32>;
pub type Flow32<'a> = flow::Flow<'a, f32>;
pub type FlowParams32 = flow::FlowParams<f32>;
pub type ConleyPair32 = conley::ConleyPair<f32>;
