//! Simplicial (co)homology with GF(2) coefficients, products and category bounds.

mod complex;
pub mod gf2;
mod invariants;
mod products;

pub use complex::{ChainComplexGF2, CohomologyClass, GroupBasis, HomologyClass};
pub use invariants::{cat_bounds, cuplength, subordinating_class, subordination_number, CatBounds, ClassRef, Subordination};
pub use products::{cap, cup, evaluate, unit};
