//! Built-in surfaces, analytic scalar fields, triangulations and critical points.

pub mod critical;
pub mod field;
pub mod mesh;
pub mod surface;

pub use critical::{
    find_critical_points, Classification, CriticalPoint, CriticalSearch, DEFAULT_TOL_CRIT,
    DEFAULT_TOL_EIG,
};
pub use field::{builtin_field, FieldKind, ScalarField};
pub use mesh::{build_mesh, rp2_mesh, Membership, Mesh, Vertex};
pub use surface::{Param, Surface, SurfaceKind};
