use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::mesh::Mesh;
use super::surface::{Param, SurfaceKind};
use crate::real::{dist3, Real};

pub const DEFAULT_TOL_CRIT: f64 = 1e-10;
pub const DEFAULT_TOL_EIG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Classification {
    Nondegenerate { morse_index: usize },
    DegenerateIsolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint<T> {
    pub param: Param<T>,
    pub value: T,
    pub gradient_norm: T,
    pub classification: Classification,
    /// Riemannian Hessian eigenvalues, ascending.
    pub eigenvalues: Vec<T>,
}

impl<T: Real> CriticalPoint<T> {
    pub fn morse_index(&self) -> Option<usize> {
        match self.classification {
            Classification::Nondegenerate { morse_index } => Some(morse_index),
            Classification::DegenerateIsolated => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.classification, Classification::DegenerateIsolated)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalSearch<T> {
    /// Sorted by value, ties by parameter.
    pub points: Vec<CriticalPoint<T>>,
    /// Seeds from which Newton did not reach `tol_crit`.
    pub nonconverged_seeds: usize,
    pub seeds: usize,
    /// Smallest embedded distance between two reported points (isolation certificate
    /// up to mesh resolution); `None` when fewer than two points.
    pub min_separation: Option<T>,
}

impl<T: Real> CriticalSearch<T> {
    pub fn values(&self) -> Vec<T> {
        self.points.iter().map(|c| c.value).collect()
    }
}

/// Newton search seeded from every mesh cell on which a chart-gradient component
/// changes sign, plus every vertex at which `|∇f|` is a local minimum over its ring.
pub fn find_critical_points<T: Real>(
    field: &ScalarField<T>,
    mesh: &Mesh<T>,
    tol_crit: T,
    tol_eig: T,
) -> CriticalSearch<T> {
    let grads: Vec<[T; 2]> = mesh
        .vertices
        .par_iter()
        .map(|v| field.chart_gradient(v.param))
        .collect();
    let norms: Vec<T> = mesh
        .vertices
        .par_iter()
        .map(|v| field.gradient_norm(v.param))
        .collect();
    let dim = field.dim();
    let n_cells = if mesh.dim() == 2 { mesh.triangles.len() } else { mesh.edges.len() };
    let mut seeds: Vec<usize> = Vec::new();
    for c in 0..n_cells {
        let cell = mesh.cell(c);
        let changes = (0..dim).all(|k| {
            let pos = cell.iter().any(|&v| grads[v][k] >= T::zero());
            let neg = cell.iter().any(|&v| grads[v][k] <= T::zero());
            pos && neg
        });
        if changes {
            let best = *cell
                .iter()
                .min_by(|&&a, &&b| norms[a].partial_cmp(&norms[b]).unwrap())
                .unwrap();
            seeds.push(best);
        }
    }
    for v in 0..mesh.len() {
        if mesh.neighbors[v].iter().all(|&w| norms[v] <= norms[w]) {
            seeds.push(v);
        }
    }
    seeds.sort_unstable();
    seeds.dedup();

    let results: Vec<Option<Param<T>>> = seeds
        .par_iter()
        .map(|&s| newton(field, mesh.vertices[s].param, tol_crit))
        .collect();
    let nonconverged = results.iter().filter(|r| r.is_none()).count();
    let merge_radius = mesh.max_edge_length();

    let mut found: Vec<(Param<T>, T)> = Vec::new();
    for p in results.into_iter().flatten() {
        let x = field.surface.chart(p).unwrap();
        let g = field.gradient_norm(p);
        match found
            .iter_mut()
            .find(|(q, _)| dist3(&field.surface.chart(*q).unwrap(), &x) <= merge_radius)
        {
            Some(entry) => {
                if g < entry.1 {
                    *entry = (p, g);
                }
            }
            None => found.push((p, g)),
        }
    }

    let mut points: Vec<CriticalPoint<T>> = found
        .into_iter()
        .map(|(p, g)| classify(field, p, g, tol_eig))
        .collect();
    points.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap()
            .then(a.param[0].partial_cmp(&b.param[0]).unwrap())
            .then(a.param[1].partial_cmp(&b.param[1]).unwrap())
    });
    let mut min_sep: Option<T> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = dist3(
                &field.surface.chart(points[i].param).unwrap(),
                &field.surface.chart(points[j].param).unwrap(),
            );
            min_sep = Some(min_sep.map_or(d, |m: T| m.min(d)));
        }
    }
    CriticalSearch { points, nonconverged_seeds: nonconverged, seeds: seeds.len(), min_separation: min_sep }
}

fn classify<T: Real>(field: &ScalarField<T>, p: Param<T>, g: T, tol_eig: T) -> CriticalPoint<T> {
    let eigenvalues = field.hessian_eigenvalues(p);
    let classification = if eigenvalues.iter().all(|l| l.abs() > tol_eig) {
        Classification::Nondegenerate {
            morse_index: eigenvalues.iter().filter(|&&l| l < T::zero()).count(),
        }
    } else {
        Classification::DegenerateIsolated
    };
    CriticalPoint { param: p, value: field.value(p), gradient_norm: g, classification, eigenvalues }
}

/// Newton iteration on the chart gradient. Iterates past `tol_crit` until the
/// step stalls so that degenerate (linearly converging) zeros are pinned down.
fn newton<T: Real>(field: &ScalarField<T>, start: Param<T>, tol_crit: T) -> Option<Param<T>> {
    let surface = &field.surface;
    let max_step = T::lit(0.25);
    let mut p = start;
    for _ in 0..300 {
        if let SurfaceKind::Sphere { .. } = surface.kind {
            if p[1].cos().abs() < T::lit(1e-3) {
                return None;
            }
        }
        let d = field.chart_gradient(p);
        let h = field.chart_hessian(p);
        let step = if field.dim() == 1 {
            if h[0][0] == T::zero() {
                break;
            }
            [-d[0] / h[0][0], T::zero()]
        } else {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if det == T::zero() {
                break;
            }
            [
                -(h[1][1] * d[0] - h[0][1] * d[1]) / det,
                -(h[0][0] * d[1] - h[1][0] * d[0]) / det,
            ]
        };
        let len = (step[0] * step[0] + step[1] * step[1]).sqrt();
        if !len.is_finite() {
            return None;
        }
        let scale = if len > max_step { max_step / len } else { T::one() };
        p = surface.wrap([p[0] + step[0] * scale, p[1] + step[1] * scale]);
        if len < T::lit(1e-14) {
            break;
        }
    }
    if field.gradient_norm(p) <= tol_crit {
        Some(p)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::field::{builtin_field, FieldKind};
    use crate::geometry::mesh::build_mesh;
    use crate::geometry::surface::Surface;

    fn search(field: &ScalarField<f64>, n: usize) -> CriticalSearch<f64> {
        let mesh = build_mesh(&field.surface, Some(field), n).unwrap();
        find_critical_points(field, &mesh, DEFAULT_TOL_CRIT, DEFAULT_TOL_EIG)
    }

    #[test]
    fn cos_theta_has_min_and_max() {
        let f = builtin_field(FieldKind::CosTheta, Surface::circle()).unwrap();
        let s = search(&f, 64);
        assert_eq!(s.points.len(), 2);
        assert!((s.points[0].value + 1.0).abs() < 1e-12);
        assert!((s.points[1].value - 1.0).abs() < 1e-12);
        assert_eq!(s.points[0].morse_index(), Some(0));
        assert_eq!(s.points[1].morse_index(), Some(1));
    }

    #[test]
    fn cubic_circle_degenerate_points() {
        let f = builtin_field(FieldKind::CubicCircle, Surface::circle()).unwrap();
        let s = search(&f, 64);
        let values: Vec<f64> = s.values();
        assert_eq!(values.len(), 4, "{:?}", s.points);
        assert!((values[0] + 1.0).abs() < 1e-12);
        assert!(values[1].abs() < 1e-12 && values[2].abs() < 1e-12);
        assert!((values[3] - 1.0).abs() < 1e-12);
        assert!(s.points[1].is_degenerate() && s.points[2].is_degenerate());
        assert!(!s.points[0].is_degenerate() && !s.points[3].is_degenerate());
        // locations: 0 and π
        let mut locs: Vec<f64> = s.points[1..3].iter().map(|c| c.param[0]).collect();
        locs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let near = |x: f64, y: f64| crate::real::angle_delta(x, y).abs() < 1e-4;
        assert!(near(locs[0], 0.0) || near(locs[1], 0.0));
        assert!(near(locs[0], std::f64::consts::PI) || near(locs[1], std::f64::consts::PI));
    }

    #[test]
    fn sphere_height_two_points() {
        let f = builtin_field(FieldKind::Height, Surface::sphere(1.0).unwrap()).unwrap();
        let s = search(&f, 32);
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.points[0].morse_index(), Some(0));
        assert_eq!(s.points[1].morse_index(), Some(2));
        assert!((s.points[1].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_well_equal_maxima() {
        let f = builtin_field(FieldKind::DoubleWell, Surface::circle()).unwrap();
        let s = search(&f, 64);
        assert_eq!(s.points.len(), 4);
        assert_eq!(s.points[2].morse_index(), Some(1));
        assert!((s.points[2].value - s.points[3].value).abs() < 1e-12);
    }
}
