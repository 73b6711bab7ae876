use std::collections::HashMap;
use std::fmt::Write as _;

use super::field::ScalarField;
use super::surface::{Param, Surface, SurfaceKind};
use crate::error::{Error, Result};
use crate::real::{angle_delta, dist3, norm3, Real};

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<T> {
    pub param: Param<T>,
    pub pos: [T; 3],
    pub value: T,
}

/// How a continuum point relates to a vertex set, with a one-ring guard band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    /// Nearest vertex and its whole one-ring are in the set.
    Inside,
    /// Nearest vertex and its whole one-ring are outside the set.
    Outside,
    Borderline,
}

/// Triangulated (or, in 1D, polygonal) sampling of a surface.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    pub surface: Surface<T>,
    pub resolution: usize,
    pub vertices: Vec<Vertex<T>>,
    /// Sorted vertex pairs `a < b`.
    pub edges: Vec<[usize; 2]>,
    /// Sorted vertex triples; empty for 1D meshes.
    pub triangles: Vec<[usize; 3]>,
    pub neighbors: Vec<Vec<usize>>,
    vertex_cells: Vec<Vec<usize>>,
    locator: Option<Locator<T>>,
}

impl<T: Real> Mesh<T> {
    pub fn dim(&self) -> usize {
        if self.triangles.is_empty() {
            1
        } else {
            2
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn values(&self) -> Vec<T> {
        self.vertices.iter().map(|v| v.value).collect()
    }

    pub fn max_edge_length(&self) -> T {
        self.edges
            .iter()
            .map(|&[a, b]| dist3(&self.vertices[a].pos, &self.vertices[b].pos))
            .fold(T::zero(), T::max)
    }

    /// Largest change of `f` across a mesh edge.
    pub fn max_edge_value_gap(&self) -> T {
        self.edges
            .iter()
            .map(|&[a, b]| (self.vertices[a].value - self.vertices[b].value).abs())
            .fold(T::zero(), T::max)
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let all = vec![true; self.vertices.len()];
        self.component_of(0, &all).len() == self.vertices.len()
    }

    /// Vertices reachable from `start` through edges whose ends both satisfy `mask`.
    pub fn component_of(&self, start: usize, mask: &[bool]) -> Vec<usize> {
        if !mask[start] {
            return Vec::new();
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            out.push(v);
            for &w in &self.neighbors[v] {
                if mask[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Number of connected components of the subgraph induced by `mask`.
    pub fn count_components(&self, mask: &[bool]) -> usize {
        let mut seen = vec![false; self.vertices.len()];
        let mut count = 0;
        for v in 0..self.vertices.len() {
            if mask[v] && !seen[v] {
                count += 1;
                for w in self.component_of(v, mask) {
                    seen[w] = true;
                }
            }
        }
        count
    }

    /// Cells (triangles in 2D, edges in 1D) incident to a vertex.
    pub fn cells_of(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    pub fn cell(&self, c: usize) -> Vec<usize> {
        if self.dim() == 2 {
            self.triangles[c].to_vec()
        } else {
            self.edges[c].to_vec()
        }
    }

    /// Nearest mesh vertex to a parameter point (chart surfaces only).
    pub fn nearest_vertex(&self, p: Param<T>) -> usize {
        let x = self
            .surface
            .chart(p)
            .expect("nearest-vertex lookup needs a chart surface");
        self.nearest_vertex_to_point(&x)
    }

    pub fn nearest_vertex_to_point(&self, x: &[T; 3]) -> usize {
        self.locator
            .as_ref()
            .expect("nearest-vertex lookup needs embedded vertices")
            .nearest(x, &self.vertices)
    }

    /// Guard-band membership of a parameter point in a vertex set.
    pub fn classify(&self, set: &[bool], p: Param<T>) -> Membership {
        self.classify_vertex(set, self.nearest_vertex(p))
    }

    pub fn classify_vertex(&self, set: &[bool], v: usize) -> Membership {
        let inside = set[v];
        let mixed = self.neighbors[v].iter().any(|&w| set[w] != inside);
        match (inside, mixed) {
            (_, true) => Membership::Borderline,
            (true, false) => Membership::Inside,
            (false, false) => Membership::Outside,
        }
    }

    /// Whether the nearest vertex or one of its neighbours lies in `set`.
    pub fn near_set(&self, set: &[bool], p: Param<T>) -> bool {
        let v = self.nearest_vertex(p);
        set[v] || self.neighbors[v].iter().any(|&w| set[w])
    }

    /// Point of a cell with the given barycentric weights, as a parameter point.
    pub fn interpolate(&self, cell: &[usize], weights: &[T]) -> Param<T> {
        match self.surface.kind {
            SurfaceKind::Sphere { .. } => {
                let mut x = [T::zero(); 3];
                for (&v, &w) in cell.iter().zip(weights) {
                    for (k, xk) in x.iter_mut().enumerate() {
                        *xk = *xk + w * self.vertices[v].pos[k];
                    }
                }
                let n = norm3(&x);
                let radius = match self.surface.kind {
                    SurfaceKind::Sphere { radius } => radius,
                    _ => unreachable!(),
                };
                let x = [x[0] / n * radius, x[1] / n * radius, x[2] / n * radius];
                self.surface.sphere_param_of(&x).unwrap_or([T::zero(); 2])
            }
            SurfaceKind::Rp2Triangulation => {
                let mut p = [T::zero(); 2];
                for (&v, &w) in cell.iter().zip(weights) {
                    p[0] = p[0] + w * self.vertices[v].param[0];
                    p[1] = p[1] + w * self.vertices[v].param[1];
                }
                p
            }
            _ => {
                // unwrap angles relative to the first vertex
                let base = self.vertices[cell[0]].param;
                let mut p = [T::zero(); 2];
                for (&v, &w) in cell.iter().zip(weights) {
                    let q = self.vertices[v].param;
                    for k in 0..2 {
                        let d = if self.surface.periods()[k].is_some() {
                            angle_delta(base[k], q[k])
                        } else {
                            q[k] - base[k]
                        };
                        p[k] = p[k] + w * d;
                    }
                }
                self.surface.wrap([base[0] + p[0], base[1] + p[1]])
            }
        }
    }

    /// One barycentric subdivision of a 2D mesh.
    pub fn barycentric_subdivision(&self) -> Mesh<T> {
        assert_eq!(self.dim(), 2, "barycentric subdivision implemented for 2D meshes");
        let mut vertices = self.vertices.clone();
        let mut edge_mid = HashMap::new();
        let avg = |ids: &[usize], vs: &[Vertex<T>]| -> Vertex<T> {
            let n = T::from_usize(ids.len()).unwrap();
            let mut out = Vertex {
                param: [T::zero(); 2],
                pos: [T::zero(); 3],
                value: T::zero(),
            };
            for &i in ids {
                for k in 0..2 {
                    out.param[k] = out.param[k] + vs[i].param[k] / n;
                }
                for k in 0..3 {
                    out.pos[k] = out.pos[k] + vs[i].pos[k] / n;
                }
                out.value = out.value + vs[i].value / n;
            }
            out
        };
        for &[a, b] in &self.edges {
            edge_mid.insert([a, b], vertices.len());
            let v = avg(&[a, b], &self.vertices);
            vertices.push(v);
        }
        let mut triangles = Vec::new();
        for t in &self.triangles {
            let centre = vertices.len();
            vertices.push(avg(t, &self.vertices));
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                let m = edge_mid[&[t[i], t[j]]];
                triangles.push([t[i], m, centre]);
                triangles.push([t[j], m, centre]);
            }
        }
        assemble(self.surface, self.resolution, vertices, triangles, Vec::new())
    }

    /// Plain-text export: `V E F`, then `u v x y z f` per vertex, then one line per
    /// triangle (or per edge for 1D meshes, where `F = 0`).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.vertices.len(), self.edges.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(
                s,
                "{} {} {} {} {} {}",
                v.param[0].as_f64(),
                v.param[1].as_f64(),
                v.pos[0].as_f64(),
                v.pos[1].as_f64(),
                v.pos[2].as_f64(),
                v.value.as_f64()
            );
        }
        if self.triangles.is_empty() {
            for e in &self.edges {
                let _ = writeln!(s, "{} {}", e[0], e[1]);
            }
        } else {
            for t in &self.triangles {
                let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
            }
        }
        s
    }

    pub fn from_text(surface: Surface<T>, resolution: usize, text: &str) -> Result<Mesh<T>> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty mesh file"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad header")))
            .collect::<Result<_>>()?;
        if header.len() != 3 {
            return Err(bad("header must be `V E F`"));
        }
        let (nv, ne, nf) = (header[0], header[1], header[2]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let x: Vec<f64> = lines
                .next()
                .ok_or_else(|| bad("missing vertex line"))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("bad vertex line")))
                .collect::<Result<_>>()?;
            if x.len() != 6 {
                return Err(bad("vertex line needs 6 numbers"));
            }
            vertices.push(Vertex {
                param: [T::lit(x[0]), T::lit(x[1])],
                pos: [T::lit(x[2]), T::lit(x[3]), T::lit(x[4])],
                value: T::lit(x[5]),
            });
        }
        let cells = if nf == 0 { ne } else { nf };
        let arity = if nf == 0 { 2 } else { 3 };
        let mut rows = Vec::with_capacity(cells);
        for _ in 0..cells {
            let ids: Vec<usize> = lines
                .next()
                .ok_or_else(|| bad("missing cell line"))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("bad cell line")))
                .collect::<Result<_>>()?;
            if ids.len() != arity || ids.iter().any(|&i| i >= nv) {
                return Err(bad("bad cell line"));
            }
            rows.push(ids);
        }
        let mesh = if nf == 0 {
            let edges = rows.into_iter().map(|r| [r[0], r[1]]).collect();
            assemble(surface, resolution, vertices, Vec::new(), edges)
        } else {
            let tris = rows.into_iter().map(|r| [r[0], r[1], r[2]]).collect();
            assemble(surface, resolution, vertices, tris, Vec::new())
        };
        if mesh.edges.len() != ne {
            return Err(bad("edge count does not match header"));
        }
        Ok(mesh)
    }
}

/// Samples `surface` at resolution `n` (vertices per period) and records `field` values.
pub fn build_mesh<T: Real>(
    surface: &Surface<T>,
    field: Option<&ScalarField<T>>,
    n: usize,
) -> Result<Mesh<T>> {
    if n < MIN_RESOLUTION {
        return Err(Error::ResolutionTooSmall { n, min: MIN_RESOLUTION });
    }
    let mut mesh = match surface.kind {
        SurfaceKind::Circle => circle_mesh(*surface, n),
        SurfaceKind::Torus { .. } => torus_mesh(*surface, n),
        SurfaceKind::Sphere { radius } => {
            let level = sphere_level(n);
            icosphere(*surface, radius, level, n)
        }
        SurfaceKind::Rp2Triangulation => rp2_mesh(0),
    };
    if let Some(f) = field {
        for v in &mut mesh.vertices {
            v.value = f.value(v.param);
        }
    }
    Ok(mesh)
}

/// Icosahedral subdivision level used for a sphere requested at `n` vertices per period.
pub fn sphere_level(n: usize) -> usize {
    let mut level = 0;
    while 5 * (1usize << level) < n {
        level += 1;
    }
    level.max(1)
}

/// Standard minimal triangulation of ℝP², optionally barycentrically subdivided.
pub fn rp2_mesh<T: Real>(subdivisions: usize) -> Mesh<T> {
    const FACES: [[usize; 3]; 10] = [
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 5],
        [0, 1, 5],
        [1, 2, 4],
        [2, 3, 5],
        [1, 3, 4],
        [2, 4, 5],
        [1, 3, 5],
    ];
    let vertices = (0..6)
        .map(|i| Vertex {
            param: [T::from_usize(i).unwrap(), T::zero()],
            pos: [T::zero(); 3],
            value: T::zero(),
        })
        .collect();
    let mut mesh = assemble(Surface::rp2(), 0, vertices, FACES.to_vec(), Vec::new());
    for _ in 0..subdivisions {
        mesh = mesh.barycentric_subdivision();
    }
    mesh
}

fn circle_mesh<T: Real>(surface: Surface<T>, n: usize) -> Mesh<T> {
    let step = T::TAU() / T::from_usize(n).unwrap();
    let vertices = (0..n)
        .map(|i| {
            let p = [step * T::from_usize(i).unwrap(), T::zero()];
            Vertex { param: p, pos: surface.chart(p).unwrap(), value: T::zero() }
        })
        .collect();
    let edges = (0..n).map(|i| sorted2(i, (i + 1) % n)).collect();
    assemble(surface, n, vertices, Vec::new(), edges)
}

fn torus_mesh<T: Real>(surface: Surface<T>, n: usize) -> Mesh<T> {
    let step = T::TAU() / T::from_usize(n).unwrap();
    let id = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut vertices = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let p = [step * T::from_usize(i).unwrap(), step * T::from_usize(j).unwrap()];
            vertices.push(Vertex { param: p, pos: surface.chart(p).unwrap(), value: T::zero() });
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    assemble(surface, n, vertices, triangles, Vec::new())
}

fn icosphere<T: Real>(surface: Surface<T>, radius: T, level: usize, n: usize) -> Mesh<T> {
    // icosahedron with vertices at both poles of the z axis
    let mut pts: Vec<[f64; 3]> = vec![[0.0, 0.0, 1.0]];
    let h = 1.0 / 5f64.sqrt();
    let rho = 2.0 * h;
    for k in 0..5 {
        let a = std::f64::consts::TAU * k as f64 / 5.0;
        pts.push([rho * a.cos(), rho * a.sin(), h]);
    }
    for k in 0..5 {
        let a = std::f64::consts::TAU * (k as f64 + 0.5) / 5.0;
        pts.push([rho * a.cos(), rho * a.sin(), -h]);
    }
    pts.push([0.0, 0.0, -1.0]);
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for k in 0..5 {
        let (u0, u1) = (1 + k, 1 + (k + 1) % 5);
        let (l0, l1) = (6 + k, 6 + (k + 1) % 5);
        faces.push([0, u0, u1]);
        faces.push([u0, l0, u1]);
        faces.push([u1, l0, l1]);
        faces.push([11, l0, l1]);
    }
    for _ in 0..level {
        let mut cache: HashMap<[usize; 2], usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| -> usize {
            let key = sorted2(a, b);
            *cache.entry(key).or_insert_with(|| {
                let m = [
                    pts[a][0] + pts[b][0],
                    pts[a][1] + pts[b][1],
                    pts[a][2] + pts[b][2],
                ];
                let l = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                pts.push([m[0] / l, m[1] / l, m[2] / l]);
                pts.len() - 1
            })
        };
        for f in &faces {
            let ab = mid(f[0], f[1], &mut pts);
            let bc = mid(f[1], f[2], &mut pts);
            let ca = mid(f[2], f[0], &mut pts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let vertices = pts
        .iter()
        .map(|q| {
            let x = [T::lit(q[0]) * radius, T::lit(q[1]) * radius, T::lit(q[2]) * radius];
            let param = surface.sphere_param_of(&x).unwrap();
            Vertex { param, pos: x, value: T::zero() }
        })
        .collect();
    assemble(surface, n, vertices, faces, Vec::new())
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn assemble<T: Real>(
    surface: Surface<T>,
    resolution: usize,
    vertices: Vec<Vertex<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
) -> Mesh<T> {
    let mut triangles: Vec<[usize; 3]> = triangles
        .into_iter()
        .map(|mut t| {
            t.sort_unstable();
            t
        })
        .collect();
    triangles.sort_unstable();
    triangles.dedup();
    let mut edges: Vec<[usize; 2]> = if triangles.is_empty() {
        edges.into_iter().map(|e| sorted2(e[0], e[1])).collect()
    } else {
        triangles
            .iter()
            .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[0], t[2]]])
            .collect()
    };
    edges.sort_unstable();
    edges.dedup();
    let mut neighbors = vec![Vec::new(); vertices.len()];
    for &[a, b] in &edges {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    let mut vertex_cells = vec![Vec::new(); vertices.len()];
    if triangles.is_empty() {
        for (c, e) in edges.iter().enumerate() {
            for &v in e {
                vertex_cells[v].push(c);
            }
        }
    } else {
        for (c, t) in triangles.iter().enumerate() {
            for &v in t {
                vertex_cells[v].push(c);
            }
        }
    }
    let mut mesh = Mesh {
        surface,
        resolution,
        vertices,
        edges,
        triangles,
        neighbors,
        vertex_cells,
        locator: None,
    };
    if surface.has_chart() && !mesh.vertices.is_empty() {
        let cell = mesh.max_edge_length();
        mesh.locator = Some(Locator::new(&mesh.vertices, cell));
    }
    mesh
}

/// Uniform bucket grid over embedded vertex positions.
#[derive(Debug, Clone)]
struct Locator<T> {
    cell: T,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl<T: Real> Locator<T> {
    fn new(vertices: &[Vertex<T>], cell: T) -> Self {
        let cell = if cell > T::zero() { cell } else { T::one() };
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            buckets.entry(Self::key_of(cell, &v.pos)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key_of(cell: T, x: &[T; 3]) -> [i64; 3] {
        let k = |c: T| (c / cell).floor().to_i64().unwrap_or(0);
        [k(x[0]), k(x[1]), k(x[2])]
    }

    fn nearest(&self, x: &[T; 3], vertices: &[Vertex<T>]) -> usize {
        let key = Self::key_of(self.cell, x);
        let mut best: Option<(T, usize)> = None;
        let mut radius = 1i64;
        loop {
            for dx in -radius..=radius {
                for dy in -radius..=radius {
                    for dz in -radius..=radius {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != radius && radius > 1 {
                            continue;
                        }
                        if let Some(ids) = self.buckets.get(&[key[0] + dx, key[1] + dy, key[2] + dz]) {
                            for &i in ids {
                                let d = dist3(&vertices[i].pos, x);
                                if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                                    best = Some((d, i));
                                }
                            }
                        }
                    }
                }
            }
            if let Some((d, i)) = best {
                // anything closer must lie within the searched cube
                if d <= self.cell * T::from_i64(radius).unwrap() {
                    return i;
                }
            }
            radius += 1;
            if radius > 1 << 20 {
                return best.map(|b| b.1).unwrap_or(0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::field::{builtin_field, FieldKind};

    #[test]
    fn torus_mesh_euler_characteristic() {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        let m = build_mesh(&s, None, 64).unwrap();
        assert_eq!(m.vertices.len(), 64 * 64);
        assert_eq!(m.euler_characteristic(), 0);
        assert!(m.is_connected());
    }

    #[test]
    fn sphere_mesh_level_four() {
        let s = Surface::<f64>::sphere(1.0).unwrap();
        let m = build_mesh(&s, None, 64).unwrap();
        assert_eq!(sphere_level(64), 4);
        assert_eq!(m.vertices.len(), 2562);
        assert_eq!(m.euler_characteristic(), 2);
        // area by flat triangles approaches 4π from below
        let area: f64 = m
            .triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (m.vertices[t[0]].pos, m.vertices[t[1]].pos, m.vertices[t[2]].pos);
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let cr = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
                0.5 * norm3(&cr)
            })
            .sum();
        assert!((area - 4.0 * std::f64::consts::PI).abs() < 0.05, "{area}");
    }

    #[test]
    fn rp2_counts() {
        let m = rp2_mesh::<f64>(0);
        assert_eq!((m.vertices.len(), m.edges.len(), m.triangles.len()), (6, 15, 10));
        assert_eq!(m.euler_characteristic(), 1);
        let sd = rp2_mesh::<f64>(1);
        assert_eq!(sd.euler_characteristic(), 1);
        assert_eq!(sd.triangles.len(), 60);
    }

    #[test]
    fn circle_mesh_has_no_seam_duplicate() {
        let m = build_mesh(&Surface::<f64>::circle(), None, 16).unwrap();
        assert_eq!(m.vertices.len(), 16);
        assert_eq!(m.edges.len(), 16);
        assert_eq!(m.euler_characteristic(), 0);
    }

    #[test]
    fn resolution_guard() {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        assert_eq!(
            build_mesh(&s, None, 4).unwrap_err(),
            Error::ResolutionTooSmall { n: 4, min: 8 }
        );
    }

    #[test]
    fn vertex_values_follow_field() {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        let f = builtin_field(FieldKind::Height, s).unwrap();
        let m = build_mesh(&s, Some(&f), 16).unwrap();
        for v in &m.vertices {
            assert_eq!(v.value, f.value(v.param));
        }
        assert!(m.triangles.iter().all(|t| t[0] != t[1] && t[1] != t[2]));
    }

    #[test]
    fn nearest_vertex_matches_brute_force() {
        let s = Surface::<f64>::sphere(1.0).unwrap();
        let m = build_mesh(&s, None, 16).unwrap();
        for i in 0..200 {
            let p = [0.031 * i as f64, -1.5 + 0.015 * i as f64];
            let x = s.chart(p).unwrap();
            let brute = (0..m.len())
                .min_by(|&a, &b| {
                    dist3(&m.vertices[a].pos, &x)
                        .partial_cmp(&dist3(&m.vertices[b].pos, &x))
                        .unwrap()
                })
                .unwrap();
            let got = m.nearest_vertex(p);
            assert!((dist3(&m.vertices[got].pos, &x) - dist3(&m.vertices[brute].pos, &x)).abs() < 1e-12);
        }
    }

    #[test]
    fn text_export_round_trips() {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        let f = builtin_field(FieldKind::Height, s).unwrap();
        let m = build_mesh(&s, Some(&f), 8).unwrap();
        let text = m.to_text();
        assert!(text.starts_with("64 192 128\n"));
        let back = Mesh::from_text(s, 8, &text).unwrap();
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.vertices, m.vertices);
        let c = build_mesh(&Surface::<f64>::circle(), None, 8).unwrap();
        let back = Mesh::from_text(Surface::<f64>::circle(), 8, &c.to_text()).unwrap();
        assert_eq!(back.edges, c.edges);
    }
}
