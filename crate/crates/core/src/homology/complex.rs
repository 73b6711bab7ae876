use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::Serialize;

use super::gf2::{self, Column, Echelon, Reduction};
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::real::Real;

/// A homology class given by a representative (relative) cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyClass {
    pub degree: usize,
    /// Indices of the degree-`degree` simplices in the support.
    pub chain: Column,
}

/// A cohomology class given by a representative cocycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohomologyClass {
    pub degree: usize,
    pub cochain: Column,
}

/// Basis of one (co)homology group plus a solver for coordinates of (co)cycles.
#[derive(Debug, Clone)]
pub struct GroupBasis {
    pub representatives: Vec<Column>,
    /// Spans (co)boundaries (unlabelled) and representatives (labelled by position).
    solver: Echelon,
}

impl GroupBasis {
    pub fn rank(&self) -> usize {
        self.representatives.len()
    }

    /// Coordinates of a (co)cycle in the basis, or `None` if it is not a (co)cycle.
    pub fn coordinates(&self, v: &[usize]) -> Option<Vec<bool>> {
        let labels = self.solver.solve(v)?;
        let mut out = vec![false; self.representatives.len()];
        for l in labels {
            out[l] = true;
        }
        Some(out)
    }

    /// Whether a (co)cycle is zero in (co)homology.
    pub fn is_trivial(&self, v: &[usize]) -> bool {
        self.coordinates(v).is_some_and(|c| c.iter().all(|&b| !b))
    }

    /// Representative of the class with the given coordinates.
    pub fn combine(&self, coords: &[bool]) -> Column {
        let mut out = Vec::new();
        for (r, &b) in self.representatives.iter().zip(coords) {
            if b {
                gf2::add_assign(&mut out, r);
            }
        }
        out
    }
}

/// Simplicial chain complex over GF(2), optionally relative to a full subcomplex `A`.
///
/// Simplices are stored as increasing vertex lists (vertex order = index order) and
/// sorted lexicographically within each degree. Simplices of `A` stay in the lists but
/// are inactive: they carry no chains and are dropped from every boundary.
#[derive(Debug, Clone)]
pub struct ChainComplexGF2 {
    pub n_vertices: usize,
    pub simplices: Vec<Vec<Vec<usize>>>,
    pub in_a: Vec<Vec<bool>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    /// `boundaries[k][j]` is `∂` of the `j`-th `k`-simplex.
    boundaries: Vec<Vec<Column>>,
    homology: OnceLock<Vec<GroupBasis>>,
    cohomology: OnceLock<Vec<GroupBasis>>,
}

impl ChainComplexGF2 {
    /// Closure under faces of the given simplices on `n_vertices` vertices; every vertex
    /// is included. `a_vertices` marks the vertices of the relative part (taken as the
    /// full subcomplex they induce).
    pub fn from_simplices(n_vertices: usize, top: &[Vec<usize>], a_vertices: Option<&[bool]>) -> Self {
        let mut sets: Vec<std::collections::BTreeSet<Vec<usize>>> = vec![Default::default()];
        for v in 0..n_vertices {
            sets[0].insert(vec![v]);
        }
        for s in top {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            let k = s.len() - 1;
            while sets.len() <= k {
                sets.push(Default::default());
            }
            // all faces
            let n = s.len();
            for m in 1u32..(1 << n) {
                let face: Vec<usize> = (0..n).filter(|i| m & (1 << i) != 0).map(|i| s[i]).collect();
                sets[face.len() - 1].insert(face);
            }
        }
        while sets.len() > 1 && sets.last().is_some_and(|s| s.is_empty()) {
            sets.pop();
        }
        let simplices: Vec<Vec<Vec<usize>>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let in_a: Vec<Vec<bool>> = simplices
            .iter()
            .map(|ss| {
                ss.iter()
                    .map(|s| a_vertices.is_some_and(|a| s.iter().all(|&v| a[v])))
                    .collect()
            })
            .collect();
        let index: Vec<HashMap<Vec<usize>, usize>> = simplices
            .iter()
            .map(|ss| ss.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        let mut boundaries = vec![vec![Vec::new(); simplices[0].len()]];
        for k in 1..simplices.len() {
            let cols = simplices[k]
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    if in_a[k][j] {
                        return Vec::new();
                    }
                    let faces: Vec<usize> = (0..s.len())
                        .map(|drop| {
                            let f: Vec<usize> = s.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &v)| v).collect();
                            index[k - 1][&f]
                        })
                        .filter(|&f| !in_a[k - 1][f])
                        .collect();
                    gf2::from_indices(faces)
                })
                .collect();
            boundaries.push(cols);
        }
        Self {
            n_vertices,
            simplices,
            in_a,
            index,
            boundaries,
            homology: OnceLock::new(),
            cohomology: OnceLock::new(),
        }
    }

    /// Complex of a mesh: triangles (or edges) and all their faces.
    pub fn from_mesh<T: Real>(mesh: &Mesh<T>) -> Self {
        Self::from_simplices(mesh.len(), &top_cells(mesh), None)
    }

    /// Full subcomplex induced by `total` (all vertices when `None`), relative to the
    /// full subcomplex induced by `a`.
    pub fn of_mesh_subset<T: Real>(mesh: &Mesh<T>, total: Option<&[bool]>, a: Option<&[bool]>) -> Result<Self> {
        if let (Some(t), Some(a)) = (total, a) {
            if let Some(v) = (0..mesh.len()).find(|&v| a[v] && !t[v]) {
                return Err(Error::NotASubcomplex(format!("vertex {v} of A lies outside the complex")));
            }
        }
        let cells: Vec<Vec<usize>> = top_cells(mesh)
            .into_iter()
            .flat_map(|c| faces_within(&c, total))
            .collect();
        let mut cx = Self::from_simplices(mesh.len(), &cells, a);
        if let Some(t) = total {
            cx = cx.induced(t);
        }
        Ok(cx)
    }

    /// Full subcomplex on the vertices in `mask`, keeping the relative part restricted to it.
    /// Vertex indices are preserved; vertices outside `mask` are dropped.
    pub fn induced(&self, mask: &[bool]) -> Self {
        let a: Vec<bool> = (0..self.n_vertices)
            .map(|v| self.index[0].get(&vec![v]).is_some_and(|&i| self.in_a[0][i]))
            .collect();
        let kept: Vec<Vec<usize>> = self
            .simplices
            .iter()
            .flatten()
            .filter(|s| s.iter().all(|&v| mask[v]))
            .cloned()
            .collect();
        let mut cx = Self::from_simplices(0, &kept, self.is_relative().then_some(&a[..]));
        cx.n_vertices = self.n_vertices;
        cx
    }

    /// The same simplices without the relative part.
    pub fn absolute(&self) -> Self {
        let tops: Vec<Vec<usize>> = self.simplices.iter().flatten().cloned().collect();
        let mut cx = Self::from_simplices(0, &tops, None);
        cx.n_vertices = self.n_vertices;
        cx
    }

    pub fn is_relative(&self) -> bool {
        self.in_a.iter().flatten().any(|&b| b)
    }

    /// Top degree with at least one simplex.
    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, |s| s.len())
    }

    pub fn index_of(&self, simplex: &[usize]) -> Option<usize> {
        self.index.get(simplex.len().checked_sub(1)?)?.get(simplex).copied()
    }

    pub fn is_active(&self, k: usize, j: usize) -> bool {
        !self.in_a[k][j]
    }

    /// Boundary matrix `∂_k` by columns (empty for `k = 0` and beyond the top degree).
    pub fn boundary_matrix(&self, k: usize) -> &[Column] {
        self.boundaries.get(k).map_or(&[], |b| &b[..])
    }

    /// Coboundary matrix `δ^k: C^k → C^{k+1}` by columns.
    pub fn coboundary_matrix(&self, k: usize) -> Vec<Column> {
        gf2::transpose(self.boundary_matrix(k + 1), self.count(k))
    }

    pub fn boundary_of(&self, k: usize, chain: &[usize]) -> Column {
        let mut out = Vec::new();
        if k == 0 {
            return out;
        }
        for &j in chain {
            gf2::add_assign(&mut out, &self.boundaries[k][j]);
        }
        out
    }

    pub fn coboundary_of(&self, k: usize, cochain: &[usize]) -> Column {
        let mut idx = Vec::new();
        if k + 1 < self.simplices.len() {
            let mask = dense(cochain, self.count(k));
            for (j, col) in self.boundaries[k + 1].iter().enumerate() {
                if col.iter().filter(|&&i| mask[i]).count() % 2 == 1 {
                    idx.push(j);
                }
            }
        }
        idx
    }

    /// Whether `∂∘∂ = 0` and `δ∘δ = 0` hold for every degree.
    pub fn check_complex(&self) -> bool {
        for k in 2..self.simplices.len() {
            for col in &self.boundaries[k] {
                if !self.boundary_of(k - 1, col).is_empty() {
                    return false;
                }
            }
        }
        // δδ = 0 is the transpose of ∂∂ = 0; checked on unit cochains for completeness
        for k in 0..self.simplices.len().saturating_sub(2) {
            let cob = self.coboundary_matrix(k);
            for col in &cob {
                if !self.coboundary_of(k + 1, col).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    fn basis_for(&self, cols_k: Vec<Column>, cols_killer: Vec<Column>, active: Vec<bool>, rows: usize) -> GroupBasis {
        // zero columns of the reduced map give the (co)cycle basis `z_j`; lows of the
        // reduced killer map mark the indices whose cycles are (co)boundaries
        let kernel = Reduction::new(&cols_k, rows.max(1));
        let killer = Reduction::new(&cols_killer, active.len());
        let mut killed = vec![false; active.len()];
        let mut solver = Echelon::new();
        for c in &killer.reduced {
            if let Some(l) = gf2::low(c) {
                killed[l] = true;
                solver.insert(c, None);
            }
        }
        let mut reps = Vec::new();
        for j in 0..active.len() {
            if active[j] && kernel.reduced[j].is_empty() && !killed[j] {
                let z = kernel.transform[j].clone();
                solver.insert(&z, Some(reps.len()));
                reps.push(z);
            }
        }
        GroupBasis { representatives: reps, solver }
    }

    fn homology_bases(&self) -> &[GroupBasis] {
        self.homology.get_or_init(|| {
            (0..self.simplices.len())
                .map(|k| {
                    let active: Vec<bool> = self.in_a[k].iter().map(|&a| !a).collect();
                    let cols_k = self.boundary_matrix(k).to_vec();
                    let killer = self.boundary_matrix(k + 1).to_vec();
                    let rows = if k == 0 { 1 } else { self.count(k - 1) };
                    self.basis_for(cols_k, killer, active, rows)
                })
                .collect()
        })
    }

    fn cohomology_bases(&self) -> &[GroupBasis] {
        self.cohomology.get_or_init(|| {
            (0..self.simplices.len())
                .map(|k| {
                    let active: Vec<bool> = self.in_a[k].iter().map(|&a| !a).collect();
                    let cols_k = self.coboundary_matrix(k);
                    let killer = if k == 0 { Vec::new() } else { self.coboundary_matrix(k - 1) };
                    self.basis_for(cols_k, killer, active, self.count(k + 1))
                })
                .collect()
        })
    }

    /// Homology basis data in degree `k` (`None` beyond the top degree).
    pub fn homology_group(&self, k: usize) -> Option<&GroupBasis> {
        self.homology_bases().get(k)
    }

    pub fn cohomology_group(&self, k: usize) -> Option<&GroupBasis> {
        self.cohomology_bases().get(k)
    }

    pub fn homology_basis(&self, k: usize) -> Vec<HomologyClass> {
        self.homology_group(k).map_or_else(Vec::new, |g| {
            g.representatives.iter().map(|z| HomologyClass { degree: k, chain: z.clone() }).collect()
        })
    }

    pub fn cohomology_basis(&self, k: usize) -> Vec<CohomologyClass> {
        self.cohomology_group(k).map_or_else(Vec::new, |g| {
            g.representatives.iter().map(|z| CohomologyClass { degree: k, cochain: z.clone() }).collect()
        })
    }

    pub fn betti(&self) -> Vec<usize> {
        self.homology_bases().iter().map(|g| g.rank()).collect()
    }

    /// Reduced Betti numbers; the empty complex has `β̃₋₁ = 1`, reported by `None`.
    pub fn reduced_betti(&self) -> Option<Vec<usize>> {
        if self.count(0) == 0 {
            return None;
        }
        let mut b = self.betti();
        if !self.is_relative() {
            b[0] -= 1;
        }
        Some(b)
    }

    /// Contractibility proxy: nonempty with vanishing reduced homology.
    pub fn is_acyclic(&self) -> bool {
        self.reduced_betti().is_some_and(|b| b.iter().all(|&x| x == 0))
    }

    /// Coordinates of a homology class in `homology_basis(k)`.
    pub fn homology_coordinates(&self, cls: &HomologyClass) -> Result<Vec<bool>> {
        self.homology_group(cls.degree)
            .and_then(|g| g.coordinates(&cls.chain))
            .ok_or_else(|| Error::ClassNotInComplex(format!("degree {} chain is not a cycle", cls.degree)))
    }

    pub fn cohomology_coordinates(&self, cls: &CohomologyClass) -> Result<Vec<bool>> {
        self.cohomology_group(cls.degree)
            .and_then(|g| g.coordinates(&cls.cochain))
            .ok_or_else(|| Error::ClassNotInComplex(format!("degree {} cochain is not a cocycle", cls.degree)))
    }

    /// Sparse boundary matrices as `k row col` lines.
    pub fn to_triples(&self) -> String {
        let mut s = String::new();
        for k in 1..self.boundaries.len() {
            for (j, col) in self.boundaries[k].iter().enumerate() {
                for &i in col {
                    let _ = writeln!(s, "{k} {i} {j}");
                }
            }
        }
        s
    }
}

fn dense(c: &[usize], n: usize) -> Vec<bool> {
    let mut d = vec![false; n];
    for &i in c {
        d[i] = true;
    }
    d
}

fn top_cells<T: Real>(mesh: &Mesh<T>) -> Vec<Vec<usize>> {
    if mesh.dim() == 2 {
        mesh.triangles.iter().map(|t| t.to_vec()).collect()
    } else {
        mesh.edges.iter().map(|e| e.to_vec()).collect()
    }
}

/// Faces of `cell` whose vertices all satisfy `mask` (the cell itself when unmasked).
fn faces_within(cell: &[usize], mask: Option<&[bool]>) -> Vec<Vec<usize>> {
    match mask {
        None => vec![cell.to_vec()],
        Some(m) => {
            let kept: Vec<usize> = cell.iter().copied().filter(|&v| m[v]).collect();
            if kept.is_empty() {
                Vec::new()
            } else {
                vec![kept]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, rp2_mesh, Surface};

    fn torus() -> ChainComplexGF2 {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        ChainComplexGF2::from_mesh(&build_mesh(&s, None, 12).unwrap())
    }

    #[test]
    fn betti_numbers_of_builtins() {
        let t = torus();
        assert!(t.check_complex());
        assert_eq!(t.betti(), vec![1, 2, 1]);
        let s = Surface::<f64>::sphere(1.0).unwrap();
        let sp = ChainComplexGF2::from_mesh(&build_mesh(&s, None, 10).unwrap());
        assert_eq!(sp.betti(), vec![1, 0, 1]);
        let rp = ChainComplexGF2::from_mesh(&rp2_mesh::<f64>(0));
        assert_eq!((rp.count(0), rp.count(1), rp.count(2)), (6, 15, 10));
        assert_eq!(rp.betti(), vec![1, 1, 1]);
        let circle = ChainComplexGF2::from_mesh(&build_mesh(&Surface::<f64>::circle(), None, 16).unwrap());
        assert_eq!(circle.betti(), vec![1, 1]);
    }

    #[test]
    fn betti_stable_under_refinement() {
        let rp1 = ChainComplexGF2::from_mesh(&rp2_mesh::<f64>(1));
        assert_eq!(rp1.betti(), vec![1, 1, 1]);
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        assert_eq!(ChainComplexGF2::from_mesh(&build_mesh(&s, None, 24).unwrap()).betti(), vec![1, 2, 1]);
    }

    #[test]
    fn cohomology_ranks_match_homology() {
        let t = torus();
        let ranks: Vec<usize> = (0..3).map(|k| t.cohomology_basis(k).len()).collect();
        assert_eq!(ranks, t.betti());
        assert!(t.homology_basis(3).is_empty());
        assert!(t.cohomology_basis(5).is_empty());
    }

    #[test]
    fn relative_homology_of_disk_rel_boundary() {
        // a triangulated disk (fan around vertex 0) relative to its boundary circle
        let tris: Vec<Vec<usize>> = (1..=6).map(|i| vec![0, i, if i == 6 { 1 } else { i + 1 }]).collect();
        let mut a = vec![true; 7];
        a[0] = false;
        let rel = ChainComplexGF2::from_simplices(7, &tris, Some(&a));
        assert!(rel.check_complex());
        assert_eq!(rel.betti(), vec![0, 0, 1]);
        let abs = rel.absolute();
        assert_eq!(abs.betti(), vec![1, 0, 0]);
    }

    #[test]
    fn induced_subcomplex_and_errors() {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        let mesh = build_mesh(&s, None, 12).unwrap();
        let mut band = vec![false; mesh.len()];
        for (i, v) in mesh.vertices.iter().enumerate() {
            band[i] = v.param[1] < 1.0;
        }
        let cx = ChainComplexGF2::of_mesh_subset(&mesh, Some(&band), None).unwrap();
        // an annulus around the u-direction
        assert_eq!(cx.betti(), vec![1, 1, 0]);
        let everything = vec![true; mesh.len()];
        assert!(matches!(
            ChainComplexGF2::of_mesh_subset(&mesh, Some(&band), Some(&everything)),
            Err(Error::NotASubcomplex(_))
        ));
    }

    #[test]
    fn coordinates_detect_boundaries() {
        let t = torus();
        let h1 = t.homology_group(1).unwrap();
        // the boundary of a triangle is trivial
        let tri = t.boundary_matrix(2)[0].clone();
        assert!(h1.is_trivial(&tri));
        // a non-cycle has no coordinates
        assert!(h1.coordinates(&[0]).is_none());
        for z in &h1.representatives {
            assert!(!h1.is_trivial(z));
        }
    }

    #[test]
    fn triples_export() {
        let rp = ChainComplexGF2::from_mesh(&rp2_mesh::<f64>(0));
        let text = rp.to_triples();
        assert_eq!(text.lines().count(), 2 * 15 + 3 * 10);
        assert!(text.lines().all(|l| l.split(' ').count() == 3));
    }
}
