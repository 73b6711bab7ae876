use serde::Serialize;

use super::complex::{ChainComplexGF2, CohomologyClass, HomologyClass};
use super::gf2::{self, Echelon};
use super::products::{cap, cup};
use crate::error::{Error, Result};

/// Largest `k` with a nonzero product of `k` positive-degree cohomology classes.
///
/// Products of basis classes suffice by multilinearity; the search only extends
/// products while the total degree stays within the dimension.
pub fn cuplength(cx: &ChainComplexGF2) -> usize {
    let basis: Vec<CohomologyClass> = (1..=cx.dim()).flat_map(|k| cx.cohomology_basis(k)).collect();
    let mut best = 0;
    for (i, b) in basis.iter().enumerate() {
        extend(cx, &basis, b.clone(), i, 1, &mut best);
    }
    best
}

fn extend(cx: &ChainComplexGF2, basis: &[CohomologyClass], prod: CohomologyClass, from: usize, len: usize, best: &mut usize) {
    let group = cx.cohomology_group(prod.degree).expect("degree within range");
    if group.is_trivial(&prod.cochain) {
        return;
    }
    *best = (*best).max(len);
    // commutativity over GF(2) lets us keep factor indices non-decreasing
    for (j, b) in basis.iter().enumerate().skip(from) {
        if prod.degree + b.degree > cx.dim() {
            continue;
        }
        let next = cup(cx, &prod, b).expect("degree checked");
        extend(cx, basis, next, j, len + 1, best);
    }
}

/// A nonzero homology class by its coordinates in `homology_basis(degree)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassRef {
    pub degree: usize,
    pub coordinates: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subordination {
    pub number: usize,
    /// A longest chain `b₁ < b₂ < …`, lowest degree first.
    pub chain: Vec<ClassRef>,
}

/// Classes enumerated exhaustively up to this group rank; larger groups fall back to basis classes.
const ENUMERATION_RANK: usize = 12;

fn nonzero_classes(rank: usize) -> Vec<Vec<bool>> {
    if rank <= ENUMERATION_RANK {
        (1u32..(1 << rank)).map(|m| (0..rank).map(|i| m & (1 << i) != 0).collect()).collect()
    } else {
        (0..rank).map(|i| (0..rank).map(|j| i == j).collect()).collect()
    }
}

fn to_column(coords: &[bool]) -> gf2::Column {
    coords.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// Cohomology class `ω` of positive degree with `ω ∩ b = b'` in homology, if one exists.
pub fn subordinating_class(cx: &ChainComplexGF2, lower: &HomologyClass, upper: &HomologyClass) -> Result<Option<CohomologyClass>> {
    if lower.degree >= upper.degree {
        return Ok(None);
    }
    let p = upper.degree - lower.degree;
    let target = to_column(&cx.homology_coordinates(lower)?);
    if target.is_empty() {
        return Ok(None);
    }
    cx.homology_coordinates(upper)?;
    let omegas = cx.cohomology_basis(p);
    let group = cx.homology_group(lower.degree).expect("degree within range");
    let mut e = Echelon::new();
    for (i, w) in omegas.iter().enumerate() {
        let c = cap(cx, w, upper)?;
        let coords = group.coordinates(&c.chain).expect("cap of a cycle is a cycle");
        e.insert(&to_column(&coords), Some(i));
    }
    Ok(e.solve(&target).map(|labels| {
        let mut cochain = Vec::new();
        for i in labels {
            gf2::add_assign(&mut cochain, &omegas[i].cochain);
        }
        CohomologyClass { degree: p, cochain }
    }))
}

/// Longest chain `b₁ < … < b_{k+1}` under subordination, returning `k`.
pub fn subordination_number(cx: &ChainComplexGF2) -> Subordination {
    let dim = cx.dim();
    let mut classes: Vec<(ClassRef, HomologyClass)> = Vec::new();
    for k in 0..=dim {
        let g = cx.homology_group(k).expect("degree within range");
        for coords in nonzero_classes(g.rank()) {
            let chain = g.combine(&coords);
            classes.push((ClassRef { degree: k, coordinates: coords }, HomologyClass { degree: k, chain }));
        }
    }
    // `images[i][p]`: the span of `ω ∩ b_i` over degree-p classes ω, as an echelon in coordinates
    let spans: Vec<Vec<Echelon>> = classes
        .iter()
        .map(|(_, b)| {
            (0..=b.degree)
                .map(|p| {
                    let mut e = Echelon::new();
                    if p > 0 {
                        let g = cx.homology_group(b.degree - p).expect("degree within range");
                        for w in cx.cohomology_basis(p) {
                            let c = cap(cx, &w, b).expect("degree checked");
                            e.insert(&to_column(&g.coordinates(&c.chain).expect("cycle")), None);
                        }
                    }
                    e
                })
                .collect()
        })
        .collect();
    // longest path, processing classes in increasing degree
    let n = classes.len();
    let mut length = vec![0usize; n];
    let mut prev: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        for j in 0..n {
            let (lo, hi) = (&classes[j].0, &classes[i].0);
            if lo.degree >= hi.degree {
                continue;
            }
            let p = hi.degree - lo.degree;
            if spans[i][p].contains(&to_column(&lo.coordinates)) && length[j] + 1 > length[i] {
                length[i] = length[j] + 1;
                prev[i] = Some(j);
            }
        }
    }
    let Some(end) = (0..n).max_by_key(|&i| (length[i], std::cmp::Reverse(i))) else {
        return Subordination { number: 0, chain: Vec::new() };
    };
    let mut chain = vec![classes[end].0.clone()];
    let mut at = end;
    while let Some(j) = prev[at] {
        chain.push(classes[j].0.clone());
        at = j;
    }
    chain.reverse();
    Subordination { number: length[end], chain }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatBounds {
    pub lower: usize,
    pub upper: usize,
    /// Set when the bounds coincide.
    pub exact: Option<usize>,
}

/// `cupp + 1 ≤ cat ≤ min(1 + dim, |cover|)`. Each cover member must induce a nonempty
/// acyclic subcomplex and together they must contain every vertex.
pub fn cat_bounds(cx: &ChainComplexGF2, cover: Option<&[Vec<usize>]>) -> Result<CatBounds> {
    let lower = cuplength(cx) + 1;
    let mut upper = 1 + cx.dim();
    if let Some(cover) = cover {
        let mut covered = vec![false; cx.n_vertices];
        for (i, member) in cover.iter().enumerate() {
            let mut mask = vec![false; cx.n_vertices];
            for &v in member {
                mask[v] = true;
                covered[v] = true;
            }
            if !cx.induced(&mask).is_acyclic() {
                return Err(Error::InvalidCover(format!("member {i} is not acyclic")));
            }
        }
        let present: Vec<usize> = cx.simplices[0].iter().map(|s| s[0]).collect();
        if let Some(v) = present.into_iter().find(|&v| !covered[v]) {
            return Err(Error::InvalidCover(format!("vertex {v} is not covered")));
        }
        upper = upper.min(cover.len());
    }
    Ok(CatBounds { lower, upper, exact: (lower == upper).then_some(lower) })
}
