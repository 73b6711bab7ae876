use super::complex::{ChainComplexGF2, CohomologyClass, HomologyClass};
use super::gf2;
use crate::error::{Error, Result};

fn member(sorted: &[usize], i: usize) -> bool {
    sorted.binary_search(&i).is_ok()
}

/// Cochain-level cup product: `(α∪β)[v₀…v_{p+q}] = α[v₀…v_p]·β[v_p…v_{p+q}]`.
pub fn cup(cx: &ChainComplexGF2, alpha: &CohomologyClass, beta: &CohomologyClass) -> Result<CohomologyClass> {
    let (p, q) = (alpha.degree, beta.degree);
    let d = p + q;
    if d > cx.dim() {
        return Err(Error::DegreeOverflow(d, cx.dim()));
    }
    let mut out = Vec::new();
    if alpha.cochain.is_empty() || beta.cochain.is_empty() {
        return Ok(CohomologyClass { degree: d, cochain: out });
    }
    for (j, s) in cx.simplices[d].iter().enumerate() {
        if !cx.is_active(d, j) {
            continue;
        }
        let front = cx.index_of(&s[..=p]).unwrap();
        if !member(&alpha.cochain, front) {
            continue;
        }
        let back = cx.index_of(&s[p..]).unwrap();
        if member(&beta.cochain, back) {
            out.push(j);
        }
    }
    Ok(CohomologyClass { degree: d, cochain: out })
}

/// Chain-level cap product with the back-face convention
/// `ω ∩ [v₀…v_m] = ω[v_{m-p}…v_m]·[v₀…v_{m-p}]`, for which
/// `(α∪β)∩c = α∩(β∩c)` holds exactly on chains.
pub fn cap(cx: &ChainComplexGF2, omega: &CohomologyClass, b: &HomologyClass) -> Result<HomologyClass> {
    let (p, m) = (omega.degree, b.degree);
    if p > m {
        return Err(Error::DegreeUnderflow(p, m));
    }
    let r = m - p;
    let mut idx = Vec::new();
    for &j in &b.chain {
        let s = &cx.simplices[m][j];
        let back = cx.index_of(&s[r..]).unwrap();
        if member(&omega.cochain, back) {
            let front = cx.index_of(&s[..=r]).unwrap();
            if cx.is_active(r, front) {
                idx.push(front);
            }
        }
    }
    Ok(HomologyClass { degree: r, chain: gf2::from_indices(idx) })
}

/// The unit cocycle in degree 0 (all vertices).
pub fn unit(cx: &ChainComplexGF2) -> CohomologyClass {
    CohomologyClass { degree: 0, cochain: (0..cx.count(0)).filter(|&j| cx.is_active(0, j)).collect() }
}

/// Evaluation `⟨ω, c⟩` of a cochain on a chain of the same degree.
pub fn evaluate(omega: &CohomologyClass, c: &HomologyClass) -> bool {
    omega.degree == c.degree && gf2::dot(&omega.cochain, &c.chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, rp2_mesh, Surface};
    use proptest::prelude::*;

    fn torus() -> ChainComplexGF2 {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        ChainComplexGF2::from_mesh(&build_mesh(&s, None, 10).unwrap())
    }

    fn nonzero(cx: &ChainComplexGF2, c: &CohomologyClass) -> bool {
        !cx.cohomology_group(c.degree).unwrap().is_trivial(&c.cochain)
    }

    /// Cup product by the definition on ordered simplices, without index lookups.
    fn brute_cup(cx: &ChainComplexGF2, a: &CohomologyClass, b: &CohomologyClass) -> Vec<usize> {
        let d = a.degree + b.degree;
        let on = |c: &CohomologyClass, s: &[usize]| {
            c.cochain.iter().any(|&j| cx.simplices[c.degree][j] == s)
        };
        (0..cx.count(d))
            .filter(|&j| {
                let s = &cx.simplices[d][j];
                on(a, &s[..=a.degree]) && on(b, &s[a.degree..])
            })
            .collect()
    }

    #[test]
    fn torus_generators_cup_to_top_class() {
        let cx = torus();
        let h1 = cx.cohomology_basis(1);
        assert_eq!(h1.len(), 2);
        let prod = cup(&cx, &h1[0], &h1[1]).unwrap();
        assert_eq!(prod.cochain, brute_cup(&cx, &h1[0], &h1[1]));
        assert!(cx.coboundary_of(2, &prod.cochain).is_empty());
        assert!(nonzero(&cx, &prod));
        // squares vanish on the torus
        for a in &h1 {
            assert!(!nonzero(&cx, &cup(&cx, a, a).unwrap()));
        }
    }

    #[test]
    fn rp2_generator_squares_nonzero() {
        let cx = ChainComplexGF2::from_mesh(&rp2_mesh::<f64>(0));
        let a = &cx.cohomology_basis(1)[0];
        let sq = cup(&cx, a, a).unwrap();
        assert_eq!(sq.cochain, brute_cup(&cx, a, a));
        assert!(nonzero(&cx, &sq));
    }

    #[test]
    fn sphere_degree_overflow() {
        let s = Surface::<f64>::sphere(1.0).unwrap();
        let cx = ChainComplexGF2::from_mesh(&build_mesh(&s, None, 10).unwrap());
        let top = &cx.cohomology_basis(2)[0];
        assert!(matches!(cup(&cx, top, top), Err(Error::DegreeOverflow(4, 2))));
    }

    #[test]
    fn intersection_pairing_nondegenerate() {
        // ⟨α_i ∪ α_j, [T]⟩ over the two degree-1 generators
        let cx = torus();
        let h1 = cx.cohomology_basis(1);
        let fund = &cx.homology_basis(2)[0];
        let m: Vec<Vec<bool>> = h1
            .iter()
            .map(|a| h1.iter().map(|b| evaluate(&cup(&cx, a, b).unwrap(), fund)).collect())
            .collect();
        let det = (m[0][0] && m[1][1]) ^ (m[0][1] && m[1][0]);
        assert!(det);
    }

    #[test]
    fn cap_with_fundamental_class_is_nonzero() {
        let cx = torus();
        let fund = &cx.homology_basis(2)[0];
        let h1 = cx.homology_group(1).unwrap();
        for w in cx.cohomology_basis(1) {
            let c = cap(&cx, &w, fund).unwrap();
            assert!(cx.boundary_of(1, &c.chain).is_empty());
            assert!(!h1.is_trivial(&c.chain));
        }
        assert_eq!(cap(&cx, &unit(&cx), fund).unwrap(), fund.clone());
        let loop_class = &cx.homology_basis(1)[0];
        assert!(matches!(cap(&cx, &cx.cohomology_basis(2)[0], loop_class), Err(Error::DegreeUnderflow(2, 1))));
    }

    fn graded_basis(cx: &ChainComplexGF2) -> Vec<CohomologyClass> {
        (0..=cx.dim()).flat_map(|k| cx.cohomology_basis(k)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn cap_compatible_with_cup(i in 0usize..6, j in 0usize..6, k in 0usize..4) {
            let cx = torus();
            let coh = graded_basis(&cx);
            let hom: Vec<HomologyClass> = (0..=2).flat_map(|d| cx.homology_basis(d)).collect();
            let (a, b, c) = (&coh[i % coh.len()], &coh[j % coh.len()], &hom[k % hom.len()]);
            if a.degree + b.degree <= c.degree {
                let lhs = cap(&cx, &cup(&cx, a, b).unwrap(), c).unwrap();
                let rhs = cap(&cx, a, &cap(&cx, b, c).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn cup_associative_and_commutative(i in 0usize..6, j in 0usize..6, k in 0usize..6) {
            for cx in [torus(), ChainComplexGF2::from_mesh(&rp2_mesh::<f64>(0))] {
                let coh = graded_basis(&cx);
                let (a, b, c) = (&coh[i % coh.len()], &coh[j % coh.len()], &coh[k % coh.len()]);
                if a.degree + b.degree <= cx.dim() {
                    let ab = cup(&cx, a, b).unwrap();
                    let ba = cup(&cx, b, a).unwrap();
                    let g = cx.cohomology_group(ab.degree).unwrap();
                    prop_assert_eq!(g.coordinates(&ab.cochain), g.coordinates(&ba.cochain));
                    if ab.degree + c.degree <= cx.dim() {
                        let l = cup(&cx, &ab, c).unwrap();
                        let r = cup(&cx, a, &cup(&cx, b, c).unwrap()).unwrap();
                        prop_assert_eq!(l, r);
                    }
                }
            }
        }
    }
}
