//! Lower-star filtrations of `(M^b, M^a)`, minimax values of relative homology classes,
//! the no-gap interval, refined minimax along subordinated classes, and the inequality report.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CriticalPoint, Mesh, Param};
use crate::homology::gf2::{self, Column, Echelon, Reduction};
use crate::homology::{cap, cat_bounds, cuplength, subordination_number, ChainComplexGF2, CohomologyClass, HomologyClass};
use crate::real::Real;

pub const SCHEMA: &str = "conley-kit/1";

/// `K_b` relative to `K_a` with active simplices ordered by lower-star value, ties by
/// lexicographic vertex order (degrees are reduced separately, so faces always come first).
#[derive(Debug)]
pub struct Filtration<T> {
    pub complex: ChainComplexGF2,
    pub a: T,
    pub b: T,
    /// Lower-star value of every simplex, by degree and complex index.
    pub values: Vec<Vec<T>>,
    /// Active simplex indices in filtration order, by degree.
    pub order: Vec<Vec<usize>>,
    position: Vec<Vec<Option<usize>>>,
    /// Reduction of `∂_k` with rows and columns in filtration order (`k ≥ 1`).
    reductions: Vec<Option<Reduction>>,
    vertex_values: Vec<T>,
    vertex_params: Vec<Param<T>>,
    /// Twice the largest jump of `f` along a mesh edge.
    pub tol_match: T,
}

impl<T: Real> Filtration<T> {
    pub fn new(mesh: &Mesh<T>, a: T, b: T) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidParameters(format!("need a < b, got a = {a}, b = {b}")));
        }
        let total: Vec<bool> = mesh.vertices.iter().map(|v| v.value <= b).collect();
        let below: Vec<bool> = mesh.vertices.iter().map(|v| v.value <= a).collect();
        let complex = ChainComplexGF2::of_mesh_subset(mesh, Some(&total), Some(&below))?;
        let vertex_values = mesh.values();
        let values: Vec<Vec<T>> = complex
            .simplices
            .iter()
            .map(|ss| ss.iter().map(|s| s.iter().map(|&v| vertex_values[v]).fold(T::neg_infinity(), T::max)).collect())
            .collect();
        let mut order = Vec::new();
        let mut position = Vec::new();
        for k in 0..complex.simplices.len() {
            let mut idx: Vec<usize> = (0..complex.count(k)).filter(|&j| complex.is_active(k, j)).collect();
            idx.sort_by(|&x, &y| {
                values[k][x]
                    .partial_cmp(&values[k][y])
                    .expect("finite values")
                    .then_with(|| complex.simplices[k][x].cmp(&complex.simplices[k][y]))
            });
            let mut pos = vec![None; complex.count(k)];
            for (p, &j) in idx.iter().enumerate() {
                pos[j] = Some(p);
            }
            order.push(idx);
            position.push(pos);
        }
        let reductions = (0..complex.simplices.len())
            .map(|k| {
                (k > 0).then(|| {
                    let columns: Vec<Column> = order[k]
                        .iter()
                        .map(|&j| {
                            let idx = complex.boundary_matrix(k)[j].iter().map(|&i| position[k - 1][i].expect("active face"));
                            let mut col: Column = idx.collect();
                            col.sort_unstable();
                            col
                        })
                        .collect();
                    Reduction::new(&columns, order[k - 1].len())
                })
            })
            .collect();
        Ok(Self {
            complex,
            a,
            b,
            values,
            order,
            position,
            reductions,
            vertex_values,
            vertex_params: mesh.vertices.iter().map(|v| v.param).collect(),
            tol_match: T::lit(2.0) * mesh.max_edge_value_gap(),
        })
    }

    /// Default band `(min f - 0.5, max f + 0.5)`, so that `H_*(M^b, M^a) ≅ H_*(M)`.
    pub fn global(mesh: &Mesh<T>) -> Result<Self> {
        let vals = mesh.values();
        let lo = vals.iter().copied().fold(T::infinity(), T::min);
        let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
        Self::new(mesh, lo - T::lit(0.5), hi + T::lit(0.5))
    }

    fn value_at(&self, k: usize, pos: usize) -> T {
        self.values[k][self.order[k][pos]]
    }

    /// `∂_{k+1}` reduced in filtration order, if degree `k+1` exists.
    fn upper(&self, k: usize) -> Option<&Reduction> {
        self.reductions.get(k + 1).and_then(|r| r.as_ref())
    }

    fn to_positions(&self, cls: &HomologyClass) -> Result<Column> {
        let k = cls.degree;
        let pos = self.position.get(k).ok_or_else(|| Error::ClassNotInComplex(format!("no simplices of degree {k}")))?;
        let mut out = Vec::with_capacity(cls.chain.len());
        for &j in &cls.chain {
            match pos.get(j).copied().flatten() {
                Some(p) => out.push(p),
                None => return Err(Error::ClassNotInComplex(format!("simplex {j} of degree {k} is not active"))),
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    fn from_positions(&self, k: usize, col: &[usize]) -> Column {
        gf2::from_indices(col.iter().map(|&p| self.order[k][p]).collect())
    }

    /// Essential cycles of degree `k`: positive simplices never killed, each with its birth value.
    /// Their classes form a basis of `H_k(M^b, M^a)` adapted to the filtration.
    pub fn essential(&self, k: usize) -> Vec<(usize, Column)> {
        let n = self.order.get(k).map_or(0, |o| o.len());
        let killed: Vec<bool> = match self.upper(k) {
            Some(r) => r.pivot_of_row.iter().map(|p| p.is_some()).collect(),
            None => vec![false; n],
        };
        (0..n)
            .filter(|&p| !killed[p])
            .filter_map(|p| match self.reductions.get(k).and_then(|r| r.as_ref()) {
                Some(r) => r.reduced[p].is_empty().then(|| (p, r.transform[p].clone())),
                None => Some((p, vec![p])),
            })
            .collect()
    }

    /// Filtration-adapted generators of `H_k(M^b, M^a)`, as classes of the relative complex.
    pub fn essential_classes(&self, k: usize) -> Vec<HomologyClass> {
        self.essential(k).into_iter().map(|(_, z)| HomologyClass { degree: k, chain: self.from_positions(k, &z) }).collect()
    }

    /// `c` reduced against the boundaries: its lowest entry is the least filtration position
    /// any homologous representative can end at.
    fn reduce_by_boundaries(&self, k: usize, c: &[usize]) -> Column {
        let mut r = c.to_vec();
        if let Some(up) = self.upper(k) {
            while let Some(l) = gf2::low(&r) {
                match up.pivot_of_row[l] {
                    Some(col) => gf2::add_assign(&mut r, &up.reduced[col]),
                    None => break,
                }
            }
        }
        r
    }

    /// Whether `j^s_*(c) = 0`, i.e. `c ∈ B(K_b) + C(K_s)`: the part of `c` above `s` must lie in
    /// the span of the boundaries projected away from `K_s`.
    pub fn vanishes_at(&self, cls: &HomologyClass, s: T) -> Result<bool> {
        let k = cls.degree;
        let c = self.to_positions(cls)?;
        let cut = self.order[k].iter().take_while(|&&j| self.values[k][j] <= s).count();
        let project = |v: &[usize]| -> Column { v.iter().copied().filter(|&p| p >= cut).collect() };
        let mut r = project(&c);
        let Some(up) = self.upper(k) else {
            return Ok(r.is_empty());
        };
        // projected reduced columns with low ≥ cut keep distinct lows
        while let Some(l) = gf2::low(&r) {
            match up.pivot_of_row[l] {
                Some(col) => gf2::add_assign(&mut r, &project(&up.reduced[col])),
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Filtration thresholds: `a`, every distinct active value, `b`.
    pub fn thresholds(&self) -> Vec<T> {
        let mut ts: Vec<T> = self.order.iter().zip(&self.values).flat_map(|(o, v)| o.iter().map(move |&j| v[j])).collect();
        ts.push(self.a);
        ts.push(self.b);
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ts.dedup();
        ts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxResult<T> {
    pub degree: usize,
    /// Coordinates of the class in the filtration-adapted basis of its degree.
    pub coordinates: Vec<bool>,
    /// Least `s` at which the class comes from `H_*(M^s, M^a)`.
    pub kappa: T,
    /// Least `s` with `j^s_*(c) = 0`; equals `kappa` by exactness.
    pub kappa_vanishing: T,
    /// Vertex whose entry realizes `kappa` in the filtration.
    pub birth_vertex: usize,
    pub critical_point: Option<CriticalPoint<T>>,
    pub morse_index_match: Option<bool>,
    /// Largest value of `f` on the stored representative; always `≥ kappa`.
    pub support_max: T,
}

/// `κ(c, f)` for a nontrivial class `c ∈ H_*(M^b, M^a)`, realized at the critical point nearest the
/// birth vertex among those whose value is within `tol_match` of `κ`.
pub fn kappa<T: Real>(filt: &Filtration<T>, cls: &HomologyClass, crits: &[CriticalPoint<T>]) -> Result<MinimaxResult<T>> {
    let k = cls.degree;
    filt.complex.homology_coordinates(cls)?;
    let c = filt.to_positions(cls)?;
    let residual = filt.reduce_by_boundaries(k, &c);
    let Some(low) = gf2::low(&residual) else {
        return Err(Error::TrivialClass);
    };
    let kappa_vanishing = filt.value_at(k, low);

    // expansion in the essential basis
    let mut e = Echelon::new();
    if let Some(up) = filt.upper(k) {
        for col in up.reduced.iter().filter(|c| !c.is_empty()) {
            e.insert(col, None);
        }
    }
    let essential = filt.essential(k);
    for (i, (_, z)) in essential.iter().enumerate() {
        e.insert(z, Some(i));
    }
    let labels = e.solve(&c).ok_or_else(|| Error::ClassNotInComplex("class outside the cycle space".into()))?;
    let mut coordinates = vec![false; essential.len()];
    for &i in &labels {
        coordinates[i] = true;
    }
    let birth = labels.iter().map(|&i| essential[i].0).max().ok_or(Error::TrivialClass)?;
    let kappa = filt.value_at(k, birth);

    let simplex = &filt.complex.simplices[k][filt.order[k][birth]];
    let birth_vertex = simplex
        .iter()
        .copied()
        .max_by(|&x, &y| filt.vertex_values[x].partial_cmp(&filt.vertex_values[y]).unwrap().then(x.cmp(&y)))
        .expect("nonempty simplex");
    let at = filt.vertex_params[birth_vertex];
    let critical_point = crits
        .iter()
        .filter(|x| (x.value - kappa).abs() <= filt.tol_match)
        .min_by(|x, y| chart_gap(x.param, at).partial_cmp(&chart_gap(y.param, at)).unwrap())
        .cloned();
    let morse_index_match = critical_point.as_ref().and_then(|x| x.morse_index()).map(|i| i == k);
    let support_max = cls.chain.iter().map(|&j| filt.values[k][j]).fold(T::neg_infinity(), T::max);
    Ok(MinimaxResult { degree: k, coordinates, kappa, kappa_vanishing, birth_vertex, critical_point, morse_index_match, support_max })
}

fn chart_gap<T: Real>(p: Param<T>, q: Param<T>) -> T {
    let d0 = crate::real::angle_delta(p[0], q[0]);
    let d1 = crate::real::angle_delta(p[1], q[1]);
    (d0 * d0 + d1 * d1).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoGap<T> {
    /// Infimum of the vanishing set.
    pub s0: T,
    /// Whether `s0` itself belongs to the set.
    pub closed: bool,
    /// `(s, j^s_*(c) = 0)` at every threshold.
    pub scan: Vec<(T, bool)>,
}

impl<T: Real> NoGap<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("s,is_zero\n");
        for (t, z) in &self.scan {
            s.push_str(&format!("{t},{}\n", u8::from(*z)));
        }
        s
    }
}

/// Scans every threshold and checks that `{s : j^s_*(c) = 0}` is an interval reaching `b`.
pub fn no_gap_interval<T: Real>(filt: &Filtration<T>, cls: &HomologyClass) -> Result<NoGap<T>> {
    let scan: Vec<(T, bool)> =
        filt.thresholds().into_iter().map(|s| filt.vanishes_at(cls, s).map(|z| (s, z))).collect::<Result<_>>()?;
    if scan.first().is_some_and(|&(_, z)| z) {
        return Err(Error::TrivialClass);
    }
    let first = scan.iter().position(|&(_, z)| z).ok_or(Error::GapDetected(filt.b.as_f64()))?;
    if let Some(&(s, _)) = scan[first..].iter().find(|&&(_, z)| !z) {
        return Err(Error::GapDetected(s.as_f64()));
    }
    Ok(NoGap { s0: scan[first].0, closed: true, scan })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedMinimax<T> {
    pub lower: MinimaxResult<T>,
    pub upper: MinimaxResult<T>,
    /// `κ(a) ≤ κ(b)`.
    pub monotone: bool,
    /// `κ(a) < κ(b)` with distinct realizing critical points.
    pub strict: bool,
}

/// κ along a subordination `a = ω ∩ b`, checked on the relative complex of `filt`.
pub fn refined_minimax<T: Real>(
    filt: &Filtration<T>,
    a_cls: &HomologyClass,
    b_cls: &HomologyClass,
    omega: &CohomologyClass,
    crits: &[CriticalPoint<T>],
) -> Result<RefinedMinimax<T>> {
    if omega.degree == 0 || omega.degree + a_cls.degree != b_cls.degree {
        return Err(Error::NotSubordinated);
    }
    let capped = cap(&filt.complex, omega, b_cls)?;
    let mut diff = capped.chain.clone();
    gf2::add_assign(&mut diff, &a_cls.chain);
    let group = filt.complex.homology_group(a_cls.degree).ok_or(Error::NotSubordinated)?;
    if !group.is_trivial(&diff) {
        return Err(Error::NotSubordinated);
    }
    let lower = kappa(filt, a_cls, crits)?;
    let upper = kappa(filt, b_cls, crits)?;
    let monotone = lower.kappa <= upper.kappa;
    let distinct = match (&lower.critical_point, &upper.critical_point) {
        (Some(x), Some(y)) => x != y,
        _ => false,
    };
    let strict = lower.kappa < upper.kappa && distinct;
    Ok(RefinedMinimax { lower, upper, monotone, strict })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub lhs_name: String,
    pub op: String,
    pub rhs_name: String,
    pub lhs: usize,
    pub rhs: usize,
    pub pass: bool,
}

fn relation(lhs_name: &str, lhs: usize, op: &str, rhs_name: &str, rhs: usize) -> Relation {
    let pass = match op {
        ">=" => lhs >= rhs,
        ">" => lhs > rhs,
        "=" => lhs == rhs,
        _ => unreachable!("unknown relation {op}"),
    };
    Relation { lhs_name: lhs_name.into(), op: op.into(), rhs_name: rhs_name.into(), lhs, rhs, pass }
}

/// Upstream artifacts feeding the inequality report.
pub struct ReportInputs<'a> {
    pub complex: &'a ChainComplexGF2,
    /// `|Crit f|`, absent for homology-only reports.
    pub critical_points: Option<usize>,
    /// Whether every critical point is nondegenerate.
    pub morse: bool,
    /// Size of a complete ambient thickening cover, bounding `cat_amb` from above.
    pub ambient_cover: Option<usize>,
    /// Vertex sets of a complete cover by acyclic thickenings, bounding `cat` from above.
    pub categorical_cover: Option<&'a [Vec<usize>]>,
    /// Reference values quoted for the surface, echoed unchanged.
    pub cited: BTreeMap<String, usize>,
    /// Run configuration, echoed unchanged.
    pub config: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub schema: String,
    pub config: BTreeMap<String, String>,
    pub betti: Vec<usize>,
    pub homology_dim: usize,
    pub cuplength: usize,
    pub subordination: usize,
    pub cat_lower: usize,
    pub cat_upper: usize,
    pub cat: Option<usize>,
    pub cat_amb_upper: Option<usize>,
    pub critical_points: Option<usize>,
    /// `|Crit f| ≥ cat_amb ≥ cat > cupp = sub`, with each quantity at its certified bound.
    pub master_chain: Vec<Relation>,
    /// `|Crit f| ≥ dim H_* ≥ 1 + sub` for Morse fields.
    pub morse_line: Vec<Relation>,
    pub cited: BTreeMap<String, usize>,
    pub passed: bool,
}

impl InequalityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The master chain as `4 ≥ 4 ≥ 3 > 2 = 2`, using certified bounds.
    pub fn chain_string(&self) -> String {
        let mut s = String::new();
        for (i, r) in self.master_chain.iter().enumerate() {
            if i == 0 {
                s.push_str(&r.lhs.to_string());
            }
            let op = match r.op.as_str() {
                ">=" => "≥",
                other => other,
            };
            s.push_str(&format!(" {op} {}", r.rhs));
        }
        s
    }
}

/// Instantiates every inequality that the available artifacts support.
pub fn inequality_report(inputs: &ReportInputs<'_>) -> Result<InequalityReport> {
    let cx = inputs.complex;
    let betti = cx.betti();
    let homology_dim = betti.iter().sum();
    let cupp = cuplength(cx);
    let sub = subordination_number(cx).number;
    let bounds = cat_bounds(cx, inputs.categorical_cover)?;

    let mut master_chain = Vec::new();
    if let (Some(crit), Some(amb)) = (inputs.critical_points, inputs.ambient_cover) {
        master_chain.push(relation("|Crit f|", crit, ">=", "cat_amb", amb));
        master_chain.push(relation("cat_amb", amb, ">=", "cat", bounds.upper));
    }
    master_chain.push(relation("cat", bounds.lower, ">", "cupp", cupp));
    master_chain.push(relation("cupp", cupp, "=", "sub", sub));

    let mut morse_line = Vec::new();
    if let (Some(crit), true) = (inputs.critical_points, inputs.morse) {
        morse_line.push(relation("|Crit f|", crit, ">=", "dim H_*", homology_dim));
        morse_line.push(relation("dim H_*", homology_dim, ">=", "1 + sub", 1 + sub));
    }
    let passed = master_chain.iter().chain(&morse_line).all(|r| r.pass);
    Ok(InequalityReport {
        schema: SCHEMA.into(),
        config: inputs.config.clone(),
        betti,
        homology_dim,
        cuplength: cupp,
        subordination: sub,
        cat_lower: bounds.lower,
        cat_upper: bounds.upper,
        cat: bounds.exact,
        cat_amb_upper: inputs.ambient_cover,
        critical_points: inputs.critical_points,
        master_chain,
        morse_line,
        cited: inputs.cited.clone(),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, builtin_field, find_critical_points, rp2_mesh, FieldKind, Surface};
    use crate::homology::subordinating_class;

    fn torus(n: usize) -> (Mesh<f64>, Vec<CriticalPoint<f64>>) {
        let f = builtin_field(FieldKind::Height, Surface::torus(2.0, 1.0).unwrap()).unwrap();
        let mesh = build_mesh(&f.surface, Some(&f), n).unwrap();
        let crits = find_critical_points(&f, &mesh, 1e-10, 1e-6).points;
        (mesh, crits)
    }

    /// Per-threshold oracle: rank test of `c ∈ span(B(K_b)) + C(K_s)` in complex coordinates.
    fn vanishes_oracle(filt: &Filtration<f64>, cls: &HomologyClass, s: f64) -> bool {
        let k = cls.degree;
        let cx = &filt.complex;
        let mut gens: Vec<Column> = Vec::new();
        for j in 0..cx.count(k + 1) {
            if cx.is_active(k + 1, j) {
                gens.push(cx.boundary_matrix(k + 1)[j].clone());
            }
        }
        for j in 0..cx.count(k) {
            if cx.is_active(k, j) && filt.values[k][j] <= s {
                gens.push(vec![j]);
            }
        }
        let r = gf2::rank(&gens);
        gens.push(cls.chain.clone());
        gf2::rank(&gens) == r
    }

    #[test]
    fn torus_kappa_values_and_indices() {
        let (mesh, crits) = torus(32);
        let filt = Filtration::global(&mesh).unwrap();
        let expect = [(0usize, vec![-3.0]), (1, vec![-1.0, 1.0]), (2, vec![3.0])];
        for (k, values) in expect {
            let classes = filt.essential_classes(k);
            let mut got: Vec<f64> = Vec::new();
            for c in &classes {
                let r = kappa(&filt, c, &crits).unwrap();
                assert_eq!(r.kappa, r.kappa_vanishing);
                assert!(r.kappa <= r.support_max);
                assert_eq!(r.morse_index_match, Some(true));
                let x = r.critical_point.unwrap();
                assert!((x.value - r.kappa).abs() <= filt.tol_match);
                got.push(r.kappa);
            }
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got.len(), values.len());
            for (g, v) in got.iter().zip(&values) {
                assert!((g - v).abs() < 1e-9, "degree {k}: {g} vs {v}");
            }
        }
    }

    #[test]
    fn no_gap_scan_matches_oracle() {
        let (mesh, crits) = torus(16);
        let filt = Filtration::global(&mesh).unwrap();
        for k in 0..=2 {
            for c in filt.essential_classes(k) {
                let gap = no_gap_interval(&filt, &c).unwrap();
                let r = kappa(&filt, &c, &crits).unwrap();
                assert_eq!(gap.s0, r.kappa);
                assert_eq!(gap.scan.last().unwrap(), &(filt.b, true));
                assert_eq!(gap.scan.first().unwrap(), &(filt.a, false));
                for &(s, z) in &gap.scan {
                    assert_eq!(z, vanishes_oracle(&filt, &c, s), "degree {k} at {s}");
                }
            }
        }
        let csv = no_gap_interval(&filt, &filt.essential_classes(1)[0]).unwrap().to_csv();
        assert!(csv.starts_with("s,is_zero\n"));
    }

    #[test]
    fn band_isolates_saddles() {
        let (mesh, crits) = torus(32);
        let filt = Filtration::new(&mesh, -2.0, 2.0).unwrap();
        assert!(filt.complex.is_relative());
        assert_eq!(filt.complex.betti(), vec![0, 2, 0]);
        let mut ks: Vec<f64> =
            filt.essential_classes(1).iter().map(|c| kappa(&filt, c, &crits).unwrap().kappa).collect();
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(ks, vec![-1.0, 1.0]);
    }

    #[test]
    fn trivial_class_rejected() {
        let (mesh, crits) = torus(16);
        let filt = Filtration::global(&mesh).unwrap();
        let tri = filt.complex.simplices[2][0].clone();
        let edges = [vec![tri[0], tri[1]], vec![tri[0], tri[2]], vec![tri[1], tri[2]]];
        let chain = gf2::from_indices(edges.iter().map(|e| filt.complex.index_of(e).unwrap()).collect());
        let boundary = HomologyClass { degree: 1, chain };
        assert_eq!(kappa(&filt, &boundary, &crits), Err(Error::TrivialClass));
        let open = HomologyClass { degree: 1, chain: vec![0] };
        assert!(matches!(kappa(&filt, &open, &crits), Err(Error::ClassNotInComplex(_))));
    }

    #[test]
    fn refined_chain_point_loop_fundamental() {
        let (mesh, crits) = torus(32);
        let filt = Filtration::global(&mesh).unwrap();
        let cx = &filt.complex;
        let point = &filt.essential_classes(0)[0];
        let fund = &filt.essential_classes(2)[0];
        let mut kappas = Vec::new();
        for lp in filt.essential_classes(1) {
            let w_top = subordinating_class(cx, &lp, fund).unwrap().unwrap();
            let upper = refined_minimax(&filt, &lp, fund, &w_top, &crits).unwrap();
            let w_low = subordinating_class(cx, point, &lp).unwrap().unwrap();
            let lower = refined_minimax(&filt, point, &lp, &w_low, &crits).unwrap();
            assert!(upper.strict && lower.strict);
            kappas.push((lower.lower.kappa, lower.upper.kappa, upper.upper.kappa));
        }
        for (a, b, c) in kappas {
            assert!(a < b && b < c);
            assert_eq!((a, c), (-3.0, 3.0));
        }
        // the unit is not of positive degree
        let unit = crate::homology::unit(cx);
        assert_eq!(refined_minimax(&filt, fund, fund, &unit, &crits), Err(Error::NotSubordinated));
    }

    #[test]
    fn reports() {
        let (mesh, _) = torus(16);
        let cx = ChainComplexGF2::from_mesh(&mesh);
        let inputs = ReportInputs {
            complex: &cx,
            critical_points: Some(4),
            morse: true,
            ambient_cover: Some(4),
            categorical_cover: None,
            cited: BTreeMap::new(),
            config: BTreeMap::new(),
        };
        let r = inequality_report(&inputs).unwrap();
        assert!(r.passed);
        assert_eq!(r.chain_string(), "4 ≥ 4 ≥ 3 > 2 = 2");
        assert_eq!(r.morse_line.iter().map(|x| (x.lhs, x.rhs)).collect::<Vec<_>>(), vec![(4, 4), (4, 3)]);
        assert!(r.to_json().contains("\"schema\": \"conley-kit/1\""));

        let rp = ChainComplexGF2::from_mesh(&rp2_mesh::<f64>(0));
        let cited = BTreeMap::from([("cat".to_string(), 3), ("cupp".to_string(), 2), ("dim_H".to_string(), 3)]);
        let partial = inequality_report(&ReportInputs {
            complex: &rp,
            critical_points: None,
            morse: false,
            ambient_cover: None,
            categorical_cover: None,
            cited,
            config: BTreeMap::new(),
        })
        .unwrap();
        assert_eq!((partial.cat, partial.cuplength, partial.subordination), (Some(3), 2, 2));
        assert!(partial.morse_line.is_empty() && partial.passed);
    }
}
