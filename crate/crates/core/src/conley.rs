//! Conley pairs `(N, L)` of isolated critical points, realized as mesh vertex sets,
//! and sampled verification of the pair axioms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Direction, Flow};
use crate::geometry::{CriticalPoint, Membership, Mesh, Param};
use crate::real::Real;

/// Minimum gradient norm on the bands around `c ± ε`.
pub const REGULARITY_THRESHOLD: f64 = 1e-3;
pub const EPSILON_MIN: f64 = 1e-4;
pub const TAU_MAX: f64 = 64.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConleyPair<T> {
    pub critical_point: CriticalPoint<T>,
    pub c: T,
    pub epsilon: T,
    pub tau: T,
    /// Vertices of the block, sorted.
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    /// Entrance locus.
    #[serde(rename = "Nplus")]
    pub n_plus: Vec<usize>,
    /// Bounce-off locus.
    #[serde(rename = "Nzero")]
    pub n_zero: Vec<usize>,
    /// Exit locus.
    #[serde(rename = "Nminus")]
    pub n_minus: Vec<usize>,
}

fn mask(len: usize, ids: &[usize]) -> Vec<bool> {
    let mut m = vec![false; len];
    for &i in ids {
        m[i] = true;
    }
    m
}

impl<T: Real> ConleyPair<T> {
    pub fn n_mask(&self, mesh: &Mesh<T>) -> Vec<bool> {
        mask(mesh.len(), &self.n)
    }

    pub fn l_mask(&self, mesh: &Mesh<T>) -> Vec<bool> {
        mask(mesh.len(), &self.l)
    }

    pub fn exit_mask(&self, mesh: &Mesh<T>) -> Vec<bool> {
        mask(mesh.len(), &self.n_minus)
    }

    /// Boundary vertices of `N`: those with a neighbour outside `N`.
    pub fn boundary(&self, mesh: &Mesh<T>) -> Vec<usize> {
        let m = self.n_mask(mesh);
        self.n
            .iter()
            .copied()
            .filter(|&v| mesh.neighbors[v].iter().any(|&w| !m[w]))
            .collect()
    }

    /// `N` without its boundary vertices.
    pub fn interior(&self, mesh: &Mesh<T>) -> Vec<usize> {
        let m = self.n_mask(mesh);
        self.n
            .iter()
            .copied()
            .filter(|&v| mesh.neighbors[v].iter().all(|&w| m[w]))
            .collect()
    }

    /// Whether a continuum point lies in the open block: strict defining inequalities
    /// plus a guard band around the vertex set `N` to select the right component.
    /// `f_tau` is `f(φ_τ p)`.
    pub fn contains_point(&self, mesh: &Mesh<T>, n_mask: &[bool], p: Param<T>, f: T, f_tau: T) -> bool {
        f < self.c + self.epsilon && f_tau > self.c - self.epsilon && mesh.near_set(n_mask, p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pair serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Smallest gradient norm over mesh vertices with `|f - level| ≤ delta`, if any.
fn band_min_gradient<T: Real>(flow: &Flow<'_, T>, mesh: &Mesh<T>, level: T, delta: T) -> Option<T> {
    mesh.vertices
        .par_iter()
        .filter(|v| (v.value - level).abs() <= delta)
        .map(|v| flow.gradient_norm(v.param))
        .reduce_with(T::min)
}

/// Half-width of the regularity band: twice the largest edge jump of `f`, capped at `ε/2`
/// so that the band never reaches the critical level itself.
pub fn regularity_band<T: Real>(mesh: &Mesh<T>, epsilon: T) -> T {
    (T::lit(2.0) * mesh.max_edge_value_gap()).min(epsilon / T::lit(2.0))
}

/// Checks that `c ± ε` are regular values up to mesh resolution.
pub fn check_regular<T: Real>(flow: &Flow<'_, T>, mesh: &Mesh<T>, c: T, epsilon: T) -> Result<()> {
    let delta = regularity_band(mesh, epsilon);
    for level in [c + epsilon, c - epsilon] {
        if let Some(g) = band_min_gradient(flow, mesh, level, delta) {
            if g < T::lit(REGULARITY_THRESHOLD) {
                return Err(Error::NonregularEpsilon { level: level.as_f64(), min_grad: g.as_f64() });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct VertexEval<T> {
    f: T,
    f_tau: T,
    f_2tau: T,
}

/// Builds `N = component of {f ≤ c+ε, f∘φ_τ ≥ c-ε}` through `x` and
/// `L = {p ∈ N : f∘φ_{2τ} ≤ c-ε}`, and partitions the boundary of `N`.
///
/// The component is grown outward from the vertex nearest `x`, so only `N` and its
/// outer ring are integrated.
pub fn build_conley_pair<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    x: &CriticalPoint<T>,
    epsilon: T,
    tau: T,
) -> Result<ConleyPair<T>> {
    if !(epsilon > T::zero()) || !(tau >= T::one()) {
        return Err(Error::InvalidParameters(format!(
            "need epsilon > 0 and tau >= 1, got {epsilon}, {tau}"
        )));
    }
    let c = x.value;
    check_regular(flow, mesh, c, epsilon)?;
    let (upper, lower) = (c + epsilon, c - epsilon);

    let len = mesh.len();
    let mut eval: Vec<Option<VertexEval<T>>> = vec![None; len];
    let mut in_n = vec![false; len];
    let mut queued = vec![false; len];
    let start = mesh.nearest_vertex(x.param);
    queued[start] = true;
    let mut frontier = vec![start];
    while !frontier.is_empty() {
        let evals: Vec<VertexEval<T>> = frontier
            .par_iter()
            .map(|&v| {
                let p = mesh.vertices[v].param;
                let (_, vals) = flow.values_at(p, &[tau, tau + tau])?;
                Ok(VertexEval { f: mesh.vertices[v].value, f_tau: vals[0], f_2tau: vals[1] })
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (&v, e) in frontier.iter().zip(evals) {
            eval[v] = Some(e);
            if e.f <= upper && e.f_tau >= lower {
                in_n[v] = true;
                for &w in &mesh.neighbors[v] {
                    if !queued[w] {
                        queued[w] = true;
                        next.push(w);
                    }
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }
    if !in_n[start] {
        return Err(Error::EmptyBlock);
    }

    let n: Vec<usize> = (0..len).filter(|&v| in_n[v]).collect();
    let l: Vec<usize> = n
        .iter()
        .copied()
        .filter(|&v| eval[v].unwrap().f_2tau <= lower)
        .collect();
    let (mut n_plus, mut n_zero, mut n_minus) = (Vec::new(), Vec::new(), Vec::new());
    for &v in &n {
        let (mut above, mut below) = (false, false);
        for &w in &mesh.neighbors[v] {
            if in_n[w] {
                continue;
            }
            // every outside neighbour has been evaluated and violates some constraint
            let e = eval[w].unwrap();
            above |= e.f > upper;
            below |= e.f_tau < lower;
        }
        match (above, below) {
            (true, true) => n_zero.push(v),
            (true, false) => n_plus.push(v),
            (false, true) => n_minus.push(v),
            (false, false) => {}
        }
    }
    Ok(ConleyPair { critical_point: x.clone(), c, epsilon, tau, n, l, n_plus, n_zero, n_minus })
}

/// Outcome of one sampled axiom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomOutcome<T> {
    pub passed: bool,
    /// Samples that were actually judged.
    pub checked: usize,
    pub counterexamples: usize,
    /// Up to ten offending sample points.
    pub witnesses: Vec<Param<T>>,
}

impl<T> AxiomOutcome<T> {
    fn from_results(results: impl IntoIterator<Item = Option<Option<Param<T>>>>) -> Self {
        let (mut checked, mut counterexamples, mut witnesses) = (0, 0, Vec::new());
        for bad in results.into_iter().flatten() {
            checked += 1;
            if let Some(p) = bad {
                counterexamples += 1;
                if witnesses.len() < 10 {
                    witnesses.push(p);
                }
            }
        }
        Self { passed: counterexamples == 0, checked, counterexamples, witnesses }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoReentry<T> {
    pub holds: bool,
    pub exiting_samples: usize,
    pub witnesses: Vec<Param<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport<T> {
    /// `x` lies in the interior of `N` and outside `L`.
    pub axiom_i: AxiomOutcome<T>,
    /// No other critical point's nearest vertex is in `N`.
    pub axiom_ii: AxiomOutcome<T>,
    /// `L` is positively invariant in `N`.
    pub axiom_iii: AxiomOutcome<T>,
    /// Trajectories leaving `N` pass through `L` first.
    pub axiom_iv: AxiomOutcome<T>,
    pub no_reentry: NoReentry<T>,
    pub samples: usize,
    /// Candidate samples rejected because their guard band straddles the set boundary.
    pub borderline: usize,
    pub epsilon: T,
    pub tau: T,
    pub seed: u64,
}

impl<T> VerificationReport<T> {
    pub fn passed(&self) -> bool {
        self.axiom_i.passed
            && self.axiom_ii.passed
            && self.axiom_iii.passed
            && self.axiom_iv.passed
            && self.no_reentry.holds
    }
}

/// Uniform point of a random cell incident to `v`.
pub(crate) fn sample_in_star<T: Real>(mesh: &Mesh<T>, v: usize, rng: &mut ChaCha8Rng) -> Param<T> {
    let cells = mesh.cells_of(v);
    let cell = mesh.cell(cells[rng.gen_range(0..cells.len())]);
    let mut w: Vec<f64> = cell.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    let w: Vec<T> = w.into_iter().map(T::lit).collect();
    mesh.interpolate(&cell, &w)
}

/// Draws up to `m` points lying in `set` with their whole guard band, from stars of
/// random set vertices. Returns the points and the number of borderline rejections.
pub(crate) fn sample_inside<T: Real>(
    mesh: &Mesh<T>,
    set: &[usize],
    set_mask: &[bool],
    m: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Param<T>>, usize) {
    let mut out = Vec::with_capacity(m);
    let mut borderline = 0;
    if set.is_empty() {
        return (out, 0);
    }
    let budget = 50 * m.max(1);
    for _ in 0..budget {
        if out.len() == m {
            break;
        }
        let v = set[rng.gen_range(0..set.len())];
        let p = sample_in_star(mesh, v, rng);
        match mesh.classify(set_mask, p) {
            Membership::Inside => out.push(p),
            _ => borderline += 1,
        }
    }
    (out, borderline)
}

struct ExitTrace<T> {
    exited: bool,
    saw_l: bool,
    reentry: Option<Param<T>>,
}

/// Follows the forward orbit of `p` out of `N`, recording whether it came near `L`
/// before leaving and whether it ever comes back inside `N` afterwards.
fn trace_exit<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    n_mask: &[bool],
    l_mask: &[bool],
    floor: T,
    p: Param<T>,
) -> Result<ExitTrace<T>> {
    let mut tr = ExitTrace { exited: false, saw_l: false, reentry: None };
    flow.run(p, Direction::Forward, flow.params.horizon, |s| {
        if !tr.exited {
            if mesh.near_set(l_mask, s.param) {
                tr.saw_l = true;
            }
            if mesh.classify(n_mask, s.param) == Membership::Outside {
                tr.exited = true;
            }
            flow.gradient_norm(s.param) < flow.params.delta_conv
        } else {
            if mesh.classify(n_mask, s.param) == Membership::Inside {
                tr.reentry = Some(s.param);
                return true;
            }
            // below every vertex of N (with one edge of slack) nothing can re-enter
            s.value < floor || flow.gradient_norm(s.param) < flow.params.delta_conv
        }
    })?;
    Ok(tr)
}

fn reentry_floor<T: Real>(mesh: &Mesh<T>, pair: &ConleyPair<T>) -> T {
    let lowest = pair.n.iter().map(|&v| mesh.vertices[v].value).fold(T::infinity(), T::min);
    lowest - T::lit(2.0) * mesh.max_edge_value_gap()
}

/// Samples the pair axioms with `m` judged trajectories per sampled axiom.
pub fn verify_conley_pair<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    pair: &ConleyPair<T>,
    crits: &[CriticalPoint<T>],
    m: usize,
    seed: u64,
) -> Result<VerificationReport<T>> {
    let n_mask = pair.n_mask(mesh);
    let l_mask = pair.l_mask(mesh);
    let x_vertex = mesh.nearest_vertex(pair.critical_point.param);
    let interior = mesh.neighbors[x_vertex].iter().all(|&w| n_mask[w]) && n_mask[x_vertex];
    let axiom_i = AxiomOutcome::from_results([Some(
        (!(interior && !l_mask[x_vertex])).then_some(pair.critical_point.param),
    )]);
    let axiom_ii = AxiomOutcome::from_results(crits.iter().filter_map(|c| {
        let same = c.param == pair.critical_point.param;
        (!same).then(|| Some(n_mask[mesh.nearest_vertex(c.param)].then_some(c.param)))
    }));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l_samples, l_border) = sample_inside(mesh, &pair.l, &l_mask, m, &mut rng);
    let (n_samples, n_border) = sample_inside(mesh, &pair.n, &n_mask, m, &mut rng);

    let iii: Vec<Option<Option<Param<T>>>> = l_samples
        .par_iter()
        .map(|&p| {
            let mut bad = false;
            flow.run(p, Direction::Forward, flow.params.horizon, |s| {
                match mesh.classify(&n_mask, s.param) {
                    Membership::Outside => return true,
                    Membership::Inside if mesh.classify(&l_mask, s.param) == Membership::Outside => {
                        bad = true;
                        return true;
                    }
                    _ => {}
                }
                flow.gradient_norm(s.param) < flow.params.delta_conv
            })?;
            Ok(Some(bad.then_some(p)))
        })
        .collect::<Result<_>>()?;
    let axiom_iii = AxiomOutcome::from_results(iii);

    let floor = reentry_floor(mesh, pair);
    let traces: Vec<ExitTrace<T>> = n_samples
        .par_iter()
        .map(|&p| trace_exit(flow, mesh, &n_mask, &l_mask, floor, p))
        .collect::<Result<_>>()?;
    let axiom_iv = AxiomOutcome::from_results(
        traces
            .iter()
            .zip(&n_samples)
            .map(|(t, &p)| t.exited.then_some((!t.saw_l).then_some(p))),
    );
    let no_reentry = reentry_summary(&traces);

    Ok(VerificationReport {
        axiom_i,
        axiom_ii,
        axiom_iii,
        axiom_iv,
        no_reentry,
        samples: m,
        borderline: l_border + n_border,
        epsilon: pair.epsilon,
        tau: pair.tau,
        seed,
    })
}

fn reentry_summary<T: Real>(traces: &[ExitTrace<T>]) -> NoReentry<T> {
    let exiting = traces.iter().filter(|t| t.exited).count();
    let witnesses: Vec<Param<T>> = traces.iter().filter_map(|t| t.reentry).take(10).collect();
    NoReentry { holds: witnesses.is_empty(), exiting_samples: exiting, witnesses }
}

/// Samples `m` points of `N` and checks that no exiting orbit comes back.
pub fn no_reentry_check<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    pair: &ConleyPair<T>,
    m: usize,
    seed: u64,
) -> Result<NoReentry<T>> {
    let n_mask = pair.n_mask(mesh);
    let l_mask = pair.l_mask(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (samples, _) = sample_inside(mesh, &pair.n, &n_mask, m, &mut rng);
    let floor = reentry_floor(mesh, pair);
    let traces: Vec<ExitTrace<T>> = samples
        .par_iter()
        .map(|&p| trace_exit(flow, mesh, &n_mask, &l_mask, floor, p))
        .collect::<Result<_>>()?;
    Ok(reentry_summary(&traces))
}

/// Searches for `(ε, τ)` whose block lies inside `u_mask` and still contains a
/// neighbourhood of `x`. Candidates are tried in order of total refinement `k`
/// (`ε₀/2^(k-d)`, `τ₀·2^d`), preferring pure `ε`-halving at each `k`.
pub fn shrink_into<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    x: &CriticalPoint<T>,
    u_mask: &[bool],
    epsilon: T,
    tau: T,
) -> Result<(T, T)> {
    let x_vertex = mesh.nearest_vertex(x.param);
    let mut smallest = usize::MAX;
    for k in 0usize.. {
        let mut any_in_budget = false;
        for d in 0..=k {
            let eps = epsilon / T::lit(2f64.powi((k - d) as i32));
            let t = tau * T::lit(2f64.powi(d as i32));
            if eps < T::lit(EPSILON_MIN) || t > T::lit(TAU_MAX) {
                continue;
            }
            any_in_budget = true;
            let pair = match build_conley_pair(flow, mesh, x, eps, t) {
                Ok(p) => p,
                Err(Error::NonregularEpsilon { .. }) | Err(Error::EmptyBlock) => continue,
                Err(e) => return Err(e),
            };
            smallest = smallest.min(pair.n.len());
            let n_mask = pair.n_mask(mesh);
            let neighbourhood = n_mask[x_vertex] && mesh.neighbors[x_vertex].iter().all(|&w| n_mask[w]);
            if neighbourhood && pair.n.iter().all(|&v| u_mask[v]) {
                return Ok((eps, t));
            }
        }
        if !any_in_budget {
            break;
        }
    }
    Err(Error::SearchExhausted { smallest_block: smallest })
}
