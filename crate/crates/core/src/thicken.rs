//! Open thickenings of unstable manifolds: forward exhaustions `𝒲ᵢ` of Conley blocks and
//! ambient thickenings `𝒰ᵢ*` built from recursive entrance times, with cover checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::conley::ConleyPair;
use crate::error::{Error, Result};
use crate::flow::{Direction, Flow, FlowParams, Locus, Target, Termination};
use crate::geometry::{CriticalPoint, Mesh, Param};
use crate::homology::ChainComplexGF2;
use crate::real::Real;

/// Backward orbits whose gradient drops below this are treated as converged. Orbits on an
/// unstable curve of a saddle otherwise linger and then escape on roundoff.
pub const LIMIT_GRADIENT: f64 = 1e-6;
/// Safety factor on the sampled supremum of entrance times.
pub const ENTRANCE_SAFETY: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThickeningKind {
    #[serde(rename = "forward-W")]
    ForwardW,
    #[serde(rename = "ambient-U-star")]
    AmbientUStar,
    /// The ambient construction run on `-f`.
    #[serde(rename = "ambient-U")]
    AmbientU,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thickening<T> {
    pub critical_point: CriticalPoint<T>,
    pub kind: ThickeningKind,
    /// Backward time `Tᵢ` (ambient kinds only).
    #[serde(rename = "T")]
    pub big_t: Option<T>,
    /// Entrance time bound `𝒯ᵢ` (ambient kinds only).
    #[serde(rename = "calT")]
    pub cal_t: Option<T>,
    /// Sorted vertex ids of the region.
    pub vertices: Vec<usize>,
    pub horizon: T,
    /// Vertices whose orbit reached the horizon without converging.
    pub truncated: usize,
}

impl<T: Real> Thickening<T> {
    pub fn mask(&self, len: usize) -> Vec<bool> {
        let mut m = vec![false; len];
        for &v in &self.vertices {
            m[v] = true;
        }
        m
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("thickening serializes")
    }
}

/// The same flow with its convergence threshold raised to [`LIMIT_GRADIENT`].
fn limit_flow<'a, T: Real>(flow: &Flow<'a, T>) -> Flow<'a, T> {
    let params = FlowParams { delta_conv: flow.params.delta_conv.max(T::lit(LIMIT_GRADIENT)), ..flow.params };
    Flow::new(flow.field, params)
}

/// `f` along the orbit through a vertex, as sorted `(t, f)` pairs, linearly interpolated.
struct OrbitValues<T> {
    times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> OrbitValues<T> {
    fn at(&self, t: T) -> Option<T> {
        let k = self.times.partition_point(|&s| s < t);
        if k == self.times.len() {
            return None;
        }
        if k == 0 {
            return (self.times[0] == t).then_some(self.values[0]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Some(self.values[k - 1] + w * (self.values[k] - self.values[k - 1]))
    }
}

/// Forward thickenings `𝒲ᵢ = ⋃_{t≥0} φ_t 𝒩ᵢ` of every pair, computed from one backward
/// orbit per vertex: `v ∈ 𝒲ᵢ` iff some `q = φ_{-s} v` satisfies `f(q) < cᵢ+ε`,
/// `f(φ_τ q) > cᵢ-ε` and lies near `Nᵢ`, or the orbit converges to `xᵢ`, or `v ∈ Nᵢ`.
pub fn forward_thickenings<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    pairs: &[ConleyPair<T>],
    horizon: T,
) -> Result<Vec<Thickening<T>>> {
    let flow = limit_flow(flow);
    let masks: Vec<Vec<bool>> = pairs.iter().map(|p| p.n_mask(mesh)).collect();
    let top = pairs.iter().map(|p| p.c + p.epsilon).fold(T::neg_infinity(), T::max);
    let lead = pairs.iter().map(|p| p.tau).fold(T::zero(), T::max);
    let delta_conv = flow.params.delta_conv;

    let rows: Vec<(Vec<bool>, bool)> = (0..mesh.len())
        .into_par_iter()
        .map(|v| {
            let p = mesh.vertices[v].param;
            let ahead = flow.run(p, Direction::Forward, lead, |_| false)?;
            let mut converged = false;
            let behind = flow.run(p, Direction::Backward, horizon, |s| {
                converged = flow.gradient_norm(s.param) < delta_conv;
                converged || s.value > top
            })?;
            let mut times: Vec<T> = behind.samples.iter().rev().map(|s| s.t).collect();
            let mut values: Vec<T> = behind.samples.iter().rev().map(|s| s.value).collect();
            times.extend(ahead.samples.iter().skip(1).map(|s| s.t));
            values.extend(ahead.samples.iter().skip(1).map(|s| s.value));
            let g = OrbitValues { times, values };
            let limit = if converged { Some(behind.last().param) } else { None };
            let member = pairs
                .iter()
                .zip(&masks)
                .map(|(pair, n_mask)| {
                    if n_mask[v] {
                        return true;
                    }
                    if let Some(q) = limit {
                        if flow.match_critical(q, std::slice::from_ref(&pair.critical_point)).is_some() {
                            return true;
                        }
                    }
                    let (upper, lower) = (pair.c + pair.epsilon, pair.c - pair.epsilon);
                    for s in &behind.samples {
                        if s.value >= upper {
                            break;
                        }
                        // s.t ≤ 0 is the signed time of q; φ_τ q sits at s.t + τ
                        let ahead_value = g.at(s.t + pair.tau);
                        if ahead_value.is_some_and(|f| f > lower) && mesh.near_set(n_mask, s.param) {
                            return true;
                        }
                    }
                    false
                })
                .collect();
            let truncated = matches!(behind.termination, Termination::Duration);
            Ok((member, truncated))
        })
        .collect::<Result<_>>()?;

    let truncated = rows.iter().filter(|r| r.1).count();
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(k, pair)| Thickening {
            critical_point: pair.critical_point.clone(),
            kind: ThickeningKind::ForwardW,
            big_t: None,
            cal_t: None,
            vertices: (0..mesh.len()).filter(|&v| rows[v].0[k]).collect(),
            horizon,
            truncated,
        })
        .collect())
}

pub fn forward_thickening<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    pair: &ConleyPair<T>,
    horizon: T,
) -> Result<Thickening<T>> {
    Ok(forward_thickenings(flow, mesh, std::slice::from_ref(pair), horizon)?.remove(0))
}

/// Whether `p` lies in the closed block of `pair`: the defining inequalities (up to `tol_level`)
/// and the component of the critical point. The component is read off the guard band around
/// the vertex set, or, where the mesh under-resolves the block, from a backward orbit
/// converging to the critical point (the orbit segment back to it stays in the block).
pub fn block_membership<T: Real>(flow: &Flow<'_, T>, mesh: &Mesh<T>, pair: &ConleyPair<T>, p: Param<T>) -> Result<bool> {
    let (_, vals) = flow.values_at(p, &[T::zero(), pair.tau])?;
    let tol = flow.params.tol_level;
    if vals[0] > pair.c + pair.epsilon + tol || vals[1] < pair.c - pair.epsilon - tol {
        return Ok(false);
    }
    Ok(mesh.near_set(&pair.n_mask(mesh), p) || converges_back(flow, pair, p))
}

fn converges_back<T: Real>(flow: &Flow<'_, T>, pair: &ConleyPair<T>, p: Param<T>) -> bool {
    limit_flow(flow).backward_limit(p, std::slice::from_ref(&pair.critical_point)).is_ok()
}

/// Backward time `𝒯(p) ≤ 0` taking `p` to the exit locus of `pair`; zero on `N`.
pub fn retraction_time<T: Real>(flow: &Flow<'_, T>, mesh: &Mesh<T>, pair: &ConleyPair<T>, p: Param<T>) -> Result<T> {
    let n_mask = pair.n_mask(mesh);
    if n_mask[mesh.nearest_vertex(p)] {
        return Ok(T::zero());
    }
    let member = |q: Param<T>| mesh.near_set(&n_mask, q) || converges_back(flow, pair, q);
    let locus = Locus { lead_time: pair.tau, level: pair.c - pair.epsilon, member: &member };
    flow.arrival_time(p, &Target::Locus(locus), Direction::Backward)
        .map_err(|e| Error::ArrivalFailure(format!("from {:?}: {e}", [p[0].as_f64(), p[1].as_f64()])))
}

/// `h(λ, p) = φ_{λ𝒯(p)} p`, deforming `𝒲` into `N`.
pub fn retraction_homotopy<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    pair: &ConleyPair<T>,
    th: &Thickening<T>,
    lambda: T,
    p: Param<T>,
) -> Result<Param<T>> {
    if th.kind != ThickeningKind::ForwardW {
        return Err(Error::InvalidParameters("retraction needs a forward thickening".into()));
    }
    if !(T::zero()..=T::one()).contains(&lambda) {
        return Err(Error::InvalidParameters(format!("lambda {lambda} outside [0, 1]")));
    }
    let t = retraction_time(flow, mesh, pair, p)?;
    if t == T::zero() || lambda == T::zero() {
        return Ok(p);
    }
    flow.flow_to(p, lambda * t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntranceTime<T> {
    /// Supremum of the sampled `𝒯ᵢ⁺`, zero when no entrance sample exists.
    pub sup: T,
    /// `𝒯ᵢ = 1 + 1.25·sup`.
    pub value: T,
    pub safety_factor: T,
    pub samples: usize,
    pub skipped: usize,
    /// Set when some sample's backward limit or exit arrival failed.
    pub flagged: bool,
}

/// Entrance time bound `𝒯ᵢ`: each entrance sample on the level `cᵢ+ε` is flowed
/// back to its limit `xⱼ` and timed against the exit locus of `Nⱼ`. `pairs` must share
/// `ε, τ` and list every critical point.
pub fn entrance_time_bound<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    pairs: &[ConleyPair<T>],
    i: usize,
) -> Result<EntranceTime<T>> {
    let flow = limit_flow(flow);
    let crits: Vec<CriticalPoint<T>> = pairs.iter().map(|p| p.critical_point.clone()).collect();
    let values: Vec<T> = crits.iter().map(|c| c.value).collect();
    let pair = &pairs[i];
    let (upper, lower) = (pair.c + pair.epsilon, pair.c - pair.epsilon);
    let others: Vec<T> = values.iter().copied().enumerate().filter(|&(k, _)| k != i).map(|(_, c)| c).collect();
    let masks: Vec<Vec<bool>> = pairs.iter().map(|p| p.n_mask(mesh)).collect();

    // Entrance candidates: the boundary ring of N, projected to the top level and filtered by
    // the entrance condition. Vertex labels alone miss the locus when blocks are a few cells wide.
    let n_mask = &masks[i];
    let mut ring: Vec<usize> = pair.boundary(mesh);
    for v in pair.boundary(mesh) {
        ring.extend(mesh.neighbors[v].iter().copied().filter(|&w| !n_mask[w]));
    }
    ring.retain(|v| !pair.n_minus.contains(v) && !pair.l.contains(v));
    ring.sort_unstable();
    ring.dedup();
    let outcomes: Vec<Option<Option<T>>> = ring
        .par_iter()
        .map(|&v| {
            let p = mesh.vertices[v].param;
            let q = match flow.level_flow(p, flow.value(p) - upper, &others) {
                Ok(q) => q,
                Err(_) => return None,
            };
            let keep = flow.values_at(q, &[pair.tau]).map(|(_, f)| f[0] > lower);
            match keep {
                Ok(true) if mesh.near_set(n_mask, q) => {}
                Ok(true) => return Some(None),
                Ok(false) => return Some(None),
                Err(_) => return None,
            }
            let j = flow.backward_limit(q, &crits).ok().filter(|&j| j != i)?;
            let target = &pairs[j];
            let member = |r: Param<T>| mesh.near_set(&masks[j], r);
            let locus = Locus { lead_time: target.tau, level: target.c - target.epsilon, member: &member };
            let s = flow.arrival_time(q, &Target::Locus(locus), Direction::Backward).ok()?;
            Some(Some(-s))
        })
        .collect();

    let skipped = outcomes.iter().filter(|o| o.is_none()).count();
    let times: Vec<T> = outcomes.into_iter().flatten().flatten().collect();
    let sup = times.iter().copied().fold(T::zero(), T::max);
    let safety = T::lit(ENTRANCE_SAFETY);
    Ok(EntranceTime { sup, value: T::one() + safety * sup, safety_factor: safety, samples: times.len(), skipped, flagged: skipped > 0 })
}

/// Ambient thickenings `𝒰ᵢ* = φ_{Tᵢ}⁻¹ 𝒩ᵢ` with `Tᵢ = 𝒯ᵢ + T_{i+1}` over pairs sorted by
/// level, `T_{ℓ+1} = 0`. Returned in ascending level order with the entrance times used.
pub fn ambient_thickenings<T: Real>(
    flow: &Flow<'_, T>,
    mesh: &Mesh<T>,
    pairs: &[ConleyPair<T>],
) -> Result<(Vec<Thickening<T>>, Vec<EntranceTime<T>>)> {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.c.partial_cmp(&b.c).expect("finite levels"));
    let entrance: Vec<EntranceTime<T>> =
        (0..sorted.len()).map(|i| entrance_time_bound(flow, mesh, &sorted, i)).collect::<Result<_>>()?;
    let mut big_t = vec![T::zero(); sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        big_t[i] = entrance[i].value + big_t[i + 1];
    }
    let kind = if flow.field.negated { ThickeningKind::AmbientU } else { ThickeningKind::AmbientUStar };

    let mut out = Vec::with_capacity(sorted.len());
    for (i, pair) in sorted.iter().enumerate() {
        let n_mask = pair.n_mask(mesh);
        let t = big_t[i];
        let hits: Vec<bool> = mesh
            .vertices
            .par_iter()
            .map(|vx| {
                let (pts, vals) = flow.values_at(vx.param, &[t, t + pair.tau])?;
                Ok(pair.contains_point(mesh, &n_mask, pts[0], vals[0], vals[1]))
            })
            .collect::<Result<_>>()?;
        out.push(Thickening {
            critical_point: pair.critical_point.clone(),
            kind,
            big_t: Some(t),
            cal_t: Some(entrance[i].value),
            vertices: (0..mesh.len()).filter(|&v| hits[v]).collect(),
            horizon: t + pair.tau,
            truncated: 0,
        });
    }
    Ok((out, entrance))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    /// Thickening ids containing each vertex.
    pub owners: Vec<Vec<usize>>,
    pub uncovered: usize,
    pub same_level_disjoint: bool,
    /// Reduced GF(2) Betti numbers of each induced subcomplex; `None` for an empty region.
    pub reduced_betti: Vec<Option<Vec<usize>>>,
    /// Contractibility proxy: all reduced Betti numbers vanish. Necessary, not sufficient.
    pub acyclic: Vec<bool>,
    pub passed: bool,
}

/// Cover, same-level disjointness and homological contractibility proxy of a family of thickenings.
pub fn verify_cover<T: Real>(ths: &[Thickening<T>], mesh: &Mesh<T>) -> CoverReport {
    let mut owners = vec![Vec::new(); mesh.len()];
    for (k, th) in ths.iter().enumerate() {
        for &v in &th.vertices {
            owners[v].push(k);
        }
    }
    let uncovered = owners.iter().filter(|o| o.is_empty()).count();
    let masks: Vec<Vec<bool>> = ths.iter().map(|th| th.mask(mesh.len())).collect();
    let mut same_level_disjoint = true;
    for a in 0..ths.len() {
        for b in a + 1..ths.len() {
            let (ca, cb) = (ths[a].critical_point.value, ths[b].critical_point.value);
            let same = (ca - cb).abs() <= T::lit(1e-9) * (T::one() + ca.abs());
            if same && masks[a].iter().zip(&masks[b]).any(|(x, y)| *x && *y) {
                same_level_disjoint = false;
            }
        }
    }
    let full = ChainComplexGF2::from_mesh(mesh);
    let reduced_betti: Vec<Option<Vec<usize>>> = masks.par_iter().map(|m| full.induced(m).reduced_betti()).collect();
    let acyclic = reduced_betti.iter().map(|b| b.as_ref().is_some_and(|b| b.iter().all(|&x| x == 0))).collect();
    CoverReport { owners, uncovered, same_level_disjoint, reduced_betti, acyclic, passed: uncovered == 0 && same_level_disjoint }
}
