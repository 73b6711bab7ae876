//! Downward gradient flow `d/dt φ_t = -∇f ∘ φ_t`, its level-normalized variant,
//! asymptotic limits and arrival times.
//!
//! Circle and torus flows are integrated in chart coordinates with the metric
//! gradient `g⁻¹∂f`. The sphere is integrated in embedded coordinates with the
//! tangential gradient and re-normalized after each step.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CriticalPoint, Param, ScalarField, SurfaceKind};
use crate::real::{angle_delta, dist3, norm3, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowParams<T> {
    /// Initial (and largest) step.
    pub h: T,
    pub h_min: T,
    /// Per-step agreement required between one step and two half steps.
    pub tol_int: T,
    /// `|∇f|` below which a trajectory counts as converged.
    pub delta_conv: T,
    pub horizon: T,
    pub tol_mono: T,
    pub tol_level: T,
    /// Embedded distance within which a converged point is matched to a critical point.
    pub match_radius: T,
}

impl<T: Real> Default for FlowParams<T> {
    fn default() -> Self {
        // tolerances are floored a few ulps above the scalar's resolution
        let floor = |x: f64, ulps: f64| T::lit(x).max(T::epsilon() * T::lit(ulps));
        Self {
            h: T::lit(1e-2),
            h_min: T::lit(1e-6),
            tol_int: floor(1e-8, 100.0),
            delta_conv: floor(1e-8, 100.0),
            horizon: T::lit(200.0),
            tol_mono: floor(1e-9, 10.0),
            tol_level: floor(1e-9, 10.0),
            match_radius: T::lit(1e-2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign<T: Real>(self) -> T {
        match self {
            Direction::Forward => T::one(),
            Direction::Backward => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    /// Requested duration reached.
    Duration,
    /// Horizon reached without the stop condition firing.
    Horizon,
    ConvergedTo { critical: usize },
    CrossedLevel,
    /// A caller-supplied stop condition fired.
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample<T> {
    pub t: T,
    pub param: Param<T>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub h: T,
    pub termination: Termination,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory has at least the start sample")
    }

    /// CSV with header `t,u,v,f` (`t,u,f` for one-dimensional surfaces).
    pub fn to_csv(&self, dim: usize) -> String {
        let mut s = String::new();
        if dim == 1 {
            s.push_str("t,u,f\n");
            for x in &self.samples {
                let _ = writeln!(s, "{},{},{}", x.t.as_f64(), x.param[0].as_f64(), x.value.as_f64());
            }
        } else {
            s.push_str("t,u,v,f\n");
            for x in &self.samples {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    x.t.as_f64(),
                    x.param[0].as_f64(),
                    x.param[1].as_f64(),
                    x.value.as_f64()
                );
            }
        }
        s
    }
}

/// Internal integration state: chart coordinates `[u, v, 0]`, or the embedded point on the sphere.
type State<T> = [T; 3];

/// Integrator for the gradient flow of one field.
#[derive(Debug, Clone, Copy)]
pub struct Flow<'a, T> {
    pub field: &'a ScalarField<T>,
    pub params: FlowParams<T>,
}

/// Which vector field is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Vector {
    /// `-∇f`
    Gradient,
    /// `-∇f / |∇f|²`
    Level,
}

impl<'a, T: Real> Flow<'a, T> {
    pub fn new(field: &'a ScalarField<T>, params: FlowParams<T>) -> Self {
        Self { field, params }
    }

    fn embedded(&self) -> bool {
        matches!(self.field.surface.kind, SurfaceKind::Sphere { .. })
    }

    fn to_state(&self, p: Param<T>) -> State<T> {
        if self.embedded() {
            self.field.surface.chart(p).unwrap()
        } else {
            [p[0], p[1], T::zero()]
        }
    }

    fn to_param(&self, s: &State<T>) -> Param<T> {
        if self.embedded() {
            self.field.surface.sphere_param_of(s).unwrap()
        } else {
            self.field.surface.wrap([s[0], s[1]])
        }
    }

    fn retract(&self, s: State<T>) -> State<T> {
        match self.field.surface.kind {
            SurfaceKind::Sphere { radius } => {
                let n = norm3(&s);
                [s[0] / n * radius, s[1] / n * radius, s[2] / n * radius]
            }
            _ => {
                let p = self.field.surface.wrap([s[0], s[1]]);
                [p[0], p[1], T::zero()]
            }
        }
    }

    fn state_value(&self, s: &State<T>) -> T {
        match self.field.surface.kind {
            SurfaceKind::Sphere { radius } => self.field.value_at_point(s) * radius / norm3(s),
            _ => self.field.value([s[0], s[1]]),
        }
    }

    /// Riemannian gradient and its squared norm at a state.
    fn gradient(&self, s: &State<T>) -> (State<T>, T) {
        match self.field.surface.kind {
            SurfaceKind::Sphere { .. } => {
                let r = norm3(s);
                let n = [s[0] / r, s[1] / r, s[2] / r];
                // ambient gradient of the height function is ±e_z
                let sq = T::one() - n[2] * n[2];
                let g = [-n[2] * n[0], -n[2] * n[1], sq];
                if self.field.negated {
                    ([-g[0], -g[1], -g[2]], sq)
                } else {
                    (g, sq)
                }
            }
            _ => {
                let p = [s[0], s[1]];
                let g = self.field.gradient(p);
                let d = self.field.chart_gradient(p);
                let sq = d[0] * g[0] + if self.field.dim() == 2 { d[1] * g[1] } else { T::zero() };
                ([g[0], g[1], T::zero()], sq)
            }
        }
    }

    fn velocity(&self, s: &State<T>, sign: T, vector: Vector) -> State<T> {
        let (g, sq) = self.gradient(s);
        let scale = match vector {
            Vector::Gradient => -sign,
            Vector::Level => -sign / sq,
        };
        [g[0] * scale, g[1] * scale, g[2] * scale]
    }

    fn rk4(&self, s: &State<T>, dt: T, sign: T, vector: Vector) -> State<T> {
        let add = |a: &State<T>, k: &State<T>, c: T| [a[0] + k[0] * c, a[1] + k[1] * c, a[2] + k[2] * c];
        let half = dt / T::lit(2.0);
        let k1 = self.velocity(s, sign, vector);
        let k2 = self.velocity(&add(s, &k1, half), sign, vector);
        let k3 = self.velocity(&add(s, &k2, half), sign, vector);
        let k4 = self.velocity(&add(s, &k3, dt), sign, vector);
        let six = T::lit(6.0);
        let mut out = *s;
        for i in 0..3 {
            out[i] = out[i] + dt * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]) / six;
        }
        self.retract(out)
    }

    fn state_gap(&self, a: &State<T>, b: &State<T>) -> T {
        if self.embedded() {
            dist3(a, b)
        } else {
            let du = angle_delta(a[0], b[0]);
            let dv = if self.field.dim() == 2 { angle_delta(a[1], b[1]) } else { T::zero() };
            (du * du + dv * dv).sqrt()
        }
    }

    /// One accepted step of at most `max_dt`, with step-doubling error control.
    fn step(&self, st: &mut Stepper<T>, max_dt: T, vector: Vector) -> Result<T> {
        loop {
            let dt = st.h.min(max_dt);
            let full = self.rk4(&st.state, dt, st.sign, vector);
            let mid = self.rk4(&st.state, dt / T::lit(2.0), st.sign, vector);
            let half = self.rk4(&mid, dt / T::lit(2.0), st.sign, vector);
            let err = self
                .state_gap(&full, &half)
                .max((self.state_value(&full) - self.state_value(&half)).abs());
            if err.is_finite() && err <= self.params.tol_int {
                st.state = half;
                st.time = st.time + st.sign * dt;
                if err < self.params.tol_int / T::lit(64.0) && dt == st.h {
                    st.h = (st.h + st.h).min(self.params.h);
                }
                return Ok(dt);
            }
            if dt < st.h {
                // truncated final step failed: shrink the working step as well
                st.h = dt;
            }
            st.h = st.h / T::lit(2.0);
            if st.h < self.params.h_min {
                return Err(Error::StepUnderflow { time: st.time.as_f64(), h_min: self.params.h_min.as_f64() });
            }
        }
    }

    fn sample(&self, st: &Stepper<T>) -> Sample<T> {
        Sample { t: st.time, param: self.to_param(&st.state), value: self.state_value(&st.state) }
    }

    fn stepper(&self, p: Param<T>, dir: Direction) -> Stepper<T> {
        Stepper { state: self.to_state(p), time: T::zero(), h: self.params.h, sign: dir.sign() }
    }

    /// Integrates for signed duration `t` (negative runs the backward flow),
    /// capped at the horizon, recording every accepted step.
    pub fn integrate(&self, p: Param<T>, t: T) -> Result<Trajectory<T>> {
        let dir = if t < T::zero() { Direction::Backward } else { Direction::Forward };
        let duration = t.abs().min(self.params.horizon);
        let capped = t.abs() > self.params.horizon;
        let mut traj = self.run(p, dir, duration, |_| false)?;
        if capped {
            traj.termination = Termination::Horizon;
        }
        Ok(traj)
    }

    /// Runs for at most `duration` in direction `dir`, stopping early when `stop` fires on a sample.
    pub fn run(
        &self,
        p: Param<T>,
        dir: Direction,
        duration: T,
        mut stop: impl FnMut(&Sample<T>) -> bool,
    ) -> Result<Trajectory<T>> {
        let mut st = self.stepper(p, dir);
        let first = Sample { t: T::zero(), param: self.field.surface.wrap(p), value: self.field.value(p) };
        let mut samples = vec![first];
        if stop(&first) {
            return Ok(Trajectory { samples, h: self.params.h, termination: Termination::Stopped });
        }
        let mut elapsed = T::zero();
        while elapsed < duration {
            let dt = self.step(&mut st, duration - elapsed, Vector::Gradient)?;
            elapsed = elapsed + dt;
            if duration - elapsed < self.params.h_min * T::lit(1e-3) {
                elapsed = duration;
                st.time = dir.sign::<T>() * duration;
            }
            let s = self.sample(&st);
            samples.push(s);
            if stop(&s) {
                return Ok(Trajectory { samples, h: self.params.h, termination: Termination::Stopped });
            }
        }
        Ok(Trajectory { samples, h: self.params.h, termination: Termination::Duration })
    }

    /// `φ_t p` without recording samples.
    pub fn flow_to(&self, p: Param<T>, t: T) -> Result<Param<T>> {
        Ok(self.values_at(p, &[t])?.0[0])
    }

    /// Points and values of the trajectory from `p` at the given signed times, which must
    /// all have the same sign. Lands exactly on each requested time.
    pub fn values_at(&self, p: Param<T>, times: &[T]) -> Result<(Vec<Param<T>>, Vec<T>)> {
        let backward = times.iter().any(|&t| t < T::zero());
        let dir = if backward { Direction::Backward } else { Direction::Forward };
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].abs().partial_cmp(&times[b].abs()).unwrap());
        let mut st = self.stepper(p, dir);
        let mut elapsed = T::zero();
        let mut pts = vec![[T::zero(); 2]; times.len()];
        let mut vals = vec![T::zero(); times.len()];
        for &i in &order {
            let target = times[i].abs();
            while target - elapsed > self.params.h_min * T::lit(1e-3) {
                elapsed = elapsed + self.step(&mut st, target - elapsed, Vector::Gradient)?;
            }
            pts[i] = self.to_param(&st.state);
            vals[i] = self.state_value(&st.state);
        }
        Ok((pts, vals))
    }

    pub fn value(&self, p: Param<T>) -> T {
        self.field.value(p)
    }

    pub fn gradient_norm(&self, p: Param<T>) -> T {
        self.field.gradient_norm(p)
    }

    /// Index of the critical point within `match_radius` of `p`, if any.
    pub fn match_critical(&self, p: Param<T>, crits: &[CriticalPoint<T>]) -> Option<usize> {
        let x = self.field.surface.chart(p)?;
        crits
            .iter()
            .enumerate()
            .map(|(i, c)| (i, dist3(&x, &self.field.surface.chart(c.param).unwrap())))
            .filter(|(_, d)| *d <= self.params.match_radius)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|(i, _)| i)
    }

    fn limit(&self, p: Param<T>, dir: Direction, crits: &[CriticalPoint<T>]) -> Result<usize> {
        let mut hit = None;
        let traj = self.run(p, dir, self.params.horizon, |s| {
            if self.field.gradient_norm(s.param) < self.params.delta_conv {
                hit = self.match_critical(s.param, crits);
            }
            hit.is_some()
        })?;
        match hit {
            Some(i) => Ok(i),
            None => {
                let last = traj.last();
                Err(Error::HorizonExceeded {
                    horizon: self.params.horizon.as_f64(),
                    final_param: [last.param[0].as_f64(), last.param[1].as_f64()],
                    final_grad: self.field.gradient_norm(last.param).as_f64(),
                })
            }
        }
    }

    /// `ω(p)`: the critical point the forward trajectory converges to.
    pub fn forward_limit(&self, p: Param<T>, crits: &[CriticalPoint<T>]) -> Result<usize> {
        self.limit(p, Direction::Forward, crits)
    }

    /// `α(p)`: the critical point the backward trajectory converges to.
    pub fn backward_limit(&self, p: Param<T>, crits: &[CriticalPoint<T>]) -> Result<usize> {
        self.limit(p, Direction::Backward, crits)
    }

    /// Signed time at which the trajectory from `p` in direction `dir` reaches `target`.
    pub fn arrival_time(&self, p: Param<T>, target: &Target<'_, T>, dir: Direction) -> Result<T> {
        match target {
            Target::Level(level) => self.level_arrival(p, *level, dir),
            Target::Locus(locus) => {
                // φ_s p lies on the carrier iff f(φ_{s+lead} p) = level
                let towards = if self.field.value(p) >= locus.level {
                    Direction::Forward
                } else {
                    Direction::Backward
                };
                let t_level = self.level_arrival(p, locus.level, towards)?;
                let s = t_level - locus.lead_time;
                let ok_dir = match dir {
                    Direction::Forward => s >= T::zero(),
                    Direction::Backward => s <= T::zero(),
                };
                if !ok_dir {
                    return Err(Error::NoCrossing);
                }
                let q = self.flow_to(p, s)?;
                if (locus.member)(q) {
                    Ok(s)
                } else {
                    Err(Error::NoCrossing)
                }
            }
        }
    }

    fn level_arrival(&self, p: Param<T>, level: T, dir: Direction) -> Result<T> {
        let f0 = self.field.value(p);
        if (f0 - level).abs() <= self.params.tol_level {
            return Ok(T::zero());
        }
        let wrong_side = match dir {
            Direction::Forward => level > f0,
            Direction::Backward => level < f0,
        };
        if wrong_side {
            return Err(Error::NoCrossing);
        }
        let crossed = |v: T| match dir {
            Direction::Forward => v <= level,
            Direction::Backward => v >= level,
        };
        let mut st = self.stepper(p, dir);
        let mut elapsed = T::zero();
        while elapsed < self.params.horizon {
            let before = st;
            let dt = self.step(&mut st, self.params.horizon - elapsed, Vector::Gradient)?;
            elapsed = elapsed + dt;
            let v = self.state_value(&st.state);
            if crossed(v) {
                // bisect the sub-step length from the previous accepted state
                let (mut lo, mut hi) = (T::zero(), dt);
                let mut t_best = dt;
                for _ in 0..200 {
                    let mid = (lo + hi) / T::lit(2.0);
                    let s = self.rk4(&before.state, mid, before.sign, Vector::Gradient);
                    let fv = self.state_value(&s);
                    t_best = mid;
                    if (fv - level).abs() <= self.params.tol_level {
                        break;
                    }
                    if crossed(fv) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < T::epsilon() * dt {
                        break;
                    }
                }
                let t = before.time.abs() + t_best;
                return Ok(dir.sign::<T>() * t);
            }
            if self.gradient(&st.state).1.sqrt() < self.params.delta_conv {
                return Err(Error::NoCrossing);
            }
        }
        Err(Error::NoCrossing)
    }

    /// Moves `p` along `X = -∇f/|∇f|²` so that `f` drops by exactly `delta_c`
    /// (negative `delta_c` raises the level). `critical_values` must not meet the swept range.
    pub fn level_flow(&self, p: Param<T>, delta_c: T, critical_values: &[T]) -> Result<Param<T>> {
        if delta_c == T::zero() {
            return Ok(p);
        }
        let f0 = self.field.value(p);
        let target = f0 - delta_c;
        let (lo, hi) = (f0.min(target), f0.max(target));
        if critical_values.iter().any(|&c| c >= lo && c <= hi) {
            return Err(Error::CriticalLevelInRange { lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let dir = if delta_c > T::zero() { Direction::Forward } else { Direction::Backward };
        let mut st = self.stepper(p, dir);
        let total = delta_c.abs();
        let mut elapsed = T::zero();
        while total - elapsed > T::epsilon() * total {
            elapsed = elapsed + self.step(&mut st, total - elapsed, Vector::Level)?;
        }
        // Newton polish on the level
        for _ in 0..20 {
            let miss = self.state_value(&st.state) - target;
            if miss.abs() <= self.params.tol_level {
                break;
            }
            st.state = self.rk4(&st.state, miss.abs(), if miss > T::zero() { T::one() } else { -T::one() }, Vector::Level);
        }
        Ok(self.to_param(&st.state))
    }
}

/// Target of an arrival-time query.
pub enum Target<'a, T> {
    Level(T),
    Locus(Locus<'a, T>),
}

/// A locus carried by the hypersurface `φ_lead⁻¹{f = level}`, such as an exit locus.
pub struct Locus<'a, T> {
    pub lead_time: T,
    pub level: T,
    pub member: &'a (dyn Fn(Param<T>) -> bool + Sync),
}

#[derive(Debug, Clone, Copy)]
struct Stepper<T> {
    state: State<T>,
    time: T,
    h: T,
    sign: T,
}
