use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{wrap_angle, Real};

/// Chart parameters `(u, v)`. One-dimensional surfaces use `u` only and keep `v = 0`.
pub type Param<T> = [T; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceKind<T> {
    /// Unit circle, parametrized by angle.
    Circle,
    Sphere { radius: T },
    /// Torus of revolution about the `y` axis.
    Torus { major: T, minor: T },
    /// Minimal six-vertex triangulation of the real projective plane.
    Rp2Triangulation,
}

/// A built-in closed manifold of dimension one or two.
///
/// Chart surfaces carry an analytic map from a periodic parameter box into
/// 3-space; the metric is the pull-back of the Euclidean one. The sphere chart
/// has its poles on the `x` axis so that the height function `z` has its
/// critical points at regular chart points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Surface<T> {
    pub kind: SurfaceKind<T>,
}

impl<T: Real> Surface<T> {
    pub fn circle() -> Self {
        Self { kind: SurfaceKind::Circle }
    }

    pub fn sphere(radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self { kind: SurfaceKind::Sphere { radius } })
    }

    pub fn torus(major: T, minor: T) -> Result<Self> {
        if !(minor > T::zero()) || !(major > minor) || !major.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "torus needs R > r > 0, got R = {major}, r = {minor}"
            )));
        }
        Ok(Self { kind: SurfaceKind::Torus { major, minor } })
    }

    pub fn rp2() -> Self {
        Self { kind: SurfaceKind::Rp2Triangulation }
    }

    /// Parses descriptors such as `circle`, `sphere:rho=1`, `torus:R=2,r=1`, `rp2`.
    pub fn parse(descriptor: &str) -> Result<Self> {
        let descriptor = descriptor.trim();
        let (name, args) = match descriptor.split_once(':') {
            Some((n, a)) => (n.trim(), a.trim()),
            None => (descriptor, ""),
        };
        let mut values: Vec<(String, f64)> = Vec::new();
        for item in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::BadDescriptor(descriptor.to_string()))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::BadDescriptor(descriptor.to_string()))?;
            values.push((k.trim().to_string(), v));
        }
        let get = |keys: &[&str], default: f64| -> f64 {
            values
                .iter()
                .find(|(k, _)| keys.contains(&k.as_str()))
                .map(|(_, v)| *v)
                .unwrap_or(default)
        };
        let known = |allowed: &[&str]| -> Result<()> {
            match values.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
                Some(_) => Err(Error::BadDescriptor(descriptor.to_string())),
                None => Ok(()),
            }
        };
        match name {
            "circle" => {
                known(&[])?;
                Ok(Self::circle())
            }
            "sphere" => {
                known(&["rho", "radius"])?;
                Self::sphere(T::lit(get(&["rho", "radius"], 1.0)))
            }
            "torus" => {
                known(&["R", "r"])?;
                Self::torus(T::lit(get(&["R"], 2.0)), T::lit(get(&["r"], 1.0)))
            }
            "rp2" | "rp2-triangulation" => {
                known(&[])?;
                Ok(Self::rp2())
            }
            _ => Err(Error::BadDescriptor(descriptor.to_string())),
        }
    }

    pub fn descriptor(&self) -> String {
        match self.kind {
            SurfaceKind::Circle => "circle".into(),
            SurfaceKind::Sphere { radius } => format!("sphere:rho={radius}"),
            SurfaceKind::Torus { major, minor } => format!("torus:R={major},r={minor}"),
            SurfaceKind::Rp2Triangulation => "rp2".into(),
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SurfaceKind::Circle => 1,
            _ => 2,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        match self.kind {
            SurfaceKind::Circle => 0,
            SurfaceKind::Sphere { .. } => 2,
            SurfaceKind::Torus { .. } => 0,
            SurfaceKind::Rp2Triangulation => 1,
        }
    }

    pub fn has_chart(&self) -> bool {
        !matches!(self.kind, SurfaceKind::Rp2Triangulation)
    }

    /// Period of each chart coordinate, `None` for a non-periodic coordinate.
    pub fn periods(&self) -> [Option<T>; 2] {
        match self.kind {
            SurfaceKind::Circle => [Some(T::TAU()), None],
            SurfaceKind::Sphere { .. } => [Some(T::TAU()), None],
            SurfaceKind::Torus { .. } => [Some(T::TAU()), Some(T::TAU())],
            SurfaceKind::Rp2Triangulation => [None, None],
        }
    }

    /// Brings a parameter point back into the fundamental domain.
    pub fn wrap(&self, p: Param<T>) -> Param<T> {
        match self.kind {
            SurfaceKind::Circle => [wrap_angle(p[0]), T::zero()],
            SurfaceKind::Sphere { .. } => {
                // Going over a pole flips longitude by π.
                let mut u = p[0];
                let mut v = wrap_angle(p[1] + T::FRAC_PI_2()) - T::FRAC_PI_2();
                if v > T::FRAC_PI_2() {
                    v = T::PI() - v;
                    u = u + T::PI();
                }
                [wrap_angle(u), v]
            }
            SurfaceKind::Torus { .. } => [wrap_angle(p[0]), wrap_angle(p[1])],
            SurfaceKind::Rp2Triangulation => p,
        }
    }

    /// Embedding of a parameter point into 3-space.
    pub fn chart(&self, p: Param<T>) -> Option<[T; 3]> {
        let [u, v] = p;
        match self.kind {
            SurfaceKind::Circle => Some([u.cos(), u.sin(), T::zero()]),
            SurfaceKind::Sphere { radius } => Some([
                radius * v.sin(),
                radius * v.cos() * u.cos(),
                radius * v.cos() * u.sin(),
            ]),
            SurfaceKind::Torus { major, minor } => {
                let w = major + minor * v.cos();
                Some([w * u.cos(), minor * v.sin(), w * u.sin()])
            }
            SurfaceKind::Rp2Triangulation => None,
        }
    }

    /// Columns `∂/∂u`, `∂/∂v` of the chart Jacobian. The `v` column is zero in 1D.
    pub fn jacobian(&self, p: Param<T>) -> Option<[[T; 3]; 2]> {
        let [u, v] = p;
        let z = T::zero();
        match self.kind {
            SurfaceKind::Circle => Some([[-u.sin(), u.cos(), z], [z, z, z]]),
            SurfaceKind::Sphere { radius } => Some([
                [z, -radius * v.cos() * u.sin(), radius * v.cos() * u.cos()],
                [
                    radius * v.cos(),
                    -radius * v.sin() * u.cos(),
                    -radius * v.sin() * u.sin(),
                ],
            ]),
            SurfaceKind::Torus { major, minor } => {
                let w = major + minor * v.cos();
                Some([
                    [-w * u.sin(), z, w * u.cos()],
                    [
                        -minor * v.sin() * u.cos(),
                        minor * v.cos(),
                        -minor * v.sin() * u.sin(),
                    ],
                ])
            }
            SurfaceKind::Rp2Triangulation => None,
        }
    }

    /// First fundamental form at `p`. For 1D surfaces `g[1][1] = 1` is a placeholder.
    pub fn metric(&self, p: Param<T>) -> [[T; 2]; 2] {
        let [_, v] = p;
        let (o, z) = (T::one(), T::zero());
        match self.kind {
            SurfaceKind::Circle => [[o, z], [z, o]],
            SurfaceKind::Sphere { radius } => {
                let c = radius * v.cos();
                [[c * c, z], [z, radius * radius]]
            }
            SurfaceKind::Torus { major, minor } => {
                let w = major + minor * v.cos();
                [[w * w, z], [z, minor * minor]]
            }
            SurfaceKind::Rp2Triangulation => [[o, z], [z, o]],
        }
    }

    /// Inverse of the sphere chart; other surfaces return `None`.
    pub(crate) fn sphere_param_of(&self, x: &[T; 3]) -> Option<Param<T>> {
        match self.kind {
            SurfaceKind::Sphere { radius } => {
                let s = (x[0] / radius).max(-T::one()).min(T::one());
                Some([wrap_angle(x[2].atan2(x[1])), s.asin()])
            }
            _ => None,
        }
    }

    /// Distance in the chart, respecting periodic coordinates.
    pub fn chart_distance(&self, a: Param<T>, b: Param<T>) -> T {
        let mut s = T::zero();
        for k in 0..self.dim() {
            let mut d = (a[k] - b[k]).abs();
            if let Some(period) = self.periods()[k] {
                d = d % period;
                d = d.min(period - d);
            }
            s = s + d * d;
        }
        s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jtj(j: &[[f64; 3]; 2]) -> [[f64; 2]; 2] {
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        [[dot(&j[0], &j[0]), dot(&j[0], &j[1])], [dot(&j[1], &j[0]), dot(&j[1], &j[1])]]
    }

    #[test]
    fn torus_requires_major_above_minor() {
        assert!(matches!(
            Surface::<f64>::torus(1.0, 2.0),
            Err(Error::InvalidParameters(_))
        ));
        assert!(Surface::<f64>::torus(2.0, 1.0).is_ok());
        assert!(Surface::<f64>::sphere(-1.0).is_err());
    }

    #[test]
    fn descriptors_parse() {
        let t = Surface::<f64>::parse("torus:R=2,r=1").unwrap();
        assert_eq!(t.kind, SurfaceKind::Torus { major: 2.0, minor: 1.0 });
        assert_eq!(Surface::<f64>::parse("circle").unwrap().dim(), 1);
        assert!(Surface::<f64>::parse("torus:R=1,r=2").is_err());
        assert!(Surface::<f64>::parse("klein").is_err());
        assert!(Surface::<f64>::parse("torus:q=3").is_err());
        let s = Surface::<f64>::parse("sphere:rho=1.5").unwrap();
        assert_eq!(s.kind, SurfaceKind::Sphere { radius: 1.5 });
    }

    #[test]
    fn torus_chart_matches_closed_form() {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        let p = s.chart([0.3, 1.1]).unwrap();
        let w = 2.0 + 1.1f64.cos();
        assert!((p[0] - w * 0.3f64.cos()).abs() < 1e-15);
        assert!((p[1] - 1.1f64.sin()).abs() < 1e-15);
        assert!((p[2] - w * 0.3f64.sin()).abs() < 1e-15);
        let g = s.metric([0.3, 1.1]);
        assert!((g[0][0] - w * w).abs() < 1e-14);
        assert_eq!(g[0][1], 0.0);
        assert_eq!(g[1][1], 1.0);
    }

    #[test]
    fn metric_is_pullback_of_euclidean() {
        for s in [
            Surface::<f64>::torus(2.0, 1.0).unwrap(),
            Surface::<f64>::sphere(1.3).unwrap(),
            Surface::<f64>::circle(),
        ] {
            for i in 0..50 {
                let p = [0.37 * i as f64, -1.2 + 0.049 * i as f64];
                let j = s.jacobian(p).unwrap();
                let g = s.metric(p);
                let want = jtj(&j);
                let dims = s.dim();
                for a in 0..dims {
                    for b in 0..dims {
                        assert!((g[a][b] - want[a][b]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_chart_inverts() {
        let s = Surface::<f64>::sphere(2.0).unwrap();
        let p = [1.2, 0.4];
        let x = s.chart(p).unwrap();
        let q = s.sphere_param_of(&x).unwrap();
        assert!(s.chart_distance(p, q) < 1e-12);
    }

    #[test]
    fn wrap_over_pole() {
        let s = Surface::<f64>::sphere(1.0).unwrap();
        let p = [0.5, std::f64::consts::FRAC_PI_2 + 0.1];
        let q = s.wrap(p);
        let (a, b) = (s.chart(p).unwrap(), s.chart(q).unwrap());
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
        assert!(q[1] <= std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn periodic_distance() {
        let s = Surface::<f64>::torus(2.0, 1.0).unwrap();
        let d = s.chart_distance([0.05, 0.0], [std::f64::consts::TAU - 0.05, 0.0]);
        assert!((d - 0.1).abs() < 1e-12);
    }
}
