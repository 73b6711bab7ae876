use serde::Serialize;

use super::surface::{Param, Surface, SurfaceKind};
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// `z`-coordinate of the embedding.
    Height,
    /// `cos θ` on the circle.
    CosTheta,
    /// `sin³ θ` on the circle; degenerate critical points at `0` and `π`.
    CubicCircle,
    /// `cos 2θ` on the circle; two maxima on the same level.
    DoubleWell,
}

impl FieldKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "height" => Ok(Self::Height),
            "cos-theta" => Ok(Self::CosTheta),
            "cubic-circle" => Ok(Self::CubicCircle),
            "double-well" => Ok(Self::DoubleWell),
            other => Err(Error::BadDescriptor(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Height => "height",
            Self::CosTheta => "cos-theta",
            Self::CubicCircle => "cubic-circle",
            Self::DoubleWell => "double-well",
        }
    }
}

/// A smooth function with exact chart derivatives on a built-in surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarField<T> {
    pub surface: Surface<T>,
    pub kind: FieldKind,
    /// Evaluates `-f` instead of `f`.
    pub negated: bool,
}

/// Looks up a built-in field and checks it is defined on `surface`.
pub fn builtin_field<T: Real>(kind: FieldKind, surface: Surface<T>) -> Result<ScalarField<T>> {
    let ok = match kind {
        FieldKind::Height => matches!(
            surface.kind,
            SurfaceKind::Sphere { .. } | SurfaceKind::Torus { .. }
        ),
        FieldKind::CosTheta | FieldKind::CubicCircle | FieldKind::DoubleWell => {
            matches!(surface.kind, SurfaceKind::Circle)
        }
    };
    if !ok {
        return Err(Error::UnsupportedCombination(format!(
            "{} on {}",
            kind.name(),
            surface.descriptor()
        )));
    }
    Ok(ScalarField { surface, kind, negated: false })
}

impl<T: Real> ScalarField<T> {
    pub fn dim(&self) -> usize {
        self.surface.dim()
    }

    /// The same field with the sign flipped.
    pub fn negated(&self) -> Self {
        Self { negated: !self.negated, ..*self }
    }

    fn sign(&self) -> T {
        if self.negated {
            -T::one()
        } else {
            T::one()
        }
    }

    pub fn value(&self, p: Param<T>) -> T {
        let [u, v] = p;
        self.sign() * match (self.kind, self.surface.kind) {
            (FieldKind::Height, SurfaceKind::Torus { major, minor }) => {
                (major + minor * v.cos()) * u.sin()
            }
            (FieldKind::Height, SurfaceKind::Sphere { radius }) => radius * v.cos() * u.sin(),
            (FieldKind::CosTheta, _) => u.cos(),
            (FieldKind::CubicCircle, _) => {
                let s = u.sin();
                s * s * s
            }
            (FieldKind::DoubleWell, _) => (u + u).cos(),
            _ => T::nan(),
        }
    }

    /// Partial derivatives in the chart.
    pub fn chart_gradient(&self, p: Param<T>) -> [T; 2] {
        let [u, v] = p;
        let z = T::zero();
        let d = match (self.kind, self.surface.kind) {
            (FieldKind::Height, SurfaceKind::Torus { major, minor }) => [
                (major + minor * v.cos()) * u.cos(),
                -minor * v.sin() * u.sin(),
            ],
            (FieldKind::Height, SurfaceKind::Sphere { radius }) => {
                [radius * v.cos() * u.cos(), -radius * v.sin() * u.sin()]
            }
            (FieldKind::CosTheta, _) => [-u.sin(), z],
            (FieldKind::CubicCircle, _) => {
                let s = u.sin();
                [T::lit(3.0) * s * s * u.cos(), z]
            }
            (FieldKind::DoubleWell, _) => [-T::lit(2.0) * (u + u).sin(), z],
            _ => [T::nan(), T::nan()],
        };
        [d[0] * self.sign(), d[1] * self.sign()]
    }

    /// Second partial derivatives in the chart.
    pub fn chart_hessian(&self, p: Param<T>) -> [[T; 2]; 2] {
        let [u, v] = p;
        let z = T::zero();
        let s = self.sign();
        let h = match (self.kind, self.surface.kind) {
            (FieldKind::Height, SurfaceKind::Torus { major, minor }) => {
                let uv = -minor * v.sin() * u.cos();
                [
                    [-(major + minor * v.cos()) * u.sin(), uv],
                    [uv, -minor * v.cos() * u.sin()],
                ]
            }
            (FieldKind::Height, SurfaceKind::Sphere { radius }) => {
                let uv = -radius * v.sin() * u.cos();
                let d = -radius * v.cos() * u.sin();
                [[d, uv], [uv, d]]
            }
            (FieldKind::CosTheta, _) => [[-u.cos(), z], [z, z]],
            (FieldKind::CubicCircle, _) => {
                let (sn, c) = (u.sin(), u.cos());
                [[T::lit(6.0) * sn * c * c - T::lit(3.0) * sn * sn * sn, z], [z, z]]
            }
            (FieldKind::DoubleWell, _) => [[-T::lit(4.0) * (u + u).cos(), z], [z, z]],
            _ => [[T::nan(); 2]; 2],
        };
        [[h[0][0] * s, h[0][1] * s], [h[1][0] * s, h[1][1] * s]]
    }

    /// Riemannian gradient `g⁻¹ ∂f` in chart components.
    pub fn gradient(&self, p: Param<T>) -> [T; 2] {
        let d = self.chart_gradient(p);
        if self.dim() == 1 {
            return [d[0], T::zero()];
        }
        let g = self.surface.metric(p);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        [
            (g[1][1] * d[0] - g[0][1] * d[1]) / det,
            (g[0][0] * d[1] - g[1][0] * d[0]) / det,
        ]
    }

    /// `|∇f|` measured in the Riemannian metric.
    pub fn gradient_norm(&self, p: Param<T>) -> T {
        let d = self.chart_gradient(p);
        let grad = self.gradient(p);
        let s = d[0] * grad[0] + if self.dim() == 2 { d[1] * grad[1] } else { T::zero() };
        s.max(T::zero()).sqrt()
    }

    /// Eigenvalues of the Riemannian Hessian `g⁻¹ ∂²f`, ascending. Meaningful at critical points.
    pub fn hessian_eigenvalues(&self, p: Param<T>) -> Vec<T> {
        let h = self.chart_hessian(p);
        if self.dim() == 1 {
            return vec![h[0][0]];
        }
        let g = self.surface.metric(p);
        // det(H - λ g) = 0
        let a = g[0][0] * g[1][1] - g[0][1] * g[0][1];
        let b = -(h[0][0] * g[1][1] + h[1][1] * g[0][0] - T::lit(2.0) * h[0][1] * g[0][1]);
        let c = h[0][0] * h[1][1] - h[0][1] * h[0][1];
        let disc = (b * b - T::lit(4.0) * a * c).max(T::zero()).sqrt();
        let two_a = a + a;
        let (l1, l2) = ((-b - disc) / two_a, (-b + disc) / two_a);
        vec![l1.min(l2), l1.max(l2)]
    }

    /// Value of the height function at an embedded point of the sphere.
    pub(crate) fn value_at_point(&self, x: &[T; 3]) -> T {
        match self.kind {
            FieldKind::Height => self.sign() * x[2],
            _ => T::nan(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_difference(f: &ScalarField<f64>, p: [f64; 2], h: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for k in 0..f.dim() {
            let (mut a, mut b) = (p, p);
            a[k] += h;
            b[k] -= h;
            out[k] = (f.value(a) - f.value(b)) / (2.0 * h);
        }
        out
    }

    #[test]
    fn unsupported_combinations_rejected() {
        let rp2 = Surface::<f64>::rp2();
        assert!(matches!(
            builtin_field(FieldKind::Height, rp2),
            Err(Error::UnsupportedCombination(_))
        ));
        let torus = Surface::<f64>::torus(2.0, 1.0).unwrap();
        assert!(builtin_field(FieldKind::CosTheta, torus).is_err());
        assert!(builtin_field(FieldKind::Height, Surface::<f64>::circle()).is_err());
    }

    #[test]
    fn negation_flips_everything() {
        let f = builtin_field(FieldKind::Height, Surface::<f64>::torus(2.0, 1.0).unwrap()).unwrap();
        let g = f.negated();
        let p = [0.4, 1.3];
        assert_eq!(g.value(p), -f.value(p));
        assert_eq!(g.gradient(p), [-f.gradient(p)[0], -f.gradient(p)[1]]);
        assert_eq!(g.chart_hessian(p)[0][1], -f.chart_hessian(p)[0][1]);
        assert_eq!(g.negated(), f);
    }

    #[test]
    fn cos_theta_values() {
        let f = builtin_field(FieldKind::CosTheta, Surface::<f64>::circle()).unwrap();
        assert_eq!(f.value([0.0, 0.0]), 1.0);
        assert!((f.value([std::f64::consts::PI, 0.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn torus_height_maximum() {
        let f = builtin_field(FieldKind::Height, Surface::<f64>::torus(2.0, 1.0).unwrap()).unwrap();
        let top = [std::f64::consts::FRAC_PI_2, 0.0];
        assert!((f.value(top) - 3.0).abs() < 1e-15);
        assert!(f.gradient_norm(top) < 1e-15);
        let eig = f.hessian_eigenvalues(top);
        assert!(eig.iter().all(|&l| l < 0.0));
    }

    #[test]
    fn derivatives_match_central_differences() {
        let fields = [
            builtin_field(FieldKind::Height, Surface::<f64>::torus(2.0, 1.0).unwrap()).unwrap(),
            builtin_field(FieldKind::Height, Surface::<f64>::sphere(1.0).unwrap()).unwrap(),
            builtin_field(FieldKind::CosTheta, Surface::<f64>::circle()).unwrap(),
            builtin_field(FieldKind::CubicCircle, Surface::<f64>::circle()).unwrap(),
            builtin_field(FieldKind::DoubleWell, Surface::<f64>::circle()).unwrap(),
        ];
        for f in &fields {
            for i in 0..40 {
                let p = [0.11 + 0.157 * i as f64, -1.0 + 0.05 * i as f64];
                let d = f.chart_gradient(p);
                let errs: Vec<f64> = [1e-2, 5e-3]
                    .iter()
                    .map(|&h| {
                        let fd = central_difference(f, p, h);
                        (0..f.dim()).map(|k| (fd[k] - d[k]).abs()).fold(0.0, f64::max)
                    })
                    .collect();
                // second order: halving h divides the error by about four
                assert!(errs[0] < 1e-3, "{errs:?}");
                assert!(errs[1] <= errs[0] / 3.0 + 1e-12, "{errs:?}");
                // Hessian against differences of the analytic gradient
                let hess = f.chart_hessian(p);
                for k in 0..f.dim() {
                    let (mut a, mut b) = (p, p);
                    a[k] += 1e-5;
                    b[k] -= 1e-5;
                    let (ga, gb) = (f.chart_gradient(a), f.chart_gradient(b));
                    for l in 0..f.dim() {
                        let fd = (ga[l] - gb[l]) / 2e-5;
                        assert!((fd - hess[l][k]).abs() < 1e-6);
                    }
                }
            }
        }
    }
}
