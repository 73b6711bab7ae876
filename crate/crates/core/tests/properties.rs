//! Property checks across modules on the built-in surfaces.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use conley_kit::conley::build_conley_pair;
use conley_kit::geometry::{build_mesh, builtin_field, find_critical_points, FieldKind};
use conley_kit::minimax::{kappa, Filtration};
use conley_kit::thicken::{ambient_thickenings, forward_thickenings};
use conley_kit::{CriticalPoint, Flow, FlowParams, Mesh, ScalarField, Surface};
use proptest::prelude::*;

struct Fixture {
    field: ScalarField,
    mesh: Mesh,
    crits: Vec<CriticalPoint>,
}

fn fixture(kind: FieldKind, surface: Surface, n: usize) -> Fixture {
    let field = builtin_field(kind, surface).unwrap();
    let mesh = build_mesh(&field.surface, Some(&field), n).unwrap();
    let crits = find_critical_points(&field, &mesh, 1e-10, 1e-6).points;
    Fixture { field, mesh, crits }
}

fn torus(n: usize) -> Fixture {
    fixture(FieldKind::Height, Surface::torus(2.0, 1.0).unwrap(), n)
}

fn torus64() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| torus(64))
}

fn circle() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture(FieldKind::CosTheta, Surface::circle(), 1024))
}

fn signature(crits: &[CriticalPoint]) -> Vec<Option<usize>> {
    crits.iter().map(|x| x.morse_index()).collect()
}

#[test]
fn poincare_hopf_and_resolution_stability() {
    let cases = [
        (FieldKind::Height, Surface::torus(2.0, 1.0).unwrap(), 32),
        (FieldKind::Height, Surface::sphere(1.0).unwrap(), 16),
        (FieldKind::CosTheta, Surface::circle(), 64),
    ];
    for (kind, surface, n) in cases {
        let coarse = fixture(kind, surface, n);
        let fine = fixture(kind, surface, 2 * n);
        assert_eq!(signature(&coarse.crits), signature(&fine.crits));
        let chi: i64 = coarse.crits.iter().map(|x| if x.morse_index().unwrap() % 2 == 0 { 1 } else { -1 }).sum();
        assert_eq!(chi, coarse.mesh.euler_characteristic());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_central_differences(u in 0.0..TAU, v in 0.0..TAU) {
        let f = &torus64().field;
        let h = 1e-4;
        let g = f.chart_gradient([u, v]);
        let du = (f.value([u + h, v]) - f.value([u - h, v])) / (2.0 * h);
        let dv = (f.value([u, v + h]) - f.value([u, v - h])) / (2.0 * h);
        // third derivatives of the height are bounded by 3
        prop_assert!((g[0] - du).abs() <= 3.0 * h * h);
        prop_assert!((g[1] - dv).abs() <= 3.0 * h * h);
    }

    #[test]
    fn metric_is_jacobian_gram(u in 0.0..TAU, v in 0.0..TAU) {
        let s = &torus64().field.surface;
        let j = s.jacobian([u, v]).unwrap();
        let g = s.metric([u, v]);
        for a in 0..2 {
            for b in 0..2 {
                let jj: f64 = (0..3).map(|k| j[a][k] * j[b][k]).sum();
                prop_assert!((g[a][b] - jj).abs() <= 1e-8);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_is_monotone_with_energy_identity(u in 0.0..TAU, v in 0.0..TAU, t in 0.5..4.0) {
        let f = &torus64().field;
        let flow = Flow::new(f, FlowParams::default());
        let traj = flow.integrate([u, v], t).unwrap();
        let mut integral = 0.0;
        for w in traj.samples.windows(2) {
            prop_assert!(w[1].value <= w[0].value + flow.params.tol_mono);
            if f.gradient_norm(w[0].param) > 10.0 * flow.params.delta_conv {
                prop_assert!(w[1].value < w[0].value);
            }
            // Simpson on each step, midpoint by integration
            let dt = w[1].t - w[0].t;
            let mid = flow.flow_to(w[0].param, dt / 2.0).unwrap();
            let g2 = |p| f.gradient_norm(p).powi(2);
            integral += (g2(w[0].param) + 4.0 * g2(mid) + g2(w[1].param)) * dt / 6.0;
        }
        let drop = traj.samples[0].value - traj.last().value;
        prop_assert!((drop - integral).abs() <= 1e-5, "drop {} integral {}", drop, integral);
    }

    #[test]
    fn flow_reverses(u in 0.0..TAU, v in 0.0..TAU, t in 0.1..1.0) {
        let f = &torus64().field;
        prop_assume!(f.gradient_norm([u, v]) > 0.2);
        let flow = Flow::new(f, FlowParams::default());
        let back = flow.flow_to(flow.flow_to([u, v], t).unwrap(), -t).unwrap();
        prop_assert!(f.surface.chart_distance([u, v], back) <= 1e-5);
    }

    #[test]
    fn blocks_partition_and_nest(i in 0usize..4, e1 in 0.05..0.4f64, e2 in 0.05..0.4f64) {
        let fx = torus64();
        let flow = Flow::new(&fx.field, FlowParams::default());
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let small = build_conley_pair(&flow, &fx.mesh, &fx.crits[i], lo, 2.0);
        let big = build_conley_pair(&flow, &fx.mesh, &fx.crits[i], hi, 2.0);
        let (Ok(small), Ok(big)) = (small, big) else {
            return Err(TestCaseError::reject("nonregular band"));
        };
        let big_mask = big.n_mask(&fx.mesh);
        prop_assert!(small.n.iter().all(|&v| big_mask[v]));

        let mut loci: Vec<usize> = [&big.n_plus, &big.n_zero, &big.n_minus].into_iter().flatten().copied().collect();
        let total = loci.len();
        loci.sort_unstable();
        loci.dedup();
        prop_assert_eq!(loci.len(), total);
        prop_assert_eq!(loci, big.boundary(&fx.mesh));

        for &v in &big.l {
            let (_, vals) = flow.values_at(fx.mesh.vertices[v].param, &[2.0 * big.tau]).unwrap();
            prop_assert!(vals[0] <= big.c - big.epsilon + flow.params.tol_level);
        }
    }

    #[test]
    fn minimum_block_is_sublevel_component(eps in 0.05..1.5f64) {
        let fx = circle();
        let flow = Flow::new(&fx.field, FlowParams::default());
        let x = &fx.crits[0];
        let pair = build_conley_pair(&flow, &fx.mesh, x, eps, 2.0).unwrap();
        prop_assert!(pair.l.is_empty());
        let below: Vec<bool> = fx.mesh.vertices.iter().map(|v| v.value <= x.value + eps).collect();
        let mut comp = fx.mesh.component_of(fx.mesh.nearest_vertex(x.param), &below);
        comp.sort_unstable();
        prop_assert_eq!(comp, pair.n);
    }
}

#[test]
fn thickenings_contain_blocks_and_are_forward_invariant() {
    let fx = circle();
    let flow = Flow::new(&fx.field, FlowParams::default());
    let pairs: Vec<_> = fx.crits.iter().map(|x| build_conley_pair(&flow, &fx.mesh, x, 0.2, 2.0).unwrap()).collect();
    let ths = forward_thickenings(&flow, &fx.mesh, &pairs, 100.0).unwrap();
    for (pair, th) in pairs.iter().zip(&ths) {
        let mask = th.mask(fx.mesh.len());
        assert!(pair.n.iter().all(|&v| mask[v]));
        for &v in th.vertices.iter().step_by(37) {
            for t in [0.5, 2.0, 5.0] {
                let q = flow.flow_to(fx.mesh.vertices[v].param, t).unwrap();
                assert!(fx.mesh.near_set(&mask, q), "vertex {v} leaves after {t}");
            }
        }
    }
}

#[test]
fn ambient_times_satisfy_recursion() {
    let fx = circle();
    let flow = Flow::new(&fx.field, FlowParams::default());
    let pairs: Vec<_> = fx.crits.iter().map(|x| build_conley_pair(&flow, &fx.mesh, x, 0.2, 2.0).unwrap()).collect();
    let (ths, _) = ambient_thickenings(&flow, &fx.mesh, &pairs).unwrap();
    for w in ths.windows(2) {
        let (t0, t1, cal) = (w[0].big_t.unwrap(), w[1].big_t.unwrap(), w[0].cal_t.unwrap());
        assert!(cal >= 1.0);
        assert!((t0 - t1 - cal).abs() <= 1e-12 * t0, "{t0} - {t1} != {cal}");
    }
}

#[test]
fn every_kappa_is_a_critical_value() {
    for fx in [torus(16), fixture(FieldKind::Height, Surface::sphere(1.0).unwrap(), 16)] {
        let filt = Filtration::global(&fx.mesh).unwrap();
        for k in 0..=2 {
            for cls in filt.essential_classes(k) {
                let r = kappa(&filt, &cls, &fx.crits).unwrap();
                assert_eq!(r.kappa, r.kappa_vanishing);
                assert!(fx.crits.iter().any(|x| (x.value - r.kappa).abs() <= filt.tol_match));
                assert_eq!(r.morse_index_match, Some(true));
                assert!(r.support_max >= r.kappa);
            }
        }
    }
}
