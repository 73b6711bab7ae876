//! The generic core at single precision.

use conley_kit::conley::{build_conley_pair, verify_conley_pair};
use conley_kit::geometry::{build_mesh, builtin_field, find_critical_points, FieldKind};
use conley_kit::homology::ChainComplexGF2;
use conley_kit::{Flow32, FlowParams32, Surface32};

#[test]
fn torus_critical_points_and_pairs() {
    let surface = Surface32::torus(2.0, 1.0).unwrap();
    let field = builtin_field(FieldKind::Height, surface).unwrap();
    let mesh = build_mesh(&field.surface, Some(&field), 256).unwrap();
    let crits = find_critical_points(&field, &mesh, 1e-5, 1e-3).points;
    let values: Vec<f32> = crits.iter().map(|x| x.value).collect();
    assert_eq!(crits.len(), 4);
    for (v, want) in values.iter().zip([-3.0f32, -1.0, 1.0, 3.0]) {
        assert!((v - want).abs() < 1e-4, "{values:?}");
    }

    let flow = Flow32::new(&field, FlowParams32::default());
    let pair = build_conley_pair(&flow, &mesh, &crits[1], 0.2, 2.0).unwrap();
    let report = verify_conley_pair(&flow, &mesh, &pair, &crits, 100, 7).unwrap();
    assert!(report.passed(), "{report:?}");

    assert_eq!(ChainComplexGF2::from_mesh(&mesh).betti(), [1, 2, 1]);
}
