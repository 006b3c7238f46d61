mod common;

use common::{c, poly};
use holoflow::compactify::{
    ball_compactify, ball_field, ball_inverse, criteria, equator_field, equator_form, infinity_critical_points, khat,
    separatrix_seed, sphere_project, EquilibriumKind,
};
use holoflow::poly::ComplexPoly;
use holoflow::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn unit(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn criteria_agree(f in poly(2, 6), theta in 0.0..std::f64::consts::TAU) {
        let field = f.to_real_field();
        let mut points = vec![unit(theta)];
        if let Ok(eqs) = infinity_critical_points(&field) {
            points.extend(eqs.iter().map(|e| e.p));
        }
        for p in points {
            let b = criteria::determinant(&field, p, TOL);
            let cc = criteria::collinear(&field, p, TOL);
            let d = criteria::projection(&field, p, TOL);
            prop_assert!(b == cc && cc == d, "p={p:?}: {b} {cc} {d}");
        }
    }

    #[test]
    fn equilibria_are_antipodal_and_generic(f in poly(2, 6)) {
        let eqs = infinity_critical_points(&f.to_real_field()).unwrap();
        prop_assert!(!eqs.is_empty());
        for e in &eqs {
            prop_assert!(e.alpha.abs() > 1e-9);
            let found = eqs.iter().any(|o| (o.p[0] + e.p[0]).abs() < 1e-8 && (o.p[1] + e.p[1]).abs() < 1e-8);
            prop_assert!(found, "no antipode for {:?}", e.p);
        }
    }

    #[test]
    fn equator_form_degree(f in poly(1, 6), x in -2.0f64..2.0, y in -2.0f64..2.0, lam in 0.2f64..3.0) {
        let g = equator_form(&f.to_real_field());
        prop_assert_eq!(g.degree(), f.degree() + 1);
        let lhs = g.eval(lam * x, lam * y);
        let rhs = lam.powi(f.degree() as i32 + 1) * g.eval(x, y);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn ball_boundary_is_twice_equator(f in poly(1, 5), theta in 0.0..std::f64::consts::TAU) {
        let field = f.to_real_field();
        let p = unit(theta);
        let b = ball_field(&field, p);
        let (ex, ey) = equator_field(&field, p[0], p[1]).unwrap();
        prop_assert!((b[0] - 2.0 * ex).abs() < 1e-10 * (1.0 + ex.abs()));
        prop_assert!((b[1] - 2.0 * ey).abs() < 1e-10 * (1.0 + ey.abs()));
    }

    #[test]
    fn ball_roundtrip(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        let u = ball_compactify([x, y]);
        prop_assert!(u[0].hypot(u[1]) < 1.0);
        let back = ball_inverse(u).unwrap();
        prop_assert!((back[0] - x).abs() < 1e-9 * (1.0 + x.abs()) * 1e3);
        prop_assert!((back[1] - y).abs() < 1e-9 * (1.0 + y.abs()) * 1e3);
    }

    #[test]
    fn sphere_projection_is_unit(x in -1e4f64..1e4, y in -1e4f64..1e4) {
        let s = sphere_project(x, y);
        prop_assert!((s.x * s.x + s.y * s.y + s.z * s.z - 1.0).abs() < 1e-12);
        prop_assert!(s.z > 0.0);
        let (px, py) = s.to_plane().unwrap();
        prop_assert!((px - x).abs() < 1e-8 * (1.0 + x.abs()));
        prop_assert!((py - y).abs() < 1e-8 * (1.0 + y.abs()));
    }

    /// A real leading coefficient makes `(±1, 0)` critical points at infinity.
    #[test]
    fn real_leading_coefficient_fixes_real_axis(f in poly(1, 6), a in 0.5f64..2.0, s in prop::bool::ANY) {
        let mut cs = f.coeffs().to_vec();
        *cs.last_mut().unwrap() = c(if s { a } else { -a }, 0.0);
        let g = equator_form(&ComplexPoly::new(cs).to_real_field());
        prop_assert_eq!(g.eval(1.0, 0.0), 0.0);
        prop_assert_eq!(g.eval(-1.0, 0.0), 0.0);
    }
}

#[test]
fn equator_field_rejects_non_unit() {
    let field = holoflow::systems::z2p1().to_real_field();
    assert!(equator_field(&field, 0.5, 0.5).is_err());
}

#[test]
fn z2p1_infinity() {
    let field = holoflow::systems::z2p1().to_real_field();
    let eqs = infinity_critical_points(&field).unwrap();
    assert_eq!(eqs.len(), 2);
    for e in &eqs {
        assert_eq!(e.kind, EquilibriumKind::Saddle);
        assert!((e.alpha - e.p[0]).abs() < 1e-12);
        let seed = separatrix_seed(e, 1e-3).unwrap();
        assert!((seed.plane - Complex64::new(1e3 * e.p[0], 0.0)).norm() < 1e-6);
    }
    let k = khat(&field).unwrap();
    assert_eq!((k.i, k.j, k.khat), (2, 1, 1));
}

#[test]
fn cubic_has_four_directions() {
    let f = ComplexPoly::from_real(&[0.0, 0.0, 0.0, 1.0]);
    let eqs = infinity_critical_points(&f.to_real_field()).unwrap();
    assert_eq!(eqs.len(), 4);
    let f = ComplexPoly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.3, 1.0)]);
    assert_eq!(infinity_critical_points(&f.to_real_field()).unwrap().len(), 4);
}
