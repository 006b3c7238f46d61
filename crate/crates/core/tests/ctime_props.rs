mod common;

use common::{c, complex, poly};
use holoflow::ctime::{integrate_path, probe_rectangle, PathOptions, SeparatrixSet, TimePath};
use holoflow::flow::{integrate, newton_field};
use holoflow::ode::Options;
use holoflow::systems::z2p1;
use holoflow::Complex64;
use proptest::prelude::*;

fn opts() -> PathOptions {
    PathOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// z' = z² + 1 has z(t) = tan(t + atan z0); with |z0| ≤ 0.5 and |T| ≤ 0.3
    /// the nearest pole is more than 0.6 away from every path used.
    #[test]
    fn homotopic_paths_agree(z0 in complex(0.35), t in complex(0.2)) {
        let straight = integrate_path(&z2p1(), z0, &TimePath::straight(t), &opts()).unwrap();
        let bent = TimePath::new(vec![c(0.0, 0.0), c(t.re, 0.0), t]).unwrap();
        let other = integrate_path(&z2p1(), z0, &bent, &opts()).unwrap();
        let detour = TimePath::new(vec![c(0.0, 0.0), c(0.0, t.im), t]).unwrap();
        let third = integrate_path(&z2p1(), z0, &detour, &opts()).unwrap();
        let exact = (t + z0.atan()).tan();
        for z in [straight.end().1, other.end().1, third.end().1] {
            prop_assert!((z - exact).norm() < 1e-7);
        }
    }

    #[test]
    fn real_path_reproduces_flow(x in -1.0f64..1.0, y in 0.2f64..2.0, t in 0.1f64..3.0) {
        let z0 = c(x, y);
        let p = integrate_path(&z2p1(), z0, &TimePath::straight(c(t, 0.0)), &opts()).unwrap();
        let tr = integrate(&z2p1(), z0, (0.0, t), &Options { rtol: 1e-12, ..Options::default() }).unwrap();
        prop_assert!((p.end().1 - tr.last().1).norm() < 1e-9 * (1.0 + tr.last().1.norm()));
    }

    #[test]
    fn newton_imaginary_time_keeps_modulus(f in poly(2, 5), z0 in complex(2.0), s in 0.1f64..1.5) {
        let nf = newton_field(&f, false).unwrap();
        let f0 = f.eval(z0);
        prop_assume!(f0.norm() > 1e-2 && f.derivative().eval(z0).norm() > 0.1);
        let r = integrate_path(&nf, z0, &TimePath::straight(c(0.0, s)), &opts());
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        prop_assume!(r.branch_warnings.is_empty());
        prop_assume!(r.samples.iter().all(|&(_, z)| f.derivative().eval(z).norm() > 1e-2));
        for &(t, z) in &r.samples {
            let w = f.eval(z);
            prop_assert!((w.norm() / f0.norm() - 1.0).abs() < 1e-7, "t={t}");
            // Imaginary time rotates the phase at unit rate.
            let expect = f0 * (-t).exp();
            prop_assert!((w - expect).norm() < 1e-7 * f0.norm());
        }
    }

    #[test]
    fn newton_real_time_keeps_phase(f in poly(2, 5), z0 in complex(2.0), s in 0.1f64..2.0) {
        let nf = newton_field(&f, false).unwrap();
        let f0 = f.eval(z0);
        prop_assume!(f0.norm() > 1e-2 && f.derivative().eval(z0).norm() > 0.1);
        let r = integrate_path(&nf, z0, &TimePath::straight(c(s, 0.0)), &opts());
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        prop_assume!(r.samples.iter().all(|&(_, z)| f.derivative().eval(z).norm() > 1e-2));
        for &(_, z) in &r.samples {
            prop_assert!((f.eval(z) / f0).arg().abs() < 1e-7);
        }
    }

    #[test]
    fn constant_field_rectangles_close(k in complex(3.0), z0 in complex(5.0), t1 in 0.01f64..5.0, t2 in 0.01f64..5.0) {
        prop_assume!(k.norm() > 1e-3);
        let field = move |_: Complex64| k;
        let r = probe_rectangle(&field, z0, t1, t2, &SeparatrixSet::default(), &opts()).unwrap();
        prop_assert!(r.closure_gap < 1e-12 * (1.0 + z0.norm() + k.norm() * (t1 + t2)));
    }
}

#[test]
fn closed_paths_and_lengths() {
    let r = TimePath::rectangle(1.0, 2.0);
    assert!(r.is_closed());
    assert!((r.length() - 6.0).abs() < 1e-12);
    let circ = TimePath::circle_through_origin(c(0.0, 1.0), 64);
    assert!(circ.is_closed());
    assert!((circ.length() - 2.0 * std::f64::consts::PI).abs() < 0.01);
    assert!(TimePath::new(vec![]).is_err());
}
