use exitmap::flow::conjugate::probe_grid;
use exitmap::flow::linear::builtin;
use exitmap::flow::{
    conjugate_flow, moebius_conjugate, Homeomorphism2D, IntegratedFlow, IntegratorSettings, MoebiusMap, VectorField,
};
use exitmap::{FlowModel, Point, Tolerances};
use num_complex::Complex64;
use proptest::prelude::*;

fn kinds() -> Vec<FlowModel> {
    let cfg = Tolerances::default();
    let pendulum = VectorField::new("x' = y, y' = -x", |p| Point::new(p.y, -p.x));
    vec![
        builtin::saddle(),
        builtin::source(),
        builtin::sink(),
        builtin::rotation(),
        builtin::translation(),
        builtin::gravity(1.0),
        builtin::fold(),
        builtin::affine_focus(1.0, 1.0, 0.5),
        FlowModel::new(IntegratedFlow::new(pendulum, IntegratorSettings::from(&cfg))),
        moebius_conjugate(&builtin::rotation(), &MoebiusMap::disc_to_halfplane()),
    ]
}

fn point() -> impl Strategy<Value = Point> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(x, y)| Point::new(x, y))
}

fn close(a: Point, b: Point, tol: f64) -> bool {
    a.dist(b) <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn identity_and_group_law(p in point(), s in -0.8f64..0.8, t in -0.8f64..0.8) {
        for f in kinds() {
            // the Möbius conjugate has a pole; points whose orbit meets it are skipped
            let Ok(p0) = f.evaluate(0.0, p) else { continue };
            prop_assert!(close(p0, p, 1e-12), "{}: Φ(0, p) = {p0}", f.label());
            let (Ok(a), Ok(ps)) = (f.evaluate(s + t, p), f.evaluate(s, p)) else { continue };
            let Ok(b) = f.evaluate(t, ps) else { continue };
            prop_assert!(close(a, b, 1e-8), "{}: {a} vs {b}", f.label());
        }
    }

    #[test]
    fn conjugation_identity(k in -1.0f64..1.0, p in point(), t in -0.7f64..0.7) {
        let h = Homeomorphism2D::horizontal_shear(k);
        let probes = probe_grid(2.0, 6);
        for (inner, tol) in [(builtin::saddle(), 1e-6), (kinds()[8].clone(), 1e-5)] {
            let conj = conjugate_flow(&inner, &h, &probes, 1e-9).unwrap();
            let lhs = conj.evaluate(t, h.apply(p)).unwrap();
            let rhs = h.apply(inner.evaluate(t, p).unwrap());
            prop_assert!(lhs.dist(rhs) < tol, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn moebius_round_trip(re in 0.5f64..2.0, im in -1.0f64..1.0, p in point(), t in -0.5f64..0.5) {
        let m = MoebiusMap::new(
            Complex64::new(re, im),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.1, 0.2),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let base = builtin::saddle();
        let back = moebius_conjugate(&moebius_conjugate(&base, &m), &m.inverse());
        if let (Ok(a), Ok(b)) = (back.evaluate(t, p), base.evaluate(t, p)) {
            prop_assert!(close(a, b, 1e-8), "{a} vs {b}");
        }
    }
}
