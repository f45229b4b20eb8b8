use exitmap::first_maps::{classify_boundary_point, first_in, first_out, BoundaryLabel, MapValue};
use exitmap::flow::conjugate::probe_grid;
use exitmap::flow::linear::builtin;
use exitmap::flow::{conjugate_flow, Homeomorphism2D, MoebiusMap};
use exitmap::geometry::{make_band, make_disc, make_halfplane, moebius_image, unit_disc, HalfPlane, Region};
use exitmap::{Point, Tolerances};
use num_complex::Complex64;
use proptest::prelude::*;

fn regions() -> Vec<Region> {
    let m = MoebiusMap::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.2, 0.0),
        Complex64::new(1.0, 0.0),
    )
    .unwrap();
    vec![
        unit_disc(),
        make_disc(Point::new(0.5, -0.25), 0.75).unwrap(),
        make_halfplane(HalfPlane::Lower),
        make_halfplane(HalfPlane::Upper),
        make_band(0.2, 0.5).unwrap(),
        unit_disc().image(&Homeomorphism2D::horizontal_shear(0.5)),
        moebius_image(&unit_disc(), &m).unwrap(),
    ]
}

fn point() -> impl Strategy<Value = Point> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| Point::new(x, y))
}

fn unit_circle() -> impl Strategy<Value = (f64, Point)> {
    (0.0f64..1.0).prop_map(|s| (s, Point::polar(1.0, std::f64::consts::TAU * s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_swaps_sides(p in point()) {
        for a in regions() {
            let c = a.complement();
            prop_assert_eq!(c.locate(p, 1e-9), a.locate(p, 1e-9).flipped());
        }
    }

    #[test]
    fn indicator_agrees_with_membership(p in point()) {
        for a in regions() {
            if let Some(g) = a.indicator(p) {
                if g.abs() > 1e-9 {
                    prop_assert_eq!(g < 0.0, a.contains(p), "{} at {}", a.label(), p);
                }
            }
        }
    }
}

#[test]
fn jordan_parametrizations_are_injective() {
    for a in regions() {
        let Some(b) = a.boundary() else { continue };
        if b.domain() != exitmap::geometry::ParamDomain::Circle {
            continue;
        }
        let pts: Vec<Point> = (0..512).map(|k| b.point(k as f64 / 512.0)).collect();
        let perimeter: f64 = (0..512).map(|k| pts[k].dist(pts[(k + 1) % 512])).sum();
        let mut min = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                min = min.min(pts[i].dist(pts[j]));
            }
        }
        assert!(min > 0.05 * perimeter / 512.0, "{}: {min}", a.label());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exits_land_on_the_boundary(r in 0.05f64..0.95, th in 0.0f64..std::f64::consts::TAU) {
        let cfg = Tolerances::default();
        let a = unit_disc();
        for f in [builtin::saddle(), builtin::source(), builtin::fold(), builtin::affine_focus(1.0, 1.0, 0.5)] {
            let out = first_out(&f, &a, Point::polar(r, th), 50.0, &cfg);
            if let MapValue::Defined { point, .. } = out.value {
                prop_assert!(a.indicator(point).unwrap().abs() <= 1e-8, "{}: {point}", f.label());
            }
        }
    }

    #[test]
    fn first_out_is_first_in_of_the_complement((_s, x) in unit_circle()) {
        let cfg = Tolerances::default();
        let a = make_disc(Point::new(0.3, 0.1), 1.0).unwrap();
        let x = x + Point::new(0.3, 0.1);
        for f in [builtin::saddle(), builtin::rotation(), builtin::fold()] {
            let e = first_out(&f, &a, x, 20.0, &cfg);
            let r = first_in(&f, &a.complement(), x, 20.0, &cfg);
            prop_assert_eq!(e.value.status(), r.value.status());
            if let (Some(p), Some(q)) = (e.point(), r.point()) {
                prop_assert!(p.dist(q) < 1e-9 && (e.time().unwrap() - r.time().unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn every_label_has_a_fixed_map((_s, x) in unit_circle()) {
        let cfg = Tolerances::default();
        let a = unit_disc();
        for f in [builtin::saddle(), builtin::sink(), builtin::source(), builtin::rotation(), builtin::fold(), builtin::translation()] {
            let t = classify_boundary_point(&f, &a, x, 20.0, &cfg);
            let fixed = t.exit.is_fixed(&cfg) || t.ret.is_fixed(&cfg);
            prop_assert!(fixed || t.label == BoundaryLabel::Unresolved, "{}: {:?}", f.label(), t.label);
        }
    }

    #[test]
    fn labels_survive_conjugation((_s, x) in unit_circle(), k in -0.8f64..0.8) {
        let cfg = Tolerances::default();
        let h = Homeomorphism2D::horizontal_shear(k);
        let a = unit_disc();
        let ha = a.image(&h);
        for f in [builtin::saddle(), builtin::fold(), builtin::affine_focus(1.0, 1.0, -0.5)] {
            let g = conjugate_flow(&f, &h, &probe_grid(2.0, 6), 1e-9).unwrap();
            let before = classify_boundary_point(&f, &a, x, 30.0, &cfg).label;
            let after = classify_boundary_point(&g, &ha, h.apply(x), 30.0, &cfg).label;
            prop_assert_eq!(before, after, "{} at {}", f.label(), x);
        }
    }

    #[test]
    fn rotation_times_stay_below_the_period(cx in -0.9f64..0.9, cy in -0.9f64..0.9, th in 0.0f64..std::f64::consts::TAU) {
        let cfg = Tolerances::default();
        let a = make_disc(Point::new(cx, cy), 0.5).unwrap();
        let x = Point::new(cx, cy) + Point::polar(0.5, th);
        let t = classify_boundary_point(&builtin::rotation(), &a, x, 10.0, &cfg);
        for time in [t.exit.time(), t.ret.time()].into_iter().flatten() {
            prop_assert!(time <= 2.0 + 1e-9, "{time}");
        }
    }
}
