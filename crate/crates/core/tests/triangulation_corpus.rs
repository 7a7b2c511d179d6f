mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use common::positive_words;
use ptbundle::sl2z::TwistWord;
use ptbundle::triangulation::{
    build_layered_triangulation, gluing_equations, lobachevsky, lobachevsky_derivative,
    slope_orbit_classes, slot_shapes, solve_geometric, v3, volume,
};

#[test]
fn combinatorics_up_to_eight() {
    for w in positive_words(8) {
        let t = build_layered_triangulation(&w).unwrap();
        let n = w.len() as usize;
        assert_eq!(t.n(), n);
        assert_eq!(t.edge_classes().len(), n, "{w}");
        let total: usize = t.edge_classes().iter().map(|c| c.incidences.len()).sum();
        assert_eq!(total, 6 * n);
        for j in 0..n {
            for slot in 0..3 {
                let uses = t
                    .edge_classes()
                    .iter()
                    .flat_map(|c| &c.incidences)
                    .filter(|s| s.tetrahedron == j && s.slot == slot)
                    .count();
                assert_eq!(uses, 2);
            }
        }
        let mut classes: Vec<_> = t.edge_classes().iter().map(|c| c.incidences.clone()).collect();
        classes.sort();
        assert_eq!(classes, slope_orbit_classes(&t), "{w}");
        for tet in t.tetrahedra() {
            for f in &tet.faces {
                assert!(f.is_odd(), "{w}");
            }
        }
        // Least members come out in increasing order.
        let firsts: Vec<_> = t.edge_classes().iter().map(|c| c.incidences[0]).collect();
        assert!(firsts.windows(2).all(|p| p[0] <= p[1]));
    }
}

#[test]
fn geometric_structures_up_to_eight() {
    for w in positive_words(8) {
        for sign in [1, -1] {
            let w = w.with_sign(sign).unwrap();
            let t = build_layered_triangulation(&w).unwrap();
            let (a, sol) = solve_geometric(&t, 1e-12).unwrap();
            assert!(sol.residual < 1e-12, "{w}: residual {}", sol.residual);
            assert!(sol.shapes.iter().all(|z| z.im > 0.0));
            for (angles, z) in a.angles.iter().zip(&sol.shapes) {
                assert!((angles.iter().sum::<f64>() - PI).abs() < 1e-12);
                for (shape, theta) in slot_shapes(*z).iter().zip(angles) {
                    assert!((shape.arg() - theta).abs() < 1e-9);
                }
            }
            let eq = gluing_equations(&t);
            let x = a.flat();
            for (row, b) in eq.coefficients.iter().zip(&eq.rhs) {
                let lhs: f64 = row.iter().zip(&x).map(|(&c, v)| c as f64 * v).sum();
                assert!((lhs - b).abs() < 1e-10);
            }
            let v = volume(&a);
            assert!(v.bound_satisfied, "{w}");
            assert_eq!(v.n, w.len() as usize);
        }
    }
}

#[test]
fn cat_map_powers_reach_the_bound() {
    for reps in 1..=4 {
        let w = TwistWord::positive(vec![(1, 1); reps]).unwrap();
        let t = build_layered_triangulation(&w).unwrap();
        let v = volume(&solve_geometric(&t, 1e-12).unwrap().0);
        assert!(v.equality_gap.abs() < 1e-9, "{reps}: gap {}", v.equality_gap);
    }
    let t = build_layered_triangulation(&TwistWord::positive(vec![(2, 1)]).unwrap()).unwrap();
    let v = volume(&solve_geometric(&t, 1e-12).unwrap().0);
    assert!(v.volume <= 3.0 * v3() && v.equality_gap > 1e-6);
}

proptest! {
    #[test]
    fn tetrahedron_volume_is_capped(a in 0.01f64..3.1, frac in 0.01f64..0.99) {
        let b = (PI - a) * frac;
        let c = PI - a - b;
        prop_assume!(c > 0.0);
        prop_assert!(lobachevsky(a) + lobachevsky(b) + lobachevsky(c) <= v3() + 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference(theta in 0.05f64..3.09) {
        let h = 1e-6;
        let fd = (lobachevsky(theta + h) - lobachevsky(theta - h)) / (2.0 * h);
        prop_assert!((fd - lobachevsky_derivative(theta)).abs() < 1e-6);
    }
}

#[test]
fn sign_does_not_change_the_volume() {
    for w in positive_words(8) {
        let vol = |w: &TwistWord| {
            let t = build_layered_triangulation(w).unwrap();
            volume(&solve_geometric(&t, 1e-12).unwrap().0).volume
        };
        let (p, m) = (vol(&w), vol(&w.with_sign(-1).unwrap()));
        assert!((p - m).abs() < 1e-9, "{w}: {p} vs {m}");
    }
}
