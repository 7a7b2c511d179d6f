mod common;

use common::positive_words;
use ptbundle::farey::{build_strip, minimal_paths};
use ptbundle::surfaces::{build_surface, guts_report, sidedness, Sidedness};

#[test]
fn euler_characteristic_and_sidedness_up_to_eight() {
    let mut count = 0;
    for w in positive_words(8) {
        for p in minimal_paths(&build_strip(&w)) {
            count += 1;
            let c = build_surface(&p, p.monodromy()).unwrap();
            let k = p.period() as i64;
            assert_eq!(c.k as i64, k);
            assert_eq!(c.faces as i64, k);
            assert_eq!(c.interior_edges as i64, 2 * k);
            assert_eq!(c.boundary_edges as i64, 4 * k);
            assert_eq!(c.connected_components, 1);
            assert_eq!(c.chi, c.vertex_count as i64 - c.edges.len() as i64 + c.faces as i64);
            if k % 2 == 0 {
                assert_eq!(c.chi, -k, "{w}");
                assert_eq!(sidedness(&c), Sidedness::TwoSided, "{w}");
                assert!(c.orientation_double().is_none());
            } else {
                assert_eq!(sidedness(&c), Sidedness::OneSided, "{w}");
                let d = c.orientation_double().unwrap();
                assert_eq!(d.chi, -2 * k, "{w}");
                assert_eq!(d.sided, Sidedness::TwoSided);
                assert_eq!(d.connected_components, 1);
            }
            // The bundle is orientable, so one-sided and non-orientable agree.
            assert_eq!(c.orientable, Some(c.sided == Sidedness::TwoSided), "{w}");
            assert_eq!(guts_report(&p).unwrap().chi_surface(), c.s_gamma().chi);
        }
    }
    assert!(count > 300, "only {count} paths");
}

#[test]
fn every_edge_of_the_complex_is_glued_as_prescribed() {
    for w in positive_words(6) {
        for p in minimal_paths(&build_strip(&w)) {
            let c = build_surface(&p, p.monodromy()).unwrap();
            for e in &c.edges {
                match e.incidences.len() {
                    2 => assert_eq!(e.coorientation.abs(), 1),
                    1 => assert_eq!(e.coorientation, 0),
                    other => panic!("edge with {other} incidences"),
                }
            }
            for s in &c.saddles {
                assert!(s.bottom_slope.is_farey_adjacent(&s.top_slope));
            }
        }
    }
}
