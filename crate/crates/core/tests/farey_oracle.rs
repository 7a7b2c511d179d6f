mod common;

use std::collections::BTreeSet;

use common::positive_words;
use ptbundle::farey::{build_strip, minimal_paths, Strip};
use ptbundle::sl2z::{Letter, Slope};

fn adjacent(a: &Slope, b: &Slope) -> bool {
    a.is_farey_adjacent(b)
}

#[test]
fn strip_shifts_by_the_monodromy() {
    for w in positive_words(8) {
        let s = build_strip(&w);
        let n = s.n() as i64;
        for j in 0..n {
            let moved: BTreeSet<Slope> = s
                .triangle(j)
                .vertices()
                .iter()
                .map(|v| s.monodromy().apply_to_slope(v))
                .collect();
            assert_eq!(moved, s.triangle(j + n).vertex_set(), "{w} at {j}");
        }
    }
}

#[test]
fn consecutive_triangles_share_one_edge() {
    for w in positive_words(8) {
        let s = build_strip(&w);
        for j in -(s.n() as i64)..2 * s.n() as i64 {
            let shared = s.triangle(j).shared(&s.triangle(j + 1));
            assert_eq!(shared.len(), 2, "{w} at {j}");
            assert!(adjacent(&shared[0], &shared[1]));
        }
    }
}

#[test]
fn syllables_form_fans() {
    for w in positive_words(8) {
        let s = build_strip(&w);
        let mut j = 0i64;
        for &(l, m) in w.syllables() {
            for (count, letter) in [(l, Letter::R), (m, Letter::L)] {
                let run: Vec<_> = (j..=j + count as i64).map(|i| s.triangle(i).vertex_set()).collect();
                let apex: BTreeSet<Slope> = run
                    .iter()
                    .skip(1)
                    .fold(run[0].clone(), |acc, t| acc.intersection(t).cloned().collect());
                assert!(!apex.is_empty(), "{w}: no common vertex for the {letter:?} run at {j}");
                for i in j..j + count as i64 {
                    assert_eq!(s.letter(i), letter);
                }
                j += count as i64;
            }
        }
    }
}

/// Naive search in lifted coordinates: every Farey-adjacent walk from a
/// vertex to its translate with at most `2n` edges that never revisits a
/// vertex orbit and never has two consecutive edges on one Farey triangle.
fn oracle(strip: &Strip) -> BTreeSet<Vec<i64>> {
    let n = strip.n() as i64;
    let window: Vec<i64> = (-n..=3 * n).collect();
    let slope = |b: i64| strip.vertex(b);
    let mut found = BTreeSet::new();
    for start in 0..n {
        let mut stack: Vec<Vec<i64>> = vec![vec![start]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if last == start + n {
                let k = path.len() - 1;
                let closing_ok = k == 1 || !adjacent(&slope(path[k - 1]), &slope(path[1] + n));
                if closing_ok {
                    found.insert(normalize(&path[..k], n));
                }
                continue;
            }
            if path.len() > 2 * n as usize {
                continue;
            }
            for &next in &window {
                // Simple in the quotient: one vertex per orbit until closing.
                let repeats = path.iter().any(|p| (p - next).rem_euclid(n) == 0);
                if (repeats && next != start + n) || !adjacent(&slope(last), &slope(next)) {
                    continue;
                }
                if path.len() >= 2 && adjacent(&slope(path[path.len() - 2]), &slope(next)) {
                    continue;
                }
                let mut p = path.clone();
                p.push(next);
                stack.push(p);
            }
        }
    }
    found
}

/// Least rotation of a cycle of lifted vertices, translated into `[0, n)`.
fn normalize(cycle: &[i64], n: i64) -> Vec<i64> {
    let k = cycle.len();
    (0..k)
        .map(|r| {
            let seq: Vec<i64> = (0..k)
                .map(|i| {
                    let idx = r + i;
                    cycle[idx % k] + n * (idx / k) as i64
                })
                .collect();
            let shift = seq[0].div_euclid(n) * n;
            seq.iter().map(|v| v - shift).collect::<Vec<_>>()
        })
        .min()
        .unwrap()
}

#[test]
fn enumeration_matches_naive_search() {
    for w in positive_words(6) {
        let strip = build_strip(&w);
        let n = strip.n() as i64;
        let enumerated: BTreeSet<Vec<i64>> = minimal_paths(&strip)
            .iter()
            .map(|p| normalize(p.births(), n))
            .collect();
        let naive = oracle(&strip);
        assert_eq!(enumerated, naive, "{w}");
    }
}

#[test]
fn paths_are_adjacent_and_shift_by_the_monodromy() {
    for w in positive_words(8) {
        let strip = build_strip(&w);
        let a = strip.monodromy();
        let paths = minimal_paths(&strip);
        assert!(!paths.is_empty(), "{w}");
        for p in &paths {
            p.check_adjacency().unwrap();
            let k = p.period();
            let v = p.vertices();
            assert_eq!(v.len(), k);
            // v_j for any j >= 0, continued by the monodromy.
            let ext = |j: usize| (0..j / k).fold(v[j % k].clone(), |s, _| a.apply_to_slope(&s));
            for i in 0..k {
                assert_eq!(v[i].det(&ext(i + 1)).magnitude().to_string(), "1");
                // No shortcut across a Farey triangle.
                let after = ext(i + 2);
                assert!(!adjacent(&v[i], &after), "{w}: shortcut at {i}");
            }
        }
    }
}

#[test]
fn enumeration_is_deterministic() {
    for w in positive_words(6) {
        let s = build_strip(&w);
        assert_eq!(minimal_paths(&s), minimal_paths(&s));
    }
}
