//! The band of Farey triangles crossed by the axis of a hyperbolic
//! monodromy, its quotient by the monodromy, and the minimal invariant edge
//! paths carried by it.
//!
//! Strip triangles are indexed by `j ∈ Z` with `T_{j+n} = A·T_j`. Every
//! triangle `T_j` has exactly one vertex that is not in `T_{j-1}`; we call
//! `j` the *birth index* of that vertex. Birth indices identify lifted
//! vertices, `A` acts on them by `j ↦ j + n`, and the vertex orbits of the
//! quotient are the residues mod `n`.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sl2z::{Letter, MatSL2, Slope, TwistWord};

/// Three pairwise Farey-adjacent slopes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IdealTriangle {
    vertices: [Slope; 3],
}

impl IdealTriangle {
    pub fn new(a: Slope, b: Slope, c: Slope) -> Result<Self> {
        for (x, y) in [(&a, &b), (&b, &c), (&a, &c)] {
            if !x.is_farey_adjacent(y) {
                return Err(Error::InvalidPath(format!("{x} and {y} are not Farey adjacent")));
            }
        }
        Ok(IdealTriangle {
            vertices: [a, b, c],
        })
    }

    pub fn base() -> Self {
        let s = |p: i64, q: i64| Slope::new(p, q).expect("nonzero");
        IdealTriangle {
            vertices: [s(0, 1), s(1, 1), s(1, 0)],
        }
    }

    pub fn vertices(&self) -> &[Slope; 3] {
        &self.vertices
    }

    pub fn contains(&self, v: &Slope) -> bool {
        self.vertices.contains(v)
    }

    pub fn image(&self, m: &MatSL2) -> IdealTriangle {
        IdealTriangle {
            vertices: self.vertices.clone().map(|v| m.apply_to_slope(&v)),
        }
    }

    pub fn vertex_set(&self) -> BTreeSet<Slope> {
        self.vertices.iter().cloned().collect()
    }

    /// Vertices shared with `other`.
    pub fn shared(&self, other: &IdealTriangle) -> Vec<Slope> {
        self.vertices
            .iter()
            .filter(|v| other.contains(v))
            .cloned()
            .collect()
    }
}

/// The A-invariant band of Farey triangles `T_0 … T_n` for a positive word.
#[derive(Clone, Debug)]
pub struct Strip {
    word: TwistWord,
    monodromy: MatSL2,
    /// `P_j`: product of the first `j` letters, `0 <= j <= n`.
    prefixes: Vec<MatSL2>,
    triangles: Vec<IdealTriangle>,
    /// Birth indices of the vertices of `T_j` for `0 <= j < n`, in the order
    /// of `triangles[j].vertices`.
    births: Vec<[i64; 3]>,
    /// Last triangle index containing the vertex born at `j`, for `0 <= j < n`.
    deaths: Vec<i64>,
}

impl Strip {
    /// Builds `T_j = P_j·T_0` for `T_0 = {0/1, 1/1, 1/0}`, `0 <= j <= n`.
    /// The sign of the word is ignored.
    pub fn build(word: &TwistWord) -> Strip {
        let letters = word.letters();
        let n = letters.len();
        let mut prefixes = Vec::with_capacity(n + 1);
        prefixes.push(MatSL2::identity());
        for letter in &letters {
            let next = prefixes.last().expect("nonempty").compose(&letter.matrix());
            prefixes.push(next);
        }
        let monodromy = prefixes[n].clone();
        let base = IdealTriangle::base();
        let triangles: Vec<_> = prefixes.iter().map(|p| base.image(p)).collect();

        let word = word.with_sign(1).expect("valid word");
        let mut strip = Strip {
            word,
            monodromy,
            prefixes,
            triangles,
            births: Vec::new(),
            deaths: Vec::new(),
        };
        strip.index_vertices();
        strip
    }

    /// Assigns birth indices by scanning a window wide enough to contain
    /// every fan touching `T_0 … T_{n-1}`; fans have at most `n + 1`
    /// triangles.
    fn index_vertices(&mut self) {
        let n = self.n() as i64;
        let (lo, hi) = (-n - 2, 2 * n + 2);
        let window: Vec<IdealTriangle> = (lo..=hi).map(|j| self.triangle(j)).collect();
        let mut first: HashMap<Slope, i64> = HashMap::new();
        let mut last: HashMap<Slope, i64> = HashMap::new();
        for (offset, t) in window.iter().enumerate() {
            let j = lo + offset as i64;
            for v in t.vertices() {
                first.entry(v.clone()).or_insert(j);
                last.insert(v.clone(), j);
            }
        }
        self.births = (0..n)
            .map(|j| {
                self.triangles[j as usize]
                    .vertices()
                    .clone()
                    .map(|v| first[&v])
            })
            .collect();
        self.deaths = (0..n)
            .map(|j| {
                let newborn = self.triangles[j as usize]
                    .vertices()
                    .iter()
                    .find(|v| first[*v] == j)
                    .expect("each triangle has a newborn vertex");
                last[newborn]
            })
            .collect();
    }

    pub fn word(&self) -> &TwistWord {
        &self.word
    }

    pub fn monodromy(&self) -> &MatSL2 {
        &self.monodromy
    }

    /// Word length `n`: the number of triangles per fundamental domain.
    pub fn n(&self) -> usize {
        self.triangles.len() - 1
    }

    /// `T_0 … T_n`.
    pub fn triangles(&self) -> &[IdealTriangle] {
        &self.triangles
    }

    /// `P_j` for any `j ∈ Z`, using `P_{j+n} = A·P_j`.
    pub fn prefix(&self, j: i64) -> MatSL2 {
        let n = self.n() as i64;
        let (q, r) = (j.div_euclid(n), j.rem_euclid(n));
        let p = &self.prefixes[r as usize];
        match q.cmp(&0) {
            std::cmp::Ordering::Equal => p.clone(),
            std::cmp::Ordering::Greater => self.monodromy.pow(q as u64).compose(p),
            std::cmp::Ordering::Less => self.monodromy.inverse().pow((-q) as u64).compose(p),
        }
    }

    /// `T_j` in the doubly infinite strip.
    pub fn triangle(&self, j: i64) -> IdealTriangle {
        let n = self.n() as i64;
        if (0..=n).contains(&j) {
            return self.triangles[j as usize].clone();
        }
        IdealTriangle::base().image(&self.prefix(j))
    }

    /// Birth indices of the vertices of `T_j`.
    pub fn triangle_births(&self, j: i64) -> [i64; 3] {
        let n = self.n() as i64;
        let (q, r) = (j.div_euclid(n), j.rem_euclid(n));
        self.births[r as usize].map(|b| b + q * n)
    }

    /// The slope born at index `j`.
    pub fn vertex(&self, birth: i64) -> Slope {
        let t = self.triangle(birth);
        let pos = self
            .triangle_births(birth)
            .iter()
            .position(|&b| b == birth)
            .expect("newborn vertex");
        t.vertices()[pos].clone()
    }

    /// Last triangle index containing the vertex born at `birth`.
    pub fn death(&self, birth: i64) -> i64 {
        let n = self.n() as i64;
        let (q, r) = (birth.div_euclid(n), birth.rem_euclid(n));
        self.deaths[r as usize] + q * n
    }

    /// The letter that carries `T_j` to `T_{j+1}`.
    pub fn letter(&self, j: i64) -> Letter {
        let n = self.n() as i64;
        self.word.letters()[j.rem_euclid(n) as usize]
    }
}

/// Builds the strip of a twist word.
pub fn build_strip(w: &TwistWord) -> Strip {
    Strip::build(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Shared by two consecutive strip triangles.
    Rung,
    /// On the boundary of the strip: lies on one strip triangle.
    Boundary,
}

/// An edge of the strip's 1-skeleton, in lifted coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientEdge {
    /// Birth indices of the endpoints, smaller first.
    pub ends: [i64; 2],
    /// Indices of the strip triangles containing the edge, ascending.
    pub triangles: Vec<i64>,
    pub kind: EdgeKind,
}

impl QuotientEdge {
    pub fn last_triangle(&self) -> i64 {
        *self.triangles.last().expect("edges lie on a triangle")
    }

    fn shifted(&self, by: i64) -> QuotientEdge {
        QuotientEdge {
            ends: self.ends.map(|e| e + by),
            triangles: self.triangles.iter().map(|t| t + by).collect(),
            kind: self.kind,
        }
    }

    fn other_end(&self, v: i64) -> i64 {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }

    fn shares_triangle(&self, other: &QuotientEdge) -> bool {
        self.triangles.iter().any(|t| other.triangles.contains(t))
    }
}

/// The strip's 1-skeleton modulo `v ~ A·v`.
///
/// Vertex orbit `r` (for `0 <= r < n`) is represented by the slope born at
/// index `r`; edge representatives are the rung `T_j ∩ T_{j+1}` and the
/// boundary edge of `T_j` for `0 <= j < n`. A lift of an edge by `m`
/// fundamental domains adds `m·n` to all its indices.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    n: i64,
    vertices: Vec<Slope>,
    edges: Vec<QuotientEdge>,
    /// Per orbit: (edge id, endpoint slot) pairs incident to it.
    incidence: Vec<Vec<(usize, usize)>>,
    deaths: Vec<i64>,
}

impl QuotientGraph {
    pub fn new(strip: &Strip) -> QuotientGraph {
        let n = strip.n() as i64;
        let mut edges = Vec::with_capacity(2 * n as usize);
        for j in 0..n {
            let here = strip.triangle_births(j);
            let next = strip.triangle_births(j + 1);
            let prev = strip.triangle_births(j - 1);
            let rung: Vec<i64> = here.iter().copied().filter(|b| next.contains(b)).collect();
            let back: Vec<i64> = here.iter().copied().filter(|b| prev.contains(b)).collect();
            debug_assert_eq!(rung.len(), 2);
            debug_assert_eq!(back.len(), 2);
            edges.push(QuotientEdge {
                ends: sorted_pair(rung[0], rung[1]),
                triangles: vec![j, j + 1],
                kind: EdgeKind::Rung,
            });
            // The boundary edge of T_j is the side that is neither rung.
            let boundary = boundary_side(&here, &rung, &back);
            edges.push(QuotientEdge {
                ends: boundary,
                triangles: vec![j],
                kind: EdgeKind::Boundary,
            });
        }
        let mut incidence = vec![Vec::new(); n as usize];
        for (id, e) in edges.iter().enumerate() {
            for (slot, &end) in e.ends.iter().enumerate() {
                incidence[end.rem_euclid(n) as usize].push((id, slot));
            }
        }
        QuotientGraph {
            n,
            vertices: (0..n).map(|r| strip.vertex(r)).collect(),
            edges,
            incidence,
            deaths: (0..n).map(|r| strip.death(r)).collect(),
        }
    }

    pub fn vertices(&self) -> &[Slope] {
        &self.vertices
    }

    pub fn edges(&self) -> &[QuotientEdge] {
        &self.edges
    }

    /// Orbit of a lifted vertex.
    pub fn orbit(&self, birth: i64) -> usize {
        birth.rem_euclid(self.n) as usize
    }

    /// Representative edge and lift shift (in fundamental domains) of a
    /// lifted edge, if it belongs to the strip.
    pub fn locate(&self, e: &QuotientEdge) -> Option<(usize, i64)> {
        let m = e.triangles[0].div_euclid(self.n);
        let rep = e.shifted(-m * self.n);
        self.edges.iter().position(|x| *x == rep).map(|id| (id, m))
    }

    /// Lifted edges at the vertex born at `birth`.
    fn lifted_at(&self, birth: i64) -> impl Iterator<Item = QuotientEdge> + '_ {
        let orbit = self.orbit(birth);
        self.incidence[orbit].iter().map(move |&(id, slot)| {
            let e = &self.edges[id];
            e.shifted(birth - e.ends[slot])
        })
    }

    fn death(&self, birth: i64) -> i64 {
        self.deaths[self.orbit(birth)] + birth.div_euclid(self.n) * self.n
    }
}

fn sorted_pair(a: i64, b: i64) -> [i64; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// The side of a triangle that is neither the forward nor the backward rung.
fn boundary_side(here: &[i64; 3], rung: &[i64], back: &[i64]) -> [i64; 2] {
    let pairs = [(here[0], here[1]), (here[0], here[2]), (here[1], here[2])];
    let same = |p: &(i64, i64), e: &[i64]| e.contains(&p.0) && e.contains(&p.1);
    let (a, b) = pairs
        .into_iter()
        .find(|p| !same(p, rung) && !same(p, back))
        .expect("a triangle has three distinct sides");
    sorted_pair(a, b)
}

pub fn quotient_graph(s: &Strip) -> QuotientGraph {
    QuotientGraph::new(s)
}

/// A periodic Farey edge path `v_0, …, v_{len-1}` whose continuation is
/// `v_{i+len} = A^windings · v_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgePath {
    vertices: Vec<Slope>,
    monodromy: MatSL2,
    windings: u32,
    births: Vec<i64>,
}

impl EdgePath {
    /// A path closing up after one application of the monodromy.
    pub fn new(vertices: Vec<Slope>, monodromy: MatSL2) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidPath("a path needs at least one vertex".into()));
        }
        Ok(EdgePath {
            vertices,
            monodromy,
            windings: 1,
            births: Vec::new(),
        })
    }

    /// The same path listed over `times` fundamental domains.
    pub fn repeated(&self, times: u32) -> EdgePath {
        let mut vertices = Vec::new();
        let step = self.closure();
        let mut map = MatSL2::identity();
        for _ in 0..times {
            vertices.extend(self.vertices.iter().map(|v| map.apply_to_slope(v)));
            map = step.compose(&map);
        }
        EdgePath {
            vertices,
            monodromy: self.monodromy.clone(),
            windings: self.windings * times,
            births: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[Slope] {
        &self.vertices
    }

    pub fn monodromy(&self) -> &MatSL2 {
        &self.monodromy
    }

    /// Birth indices of the vertices in the strip they were enumerated
    /// from; empty for paths built directly from slopes.
    pub fn births(&self) -> &[i64] {
        &self.births
    }

    /// The map carrying `v_i` to `v_{i+len}`.
    pub fn closure(&self) -> MatSL2 {
        self.monodromy.pow(self.windings as u64)
    }

    /// `v_i` for `0 <= i < 2·len`.
    fn extended(&self, i: usize) -> Slope {
        let len = self.vertices.len();
        if i < len {
            self.vertices[i].clone()
        } else {
            self.closure().apply_to_slope(&self.vertices[i - len])
        }
    }

    /// Consecutive vertices, including the closing pair, as slopes.
    pub fn steps(&self) -> Vec<(Slope, Slope)> {
        let len = self.vertices.len();
        (0..len).map(|i| (self.extended(i), self.extended(i + 1))).collect()
    }

    /// Checks Farey adjacency of every consecutive pair.
    pub fn check_adjacency(&self) -> Result<()> {
        for (a, b) in self.steps() {
            if !a.is_farey_adjacent(&b) {
                return Err(Error::InvalidPath(format!("{a} and {b} are not Farey adjacent")));
            }
        }
        Ok(())
    }

    /// The smallest `k` with `v_{i+k} = A·v_i` for all `i`.
    pub fn period(&self) -> usize {
        let len = self.vertices.len();
        (1..=len)
            .find(|&k| {
                (0..len).all(|i| self.extended(i + k) == self.monodromy.apply_to_slope(&self.extended(i)))
            })
            .unwrap_or(len)
    }
}

pub fn path_period(p: &EdgePath) -> usize {
    p.period()
}

/// All minimal monotone A-invariant edge paths carried by the strip.
pub fn minimal_paths(s: &Strip) -> Vec<EdgePath> {
    enumerate_paths(s, None).expect("uncapped enumeration cannot fail")
}

/// As [`minimal_paths`], failing with [`Error::TooManyPaths`] rather than
/// returning more than `cap` paths.
pub fn minimal_paths_capped(s: &Strip, cap: usize) -> Result<Vec<EdgePath>> {
    enumerate_paths(s, Some(cap))
}

fn enumerate_paths(s: &Strip, cap: Option<usize>) -> Result<Vec<EdgePath>> {
    let graph = QuotientGraph::new(s);
    let n = graph.n;
    let mut found: BTreeSet<Vec<i64>> = BTreeSet::new();
    for start in 0..n {
        let mut search = Search {
            graph: &graph,
            target: start + n,
            edges: Vec::new(),
            verts: vec![start],
            found: &mut found,
        };
        search.extend(start);
        if let Some(cap) = cap {
            if found.len() > cap {
                return Err(Error::TooManyPaths { cap });
            }
        }
    }
    let mut paths: Vec<(usize, Vec<i64>)> = found.into_iter().map(|b| (b.len(), b)).collect();
    paths.sort();
    paths
        .into_iter()
        .map(|(_, births)| {
            let vertices = births.iter().map(|&b| s.vertex(b)).collect();
            let mut p = EdgePath::new(vertices, s.monodromy().clone())?;
            p.births = births;
            Ok(p)
        })
        .collect()
}

struct Search<'a> {
    graph: &'a QuotientGraph,
    target: i64,
    edges: Vec<QuotientEdge>,
    verts: Vec<i64>,
    found: &'a mut BTreeSet<Vec<i64>>,
}

impl Search<'_> {
    /// Depth-first extension of a monotone minimal path towards `target`.
    fn extend(&mut self, at: i64) {
        let n = self.graph.n;
        if at == self.target {
            let first = self.edges[0].shifted(n);
            let last = self.edges.last().expect("nonempty trail");
            if admissible_step(last, &first) {
                self.verts.pop();
                self.found.insert(normalize_cycle(&self.verts, n));
                self.verts.push(at);
            }
            return;
        }
        let horizon = self.graph.death(self.target);
        let candidates: Vec<QuotientEdge> = self.graph.lifted_at(at).collect();
        for e in candidates {
            if e.last_triangle() > horizon {
                continue;
            }
            if let Some(prev) = self.edges.last() {
                if !admissible_step(prev, &e) {
                    continue;
                }
            }
            let next = e.other_end(at);
            self.edges.push(e);
            self.verts.push(next);
            self.extend(next);
            self.verts.pop();
            self.edges.pop();
        }
    }
}

/// Monotone (the last containing triangle never moves backwards) and
/// minimal (no common triangle, so no shortcut across a third side).
fn admissible_step(prev: &QuotientEdge, next: &QuotientEdge) -> bool {
    next.last_triangle() >= prev.last_triangle() && !prev.shares_triangle(next)
}

/// One period of vertex births, rotated to start at the least orbit and
/// translated so that the first vertex lies in `[0, n)`.
fn normalize_cycle(verts: &[i64], n: i64) -> Vec<i64> {
    let pos = (0..verts.len())
        .min_by_key(|&i| verts[i].rem_euclid(n))
        .expect("nonempty");
    let rotated: Vec<i64> = verts[pos..]
        .iter()
        .copied()
        .chain(verts[..pos].iter().map(|b| b + n))
        .collect();
    let shift = rotated[0].div_euclid(n) * n;
    rotated.iter().map(|b| b - shift).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: i64, q: i64) -> Slope {
        Slope::new(p, q).unwrap()
    }

    fn word(sy: &[(u64, u64)]) -> TwistWord {
        TwistWord::positive(sy.to_vec()).unwrap()
    }

    fn set(v: &[Slope]) -> BTreeSet<Slope> {
        v.iter().cloned().collect()
    }

    #[test]
    fn cat_map_strip() {
        let strip = build_strip(&word(&[(1, 1)]));
        let t = strip.triangles();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].vertex_set(), set(&[s(0, 1), s(1, 1), s(1, 0)]));
        assert_eq!(t[1].vertex_set(), set(&[s(1, 1), s(2, 1), s(1, 0)]));
        assert_eq!(t[2].vertex_set(), set(&[s(1, 1), s(3, 2), s(2, 1)]));
        assert_eq!(t[0].image(strip.monodromy()).vertex_set(), t[2].vertex_set());
    }

    #[test]
    fn r2l_strip_closes() {
        let strip = build_strip(&word(&[(2, 1)]));
        assert_eq!(strip.triangles().len(), 4);
        assert_eq!(*strip.monodromy(), MatSL2::new(3, 2, 1, 1).unwrap());
        let t = strip.triangles();
        assert_eq!(t[0].image(strip.monodromy()).vertex_set(), t[3].vertex_set());
    }

    #[test]
    fn births_are_consistent() {
        let strip = build_strip(&word(&[(2, 3), (1, 1)]));
        let n = strip.n() as i64;
        for j in -n..2 * n {
            let t = strip.triangle(j);
            let b = strip.triangle_births(j);
            assert!(b.contains(&j));
            for (v, &bi) in t.vertices().iter().zip(&b) {
                assert_eq!(*v, strip.vertex(bi));
            }
            assert_eq!(strip.vertex(j + n), strip.monodromy().apply_to_slope(&strip.vertex(j)));
        }
    }

    #[test]
    fn quotient_graph_counts() {
        let strip = build_strip(&word(&[(1, 1)]));
        let g = quotient_graph(&strip);
        assert_eq!(g.vertices().len(), 2);
        assert_eq!(g.edges().len(), 4);
        for orbit in 0..2 {
            assert!(g.incidence[orbit].len() >= 2);
        }
    }

    #[test]
    fn quotient_identifies_translates() {
        let strip = build_strip(&word(&[(2, 1), (1, 2)]));
        let g = quotient_graph(&strip);
        let n = strip.n() as i64;
        for (id, e) in g.edges().iter().enumerate() {
            assert_eq!(g.locate(e), Some((id, 0)));
            assert_eq!(g.locate(&e.shifted(3 * n)), Some((id, 3)));
        }
    }

    #[test]
    fn cat_map_paths_are_the_two_boundary_lines() {
        let strip = build_strip(&word(&[(1, 1)]));
        let paths = minimal_paths(&strip);
        assert_eq!(paths.len(), 2);
        for p in &paths {
            assert_eq!(path_period(p), 1);
            p.check_adjacency().unwrap();
        }
    }

    #[test]
    fn shortcut_is_not_admissible() {
        // Two sides of T_0: the rung {1, ∞} followed by the rung {0, ∞}
        // (traversed 1 → ∞ → 0) lie on one triangle.
        let strip = build_strip(&word(&[(1, 1)]));
        let g = quotient_graph(&strip);
        let rung_back = QuotientEdge {
            ends: [-1, 0],
            triangles: vec![-1, 0],
            kind: EdgeKind::Rung,
        };
        let rung_fwd = g.edges()[0].clone();
        assert_eq!(rung_fwd.triangles, vec![0, 1]);
        assert!(!admissible_step(&rung_back, &rung_fwd));
    }

    #[test]
    fn period_of_repeated_path() {
        let strip = build_strip(&word(&[(1, 1), (1, 1)]));
        let paths = minimal_paths(&strip);
        let p = paths.iter().find(|p| p.period() == 2).expect("a k = 2 path");
        assert_eq!(path_period(&p.repeated(2)), 2);
        assert_eq!(path_period(&p.repeated(3)), 2);
    }

    #[test]
    fn explicit_path_period() {
        let a = MatSL2::new(2, 1, 1, 1).unwrap();
        let p = EdgePath::new(vec![s(0, 1)], a.clone()).unwrap();
        assert_eq!(path_period(&p), 1);
        p.check_adjacency().unwrap();
        let bad = EdgePath::new(vec![s(0, 1), s(2, 1)], a).unwrap();
        assert!(bad.check_adjacency().is_err());
    }

    #[test]
    fn capped_enumeration() {
        let strip = build_strip(&word(&[(1, 1)]));
        assert!(matches!(
            minimal_paths_capped(&strip, 1),
            Err(Error::TooManyPaths { cap: 1 })
        ));
        assert_eq!(minimal_paths_capped(&strip, 2).unwrap().len(), 2);
    }
}
