//! The layered ideal triangulation of a punctured-torus bundle, its angle
//! gluing equations, and the volume of its geometric structure.
//!
//! Tetrahedron `j` realises the diagonal flip from the fibre triangulation
//! `T_j` to `T_{j+1}`. It is drawn on a lattice parallelogram
//! `P0 = 0, P1 = e0, P2 = e0 + e1, P3 = e1` with `det(e0, e1) = 1`, where
//! `e0`, `e1` span the two slopes the flip keeps. The bottom faces
//! `P0P1P2`, `P0P2P3` lie in level `j` and the top faces `P0P1P3`,
//! `P1P2P3` in level `j + 1`. A top face is glued to the bottom face of the
//! next tetrahedron that is a lattice translate of it; the last layer is
//! first pulled back through the monodromy.

mod lobachevsky;
mod solver;

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::Zero;
use petgraph::unionfind::UnionFind;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::farey::build_strip;
use crate::sl2z::{MatSL2, Slope, TwistWord};

pub use lobachevsky::{lobachevsky, lobachevsky_derivative, v3};
pub use solver::{solve_geometric, solve_geometric_with, Affine, SolverOptions};

/// Default projected-gradient tolerance of the solver.
pub const SOLVER_TOLERANCE: f64 = 1e-12;
/// Default slack when comparing a volume with `n·V₃`.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Tetrahedron edges as vertex pairs; edge `i` carries angle slot `i / 2`.
pub const EDGES: [[usize; 2]; 6] = [[0, 1], [2, 3], [1, 2], [0, 3], [0, 2], [1, 3]];

/// Faces by the vertex they omit.
const BOTTOM_FACES: [usize; 2] = [3, 1];
const TOP_FACES: [usize; 2] = [2, 0];

type Point = (BigInt, BigInt);

/// Where a face of a tetrahedron is glued: the neighbouring tetrahedron
/// and the vertex permutation realising the gluing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacePairing {
    pub tetrahedron: usize,
    pub permutation: [usize; 4],
}

impl FacePairing {
    /// Parity of the vertex permutation; odd for orientation-compatible
    /// gluings of consistently oriented tetrahedra.
    pub fn is_odd(&self) -> bool {
        let p = self.permutation;
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if p[i] > p[j] {
                    inversions += 1;
                }
            }
        }
        inversions % 2 == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Tetrahedron {
    pub index: usize,
    /// Lattice positions of the four ideal vertices in the layer's frame.
    #[serde(serialize_with = "points_as_pairs")]
    pub vertices: [Point; 4],
    /// Slopes of `e0`, `e1`, the bottom and the top diagonal.
    pub slopes: [Slope; 4],
    /// Indexed by the omitted vertex.
    pub faces: [FacePairing; 4],
}

fn points_as_pairs<S: Serializer>(pts: &[Point; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<[String; 2]> = pts
        .iter()
        .map(|(x, y)| [x.to_string(), y.to_string()])
        .collect();
    v.serialize(s)
}

/// An angle slot: tetrahedron `j`, slot `0..3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Slot {
    pub tetrahedron: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeClass {
    /// One entry per tetrahedron edge in the class, sorted.
    pub incidences: Vec<Slot>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayeredTriangulation {
    word: TwistWord,
    monodromy: MatSL2,
    tetrahedra: Vec<Tetrahedron>,
    edge_classes: Vec<EdgeClass>,
}

impl LayeredTriangulation {
    pub fn n(&self) -> usize {
        self.tetrahedra.len()
    }
    pub fn word(&self) -> &TwistWord {
        &self.word
    }
    pub fn monodromy(&self) -> &MatSL2 {
        &self.monodromy
    }
    pub fn tetrahedra(&self) -> &[Tetrahedron] {
        &self.tetrahedra
    }
    pub fn edge_classes(&self) -> &[EdgeClass] {
        &self.edge_classes
    }
}

fn add(p: &Point, q: &Point) -> Point {
    (&p.0 + &q.0, &p.1 + &q.1)
}

fn sub(p: &Point, q: &Point) -> Point {
    (&p.0 - &q.0, &p.1 - &q.1)
}

fn neg(p: &Point) -> Point {
    (-&p.0, -&p.1)
}

fn det(p: &Point, q: &Point) -> BigInt {
    &p.0 * &q.1 - &p.1 * &q.0
}

fn face_vertices(omit: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut i = 0;
    for v in 0..4 {
        if v != omit {
            out[i] = v;
            i += 1;
        }
    }
    out
}

/// The frame `(e0, e1)` of a flip: `det(e0, e1) = 1` and the removed
/// diagonal parallel to `e0 + e1`.
fn flip_frame(a: &Point, b: &Point, removed: &Point) -> Result<(Point, Point)> {
    let candidates = [
        (a.clone(), b.clone()),
        (b.clone(), a.clone()),
        (a.clone(), neg(b)),
        (neg(b), a.clone()),
    ];
    candidates
        .into_iter()
        .find(|(x, y)| det(x, y) == BigInt::from(1) && det(&add(x, y), removed).is_zero())
        .ok_or_else(|| Error::Internal("consecutive strip triangles are not related by a flip".into()))
}

/// Layer `j` of the triangulation, before face pairings are known.
fn layer(index: usize, bottom: &crate::farey::IdealTriangle, top: &crate::farey::IdealTriangle) -> Result<(Point, Point, [Slope; 4])> {
    let kept = bottom.shared(top);
    if kept.len() != 2 {
        return Err(Error::Internal(format!("layer {index} is not a diagonal flip")));
    }
    let removed = bottom
        .vertices()
        .iter()
        .find(|v| !top.contains(v))
        .expect("flip removes a slope")
        .clone();
    let added = top
        .vertices()
        .iter()
        .find(|v| !bottom.contains(v))
        .expect("flip adds a slope")
        .clone();
    let (e0, e1) = flip_frame(&kept[0].vector(), &kept[1].vector(), &removed.vector())?;
    let s0 = Slope::new(e0.0.clone(), e0.1.clone())?;
    let s1 = Slope::new(e1.0.clone(), e1.1.clone())?;
    Ok((e0, e1, [s0, s1, removed, added]))
}

/// Finds the translation carrying triangle `from` onto one of the faces of
/// `to` listed in `candidates`, returning that face and the vertex map.
fn match_face(
    from: &[Point; 3],
    to: &[Point; 4],
    candidates: &[usize],
) -> Option<(usize, [usize; 3])> {
    for &omit in candidates {
        let verts = face_vertices(omit);
        for anchor in verts {
            let shift = sub(&to[anchor], &from[0]);
            let mut image = [0usize; 3];
            let ok = from.iter().enumerate().all(|(i, p)| {
                let moved = add(p, &shift);
                match verts.iter().find(|&&v| to[v] == moved) {
                    Some(&v) => {
                        image[i] = v;
                        true
                    }
                    None => false,
                }
            });
            if ok {
                return Some((omit, image));
            }
        }
    }
    None
}

/// One tetrahedron per letter, glued layer to layer and closed up by the
/// monodromy; edge classes by union-find over the face gluings.
pub fn build_layered_triangulation(w: &TwistWord) -> Result<LayeredTriangulation> {
    let strip = build_strip(w);
    let n = strip.n();
    let monodromy = w.to_matrix();
    let mut frames = Vec::with_capacity(n);
    for j in 0..n {
        frames.push(layer(j, &strip.triangle(j as i64), &strip.triangle(j as i64 + 1))?);
    }
    let origin: Point = (BigInt::zero(), BigInt::zero());
    let points: Vec<[Point; 4]> = frames
        .iter()
        .map(|(e0, e1, _)| [origin.clone(), e0.clone(), add(e0, e1), e1.clone()])
        .collect();

    let back = monodromy.inverse();
    let pull_back = |p: &Point| back.apply_to_vector(p);

    let placeholder = FacePairing {
        tetrahedron: usize::MAX,
        permutation: [0; 4],
    };
    let mut faces: Vec<[FacePairing; 4]> = vec![std::array::from_fn(|_| placeholder.clone()); n];
    for j in 0..n {
        let next = (j + 1) % n;
        for omit in TOP_FACES {
            let fv = face_vertices(omit);
            let mut tri: [Point; 3] = fv.map(|v| points[j][v].clone());
            if next == 0 {
                tri = tri.map(|p| pull_back(&p));
            }
            let (target, image) = match_face(&tri, &points[next], &BOTTOM_FACES).ok_or_else(|| {
                Error::Internal(format!("top face of tetrahedron {j} has no partner"))
            })?;
            let mut perm = [0usize; 4];
            for (i, &v) in fv.iter().enumerate() {
                perm[v] = image[i];
            }
            perm[omit] = target;
            let mut inverse = [0usize; 4];
            for (v, &pv) in perm.iter().enumerate() {
                inverse[pv] = v;
            }
            if faces[next][target].tetrahedron != usize::MAX {
                return Err(Error::Internal(format!(
                    "bottom face of tetrahedron {next} glued twice"
                )));
            }
            faces[j][omit] = FacePairing {
                tetrahedron: next,
                permutation: perm,
            };
            faces[next][target] = FacePairing {
                tetrahedron: j,
                permutation: inverse,
            };
        }
    }

    let edge_id = |tet: usize, a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        let e = EDGES.iter().position(|&[x, y]| x == a && y == b).expect("vertex pair");
        6 * tet + e
    };
    let mut uf: UnionFind<usize> = UnionFind::new(6 * n);
    for (j, tet_faces) in faces.iter().enumerate() {
        for omit in TOP_FACES {
            let pairing = &tet_faces[omit];
            let fv = face_vertices(omit);
            for x in 0..3 {
                for y in x + 1..3 {
                    let (a, b) = (fv[x], fv[y]);
                    uf.union(
                        edge_id(j, a, b),
                        edge_id(pairing.tetrahedron, pairing.permutation[a], pairing.permutation[b]),
                    );
                }
            }
        }
    }
    let labels = uf.into_labeling();
    let mut classes: Vec<(usize, Vec<Slot>)> = Vec::new();
    for id in 0..6 * n {
        let slot = Slot {
            tetrahedron: id / 6,
            slot: (id % 6) / 2,
        };
        match classes.iter_mut().find(|(l, _)| *l == labels[id]) {
            Some((_, v)) => v.push(slot),
            None => classes.push((labels[id], vec![slot])),
        }
    }
    let edge_classes = classes
        .into_iter()
        .map(|(_, mut incidences)| {
            incidences.sort();
            EdgeClass { incidences }
        })
        .collect();

    let tetrahedra = frames
        .into_iter()
        .zip(points)
        .zip(faces)
        .enumerate()
        .map(|(index, (((_, _, slopes), vertices), faces))| Tetrahedron {
            index,
            vertices,
            slopes,
            faces,
        })
        .collect();

    Ok(LayeredTriangulation {
        word: w.clone(),
        monodromy,
        tetrahedra,
        edge_classes,
    })
}

/// Linear angle constraints `M·θ = b` over `θ = (θ_{0,0}, θ_{0,1}, θ_{0,2},
/// θ_{1,0}, …)`: one row per tetrahedron, then one per edge class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GluingEquations {
    pub tetrahedra: usize,
    pub coefficients: Vec<Vec<i64>>,
    pub rhs: Vec<f64>,
}

impl GluingEquations {
    pub fn matrix(&self) -> DMatrix<f64> {
        let rows = self.coefficients.len();
        let cols = 3 * self.tetrahedra;
        DMatrix::from_fn(rows, cols, |r, c| self.coefficients[r][c] as f64)
    }

    pub fn rhs_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.rhs)
    }
}

pub fn gluing_equations(t: &LayeredTriangulation) -> GluingEquations {
    let n = t.n();
    let mut coefficients = Vec::with_capacity(n + t.edge_classes.len());
    let mut rhs = Vec::with_capacity(coefficients.capacity());
    for j in 0..n {
        let mut row = vec![0; 3 * n];
        row[3 * j..3 * j + 3].fill(1);
        coefficients.push(row);
        rhs.push(PI);
    }
    for class in &t.edge_classes {
        let mut row = vec![0; 3 * n];
        for s in &class.incidences {
            row[3 * s.tetrahedron + s.slot] += 1;
        }
        coefficients.push(row);
        rhs.push(2.0 * PI);
    }
    GluingEquations {
        tetrahedra: n,
        coefficients,
        rhs,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleStructure {
    pub angles: Vec<[f64; 3]>,
}

impl AngleStructure {
    pub fn flat(&self) -> Vec<f64> {
        self.angles.iter().flatten().copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> AngleStructure {
        AngleStructure {
            angles: x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect(),
        }
    }

    /// `Σ Л(θ)` over all angles.
    pub fn objective(&self) -> f64 {
        self.angles.iter().flatten().map(|&a| lobachevsky(a)).sum()
    }

    /// Shape parameter at each slot: `z`, `1/(1-z)`, `(z-1)/z`.
    pub fn shapes(&self) -> Vec<Complex<f64>> {
        self.angles.iter().map(|&a| shape_of(a)).collect()
    }
}

/// The triangle `0, 1, z` with angles `θ0` at `0` and `θ1` at `1`.
pub fn shape_of(a: [f64; 3]) -> Complex<f64> {
    Complex::from_polar(a[1].sin() / a[2].sin(), a[0])
}

/// `[z, 1/(1-z), (z-1)/z]`.
pub fn slot_shapes(z: Complex<f64>) -> [Complex<f64>; 3] {
    let one = Complex::new(1.0, 0.0);
    [z, one / (one - z), (z - one) / z]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeSolution {
    #[serde(serialize_with = "complex_pairs")]
    pub shapes: Vec<Complex<f64>>,
    /// Largest `|Σ log z − 2πi|` over edge classes.
    pub residual: f64,
    pub iterations: usize,
}

fn complex_pairs<S: Serializer>(zs: &[Complex<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<[f64; 2]> = zs.iter().map(|z| [z.re, z.im]).collect();
    v.serialize(s)
}

/// Largest log-form defect of the complex edge equations.
pub fn gluing_residual(t: &LayeredTriangulation, shapes: &[Complex<f64>]) -> f64 {
    let two_pi_i = Complex::new(0.0, 2.0 * PI);
    t.edge_classes
        .iter()
        .map(|class| {
            let total: Complex<f64> = class
                .incidences
                .iter()
                .map(|s| slot_shapes(shapes[s.tetrahedron])[s.slot].ln())
                .sum();
            (total - two_pi_i).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeResult {
    pub volume: f64,
    pub n: usize,
    pub bound: f64,
    pub bound_satisfied: bool,
    pub equality_gap: f64,
}

pub fn volume(a: &AngleStructure) -> VolumeResult {
    volume_with_tolerance(a, BOUND_TOLERANCE)
}

pub fn volume_with_tolerance(a: &AngleStructure, tol: f64) -> VolumeResult {
    let volume = a.objective();
    let n = a.angles.len();
    let bound = n as f64 * v3();
    VolumeResult {
        volume,
        n,
        bound,
        bound_satisfied: volume <= bound + tol,
        equality_gap: bound - volume,
    }
}

/// Edge classes predicted from the strip alone: the edges of the bundle
/// are the slopes of the strip modulo the monodromy, so an angle slot is
/// labelled by the birth index of its slope reduced mod `n`.
pub fn slope_orbit_classes(t: &LayeredTriangulation) -> Vec<Vec<Slot>> {
    let strip = build_strip(&t.word);
    let n = strip.n() as i64;
    let orbit = |j: i64, s: &Slope| -> i64 {
        let births = strip.triangle_births(j).to_vec();
        let tri = strip.triangle(j);
        let pos = tri.vertices().iter().position(|v| v == s);
        match pos {
            Some(p) => births[p].rem_euclid(n),
            None => {
                let tri = strip.triangle(j + 1);
                let births = strip.triangle_births(j + 1);
                let p = tri.vertices().iter().position(|v| v == s).expect("slope in layer");
                births[p].rem_euclid(n)
            }
        }
    };
    let mut classes: Vec<Vec<Slot>> = vec![Vec::new(); n as usize];
    for tet in &t.tetrahedra {
        let j = tet.index as i64;
        let labels = [
            orbit(j, &tet.slopes[0]),
            orbit(j, &tet.slopes[1]),
            orbit(j, &tet.slopes[2]),
            orbit(j, &tet.slopes[3]),
        ];
        // e0 twice, e1 twice, one of each diagonal.
        let slots = [(0, labels[0]), (0, labels[0]), (1, labels[1]), (1, labels[1]), (2, labels[2]), (2, labels[3])];
        for (slot, l) in slots {
            classes[l as usize].push(Slot {
                tetrahedron: tet.index,
                slot,
            });
        }
    }
    let mut out: Vec<Vec<Slot>> = classes
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|mut c| {
            c.sort();
            c
        })
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: Vec<(u64, u64)>) -> TwistWord {
        TwistWord::positive(s).unwrap()
    }

    #[test]
    fn figure_eight_combinatorics() {
        let t = build_layered_triangulation(&word(vec![(1, 1)])).unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(t.edge_classes().len(), 2);
        for c in t.edge_classes() {
            assert_eq!(c.incidences.len(), 6);
        }
    }

    #[test]
    fn face_pairings_are_involutive_and_odd() {
        let t = build_layered_triangulation(&word(vec![(2, 1), (1, 3)])).unwrap();
        for tet in t.tetrahedra() {
            for (omit, f) in tet.faces.iter().enumerate() {
                assert!(f.is_odd());
                let back = &t.tetrahedra()[f.tetrahedron].faces[f.permutation[omit]];
                assert_eq!(back.tetrahedron, tet.index);
                for v in 0..4 {
                    assert_eq!(back.permutation[f.permutation[v]], v);
                }
            }
        }
    }

    #[test]
    fn classes_match_slope_orbits() {
        for s in [vec![(1, 1)], vec![(3, 1)], vec![(2, 2), (1, 1)], vec![(1, 4)]] {
            let t = build_layered_triangulation(&word(s)).unwrap();
            let mut uf: Vec<Vec<Slot>> = t.edge_classes().iter().map(|c| c.incidences.clone()).collect();
            uf.sort();
            assert_eq!(uf, slope_orbit_classes(&t));
        }
    }

    #[test]
    fn equations_for_figure_eight() {
        let t = build_layered_triangulation(&word(vec![(1, 1)])).unwrap();
        let eq = gluing_equations(&t);
        assert_eq!(eq.coefficients.len(), 4);
        assert!(eq.coefficients.iter().all(|r| r.len() == 6));
        for (row, class) in eq.coefficients[2..].iter().zip(t.edge_classes()) {
            assert!(row.iter().all(|&c| c >= 0));
            assert_eq!(row.iter().sum::<i64>() as usize, class.incidences.len());
        }
        let third = [PI / 3.0; 6];
        for (row, b) in eq.coefficients.iter().zip(&eq.rhs) {
            let lhs: f64 = row.iter().zip(third).map(|(&c, x)| c as f64 * x).sum();
            assert!((lhs - b).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_rows_count_each_slot_twice() {
        let t = build_layered_triangulation(&word(vec![(3, 2), (1, 1)])).unwrap();
        let eq = gluing_equations(&t);
        let n = t.n();
        let mut col = vec![0; 3 * n];
        for row in &eq.coefficients[n..] {
            for (c, v) in col.iter_mut().zip(row) {
                *c += v;
            }
        }
        assert!(col.iter().all(|&c| c == 2));
    }

    #[test]
    fn regular_shape() {
        let z = shape_of([PI / 3.0; 3]);
        assert!((z - Complex::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
        for w in slot_shapes(z) {
            assert!((w - z).norm() < 1e-15);
        }
    }

    #[test]
    fn shape_arguments_are_the_angles() {
        let a = [0.4, 1.1, PI - 1.5];
        let z = shape_of(a);
        for (w, theta) in slot_shapes(z).iter().zip(a) {
            assert!((w.arg() - theta).abs() < 1e-12);
        }
    }
}
