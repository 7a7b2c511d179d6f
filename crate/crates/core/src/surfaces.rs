//! The surface `S_γ` stacked from standard saddles, as an explicit cell
//! complex, and the characteristic-submanifold summary of its complement.
//!
//! The model saddle has bottom arcs parallel to the horizontal arc `l`
//! and top arcs parallel to the vertical arc `m` of the square torus
//! picture; its octagon boundary, in order, is
//! `l-, p1, m+, p2, l+, p3, m-, p4`. Saddle `i` is the image of the model
//! under `f = [u | s·w]`, where `u`, `w` are the primitive vectors of the
//! bottom and top slopes and `s = det(u, w)` makes `f` orientation
//! preserving.
//!
//! Horizontal arcs are the two parallel copies of an essential arc of the
//! level torus, named by the side (left `+1`, right `-1`) they lie on
//! relative to the slope's canonical vector `(p, q)`. Near each of its
//! horizontal arcs a saddle lies on the same side as the copy. Where the
//! saddle below and the saddle above meet along a copy, both lie on the
//! same side, so the surface folds and their upward normals disagree.

use std::collections::BTreeMap;

use num_traits::{One, Signed};
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::farey::EdgePath;
use crate::sl2z::{MatSL2, Slope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    TwoSided,
    OneSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(k: usize) -> Parity {
        if k % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRole {
    Bottom,
    Top,
    Vertical,
}

/// One copy of the arc of a given slope in a level torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ArcCopy {
    /// Level index `i`, meaning the torus `T × {i/k}`.
    pub level: usize,
    pub slope: Slope,
    /// `+1` left of the canonical vector, `-1` right of it.
    pub side: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SaddleEdge {
    pub label: &'static str,
    pub role: EdgeRole,
    /// `None` for vertical arcs `{x} × I`.
    pub arc: Option<ArcCopy>,
    /// Whether the octagon traverses the arc along its canonical vector.
    pub forward: bool,
    /// Side of the arc on which the saddle lies nearby.
    pub face_side: i8,
}

/// A standard saddle: an octagon with faces `e1 … e8` in boundary order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SaddlePiece {
    pub index: usize,
    pub bottom_slope: Slope,
    pub top_slope: Slope,
    pub edges: [SaddleEdge; 8],
}

impl SaddlePiece {
    /// The saddle between levels `index` and `index + 1`. Arcs on the top
    /// level are reported at level `index + 1` unreduced.
    pub fn standard(index: usize, bottom: &Slope, top: &Slope) -> Result<SaddlePiece> {
        let s = bottom.det(top);
        if !s.abs().is_one() {
            return Err(Error::InvalidPath(format!(
                "{bottom} and {top} are not Farey adjacent"
            )));
        }
        let s: i8 = if s.is_positive() { 1 } else { -1 };
        let arc = |level: usize, slope: &Slope, side: i8| ArcCopy {
            level,
            slope: slope.clone(),
            side,
        };
        let horizontal = |label, role, copy: ArcCopy, forward: bool| SaddleEdge {
            label,
            role,
            face_side: copy.side,
            arc: Some(copy),
            forward,
        };
        let vertical = |label| SaddleEdge {
            label,
            role: EdgeRole::Vertical,
            arc: None,
            forward: true,
            face_side: 0,
        };
        let (lo, hi) = (index, index + 1);
        Ok(SaddlePiece {
            index,
            bottom_slope: bottom.clone(),
            top_slope: top.clone(),
            edges: [
                horizontal("l-", EdgeRole::Bottom, arc(lo, bottom, 1), true),
                vertical("p1"),
                horizontal("m+", EdgeRole::Top, arc(hi, top, s), s > 0),
                vertical("p2"),
                horizontal("l+", EdgeRole::Bottom, arc(lo, bottom, -1), false),
                vertical("p3"),
                horizontal("m-", EdgeRole::Top, arc(hi, top, -s), s < 0),
                vertical("p4"),
            ],
        })
    }
}

/// One side of an edge of the complex: the face it bounds and the two
/// octagon corners at its ends (in traversal order).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Incidence {
    pub face: usize,
    pub from_corner: usize,
    pub to_corner: usize,
    pub forward: bool,
}

impl Incidence {
    fn start(&self) -> usize {
        if self.forward {
            self.from_corner
        } else {
            self.to_corner
        }
    }

    fn end(&self) -> usize {
        if self.forward {
            self.to_corner
        } else {
            self.from_corner
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexEdge {
    pub incidences: Vec<Incidence>,
    /// For interior edges: `+1` if the reference normals of the two faces
    /// agree across the edge, `-1` if they are opposite.
    pub coorientation: i8,
}

/// A 2-complex of polygons with corner identifications induced by the
/// edge gluings. Corners are numbered globally.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceComplex {
    pub k: usize,
    pub faces: usize,
    pub corners: usize,
    pub edges: Vec<ComplexEdge>,
    pub vertex_count: usize,
    pub interior_edges: usize,
    pub boundary_edges: usize,
    pub boundary_components: usize,
    pub connected_components: usize,
    pub chi: i64,
    pub sided: Sidedness,
    /// Intrinsic orientability from edge traversal directions, when the
    /// faces carry a traversal orientation.
    pub orientable: Option<bool>,
    #[serde(skip)]
    pub saddles: Vec<SaddlePiece>,
    #[serde(skip)]
    orientation_double: Option<Box<SurfaceComplex>>,
}

impl SurfaceComplex {
    fn assemble(
        k: usize,
        faces: usize,
        corners: usize,
        edges: Vec<ComplexEdge>,
        with_orientation: bool,
    ) -> Result<SurfaceComplex> {
        let mut uf: UnionFind<usize> = UnionFind::new(corners);
        for e in &edges {
            match e.incidences.as_slice() {
                [a, b] => {
                    uf.union(a.start(), b.start());
                    uf.union(a.end(), b.end());
                }
                [_] => {}
                other => {
                    return Err(Error::Internal(format!(
                        "edge with {} incidences",
                        other.len()
                    )))
                }
            }
        }
        let labels = uf.into_labeling();
        let mut vertex_ids: BTreeMap<usize, usize> = BTreeMap::new();
        for &l in &labels {
            let next = vertex_ids.len();
            vertex_ids.entry(l).or_insert(next);
        }
        let vertex_of = |corner: usize| vertex_ids[&labels[corner]];
        let vertex_count = vertex_ids.len();

        let interior_edges = edges.iter().filter(|e| e.incidences.len() == 2).count();
        let boundary_edges = edges.len() - interior_edges;

        let mut boundary_uf: UnionFind<usize> = UnionFind::new(vertex_count);
        let mut on_boundary = vec![false; vertex_count];
        for e in edges.iter().filter(|e| e.incidences.len() == 1) {
            let (a, b) = (vertex_of(e.incidences[0].from_corner), vertex_of(e.incidences[0].to_corner));
            boundary_uf.union(a, b);
            on_boundary[a] = true;
            on_boundary[b] = true;
        }
        let boundary_labels = boundary_uf.into_labeling();
        let mut circles: Vec<usize> = (0..vertex_count)
            .filter(|&v| on_boundary[v])
            .map(|v| boundary_labels[v])
            .collect();
        circles.sort_unstable();
        circles.dedup();

        let coorient: Vec<(usize, usize, i8)> = edges
            .iter()
            .filter_map(|e| match e.incidences.as_slice() {
                [a, b] => Some((a.face, b.face, e.coorientation)),
                _ => None,
            })
            .collect();
        let (sided_ok, components) = propagate_signs(faces, &coorient);
        let orientable = with_orientation.then(|| {
            let traversal: Vec<(usize, usize, i8)> = edges
                .iter()
                .filter_map(|e| match e.incidences.as_slice() {
                    // Coherent orientations traverse a shared edge oppositely.
                    [a, b] => Some((a.face, b.face, if a.forward != b.forward { 1 } else { -1 })),
                    _ => None,
                })
                .collect();
            propagate_signs(faces, &traversal).0
        });

        let chi = vertex_count as i64 - edges.len() as i64 + faces as i64;
        Ok(SurfaceComplex {
            k,
            faces,
            corners,
            edges,
            vertex_count,
            interior_edges,
            boundary_edges,
            boundary_components: circles.len(),
            connected_components: components,
            chi,
            sided: if sided_ok {
                Sidedness::TwoSided
            } else {
                Sidedness::OneSided
            },
            orientable,
            saddles: Vec::new(),
            orientation_double: None,
        })
    }

    /// For odd `k`: the boundary of a regular neighbourhood, which is the
    /// two-sided surface `S_γ`.
    pub fn orientation_double(&self) -> Option<&SurfaceComplex> {
        self.orientation_double.as_deref()
    }

    /// `S_γ`: the surface itself when two-sided, otherwise its double.
    pub fn s_gamma(&self) -> &SurfaceComplex {
        self.orientation_double().unwrap_or(self)
    }

    /// Two copies of every cell; sheet `a` of a face is glued to sheet
    /// `a·c` of its neighbour, `c` being the co-orientation relation.
    fn double(&self) -> Result<SurfaceComplex> {
        let sheet_face = |face: usize, sheet: usize| face + sheet * self.faces;
        let sheet_corner = |corner: usize, sheet: usize| corner + sheet * self.corners;
        let mut edges = Vec::with_capacity(2 * self.edges.len());
        for e in &self.edges {
            for sheet in 0..2 {
                let incidences = match e.incidences.as_slice() {
                    [a, b] => {
                        let other = if e.coorientation > 0 { sheet } else { 1 - sheet };
                        vec![
                            Incidence {
                                face: sheet_face(a.face, sheet),
                                from_corner: sheet_corner(a.from_corner, sheet),
                                to_corner: sheet_corner(a.to_corner, sheet),
                                forward: a.forward,
                            },
                            Incidence {
                                face: sheet_face(b.face, other),
                                from_corner: sheet_corner(b.from_corner, other),
                                to_corner: sheet_corner(b.to_corner, other),
                                forward: b.forward,
                            },
                        ]
                    }
                    [a] => vec![Incidence {
                        face: sheet_face(a.face, sheet),
                        from_corner: sheet_corner(a.from_corner, sheet),
                        to_corner: sheet_corner(a.to_corner, sheet),
                        forward: a.forward,
                    }],
                    _ => unreachable!("validated by assemble"),
                };
                edges.push(ComplexEdge {
                    incidences,
                    coorientation: e.coorientation,
                });
            }
        }
        SurfaceComplex::assemble(self.k, 2 * self.faces, 2 * self.corners, edges, false)
    }
}

/// Two-colours faces so that `sign(f)·sign(g) = relation` for every listed
/// pair. Returns whether that is possible and the number of components.
fn propagate_signs(faces: usize, relations: &[(usize, usize, i8)]) -> (bool, usize) {
    let mut adj: Vec<Vec<(usize, i8)>> = vec![Vec::new(); faces];
    for &(f, g, r) in relations {
        adj[f].push((g, r));
        adj[g].push((f, r));
    }
    let mut sign: Vec<i8> = vec![0; faces];
    let mut consistent = true;
    let mut components = 0;
    for root in 0..faces {
        if sign[root] != 0 {
            continue;
        }
        components += 1;
        sign[root] = 1;
        let mut stack = vec![root];
        while let Some(f) = stack.pop() {
            for &(g, r) in &adj[f] {
                let want = sign[f] * r;
                if sign[g] == 0 {
                    sign[g] = want;
                    stack.push(g);
                } else if sign[g] != want {
                    consistent = false;
                }
            }
        }
    }
    (consistent, components)
}

/// Stacks one standard saddle per path vertex in `T × [0, 1]` and glues
/// level `k` to level `0` through the monodromy.
pub fn build_surface(path: &EdgePath, monodromy: &MatSL2) -> Result<SurfaceComplex> {
    if path.monodromy() != monodromy {
        return Err(Error::InvalidPath("path was enumerated for a different monodromy".into()));
    }
    path.check_adjacency()?;
    // One period of the path; v_{i+k} = A·v_i.
    let k = path.period();
    let closing = monodromy;
    let slopes: Vec<Slope> = (0..=k)
        .map(|i| {
            if i < k {
                path.vertices()[i].clone()
            } else {
                closing.apply_to_slope(&path.vertices()[0])
            }
        })
        .collect();
    let saddles: Vec<SaddlePiece> = (0..k)
        .map(|i| SaddlePiece::standard(i, &slopes[i], &slopes[i + 1]))
        .collect::<Result<_>>()?;

    // A carries the canonical vector of v_0 to ±(canonical vector of v_k).
    let v0 = slopes[0].vector();
    let image = closing.apply_to_vector(&v0);
    let flip: i8 = if image == slopes[k].vector() { 1 } else { -1 };

    let mut horizontal: BTreeMap<ArcCopy, Vec<(Incidence, i8)>> = BTreeMap::new();
    let mut edges = Vec::new();
    for (f, saddle) in saddles.iter().enumerate() {
        for (t, edge) in saddle.edges.iter().enumerate() {
            let inc = Incidence {
                face: f,
                from_corner: 8 * f + t,
                to_corner: 8 * f + (t + 1) % 8,
                forward: edge.forward,
            };
            match &edge.arc {
                None => edges.push(ComplexEdge {
                    incidences: vec![inc],
                    coorientation: 0,
                }),
                Some(copy) if copy.level == k => {
                    // Pull the top level back to level 0: sides and
                    // directions are measured against A·v_0 = flip·v_k.
                    let key = ArcCopy {
                        level: 0,
                        slope: slopes[0].clone(),
                        side: copy.side * flip,
                    };
                    let inc = Incidence {
                        forward: edge.forward == (flip > 0),
                        ..inc
                    };
                    horizontal
                        .entry(key)
                        .or_default()
                        .push((inc, edge.face_side * flip));
                }
                Some(copy) => {
                    horizontal
                        .entry(copy.clone())
                        .or_default()
                        .push((inc, edge.face_side));
                }
            }
        }
    }
    for (copy, incs) in horizontal {
        let coorientation = match incs.as_slice() {
            [(_, sa), (_, sb)] => -sa * sb,
            _ => {
                return Err(Error::Internal(format!(
                    "arc copy {copy:?} bounds {} saddles",
                    incs.len()
                )))
            }
        };
        edges.push(ComplexEdge {
            incidences: incs.into_iter().map(|(inc, _)| inc).collect(),
            coorientation,
        });
    }

    let mut complex = SurfaceComplex::assemble(k, k, 8 * k, edges, true)?;
    complex.saddles = saddles;
    if complex.sided == Sidedness::OneSided {
        complex.orientation_double = Some(Box::new(complex.double()?));
    }
    Ok(complex)
}

pub fn sidedness(c: &SurfaceComplex) -> Sidedness {
    c.sided
}

/// Characteristic submanifold of the complement of `S_γ`: `k` square
/// neighbourhoods and `k` Seifert fibred solid tori, plus one I-bundle
/// handlebody when `k` is odd. The guts are empty, so the volume lower
/// bound `-2·V₃·χ(Guts)` vanishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GutsReport {
    k: usize,
    parity: Parity,
    square_neighborhoods: usize,
    seifert_solid_tori: usize,
    handlebody_ibundle: usize,
    guts_empty: bool,
    chi_surface: i64,
    agol_lower_bound: f64,
}

impl GutsReport {
    /// Instantiates the decomposition for period `k`, rejecting a surface
    /// Euler characteristic that disagrees with it.
    pub fn new(k: usize, chi_surface: i64) -> Result<GutsReport> {
        let parity = Parity::of(k);
        let (handlebody, expected) = match parity {
            Parity::Even => (0, -(k as i64)),
            Parity::Odd => (1, -2 * k as i64),
        };
        if chi_surface != expected {
            return Err(Error::Internal(format!(
                "χ(S_γ) = {chi_surface} but period {k} requires {expected}"
            )));
        }
        Ok(GutsReport {
            k,
            parity,
            square_neighborhoods: k,
            seifert_solid_tori: k,
            handlebody_ibundle: handlebody,
            guts_empty: true,
            chi_surface,
            agol_lower_bound: 0.0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }
    pub fn square_neighborhoods(&self) -> usize {
        self.square_neighborhoods
    }
    pub fn seifert_solid_tori(&self) -> usize {
        self.seifert_solid_tori
    }
    pub fn handlebody_ibundle(&self) -> usize {
        self.handlebody_ibundle
    }
    pub fn guts_empty(&self) -> bool {
        self.guts_empty
    }
    pub fn chi_surface(&self) -> i64 {
        self.chi_surface
    }
    pub fn agol_lower_bound(&self) -> f64 {
        self.agol_lower_bound
    }
}

/// Builds `S_γ` and reports the decomposition of its complement.
pub fn guts_report(path: &EdgePath) -> Result<GutsReport> {
    let surface = build_surface(path, path.monodromy())?;
    GutsReport::new(path.period(), surface.s_gamma().chi)
}

/// Counts cells of each dimension; handy for cross-checks in tests.
pub fn cell_counts(c: &SurfaceComplex) -> (usize, usize, usize) {
    (c.vertex_count, c.edges.len(), c.faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::{build_strip, minimal_paths};
    use crate::sl2z::TwistWord;

    fn paths(syllables: Vec<(u64, u64)>) -> Vec<EdgePath> {
        minimal_paths(&build_strip(&TwistWord::positive(syllables).unwrap()))
    }

    #[test]
    fn model_saddle_edges_in_octagon_order() {
        let s = SaddlePiece::standard(0, &Slope::new(0, 1).unwrap(), &Slope::infinity()).unwrap();
        let labels: Vec<_> = s.edges.iter().map(|e| e.label).collect();
        assert_eq!(labels, ["l-", "p1", "m+", "p2", "l+", "p3", "m-", "p4"]);
        for (t, e) in s.edges.iter().enumerate() {
            let expected = match t {
                0 | 4 => EdgeRole::Bottom,
                2 | 6 => EdgeRole::Top,
                _ => EdgeRole::Vertical,
            };
            assert_eq!(e.role, expected);
            match e.role {
                EdgeRole::Bottom => assert_eq!(e.arc.as_ref().unwrap().slope, s.bottom_slope),
                EdgeRole::Top => assert_eq!(e.arc.as_ref().unwrap().slope, s.top_slope),
                EdgeRole::Vertical => assert!(e.arc.is_none()),
            }
        }
    }

    #[test]
    fn non_adjacent_slopes_rejected() {
        let err = SaddlePiece::standard(0, &Slope::new(0, 1).unwrap(), &Slope::new(2, 1).unwrap());
        assert!(matches!(err, Err(Error::InvalidPath(_))));
    }

    #[test]
    fn period_two_cell_count() {
        let ps = paths(vec![(1, 1), (1, 1)]);
        let p = ps.iter().find(|p| p.period() == 2).unwrap();
        let c = build_surface(p, p.monodromy()).unwrap();
        let (v, e, f) = cell_counts(&c);
        assert_eq!((v, e, f), (8, 12, 2));
        assert_eq!(v as i64 - e as i64 + f as i64, -2);
        assert_eq!(sidedness(&c), Sidedness::TwoSided);
        assert!(c.orientation_double().is_none());
    }

    #[test]
    fn odd_period_is_one_sided_with_two_sided_double() {
        let ps = paths(vec![(2, 1), (1, 2)]);
        let p = &ps[0];
        assert_eq!(p.period(), 3);
        let c = build_surface(p, p.monodromy()).unwrap();
        assert_eq!(c.sided, Sidedness::OneSided);
        assert_eq!(c.orientable, Some(false));
        assert_eq!(c.chi, -3);
        let d = c.orientation_double().unwrap();
        assert_eq!(d.sided, Sidedness::TwoSided);
        assert_eq!(d.chi, -6);
        assert_eq!(d.connected_components, 1);
    }

    #[test]
    fn period_one_paths_of_cat_map() {
        for p in paths(vec![(1, 1)]) {
            let c = build_surface(&p, p.monodromy()).unwrap();
            assert_eq!(c.chi, -1);
            assert_eq!(c.sided, Sidedness::OneSided);
            assert_eq!(c.boundary_components, 1);
            assert_eq!(c.s_gamma().chi, -2);
        }
    }

    #[test]
    fn every_interior_edge_bounds_two_faces() {
        for p in paths(vec![(3, 1), (1, 3)]) {
            let c = build_surface(&p, p.monodromy()).unwrap();
            assert_eq!(c.interior_edges, 2 * c.k);
            assert_eq!(c.boundary_edges, 4 * c.k);
            for e in &c.edges {
                assert!(matches!(e.incidences.len(), 1 | 2));
            }
        }
    }

    #[test]
    fn wrong_monodromy_rejected() {
        let p = &paths(vec![(1, 1)])[0];
        assert!(build_surface(p, &MatSL2::r_pow(3)).is_err());
    }

    #[test]
    fn guts_counts_follow_parity() {
        let even = &paths(vec![(1, 1), (1, 1)])[0];
        let g = guts_report(even).unwrap();
        assert_eq!(
            (g.square_neighborhoods(), g.seifert_solid_tori(), g.handlebody_ibundle()),
            (2, 2, 0)
        );
        assert_eq!(g.chi_surface(), -2);
        let odd = &paths(vec![(2, 1), (1, 2)])[0];
        let g = guts_report(odd).unwrap();
        assert_eq!(
            (g.square_neighborhoods(), g.seifert_solid_tori(), g.handlebody_ibundle()),
            (3, 3, 1)
        );
        assert!(g.guts_empty());
        assert_eq!(g.agol_lower_bound(), 0.0);
        assert_eq!(g.parity(), Parity::Odd);
    }

    #[test]
    fn inconsistent_chi_rejected() {
        assert!(GutsReport::new(2, -4).is_err());
        assert!(GutsReport::new(3, -6).is_ok());
    }
}
