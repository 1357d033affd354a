//! The dual MM-curve of a trivalent network: one rational component per
//! internal vertex plus Gamma_0, glued at one real double point per edge.
//!
//! Local coordinates: on a White component the incoming edge sits at
//! infinity and the outgoing edges, counterclockwise from it, at 0 and 1; on
//! a Black component the outgoing edge sits at infinity and the incoming
//! edges at 0 and 1. Gamma_0 carries kappa_j at boundary vertex j and P_0 at
//! infinity.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{inverse_unimodular, mat_mul_i64};
use crate::network::{enumerate_faces, Dart, Face, PlabicNetwork, Side, Site, VertexKind};
use crate::proj::{CyclicInterval, Proj};
use crate::soliton::Phases;

pub const GAMMA0: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ComponentKind {
    Gamma0,
    White,
    Black,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub id: usize,
    pub kind: ComponentKind,
    /// Network vertex, None for Gamma_0.
    pub vertex: Option<usize>,
    pub site: Option<Site>,
}

/// A point on a component in its local coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub component: usize,
    pub coord: Proj,
}

impl CurvePoint {
    pub fn same(&self, other: &CurvePoint) -> bool {
        self.component == other.component && self.coord.same(&other.coord)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoublePoint {
    pub edge: usize,
    pub tail: CurvePoint,
    pub head: CurvePoint,
}

impl DoublePoint {
    pub fn other(&self, p: &CurvePoint) -> Option<CurvePoint> {
        if self.tail.same(p) {
            Some(self.head)
        } else if self.head.same(p) {
            Some(self.tail)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug)]
pub struct MMCurve {
    network: PlabicNetwork,
    faces: Vec<Face>,
    phases: Phases,
    pub components: Vec<Component>,
    vertex_component: Vec<Option<usize>>,
    /// Edges at infinity, 0, 1 for each internal vertex.
    local: Vec<Option<[usize; 3]>>,
    pub double_points: Vec<DoublePoint>,
}

impl MMCurve {
    pub fn network(&self) -> &PlabicNetwork {
        &self.network
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn phases(&self) -> &Phases {
        &self.phases
    }

    pub fn genus(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn component_of_vertex(&self, v: usize) -> Option<usize> {
        self.vertex_component[v]
    }

    pub fn whites(&self) -> Vec<usize> {
        self.components_of(ComponentKind::White)
    }

    pub fn blacks(&self) -> Vec<usize> {
        self.components_of(ComponentKind::Black)
    }

    fn components_of(&self, kind: ComponentKind) -> Vec<usize> {
        self.components.iter().filter(|c| c.kind == kind).map(|c| c.id).collect()
    }

    /// Edges at (infinity, 0, 1) of an internal component.
    pub fn local_edges(&self, component: usize) -> Option<[usize; 3]> {
        self.components[component].vertex.and_then(|v| self.local[v])
    }

    /// The point of edge `e` on the component of its endpoint `v`.
    pub fn point_at(&self, e: usize, v: usize) -> CurvePoint {
        if let Some(l) = self.network.boundary_label(v) {
            return CurvePoint {
                component: GAMMA0,
                coord: Proj::finite(self.phases.get(l - 1)),
            };
        }
        let order = self.local[v].expect("internal vertex without local order");
        let coord = if order[0] == e {
            Proj::INFINITY
        } else if order[1] == e {
            Proj::ZERO
        } else {
            debug_assert_eq!(order[2], e);
            Proj::ONE
        };
        CurvePoint {
            component: self.vertex_component[v].unwrap(),
            coord,
        }
    }

    /// Double points lying on `component`, with the local coordinate there.
    pub fn nodes_on(&self, component: usize) -> Vec<(usize, CurvePoint)> {
        let mut out = Vec::new();
        for dp in &self.double_points {
            if dp.tail.component == component {
                out.push((dp.edge, dp.tail));
            }
            if dp.head.component == component {
                out.push((dp.edge, dp.head));
            }
        }
        out
    }

    /// Boundary labels without an incident edge: marked points of Gamma_0
    /// that are not double points.
    pub fn isolated_labels(&self) -> Vec<usize> {
        (1..=self.network.n())
            .filter(|&l| self.network.degree(self.network.boundary_vertex(l)) == 0)
            .collect()
    }

    /// The two faces on either side of each edge: (left of the forward dart,
    /// left of the reverse dart).
    pub fn edge_faces(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(usize::MAX, usize::MAX); self.network.edges.len()];
        for f in &self.faces {
            for d in &f.darts {
                if let Side::Edge(e) = d.side {
                    if d.forward {
                        out[e].0 = f.id;
                    } else {
                        out[e].1 = f.id;
                    }
                }
            }
        }
        out
    }

    /// Face containing the given Gamma_0 arc (j, j + 1), or the closing arc.
    pub fn face_of_arc(&self, j: usize) -> usize {
        let target = Dart { side: Side::Arc(j), forward: false };
        self.faces.iter().find(|f| f.darts.contains(&target)).map(|f| f.id).unwrap()
    }

    pub fn report(&self) -> serde_json::Value {
        let dps: Vec<_> = self
            .double_points
            .iter()
            .map(|d| {
                serde_json::json!({
                    "edge": d.edge,
                    "tail": {"component": d.tail.component, "coord": proj_json(&d.tail.coord)},
                    "head": {"component": d.head.component, "coord": proj_json(&d.head.coord)},
                })
            })
            .collect();
        serde_json::json!({
            "genus": self.genus(),
            "components": self.components,
            "double_points": dps,
            "isolated_boundary": self.isolated_labels(),
            "kappa": self.phases.values().iter().map(|x| crate::num::sig17(*x)).collect::<Vec<_>>(),
        })
    }
}

pub fn proj_json(p: &Proj) -> serde_json::Value {
    if p.is_infinite() {
        serde_json::json!("inf")
    } else {
        serde_json::json!(crate::num::sig17(p.value()))
    }
}

pub fn dualize(g: &PlabicNetwork, phases: &Phases) -> Result<MMCurve> {
    if phases.len() != g.n() {
        return Err(Error::Phases(format!(
            "{} phases for a network with n = {}",
            phases.len(),
            g.n()
        )));
    }
    g.check_trivalent()?;
    let faces = enumerate_faces(g)?;
    let mut components = vec![Component {
        id: GAMMA0,
        kind: ComponentKind::Gamma0,
        vertex: None,
        site: None,
    }];
    let mut vertex_component = vec![None; g.vertices.len()];
    let mut local = vec![None; g.vertices.len()];
    for v in g.internal_vertices() {
        let kind = match g.vertices[v].kind {
            VertexKind::White => ComponentKind::White,
            VertexKind::Black => ComponentKind::Black,
            k => return Err(Error::Invariant(format!("vertex {v} has kind {k:?}"))),
        };
        vertex_component[v] = Some(components.len());
        local[v] = Some(
            g.local_order(v)
                .ok_or_else(|| Error::Invariant(format!("vertex {v} is not trivalent")))?,
        );
        components.push(Component {
            id: components.len(),
            kind,
            vertex: Some(v),
            site: Some(g.vertices[v].site),
        });
    }
    let mut curve = MMCurve {
        network: g.clone(),
        faces,
        phases: phases.clone(),
        components,
        vertex_component,
        local,
        double_points: Vec::new(),
    };
    curve.double_points = (0..g.edges.len())
        .map(|e| DoublePoint {
            edge: e,
            tail: curve.point_at(e, g.edges[e].tail),
            head: curve.point_at(e, g.edges[e].head),
        })
        .collect();
    Ok(curve)
}

/// An open real arc of one component traversed from `start` to `end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OvalArc {
    pub component: usize,
    pub start: Proj,
    pub end: Proj,
    pub span: CyclicInterval,
}

impl OvalArc {
    pub fn contains(&self, p: &CurvePoint) -> bool {
        p.component == self.component && self.span.contains(&p.coord)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Oval {
    /// Equal to the face id; 0 is the infinite oval.
    pub id: usize,
    pub arcs: Vec<OvalArc>,
}

impl Oval {
    pub fn contains(&self, p: &CurvePoint) -> bool {
        self.arcs.iter().any(|a| a.contains(p))
    }
}

fn gamma0_arc(c: &MMCurve, j: usize, forward: bool) -> OvalArc {
    let n = c.network.n();
    let a = Proj::finite(c.phases.get(j - 1));
    let b = Proj::finite(c.phases.get(j % n));
    // increasing from kappa_j; the closing arc wraps through P_0
    let span = CyclicInterval::new(a, b);
    let (start, end) = if forward { (a, b) } else { (b, a) };
    OvalArc {
        component: GAMMA0,
        start,
        end,
        span,
    }
}

fn corner_arc(c: &MMCurve, v: usize, e_in: usize, e_out: usize) -> OvalArc {
    let p = c.point_at(e_in, v);
    let q = c.point_at(e_out, v);
    let third = [Proj::INFINITY, Proj::ZERO, Proj::ONE]
        .into_iter()
        .find(|x| !x.same(&p.coord) && !x.same(&q.coord))
        .unwrap();
    OvalArc {
        component: p.component,
        start: p.coord,
        end: q.coord,
        span: CyclicInterval::avoiding(p.coord, q.coord, third),
    }
}

fn dart_edge(d: &Dart) -> Option<usize> {
    match d.side {
        Side::Edge(e) => Some(e),
        Side::Arc(_) => None,
    }
}

fn glued(c: &MMCurve, a: &OvalArc, b: &OvalArc) -> bool {
    let pa = CurvePoint { component: a.component, coord: a.end };
    let pb = CurvePoint { component: b.component, coord: b.start };
    if c.double_points.iter().any(|dp| dp.other(&pa).is_some_and(|o| o.same(&pb))) {
        return true;
    }
    a.component == GAMMA0
        && b.component == GAMMA0
        && pa.coord.same(&pb.coord)
        && c.isolated_labels()
            .iter()
            .any(|&l| Proj::finite(c.phases.get(l - 1)).same(&pa.coord))
}

/// One oval per face, as the chain of real arcs met when walking along the
/// face boundary.
pub fn build_ovals(c: &MMCurve, faces: &[Face]) -> Result<Vec<Oval>> {
    let g = &c.network;
    let mut ovals = Vec::with_capacity(faces.len());
    for f in faces {
        let mut arcs = Vec::new();
        let m = f.darts.len();
        for i in 0..m {
            let d = f.darts[i];
            if let Side::Arc(j) = d.side {
                arcs.push(gamma0_arc(c, j, d.forward));
            }
            let (_, w) = g.dart_ends(d);
            if g.boundary_label(w).is_none() {
                let next = f.darts[(i + 1) % m];
                let (Some(e_in), Some(e_out)) = (dart_edge(&d), dart_edge(&next)) else {
                    return Err(Error::Invariant("arc dart at an internal vertex".into()));
                };
                arcs.push(corner_arc(c, w, e_in, e_out));
            }
        }
        for i in 0..arcs.len() {
            let next = &arcs[(i + 1) % arcs.len()];
            if !glued(c, &arcs[i], next) {
                return Err(Error::Invariant(format!(
                    "oval {} does not close between arcs {i} and {}",
                    f.id,
                    (i + 1) % arcs.len()
                )));
            }
        }
        if !f.finite && !arcs.iter().any(|a| a.component == GAMMA0 && a.span.contains(&Proj::INFINITY)) {
            return Err(Error::Invariant("infinite oval misses P_0".into()));
        }
        ovals.push(Oval { id: f.id, arcs });
    }
    Ok(ovals)
}

/// A corner of a b-cycle: the cycle arrives at `vertex` along `entry` and
/// leaves along `exit`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Corner {
    pub vertex: usize,
    pub entry: Dart,
    pub exit: Dart,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleBasis {
    /// Clockwise darts of the b-cycle of face l + 1.
    pub b: Vec<Vec<Dart>>,
    /// Coefficients of c_e in the a-basis, one row per edge.
    pub relations: Vec<Vec<i64>>,
    /// Edges whose c-cycles span the a-cycles.
    pub tree_edges: Vec<usize>,
    /// a = M c over `tree_edges`.
    pub m: Vec<Vec<i64>>,
}

impl CycleBasis {
    pub fn genus(&self) -> usize {
        self.b.len()
    }

    /// Corners of b_l (l is 1-based).
    pub fn corners(&self, c: &MMCurve, l: usize) -> Vec<Corner> {
        let darts = &self.b[l - 1];
        let m = darts.len();
        (0..m)
            .map(|i| {
                let entry = darts[i];
                let exit = darts[(i + 1) % m];
                Corner {
                    vertex: c.network.dart_ends(entry).1,
                    entry,
                    exit,
                }
            })
            .collect()
    }

    /// a_j as integer combination of all c-cycles, keyed by edge.
    pub fn a_in_c(&self, j: usize) -> BTreeMap<usize, i64> {
        let mut out = BTreeMap::new();
        for (i, &e) in self.tree_edges.iter().enumerate() {
            let coef = self.m[j - 1][i];
            if coef != 0 {
                *out.entry(e).or_insert(0) += coef;
            }
        }
        out
    }
}

/// Residues of the differential attached to a clockwise face cycle, by
/// component: -1 where the cycle enters a component, +1 where it leaves.
fn cycle_residues(c: &MMCurve, darts: &[Dart]) -> BTreeMap<usize, Vec<(Proj, i64)>> {
    let g = &c.network;
    let mut res: BTreeMap<usize, Vec<(Proj, i64)>> = BTreeMap::new();
    let mut add = |p: CurvePoint, r: i64| {
        let list = res.entry(p.component).or_default();
        if let Some(entry) = list.iter_mut().find(|(q, _)| q.same(&p.coord)) {
            entry.1 += r;
        } else {
            list.push((p.coord, r));
        }
    };
    let m = darts.len();
    for i in 0..m {
        let entry = darts[i];
        let exit = darts[(i + 1) % m];
        let v = g.dart_ends(entry).1;
        if let Some(e) = dart_edge(&entry) {
            add(c.point_at(e, v), -1);
        }
        if let Some(e) = dart_edge(&exit) {
            add(c.point_at(e, v), 1);
        }
    }
    for list in res.values_mut() {
        list.retain(|(_, r)| *r != 0);
    }
    res.retain(|_, l| !l.is_empty());
    res
}

fn clockwise(face: &Face) -> Vec<Dart> {
    face.darts.iter().rev().map(|d| d.reversed()).collect()
}

fn relation_matrix(c: &MMCurve, b: &[Vec<Dart>]) -> Vec<Vec<i64>> {
    let g = c.genus();
    let residues: Vec<_> = b.iter().map(|d| cycle_residues(c, d)).collect();
    (0..c.network.edges.len())
        .map(|e| {
            let head = c.double_points[e].head;
            (0..g)
                .map(|k| {
                    residues[k]
                        .get(&head.component)
                        .and_then(|l| l.iter().find(|(q, _)| q.same(&head.coord)))
                        .map_or(0, |(_, r)| *r)
                })
                .collect()
        })
        .collect()
}

/// Cycle basis with the c-edges taken from a breadth-first spanning tree of
/// the dual graph rooted at the infinite face.
pub fn build_cycles(c: &MMCurve) -> Result<CycleBasis> {
    let faces = c.faces();
    let ef = c.edge_faces();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); faces.len()];
    for (e, &(a, b)) in ef.iter().enumerate() {
        if a != b {
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
    }
    for l in &mut adj {
        l.sort();
    }
    let mut tree = vec![None; faces.len()];
    let mut seen = vec![false; faces.len()];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(f) = queue.pop_front() {
        for &(h, e) in &adj[f] {
            if !seen[h] {
                seen[h] = true;
                tree[h] = Some(e);
                queue.push_back(h);
            }
        }
    }
    let edges: Option<Vec<usize>> = tree[1..].iter().copied().collect();
    let edges = edges.ok_or_else(|| Error::Invariant("dual graph is disconnected".into()))?;
    build_cycles_with(c, &edges)
}

/// Cycle basis whose a-cycles are expressed through the c-cycles of the
/// given g edges.
pub fn build_cycles_with(c: &MMCurve, tree_edges: &[usize]) -> Result<CycleBasis> {
    let g = c.genus();
    if tree_edges.len() != g {
        return Err(Error::Input(format!("need {g} edges, got {}", tree_edges.len())));
    }
    let b: Vec<Vec<Dart>> = c.faces()[1..].iter().map(clockwise).collect();
    let relations = relation_matrix(c, &b);
    let pt: Vec<Vec<i64>> = tree_edges.iter().map(|&e| relations[e].clone()).collect();
    // c_T = P_T a, so a = P_T^{-1} c_T
    let m = inverse_unimodular(&pt).ok_or_else(|| {
        Error::Invariant(format!("c-cycles of edges {tree_edges:?} are not a unimodular basis"))
    })?;
    Ok(CycleBasis {
        b,
        relations,
        tree_edges: tree_edges.to_vec(),
        m,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Differential {
    /// 1-based index l of the b-cycle.
    pub index: usize,
    /// Poles and residues by component; absent components carry zero.
    pub poles: BTreeMap<usize, Vec<(Proj, i64)>>,
}

impl Differential {
    pub fn residue_at(&self, p: &CurvePoint) -> i64 {
        self.poles
            .get(&p.component)
            .and_then(|l| l.iter().find(|(q, _)| q.same(&p.coord)))
            .map_or(0, |(_, r)| *r)
    }

    pub fn on(&self, component: usize) -> &[(Proj, i64)] {
        self.poles.get(&component).map_or(&[], Vec::as_slice)
    }

    pub fn is_zero_on(&self, component: usize) -> bool {
        self.on(component).is_empty()
    }
}

pub fn build_differentials(c: &MMCurve, cb: &CycleBasis) -> Result<Vec<Differential>> {
    let ws: Vec<Differential> = cb
        .b
        .iter()
        .enumerate()
        .map(|(i, darts)| Differential {
            index: i + 1,
            poles: cycle_residues(c, darts),
        })
        .collect();
    for w in &ws {
        for (comp, poles) in &w.poles {
            if poles.iter().map(|(_, r)| r).sum::<i64>() != 0 {
                return Err(Error::Invariant(format!(
                    "residues of omega_{} on component {comp} do not sum to zero",
                    w.index
                )));
            }
        }
    }
    let periods = a_periods(&ws, cb, c);
    for (j, row) in periods.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            if x != i64::from(j == k) {
                return Err(Error::Invariant(format!(
                    "a-period ({}, {}) is {x} x 2 pi i",
                    j + 1,
                    k + 1
                )));
            }
        }
    }
    Ok(ws)
}

/// Periods of omega_k over a_j in units of 2 pi i. The period over c_e is
/// the residue at the head-side point of the double point of e.
pub fn a_periods(ws: &[Differential], cb: &CycleBasis, c: &MMCurve) -> Vec<Vec<i64>> {
    let c_periods: Vec<Vec<i64>> = cb
        .tree_edges
        .iter()
        .map(|&e| {
            let head = c.double_points[e].head;
            ws.iter().map(|w| w.residue_at(&head)).collect()
        })
        .collect();
    mat_mul_i64(&cb.m, &c_periods)
}

/// Everything derived from a network and phases.
#[derive(Clone, Debug)]
pub struct CurveBundle {
    pub curve: MMCurve,
    pub ovals: Vec<Oval>,
    pub cycles: CycleBasis,
    pub differentials: Vec<Differential>,
}

impl CurveBundle {
    pub fn new(g: &PlabicNetwork, phases: &Phases) -> Result<Self> {
        let curve = dualize(g, phases)?;
        let ovals = build_ovals(&curve, curve.faces())?;
        let cycles = build_cycles(&curve)?;
        let differentials = build_differentials(&curve, &cycles)?;
        Ok(CurveBundle {
            curve,
            ovals,
            cycles,
            differentials,
        })
    }
}
