//! Le-networks, their trivalent plabic reduction, faces and the boundary
//! measurement matrix.
//!
//! Embedding: box (r, c) sits at (c + 1, -(r + 1)); the source of row r at
//! (lambda_r + 0.5, -(r + 1)); the sink of column c at (c + 1, -(mu_c + 0.5)).
//! A split box puts its black half at +0.2 and its white half at -0.2 on both
//! axes. Edge directions at both endpoints are kept for the rotation system.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lecore::{BoundaryLabels, LeTableau, YoungDiagram};
use crate::linalg::{det, submatrix_cols, RationalMatrix};
use crate::num::{format_exact, to_f64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VertexKind {
    White,
    Black,
    Boundary,
    Raw,
}

/// Grid origin of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Site {
    Boundary(usize),
    Box { row: usize, col: usize },
    BlackHalf { row: usize, col: usize },
    WhiteHalf { row: usize, col: usize },
}

impl Site {
    pub fn cell(&self) -> Option<(usize, usize)> {
        match *self {
            Site::Boundary(_) => None,
            Site::Box { row, col } | Site::BlackHalf { row, col } | Site::WhiteHalf { row, col } => {
                Some((row, col))
            }
        }
    }

    fn order_key(&self) -> (usize, usize, usize, usize) {
        match *self {
            Site::Boundary(l) => (0, l, 0, 0),
            Site::Box { row, col } => (1, row, col, 0),
            Site::BlackHalf { row, col } => (1, row, col, 1),
            Site::WhiteHalf { row, col } => (1, row, col, 2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vertex {
    pub kind: VertexKind,
    pub site: Site,
    pub pos: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: BigRational,
    /// Direction of travel when leaving the tail.
    pub tail_dir: (i32, i32),
    /// Direction of travel when arriving at the head.
    pub head_dir: (i32, i32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlabicNetwork {
    diagram: YoungDiagram,
    labels: BoundaryLabels,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

fn angle(d: (f64, f64)) -> f64 {
    d.1.atan2(d.0)
}

impl PlabicNetwork {
    pub fn diagram(&self) -> &YoungDiagram {
        &self.diagram
    }

    pub fn n(&self) -> usize {
        self.diagram.n()
    }

    pub fn k(&self) -> usize {
        self.diagram.k()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.labels.row_source
    }

    pub fn is_source(&self, label: usize) -> bool {
        self.labels.is_source(label)
    }

    /// Vertex id of boundary label `j` (1-based).
    pub fn boundary_vertex(&self, label: usize) -> usize {
        label - 1
    }

    pub fn boundary_label(&self, v: usize) -> Option<usize> {
        match self.vertices[v].site {
            Site::Boundary(l) => Some(l),
            _ => None,
        }
    }

    pub fn in_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].head == v).collect()
    }

    pub fn out_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].tail == v).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.tail == v || e.head == v).count()
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].kind != VertexKind::Boundary)
    }

    pub fn count_kind(&self, kind: VertexKind) -> usize {
        self.vertices.iter().filter(|v| v.kind == kind).count()
    }

    /// Direction in which edge `e` leaves vertex `v`.
    pub fn direction_at(&self, e: usize, v: usize) -> (f64, f64) {
        let edge = &self.edges[e];
        if edge.tail == v {
            (edge.tail_dir.0 as f64, edge.tail_dir.1 as f64)
        } else {
            (-edge.head_dir.0 as f64, -edge.head_dir.1 as f64)
        }
    }

    /// Incident edges of an internal vertex in counterclockwise order starting
    /// from its distinguished edge: the unique incoming edge of a White
    /// vertex, the unique outgoing edge of a Black one.
    pub fn local_order(&self, v: usize) -> Option<[usize; 3]> {
        let ins = self.in_edges(v);
        let outs = self.out_edges(v);
        let (first, mut rest) = match self.vertices[v].kind {
            VertexKind::White if ins.len() == 1 && outs.len() == 2 => (ins[0], outs),
            VertexKind::Black if ins.len() == 2 && outs.len() == 1 => (outs[0], ins),
            _ => return None,
        };
        let a0 = angle(self.direction_at(first, v));
        let rel = |e: usize| (angle(self.direction_at(e, v)) - a0).rem_euclid(std::f64::consts::TAU);
        rest.sort_by(|&a, &b| rel(a).total_cmp(&rel(b)));
        Some([first, rest[0], rest[1]])
    }

    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let nv = self.vertices.len();
        let mut indeg = vec![0usize; nv];
        for e in &self.edges {
            indeg[e.head] += 1;
        }
        let mut stack: Vec<usize> = (0..nv).rev().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(nv);
        let mut outs: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for e in &self.edges {
            outs[e.tail].push(e.head);
        }
        while let Some(v) = stack.pop() {
            order.push(v);
            for &h in &outs[v] {
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    stack.push(h);
                }
            }
        }
        if order.len() != nv {
            return Err(Error::Invariant("network has a directed cycle".into()));
        }
        Ok(order)
    }

    /// Checks the trivalence and colour rules of a reduced network.
    pub fn check_trivalent(&self) -> Result<()> {
        for v in self.internal_vertices() {
            let ins = self.in_edges(v).len();
            let outs = self.out_edges(v).len();
            let ok = match self.vertices[v].kind {
                VertexKind::White => ins == 1 && outs == 2,
                VertexKind::Black => ins == 2 && outs == 1,
                _ => false,
            };
            if !ok {
                return Err(Error::Invariant(format!(
                    "vertex {v} ({:?}) has {ins} in / {outs} out",
                    self.vertices[v].kind
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, faces: Option<&[Face]>) -> serde_json::Value {
        let vertices: Vec<_> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| {
                serde_json::json!({
                    "id": id,
                    "kind": v.kind,
                    "site": v.site,
                    "pos": [v.pos.0, v.pos.1],
                })
            })
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| {
                serde_json::json!({
                    "id": id,
                    "tail": e.tail,
                    "head": e.head,
                    "weight": format_exact(&e.weight),
                })
            })
            .collect();
        let boundary: Vec<_> = (1..=self.n())
            .map(|l| serde_json::json!({"label": l, "vertex": l - 1, "source": self.is_source(l)}))
            .collect();
        let mut out = serde_json::json!({
            "n": self.n(),
            "k": self.k(),
            "vertices": vertices,
            "edges": edges,
            "boundary": boundary,
        });
        if let Some(faces) = faces {
            out["faces"] = serde_json::to_value(faces).unwrap_or_default();
        }
        out
    }
}

/// One Raw vertex per positive box, edges right-to-left along rows carrying
/// the box weight, unit edges downwards along columns.
pub fn build_le_network(t: &LeTableau) -> PlabicNetwork {
    let d = t.diagram().clone();
    let labels = d.labels();
    let k = d.k();
    let lam = d.rows().to_vec();
    let mut vertices = Vec::new();
    for l in 1..=d.n() {
        let pos = if let Some(r) = labels.row_source.iter().position(|&s| s == l) {
            (lam[r] as f64 + 0.5, -(r as f64 + 1.0))
        } else {
            let c = labels.col_sink.iter().position(|&s| s == l).unwrap();
            (c as f64 + 1.0, -(d.col_height(c) as f64 + 0.5))
        };
        vertices.push(Vertex {
            kind: VertexKind::Boundary,
            site: Site::Boundary(l),
            pos,
        });
    }
    let mut box_vertex = BTreeMap::new();
    for r in 0..k {
        for c in 0..lam[r] {
            if t.is_positive(r, c) {
                box_vertex.insert((r, c), vertices.len());
                vertices.push(Vertex {
                    kind: VertexKind::Raw,
                    site: Site::Box { row: r, col: c },
                    pos: (c as f64 + 1.0, -(r as f64 + 1.0)),
                });
            }
        }
    }
    let mut edges = Vec::new();
    let one = BigRational::one();
    for (&(r, c), &v) in &box_vertex {
        let right = (c + 1..lam[r]).find(|&cc| t.is_positive(r, cc));
        let from = match right {
            Some(cc) => box_vertex[&(r, cc)],
            None => labels.row_source[r] - 1,
        };
        edges.push(Edge {
            tail: from,
            head: v,
            weight: t.entry(r, c).weight().unwrap().clone(),
            tail_dir: (-1, 0),
            head_dir: (-1, 0),
        });
        let below = (r + 1..k).find(|&rr| lam[rr] > c && t.is_positive(rr, c));
        let to = match below {
            Some(rr) => box_vertex[&(rr, c)],
            None => labels.col_sink[c] - 1,
        };
        edges.push(Edge {
            tail: v,
            head: to,
            weight: one.clone(),
            tail_dir: (0, -1),
            head_dir: (0, -1),
        });
    }
    PlabicNetwork {
        diagram: d,
        labels,
        vertices,
        edges,
    }
}

/// Eliminates bivalent vertices, colours trivalent ones and splits each
/// four-valent vertex into a Black (north-east) and White (south-west) pair
/// joined by a unit edge.
pub fn make_trivalent(g: &PlabicNetwork) -> Result<PlabicNetwork> {
    let mut vertices: Vec<Option<Vertex>> = g.vertices.iter().cloned().map(Some).collect();
    let mut edges: Vec<Option<Edge>> = g.edges.iter().cloned().map(Some).collect();
    let raw: Vec<usize> = (0..g.vertices.len())
        .filter(|&v| g.vertices[v].kind == VertexKind::Raw)
        .collect();
    for v in raw {
        let ins: Vec<usize> = (0..edges.len())
            .filter(|&e| edges[e].as_ref().is_some_and(|x| x.head == v))
            .collect();
        let outs: Vec<usize> = (0..edges.len())
            .filter(|&e| edges[e].as_ref().is_some_and(|x| x.tail == v))
            .collect();
        match ins.len() + outs.len() {
            2 if ins.len() == 1 => {
                let a = edges[ins[0]].take().unwrap();
                let b = edges[outs[0]].take().unwrap();
                edges.push(Some(Edge {
                    tail: a.tail,
                    head: b.head,
                    weight: a.weight * b.weight,
                    tail_dir: a.tail_dir,
                    head_dir: b.head_dir,
                }));
                vertices[v] = None;
            }
            3 => {
                let vert = vertices[v].as_mut().unwrap();
                vert.kind = if ins.len() == 1 {
                    VertexKind::White
                } else {
                    VertexKind::Black
                };
            }
            4 if ins.len() == 2 => {
                let old = vertices[v].take().unwrap();
                let (row, col) = old.site.cell().unwrap();
                let (x, y) = old.pos;
                let black = vertices.len();
                vertices.push(Some(Vertex {
                    kind: VertexKind::Black,
                    site: Site::BlackHalf { row, col },
                    pos: (x + 0.2, y + 0.2),
                }));
                let white = vertices.len();
                vertices.push(Some(Vertex {
                    kind: VertexKind::White,
                    site: Site::WhiteHalf { row, col },
                    pos: (x - 0.2, y - 0.2),
                }));
                for &e in &ins {
                    edges[e].as_mut().unwrap().head = black;
                }
                for &e in &outs {
                    edges[e].as_mut().unwrap().tail = white;
                }
                edges.push(Some(Edge {
                    tail: black,
                    head: white,
                    weight: BigRational::one(),
                    tail_dir: (-1, -1),
                    head_dir: (-1, -1),
                }));
            }
            d => {
                return Err(Error::Invariant(format!(
                    "raw vertex {v} has degree {d} ({} in)",
                    ins.len()
                )))
            }
        }
    }
    let mut alive: Vec<usize> = (0..vertices.len()).filter(|&v| vertices[v].is_some()).collect();
    alive.sort_by_key(|&v| vertices[v].as_ref().unwrap().site.order_key());
    let mut remap = vec![usize::MAX; vertices.len()];
    for (new, &old) in alive.iter().enumerate() {
        remap[old] = new;
    }
    let new_vertices: Vec<Vertex> = alive.iter().map(|&v| vertices[v].clone().unwrap()).collect();
    let mut new_edges: Vec<Edge> = edges
        .into_iter()
        .flatten()
        .map(|mut e| {
            e.tail = remap[e.tail];
            e.head = remap[e.head];
            e
        })
        .collect();
    new_edges.sort_by(|a, b| {
        (a.tail, a.head)
            .cmp(&(b.tail, b.head))
            .then(angle((a.tail_dir.0 as f64, a.tail_dir.1 as f64)).total_cmp(&angle((
                b.tail_dir.0 as f64,
                b.tail_dir.1 as f64,
            ))))
    });
    let out = PlabicNetwork {
        diagram: g.diagram.clone(),
        labels: g.labels.clone(),
        vertices: new_vertices,
        edges: new_edges,
    };
    out.check_trivalent()?;
    out.topological_order()?;
    Ok(out)
}

/// Builds and reduces in one step.
pub fn trivalent_network(t: &LeTableau) -> Result<PlabicNetwork> {
    make_trivalent(&build_le_network(t))
}

/// A side of a face: a graph edge or the boundary arc from label j to j + 1
/// (j = n closes the circle).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    Edge(usize),
    Arc(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Dart {
    pub side: Side,
    /// Traversed along the edge orientation (tail to head, or j to j + 1).
    pub forward: bool,
}

impl Dart {
    pub fn reversed(self) -> Dart {
        Dart {
            side: self.side,
            forward: !self.forward,
        }
    }
}

/// A face of the network inside the disk. Darts are listed in the traced
/// order, which keeps the face on the left (counterclockwise).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Face {
    pub id: usize,
    pub darts: Vec<Dart>,
    pub finite: bool,
}

impl Face {
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.darts.iter().filter_map(|d| match d.side {
            Side::Edge(e) => Some(e),
            Side::Arc(_) => None,
        })
    }

    pub fn arcs(&self) -> impl Iterator<Item = usize> + '_ {
        self.darts.iter().filter_map(|d| match d.side {
            Side::Arc(j) => Some(j),
            Side::Edge(_) => None,
        })
    }
}

impl PlabicNetwork {
    /// (start, end) vertices of a dart.
    pub fn dart_ends(&self, d: Dart) -> (usize, usize) {
        let (t, h) = match d.side {
            Side::Edge(e) => (self.edges[e].tail, self.edges[e].head),
            Side::Arc(j) => (j - 1, j % self.n()),
        };
        if d.forward {
            (t, h)
        } else {
            (h, t)
        }
    }

    /// Darts leaving each vertex with their directions. The closing arc
    /// n -> 1 leaves n heading west and reaches 1 heading south.
    fn rotation(&self) -> Vec<Vec<(f64, Dart)>> {
        let mut rot: Vec<Vec<(f64, Dart)>> = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            rot[e.tail].push((
                angle(self.direction_at(i, e.tail)),
                Dart { side: Side::Edge(i), forward: true },
            ));
            rot[e.head].push((
                angle(self.direction_at(i, e.head)),
                Dart { side: Side::Edge(i), forward: false },
            ));
        }
        let n = self.n();
        for j in 1..=n {
            let a = j - 1;
            let b = j % n;
            let (leave, arrive) = if j == n {
                ((-1.0, 0.0), (0.0, -1.0))
            } else {
                let pa = self.vertices[a].pos;
                let pb = self.vertices[b].pos;
                let d = (pb.0 - pa.0, pb.1 - pa.1);
                (d, d)
            };
            rot[a].push((angle(leave), Dart { side: Side::Arc(j), forward: true }));
            rot[b].push((
                angle((-arrive.0, -arrive.1)),
                Dart { side: Side::Arc(j), forward: false },
            ));
        }
        for r in &mut rot {
            r.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        rot
    }
}

/// Traces faces with the planar rotation system. The outer face (outside the
/// disk) is dropped; the infinite face is the one bordering the closing arc.
/// Face 0 is infinite, finite faces touching the boundary follow in order of
/// their first boundary arc, internal faces last (top to bottom, left to right).
pub fn enumerate_faces(g: &PlabicNetwork) -> Result<Vec<Face>> {
    let rot = g.rotation();
    let mut seen = std::collections::HashSet::new();
    let mut traced: Vec<Vec<Dart>> = Vec::new();
    for list in &rot {
        for &(_, start) in list {
            if seen.contains(&start) {
                continue;
            }
            let mut face = Vec::new();
            let mut cur = start;
            while seen.insert(cur) {
                face.push(cur);
                let (_, w) = g.dart_ends(cur);
                let back = cur.reversed();
                let list = &rot[w];
                let idx = list
                    .iter()
                    .position(|&(_, d)| d == back)
                    .ok_or_else(|| Error::Invariant("rotation system is inconsistent".into()))?;
                cur = list[(idx + list.len() - 1) % list.len()].1;
            }
            if cur != start {
                return Err(Error::Invariant("face tracing did not close".into()));
            }
            traced.push(face);
        }
    }
    let n = g.n();
    let is_outer = |f: &Vec<Dart>| {
        f.len() == n && f.iter().all(|d| matches!(d.side, Side::Arc(_)) && d.forward)
    };
    let outer: Vec<usize> = (0..traced.len()).filter(|&i| is_outer(&traced[i])).collect();
    if outer.len() != 1 {
        return Err(Error::Invariant(format!("{} outer faces", outer.len())));
    }
    let v = g.vertices.len() as i64;
    let e = (g.edges.len() + n) as i64;
    let f = traced.len() as i64;
    if v - e + f != 2 {
        return Err(Error::Invariant(format!("Euler check failed: V={v} E={e} F={f}")));
    }
    traced.remove(outer[0]);
    let wrap = Dart { side: Side::Arc(n), forward: false };
    let inf = traced
        .iter()
        .position(|f| f.contains(&wrap))
        .ok_or_else(|| Error::Invariant("no infinite face".into()))?;
    let infinite = traced.remove(inf);
    let key = |f: &Vec<Dart>| -> (usize, f64, f64) {
        let first_arc = f
            .iter()
            .filter_map(|d| match d.side {
                Side::Arc(j) => Some(j),
                _ => None,
            })
            .min()
            .unwrap_or(usize::MAX);
        let pts: Vec<(f64, f64)> = f.iter().map(|&d| g.vertices[g.dart_ends(d).0].pos).collect();
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        (first_arc, -cy, cx)
    };
    traced.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.total_cmp(&kb.2))
    });
    let mut faces = vec![Face { id: 0, darts: infinite, finite: false }];
    for (i, darts) in traced.into_iter().enumerate() {
        faces.push(Face { id: i + 1, darts, finite: true });
    }
    Ok(faces)
}

/// Path sums from every vertex to every sink label, by dynamic programming
/// over the acyclic order. `reach[v][j - 1]` is the weighted number of paths
/// from v to sink j.
pub fn path_sums(g: &PlabicNetwork) -> Result<Vec<Vec<BigRational>>> {
    let order = g.topological_order()?;
    let n = g.n();
    let mut reach = vec![vec![BigRational::zero(); n]; g.vertices.len()];
    let mut outs: Vec<Vec<usize>> = vec![Vec::new(); g.vertices.len()];
    for (i, e) in g.edges.iter().enumerate() {
        outs[e.tail].push(i);
    }
    for &v in order.iter().rev() {
        if let Some(l) = g.boundary_label(v) {
            if !g.is_source(l) {
                reach[v][l - 1] = BigRational::one();
                continue;
            }
        }
        let mut acc = vec![BigRational::zero(); n];
        for &e in &outs[v] {
            let edge = &g.edges[e];
            for (j, val) in reach[edge.head].iter().enumerate() {
                if !val.is_zero() {
                    acc[j] += &edge.weight * val;
                }
            }
        }
        reach[v] = acc;
    }
    Ok(reach)
}

/// Every directed path from boundary vertex `label` to a sink, as edge lists.
pub fn enumerate_paths(g: &PlabicNetwork, label: usize) -> Vec<Vec<usize>> {
    let mut outs: Vec<Vec<usize>> = vec![Vec::new(); g.vertices.len()];
    for (i, e) in g.edges.iter().enumerate() {
        outs[e.tail].push(i);
    }
    let mut paths = Vec::new();
    let mut stack = vec![(g.boundary_vertex(label), Vec::new())];
    while let Some((v, path)) = stack.pop() {
        if !path.is_empty() && outs[v].is_empty() {
            paths.push(path);
            continue;
        }
        for &e in &outs[v] {
            let mut p = path.clone();
            p.push(e);
            stack.push((g.edges[e].head, p));
        }
    }
    paths.sort();
    paths
}

pub fn path_weight(g: &PlabicNetwork, path: &[usize]) -> BigRational {
    path.iter().fold(BigRational::one(), |acc, &e| acc * &g.edges[e].weight)
}

/// How path sums are obtained. Explicit enumeration is exponential and is
/// kept as an oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathMethod {
    Dynamic,
    Explicit,
}

/// A_{l, i_r} = delta_{lr}; A_{lj} = (-1)^sigma times the path sum from
/// source i_l to sink j, sigma = number of sources strictly between them.
pub fn boundary_measurement(g: &PlabicNetwork) -> Result<RationalMatrix> {
    boundary_measurement_with(g, PathMethod::Dynamic)
}

pub fn boundary_measurement_with(g: &PlabicNetwork, method: PathMethod) -> Result<RationalMatrix> {
    let n = g.n();
    let pivots = g.pivots().to_vec();
    let sums: Vec<Vec<BigRational>> = match method {
        PathMethod::Dynamic => {
            let reach = path_sums(g)?;
            pivots.iter().map(|&p| reach[g.boundary_vertex(p)].clone()).collect()
        }
        PathMethod::Explicit => {
            g.topological_order()?;
            pivots
                .iter()
                .map(|&p| {
                    let mut row = vec![BigRational::zero(); n];
                    for path in enumerate_paths(g, p) {
                        let last = g.edges[*path.last().unwrap()].head;
                        let j = g.boundary_label(last).unwrap();
                        row[j - 1] += path_weight(g, &path);
                    }
                    row
                })
                .collect()
        }
    };
    let mut a = vec![vec![BigRational::zero(); n]; pivots.len()];
    for (l, &p) in pivots.iter().enumerate() {
        for j in 1..=n {
            if g.is_source(j) {
                if j == p {
                    a[l][j - 1] = BigRational::one();
                }
                continue;
            }
            let s = &sums[l][j - 1];
            if s.is_zero() {
                continue;
            }
            let (lo, hi) = if p < j { (p, j) } else { (j, p) };
            let sigma = pivots.iter().filter(|&&q| lo < q && q < hi).count();
            a[l][j - 1] = if sigma % 2 == 0 { s.clone() } else { -s.clone() };
        }
    }
    Ok(a)
}

/// All maximal minors keyed by 1-based column labels.
pub fn all_minors(a: &[Vec<BigRational>]) -> BTreeMap<Vec<usize>, BigRational> {
    let k = a.len();
    let n = a.first().map_or(0, Vec::len);
    let subsets = k_subsets(n, k);
    subsets
        .into_par_iter()
        .map(|cols| {
            let m = submatrix_cols(a, &cols);
            (cols.iter().map(|c| c + 1).collect(), det(&m))
        })
        .collect()
}

/// k-subsets of 0..n in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn matrix_to_f64(a: &[Vec<BigRational>]) -> Vec<Vec<f64>> {
    a.iter().map(|r| r.iter().map(to_f64).collect()).collect()
}
