//! Marked vertex sets on Schubert Le-graphs: closure, exclusion, face
//! counting, and an exhaustive check that no closed marking is compatible
//! with one divisor point per finite oval.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lecore::{is_schubert_positive, LeTableau};
use crate::network::{enumerate_faces, trivalent_network, Face, PlabicNetwork, Side, VertexKind};

pub const DEFAULT_MAX_WHITES: usize = 12;

/// A set of marked internal vertices of a trivalent network.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Marking {
    pub vertices: BTreeSet<usize>,
}

impl Marking {
    pub fn new(vertices: impl IntoIterator<Item = usize>) -> Self {
        Marking {
            vertices: vertices.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    /// Edges with at least one marked end.
    pub fn edges(&self, g: &PlabicNetwork) -> BTreeSet<usize> {
        g.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| self.contains(e.tail) || self.contains(e.head))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn whites(&self, g: &PlabicNetwork) -> Vec<usize> {
        self.vertices
            .iter()
            .copied()
            .filter(|&v| g.vertices[v].kind == VertexKind::White)
            .collect()
    }
}

/// A trivalent Le-graph with its faces and undirected adjacency.
#[derive(Clone, Debug)]
pub struct MarkingContext {
    pub network: PlabicNetwork,
    pub faces: Vec<Face>,
    neighbours: Vec<BTreeSet<usize>>,
    whites: Vec<usize>,
    blacks: Vec<usize>,
}

impl MarkingContext {
    pub fn new(g: &PlabicNetwork) -> Result<Self> {
        let faces = enumerate_faces(g)?;
        let mut neighbours = vec![BTreeSet::new(); g.vertices.len()];
        for e in &g.edges {
            neighbours[e.tail].insert(e.head);
            neighbours[e.head].insert(e.tail);
        }
        let of = |k| (0..g.vertices.len()).filter(|&v| g.vertices[v].kind == k).collect();
        Ok(MarkingContext {
            network: g.clone(),
            faces,
            neighbours,
            whites: of(VertexKind::White),
            blacks: of(VertexKind::Black),
        })
    }

    pub fn from_tableau(t: &LeTableau) -> Result<Self> {
        Self::new(&trivalent_network(t)?)
    }

    pub fn whites(&self) -> &[usize] {
        &self.whites
    }

    pub fn blacks(&self) -> &[usize] {
        &self.blacks
    }

    pub fn neighbours(&self, v: usize) -> &BTreeSet<usize> {
        &self.neighbours[v]
    }

    fn is_white(&self, v: usize) -> bool {
        self.network.vertices[v].kind == VertexKind::White
    }

    fn is_black(&self, v: usize) -> bool {
        self.network.vertices[v].kind == VertexKind::Black
    }

    fn cell(&self, v: usize) -> (usize, usize) {
        self.network.vertices[v].site.cell().expect("internal vertex without a cell")
    }
}

/// Least fixed point of: every Black neighbour of a marked White is marked;
/// a White with at least two marked neighbours is marked. Boundary vertices
/// in the seed are dropped.
pub fn closure(ctx: &MarkingContext, seed: &Marking) -> Marking {
    let mut m: BTreeSet<usize> = seed
        .vertices
        .iter()
        .copied()
        .filter(|&v| ctx.is_white(v) || ctx.is_black(v))
        .collect();
    loop {
        let mut grown = false;
        for &w in &ctx.whites {
            if m.contains(&w) {
                for &b in &ctx.neighbours[w] {
                    if ctx.is_black(b) && m.insert(b) {
                        grown = true;
                    }
                }
            } else if ctx.neighbours[w].iter().filter(|u| m.contains(u)).count() >= 2 {
                m.insert(w);
                grown = true;
            }
        }
        if !grown {
            return Marking { vertices: m };
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExclusionVerdict {
    pub passes: bool,
    /// Marked Whites in the top row or leftmost in their row.
    pub witnesses: Vec<usize>,
}

/// Whites that never lie in the marked set: those in the top row and the
/// leftmost White of every row.
pub fn excluded_whites(ctx: &MarkingContext) -> BTreeSet<usize> {
    let mut leftmost: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for &w in &ctx.whites {
        let (r, c) = ctx.cell(w);
        let e = leftmost.entry(r).or_insert((c, w));
        if c < e.0 {
            *e = (c, w);
        }
    }
    ctx.whites
        .iter()
        .copied()
        .filter(|&w| ctx.cell(w).0 == 0 || leftmost[&ctx.cell(w).0].1 == w)
        .collect()
}

pub fn exclusion_filter(ctx: &MarkingContext, m: &Marking) -> ExclusionVerdict {
    let excluded = excluded_whites(ctx);
    let witnesses: Vec<usize> = m.vertices.iter().copied().filter(|v| excluded.contains(v)).collect();
    ExclusionVerdict {
        passes: witnesses.is_empty(),
        witnesses,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub vertices: Vec<usize>,
    pub marked_whites: usize,
    pub internal_faces: usize,
    pub surrounding_faces: usize,
    pub slots: usize,
    pub triangular: bool,
}

impl ComponentReport {
    /// Fewer internal faces than marked Whites: some marked White has no
    /// room for its divisor point.
    pub fn incompatible(&self) -> bool {
        self.internal_faces < self.marked_whites
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkingReport {
    pub marking: Vec<usize>,
    pub components: Vec<ComponentReport>,
    pub exclusion: ExclusionVerdict,
    pub compatible: bool,
}

fn components(ctx: &MarkingContext, m: &Marking) -> Vec<BTreeSet<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &v in &m.vertices {
        if seen.contains(&v) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            if !comp.insert(x) {
                continue;
            }
            stack.extend(ctx.neighbours[x].iter().filter(|u| m.contains(**u)));
        }
        seen.extend(comp.iter().copied());
        out.push(comp);
    }
    out
}

/// Marked rows are consecutive, each row's marked Whites are consecutive
/// among the Whites of that row, and each row's span lies inside the span
/// of the row above with no more Whites.
pub fn is_triangular(ctx: &MarkingContext, comp: &BTreeSet<usize>) -> bool {
    let mut row_whites: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &w in &ctx.whites {
        let (r, c) = ctx.cell(w);
        row_whites.entry(r).or_default().push(c);
    }
    for cols in row_whites.values_mut() {
        cols.sort();
    }
    let mut marked: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &w in comp.iter().filter(|&&v| ctx.is_white(v)) {
        let (r, c) = ctx.cell(w);
        let idx = row_whites[&r].binary_search(&c).unwrap();
        marked.entry(r).or_default().push(idx);
    }
    let rows: Vec<usize> = marked.keys().copied().collect();
    if rows.windows(2).any(|w| w[1] != w[0] + 1) {
        return false;
    }
    let mut prev: Option<(usize, usize, usize)> = None;
    for (r, idx) in &mut marked {
        idx.sort();
        if idx.windows(2).any(|w| w[1] != w[0] + 1) {
            return false;
        }
        let lo = row_whites[r][idx[0]];
        let hi = row_whites[r][*idx.last().unwrap()];
        if let Some((plo, phi, plen)) = prev {
            if lo < plo || hi > phi || idx.len() > plen {
                return false;
            }
        }
        prev = Some((lo, hi, idx.len()));
    }
    true
}

fn component_report(ctx: &MarkingContext, comp: &BTreeSet<usize>) -> ComponentReport {
    let g = &ctx.network;
    let marked_edges: BTreeSet<usize> = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| comp.contains(&e.tail) || comp.contains(&e.head))
        .map(|(i, _)| i)
        .collect();
    let mut internal_faces = 0;
    let mut surrounding_faces = 0;
    for f in &ctx.faces {
        let is_marked = |side: &Side| matches!(side, Side::Edge(e) if marked_edges.contains(e));
        let any_marked = f.darts.iter().any(|d| is_marked(&d.side));
        let any_unmarked = f.darts.iter().any(|d| !is_marked(&d.side));
        if f.finite && any_marked && !any_unmarked {
            internal_faces += 1;
        }
        if any_marked && any_unmarked {
            surrounding_faces += 1;
        }
    }
    let slots = marked_edges
        .iter()
        .filter(|&&e| comp.contains(&g.edges[e].tail) != comp.contains(&g.edges[e].head))
        .count();
    ComponentReport {
        vertices: comp.iter().copied().collect(),
        marked_whites: comp.iter().filter(|&&v| ctx.is_white(v)).count(),
        internal_faces,
        surrounding_faces,
        slots,
        triangular: is_triangular(ctx, comp),
    }
}

pub fn marking_report(ctx: &MarkingContext, m: &Marking) -> MarkingReport {
    let components: Vec<ComponentReport> = components(ctx, m).iter().map(|c| component_report(ctx, c)).collect();
    let exclusion = exclusion_filter(ctx, m);
    let compatible = exclusion.passes && components.iter().all(|c| !c.incompatible());
    MarkingReport {
        marking: m.vertices.iter().copied().collect(),
        components,
        exclusion,
        compatible,
    }
}

/// Distinct closures of all nonempty White seeds.
pub fn enumerate_closed_markings(ctx: &MarkingContext, max_whites: usize, force: bool) -> Result<Vec<Marking>> {
    let w = ctx.whites.len();
    if w > max_whites && !force {
        return Err(Error::SizeGuard {
            whites: w,
            limit: max_whites,
        });
    }
    if w >= 64 {
        return Err(Error::Input(format!("{w} White vertices cannot be enumerated")));
    }
    let found: BTreeSet<Marking> = (1u64..(1u64 << w))
        .into_par_iter()
        .map(|bits| {
            let seed = Marking::new((0..w).filter(|i| bits >> i & 1 == 1).map(|i| ctx.whites[i]));
            closure(ctx, &seed)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(found.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub marking: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub diagram: Vec<usize>,
    pub whites: usize,
    pub markings_checked: usize,
    pub exclusion_rejections: usize,
    pub compatible_markings: usize,
    pub violations: Vec<Violation>,
    pub verified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub max_whites: usize,
    pub force: bool,
    pub use_exclusion: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_whites: DEFAULT_MAX_WHITES,
            force: false,
            use_exclusion: true,
        }
    }
}

/// Checks every closed nonempty marking: it must be incompatible, closure
/// must fix it, every component must have slots equal to surrounding faces,
/// fewer internal faces than marked Whites, and a triangular shape. Any
/// failure is a violation, reported with the marking.
pub fn verify_theorem(t: &LeTableau, opts: VerifyOptions) -> Result<Certificate> {
    if !is_schubert_positive(t) {
        return Err(Error::NotSchubert);
    }
    let ctx = MarkingContext::from_tableau(t)?;
    let markings = enumerate_closed_markings(&ctx, opts.max_whites, opts.force)?;
    let checked: Vec<(MarkingReport, Vec<Violation>)> = markings
        .par_iter()
        .map(|m| {
            let report = marking_report(&ctx, m);
            let mut v = Vec::new();
            let mut push = |reason: String| {
                v.push(Violation {
                    marking: report.marking.clone(),
                    reason,
                })
            };
            if &closure(&ctx, m) != m {
                push("closure is not idempotent".into());
            }
            let compatible = if opts.use_exclusion {
                report.compatible
            } else {
                report.components.iter().all(|c| !c.incompatible())
            };
            if compatible {
                push(format!("compatible marking: {:?}", report.components));
            }
            for c in &report.components {
                if c.slots != c.surrounding_faces {
                    push(format!("{} slots but {} surrounding faces", c.slots, c.surrounding_faces));
                }
                if !c.incompatible() {
                    push(format!(
                        "{} internal faces for {} marked Whites",
                        c.internal_faces, c.marked_whites
                    ));
                }
                if !c.triangular {
                    push(format!("component {:?} is not triangular", c.vertices));
                }
            }
            (report, v)
        })
        .collect();
    let exclusion_rejections = checked.iter().filter(|(r, _)| !r.exclusion.passes).count();
    let compatible_markings = checked
        .iter()
        .filter(|(r, _)| {
            if opts.use_exclusion {
                r.compatible
            } else {
                r.components.iter().all(|c| !c.incompatible())
            }
        })
        .count();
    let violations: Vec<Violation> = checked.into_iter().flat_map(|(_, v)| v).collect();
    Ok(Certificate {
        diagram: t.diagram().rows().to_vec(),
        whites: ctx.whites.len(),
        markings_checked: markings.len(),
        exclusion_rejections,
        compatible_markings,
        verified: violations.is_empty(),
        violations,
    })
}

/// Young diagrams with at most `rows` rows and `cols` columns.
pub fn diagrams_in_box(rows: usize, cols: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, rows: usize, out: &mut Vec<Vec<usize>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        if prefix.len() == rows {
            return;
        }
        for l in 1..=max {
            prefix.push(l);
            rec(prefix, l, rows, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), cols, rows, &mut out);
    out
}
