//! Named example tableaux and lookups of curve components and edges by
//! their grid position.

use crate::curve::{MMCurve, GAMMA0};
use crate::error::{Error, Result};
use crate::lecore::LeTableau;
use crate::network::{Site, VertexKind};
use crate::soliton::Phases;

/// Gr(1, 2): a single box.
pub fn single_box() -> LeTableau {
    LeTableau::schubert(&[1]).unwrap()
}

/// Gr(2, 4) totally positive Schubert cell.
pub fn gr24() -> LeTableau {
    LeTableau::schubert(&[2, 2]).unwrap()
}

/// A 7-dimensional positroid cell of Gr(3, 7) with four White and three
/// Black trivalent vertices.
pub fn gr37() -> LeTableau {
    LeTableau::from_pattern(&[vec![1, 1, 0, 0], vec![0, 0, 1, 1], vec![0, 1, 1, 1]]).unwrap()
}

/// A cell of Gr(4, 10) whose curve has nine components.
pub fn gr410() -> LeTableau {
    LeTableau::from_pattern(&[vec![1, 1, 1, 1, 0, 1], vec![0, 0, 0, 0, 1], vec![0, 1, 1], vec![0, 1]]).unwrap()
}

/// kappa_j = j - (n + 1) / 2.
pub fn integer_phases(n: usize) -> Phases {
    Phases::new((1..=n).map(|j| j as f64 - (n as f64 + 1.0) / 2.0).collect()).unwrap()
}

/// The component of the vertex of the given colour in the given 0-based
/// cell, whether it is a whole box or one half of a split box.
pub fn component_at(c: &MMCurve, kind: VertexKind, row: usize, col: usize) -> Option<usize> {
    c.components.iter().find_map(|comp| {
        let v = comp.vertex?;
        let vx = &c.network().vertices[v];
        let here = match vx.site {
            Site::Box { row: r, col: k } | Site::BlackHalf { row: r, col: k } | Site::WhiteHalf { row: r, col: k } => {
                r == row && k == col
            }
            Site::Boundary(_) => false,
        };
        (here && vx.kind == kind).then_some(comp.id)
    })
}

/// An end of an edge: a boundary label or an internal component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Boundary(usize),
    Component(usize),
}

fn end_vertex(c: &MMCurve, end: End) -> Option<usize> {
    match end {
        End::Boundary(l) => Some(c.network().boundary_vertex(l)),
        End::Component(id) if id != GAMMA0 => c.components.get(id)?.vertex,
        End::Component(_) => None,
    }
}

/// The edge joining two ends, in either direction.
pub fn edge_between(c: &MMCurve, a: End, b: End) -> Option<usize> {
    let (va, vb) = (end_vertex(c, a)?, end_vertex(c, b)?);
    c.network()
        .edges
        .iter()
        .position(|e| (e.tail == va && e.head == vb) || (e.tail == vb && e.head == va))
}

/// Conventional names of the Gr(3, 7) components and faces in the standard
/// example: gamma[0] is Gamma_0, gamma[1..=4] the White components,
/// sigma[0..3] the Black ones; faces[p - 1] is the face id of face p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gr37Labels {
    pub gamma: [usize; 5],
    pub sigma: [usize; 3],
    pub faces: [usize; 7],
}

impl Gr37Labels {
    pub fn new(c: &MMCurve) -> Result<Self> {
        let w = |r, k| component_at(c, VertexKind::White, r, k);
        let b = |r, k| component_at(c, VertexKind::Black, r, k);
        let missing = || Error::Input("curve is not the Gr(3, 7) example".into());
        let gamma = [
            GAMMA0,
            w(0, 1).ok_or_else(missing)?,
            w(1, 3).ok_or_else(missing)?,
            w(2, 3).ok_or_else(missing)?,
            w(2, 2).ok_or_else(missing)?,
        ];
        let sigma = [
            b(2, 3).ok_or_else(missing)?,
            b(2, 2).ok_or_else(missing)?,
            b(2, 1).ok_or_else(missing)?,
        ];
        let internal = c
            .faces()
            .iter()
            .find(|f| f.finite && f.arcs().next().is_none())
            .ok_or_else(missing)?
            .id;
        let arc = |j| c.face_of_arc(j);
        let faces = [arc(1), arc(6), arc(2), internal, arc(3), arc(4), arc(5)];
        Ok(Gr37Labels { gamma, sigma, faces })
    }

    /// The c-edges of the standard Gr(3, 7) basis, in order c_1 .. c_7.
    pub fn c_edges(&self, c: &MMCurve) -> Result<Vec<usize>> {
        let g = |i: usize| End::Component(self.gamma[i]);
        let s = |i: usize| End::Component(self.sigma[i - 1]);
        let pairs = [
            (End::Boundary(1), g(1)),
            (g(1), End::Boundary(7)),
            (End::Boundary(2), g(2)),
            (g(2), s(2)),
            (End::Boundary(3), s(1)),
            (g(3), s(2)),
            (g(4), s(3)),
        ];
        pairs
            .iter()
            .map(|&(a, b)| {
                edge_between(c, a, b).ok_or_else(|| Error::Input(format!("no edge between {a:?} and {b:?}")))
            })
            .collect()
    }
}
