#![allow(dead_code)]

use mm_spectral::curve::CurveBundle;
use mm_spectral::lecore::{validate_le_rule, LeTableau};
use mm_spectral::network::{boundary_measurement, trivalent_network, PlabicNetwork};
use mm_spectral::soliton::{Phases, SolitonData};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

/// Young diagrams with at most `max_boxes` boxes.
pub fn shapes_up_to(max_boxes: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, budget: usize, out: &mut Vec<Vec<usize>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        for l in 1..=max.min(budget) {
            prefix.push(l);
            rec(prefix, l, budget - l, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), max_boxes, max_boxes, &mut out);
    out
}

/// Every Le-filling of every diagram with at most `max_boxes` boxes, with
/// at least one positive box.
pub fn le_tableaux_up_to(max_boxes: usize) -> Vec<LeTableau> {
    let mut out = Vec::new();
    for rows in shapes_up_to(max_boxes) {
        let boxes: usize = rows.iter().sum();
        for mask in 1u32..(1 << boxes) {
            let mut bit = 0;
            let pattern: Vec<Vec<u8>> = rows
                .iter()
                .map(|&l| {
                    (0..l)
                        .map(|_| {
                            let b = (mask >> bit & 1) as u8;
                            bit += 1;
                            b
                        })
                        .collect()
                })
                .collect();
            let t = LeTableau::from_pattern(&pattern).unwrap();
            if validate_le_rule(&t).is_empty() {
                out.push(t);
            }
        }
    }
    out
}

/// Random positive rational weights p/q with small p, q.
pub fn random_weights<R: Rng>(rng: &mut R, t: &LeTableau) -> LeTableau {
    let w: Vec<BigRational> = (0..t.num_positive())
        .map(|_| BigRational::new(rng.random_range(1i64..20).into(), rng.random_range(1i64..20).into()))
        .collect();
    t.with_weights(&w).unwrap()
}

/// Directed paths from vertex `from` to any sink, as vertex lists. Written
/// directly over the edge list, independent of the library's path code.
pub fn vertex_paths(g: &PlabicNetwork, from: usize) -> Vec<(Vec<usize>, BigRational)> {
    let mut out = Vec::new();
    let mut stack = vec![(vec![from], BigRational::one())];
    while let Some((path, w)) = stack.pop() {
        let v = *path.last().unwrap();
        let next: Vec<_> = g.edges.iter().filter(|e| e.tail == v).collect();
        if next.is_empty() {
            if path.len() > 1 {
                out.push((path, w));
            }
            continue;
        }
        for e in next {
            let mut p = path.clone();
            p.push(e.head);
            stack.push((p, &w * &e.weight));
        }
    }
    out
}

/// Vertex-disjoint path families from `sources` onto `sinks` (labels): the
/// total weight of each family together with the permutation sign relative
/// to the given sink order.
pub fn disjoint_families(g: &PlabicNetwork, sources: &[usize], sinks: &[usize]) -> Vec<(BigRational, i32)> {
    let per_source: Vec<Vec<(Vec<usize>, BigRational, usize)>> = sources
        .iter()
        .map(|&s| {
            vertex_paths(g, g.boundary_vertex(s))
                .into_iter()
                .filter_map(|(p, w)| {
                    let end = g.boundary_label(*p.last().unwrap())?;
                    let pos = sinks.iter().position(|&j| j == end)?;
                    Some((p, w, pos))
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    fn rec(
        i: usize,
        per: &[Vec<(Vec<usize>, BigRational, usize)>],
        used: &mut Vec<usize>,
        perm: &mut Vec<usize>,
        w: BigRational,
        out: &mut Vec<(BigRational, i32)>,
    ) {
        if i == per.len() {
            let mut sign = 1;
            for a in 0..perm.len() {
                for b in a + 1..perm.len() {
                    if perm[a] > perm[b] {
                        sign = -sign;
                    }
                }
            }
            out.push((w, sign));
            return;
        }
        for (p, pw, pos) in &per[i] {
            if perm.contains(pos) || p.iter().any(|v| used.contains(v)) {
                continue;
            }
            let mark = used.len();
            used.extend(p);
            perm.push(*pos);
            rec(i + 1, per, used, perm, &w * pw, out);
            perm.pop();
            used.truncate(mark);
        }
    }
    rec(0, &per_source, &mut Vec::new(), &mut Vec::new(), BigRational::one(), &mut out);
    out
}

/// Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut acc = BigRational::zero();
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigRational>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][c] * cofactor_det(&minor);
        if c % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

pub fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0u32..1 << items.len())
        .map(|m| items.iter().enumerate().filter(|&(i, _)| m >> i & 1 == 1).map(|(_, &x)| x).collect())
        .collect()
}

pub struct Setup {
    pub net: PlabicNetwork,
    pub data: SolitonData,
    pub bundle: CurveBundle,
}

pub fn setup(t: &LeTableau, phases: &Phases) -> Setup {
    let net = trivalent_network(t).unwrap();
    let a = boundary_measurement(&net).unwrap();
    let data = SolitonData::new(phases.clone(), &a).unwrap();
    let bundle = CurveBundle::new(&net, phases).unwrap();
    Setup { net, data, bundle }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
