mod common;

use common::*;
use mm_spectral::catalog::*;
use mm_spectral::curve::{CurvePoint, MMCurve, GAMMA0};
use mm_spectral::divisor::*;
use mm_spectral::proj::Proj;
use mm_spectral::singular::*;
use mm_spectral::soliton::{Phases, TimePoint};
use proptest::prelude::*;

const SAMPLE: TimePoint = TimePoint { x: 0.1, y: 0.2, t: -0.05 };

struct Gr37 {
    s: Setup,
    lab: Gr37Labels,
    base: Divisor,
}

fn gr37_setup() -> Gr37 {
    let s = setup(&gr37(), &integer_phases(7));
    let lab = Gr37Labels::new(&s.bundle.curve).unwrap();
    let base = divisor_at(&s.data, &s.bundle.curve, &SAMPLE).unwrap();
    Gr37 { s, lab, base }
}

/// The divisor point that should travel to `target`: the only point on a
/// White component, or the nearest unused Gamma_0 point.
fn point_for(div: &Divisor, target: &CurvePoint, used: &[usize]) -> usize {
    div.points
        .iter()
        .enumerate()
        .filter(|(i, p)| p.component == target.component && !used.contains(i))
        .min_by(|a, b| {
            let d = |p: &DivisorPoint| (p.coord.value() - target.coord.value()).abs();
            d(a.1).total_cmp(&d(b.1))
        })
        .map(|(i, _)| i)
        .unwrap()
}

/// Moves, in divisor order, sending points to the given nodes with the
/// given chart speeds.
fn approach(div: &Divisor, targets: &[(CurvePoint, f64)]) -> NodeApproach {
    let mut used = Vec::new();
    let mut moves = Vec::new();
    for (t, c) in targets {
        let i = point_for(div, t, &used);
        used.push(i);
        moves.push((i, t.coord, *c));
    }
    moves.sort_by_key(|m| m.0);
    NodeApproach { base: div.clone(), moves }
}

fn pair_node_targets(c: &MMCurve, lab: &Gr37Labels) -> (usize, CurvePoint, CurvePoint) {
    let e = edge_between(c, End::Component(lab.gamma[4]), End::Boundary(5)).unwrap();
    let dp = &c.double_points[e];
    let (on_white, on_zero) = if dp.tail.component == GAMMA0 { (dp.head, dp.tail) } else { (dp.tail, dp.head) };
    assert_eq!(on_zero.coord.value(), c.phases().get(4));
    (e, on_white, on_zero)
}

fn triple_targets(c: &MMCurve, black: usize) -> Vec<CurvePoint> {
    c.local_edges(black)
        .unwrap()
        .iter()
        .map(|&e| {
            let dp = &c.double_points[e];
            if dp.tail.component == black { dp.head } else { dp.tail }
        })
        .collect()
}

fn kinds(evs: &[SingularEvent]) -> Vec<EventKind> {
    evs.iter().map(|e| e.kind).collect()
}

#[test]
fn reference_sample_is_regular() {
    let g = gr37_setup();
    assert!(detect(&g.base, &g.s.bundle.curve, 1e-3).is_empty());
}

#[test]
fn pair_node_detection_and_chart() {
    let g = gr37_setup();
    let c = &g.s.bundle.curve;
    let (e, w, z) = pair_node_targets(c, &g.lab);
    let path = approach(&g.base, &[(w, 1.0), (z, -2.0)]);
    let div = path.divisor_at(1e-7).unwrap();
    let evs = detect(&div, c, 1e-4);
    assert_eq!(kinds(&evs), vec![EventKind::PairNode]);
    let ev = &evs[0];
    assert_eq!(ev.edges, vec![e]);
    assert!(!ev.composite);
    // ratio in divisor order
    let by_index: Vec<f64> = path.moves.iter().map(|m| if m.1.same(&w.coord) && div.points[m.0].component == w.component { 1.0 } else { -2.0 }).collect();
    let chart = blowup_chart(ev).unwrap();
    assert_eq!(chart.kind, EventKind::PairNode);
    assert!(chart.same_ratio(&by_index, 1e-6), "{chart:?}");
}

#[test]
fn triple_black_detection_and_chart() {
    let g = gr37_setup();
    let c = &g.s.bundle.curve;
    let sigma1 = g.lab.sigma[0];
    let far = triple_targets(c, sigma1);
    // out-edge to Gamma_3 at infinity, in-edges from Gamma_0 at kappa_3 and Gamma_2 at 1
    let comps: Vec<usize> = far.iter().map(|p| p.component).collect();
    for want in [g.lab.gamma[3], GAMMA0, g.lab.gamma[2]] {
        assert!(comps.contains(&want));
    }
    let at = |comp| far.iter().find(|p| p.component == comp).unwrap().coord;
    assert!(at(g.lab.gamma[3]).is_infinite());
    assert_eq!(at(GAMMA0).value(), c.phases().get(2));
    assert_eq!(at(g.lab.gamma[2]).value(), 1.0);

    let speeds = [1.0, 2.0, -1.0];
    let targets: Vec<(CurvePoint, f64)> = far.iter().copied().zip(speeds).collect();
    let path = approach(&g.base, &targets);
    let div = path.divisor_at(1e-7).unwrap();
    let evs = detect(&div, c, 1e-4);
    assert_eq!(kinds(&evs), vec![EventKind::TripleBlack]);
    assert_eq!(evs[0].black, Some(sigma1));
    let expected: Vec<f64> = path
        .moves
        .iter()
        .map(|m| targets.iter().find(|(t, _)| t.component == div.points[m.0].component && t.coord.same(&m.1)).unwrap().1)
        .collect();
    let chart = blowup_chart(&evs[0]).unwrap();
    assert!(chart.same_ratio(&expected, 1e-6), "{chart:?} vs {expected:?}");
}

#[test]
fn unglue_detection_has_no_chart() {
    let g = gr37_setup();
    let c = &g.s.bundle.curve;
    let (e, w, _) = pair_node_targets(c, &g.lab);
    let div = approach(&g.base, &[(w, 1.0)]).divisor_at(1e-8).unwrap();
    let evs = detect(&div, c, 1e-4);
    assert_eq!(kinds(&evs), vec![EventKind::Unglue]);
    assert_eq!(evs[0].edges, vec![e]);
    assert!(blowup_chart(&evs[0]).is_err());
}

#[test]
fn unresolved_chart_at_the_exact_node() {
    let g = gr37_setup();
    let c = &g.s.bundle.curve;
    let (_, w, z) = pair_node_targets(c, &g.lab);
    let div = approach(&g.base, &[(w, 1.0), (z, 1.0)]).divisor_at(0.0).unwrap();
    let evs = detect(&div, c, 1e-4);
    assert_eq!(kinds(&evs), vec![EventKind::PairNode]);
    assert!(matches!(blowup_chart(&evs[0]).unwrap().ratio, ChartPoint::Unresolved { .. }));
}

#[test]
fn detection_is_stable_in_epsilon() {
    let g = gr37_setup();
    let c = &g.s.bundle.curve;
    let (_, w, z) = pair_node_targets(c, &g.lab);
    let div = approach(&g.base, &[(w, 1.0), (z, -2.0)]).divisor_at(1e-8).unwrap();
    let reference = detect(&div, c, 1e-3);
    for eps in [1e-4, 1e-5, 1e-6] {
        let evs = detect(&div, c, eps);
        assert_eq!(kinds(&evs), kinds(&reference));
        let a = blowup_chart(&evs[0]).unwrap();
        let ChartPoint::Resolved(r) = &blowup_chart(&reference[0]).unwrap().ratio else { panic!() };
        assert!(a.same_ratio(r, 1e-12));
    }
}

#[test]
fn disjoint_groups_are_not_composite() {
    let g = gr37_setup();
    let c = &g.s.bundle.curve;
    // a triple at Sigma_1 and a pair at the Gamma_4 - kappa_5 node share no point
    let far = triple_targets(c, g.lab.sigma[0]);
    let (_, w, z) = pair_node_targets(c, &g.lab);
    let mut targets: Vec<(CurvePoint, f64)> = far.into_iter().map(|p| (p, 1.0)).collect();
    targets.push((w, 1.0));
    targets.push((z, 1.0));
    let div = approach(&g.base, &targets).divisor_at(1e-9).unwrap();
    let evs = detect(&div, c, 1e-4);
    let mut k = kinds(&evs);
    k.sort_by_key(|k| *k as u8);
    assert_eq!(k, vec![EventKind::PairNode, EventKind::TripleBlack]);
    assert!(evs.iter().all(|e| !e.composite));
}

#[test]
fn unglue_probe_diverges_in_two_faces() {
    let g = gr37_setup();
    let c = &g.s.bundle.curve;
    let ws = &g.s.bundle.differentials;
    let (e, w, _) = pair_node_targets(c, &g.lab);
    let path = approach(&g.base, &[(w, 1.0)]);
    let fits = abel_probe(&path, ws, &default_samples(25)).unwrap();
    // the faces on either side of the edge, as differential indices
    let (f1, f2) = c.edge_faces()[e];
    let a6 = g.lab.faces[5];
    let a7 = g.lab.faces[6];
    let mut sides = [f1, f2];
    sides.sort();
    let mut named = [a6, a7];
    named.sort();
    assert_eq!(sides, named);
    for f in &fits {
        if f.l == a6 || f.l == a7 {
            assert_eq!(f.growth, Growth::LogDivergent, "{f:?}");
        } else {
            assert_eq!(f.growth, Growth::Bounded, "{f:?}");
        }
    }
    let s6 = fits[a6 - 1].slope;
    let s7 = fits[a7 - 1].slope;
    assert!((s6 + s7).abs() < 1e-6, "{s6} {s7}");
    // A_6 = log((gamma_6 - kappa_5) / (gamma_4 - 1)) + O(1)
    assert!((s6 + 1.0).abs() < 1e-3 && (s7 - 1.0).abs() < 1e-3);
    // the sum of the two diverging integrals stays bounded
    let sums: Vec<f64> = default_samples(25)
        .iter()
        .filter(|&&s| s <= 1e-5)
        .map(|&s| {
            let av = abel(&path.divisor_at(s).unwrap(), ws).unwrap();
            let re = |l: usize| match av.values[l - 1] {
                AbelValue::Finite { re, .. } => re,
                AbelValue::Divergent => f64::NAN,
            };
            re(a6) + re(a7)
        })
        .collect();
    let spread = sums.iter().fold(f64::NEG_INFINITY, |a: f64, &b| a.max(b)) - sums.iter().fold(f64::INFINITY, |a: f64, &b| a.min(b));
    assert!(spread < 1e-4, "{sums:?}");
}

#[test]
fn pair_node_and_triple_black_probes_are_bounded() {
    let g = gr37_setup();
    let c = &g.s.bundle.curve;
    let ws = &g.s.bundle.differentials;
    let (_, w, z) = pair_node_targets(c, &g.lab);
    let far = triple_targets(c, g.lab.sigma[0]);
    let triple: Vec<(CurvePoint, f64)> = far.into_iter().zip([1.0, 2.0, -1.0]).collect();
    for path in [approach(&g.base, &[(w, 1.0), (z, -2.0)]), approach(&g.base, &triple)] {
        let fits = abel_probe(&path, ws, &default_samples(25)).unwrap();
        assert!(fits.iter().all(|f| f.growth == Growth::Bounded), "{fits:?}");
    }
}

#[test]
fn time_evolution_events_have_bounded_abel_maps() {
    let s = setup(&gr24(), &Phases::new(vec![-2.0, -1.0, 1.0, 2.0]).unwrap());
    let cfg = TrajectoryConfig { axis: TimeAxis::X, base: TimePoint::default(), start: -10.0, end: 10.0, steps: 200, eps: DEFAULT_EPS };
    let tr = divisor_trajectory(&s.data, &s.bundle, &cfg).unwrap();
    assert!(!tr.events.is_empty());
    for ev in &tr.events {
        for side in [-1.0, 1.0] {
            let path = TimeApproach {
                data: &s.data,
                curve: &s.bundle.curve,
                axis: TimeAxis::X,
                base: TimePoint::default(),
                critical: ev.s,
                side,
            };
            let fits = abel_probe(&path, &s.bundle.differentials, &default_samples(20)).unwrap();
            assert!(fits.iter().all(|f| f.growth != Growth::LogDivergent), "{} {fits:?}", ev.s);
        }
    }
}

#[test]
fn probe_needs_enough_samples() {
    let g = gr37_setup();
    let path = NodeApproach { base: g.base.clone(), moves: vec![] };
    assert!(abel_probe(&path, &g.s.bundle.differentials, &[1e-3]).is_err());
    let bad = NodeApproach { base: g.base.clone(), moves: vec![(99, Proj::ZERO, 1.0)] };
    assert!(bad.divisor_at(0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    /// Scaling the approach speed or the step leaves the chart point fixed.
    #[test]
    fn chart_is_reparametrization_invariant(a in 0.2f64..5.0, b in -5.0f64..-0.2, lambda in 0.1f64..10.0, s in 1e-9f64..1e-7) {
        let g = gr37_setup();
        let c = &g.s.bundle.curve;
        let (_, w, z) = pair_node_targets(c, &g.lab);
        let chart = |a: f64, b: f64, s: f64| {
            let div = approach(&g.base, &[(w, a), (z, b)]).divisor_at(s).unwrap();
            let evs = detect(&div, c, 1e-4);
            blowup_chart(&evs[0]).unwrap()
        };
        let one = chart(a, b, s);
        let ChartPoint::Resolved(r) = chart(lambda * a, lambda * b, s / lambda).ratio else { panic!() };
        prop_assert!(one.same_ratio(&r, 1e-6));
        let ChartPoint::Resolved(r2) = chart(a, b, 3.0 * s).ratio else { panic!() };
        prop_assert!(one.same_ratio(&r2, 1e-6));
    }
}
