mod common;

use std::f64::consts::{PI, TAU};

use common::*;
use mm_spectral::catalog::*;
use mm_spectral::curve::{CurvePoint, GAMMA0};
use mm_spectral::divisor::*;
use mm_spectral::lecore::LeTableau;
use mm_spectral::proj::Proj;
use mm_spectral::sampling::{random_sample, run_sample, SampleRanges};
use mm_spectral::singular::EventKind;
use mm_spectral::soliton::{gamma0_divisor, Phases, TimePoint};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_time<R: Rng>(rng: &mut R) -> TimePoint {
    TimePoint::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
}

fn random_setup<R: Rng>(rng: &mut R, rows: &[usize]) -> Setup {
    let s = random_sample(rng, &LeTableau::schubert(rows).unwrap(), &SampleRanges::default()).unwrap();
    setup(&s.tableau, &s.phases)
}

fn one_soliton() -> Setup {
    setup(&single_box(), &Phases::new(vec![-1.0, 1.0]).unwrap())
}

#[test]
fn source_consistency_and_black_proportionality() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for rows in [vec![2, 2], vec![3, 2, 1], vec![3, 3, 3], vec![3, 3], vec![2, 1]] {
        for _ in 0..20 {
            let s = random_setup(&mut rng, &rows);
            let wf = extend_wave(&s.data, &s.bundle.curve, &random_time(&mut rng)).unwrap();
            assert!(wf.source_defect < 1e-12, "{}", wf.source_defect);
            assert!(wf.black_consistent.iter().all(|(_, ok)| *ok));
            assert_eq!(wf.white.len(), s.bundle.curve.whites().len());
        }
    }
}

#[test]
fn values_on_the_infinite_oval_are_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for rows in [vec![2, 2], vec![3, 3, 3], vec![3, 2, 1]] {
        for _ in 0..100 {
            let s = random_setup(&mut rng, &rows);
            let wf = extend_wave(&s.data, &s.bundle.curve, &random_time(&mut rng)).unwrap();
            let inf = &s.bundle.curve.faces()[0];
            let vals: Vec<f64> = inf.edges().map(|e| wf.value_at_edge(e)).collect();
            assert!(!vals.is_empty());
            // up to the common factor, which may carry either sign
            let sign = vals[0].signum();
            assert!(vals.iter().all(|v| v * sign > 0.0), "{vals:?}");
        }
    }
}

#[test]
fn one_soliton_wave_frame() {
    let s = one_soliton();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let p = random_time(&mut rng);
        let wf = extend_wave(&s.data, &s.bundle.curve, &p).unwrap();
        let gamma = gamma0_divisor(&s.data, &p, 1e-9).unwrap()[0];
        let (t1, t2) = (p.theta(-1.0), p.theta(1.0));
        // v_j is e^{theta_j} Q(kappa_j) up to a common factor
        let expected = (t1 - t2).exp() * (-1.0 - gamma) / (1.0 - gamma);
        let v = mm_spectral::soliton::boundary_values(&s.data, &p);
        assert!(rel_close(v[0] / v[1], expected, 1e-12));
        // the signed values agree across the chord
        assert!(rel_close(wf.boundary[0], wf.boundary[1], 1e-12));
        assert_eq!(wf.edges.len(), 1);
    }
}

#[test]
fn one_soliton_divisor_and_abel() {
    let s = one_soliton();
    let r = analyze(&s.data, &s.bundle, &TimePoint::default(), DEFAULT_EPS, DEFAULT_DN_TOL).unwrap();
    assert_eq!(r.divisor.points.len(), 1);
    let p = r.divisor.points[0];
    assert_eq!(p.component, GAMMA0);
    assert_eq!(p.source, PointSource::Gamma0Root);
    assert!(p.coord.value().abs() < 1e-15);
    assert_eq!(r.ovals.oval, vec![Some(1)]);
    assert!(r.ovals.verdict);
    assert!(r.dn.all());
    // A_1 = log((gamma - kappa_2) / (gamma - kappa_1)) for any gamma
    let ws = &s.bundle.differentials;
    for g in [-3.0, -0.9, -0.2, 0.5, 0.99, 4.0] {
        let div = Divisor {
            time: TimePoint::default(),
            points: vec![DivisorPoint { component: GAMMA0, coord: Proj::finite(g), source: PointSource::Gamma0Root }],
        };
        let a = abel(&div, ws).unwrap();
        let AbelValue::Finite { re, im } = a.values[0] else { panic!() };
        let ratio: f64 = (g - 1.0) / (g + 1.0);
        assert!((re - ratio.abs().ln()).abs() < 1e-12);
        let inside = -1.0 < g && g < 1.0;
        assert!((im - if inside { PI } else { 0.0 }).abs() < 1e-12);
        assert_eq!(dn_condition(&a, DEFAULT_DN_TOL).all(), inside);
        let loc = locate_in_ovals(&div, &s.bundle.ovals, &s.bundle.curve, DEFAULT_EPS);
        assert_eq!(loc.verdict, inside);
    }
}

#[test]
fn mobius_interpolation_self_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let v: [f64; 3] = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let m = Mobius::from_values(v[0], v[1], v[2]).unwrap();
        for (z, want) in [Proj::INFINITY, Proj::ZERO, Proj::ONE].iter().zip(v) {
            assert!(rel_close(m.eval(z).value(), want, 1e-12), "{v:?}");
        }
        // the closed-form zero
        let z = mobius_zero(v[0], v[1], v[2]).unwrap();
        let closed = v[1] * (v[2] - v[0]) / (v[0] * (v[2] - v[1]));
        assert!(rel_close(z.value(), closed, 1e-12));
        assert!(m.eval(&z).value().abs() < 1e-12 * v.iter().fold(1.0, |a: f64, b| a.max(b.abs())));
    }
    assert!(Mobius::from_values(2.0, 2.0, 2.0).is_none());
}

#[test]
fn gauge_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let v: [f64; 3] = [rng.random_range(0.1..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let z = mobius_zero(v[0], v[1], v[2]).unwrap();
        let w = white_zero(v[1], v[2]).unwrap();
        for lambda in [2.0, 0.25, 1024.0] {
            assert!(mobius_zero(lambda * v[0], lambda * v[1], lambda * v[2]).unwrap().same(&z));
            assert!(white_zero(lambda * v[1], lambda * v[2]).unwrap().same(&w));
        }
        let lambda = rng.random_range(0.1..10.0);
        let zl = mobius_zero(lambda * v[0], lambda * v[1], lambda * v[2]).unwrap();
        assert!(rel_close(zl.value(), z.value(), 1e-12));
    }
}

/// The White point is the pole of the interpolant of the ratios between two
/// times; the z* formula applied to raw values gives gamma^2 / (2 gamma - 1).
#[test]
fn white_point_is_the_ratio_pole() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for rows in [vec![2, 2], vec![3, 3, 3], vec![3, 2, 1]] {
        for _ in 0..30 {
            let s = random_setup(&mut rng, &rows);
            let c = &s.bundle.curve;
            let p = random_time(&mut rng);
            let wf = extend_wave(&s.data, c, &p).unwrap();
            let other = extend_wave(&s.data, c, &random_time(&mut rng)).unwrap();
            let div = compute_divisor(&wf, c, &s.data).unwrap();
            for ((comp, pole), &(_, [vi, v0, v1])) in white_poles_from_ratios(&wf, &other).into_iter().zip(&wf.white) {
                let point = div.points.iter().find(|q| q.component == comp).unwrap();
                let pole = pole.unwrap();
                assert!((pole.value() - point.coord.value()).abs() <= 1e-8 * point.coord.value().abs().max(1.0));
                let in_weight = mm_spectral::num::to_f64(&c.network().edges[c.local_edges(comp).unwrap()[0]].weight);
                if in_weight == 1.0 {
                    let g = point.coord.value();
                    let z = mobius_zero(vi, v0, v1).unwrap().value();
                    assert!(rel_close(z, g * g / (2.0 * g - 1.0), 1e-8));
                }
            }
        }
    }
}

#[test]
fn gr37_reference_sample_is_dn() {
    let s = setup(&gr37(), &integer_phases(7));
    let r = analyze(&s.data, &s.bundle, &TimePoint::new(0.1, 0.2, -0.05), DEFAULT_EPS, DEFAULT_DN_TOL).unwrap();
    assert_eq!(r.divisor.degree(), 7);
    assert_eq!(r.divisor.points.iter().filter(|p| p.component == GAMMA0).count(), 3);
    assert!(r.ovals.verdict);
    assert_eq!(r.ovals.counts[0], 0);
    assert!(r.ovals.counts[1..].iter().all(|&n| n == 1));
    assert!(r.dn.all() && r.dn.max_deviation < 1e-9);
}

#[test]
fn perturbed_divisor_names_two_ovals() {
    let s = setup(&gr24(), &Phases::new(vec![-2.0, -1.0, 1.0, 2.0]).unwrap());
    let c = &s.bundle.curve;
    let r = analyze(&s.data, &s.bundle, &TimePoint::default(), DEFAULT_EPS, DEFAULT_DN_TOL).unwrap();
    assert!(r.ovals.verdict);
    let mut moved = 0;
    for (i, p) in r.divisor.points.iter().enumerate() {
        if p.component == GAMMA0 {
            continue;
        }
        let from = r.ovals.oval[i].unwrap();
        for x in [-1.0, 0.5, 2.0] {
            let q = CurvePoint { component: p.component, coord: Proj::finite(x) };
            let to = s.bundle.ovals.iter().find(|o| o.contains(&q)).unwrap().id;
            if to == from {
                continue;
            }
            let mut div = r.divisor.clone();
            div.points[i].coord = q.coord;
            let loc = locate_in_ovals(&div, &s.bundle.ovals, c, DEFAULT_EPS);
            assert!(!loc.verdict);
            let mut named = vec![from, to];
            named.sort();
            assert_eq!(loc.offending, named);
            let dn = dn_condition(&abel(&div, &s.bundle.differentials).unwrap(), DEFAULT_DN_TOL);
            assert!(!dn.all());
            moved += 1;
        }
    }
    assert!(moved >= 2);
}

#[test]
fn point_at_a_pole_is_divergent() {
    let s = one_soliton();
    let div = Divisor {
        time: TimePoint::default(),
        points: vec![DivisorPoint { component: GAMMA0, coord: Proj::finite(1.0), source: PointSource::Gamma0Root }],
    };
    let a = abel(&div, &s.bundle.differentials).unwrap();
    assert_eq!(a.divergent(), vec![1]);
    assert!(!dn_condition(&a, DEFAULT_DN_TOL).all());
    let loc = locate_in_ovals(&div, &s.bundle.ovals, &s.bundle.curve, DEFAULT_EPS);
    assert_eq!(loc.at_nodes, vec![0]);
}

#[test]
fn dn_condition_basics() {
    let all_pi = AbelVector { values: vec![AbelValue::Finite { re: 1.0, im: PI }; 3] };
    assert!(dn_condition(&all_pi, 1e-6).all());
    let off = AbelVector { values: vec![AbelValue::Finite { re: 0.0, im: 0.0 }, AbelValue::Finite { re: 0.0, im: PI }] };
    assert_eq!(dn_condition(&off, 1e-6).per_l, vec![false, true]);
    assert!(dn_deviation(PI + 1e-9) < 1e-8);
    assert!(dn_deviation(-PI) < 1e-12);
    assert!((dn_deviation(0.0) - PI).abs() < 1e-12);
}

/// Oval count and Abel test agree on random Schubert data.
#[test]
fn dn_property_small_diagrams() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for rows in shapes_up_to(6).into_iter().filter(|r| r.len() <= 3 && r[0] <= 3) {
        let shape = LeTableau::schubert(&rows).unwrap();
        for _ in 0..20 {
            let s = random_sample(&mut rng, &shape, &SampleRanges::default()).unwrap();
            let (out, report) = run_sample(&s, DEFAULT_EPS, DEFAULT_DN_TOL).unwrap();
            assert!(out.oval_verdict, "{rows:?} {:?}", report.ovals);
            assert!(out.dn_verdict, "{rows:?} {:?}", report.dn);
            assert!(out.agree());
            assert!(out.darboux < 1e-9);
            let k0 = s.phases.get(0);
            let kn = s.phases.get(s.phases.len() - 1);
            for p in report.divisor.points.iter().filter(|p| p.component == GAMMA0) {
                assert!(k0 < p.coord.value() && p.coord.value() < kn);
            }
        }
    }
}

/// Non-Schubert cells, including zero rows and zero columns: the divisor
/// still has degree g and the two verdicts agree.
#[test]
fn non_schubert_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for shape in le_tableaux_up_to(5) {
        let t = random_weights(&mut rng, &shape);
        let n = t.diagram().n();
        let phases = mm_spectral::sampling::random_phases(&mut rng, n, 2.0);
        let s = setup(&t, &phases);
        let r = analyze(&s.data, &s.bundle, &random_time(&mut rng), DEFAULT_EPS, DEFAULT_DN_TOL).unwrap();
        assert_eq!(r.divisor.degree(), s.bundle.curve.genus(), "{t}");
        assert_eq!(r.ovals.verdict, r.dn.all(), "{t}");
    }
}

#[test]
fn one_soliton_trajectory_stays_inside() {
    let s = one_soliton();
    for axis in [TimeAxis::X, TimeAxis::Y, TimeAxis::T] {
        let cfg = TrajectoryConfig { axis, base: TimePoint::default(), start: -5.0, end: 5.0, steps: 200, eps: DEFAULT_EPS };
        let tr = divisor_trajectory(&s.data, &s.bundle, &cfg).unwrap();
        assert!(tr.events.is_empty());
        for sample in &tr.samples {
            let g = sample.divisor.points[0].coord.value();
            let p = axis.at(&TimePoint::default(), sample.s);
            let (e1, e2) = (p.theta(-1.0).exp(), p.theta(1.0).exp());
            assert!((g - (e2 - e1) / (e1 + e2)).abs() < 1e-12);
            assert!(-1.0 < g && g < 1.0);
        }
    }
}

#[test]
fn gr24_trajectory_is_step_independent() {
    let s = setup(&gr24(), &Phases::new(vec![-2.0, -1.0, 1.0, 2.0]).unwrap());
    let run = |steps| {
        let cfg = TrajectoryConfig { axis: TimeAxis::X, base: TimePoint::default(), start: -10.0, end: 10.0, steps, eps: DEFAULT_EPS };
        divisor_trajectory(&s.data, &s.bundle, &cfg).unwrap()
    };
    let coarse = run(50);
    let fine = run(400);
    assert_eq!(coarse.events.len(), fine.events.len());
    assert!(!coarse.events.is_empty());
    for (a, b) in coarse.events.iter().zip(&fine.events) {
        assert!((a.s - b.s).abs() < 1e-9, "{} vs {}", a.s, b.s);
        assert_eq!(a.ovals, b.ovals);
        let kinds = |e: &TrajectoryEvent| e.events.iter().map(|x| x.kind).collect::<Vec<_>>();
        assert_eq!(kinds(a), kinds(b));
        assert!(!kinds(a).contains(&EventKind::Unglue));
    }
}

#[test]
fn random_trajectories_never_unglue() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for rows in [vec![2, 2], vec![2, 1], vec![3, 2]] {
        for axis in [TimeAxis::X, TimeAxis::Y, TimeAxis::T] {
            let s = random_setup(&mut rng, &rows);
            let cfg = TrajectoryConfig { axis, base: random_time(&mut rng), start: -6.0, end: 6.0, steps: 120, eps: DEFAULT_EPS };
            let tr = divisor_trajectory(&s.data, &s.bundle, &cfg).unwrap();
            for ev in &tr.events {
                assert!(ev.events.iter().all(|e| e.kind != EventKind::Unglue), "{rows:?} {axis:?} {:?}", ev.events);
            }
            for sample in &tr.samples {
                sample.divisor.check_degree(&s.bundle.curve).unwrap();
            }
        }
    }
}

#[test]
fn large_times_keep_one_point_per_oval() {
    for t in [gr37(), gr410()] {
        let s = setup(&t, &integer_phases(t.diagram().n()));
        let c = &s.bundle.curve;
        for axis in [TimeAxis::X, TimeAxis::Y, TimeAxis::T] {
            let cfg = TrajectoryConfig { axis, base: TimePoint::default(), start: -100.0, end: 100.0, steps: 100, eps: DEFAULT_EPS };
            let tr = divisor_trajectory(&s.data, &s.bundle, &cfg).unwrap();
            for sample in &tr.samples {
                let asg = locate_in_ovals(&sample.divisor, &s.bundle.ovals, c, 1e-10);
                assert_eq!(asg.counts[0], 0, "{axis:?} s = {}", sample.s);
                assert!(asg.counts.iter().all(|&n| n <= 1), "{axis:?} s = {}: {:?}", sample.s, asg.counts);
            }
        }
    }
}

#[test]
fn mismatched_data_is_an_input_error() {
    let s = setup(&gr24(), &integer_phases(4));
    let other = setup(&gr37(), &integer_phases(7));
    let err = extend_wave(&other.data, &s.bundle.curve, &TimePoint::default()).unwrap_err();
    assert!(!err.is_invariant());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn branch_shift_leaves_dn_unchanged(seed in any::<u64>(), l in 0usize..4, turns in -3i32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_setup(&mut rng, &[2, 2]);
        let r = analyze(&s.data, &s.bundle, &random_time(&mut rng), DEFAULT_EPS, DEFAULT_DN_TOL).unwrap();
        let mut shifted = r.abel.clone();
        if let AbelValue::Finite { im, .. } = &mut shifted.values[l] {
            *im += TAU * turns as f64;
        }
        let a = dn_condition(&r.abel, DEFAULT_DN_TOL);
        let b = dn_condition(&shifted, DEFAULT_DN_TOL);
        prop_assert_eq!(a.per_l, b.per_l);
    }

    #[test]
    fn degree_count(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_setup(&mut rng, &[3, 2, 2]);
        let div = divisor_at(&s.data, &s.bundle.curve, &random_time(&mut rng)).unwrap();
        let c = &s.bundle.curve;
        prop_assert_eq!(div.degree(), c.genus());
        prop_assert_eq!(div.points.iter().filter(|p| p.component == GAMMA0).count(), c.network().k());
        for w in c.whites() {
            prop_assert_eq!(div.points.iter().filter(|p| p.component == w).count(), 1);
        }
    }
}
