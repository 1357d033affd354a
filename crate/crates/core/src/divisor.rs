//! Wave function on the whole curve, its divisor, ovals, the Abel transform
//! and divisor trajectories.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{CurveBundle, CurvePoint, Differential, MMCurve, Oval, GAMMA0};
use crate::error::{Error, Result};
use crate::proj::Proj;
use crate::singular::{detect, SingularEvent};
use crate::soliton::{gamma0_divisor, SolitonData, TimePoint};

pub const DEFAULT_EPS: f64 = 1e-7;
pub const DEFAULT_DN_TOL: f64 = 1e-6;
pub const DEFAULT_ROOT_TOL: f64 = 1e-8;
pub const SOURCE_TOL: f64 = 1e-6;

/// Values of the extended wave function at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveFrame {
    pub time: TimePoint,
    /// Signed boundary values (-1)^{#sources before j} v_j.
    pub boundary: Vec<f64>,
    /// Value at the double point of each edge.
    pub edges: Vec<f64>,
    /// Per White component: values at infinity, 0, 1.
    pub white: Vec<(usize, [f64; 3])>,
    /// Per Black component: whether the three values agree up to weights.
    pub black_consistent: Vec<(usize, bool)>,
    /// Largest relative mismatch at the source edges.
    pub source_defect: f64,
}

impl WaveFrame {
    pub fn white_values(&self, component: usize) -> Option<[f64; 3]> {
        self.white.iter().find(|(c, _)| *c == component).map(|(_, v)| *v)
    }

    /// Value at a marked point of the curve: the edge value for a double
    /// point, the boundary value for an isolated kappa_j.
    pub fn value_at_edge(&self, e: usize) -> f64 {
        self.edges[e]
    }
}

fn source_count_before(c: &MMCurve, j: usize) -> usize {
    (1..j).filter(|&l| c.network().is_source(l)).count()
}

/// A value written as sum_J c_J e^{theta_J} over the (k+1)-subsets J, with
/// J indexed into `WaveBasis::powers`.
type Expansion = Vec<(usize, f64)>;

/// A summed coefficient this small against the sum of its absolute
/// contributions is an exact cancellation.
const CANCEL_TOL: f64 = 1e-10;

/// Boundary and edge values expanded over exponentials. The coefficients do
/// not depend on time, and cancelling ones are dropped, so the values stay
/// accurate where the leading exponentials cancel far from the origin.
struct WaveBasis {
    /// Sums of kappa, kappa^2, kappa^3 over each J.
    powers: Vec<[f64; 3]>,
    boundary: Vec<Expansion>,
    edges: Vec<Expansion>,
}

impl WaveBasis {
    fn new(d: &SolitonData, c: &MMCurve) -> Result<WaveBasis> {
        let g = c.network();
        let kappa = d.phases().values();
        let mut index = BTreeMap::new();
        let mut powers = Vec::new();
        let mut boundary = Vec::with_capacity(g.n());
        for j in 0..g.n() {
            let sign = if source_count_before(c, j + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut b = Expansion::new();
            for t in d.terms().iter().filter(|t| !t.subset.contains(&j)) {
                let mut set = t.subset.clone();
                set.push(j);
                set.sort_unstable();
                let id = *index.entry(set).or_insert_with_key(|set: &Vec<usize>| {
                    let k = set.iter().map(|&i| kappa[i]);
                    powers.push([k.clone().sum(), k.clone().map(|x| x * x).sum(), k.map(|x| x * x * x).sum()]);
                    powers.len() - 1
                });
                let q: f64 = t.subset.iter().map(|&i| kappa[j] - kappa[i]).product();
                b.push((id, sign * t.log_coef.exp() * q));
            }
            boundary.push(b);
        }
        // (coefficient, sum of absolute contributions) per J
        let mut acc: Vec<BTreeMap<usize, (f64, f64)>> = vec![BTreeMap::new(); g.edges.len()];
        for &x in g.topological_order()?.iter().rev() {
            let mut sum: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
            match g.boundary_label(x) {
                Some(j) => {
                    for &(i, c) in &boundary[j - 1] {
                        sum.insert(i, (c, c.abs()));
                    }
                }
                None => {
                    for o in g.out_edges(x) {
                        for (&i, &(c, a)) in &acc[o] {
                            let e = sum.entry(i).or_default();
                            e.0 += c;
                            e.1 += a;
                        }
                    }
                }
            }
            for e in g.in_edges(x) {
                let w = crate::num::to_f64(&g.edges[e].weight);
                acc[e] = sum.iter().map(|(&i, &(c, a))| (i, (w * c, w.abs() * a))).collect();
            }
        }
        let edges = acc
            .into_iter()
            .map(|m| m.into_iter().filter(|&(_, (c, a))| c.abs() > CANCEL_TOL * a).map(|(i, (c, _))| (i, c)).collect())
            .collect();
        Ok(WaveBasis { powers, boundary, edges })
    }

    fn exponents(&self, p: &TimePoint) -> Vec<f64> {
        self.powers.iter().map(|q| q[0] * p.x + q[1] * p.y + q[2] * p.t).collect()
    }
}

fn evaluate(x: &Expansion, ex: &[f64], shift: f64) -> f64 {
    x.iter().map(|&(i, c)| c * (ex[i] - shift).exp()).sum()
}

fn max_exponent<'a>(xs: impl IntoIterator<Item = &'a Expansion>, ex: &[f64]) -> f64 {
    xs.into_iter().flatten().map(|&(i, _)| ex[i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Extends the boundary values inward by backward recursion: an edge carries
/// its weight times the sum over the edges leaving its head; an edge into a
/// sink carries its weight times the signed sink value. The values so
/// obtained on source edges must reproduce the signed source values.
pub fn extend_wave(d: &SolitonData, c: &MMCurve, p: &TimePoint) -> Result<WaveFrame> {
    let g = c.network();
    if d.n() != g.n() || d.k() != g.k() {
        return Err(Error::Input(format!(
            "soliton data Gr({}, {}) does not match network Gr({}, {})",
            d.k(),
            d.n(),
            g.k(),
            g.n()
        )));
    }
    let basis = WaveBasis::new(d, c)?;
    let ex = basis.exponents(p);
    let m = ex.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let boundary: Vec<f64> = basis.boundary.iter().map(|b| evaluate(b, &ex, m)).collect();
    let val: Vec<f64> = basis.edges.iter().map(|e| evaluate(e, &ex, m)).collect();
    let weights: Vec<f64> = g.edges.iter().map(|e| crate::num::to_f64(&e.weight)).collect();
    let scale = boundary.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut source_defect = 0.0f64;
    let mut worst = None;
    for l in 1..=g.n() {
        if !g.is_source(l) {
            continue;
        }
        let b = g.boundary_vertex(l);
        let got: f64 = g.out_edges(b).iter().map(|&e| val[e]).sum();
        let want = boundary[l - 1];
        let rel = (got - want).abs() / scale.max(f64::MIN_POSITIVE);
        if rel > source_defect {
            source_defect = rel;
            worst = Some((l, got, want));
        }
    }
    if source_defect > SOURCE_TOL {
        let (l, got, want) = worst.unwrap();
        return Err(Error::Invariant(format!(
            "source consistency fails at label {l}: recursion gives {got:e}, signed boundary value {want:e} (relative {source_defect:e}); boundary values {boundary:?}"
        )));
    }
    // each White component gets its own shift so that its values do not
    // underflow together
    let mut white = Vec::new();
    for comp in c.whites() {
        let local = c.local_edges(comp).unwrap();
        let shift = max_exponent(local.iter().map(|&e| &basis.edges[e]), &ex);
        let shift = if shift.is_finite() { shift } else { m };
        white.push((comp, local.map(|e| evaluate(&basis.edges[e], &ex, shift))));
    }
    let mut black_consistent = Vec::new();
    for comp in c.blacks() {
        let [out, a, b] = c.local_edges(comp).unwrap();
        let base = val[out];
        let ok = [a, b].iter().all(|&e| {
            let x = val[e] / weights[e];
            (x - base).abs() <= 1e-9 * scale.max(base.abs()).max(f64::MIN_POSITIVE)
        });
        black_consistent.push((comp, ok));
    }
    Ok(WaveFrame {
        time: *p,
        boundary,
        edges: val,
        white,
        black_consistent,
        source_defect,
    })
}

/// The degree-one rational function (a z + b) / (c z + d).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    /// Interpolates the values at infinity, 0 and 1. None when all three
    /// agree (constant) or when two coincide and the third differs, in which
    /// case no degree-one interpolant exists.
    pub fn from_values(v_inf: f64, v0: f64, v1: f64) -> Option<Mobius> {
        let m = if v_inf.is_infinite() {
            // pole at infinity: a z + b with b = v0, a = v1 - v0
            Mobius { a: v1 - v0, b: v0, c: 0.0, d: 1.0 }
        } else {
            // f(0) = b/d = v0, f(inf) = a/c = v_inf, f(1) = (a+b)/(c+d) = v1
            let c = v1 - v0;
            let d = v_inf - v1;
            Mobius { a: v_inf * c, b: v0 * d, c, d }
        };
        (m.a * m.d - m.b * m.c != 0.0).then_some(m)
    }

    pub fn eval(&self, z: &Proj) -> Proj {
        Proj::new(self.a * z.p + self.b * z.q, self.c * z.p + self.d * z.q)
    }

    pub fn zero(&self) -> Proj {
        Proj::new(-self.b, self.a)
    }

    pub fn pole(&self) -> Proj {
        Proj::new(-self.d, self.c)
    }
}

/// z* = v0 (v1 - v_inf) / (v_inf (v1 - v0)), the zero of the interpolant.
pub fn mobius_zero(v_inf: f64, v0: f64, v1: f64) -> Option<Proj> {
    Mobius::from_values(v_inf, v0, v1).map(|m| m.zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PointSource {
    WhiteZero,
    Gamma0Root,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivisorPoint {
    pub component: usize,
    pub coord: Proj,
    pub source: PointSource,
}

impl DivisorPoint {
    pub fn point(&self) -> CurvePoint {
        CurvePoint {
            component: self.component,
            coord: self.coord,
        }
    }
}

/// White points first by component id, then the Gamma_0 roots in
/// increasing order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divisor {
    pub time: TimePoint,
    pub points: Vec<DivisorPoint>,
}

impl Divisor {
    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn check_degree(&self, c: &MMCurve) -> Result<()> {
        let whites = c.whites();
        let k = c.network().k() - isolated_sources(c).len();
        let on_gamma0 = self.points.iter().filter(|p| p.component == GAMMA0).count();
        let per_white = whites
            .iter()
            .all(|&w| self.points.iter().filter(|p| p.component == w).count() == 1);
        if self.degree() != c.genus() || on_gamma0 != k || !per_white {
            return Err(Error::Invariant(format!(
                "divisor has {} points ({on_gamma0} on Gamma_0) for genus {} and k = {k}",
                self.degree(),
                c.genus()
            )));
        }
        Ok(())
    }
}

/// Sources of a zero row: marked points of Gamma_0 that carry no divisor
/// point.
pub fn isolated_sources(c: &MMCurve) -> Vec<usize> {
    c.isolated_labels().into_iter().filter(|&l| c.network().is_source(l)).collect()
}

/// The zero of the wave function on a White component with out-values
/// (v0, v1): [v0 : v0 + v1]. It is the pole of the ratio of the interpolants
/// at any other time to the one at this time.
pub fn white_zero(v0: f64, v1: f64) -> Option<Proj> {
    let z = Proj::new(v0, v0 + v1);
    (z.p != 0.0 || z.q != 0.0).then_some(z)
}

pub fn compute_divisor(wf: &WaveFrame, c: &MMCurve, d: &SolitonData) -> Result<Divisor> {
    compute_divisor_with(wf, c, d, DEFAULT_ROOT_TOL)
}

pub fn compute_divisor_with(wf: &WaveFrame, c: &MMCurve, d: &SolitonData, root_tol: f64) -> Result<Divisor> {
    let mut points = Vec::with_capacity(c.genus());
    for &(comp, [vi, v0, v1]) in &wf.white {
        // v0 + v1 is the incoming value over its weight; taking it from there
        // avoids the cancellation when the zero approaches infinity
        let inf = c.local_edges(comp).unwrap()[0];
        let w = crate::num::to_f64(&c.network().edges[inf].weight);
        let sum = vi / w;
        let sum = if sum.is_finite() { sum } else { v0 + v1 };
        let coord = Some(Proj::new(v0, sum)).filter(|z| z.p != 0.0 || z.q != 0.0).ok_or_else(|| {
            Error::Invariant(format!("wave function vanishes identically on component {comp}"))
        })?;
        points.push(DivisorPoint {
            component: comp,
            coord,
            source: PointSource::WhiteZero,
        });
    }
    let mut roots = gamma0_divisor(d, &wf.time, root_tol)?;
    // a source without edges contributes the constant factor (zeta - kappa_l)
    for l in isolated_sources(c) {
        let kappa = d.phases().get(l - 1);
        let nearest = roots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - kappa).abs().total_cmp(&(b.1 - kappa).abs()))
            .map(|(i, _)| i);
        match nearest {
            Some(i) if (roots[i] - kappa).abs() <= 1e-6 * kappa.abs().max(1.0) => {
                roots.remove(i);
            }
            _ => {
                return Err(Error::Invariant(format!(
                    "no Sato root at the isolated source kappa_{l} = {kappa}"
                )))
            }
        }
    }
    for r in roots {
        points.push(DivisorPoint {
            component: GAMMA0,
            coord: Proj::finite(r),
            source: PointSource::Gamma0Root,
        });
    }
    let div = Divisor {
        time: wf.time,
        points,
    };
    div.check_degree(c)?;
    Ok(div)
}

pub fn divisor_at(d: &SolitonData, c: &MMCurve, p: &TimePoint) -> Result<Divisor> {
    let wf = extend_wave(d, c, p)?;
    compute_divisor(&wf, c, d)
}

/// Divisor on White components recovered as poles of the ratio interpolants
/// between two times. Used as an independent check of `white_zero`.
pub fn white_poles_from_ratios(at: &WaveFrame, other: &WaveFrame) -> Vec<(usize, Option<Proj>)> {
    at.white
        .iter()
        .zip(&other.white)
        .map(|(&(comp, a), &(_, b))| {
            let pole = Mobius::from_values(b[0] / a[0], b[1] / a[1], b[2] / a[2]).map(|m| m.pole());
            (comp, pole)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OvalAssignment {
    /// Oval of each divisor point; None when the point sits within eps of a
    /// double point.
    pub oval: Vec<Option<usize>>,
    pub counts: Vec<usize>,
    /// Ovals whose count is wrong.
    pub offending: Vec<usize>,
    pub at_nodes: Vec<usize>,
    pub verdict: bool,
}

fn near_node(c: &MMCurve, p: &CurvePoint, eps: f64) -> bool {
    c.nodes_on(p.component)
        .iter()
        .any(|(_, q)| p.coord.chart_offset(&q.coord).abs() < eps)
}

pub fn locate_in_ovals(div: &Divisor, ovals: &[Oval], c: &MMCurve, eps: f64) -> OvalAssignment {
    let mut counts = vec![0; ovals.len()];
    let mut oval = Vec::with_capacity(div.points.len());
    let mut at_nodes = Vec::new();
    for (i, p) in div.points.iter().enumerate() {
        let pt = p.point();
        if near_node(c, &pt, eps) {
            at_nodes.push(i);
            oval.push(None);
            continue;
        }
        let found = ovals.iter().find(|o| o.contains(&pt)).map(|o| o.id);
        if let Some(id) = found {
            counts[id] += 1;
        }
        oval.push(found);
    }
    let offending: Vec<usize> = counts
        .iter()
        .enumerate()
        .filter(|&(id, &n)| n != usize::from(id != 0))
        .map(|(id, _)| id)
        .collect();
    let verdict = offending.is_empty() && at_nodes.is_empty() && oval.iter().all(Option::is_some);
    OvalAssignment {
        oval,
        counts,
        offending,
        at_nodes,
        verdict,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AbelValue {
    Finite { re: f64, im: f64 },
    Divergent,
}

impl AbelValue {
    pub fn complex(&self) -> Option<Complex64> {
        match *self {
            AbelValue::Finite { re, im } => Some(Complex64::new(re, im)),
            AbelValue::Divergent => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbelVector {
    /// A_1 .. A_g with imaginary parts in [0, 2 pi).
    pub values: Vec<AbelValue>,
}

impl AbelVector {
    pub fn divergent(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v, AbelValue::Divergent))
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Base point of the integrals on a component: infinity on Gamma_0, and on
/// an internal component the marked point that b_l does not pass through.
fn base_point(component: usize, poles: &[(Proj, i64)]) -> Result<Proj> {
    if component == GAMMA0 {
        return Ok(Proj::INFINITY);
    }
    [Proj::INFINITY, Proj::ZERO, Proj::ONE]
        .into_iter()
        .find(|m| !poles.iter().any(|(q, _)| q.same(m)))
        .ok_or_else(|| Error::Invariant(format!("cycle passes all marked points of component {component}")))
}

/// Sum of r_i log of l_{a_i}(gamma) / l_{a_i}(base) over the poles; None if
/// gamma is a pole.
fn log_integral(poles: &[(Proj, i64)], base: &Proj, gamma: &Proj) -> Option<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, r) in poles {
        let num = gamma.vanishing_form(a);
        if num == 0.0 {
            return None;
        }
        let ratio = num / base.vanishing_form(a);
        acc += Complex64::new(ratio, 0.0).ln() * (*r as f64);
    }
    Some(acc)
}

pub fn abel(div: &Divisor, ws: &[Differential]) -> Result<AbelVector> {
    let mut values = Vec::with_capacity(ws.len());
    for w in ws {
        let mut total = Complex64::new(0.0, 0.0);
        let mut divergent = false;
        for p in &div.points {
            let poles = w.on(p.component);
            if poles.is_empty() {
                continue;
            }
            let base = base_point(p.component, poles)?;
            match log_integral(poles, &base, &p.coord) {
                Some(z) => total += z,
                None => divergent = true,
            }
        }
        values.push(if divergent {
            AbelValue::Divergent
        } else {
            AbelValue::Finite {
                re: total.re,
                im: total.im.rem_euclid(TAU),
            }
        });
    }
    Ok(AbelVector { values })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DnVerdict {
    pub per_l: Vec<bool>,
    pub max_deviation: f64,
}

impl DnVerdict {
    pub fn all(&self) -> bool {
        self.per_l.iter().all(|&b| b)
    }
}

/// Distance of Im A_l from pi on the circle.
pub fn dn_deviation(im: f64) -> f64 {
    let x = (im - PI).rem_euclid(TAU);
    x.min(TAU - x)
}

pub fn dn_condition(av: &AbelVector, tol: f64) -> DnVerdict {
    let mut per_l = Vec::with_capacity(av.values.len());
    let mut max_deviation = 0.0f64;
    for v in &av.values {
        let dev = match v {
            AbelValue::Finite { im, .. } => dn_deviation(*im),
            AbelValue::Divergent => f64::INFINITY,
        };
        max_deviation = max_deviation.max(dev);
        per_l.push(dev < tol);
    }
    DnVerdict {
        per_l,
        max_deviation,
    }
}

/// Full divisor report at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisorReport {
    pub divisor: Divisor,
    pub ovals: OvalAssignment,
    pub abel: AbelVector,
    pub dn: DnVerdict,
}

pub fn analyze(d: &SolitonData, b: &CurveBundle, p: &TimePoint, eps: f64, dn_tol: f64) -> Result<DivisorReport> {
    let divisor = divisor_at(d, &b.curve, p)?;
    let ovals = locate_in_ovals(&divisor, &b.ovals, &b.curve, eps);
    let abel = abel(&divisor, &b.differentials)?;
    let dn = dn_condition(&abel, dn_tol);
    Ok(DivisorReport {
        divisor,
        ovals,
        abel,
        dn,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TimeAxis {
    X,
    Y,
    T,
}

impl TimeAxis {
    pub fn at(&self, base: &TimePoint, s: f64) -> TimePoint {
        let mut p = *base;
        match self {
            TimeAxis::X => p.x = s,
            TimeAxis::Y => p.y = s,
            TimeAxis::T => p.t = s,
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub s: f64,
    pub divisor: Divisor,
    /// For each finite oval, the component holding its point.
    pub holders: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryEvent {
    /// Time parameter of the crossing, located by bisection.
    pub s: f64,
    /// Finite ovals whose point changed component.
    pub ovals: Vec<usize>,
    pub events: Vec<SingularEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub axis: TimeAxis,
    pub samples: Vec<TrajectorySample>,
    pub events: Vec<TrajectoryEvent>,
}

#[derive(Clone, Copy, Debug)]
pub struct TrajectoryConfig {
    pub axis: TimeAxis,
    pub base: TimePoint,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    pub eps: f64,
}

/// Points this close to a node have no reliable oval; far along an axis the
/// divisor converges onto nodes to machine precision.
const ON_NODE: f64 = 1e-10;

/// Oval holders, with points on a node left as `None`.
fn holders(div: &Divisor, b: &CurveBundle, eps: f64) -> Result<Vec<Option<usize>>> {
    let asg = locate_in_ovals(div, &b.ovals, &b.curve, eps);
    let mut out = vec![None; b.ovals.len() - 1];
    for (i, o) in asg.oval.iter().enumerate() {
        if let Some(id) = o {
            if *id == 0 || out[id - 1].is_some() {
                return Err(Error::Invariant(format!(
                    "divisor at s = {} violates one point per oval: counts {:?}",
                    div.time.t, asg.counts
                )));
            }
            out[id - 1] = Some(div.points[i].component);
        }
    }
    Ok(out)
}

fn changed(a: &[Option<usize>], b: &[Option<usize>]) -> Vec<usize> {
    a.iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| x.is_some() && y.is_some() && x != y)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Samples the divisor along one time axis. When the point of an oval moves
/// to another component between two samples, the crossing is located by
/// bisection and classified by `detect` at the crossing.
pub fn divisor_trajectory(d: &SolitonData, b: &CurveBundle, cfg: &TrajectoryConfig) -> Result<Trajectory> {
    if cfg.steps == 0 || !(cfg.end > cfg.start) {
        return Err(Error::Input("trajectory needs steps > 0 and end > start".into()));
    }
    let grid: Vec<f64> = (0..=cfg.steps)
        .map(|i| cfg.start + (cfg.end - cfg.start) * i as f64 / cfg.steps as f64)
        .collect();
    let sample = |s: f64| -> Result<TrajectorySample> {
        let divisor = divisor_at(d, &b.curve, &cfg.axis.at(&cfg.base, s))?;
        let holders = holders(&divisor, b, ON_NODE)?;
        Ok(TrajectorySample { s, divisor, holders })
    };
    let samples: Vec<TrajectorySample> = grid.par_iter().map(|&s| sample(s)).collect::<Result<_>>()?;
    let mut events = Vec::new();
    for w in samples.windows(2) {
        let moved = changed(&w[0].holders, &w[1].holders);
        if moved.is_empty() {
            continue;
        }
        let (mut lo, mut hi) = (w[0].clone(), w[1].clone());
        while hi.s - lo.s > 1e-13 * hi.s.abs().max(1.0) {
            let mut mid = sample(0.5 * (lo.s + hi.s))?;
            for (m, l) in mid.holders.iter_mut().zip(&lo.holders) {
                if m.is_none() {
                    *m = *l;
                }
            }
            if changed(&lo.holders, &mid.holders).is_empty() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let crossing = 0.5 * (lo.s + hi.s);
        let at = divisor_at(d, &b.curve, &cfg.axis.at(&cfg.base, crossing))?;
        let probe_eps = cfg.eps.max(1e-5);
        events.push(TrajectoryEvent {
            s: crossing,
            ovals: changed(&lo.holders, &hi.holders),
            events: detect(&at, &b.curve, probe_eps),
        });
    }
    Ok(Trajectory {
        axis: cfg.axis,
        samples,
        events,
    })
}
