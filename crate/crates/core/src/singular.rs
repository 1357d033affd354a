//! Divisor points at double points: detection, blow-up charts and Abel
//! probes along approach paths.

use serde::Serialize;

use crate::curve::{CurvePoint, Differential, MMCurve, GAMMA0};
use crate::divisor::{abel, divisor_at, AbelValue, Divisor, TimeAxis};
use crate::error::{Error, Result};
use crate::proj::Proj;
use crate::soliton::{SolitonData, TimePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Unglue,
    PairNode,
    TripleBlack,
}

/// A divisor point close to a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NearPoint {
    /// Index into the divisor.
    pub index: usize,
    pub component: usize,
    pub coord: Proj,
    pub edge: usize,
    /// Local coordinate of the node on this component.
    pub node: Proj,
    /// Signed offset in the chart where the node is finite.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularEvent {
    pub kind: EventKind,
    /// Ordered as in the divisor.
    pub points: Vec<NearPoint>,
    pub edges: Vec<usize>,
    pub black: Option<usize>,
    pub composite: bool,
}

impl SingularEvent {
    pub fn deltas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.delta).collect()
    }
}

/// All (point, node) pairs within eps.
pub fn near_points(div: &Divisor, c: &MMCurve, eps: f64) -> Vec<NearPoint> {
    let mut out = Vec::new();
    for (i, p) in div.points.iter().enumerate() {
        for (edge, q) in c.nodes_on(p.component) {
            let delta = p.coord.chart_offset(&q.coord);
            if delta.abs() < eps {
                out.push(NearPoint {
                    index: i,
                    component: p.component,
                    coord: p.coord,
                    edge,
                    node: q.coord,
                    delta,
                });
            }
        }
    }
    out
}

fn at_end(near: &[NearPoint], end: &CurvePoint, edge: usize) -> Option<NearPoint> {
    near.iter()
        .find(|n| n.edge == edge && n.component == end.component && n.node.same(&end.coord))
        .copied()
}

/// Groups the near points: both ends of one edge make a PairNode, the far
/// ends of all three edges of a Black component make a TripleBlack, and any
/// point in neither group is an Unglue. A point in two groups marks both as
/// composite.
pub fn detect(div: &Divisor, c: &MMCurve, eps: f64) -> Vec<SingularEvent> {
    let near = near_points(div, c, eps);
    let mut events = Vec::new();
    for dp in &c.double_points {
        if let (Some(a), Some(b)) = (at_end(&near, &dp.tail, dp.edge), at_end(&near, &dp.head, dp.edge)) {
            let mut points = vec![a, b];
            points.sort_by_key(|p| p.index);
            events.push(SingularEvent {
                kind: EventKind::PairNode,
                points,
                edges: vec![dp.edge],
                black: None,
                composite: false,
            });
        }
    }
    for comp in c.blacks() {
        let edges = c.local_edges(comp).unwrap();
        let far: Vec<Option<NearPoint>> = edges
            .iter()
            .map(|&e| {
                let dp = &c.double_points[e];
                let end = if dp.tail.component == comp { dp.head } else { dp.tail };
                at_end(&near, &end, e)
            })
            .collect();
        if far.iter().all(Option::is_some) {
            let mut points: Vec<NearPoint> = far.into_iter().map(Option::unwrap).collect();
            points.sort_by_key(|p| p.index);
            events.push(SingularEvent {
                kind: EventKind::TripleBlack,
                points,
                edges: edges.to_vec(),
                black: Some(comp),
                composite: false,
            });
        }
    }
    for n in &near {
        let grouped = events
            .iter()
            .any(|ev| ev.points.iter().any(|p| p.index == n.index && p.edge == n.edge));
        if !grouped {
            events.push(SingularEvent {
                kind: EventKind::Unglue,
                points: vec![*n],
                edges: vec![n.edge],
                black: None,
                composite: false,
            });
        }
    }
    let mut uses = vec![0usize; div.points.len()];
    for ev in &events {
        for p in &ev.points {
            uses[p.index] += 1;
        }
    }
    for ev in &mut events {
        ev.composite = ev.points.iter().any(|p| uses[p.index] > 1);
    }
    events
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ChartPoint {
    /// Homogeneous ratio normalized so the largest entry has modulus 1.
    Resolved(Vec<f64>),
    /// All offsets vanish; the whole projective fibre, with the signs of the
    /// approach attached when known.
    Unresolved { signs: Vec<i8> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowUpChart {
    pub kind: EventKind,
    pub base: Vec<f64>,
    pub ratio: ChartPoint,
}

impl BlowUpChart {
    /// Projective equality of resolved ratios.
    pub fn same_ratio(&self, other: &[f64], tol: f64) -> bool {
        let ChartPoint::Resolved(r) = &self.ratio else {
            return false;
        };
        if r.len() != other.len() {
            return false;
        }
        let m = other.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if m == 0.0 {
            return false;
        }
        let o: Vec<f64> = other.iter().map(|x| x / m).collect();
        let diff = |s: f64| r.iter().zip(&o).all(|(a, b)| (a - s * b).abs() <= tol);
        diff(1.0) || diff(-1.0)
    }
}

pub fn blowup_chart(ev: &SingularEvent) -> Result<BlowUpChart> {
    if ev.kind == EventKind::Unglue {
        return Err(Error::Input("no blow-up chart for a single point at a node".into()));
    }
    let base = ev.deltas();
    let m = base.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let ratio = if m == 0.0 {
        ChartPoint::Unresolved {
            signs: base.iter().map(|x| x.signum() as i8 * i8::from(*x != 0.0)).collect(),
        }
    } else {
        ChartPoint::Resolved(base.iter().map(|x| x / m).collect())
    };
    Ok(BlowUpChart {
        kind: ev.kind,
        base,
        ratio,
    })
}

/// A one-parameter family of divisors approaching a singular configuration
/// as s goes to 0.
pub trait ProbePath: Sync {
    fn divisor_at(&self, s: f64) -> Result<Divisor>;
}

/// Moves chosen points of a fixed divisor to node + c s in the chart of the
/// node (1/gamma = c s when the node is infinity).
#[derive(Clone, Debug)]
pub struct NodeApproach {
    pub base: Divisor,
    pub moves: Vec<(usize, Proj, f64)>,
}

impl ProbePath for NodeApproach {
    fn divisor_at(&self, s: f64) -> Result<Divisor> {
        let mut div = self.base.clone();
        for &(i, node, c) in &self.moves {
            let p = div
                .points
                .get_mut(i)
                .ok_or_else(|| Error::Input(format!("no divisor point {i}")))?;
            p.coord = if node.is_infinite() {
                Proj::new(1.0, c * s)
            } else {
                Proj::finite(node.value() + c * s)
            };
        }
        Ok(div)
    }
}

/// KP time evolution approaching a singular time s* from one side.
pub struct TimeApproach<'a> {
    pub data: &'a SolitonData,
    pub curve: &'a MMCurve,
    pub axis: TimeAxis,
    pub base: TimePoint,
    pub critical: f64,
    /// +1 approaches from above, -1 from below.
    pub side: f64,
}

impl ProbePath for TimeApproach<'_> {
    fn divisor_at(&self, s: f64) -> Result<Divisor> {
        let p = self.axis.at(&self.base, self.critical + self.side * s);
        divisor_at(self.data, self.curve, &p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Growth {
    Bounded,
    LogDivergent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeFit {
    pub l: usize,
    pub slope: f64,
    pub residual: f64,
    pub growth: Growth,
}

pub const SLOPE_TOL: f64 = 0.1;
pub const FIT_RESIDUAL_TOL: f64 = 0.05;

/// n geometric samples from 1e-2 down to 1e-8.
pub fn default_samples(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| 10f64.powf(-2.0 - 6.0 * i as f64 / (n - 1) as f64))
        .collect()
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let res = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum::<f64>()
        / n;
    (slope, res.sqrt())
}

/// Fits Re A_l against log s over the last decade of samples.
pub fn abel_probe(path: &dyn ProbePath, ws: &[Differential], samples: &[f64]) -> Result<Vec<ProbeFit>> {
    let s_min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let tail: Vec<f64> = samples.iter().copied().filter(|&s| s > 0.0 && s <= 10.0 * s_min).collect();
    if tail.len() < 3 {
        return Err(Error::Input("need at least 3 samples in the last decade".into()));
    }
    let mut re = vec![Vec::with_capacity(tail.len()); ws.len()];
    for &s in &tail {
        let av = abel(&path.divisor_at(s)?, ws)?;
        for (l, v) in av.values.iter().enumerate() {
            match v {
                AbelValue::Finite { re: x, .. } => re[l].push(*x),
                AbelValue::Divergent => re[l].push(f64::NAN),
            }
        }
    }
    let xs: Vec<f64> = tail.iter().map(|s| s.ln()).collect();
    Ok(re
        .iter()
        .enumerate()
        .map(|(l, ys)| {
            let (slope, residual) = fit_line(&xs, ys);
            let growth = if !slope.is_finite() || residual > FIT_RESIDUAL_TOL {
                Growth::Inconclusive
            } else if slope.abs() <= SLOPE_TOL {
                Growth::Bounded
            } else if (slope.abs() - 1.0).abs() <= SLOPE_TOL {
                Growth::LogDivergent
            } else {
                Growth::Inconclusive
            };
            ProbeFit {
                l: l + 1,
                slope,
                residual,
                growth,
            }
        })
        .collect())
}

/// Index of the divisor point on `component` (the first Gamma_0 point when
/// component is Gamma_0 and `nth` is 0, and so on).
pub fn point_index(div: &Divisor, component: usize, nth: usize) -> Option<usize> {
    div.points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.component == component)
        .nth(if component == GAMMA0 { nth } else { 0 })
        .map(|(i, _)| i)
}
