//! Tau functions, the KP field, the Sato polynomial and tropical regions.
//!
//! Every sum over k-subsets is evaluated as a probability distribution
//! pi_I proportional to Delta_I V_I exp(theta_I) with the largest exponent
//! shifted out, so nothing overflows for large times.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::companion_roots;
use crate::network::{all_minors, k_subsets, matrix_to_f64};
use crate::num::to_f64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phases(Vec<f64>);

impl Phases {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.iter().any(|x| !x.is_finite()) {
            return Err(Error::Phases("phases must be finite".into()));
        }
        if kappa.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Phases("phases must be strictly increasing".into()));
        }
        Ok(Phases(kappa))
    }

    /// n equally spaced phases on [-1, 1].
    pub fn uniform(n: usize) -> Self {
        if n == 1 {
            return Phases(vec![0.0]);
        }
        Phases((0..n).map(|j| -1.0 + 2.0 * j as f64 / (n - 1) as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TimePoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl TimePoint {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        TimePoint { x, y, t }
    }

    pub fn theta(&self, kappa: f64) -> f64 {
        kappa * self.x + kappa * kappa * self.y + kappa * kappa * kappa * self.t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    /// 0-based column subset.
    pub subset: Vec<usize>,
    pub minor: f64,
    /// log(Delta_I * Vandermonde(kappa_I)).
    pub log_coef: f64,
    /// Sums of kappa, kappa^2, kappa^3 over the subset.
    pub powers: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolitonData {
    phases: Phases,
    a: Vec<Vec<f64>>,
    terms: Vec<Term>,
}

fn vandermonde(kappa: &[f64], subset: &[usize]) -> f64 {
    let mut v = 1.0;
    for (i, &a) in subset.iter().enumerate() {
        for &b in &subset[i + 1..] {
            v *= kappa[b] - kappa[a];
        }
    }
    v
}

impl SolitonData {
    /// From an exact matrix; the minors are computed exactly and must be
    /// non-negative with at least one positive.
    pub fn new(phases: Phases, a: &[Vec<BigRational>]) -> Result<Self> {
        let n = a.first().map_or(phases.len(), Vec::len);
        if n != phases.len() {
            return Err(Error::Phases(format!(
                "{} phases for a matrix with {n} columns",
                phases.len()
            )));
        }
        let minors = all_minors(a);
        if let Some((s, _)) = minors.iter().find(|(_, m)| m.is_negative()) {
            return Err(Error::Input(format!("negative minor at columns {s:?}")));
        }
        let exact: BTreeMap<Vec<usize>, f64> = minors
            .into_iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(s, m)| (s.iter().map(|c| c - 1).collect(), to_f64(&m)))
            .collect();
        Self::from_minors(phases, matrix_to_f64(a), exact)
    }

    /// From a floating matrix; minors below `1e-13` in magnitude are dropped.
    pub fn from_f64(phases: Phases, a: Vec<Vec<f64>>) -> Result<Self> {
        let k = a.len();
        let n = a.first().map_or(phases.len(), Vec::len);
        if n != phases.len() {
            return Err(Error::Phases(format!(
                "{} phases for a matrix with {n} columns",
                phases.len()
            )));
        }
        let mut minors = BTreeMap::new();
        for s in k_subsets(n, k) {
            let m = nalgebra::DMatrix::from_fn(k, k, |i, j| a[i][s[j]]).determinant();
            if m < -1e-13 {
                return Err(Error::Input(format!("negative minor at columns {s:?}")));
            }
            if m > 1e-13 {
                minors.insert(s, m);
            }
        }
        Self::from_minors(phases, a, minors)
    }

    fn from_minors(phases: Phases, a: Vec<Vec<f64>>, minors: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        let kappa = phases.values();
        let terms: Vec<Term> = minors
            .into_iter()
            .map(|(subset, minor)| {
                let v = vandermonde(kappa, &subset);
                let mut powers = [0.0; 3];
                for &i in &subset {
                    powers[0] += kappa[i];
                    powers[1] += kappa[i] * kappa[i];
                    powers[2] += kappa[i] * kappa[i] * kappa[i];
                }
                Term {
                    log_coef: minor.ln() + v.ln(),
                    subset,
                    minor,
                    powers,
                }
            })
            .collect();
        if terms.is_empty() {
            return Err(Error::Input("all maximal minors vanish".into()));
        }
        Ok(SolitonData { phases, a, terms })
    }

    pub fn phases(&self) -> &Phases {
        &self.phases
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn exponent(&self, term: &Term, p: &TimePoint) -> f64 {
        term.log_coef + term.powers[0] * p.x + term.powers[1] * p.y + term.powers[2] * p.t
    }

    /// Normalised term weights pi_I and log tau.
    pub fn distribution(&self, p: &TimePoint) -> (Vec<f64>, f64) {
        let ex: Vec<f64> = self.terms.iter().map(|t| self.exponent(t, p)).collect();
        let m = ex.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ex.iter().map(|e| (e - m).exp()).collect();
        let s: f64 = w.iter().sum();
        (w.iter().map(|x| x / s).collect(), m + s.ln())
    }
}

/// tau kept as its logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tau {
    pub log: f64,
}

impl Tau {
    pub fn value(&self) -> f64 {
        self.log.exp()
    }
}

pub fn tau(d: &SolitonData, p: &TimePoint) -> Tau {
    Tau {
        log: d.distribution(p).1,
    }
}

/// u = 2 d_x^2 log tau, i.e. twice the variance of sum_{i in I} kappa_i under pi.
pub fn u(d: &SolitonData, p: &TimePoint) -> f64 {
    let (pi, _) = d.distribution(p);
    let mean: f64 = pi.iter().zip(&d.terms).map(|(w, t)| w * t.powers[0]).sum();
    let var: f64 = pi
        .iter()
        .zip(&d.terms)
        .map(|(w, t)| w * (t.powers[0] - mean).powi(2))
        .sum();
    2.0 * var
}

const MAX_X: usize = 7;
const MAX_Y: usize = 3;
const MAX_T: usize = 2;

/// Mixed derivatives d_x^a d_y^b d_t^c log tau (a < 7, b < 3, c < 2): the
/// joint cumulants of (K, L, M) = sums of kappa, kappa^2, kappa^3 under pi.
pub fn log_tau_derivatives(d: &SolitonData, p: &TimePoint) -> [[[f64; MAX_T]; MAX_Y]; MAX_X] {
    let (pi, _) = d.distribution(p);
    let mut mean = [0.0; 3];
    for (w, t) in pi.iter().zip(&d.terms) {
        for i in 0..3 {
            mean[i] += w * t.powers[i];
        }
    }
    let mut m = [[[0.0; MAX_T]; MAX_Y]; MAX_X];
    for (w, t) in pi.iter().zip(&d.terms) {
        let dk = t.powers[0] - mean[0];
        let dl = t.powers[1] - mean[1];
        let dm = t.powers[2] - mean[2];
        for a in 0..MAX_X {
            for b in 0..MAX_Y {
                for c in 0..MAX_T {
                    m[a][b][c] += w * dk.powi(a as i32) * dl.powi(b as i32) * dm.powi(c as i32);
                }
            }
        }
    }
    let binom = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let mut kappa = [[[0.0; MAX_T]; MAX_Y]; MAX_X];
    let total = |a: usize, b: usize, c: usize| a + b + c;
    let mut order: Vec<(usize, usize, usize)> = Vec::new();
    for a in 0..MAX_X {
        for b in 0..MAX_Y {
            for c in 0..MAX_T {
                order.push((a, b, c));
            }
        }
    }
    order.sort_by_key(|&(a, b, c)| total(a, b, c));
    for &(a, b, c) in &order {
        if total(a, b, c) == 0 {
            continue;
        }
        if total(a, b, c) == 1 {
            // first cumulants of the shifted variables vanish
            continue;
        }
        // peel one factor off the first non-zero coordinate
        let e = if a > 0 { 0 } else if b > 0 { 1 } else { 2 };
        let (ra, rb, rc) = match e {
            0 => (a - 1, b, c),
            1 => (a, b - 1, c),
            _ => (a, b, c - 1),
        };
        let mut s = m[a][b][c];
        for ba in 0..=ra {
            for bb in 0..=rb {
                for bc in 0..=rc {
                    if (ba, bb, bc) == (ra, rb, rc) {
                        continue;
                    }
                    let (ka, kb, kc) = match e {
                        0 => (ba + 1, bb, bc),
                        1 => (ba, bb + 1, bc),
                        _ => (ba, bb, bc + 1),
                    };
                    let coef = binom(ra, ba) * binom(rb, bb) * binom(rc, bc);
                    s -= coef * kappa[ka][kb][kc] * m[ra - ba][rb - bb][rc - bc];
                }
            }
        }
        kappa[a][b][c] = s;
    }
    kappa[1][0][0] = mean[0];
    kappa[0][1][0] = mean[1];
    kappa[0][0][1] = mean[2];
    kappa[0][0][0] = d.distribution(p).1;
    kappa
}

/// Terms of (-4u_t + 6uu_x + u_xxx)_x + 3u_yy at a point, from exact
/// derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KpResidual {
    pub residual: f64,
    /// Sum of the absolute values of the individual terms.
    pub scale: f64,
}

impl KpResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / self.scale
        }
    }
}

pub fn kp_residual(d: &SolitonData, p: &TimePoint) -> KpResidual {
    let f = log_tau_derivatives(d, p);
    let u = 2.0 * f[2][0][0];
    let ux = 2.0 * f[3][0][0];
    let uxx = 2.0 * f[4][0][0];
    let uxxxx = 2.0 * f[6][0][0];
    let uxt = 2.0 * f[3][0][1];
    let uyy = 2.0 * f[2][2][0];
    let terms = [-4.0 * uxt, 6.0 * ux * ux, 6.0 * u * uxx, uxxxx, 3.0 * uyy];
    KpResidual {
        residual: terms.iter().sum(),
        scale: terms.iter().map(|x| x.abs()).sum(),
    }
}

/// Q(zeta) = Wr(f_1..f_k, e^{theta(zeta)}) e^{-theta(zeta)}, stored as tau
/// times a monic polynomial. The monic part is the pi-weighted mixture of
/// prod_{i in I}(zeta - kappa_i), which is the Cauchy-Binet expansion of the
/// Wronskian.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SatoPolynomial {
    pub log_tau: f64,
    /// Ascending coefficients of Q / tau; the last one is 1.
    pub monic: Vec<f64>,
    factors: Vec<(f64, Vec<f64>)>,
}

impl SatoPolynomial {
    pub fn degree(&self) -> usize {
        self.monic.len() - 1
    }

    /// Leading coefficient of Q, i.e. tau.
    pub fn leading_coefficient(&self) -> f64 {
        self.log_tau.exp()
    }

    /// Q(zeta) / tau in product form.
    pub fn eval_scaled(&self, z: f64) -> f64 {
        self.factors
            .iter()
            .map(|(w, roots)| w * roots.iter().map(|r| z - r).product::<f64>())
            .sum()
    }

    pub fn derivative_scaled(&self, z: f64) -> f64 {
        self.factors
            .iter()
            .map(|(w, roots)| {
                let mut s = 0.0;
                for skip in 0..roots.len() {
                    s += roots
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, r)| z - r)
                        .product::<f64>();
                }
                w * s
            })
            .sum()
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.eval_scaled(z) * self.leading_coefficient()
    }
}

pub fn sato_polynomial(d: &SolitonData, p: &TimePoint) -> SatoPolynomial {
    let (pi, log_tau) = d.distribution(p);
    let k = d.k();
    let kappa = d.phases.values();
    let mut monic = vec![0.0; k + 1];
    let mut factors = Vec::with_capacity(pi.len());
    for (w, t) in pi.iter().zip(&d.terms) {
        let roots: Vec<f64> = t.subset.iter().map(|&i| kappa[i]).collect();
        let mut poly = vec![1.0];
        for r in &roots {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= r * c;
            }
            poly = next;
        }
        for (i, c) in poly.iter().enumerate() {
            monic[i] += w * c;
        }
        factors.push((*w, roots));
    }
    monic[k] = 1.0;
    SatoPolynomial {
        log_tau,
        monic,
        factors,
    }
}

/// Real roots of Q, sorted. Companion-matrix eigenvalues are polished by
/// Newton steps on the product form; imaginary parts up to `imag_tol`
/// (relative to the phase scale) are snapped to zero, larger ones are errors.
pub fn gamma0_divisor(d: &SolitonData, p: &TimePoint, imag_tol: f64) -> Result<Vec<f64>> {
    let q = sato_polynomial(d, p);
    let k = q.degree();
    if k == 0 {
        return Ok(Vec::new());
    }
    let scale = d.phases.values().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut roots = Vec::with_capacity(k);
    for (re, im) in companion_roots(&q.monic[..k]) {
        if im.abs() > imag_tol * scale {
            return Err(Error::NonRealRoot { re, im });
        }
        let mut z = re;
        for _ in 0..8 {
            let f = q.eval_scaled(z);
            let df = q.derivative_scaled(z);
            if df == 0.0 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            z -= step;
            if step.abs() <= 1e-12 * scale {
                break;
            }
        }
        roots.push(z);
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// v_j = e^{theta_j} Q(kappa_j) up to one common positive factor. Terms
/// containing j vanish exactly and are skipped.
pub fn boundary_values(d: &SolitonData, p: &TimePoint) -> Vec<f64> {
    let (pi, _) = d.distribution(p);
    let kappa = d.phases.values();
    let theta: Vec<f64> = kappa.iter().map(|&k| p.theta(k)).collect();
    let m = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..d.n())
        .map(|j| {
            let q: f64 = pi
                .iter()
                .zip(&d.terms)
                .filter(|(_, t)| !t.subset.contains(&j))
                .map(|(w, t)| w * t.subset.iter().map(|&i| kappa[j] - kappa[i]).product::<f64>())
                .sum();
            (theta[j] - m).exp() * q
        })
        .collect()
}

/// Max over rows of |sum_j A_ij v_j| / sum_j |A_ij v_j|.
pub fn darboux_defect(d: &SolitonData, v: &[f64]) -> f64 {
    d.a.iter()
        .map(|row| {
            let s: f64 = row.iter().zip(v).map(|(a, x)| a * x).sum();
            let n: f64 = row.iter().zip(v).map(|(a, x)| (a * x).abs()).sum();
            if n == 0.0 {
                0.0
            } else {
                s.abs() / n
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub y0: f64,
    pub y1: f64,
    pub ny: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let lin = |a: f64, b: f64, n: usize, i: usize| {
            if n <= 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push((lin(self.x0, self.x1, self.nx, i), lin(self.y0, self.y1, self.ny, j)));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TropicalCell {
    pub x: f64,
    pub y: f64,
    /// Dominant subset, 1-based labels.
    pub dominant: Vec<usize>,
    pub runner_up: Option<Vec<usize>>,
    /// Gap between the two largest exponents.
    pub gap: f64,
    /// The top two exponents agree within delta.
    pub boundary: bool,
    /// Three or more exponents agree within delta.
    pub vertex: bool,
}

/// Max-plus picture of tau: the dominant exponent at each grid point.
pub fn tropical_regions(d: &SolitonData, grid: &Grid, t: f64, delta: f64) -> Vec<TropicalCell> {
    use rayon::prelude::*;
    grid.points()
        .into_par_iter()
        .map(|(x, y)| {
            let p = TimePoint::new(x, y, t);
            let mut ex: Vec<(f64, usize)> = d
                .terms
                .iter()
                .enumerate()
                .map(|(i, term)| (d.exponent(term, &p), i))
                .collect();
            ex.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let label = |i: usize| d.terms[i].subset.iter().map(|c| c + 1).collect::<Vec<_>>();
            let gap = if ex.len() > 1 { ex[0].0 - ex[1].0 } else { f64::INFINITY };
            let ties = ex.iter().filter(|e| ex[0].0 - e.0 <= delta).count();
            TropicalCell {
                x,
                y,
                dominant: label(ex[0].1),
                runner_up: ex.get(1).map(|e| label(e.1)),
                gap,
                boundary: ties >= 2,
                vertex: ties >= 3,
            }
        })
        .collect()
}
