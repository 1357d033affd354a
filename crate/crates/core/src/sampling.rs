//! Reproducible random soliton data on a fixed Le-diagram.

use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::curve::CurveBundle;
use crate::divisor::{analyze, DivisorReport};
use crate::error::{Error, Result};
use crate::lecore::LeTableau;
use crate::network::{boundary_measurement, trivalent_network};
use crate::soliton::{Phases, SolitonData, TimePoint};

/// Ranges of the random draws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleRanges {
    /// Phases are uniform on [-phase, phase], sorted.
    pub phase: f64,
    /// Weights are exp of a uniform draw on [-log_weight, log_weight].
    pub log_weight: f64,
    /// Each time coordinate is uniform on [-time, time].
    pub time: f64,
}

impl Default for SampleRanges {
    fn default() -> Self {
        SampleRanges {
            phase: 2.0,
            log_weight: 0.7,
            time: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub tableau: LeTableau,
    pub phases: Phases,
    pub time: TimePoint,
}

pub fn random_phases<R: Rng>(rng: &mut R, n: usize, half_width: f64) -> Phases {
    loop {
        let mut k: Vec<f64> = (0..n).map(|_| rng.random_range(-half_width..half_width)).collect();
        k.sort_by(f64::total_cmp);
        if let Ok(p) = Phases::new(k) {
            return p;
        }
    }
}

/// Fresh positive weights on the positive boxes of `shape`.
pub fn random_sample<R: Rng>(rng: &mut R, shape: &LeTableau, ranges: &SampleRanges) -> Result<Sample> {
    let weights: Vec<BigRational> = (0..shape.num_positive())
        .map(|_| {
            let w = rng.random_range(-ranges.log_weight..=ranges.log_weight).exp();
            BigRational::from_float(w).ok_or_else(|| Error::Input("weight is not finite".into()))
        })
        .collect::<Result<_>>()?;
    let tableau = shape.with_weights(&weights)?;
    let phases = random_phases(rng, shape.diagram().n(), ranges.phase);
    let mut t = || rng.random_range(-ranges.time..=ranges.time);
    let time = TimePoint::new(t(), t(), t());
    Ok(Sample {
        tableau,
        phases,
        time,
    })
}

/// Outcome of the divisor pipeline on one sample.
#[derive(Clone, Debug, Serialize)]
pub struct SampleOutcome {
    pub oval_verdict: bool,
    pub dn_verdict: bool,
    pub max_deviation: f64,
    pub darboux: f64,
}

impl SampleOutcome {
    pub fn agree(&self) -> bool {
        self.oval_verdict == self.dn_verdict
    }
}

pub fn run_sample(s: &Sample, eps: f64, dn_tol: f64) -> Result<(SampleOutcome, DivisorReport)> {
    let g = trivalent_network(&s.tableau)?;
    let a = boundary_measurement(&g)?;
    let d = SolitonData::new(s.phases.clone(), &a)?;
    let bundle = CurveBundle::new(&g, &s.phases)?;
    let report = analyze(&d, &bundle, &s.time, eps, dn_tol)?;
    let v = crate::soliton::boundary_values(&d, &s.time);
    let outcome = SampleOutcome {
        oval_verdict: report.ovals.verdict,
        dn_verdict: report.dn.all(),
        max_deviation: report.dn.max_deviation,
        darboux: crate::soliton::darboux_defect(&d, &v),
    };
    Ok((outcome, report))
}
