//! Points of the real projective line.

use std::f64::consts::PI;

use serde::Serialize;

/// Homogeneous point [p : q]; q = 0 is infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proj {
    pub p: f64,
    pub q: f64,
}

impl Proj {
    pub const ZERO: Proj = Proj { p: 0.0, q: 1.0 };
    pub const ONE: Proj = Proj { p: 1.0, q: 1.0 };
    pub const INFINITY: Proj = Proj { p: 1.0, q: 0.0 };

    pub fn finite(x: f64) -> Proj {
        Proj { p: x, q: 1.0 }
    }

    pub fn new(p: f64, q: f64) -> Proj {
        Proj { p, q }
    }

    pub fn is_infinite(&self) -> bool {
        self.q == 0.0
    }

    pub fn value(&self) -> f64 {
        if self.q == 0.0 {
            f64::INFINITY
        } else {
            self.p / self.q
        }
    }

    /// Same point up to scaling.
    pub fn same(&self, other: &Proj) -> bool {
        self.p * other.q == self.q * other.p
    }

    /// Angle on the circle RP^1 -> (-pi, pi]; monotone in the affine value and
    /// sends infinity to pi.
    pub fn angle(&self) -> f64 {
        if self.q == 0.0 {
            return PI;
        }
        let a = 2.0 * (self.p / self.q).atan();
        if a <= -PI {
            PI
        } else {
            a
        }
    }

    /// Signed local coordinate of `self` in the chart centred at `node`:
    /// x - a for finite a, 1/x at infinity.
    pub fn chart_offset(&self, node: &Proj) -> f64 {
        if node.is_infinite() {
            if self.p == 0.0 {
                f64::INFINITY
            } else {
                self.q / self.p
            }
        } else if self.q == 0.0 {
            f64::INFINITY
        } else {
            self.p / self.q - node.p / node.q
        }
    }

    /// Linear form vanishing at `pole`, evaluated at `self`. Ratios of such
    /// values are independent of the representatives.
    pub fn vanishing_form(&self, pole: &Proj) -> f64 {
        self.p * pole.q - self.q * pole.p
    }
}

/// Open arc of RP^1 running in the increasing direction from `lo` to `hi`,
/// wrapping through infinity when needed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CyclicInterval {
    pub lo: Proj,
    pub hi: Proj,
}

impl CyclicInterval {
    pub fn new(lo: Proj, hi: Proj) -> Self {
        CyclicInterval { lo, hi }
    }

    /// The arc between `a` and `b` that avoids `third`.
    pub fn avoiding(a: Proj, b: Proj, third: Proj) -> Self {
        let forward = CyclicInterval::new(a, b);
        if forward.contains(&third) {
            CyclicInterval::new(b, a)
        } else {
            forward
        }
    }

    pub fn contains(&self, x: &Proj) -> bool {
        let two_pi = 2.0 * PI;
        let lo = self.lo.angle();
        let span = (self.hi.angle() - lo).rem_euclid(two_pi);
        let off = (x.angle() - lo).rem_euclid(two_pi);
        off > 0.0 && off < span
    }
}
