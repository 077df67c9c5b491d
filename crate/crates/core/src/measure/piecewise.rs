use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

/// A knot of a piecewise-affine function with its one-sided limits.
///
/// The value *at* the knot is `left`: every function in this crate is
/// left-continuous (cumulative functions `F(x) = mu((-inf, x))` and their
/// sup-based pseudo-inverses both are).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakpoint {
    pub x: f64,
    pub left: f64,
    pub right: f64,
}

impl Breakpoint {
    pub fn new(x: f64, left: f64, right: f64) -> Self {
        Self { x, left, right }
    }

    pub fn continuous(x: f64, value: f64) -> Self {
        Self { x, left: value, right: value }
    }
}

/// Affine segment between two consecutive knots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    /// right limit at `x0`
    pub v0: f64,
    /// left limit at `x1`
    pub v1: f64,
}

impl Segment {
    pub fn slope(&self) -> f64 {
        (self.v1 - self.v0) / (self.x1 - self.x0)
    }

    pub fn at(&self, x: f64) -> f64 {
        if x == self.x0 {
            return self.v0;
        }
        if x == self.x1 {
            return self.v1;
        }
        self.v0 + (self.v1 - self.v0) * ((x - self.x0) / (self.x1 - self.x0))
    }
}

/// Piecewise-affine function with jumps on an interval of the extended line.
///
/// Between consecutive breakpoints the function is affine; before the first
/// breakpoint it is the constant `tail_lo`, after the last the constant
/// `tail_hi`. Infinite values are allowed only as point values at a breakpoint
/// sitting on a domain endpoint (e.g. `chi(0) = -inf`).
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffine {
    domain_lo: f64,
    domain_hi: f64,
    breakpoints: Vec<Breakpoint>,
    tail_lo: f64,
    tail_hi: f64,
}

impl PiecewiseAffine {
    pub fn new(
        domain_lo: f64,
        domain_hi: f64,
        breakpoints: Vec<Breakpoint>,
        tail_lo: f64,
        tail_hi: f64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidFunction(m));
        if domain_lo.is_nan() || domain_hi.is_nan() || domain_lo > domain_hi {
            return bad(format!("bad domain [{domain_lo}, {domain_hi}]"));
        }
        if tail_lo.is_nan() || tail_hi.is_nan() {
            return bad("NaN tail value".into());
        }
        if breakpoints.is_empty() && tail_lo != tail_hi {
            return bad("a function without breakpoints must be constant".into());
        }
        let n = breakpoints.len();
        for (i, b) in breakpoints.iter().enumerate() {
            if !b.x.is_finite() {
                return bad(format!("non-finite breakpoint location {}", b.x));
            }
            if b.x < domain_lo || b.x > domain_hi {
                return bad(format!("breakpoint {} outside domain", b.x));
            }
            if b.left.is_nan() || b.right.is_nan() {
                return bad(format!("NaN value at breakpoint {}", b.x));
            }
            if i > 0 && breakpoints[i - 1].x >= b.x {
                return bad(format!("breakpoints not strictly increasing at {}", b.x));
            }
            if i > 0 && !b.left.is_finite() {
                return bad(format!("infinite left limit at interior breakpoint {}", b.x));
            }
            if i + 1 < n && !b.right.is_finite() {
                return bad(format!("infinite right limit at interior breakpoint {}", b.x));
            }
        }
        if let (Some(first), Some(last)) = (breakpoints.first(), breakpoints.last()) {
            if first.left != tail_lo || last.right != tail_hi {
                return bad("tails must continue the outermost breakpoint values".into());
            }
            if !first.left.is_finite() && first.x != domain_lo {
                return bad("infinite value away from the domain endpoint".into());
            }
            if !last.right.is_finite() && last.x != domain_hi {
                return bad("infinite value away from the domain endpoint".into());
            }
        }
        Ok(Self { domain_lo, domain_hi, breakpoints, tail_lo, tail_hi })
    }

    /// Continuous interpolant through `points` on the real line with constant tails.
    pub fn continuous(points: &[(f64, f64)]) -> Result<Self> {
        let bps: Vec<Breakpoint> = points.iter().map(|&(x, v)| Breakpoint::continuous(x, v)).collect();
        let (lo, hi) = match (bps.first(), bps.last()) {
            (Some(f), Some(l)) => (f.left, l.right),
            _ => return Err(Error::InvalidFunction("no points".into())),
        };
        Self::new(f64::NEG_INFINITY, f64::INFINITY, bps, lo, hi)
    }

    /// Constant function on the real line.
    pub fn constant(value: f64) -> Self {
        Self {
            domain_lo: f64::NEG_INFINITY,
            domain_hi: f64::INFINITY,
            breakpoints: Vec::new(),
            tail_lo: value,
            tail_hi: value,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.domain_lo, self.domain_hi)
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn knots(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|b| b.x).collect()
    }

    pub fn tail_lo(&self) -> f64 {
        self.tail_lo
    }

    pub fn tail_hi(&self) -> f64 {
        self.tail_hi
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.breakpoints.windows(2).map(|w| Segment { x0: w[0].x, x1: w[1].x, v0: w[0].right, v1: w[1].left })
    }

    /// Index of the breakpoint at `x`, or `Err(i)` with `i` the number of breakpoints left of `x`.
    fn locate(&self, x: f64) -> std::result::Result<usize, usize> {
        let i = self.breakpoints.partition_point(|b| b.x < x);
        if i < self.breakpoints.len() && self.breakpoints[i].x == x {
            Ok(i)
        } else {
            Err(i)
        }
    }

    fn between(&self, i: usize, x: f64) -> f64 {
        let n = self.breakpoints.len();
        if i == 0 {
            self.tail_lo
        } else if i == n {
            self.tail_hi
        } else {
            let (a, b) = (&self.breakpoints[i - 1], &self.breakpoints[i]);
            Segment { x0: a.x, x1: b.x, v0: a.right, v1: b.left }.at(x)
        }
    }

    /// Point value (left-continuous convention).
    pub fn eval(&self, x: f64) -> f64 {
        match self.locate(x) {
            Ok(i) => self.breakpoints[i].left,
            Err(i) => self.between(i, x),
        }
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        self.eval(x)
    }

    pub fn right_limit(&self, x: f64) -> f64 {
        match self.locate(x) {
            Ok(i) => self.breakpoints[i].right,
            Err(i) => self.between(i, x),
        }
    }

    /// Same function with additional continuous knots at `xs` (inside the domain).
    pub fn refine(&self, xs: &[f64]) -> Self {
        let mut extra: Vec<Breakpoint> = xs
            .iter()
            .copied()
            .filter(|&x| x.is_finite() && x >= self.domain_lo && x <= self.domain_hi && self.locate(x).is_err())
            .map(|x| Breakpoint::continuous(x, self.eval(x)))
            .collect();
        if extra.is_empty() {
            return self.clone();
        }
        extra.extend_from_slice(&self.breakpoints);
        extra.sort_by(|a, b| a.x.total_cmp(&b.x));
        extra.dedup_by(|a, b| a.x == b.x);
        Self { breakpoints: extra, ..self.clone() }
    }

    /// `f(x - h)`: the graph moved right by `h`.
    pub fn shift(&self, h: f64) -> Self {
        Self {
            domain_lo: self.domain_lo + h,
            domain_hi: self.domain_hi + h,
            breakpoints: self.breakpoints.iter().map(|b| Breakpoint { x: b.x + h, ..*b }).collect(),
            ..self.clone()
        }
    }

    /// `f(x * factor)` for `factor > 0`: knots divided by `factor`.
    pub fn rescale_argument(&self, factor: f64) -> Self {
        debug_assert!(factor > 0.0);
        Self {
            domain_lo: self.domain_lo / factor,
            domain_hi: self.domain_hi / factor,
            breakpoints: self.breakpoints.iter().map(|b| Breakpoint { x: b.x / factor, ..*b }).collect(),
            ..self.clone()
        }
    }

    /// Apply `f` to every stored value (knot limits and tails).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            breakpoints: self
                .breakpoints
                .iter()
                .map(|b| Breakpoint { x: b.x, left: f(b.left), right: f(b.right) })
                .collect(),
            tail_lo: f(self.tail_lo),
            tail_hi: f(self.tail_hi),
            ..self.clone()
        }
    }

    /// Largest decrease anywhere (0 for a non-decreasing function).
    pub fn max_decrease(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut prev = self.tail_lo;
        for b in &self.breakpoints {
            worst = worst.max(prev - b.left).max(b.left - b.right);
            prev = b.right;
        }
        worst = worst.max(prev - self.tail_hi);
        if worst.is_nan() {
            0.0
        } else {
            worst
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.max_decrease() <= 0.0
    }

    /// Largest finite |value| stored, at least 1.
    pub fn magnitude(&self) -> f64 {
        self.breakpoints
            .iter()
            .flat_map(|b| [b.left, b.right])
            .chain([self.tail_lo, self.tail_hi])
            .filter(|v| v.is_finite())
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }
}

/// Non-decreasing [`PiecewiseAffine`]; houses cumulative functions and pseudo-inverses.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneFunction(PiecewiseAffine);

impl MonotoneFunction {
    pub fn new(f: PiecewiseAffine) -> Result<Self> {
        let drop = f.max_decrease();
        if drop > 0.0 {
            return Err(Error::InvalidFunction(format!("not non-decreasing (drops by {drop})")));
        }
        Ok(Self(f))
    }

    pub fn as_piecewise(&self) -> &PiecewiseAffine {
        &self.0
    }

    pub fn into_piecewise(self) -> PiecewiseAffine {
        self.0
    }
}

impl Deref for MonotoneFunction {
    type Target = PiecewiseAffine;
    fn deref(&self) -> &PiecewiseAffine {
        &self.0
    }
}

impl TryFrom<PiecewiseAffine> for MonotoneFunction {
    type Error = Error;
    fn try_from(f: PiecewiseAffine) -> Result<Self> {
        Self::new(f)
    }
}

#[derive(Serialize, Deserialize)]
struct PiecewiseRecord {
    domain: [ExtReal; 2],
    breakpoints: Vec<[ExtReal; 3]>,
    tail_lo: ExtReal,
    tail_hi: ExtReal,
}

impl Serialize for PiecewiseAffine {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PiecewiseRecord {
            domain: [self.domain_lo.into(), self.domain_hi.into()],
            breakpoints: self.breakpoints.iter().map(|b| [b.x.into(), b.left.into(), b.right.into()]).collect(),
            tail_lo: self.tail_lo.into(),
            tail_hi: self.tail_hi.into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiecewiseAffine {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PiecewiseRecord::deserialize(d)?;
        let bps = r.breakpoints.iter().map(|[x, l, v]| Breakpoint::new(x.0, l.0, v.0)).collect();
        PiecewiseAffine::new(r.domain[0].0, r.domain[1].0, bps, r.tail_lo.0, r.tail_hi.0)
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for MonotoneFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MonotoneFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = PiecewiseAffine::deserialize(d)?;
        MonotoneFunction::new(f).map_err(serde::de::Error::custom)
    }
}
