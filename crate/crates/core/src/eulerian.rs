//! Eulerian states `(u, mu)`: validation, blow-up time and residuals of the
//! integrated equation `u_t + u u_x = F/2 - C/4`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::{self, Breakpoint, MonotoneFunction, PiecewiseAffine, RadonMeasure};
use crate::numeric::merge_sorted;
use crate::tol;

/// Records that a state is a finite truncation of data with unbounded support.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    /// `lim_{eta -> 0} chi_0 = -inf` for the untruncated data.
    pub unbounded_below: bool,
    /// `lim_{eta -> C} chi_0 = +inf` for the untruncated data.
    pub unbounded_above: bool,
    /// Whether the untruncated `F` has finite tail integrals.
    pub tails_integrable: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `u` is unbounded before truncation (admitted, flagged).
    #[serde(default)]
    pub unbounded_u: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
}

/// A pair `(u, mu)`: `u` continuous piecewise affine with constant tails, `mu` its energy measure.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerianState {
    pub u: PiecewiseAffine,
    pub mu: RadonMeasure,
    pub energy: f64,
    pub diagnostics: Diagnostics,
}

impl EulerianState {
    pub fn new(u: PiecewiseAffine, mu: RadonMeasure) -> Result<Self> {
        let (lo, hi) = u.domain();
        if lo != f64::NEG_INFINITY || hi != f64::INFINITY {
            return Err(Error::InvalidFunction("u must be defined on the whole line".into()));
        }
        let finite = u.breakpoints().iter().all(|b| b.left.is_finite() && b.right.is_finite())
            && u.tail_lo().is_finite()
            && u.tail_hi().is_finite();
        if !finite {
            return Err(Error::InvalidFunction("u must be finite".into()));
        }
        let energy = mu.total_mass();
        Ok(Self { u, mu, energy, diagnostics: Diagnostics::default() })
    }

    pub fn with_diagnostics(mut self, diagnostics: Diagnostics) -> Self {
        self.diagnostics = diagnostics;
        self
    }

    pub fn cumulative(&self) -> MonotoneFunction {
        measure::cumulative(&self.mu)
    }

    /// `(u(x - h), mu(. - h))`.
    pub fn translate(&self, h: f64) -> Self {
        Self { u: self.u.shift(h), mu: self.mu.translate(h), energy: self.energy, diagnostics: self.diagnostics }
    }

    /// Knots of `u` merged with atoms and density endpoints of `mu`.
    pub fn singular_points(&self) -> Vec<f64> {
        merge_sorted(&self.u.knots(), &self.mu.support_points())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NegativeMass {
        x: f64,
        mass: f64,
    },
    InfiniteEnergy,
    /// `u_x^2 != density` on `[a, b]`.
    Compatibility {
        a: f64,
        b: f64,
        slope: f64,
        density: f64,
    },
    /// `u` varies where `mu` has no mass.
    NotConstantOnNullInterval {
        a: f64,
        b: f64,
        slope: f64,
    },
    Discontinuous {
        x: f64,
        jump: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Set when `u` is unbounded in the untruncated data.
    pub unbounded_u: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks membership of `(u, mu)` in the admissible set: `mu >= 0` finite,
/// `mu_ac = u_x^2 dx`, and `u` continuous.
pub fn validate(state: &EulerianState) -> ValidationReport {
    let mut report = ValidationReport { unbounded_u: state.diagnostics.unbounded_u, ..Default::default() };
    for a in state.mu.atoms() {
        if a.mass < 0.0 {
            report.violations.push(Violation::NegativeMass { x: a.x, mass: a.mass });
        }
    }
    for p in state.mu.density() {
        if p.density < 0.0 {
            report.violations.push(Violation::NegativeMass { x: p.a, mass: p.mass() });
        }
    }
    if !state.energy.is_finite() {
        report.violations.push(Violation::InfiniteEnergy);
    }
    for b in state.u.breakpoints() {
        if (b.right - b.left).abs() > tol::scaled(tol::COMPATIBILITY, b.left) {
            report.violations.push(Violation::Discontinuous { x: b.x, jump: b.right - b.left });
        }
    }
    let pts = state.singular_points();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope = (state.u.eval(b) - state.u.right_limit(a)) / (b - a);
        let density = state.mu.density_at(0.5 * (a + b));
        let ok = (slope * slope - density).abs() <= tol::scaled(tol::COMPATIBILITY, density);
        if ok {
            continue;
        }
        report.violations.push(if density > 0.0 {
            Violation::Compatibility { a, b, slope, density }
        } else {
            Violation::NotConstantOnNullInterval { a, b, slope }
        });
    }
    report
}

/// `t* = 2 / sup(-u_x)`, infinite when `u` is non-decreasing.
pub fn blowup_time(state: &EulerianState) -> f64 {
    let steepest = state.u.segments().map(|s| -s.slope()).fold(0.0f64, f64::max);
    if steepest > 0.0 {
        2.0 / steepest
    } else {
        f64::INFINITY
    }
}

/// A time-indexed family of Eulerian states.
pub trait SolutionProvider {
    fn state_at(&self, t: f64) -> Result<EulerianState>;
}

impl<F: Fn(f64) -> Result<EulerianState>> SolutionProvider for F {
    fn state_at(&self, t: f64) -> Result<EulerianState> {
        self(t)
    }
}

/// `|u_t + u u_x - (F/2 - C/4)|` at `(t, x)` by central differences of step `h`.
///
/// Fails with [`Error::NearSingularity`] if a kink or atom of the solution at
/// `t - h`, `t` or `t + h` lies within `h (1 + max|u|)` of `x`.
pub fn hs_residual<P: SolutionProvider + ?Sized>(solution: &P, t: f64, x: f64, h: f64) -> Result<f64> {
    if t - h < 0.0 {
        return Err(Error::NegativeTime(t - h));
    }
    let states = [solution.state_at(t - h)?, solution.state_at(t)?, solution.state_at(t + h)?];
    for s in &states {
        let reach = h * (1.0 + s.u.magnitude());
        if let Some(&k) = s.singular_points().iter().find(|&&k| (k - x).abs() <= reach) {
            return Err(Error::NearSingularity { x, kink: k });
        }
    }
    let [before, now, after] = &states;
    let u_t = (after.u.eval(x) - before.u.eval(x)) / (2.0 * h);
    let u_x = (now.u.eval(x + h) - now.u.eval(x - h)) / (2.0 * h);
    let f = now.cumulative().eval(x);
    let rhs = 0.5 * f - 0.25 * now.energy;
    Ok((u_t + now.u.eval(x) * u_x - rhs).abs())
}

/// `sup|u_a - u_b| + d_W(mu_a, mu_b) + |C_a - C_b|`; infinite if the masses differ
/// beyond [`tol::MASS_MATCH`]. Independent of how either state is broken into pieces.
pub fn max_deviation(a: &EulerianState, b: &EulerianState) -> Result<f64> {
    let du = measure::sup_distance(&a.u, &b.u)?;
    let dc = (a.energy - b.energy).abs();
    if dc > tol::scaled(tol::MASS_MATCH, a.energy) {
        return Ok(f64::INFINITY);
    }
    let c = a.energy.max(b.energy);
    let chi_a = measure::pseudo_inverse(&a.cumulative(), c)?;
    let chi_b = measure::pseudo_inverse(&b.cumulative(), c)?;
    Ok(du + measure::l1_distance(&chi_a, &chi_b)? + dc)
}

#[derive(Serialize, Deserialize)]
struct UPiece(ExtReal, ExtReal, String, f64, f64);

#[derive(Serialize, Deserialize)]
struct StateRecord {
    u: Vec<UPiece>,
    mu: RadonMeasure,
    #[serde(default)]
    energy: Option<f64>,
    #[serde(default)]
    diagnostics: Diagnostics,
}

/// Piece table `[a, b, "affine", u(a+), u(b-)]` of `u`, tails included.
pub fn u_pieces(u: &PiecewiseAffine) -> Vec<(f64, f64, f64, f64)> {
    let bps = u.breakpoints();
    let (Some(first), Some(last)) = (bps.first(), bps.last()) else {
        return vec![(f64::NEG_INFINITY, f64::INFINITY, u.tail_lo(), u.tail_lo())];
    };
    let mut out = vec![(f64::NEG_INFINITY, first.x, first.left, first.left)];
    out.extend(u.segments().map(|s| (s.x0, s.x1, s.v0, s.v1)));
    out.push((last.x, f64::INFINITY, last.right, last.right));
    out
}

fn u_from_pieces(pieces: &[UPiece]) -> Result<PiecewiseAffine> {
    let bad = |m: &str| Error::Serialization(m.to_string());
    if pieces.is_empty() {
        return Err(bad("empty piece table for u"));
    }
    for p in pieces {
        if p.2 != "affine" {
            return Err(bad(&format!("unsupported piece kind `{}`", p.2)));
        }
    }
    for w in pieces.windows(2) {
        if w[0].1 .0 != w[1].0 .0 {
            return Err(bad("u pieces must be contiguous"));
        }
    }
    let first = &pieces[0];
    let last = &pieces[pieces.len() - 1];
    if first.0 .0 != f64::NEG_INFINITY || last.1 .0 != f64::INFINITY {
        return Err(bad("u pieces must cover the whole line"));
    }
    let bps: Vec<Breakpoint> = pieces.windows(2).map(|w| Breakpoint::new(w[0].1 .0, w[0].4, w[1].3)).collect();
    PiecewiseAffine::new(f64::NEG_INFINITY, f64::INFINITY, bps, first.3, last.4)
}

impl Serialize for EulerianState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateRecord {
            u: u_pieces(&self.u)
                .into_iter()
                .map(|(a, b, v0, v1)| UPiece(a.into(), b.into(), "affine".into(), v0, v1))
                .collect(),
            mu: self.mu.clone(),
            energy: Some(self.energy),
            diagnostics: self.diagnostics,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EulerianState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = StateRecord::deserialize(d)?;
        let u = u_from_pieces(&r.u).map_err(D::Error::custom)?;
        let state = EulerianState::new(u, r.mu).map_err(D::Error::custom)?;
        if let Some(c) = r.energy {
            if (c - state.energy).abs() > tol::scaled(tol::MASS_MATCH, c) {
                return Err(D::Error::custom(format!("energy {c} disagrees with the total mass {}", state.energy)));
            }
        }
        Ok(state.with_diagnostics(r.diagnostics))
    }
}
