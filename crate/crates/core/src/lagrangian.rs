//! Lagrangian coordinates `X = (y, U, H)`, the maps `L` and `M` between them
//! and Eulerian states, the explicit flow `S_t` and the relabeling projection `Pi`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::{Diagnostics, EulerianState};
use crate::ext_real::ExtReal;
use crate::measure::{self, Atom, DensityPiece, MonotoneFunction, PiecewiseAffine, RadonMeasure};
use crate::numeric::merge_sorted;
use crate::tol;

/// Values of `(y, U, H)` at a label `xi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagKnot {
    pub xi: f64,
    pub y: f64,
    pub u: f64,
    pub h: f64,
}

/// Continuous piecewise-linear `(y, U, H)` through the knots; beyond the
/// outermost knots `y` has slope 1 and `U`, `H` are constant.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianState {
    knots: Vec<LagKnot>,
    pub energy: f64,
    /// `y + H = id` holds at every knot.
    pub in_f0: bool,
    /// `min (y_xi + H_xi)` over all pieces, tails included.
    pub c_min: f64,
    pub diagnostics: Diagnostics,
}

impl LagrangianState {
    pub fn new(knots: Vec<LagKnot>, energy: f64) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidLagrangian("no knots".into()));
        }
        for k in &knots {
            if !(k.xi.is_finite() && k.y.is_finite() && k.u.is_finite() && k.h.is_finite()) {
                return Err(Error::InvalidLagrangian(format!("non-finite knot at xi = {}", k.xi)));
            }
        }
        for w in knots.windows(2) {
            if w[1].xi <= w[0].xi {
                return Err(Error::InvalidLagrangian(format!("labels not increasing at {}", w[1].xi)));
            }
        }
        let in_f0 = knots.iter().all(|k| (k.y + k.h - k.xi).abs() <= tol::scaled(tol::MASS_MATCH, k.xi));
        let c_min = knots
            .windows(2)
            .map(|w| ((w[1].y - w[0].y) + (w[1].h - w[0].h)) / (w[1].xi - w[0].xi))
            .fold(1.0f64, f64::min);
        Ok(Self { knots, energy, in_f0, c_min, diagnostics: Diagnostics::default() })
    }

    fn with_diagnostics(mut self, diagnostics: Diagnostics) -> Self {
        self.diagnostics = diagnostics;
        self
    }

    pub fn knots(&self) -> &[LagKnot] {
        &self.knots
    }

    pub fn labels(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k.xi).collect()
    }

    /// `(y, U, H)` at label `xi`.
    pub fn eval(&self, xi: f64) -> (f64, f64, f64) {
        let ks = &self.knots;
        let i = ks.partition_point(|k| k.xi < xi);
        if i == 0 {
            let k = ks[0];
            return (k.y + (xi - k.xi), k.u, k.h);
        }
        if i == ks.len() {
            let k = ks[i - 1];
            return (k.y + (xi - k.xi), k.u, k.h);
        }
        let (a, b) = (ks[i - 1], ks[i]);
        if xi == b.xi {
            return (b.y, b.u, b.h);
        }
        let s = (xi - a.xi) / (b.xi - a.xi);
        let lerp = |p: f64, q: f64| p + (q - p) * s;
        (lerp(a.y, b.y), lerp(a.u, b.u), lerp(a.h, b.h))
    }

    /// `H` as a non-decreasing function of the label.
    pub fn energy_profile(&self) -> Result<MonotoneFunction> {
        let pts: Vec<(f64, f64)> = self.knots.iter().map(|k| (k.xi, k.h)).collect();
        MonotoneFunction::new(PiecewiseAffine::continuous(&pts)?)
            .map_err(|_| Error::InvalidLagrangian("H decreases".into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LagViolation {
    NegativeSlope {
        component: &'static str,
        xi: f64,
        slope: f64,
    },
    /// `y_xi + H_xi` not bounded away from zero.
    Degenerate {
        c_min: f64,
    },
    /// `y_xi H_xi != U_xi^2` on the piece starting at `xi`.
    Compatibility {
        xi: f64,
        lhs: f64,
        rhs: f64,
    },
}

/// Checks `y_xi >= 0`, `H_xi >= 0`, `y_xi + H_xi >= c > 0` and `y_xi H_xi = U_xi^2` piece by piece.
pub fn validate(x: &LagrangianState) -> Vec<LagViolation> {
    let mut out = Vec::new();
    for w in x.knots.windows(2) {
        let d = w[1].xi - w[0].xi;
        let (ys, us, hs) = ((w[1].y - w[0].y) / d, (w[1].u - w[0].u) / d, (w[1].h - w[0].h) / d);
        let slack = tol::scaled(tol::COMPATIBILITY, ys.abs().max(hs.abs()));
        if ys < -slack {
            out.push(LagViolation::NegativeSlope { component: "y", xi: w[0].xi, slope: ys });
        }
        if hs < -slack {
            out.push(LagViolation::NegativeSlope { component: "H", xi: w[0].xi, slope: hs });
        }
        if (ys * hs - us * us).abs() > tol::scaled(tol::COMPATIBILITY, us * us) {
            out.push(LagViolation::Compatibility { xi: w[0].xi, lhs: ys * hs, rhs: us * us });
        }
    }
    if x.c_min <= tol::MIN_SPEED {
        out.push(LagViolation::Degenerate { c_min: x.c_min });
    }
    out
}

/// `L`: `y(xi) = sup { y | F(y) + y < xi }`, `H = xi - y`, `U = u(y)`.
pub fn map_l(state: &EulerianState) -> LagrangianState {
    let f = state.cumulative();
    let xs = merge_sorted(&state.u.knots(), &state.mu.support_points());
    let mut knots: Vec<LagKnot> = Vec::with_capacity(xs.len() + state.mu.atoms().len());
    let mut push = |k: LagKnot| {
        if knots.last().is_none_or(|p| k.xi > p.xi) {
            knots.push(k);
        }
    };
    for &x in &xs {
        let (fl, fr, u) = (f.eval(x), f.right_limit(x), state.u.eval(x));
        push(LagKnot { xi: x + fl, y: x, u, h: fl });
        if fr > fl {
            push(LagKnot { xi: x + fr, y: x, u, h: fr });
        }
    }
    if knots.is_empty() {
        knots.push(LagKnot { xi: 0.0, y: 0.0, u: state.u.tail_lo(), h: 0.0 });
    }
    let mut out = LagrangianState::new(knots, state.energy).expect("labels increase");
    out.in_f0 = true;
    out.with_diagnostics(state.diagnostics)
}

/// `M`: `u(y(xi)) = U(xi)` and `mu = y_# (H_xi dxi)`; pieces where `y` is flat carry atoms.
pub fn map_m(x: &LagrangianState) -> Result<EulerianState> {
    let mut atoms = Vec::new();
    let mut density = Vec::new();
    let first = x.knots[0];
    let mut points: Vec<(f64, f64)> = vec![(first.y, first.u)];
    let mut y_prev = first.y;
    for w in x.knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dy = b.y - y_prev;
        let dh = b.h - a.h;
        let flat = dy.abs() <= tol::scaled(tol::ATOM_MERGE, y_prev);
        if dy < 0.0 && !flat {
            return Err(Error::InvalidLagrangian(format!("y decreases at xi = {}", a.xi)));
        }
        if flat {
            if (b.u - a.u).abs() > tol::scaled(tol::COMPATIBILITY, a.u) {
                return Err(Error::InvalidLagrangian(format!(
                    "U varies by {} where y is flat at xi = {}",
                    b.u - a.u,
                    a.xi
                )));
            }
            if dh > 0.0 {
                atoms.push(Atom { x: y_prev, mass: dh });
            }
            continue;
        }
        if dh > 0.0 {
            density.push(DensityPiece { a: y_prev, b: b.y, density: dh / dy });
        }
        points.push((b.y, b.u));
        y_prev = b.y;
    }
    let u = PiecewiseAffine::continuous(&points)?;
    let mu = RadonMeasure::new(atoms, density)?;
    Ok(EulerianState::new(u, mu)?.with_diagnostics(x.diagnostics))
}

/// `S_t`: `y += (H/4 - C/8) t^2 + U t`, `U += (H/2 - C/4) t`, `H` unchanged.
pub fn semigroup_s(x: &LagrangianState, t: f64) -> Result<LagrangianState> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let c = x.energy;
    let knots = x
        .knots
        .iter()
        .map(|k| LagKnot {
            xi: k.xi,
            y: k.y + (0.25 * k.h - 0.125 * c) * t * t + k.u * t,
            u: k.u + (0.5 * k.h - 0.25 * c) * t,
            h: k.h,
        })
        .collect();
    Ok(LagrangianState::new(knots, c)?.with_diagnostics(x.diagnostics))
}

/// `Pi(X) = X o (y + H)^{-1}`: the representative with `y + H = id`.
pub fn project_pi(x: &LagrangianState) -> LagrangianState {
    let mut knots: Vec<LagKnot> = Vec::with_capacity(x.knots.len());
    for k in &x.knots {
        let xi = k.y + k.h;
        if knots.last().is_none_or(|p| xi > p.xi) {
            knots.push(LagKnot { xi, ..*k });
        }
    }
    let mut out = LagrangianState::new(knots, x.energy).expect("y + H increases");
    out.in_f0 = true;
    out.with_diagnostics(x.diagnostics)
}

/// Largest difference of `y`, `U`, `H` over the union of both label sets, plus `|C_1 - C_2|`.
pub fn max_deviation(a: &LagrangianState, b: &LagrangianState) -> f64 {
    let mut worst = (a.energy - b.energy).abs();
    for xi in merge_sorted(&a.labels(), &b.labels()) {
        let (ya, ua, ha) = a.eval(xi);
        let (yb, ub, hb) = b.eval(xi);
        worst = worst.max((ya - yb).abs()).max((ua - ub).abs()).max((ha - hb).abs());
    }
    worst
}

/// Whether the two states represent the same Eulerian state, i.e. their projections agree to `1e-10`.
pub fn is_relabeling_of(x1: &LagrangianState, x2: &LagrangianState) -> bool {
    let (p1, p2) = (project_pi(x1), project_pi(x2));
    let scale = p1.knots.iter().chain(&p2.knots).fold(1.0f64, |m, k| m.max(k.y.abs()));
    max_deviation(&p1, &p2) <= 1e-10 * scale
}

/// `l(eta) = sup { xi | H(xi) < eta }` on `[0, C]`; does not depend on time.
pub fn l_function(x: &LagrangianState) -> Result<MonotoneFunction> {
    measure::pseudo_inverse(&x.energy_profile()?, x.energy)
}

pub fn l_of_eta(x: &LagrangianState, eta: f64) -> Result<f64> {
    Ok(l_function(x)?.eval(eta))
}

/// Piecewise-affine increasing homeomorphism of the line with slope 1 outside its knots.
#[derive(Clone, Debug, PartialEq)]
pub struct Relabeling {
    points: Vec<(f64, f64)>,
}

impl Relabeling {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidLagrangian("relabeling without knots".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::InvalidLagrangian("relabeling must be strictly increasing".into()));
            }
        }
        Ok(Self { points })
    }

    /// Interpolates `g` at `xs`.
    pub fn sample(g: impl Fn(f64) -> f64, xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| (x, g(x))).collect())
    }

    fn interp(pts: &[(f64, f64)], x: f64, swap: bool) -> f64 {
        let key = |p: &(f64, f64)| if swap { (p.1, p.0) } else { *p };
        let i = pts.partition_point(|p| key(p).0 < x);
        let (a, b) = match i {
            0 => {
                let p = key(&pts[0]);
                return p.1 + (x - p.0);
            }
            n if n == pts.len() => {
                let p = key(&pts[n - 1]);
                return p.1 + (x - p.0);
            }
            _ => (key(&pts[i - 1]), key(&pts[i])),
        };
        if x == b.0 {
            return b.1;
        }
        a.1 + (b.1 - a.1) * ((x - a.0) / (b.0 - a.0))
    }

    pub fn eval(&self, xi: f64) -> f64 {
        Self::interp(&self.points, xi, false)
    }

    pub fn inverse(&self, v: f64) -> f64 {
        Self::interp(&self.points, v, true)
    }

    /// `g - id` and `g^{-1} - id` Lipschitz with finite constants and `g` strictly increasing.
    pub fn is_in_group(&self) -> bool {
        self.points.windows(2).all(|w| {
            let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            s.is_finite() && s > 0.0 && (1.0 / s).is_finite()
        })
    }
}

/// `X o g`.
pub fn compose(x: &LagrangianState, g: &Relabeling) -> LagrangianState {
    let pulled: Vec<f64> = x.knots.iter().map(|k| g.inverse(k.xi)).collect();
    let own: Vec<f64> = g.points.iter().map(|p| p.0).collect();
    let mut knots: Vec<LagKnot> = Vec::new();
    for xi in merge_sorted(&own, &pulled) {
        let (y, u, h) = x.eval(g.eval(xi));
        if knots.last().is_none_or(|p| xi > p.xi) {
            knots.push(LagKnot { xi, y, u, h });
        }
    }
    LagrangianState::new(knots, x.energy).expect("labels increase").with_diagnostics(x.diagnostics)
}

#[derive(Serialize, Deserialize)]
struct LagPiece(ExtReal, ExtReal, [f64; 2], [f64; 2], [f64; 2]);

fn coeffs(a: f64, b: f64, va: f64, vb: f64) -> [f64; 2] {
    let s = (vb - va) / (b - a);
    [s, va - s * a]
}

impl Serialize for LagrangianState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (first, last) = (self.knots[0], self.knots[self.knots.len() - 1]);
        let mut rows = vec![LagPiece(
            f64::NEG_INFINITY.into(),
            first.xi.into(),
            [1.0, first.y - first.xi],
            [0.0, first.u],
            [0.0, first.h],
        )];
        for w in self.knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            rows.push(LagPiece(
                a.xi.into(),
                b.xi.into(),
                coeffs(a.xi, b.xi, a.y, b.y),
                coeffs(a.xi, b.xi, a.u, b.u),
                coeffs(a.xi, b.xi, a.h, b.h),
            ));
        }
        rows.push(LagPiece(
            last.xi.into(),
            f64::INFINITY.into(),
            [1.0, last.y - last.xi],
            [0.0, last.u],
            [0.0, last.h],
        ));
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LagrangianState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows = Vec::<LagPiece>::deserialize(d)?;
        let at = |c: [f64; 2], xi: f64| c[0] * xi + c[1];
        let mut knots = Vec::new();
        for r in &rows {
            let xi = r.0 .0;
            if xi.is_finite() {
                knots.push(LagKnot { xi, y: at(r.2, xi), u: at(r.3, xi), h: at(r.4, xi) });
            }
        }
        let energy = knots.last().map_or(0.0, |k| k.h);
        LagrangianState::new(knots, energy).map_err(D::Error::custom)
    }
}
