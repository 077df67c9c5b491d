//! The pseudo-inverse flow: `chi(t, eta)` and `U(t, eta) = u(t, chi(t, eta))`
//! obey `chi_t = U`, `U_t = eta/2 - C/4`, which integrates in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::{Diagnostics, EulerianState, SolutionProvider};
use crate::measure::{self, Breakpoint, MonotoneFunction, PiecewiseAffine};
use crate::tol;

pub use crate::lagrangian::{l_function, l_of_eta};

/// Which of `lim_{eta -> 0} chi_0` and `lim_{eta -> C} chi_0` are finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    BothFinite,
    LeftInfinite,
    RightInfinite,
    BothInfinite,
}

impl BoundaryCase {
    pub fn from_flags(left_infinite: bool, right_infinite: bool) -> Self {
        match (left_infinite, right_infinite) {
            (false, false) => Self::BothFinite,
            (true, false) => Self::LeftInfinite,
            (false, true) => Self::RightInfinite,
            (true, true) => Self::BothInfinite,
        }
    }

    pub fn left_finite(self) -> bool {
        matches!(self, Self::BothFinite | Self::RightInfinite)
    }

    pub fn right_finite(self) -> bool {
        matches!(self, Self::BothFinite | Self::LeftInfinite)
    }
}

/// `(chi(t, .), U(t, .))` on `[0, C]`. Both functions share their knots and `U` is continuous.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportState {
    pub t: f64,
    pub c: f64,
    pub chi: MonotoneFunction,
    pub ucal: PiecewiseAffine,
    pub boundary_case: BoundaryCase,
    pub diagnostics: Diagnostics,
}

impl TransportState {
    pub fn chi_at(&self, eta: f64) -> f64 {
        self.chi.eval(eta)
    }

    pub fn ucal_at(&self, eta: f64) -> f64 {
        self.ucal.eval(eta)
    }

    pub fn etas(&self) -> Vec<f64> {
        self.chi.knots()
    }
}

/// `chi_0 = pseudo_inverse(F_0)`, `U_0 = u_0 o chi_0`, sampled on the knots of
/// `chi_0` refined wherever `chi_0` crosses a knot of `u_0`.
pub fn init_transport(state: &EulerianState) -> Result<TransportState> {
    let c = state.energy;
    let chi0 = measure::pseudo_inverse(&state.cumulative(), c)?;
    let u_knots = state.u.knots();
    let mut extra = Vec::new();
    for s in chi0.segments() {
        if !(s.v0.is_finite() && s.v1.is_finite()) || s.v1 <= s.v0 {
            continue;
        }
        let from = u_knots.partition_point(|&k| k <= s.v0);
        for &k in u_knots[from..].iter().take_while(|&&k| k < s.v1) {
            extra.push(s.x0 + (k - s.v0) / (s.v1 - s.v0) * (s.x1 - s.x0));
        }
    }
    let chi = MonotoneFunction::new(chi0.refine(&extra))?;
    let ucal_knots: Vec<Breakpoint> = chi
        .breakpoints()
        .iter()
        .map(|b| {
            let v = if b.left.is_finite() {
                state.u.eval(b.left)
            } else if b.right.is_finite() {
                state.u.eval(b.right)
            } else {
                state.u.tail_lo()
            };
            Breakpoint::continuous(b.x, v)
        })
        .collect();
    let (lo, hi) = (ucal_knots[0].left, ucal_knots[ucal_knots.len() - 1].right);
    let ucal = PiecewiseAffine::new(0.0, c, ucal_knots, lo, hi)?;
    let boundary_case = match state.diagnostics.truncation {
        Some(tr) => BoundaryCase::from_flags(tr.unbounded_below, tr.unbounded_above),
        None => BoundaryCase::BothFinite,
    };
    Ok(TransportState { t: 0.0, c, chi, ucal, boundary_case, diagnostics: state.diagnostics })
}

/// Closed-form flow from `ts.t` to `t >= ts.t`:
/// `chi += (tau^2/4)(eta - C/2) + tau U`, `U += (tau/2)(eta - C/2)` with `tau = t - ts.t`.
///
/// Decreases of `chi` within [`tol::MONOTONE_SLACK`] are rounding and get flattened;
/// larger ones mean the input was not a conservative solution.
pub fn evolve(ts: &TransportState, t: f64) -> Result<TransportState> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let tau = t - ts.t;
    if tau < 0.0 {
        return Err(Error::NegativeTime(tau));
    }
    let c = ts.c;
    let mut running = f64::NEG_INFINITY;
    let mut flatten = |v: f64, eta: f64| -> Result<f64> {
        if !v.is_finite() {
            return Ok(v);
        }
        if v >= running {
            running = v;
            return Ok(v);
        }
        let drop = running - v;
        if drop <= tol::scaled(tol::MONOTONE_SLACK, running) {
            Ok(running)
        } else {
            Err(Error::NonMonotone { eta, drop })
        }
    };
    let mut chi_knots = Vec::with_capacity(ts.chi.breakpoints().len());
    let mut u_knots = Vec::with_capacity(chi_knots.capacity());
    for (b, ub) in ts.chi.breakpoints().iter().zip(ts.ucal.breakpoints()) {
        let eta = b.x;
        let centered = eta - 0.5 * c;
        let shift = 0.25 * tau * tau * centered + tau * ub.left;
        let left = flatten(b.left + shift, eta)?;
        let right = flatten(b.right + shift, eta)?;
        chi_knots.push(Breakpoint::new(eta, left, right));
        u_knots.push(Breakpoint::continuous(eta, ub.left + 0.5 * tau * centered));
    }
    let (clo, chi_hi) = (chi_knots[0].left, chi_knots[chi_knots.len() - 1].right);
    let (ulo, uhi) = (u_knots[0].left, u_knots[u_knots.len() - 1].right);
    Ok(TransportState {
        t,
        c,
        chi: MonotoneFunction::new(PiecewiseAffine::new(0.0, c, chi_knots, clo, chi_hi)?)?,
        ucal: PiecewiseAffine::new(0.0, c, u_knots, ulo, uhi)?,
        boundary_case: ts.boundary_case,
        diagnostics: ts.diagnostics,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// A transport state continued affinely outside `[0, C]`: `chi` with slope 1 and
/// `U` constant, matching the one-sided limits at the ends.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedTransport {
    pub state: TransportState,
    /// `(chi(t, 0+), U(t, 0))` when the lower side is extended.
    pub lower: Option<(f64, f64)>,
    /// `(chi(t, C), U(t, C))` when the upper side is extended.
    pub upper: Option<(f64, f64)>,
}

impl ExtendedTransport {
    /// `chi(t, eta)` for any real `eta`; `None` outside `[0, C]` on a side that was not extended.
    pub fn chi_at(&self, eta: f64) -> Option<f64> {
        let c = self.state.c;
        if eta <= 0.0 {
            if let Some((x, _)) = self.lower {
                return Some(x + eta);
            }
            return (eta == 0.0).then(|| self.state.chi_at(0.0));
        }
        if eta > c {
            return self.upper.map(|(x, _)| x + (eta - c));
        }
        Some(self.state.chi_at(eta))
    }

    pub fn ucal_at(&self, eta: f64) -> Option<f64> {
        let c = self.state.c;
        if eta < 0.0 {
            return self.lower.map(|(_, u)| u);
        }
        if eta > c {
            return self.upper.map(|(_, u)| u);
        }
        Some(self.state.ucal_at(eta))
    }
}

fn side_limits(ts: &TransportState, side: Side) -> Result<(f64, f64)> {
    match side {
        Side::Lower if ts.boundary_case.left_finite() => Ok((ts.chi.right_limit(0.0), ts.ucal.eval(0.0))),
        Side::Upper if ts.boundary_case.right_finite() => Ok((ts.chi.eval(ts.c), ts.ucal.eval(ts.c))),
        Side::Lower => Err(Error::InfiniteBoundary("lower")),
        Side::Upper => Err(Error::InfiniteBoundary("upper")),
    }
}

/// Extends one side; fails if `chi_0` is unbounded there.
pub fn extend_side(ts: &TransportState, side: Side) -> Result<ExtendedTransport> {
    let lim = side_limits(ts, side)?;
    let (lower, upper) = match side {
        Side::Lower => (Some(lim), None),
        Side::Upper => (None, Some(lim)),
    };
    Ok(ExtendedTransport { state: ts.clone(), lower, upper })
}

/// Extends every side with a finite limit; fails only if both are infinite.
pub fn extend_by_continuity(ts: &TransportState) -> Result<ExtendedTransport> {
    if ts.boundary_case == BoundaryCase::BothInfinite {
        return Err(Error::InfiniteBoundary("lower and upper"));
    }
    Ok(ExtendedTransport {
        state: ts.clone(),
        lower: side_limits(ts, Side::Lower).ok(),
        upper: side_limits(ts, Side::Upper).ok(),
    })
}

/// `mu(t)` is the push-forward of Lebesgue measure on `[0, C]` under `chi(t, .)`;
/// `u(t)` interpolates the points `(chi(t, eta), U(t, eta))` and is constant across gaps.
pub fn reconstruct_eulerian(ts: &TransportState) -> Result<EulerianState> {
    let f = measure::inverse_to_cumulative(&ts.chi, ts.c)?;
    let mu = measure::measure_from_cumulative(&f)?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (b, ub) in ts.chi.breakpoints().iter().zip(ts.ucal.breakpoints()) {
        for x in [b.left, b.right] {
            if !x.is_finite() {
                continue;
            }
            let fresh = points.last().is_none_or(|&(p, _)| x - p > tol::scaled(tol::ATOM_MERGE, p));
            if fresh {
                points.push((x, ub.left));
            }
        }
    }
    let u = if points.is_empty() {
        PiecewiseAffine::constant(ts.ucal.tail_lo())
    } else {
        PiecewiseAffine::continuous(&points)?
    };
    Ok(EulerianState::new(u, mu)?.with_diagnostics(ts.diagnostics))
}

impl SolutionProvider for TransportState {
    fn state_at(&self, t: f64) -> Result<EulerianState> {
        reconstruct_eulerian(&evolve(self, t)?)
    }
}

/// One point `(t, eta, chi(t, eta), U(t, eta))` of the solution surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub t: f64,
    pub eta: f64,
    pub chi: f64,
    #[serde(rename = "U")]
    pub ucal: f64,
}

/// Samples the surface at each time on `eta_samples` equispaced interior points
/// plus every knot of `chi`. Endpoints appear (as one-sided limits) only on
/// sides where `chi_0` is bounded. Rows are sorted by `(t, eta)`.
pub fn solution_surface(ts0: &TransportState, times: &[f64], eta_samples: usize) -> Result<Vec<SurfaceRow>> {
    let mut times = times.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let c = ts0.c;
    let mut rows = Vec::new();
    for &t in &times {
        let ts = evolve(ts0, t)?;
        if c <= 0.0 {
            continue;
        }
        let mut etas: Vec<f64> = (1..=eta_samples)
            .map(|k| c * k as f64 / (eta_samples + 1) as f64)
            .chain(ts.etas().into_iter().filter(|&e| e > 0.0 && e < c))
            .collect();
        etas.sort_by(f64::total_cmp);
        etas.dedup();
        if ts.boundary_case.left_finite() {
            rows.push(SurfaceRow { t, eta: 0.0, chi: ts.chi.right_limit(0.0), ucal: ts.ucal_at(0.0) });
        }
        rows.extend(etas.into_iter().map(|eta| SurfaceRow { t, eta, chi: ts.chi_at(eta), ucal: ts.ucal_at(eta) }));
        if ts.boundary_case.right_finite() {
            rows.push(SurfaceRow { t, eta: c, chi: ts.chi_at(c), ucal: ts.ucal_at(c) });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::RadonMeasure;

    fn delta(alpha: f64) -> EulerianState {
        EulerianState::new(PiecewiseAffine::constant(0.0), RadonMeasure::dirac(0.0, alpha).unwrap()).unwrap()
    }

    fn wavebreak() -> EulerianState {
        let u = PiecewiseAffine::continuous(&[(0.0, 0.0), (1.0, -1.0)]).unwrap();
        EulerianState::new(u, RadonMeasure::uniform(0.0, 1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn init_of_delta() {
        let ts = init_transport(&delta(2.0)).unwrap();
        assert_eq!(ts.chi_at(0.0), f64::NEG_INFINITY);
        for eta in [0.5, 1.0, 2.0] {
            assert_eq!(ts.chi_at(eta), 0.0);
            assert_eq!(ts.ucal_at(eta), 0.0);
        }
        assert_eq!(ts.boundary_case, BoundaryCase::BothFinite);
    }

    #[test]
    fn init_of_wavebreak() {
        let ts = init_transport(&wavebreak()).unwrap();
        for eta in [0.1, 0.5, 1.0] {
            assert_eq!(ts.chi_at(eta), eta);
            assert_eq!(ts.ucal_at(eta), -eta);
        }
    }

    #[test]
    fn delta_flow_closed_form() {
        let alpha = 1.0;
        let ts0 = init_transport(&delta(alpha)).unwrap();
        for t in [0.0, 0.5, 3.0] {
            let ts = evolve(&ts0, t).unwrap();
            for eta in [0.2, 0.5, 1.0] {
                assert!((ts.chi_at(eta) - t * t / 4.0 * (eta - alpha / 2.0)).abs() < 1e-15);
                assert!((ts.ucal_at(eta) - t / 2.0 * (eta - alpha / 2.0)).abs() < 1e-15);
            }
        }
        assert_eq!(evolve(&ts0, 0.0).unwrap(), ts0);
        assert!(matches!(evolve(&ts0, -0.5), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn wavebreak_collapses_at_two() {
        let ts = evolve(&init_transport(&wavebreak()).unwrap(), 2.0).unwrap();
        for eta in [0.0001, 0.3, 1.0] {
            assert_eq!(ts.chi_at(eta), -0.5);
        }
        let s = reconstruct_eulerian(&ts).unwrap();
        assert_eq!(s.mu.atoms().len(), 1);
        assert_eq!(s.mu.atoms()[0].x, -0.5);
        assert_eq!(s.mu.atoms()[0].mass, 1.0);
        assert!(s.mu.density().is_empty());
        assert_eq!(s.u.eval(-0.5), -0.5);
    }

    #[test]
    fn extension_formulas() {
        let ts0 = init_transport(&wavebreak()).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let ext = extend_by_continuity(&evolve(&ts0, t).unwrap()).unwrap();
            for eta in [-2.0, -0.5, 0.0] {
                assert!((ext.chi_at(eta).unwrap() - (-t * t / 8.0 + eta)).abs() < 1e-14);
            }
            for eta in [1.0, 1.5, 4.0] {
                assert!((ext.chi_at(eta).unwrap() - (t * t / 8.0 - t + eta)).abs() < 1e-14);
            }
        }
        let alpha = 1.5;
        let ts = evolve(&init_transport(&delta(alpha)).unwrap(), 2.0).unwrap();
        let ext = extend_by_continuity(&ts).unwrap();
        assert_eq!(ext.ucal_at(-1.0), Some(-alpha * 2.0 / 4.0));
        assert_eq!(ext.ucal_at(alpha + 1.0), Some(alpha * 2.0 / 4.0));
    }

    #[test]
    fn infinite_sides_are_refused() {
        let mut ts = init_transport(&wavebreak()).unwrap();
        ts.boundary_case = BoundaryCase::BothInfinite;
        assert!(matches!(extend_by_continuity(&ts), Err(Error::InfiniteBoundary(_))));
        ts.boundary_case = BoundaryCase::LeftInfinite;
        assert!(extend_side(&ts, Side::Lower).is_err());
        let ext = extend_by_continuity(&ts).unwrap();
        assert!(ext.lower.is_none() && ext.upper.is_some());
    }

    #[test]
    fn reconstructed_delta_rarefaction() {
        let alpha = 1.0;
        let ts0 = init_transport(&delta(alpha)).unwrap();
        let t = 2.0;
        let s = reconstruct_eulerian(&evolve(&ts0, t).unwrap()).unwrap();
        let edge = alpha * t * t / 8.0;
        for x in [-0.4, 0.0, 0.2, 0.5] {
            assert!((s.u.eval(x) - 2.0 * x / t).abs() < 1e-15);
        }
        assert_eq!(s.u.eval(-3.0), -alpha * t / 4.0);
        assert_eq!(s.u.eval(3.0), alpha * t / 4.0);
        assert_eq!(s.mu.density().len(), 1);
        let p = s.mu.density()[0];
        assert_eq!((p.a, p.b), (-edge, edge));
        assert!((p.density - 4.0 / (t * t)).abs() < 1e-15);
    }

    #[test]
    fn surface_rows_are_sorted() {
        let ts0 = init_transport(&delta(1.0)).unwrap();
        let rows = solution_surface(&ts0, &[0.5, 0.0, 0.25], 5).unwrap();
        assert_eq!(rows.len(), 3 * 7);
        for w in rows.windows(2) {
            assert!((w[0].t, w[0].eta) < (w[1].t, w[1].eta));
        }
        for r in &rows {
            assert!((r.chi - r.t * r.t / 4.0 * (r.eta - 0.5)).abs() < 1e-15);
        }
        assert!(solution_surface(&ts0, &[], 5).unwrap().is_empty());
    }
}
