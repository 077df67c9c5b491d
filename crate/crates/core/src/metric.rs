//! Wasserstein distance of energy measures and the Lipschitz metric between
//! solutions, with the growth bound `d(t) <= (1 + t + t^2/8) d(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::EulerianState;
use crate::measure::{self, Breakpoint, PiecewiseAffine, RadonMeasure};
use crate::tol;
use crate::transport::{evolve, init_transport, TransportState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub uinf: f64,
    pub chi_l1: f64,
    pub mass: f64,
}

impl Components {
    pub fn total(&self) -> f64 {
        self.uinf + self.chi_l1 + self.mass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub t: f64,
    #[serde(rename = "d")]
    pub d_value: f64,
    pub bound_factor: f64,
    #[serde(rename = "d0")]
    pub d0_value: f64,
    pub satisfied: bool,
    pub components: Components,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "t,d,bound_factor,d0,satisfied,uinf,chi_l1,mass";

    fn new(t: f64, now: Components, initial: Components) -> Self {
        let d_value = now.total();
        let d0_value = initial.total();
        let bound_factor = bound_factor(t);
        Self {
            t,
            d_value,
            bound_factor,
            d0_value,
            satisfied: d_value <= bound_factor * d0_value + tol::LIPSCHITZ_SLACK,
            components: now,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.d_value,
            self.bound_factor,
            self.d0_value,
            self.satisfied,
            self.components.uinf,
            self.components.chi_l1,
            self.components.mass
        )
    }
}

/// `1 + t + t^2/8`.
pub fn bound_factor(t: f64) -> f64 {
    1.0 + t + t * t / 8.0
}

/// `1 + C t`, the growth factor of the unrescaled metric at fixed mass `C`.
pub fn fixed_mass_factor(c: f64, t: f64) -> f64 {
    1.0 + c * t
}

/// `d_W(mu1, mu2) = || chi_1 - chi_2 ||_{L^1([0, C])}` for equal masses.
pub fn wasserstein(mu1: &RadonMeasure, mu2: &RadonMeasure) -> Result<f64> {
    let (c1, c2) = (mu1.total_mass(), mu2.total_mass());
    if (c1 - c2).abs() > tol::scaled(tol::MASS_MATCH, c1) {
        return Err(Error::MassMismatch(c1, c2));
    }
    let (f1, f2) = (measure::cumulative(mu1), measure::cumulative(mu2));
    for f in [&f1, &f2] {
        if !measure::check_integrability(f, c1) {
            return Err(Error::NonIntegrable { at: 0.0 });
        }
    }
    let chi1 = measure::pseudo_inverse(&f1, c1)?;
    let chi2 = measure::pseudo_inverse(&f2, c1)?;
    measure::l1_distance(&chi1, &chi2)
}

/// `||U_1 - U_2||_inf + ||chi_1 - chi_2||_1` on `[0, C]` for two states of equal mass.
pub fn distance_fixed_mass(s1: &TransportState, s2: &TransportState) -> Result<f64> {
    if (s1.c - s2.c).abs() > tol::scaled(tol::MASS_MATCH, s1.c) {
        return Err(Error::MassMismatch(s1.c, s2.c));
    }
    Ok(measure::sup_distance(&s1.ucal, &s2.ucal)? + measure::l1_distance(&s1.chi, &s2.chi)?)
}

/// `chi(t, C eta)` and `U(t, C eta)` on `[0, 1]`.
///
/// Without energy `u` is a constant `k` moving at speed `k`; the rescaled pair is
/// then `(k t, k)`, which is `(0, k)` at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rescaled {
    pub chi: PiecewiseAffine,
    pub ucal: PiecewiseAffine,
}

fn constant_on_unit(v: f64) -> PiecewiseAffine {
    PiecewiseAffine::new(0.0, 1.0, vec![Breakpoint::continuous(0.0, v), Breakpoint::continuous(1.0, v)], v, v)
        .expect("constant")
}

pub fn rescale(ts: &TransportState) -> Rescaled {
    if ts.c <= 0.0 {
        let k = ts.ucal.tail_lo();
        return Rescaled { chi: constant_on_unit(k * ts.t), ucal: constant_on_unit(k) };
    }
    Rescaled { chi: ts.chi.rescale_argument(ts.c), ucal: ts.ucal.rescale_argument(ts.c) }
}

/// The three terms of the rescaled metric between two transport states.
pub fn components(s1: &TransportState, s2: &TransportState) -> Result<Components> {
    let (r1, r2) = (rescale(s1), rescale(s2));
    Ok(Components {
        uinf: measure::sup_distance(&r1.ucal, &r2.ucal)?,
        chi_l1: measure::l1_distance(&r1.chi, &r2.chi)?,
        mass: (s1.c - s2.c).abs(),
    })
}

/// Rejects states whose `F` has an infinite tail integral, naming the state by `label`.
pub fn check_state_integrability(state: &EulerianState, label: &str) -> Result<()> {
    let truncated_bad = state.diagnostics.truncation.is_some_and(|tr| !tr.tails_integrable);
    if truncated_bad || !measure::check_integrability(&state.cumulative(), state.energy) {
        return Err(Error::TailCondition { label: label.to_string() });
    }
    Ok(())
}

/// Pair of solutions prepared for repeated metric evaluations.
pub struct Pair {
    initial: (TransportState, TransportState),
    d0: Components,
}

impl Pair {
    pub fn new(s1: &EulerianState, s2: &EulerianState) -> Result<Self> {
        check_state_integrability(s1, "first state")?;
        check_state_integrability(s2, "second state")?;
        let initial = (init_transport(s1)?, init_transport(s2)?);
        let d0 = components(&initial.0, &initial.1)?;
        Ok(Self { initial, d0 })
    }

    pub fn initial_components(&self) -> Components {
        self.d0
    }

    pub fn components_at(&self, t: f64) -> Result<Components> {
        components(&evolve(&self.initial.0, t)?, &evolve(&self.initial.1, t)?)
    }

    pub fn report(&self, t: f64) -> Result<MetricReport> {
        Ok(MetricReport::new(t, self.components_at(t)?, self.d0))
    }

    pub fn bounds(&self, t: f64) -> Result<ComponentBounds> {
        let now = self.components_at(t)?;
        let d0 = self.d0;
        let uinf_bound = d0.uinf + 0.25 * t * d0.mass;
        let chi_l1_bound = d0.chi_l1 + t * d0.uinf + t * t / 8.0 * d0.mass;
        Ok(ComponentBounds {
            t,
            uinf: now.uinf,
            uinf_bound,
            chi_l1: now.chi_l1,
            chi_l1_bound,
            satisfied: now.uinf <= uinf_bound + tol::LIPSCHITZ_SLACK
                && now.chi_l1 <= chi_l1_bound + tol::LIPSCHITZ_SLACK,
        })
    }
}

/// Rescaled metric between the solutions issued from `s1` and `s2`, at time `t`,
/// compared with its value at `t = 0`.
pub fn distance(s1: &EulerianState, s2: &EulerianState, t: f64) -> Result<MetricReport> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Pair::new(s1, s2)?.report(t)
}

/// One report per time; the bound holds overall iff every report is satisfied.
pub fn verify_lipschitz(s1: &EulerianState, s2: &EulerianState, times: &[f64]) -> Result<Vec<MetricReport>> {
    if let Some(&t) = times.iter().find(|&&t| t < 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let pair = Pair::new(s1, s2)?;
    times.iter().map(|&t| pair.report(t)).collect()
}

/// The separate estimates for the `U` and `chi` terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentBounds {
    pub t: f64,
    pub uinf: f64,
    pub uinf_bound: f64,
    pub chi_l1: f64,
    pub chi_l1_bound: f64,
    pub satisfied: bool,
}

pub fn componentwise_bounds(s1: &EulerianState, s2: &EulerianState, t: f64) -> Result<ComponentBounds> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Pair::new(s1, s2)?.bounds(t)
}
