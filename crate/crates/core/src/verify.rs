//! Self-checks run by `hsmetric verify`: representation round trips, the transport ODE,
//! conservation of energy and the Lipschitz estimate on random pairs.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eulerian::{self, EulerianState};
use crate::lagrangian::{self, map_l, map_m, project_pi, semigroup_s};
use crate::metric::Pair;
use crate::scenarios::{self, BASE};
use crate::transport::{evolve, init_transport, reconstruct_eulerian, TransportState};

pub const ODE_STEP: f64 = 0.1;
pub const ODE_TIMES: [f64; 4] = [0.5, 1.0, 2.0, 2.5];
pub const ODE_TOL: f64 = 1e-10;
pub const ROUNDTRIP_TOL: f64 = 1e-12;
pub const CONSERVATION_TOL: f64 = 1e-12;
pub const LIPSCHITZ_PAIRS: usize = 100;
pub const LIPSCHITZ_TIMES: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
}

impl PropertyResult {
    fn new(name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: max_error <= tolerance, max_error, tolerance }
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} (max error {:.3e}, tolerance {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_error,
            self.tolerance
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Roundtrip,
    Ode,
    Conservation,
    Lipschitz,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "roundtrip" => Suite::Roundtrip,
            "ode" => Suite::Ode,
            "conservation" => Suite::Conservation,
            "lipschitz" => Suite::Lipschitz,
            "all" => Suite::All,
            _ => return Err(Error::InvalidParameter(format!("unknown verification suite `{s}`"))),
        })
    }
}

pub fn run(suite: Suite, seed: u64) -> Result<Vec<PropertyResult>> {
    match suite {
        Suite::Roundtrip => roundtrip(),
        Suite::Ode => ode(),
        Suite::Conservation => conservation(),
        Suite::Lipschitz => lipschitz(seed),
        Suite::All => all(seed),
    }
}

pub fn all(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut out = roundtrip()?;
    out.extend(ode()?);
    out.extend(conservation()?);
    out.extend(lipschitz(seed)?);
    Ok(out)
}

fn base_states() -> Result<Vec<(&'static str, EulerianState)>> {
    BASE.iter().map(|&name| Ok((name, scenarios::parse(name)?.initial))).collect()
}

/// `M(L(s)) = s` for every base scenario and `L(M(X)) = X` for `X` in the projected
/// Lagrangian set, including states moved by the semigroup.
pub fn roundtrip() -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    for (name, s) in base_states()? {
        let back = map_m(&map_l(&s))?;
        out.push(PropertyResult::new(
            format!("M(L(s)) = s [{name}]"),
            eulerian::max_deviation(&back, &s)?,
            ROUNDTRIP_TOL,
        ));

        let mut err = 0.0f64;
        for t in [0.0, 1.0] {
            let x = project_pi(&semigroup_s(&map_l(&s), t)?);
            let again = map_l(&map_m(&x)?);
            err = err.max(lagrangian::max_deviation(&again, &x));
        }
        out.push(PropertyResult::new(format!("L(M(X)) = X [{name}]"), err, ROUNDTRIP_TOL));
    }
    Ok(out)
}

/// Central differences of the evolved transport against the right-hand sides
/// `chi_t = U` and `U_t = eta/2 - C/4`, at every finite knot value.
pub fn ode() -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    for (name, s) in base_states()? {
        let ts0 = init_transport(&s)?;
        let mut err = 0.0f64;
        for &t in &ODE_TIMES {
            err = err.max(ode_error(&ts0, t, ODE_STEP)?);
        }
        out.push(PropertyResult::new(format!("transport ODE [{name}]"), err, ODE_TOL));
    }
    Ok(out)
}

pub fn ode_error(ts0: &TransportState, t: f64, h: f64) -> Result<f64> {
    let (before, now, after) = (evolve(ts0, t - h)?, evolve(ts0, t)?, evolve(ts0, t + h)?);
    let c = ts0.c;
    let mut err = 0.0f64;
    for eta in now.etas() {
        let (lo, mid, hi) = (before.chi_at(eta), now.ucal_at(eta), after.chi_at(eta));
        if lo.is_finite() && mid.is_finite() && hi.is_finite() {
            err = err.max(((hi - lo) / (2.0 * h) - mid).abs());
        }
        let (ul, ur) = (before.ucal_at(eta), after.ucal_at(eta));
        if ul.is_finite() && ur.is_finite() {
            err = err.max(((ur - ul) / (2.0 * h) - (0.5 * eta - 0.25 * c)).abs());
        }
    }
    Ok(err)
}

/// Total mass of the reconstructed measure stays at `C` for `t` in `[0, 5]`.
pub fn conservation() -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    for (name, s) in base_states()? {
        let ts0 = init_transport(&s)?;
        let mut err = 0.0f64;
        for k in 0..=10 {
            let t = 0.5 * k as f64;
            let now = reconstruct_eulerian(&evolve(&ts0, t)?)?;
            err = err.max((now.mu.total_mass() - s.energy).abs());
        }
        out.push(PropertyResult::new(format!("energy conservation [{name}]"), err, CONSERVATION_TOL));
    }
    Ok(out)
}

/// Seeded random pairs: the rescaled metric bound and the two component estimates.
pub fn lipschitz(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound_excess = f64::NEG_INFINITY;
    let mut comp_excess = f64::NEG_INFINITY;
    for _ in 0..LIPSCHITZ_PAIRS {
        let (a, b) = scenarios::random_pair(&mut rng)?;
        let pair = Pair::new(&a, &b)?;
        for &t in &LIPSCHITZ_TIMES {
            let r = pair.report(t)?;
            bound_excess = bound_excess.max(r.d_value - r.bound_factor * r.d0_value);
            let c = pair.bounds(t)?;
            comp_excess = comp_excess.max((c.uinf - c.uinf_bound).max(c.chi_l1 - c.chi_l1_bound));
        }
    }
    let tol = crate::tol::LIPSCHITZ_SLACK;
    Ok(vec![
        PropertyResult::new(format!("Lipschitz bound, {LIPSCHITZ_PAIRS} pairs"), bound_excess.max(0.0), tol),
        PropertyResult::new(format!("component bounds, {LIPSCHITZ_PAIRS} pairs"), comp_excess.max(0.0), tol),
    ])
}
