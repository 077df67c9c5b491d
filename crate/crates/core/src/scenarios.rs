//! Named initial data with known exact solutions, and random test data.
//!
//! Scenario strings look like `delta:alpha=1.5`, `wavebreak`,
//! `translate:base=wavebreak,h=0.1` or `custom:path=state.json`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::error::{Error, Result};
use crate::eulerian::{blowup_time, Diagnostics, EulerianState, Truncation};
use crate::measure::{Atom, DensityPiece, PiecewiseAffine, RadonMeasure};
use crate::special::{erf, erfinv};
use crate::transport::BoundaryCase;

pub const DEFAULT_GRID: usize = 4096;

pub const NAMES: [&str; 8] = ["erf", "arcsinh", "delta", "wavebreak", "two_delta", "zero", "translate", "custom"];

/// The six base scenarios with default parameters.
pub const BASE: [&str; 6] = ["erf", "arcsinh", "delta", "wavebreak", "two_delta", "zero"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Notes {
    /// Tail integrals of `F_0` are finite (required by the metric).
    pub integrable: bool,
    pub boundary: BoundaryCase,
    pub blowup_time: f64,
}

/// Closed-form solutions.
#[derive(Clone, Debug, PartialEq)]
pub enum Exact {
    Erf,
    Arcsinh,
    Delta { alpha: f64 },
    Wavebreak,
    TwoDelta,
    Zero,
    Translate { base: Box<Exact>, h: f64 },
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

impl Exact {
    pub fn energy(&self) -> f64 {
        match self {
            Exact::Erf => PI.sqrt(),
            Exact::Arcsinh => PI,
            Exact::Delta { alpha } => *alpha,
            Exact::Wavebreak => 1.0,
            Exact::TwoDelta => 3.0,
            Exact::Zero => 0.0,
            Exact::Translate { base, .. } => base.energy(),
        }
    }

    /// `(chi_0(eta), U_0(eta))`.
    pub fn initial_transport(&self, eta: f64) -> (f64, f64) {
        if eta <= 0.0 {
            let u = match self {
                Exact::Erf => -FRAC_PI_2.sqrt(),
                Exact::Arcsinh => f64::NEG_INFINITY,
                Exact::Translate { base, .. } => base.initial_transport(eta).1,
                _ => 0.0,
            };
            return (f64::NEG_INFINITY, u);
        }
        match self {
            Exact::Erf => {
                let x = erfinv(2.0 * eta / PI.sqrt() - 1.0);
                (x, FRAC_PI_2.sqrt() * erf(x / 2f64.sqrt()))
            }
            Exact::Arcsinh => {
                let x = -1.0 / eta.tan();
                (x, x.asinh())
            }
            Exact::Delta { .. } | Exact::Zero => (0.0, 0.0),
            Exact::Wavebreak => (eta, -eta),
            Exact::TwoDelta => (if eta <= 1.0 { 0.0 } else { 1.0 }, 0.0),
            Exact::Translate { base, h } => {
                let (x, u) = base.initial_transport(eta);
                (x + h, u)
            }
        }
    }

    /// `(chi(t, eta), U(t, eta))` from the closed-form flow.
    pub fn transport(&self, t: f64, eta: f64) -> (f64, f64) {
        let (x0, u0) = self.initial_transport(eta);
        let centered = eta - 0.5 * self.energy();
        (0.25 * t * t * centered + t * u0 + x0, 0.5 * t * centered + u0)
    }

    /// Whether `u(t, x)` is known in closed form.
    pub fn has_eulerian(&self) -> bool {
        match self {
            Exact::Erf | Exact::Arcsinh => false,
            Exact::Translate { base, .. } => base.has_eulerian(),
            _ => true,
        }
    }

    pub fn eulerian_u(&self, t: f64, x: f64) -> Option<f64> {
        Some(match self {
            Exact::Erf | Exact::Arcsinh => return None,
            Exact::Zero => 0.0,
            Exact::Delta { .. } if t == 0.0 => 0.0,
            Exact::Delta { alpha } => (2.0 * x / t).clamp(-alpha * t / 4.0, alpha * t / 4.0),
            Exact::Wavebreak => {
                let (a, b) = (-t * t / 8.0, t * t / 8.0 - t + 1.0);
                if t == 2.0 {
                    -0.5
                } else if x <= a {
                    -t / 4.0
                } else if x >= b {
                    t / 4.0 - 1.0
                } else {
                    (2.0 * x + t / 2.0) / (t - 2.0)
                }
            }
            Exact::TwoDelta if t == 0.0 => 0.0,
            Exact::TwoDelta => {
                let s = t * t / 8.0;
                if x <= -s {
                    (2.0 * x / t).max(-0.75 * t)
                } else if x <= 1.0 - s {
                    -t / 4.0
                } else {
                    (2.0 * (x - 1.0) / t).min(0.75 * t)
                }
            }
            Exact::Translate { base, h } => return base.eulerian_u(t, x - h),
        })
    }

    /// `F(t, x) = mu(t, (-inf, x))`; for erf and arcsinh only at `t = 0`.
    pub fn cumulative(&self, t: f64, x: f64) -> Option<f64> {
        let step = |p: f64| if x > p { 1.0 } else { 0.0 };
        Some(match self {
            Exact::Erf if t == 0.0 => 0.5 * PI.sqrt() * (1.0 + erf(x)),
            Exact::Arcsinh if t == 0.0 => x.atan() + FRAC_PI_2,
            Exact::Erf | Exact::Arcsinh => return None,
            Exact::Zero => 0.0,
            Exact::Delta { alpha } if t == 0.0 => alpha * step(0.0),
            Exact::Delta { alpha } => (4.0 / (t * t) * (x + alpha * t * t / 8.0)).clamp(0.0, *alpha),
            Exact::Wavebreak if t == 2.0 => step(-0.5),
            Exact::Wavebreak => clamp01((x + t * t / 8.0) / (1.0 - t / 2.0).powi(2)),
            Exact::TwoDelta if t == 0.0 => step(0.0) + 2.0 * step(1.0),
            Exact::TwoDelta => {
                let k = 4.0 / (t * t);
                clamp01(k * x + 1.5) + 2.0 * clamp01((k * (x - 1.0) + 0.5) / 2.0)
            }
            Exact::Translate { base, h } => return base.cumulative(t, x - h),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub initial: EulerianState,
    pub exact: Option<Exact>,
    pub notes: Notes,
}

/// Splits `name:key=value,...` into the name and its raw key/value pairs.
fn split_spec(spec: &str) -> Result<(String, Vec<(String, String)>)> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (spec.trim(), None),
    };
    if name.is_empty() {
        return Err(Error::UnknownScenario(spec.to_string()));
    }
    let mut pairs = Vec::new();
    if let Some(rest) = rest {
        if name == "custom" {
            let path = rest.strip_prefix("path=").unwrap_or(rest);
            pairs.push(("path".to_string(), path.to_string()));
        } else {
            for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidParameter(format!("`{item}` is not key=value")))?;
                pairs.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    Ok((name.to_string(), pairs))
}

fn numeric(pairs: &[(String, String)], allowed: &[&str]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (k, v) in pairs {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::InvalidParameter(format!("unknown parameter `{k}`")));
        }
        let x: f64 = v.parse().map_err(|_| Error::InvalidParameter(format!("`{k}={v}` is not a number")))?;
        if !x.is_finite() {
            return Err(Error::InvalidParameter(format!("`{k}` must be finite")));
        }
        out.insert(k.clone(), x);
    }
    Ok(out)
}

fn grid_size(params: &BTreeMap<String, f64>) -> Result<usize> {
    let n = params.get("n").copied().unwrap_or(DEFAULT_GRID as f64);
    if n.fract() != 0.0 || !(4.0..=1e7).contains(&n) {
        return Err(Error::InvalidParameter(format!("grid size n = {n} must be an integer in [4, 1e7]")));
    }
    Ok(n as usize)
}

/// Parses and builds a scenario from its command-line form.
pub fn parse(spec: &str) -> Result<Scenario> {
    let (name, pairs) = split_spec(spec)?;
    match name.as_str() {
        "translate" => {
            let mut base = None;
            let mut h = None;
            let mut rest = Vec::new();
            for (k, v) in pairs {
                match k.as_str() {
                    "base" => base = Some(v),
                    "h" => {
                        h = Some(
                            v.parse::<f64>()
                                .map_err(|_| Error::InvalidParameter(format!("`h={v}` is not a number")))?,
                        )
                    }
                    _ => rest.push(format!("{k}={v}")),
                }
            }
            let base = base.ok_or_else(|| Error::InvalidParameter("translate needs `base`".into()))?;
            let h = h.ok_or_else(|| Error::InvalidParameter("translate needs `h`".into()))?;
            let inner = if rest.is_empty() { base } else { format!("{base}:{}", rest.join(",")) };
            Ok(translate(&parse(&inner)?, h))
        }
        "custom" => {
            let path = pairs
                .iter()
                .find(|(k, _)| k == "path")
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::InvalidParameter("custom needs `path=FILE`".into()))?;
            custom(&path)
        }
        _ => {
            let allowed: &[&str] = match name.as_str() {
                "erf" | "arcsinh" => &["n"],
                "delta" => &["alpha"],
                _ => &[],
            };
            build(&name, &numeric(&pairs, allowed)?)
        }
    }
}

/// Builds one of the base scenarios.
pub fn build(name: &str, params: &BTreeMap<String, f64>) -> Result<Scenario> {
    let (initial, exact) = match name {
        "erf" => {
            let n = grid_size(params)?;
            let tr = Truncation { unbounded_below: true, unbounded_above: true, tails_integrable: true };
            let diag = Diagnostics { unbounded_u: false, truncation: Some(tr) };
            (grid_state(&Exact::Erf, n)?.with_diagnostics(diag), Exact::Erf)
        }
        "arcsinh" => {
            let n = grid_size(params)?;
            let tr = Truncation { unbounded_below: true, unbounded_above: true, tails_integrable: false };
            let diag = Diagnostics { unbounded_u: true, truncation: Some(tr) };
            (grid_state(&Exact::Arcsinh, n)?.with_diagnostics(diag), Exact::Arcsinh)
        }
        "delta" => {
            let alpha = params.get("alpha").copied().unwrap_or(1.0);
            if alpha <= 0.0 {
                return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
            }
            let s = EulerianState::new(PiecewiseAffine::constant(0.0), RadonMeasure::dirac(0.0, alpha)?)?;
            (s, Exact::Delta { alpha })
        }
        "wavebreak" => {
            let u = PiecewiseAffine::continuous(&[(0.0, 0.0), (1.0, -1.0)])?;
            (EulerianState::new(u, RadonMeasure::uniform(0.0, 1.0, 1.0)?)?, Exact::Wavebreak)
        }
        "two_delta" => {
            let mu = RadonMeasure::new(vec![Atom { x: 0.0, mass: 1.0 }, Atom { x: 1.0, mass: 2.0 }], vec![])?;
            (EulerianState::new(PiecewiseAffine::constant(0.0), mu)?, Exact::TwoDelta)
        }
        "zero" => (EulerianState::new(PiecewiseAffine::constant(0.0), RadonMeasure::zero())?, Exact::Zero),
        "translate" | "custom" => {
            return Err(Error::InvalidParameter(format!("`{name}` is built through `parse`")));
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(finish(name, params.clone(), initial, Some(exact)))
}

fn finish(name: &str, params: BTreeMap<String, f64>, initial: EulerianState, exact: Option<Exact>) -> Scenario {
    let (integrable, boundary) = match initial.diagnostics.truncation {
        Some(tr) => (tr.tails_integrable, BoundaryCase::from_flags(tr.unbounded_below, tr.unbounded_above)),
        None => (true, BoundaryCase::BothFinite),
    };
    let notes = Notes { integrable, boundary, blowup_time: blowup_time(&initial) };
    Scenario { name: name.to_string(), params, initial, exact, notes }
}

/// Spatial shift by `h` of `u_0` and `mu_0`.
pub fn translate(base: &Scenario, h: f64) -> Scenario {
    let mut params = base.params.clone();
    params.insert("h".into(), h);
    let exact = base.exact.clone().map(|e| Exact::Translate { base: Box::new(e), h });
    Scenario {
        name: format!("translate({})", base.name),
        params,
        initial: base.initial.translate(h),
        exact,
        notes: base.notes,
    }
}

/// Loads an Eulerian state from a JSON file.
pub fn custom(path: &str) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Serialization(format!("{path}: {e}")))?;
    let state: EulerianState = serde_json::from_str(&text).map_err(|e| Error::Serialization(format!("{path}: {e}")))?;
    Ok(finish("custom", BTreeMap::new(), state, None))
}

/// Samples smooth data on the equispaced grid `eta_i = i C / n`.
///
/// `chi_0` is exact at interior nodes and extrapolated linearly to the two end
/// nodes; `U_0` is exact at the middle node and continued with increments
/// `sqrt(d chi d eta)`, so that `u_x^2` equals the density on every cell.
fn grid_state(exact: &Exact, n: usize) -> Result<EulerianState> {
    let c = exact.energy();
    let etas: Vec<f64> = (0..=n).map(|i| c * i as f64 / n as f64).collect();
    let mut chi: Vec<f64> = etas.iter().map(|&e| exact.initial_transport(e).0).collect();
    chi[0] = 2.0 * chi[1] - chi[2];
    chi[n] = 2.0 * chi[n - 1] - chi[n - 2];
    let step = |i: usize| ((chi[i + 1] - chi[i]) * (etas[i + 1] - etas[i])).sqrt();
    let mid = n / 2;
    let mut ucal = vec![0.0; n + 1];
    ucal[mid] = exact.initial_transport(etas[mid]).1;
    for i in mid..n {
        ucal[i + 1] = ucal[i] + step(i);
    }
    for i in (0..mid).rev() {
        ucal[i] = ucal[i + 1] - step(i);
    }
    let points: Vec<(f64, f64)> = chi.iter().copied().zip(ucal.iter().copied()).collect();
    let density = (0..n)
        .map(|i| DensityPiece { a: chi[i], b: chi[i + 1], density: (etas[i + 1] - etas[i]) / (chi[i + 1] - chi[i]) })
        .collect();
    EulerianState::new(PiecewiseAffine::continuous(&points)?, RadonMeasure::new(vec![], density)?)
}

/// The zero solution and the rarefaction from `alpha delta_0`: same `u_0 = 0`, different `mu_0`.
pub fn counterexample_pair(alpha: f64) -> Result<(Scenario, Scenario)> {
    if alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be nonnegative")));
    }
    let zero = build("zero", &BTreeMap::new())?;
    if alpha == 0.0 {
        return Ok((zero.clone(), zero));
    }
    let delta = build("delta", &BTreeMap::from([("alpha".to_string(), alpha)]))?;
    Ok((zero, delta))
}

/// Random compactly supported data: atoms, ramps with `u_x^2` as density, and empty gaps.
pub fn random_mixture<R: Rng + ?Sized>(rng: &mut R) -> Result<EulerianState> {
    let mut x = rng.gen_range(-2.0..0.0);
    let mut u = rng.gen_range(-1.0..1.0);
    let mut points = vec![(x, u)];
    let mut atoms = Vec::new();
    let mut density = Vec::new();
    let pieces = rng.gen_range(1..=6);
    let atom_at = rng.gen_range(0..pieces);
    for k in 0..pieces {
        let kind = if k == atom_at { 0 } else { rng.gen_range(0..3) };
        match kind {
            0 => {
                atoms.push(Atom { x, mass: rng.gen_range(0.1..1.5) });
                // separate consecutive atoms
                x += rng.gen_range(0.05..0.5);
            }
            1 => {
                let len = rng.gen_range(0.1..1.0);
                let slope: f64 = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                density.push(DensityPiece { a: x, b: x + len, density: slope * slope });
                x += len;
                u += slope * len;
            }
            _ => x += rng.gen_range(0.05..1.0),
        }
        points.push((x, u));
    }
    let u = PiecewiseAffine::continuous(&points)?;
    EulerianState::new(u, RadonMeasure::new(atoms, density)?)
}

/// A random pair of integrable initial states: a translate of a mixture or of a
/// base scenario, or two independent mixtures.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R) -> Result<(EulerianState, EulerianState)> {
    let h = rng.gen_range(-1.0..1.0);
    match rng.gen_range(0..4) {
        0 => {
            let m = random_mixture(rng)?;
            let shifted = m.translate(h);
            Ok((m, shifted))
        }
        1 => {
            let spec = match rng.gen_range(0..4) {
                0 => format!("delta:alpha={}", rng.gen_range(0.2..3.0)),
                1 => "wavebreak".to_string(),
                2 => "two_delta".to_string(),
                _ => "erf:n=256".to_string(),
            };
            let s = parse(&spec)?;
            Ok((s.initial.clone(), s.initial.translate(h)))
        }
        _ => Ok((random_mixture(rng)?, random_mixture(rng)?)),
    }
}
