use crate::error::{Error, Result};
use crate::numeric::{abs_affine_integral, merge_sorted, CompensatedSum};
use crate::tol;

use super::piecewise::{Breakpoint, MonotoneFunction, PiecewiseAffine};
use super::radon::{Atom, DensityPiece, RadonMeasure};

const NEG_INF: f64 = f64::NEG_INFINITY;
const INF: f64 = f64::INFINITY;

fn monotone(f: PiecewiseAffine) -> MonotoneFunction {
    MonotoneFunction::new(f).expect("construction yields a non-decreasing function")
}

/// `F(x) = mu((-inf, x))`; atoms show up as the right limit at their location.
pub fn cumulative(mu: &RadonMeasure) -> MonotoneFunction {
    let knots: Vec<Breakpoint> = mu.sweep().into_iter().map(|(x, l, r)| Breakpoint::new(x, l, r)).collect();
    let hi = knots.last().map_or(0.0, |b| b.right);
    monotone(PiecewiseAffine::new(NEG_INF, INF, knots, 0.0, hi).expect("valid sweep"))
}

/// Measure whose cumulative function is `f`: jumps become atoms, slopes become densities.
pub fn measure_from_cumulative(f: &PiecewiseAffine) -> Result<RadonMeasure> {
    let bps = f.breakpoints();
    let mut atoms = Vec::new();
    let mut density = Vec::new();
    for b in bps {
        if b.right > b.left {
            atoms.push(Atom { x: b.x, mass: b.right - b.left });
        }
    }
    for s in f.segments() {
        if s.v1 > s.v0 {
            density.push(DensityPiece { a: s.x0, b: s.x1, density: s.slope() });
        }
    }
    RadonMeasure::new(atoms, density)
}

/// Graph of `f` as a monotone polygonal path, jumps included as vertical steps.
fn graph_path(f: &PiecewiseAffine) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(2 * f.breakpoints().len());
    for b in f.breakpoints() {
        for v in [b.left, b.right] {
            if v.is_finite() && pts.last() != Some(&(b.x, v)) {
                pts.push((b.x, v));
            }
        }
    }
    pts
}

/// `chi(eta) = sup { x | F(x) < eta }` on `[0, C]`.
///
/// Atoms of the underlying measure become flat pieces of `chi`, gaps in its
/// support become jumps. `chi(0) = -inf` always.
pub fn pseudo_inverse(f: &MonotoneFunction, c: f64) -> Result<MonotoneFunction> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidFunction(format!("total mass {c} must be finite and nonnegative")));
    }
    let slack = tol::scaled(tol::MASS_MATCH, c);
    if f.tail_lo() < -slack {
        return Err(Error::RangeExceedsMass { found: f.tail_lo(), total: c });
    }
    if f.tail_hi() > c + slack {
        return Err(Error::RangeExceedsMass { found: f.tail_hi(), total: c });
    }
    if f.tail_hi() < c - slack {
        return Err(Error::IncompleteRange { found: f.tail_hi(), total: c });
    }
    if c == 0.0 {
        let knot = Breakpoint::new(0.0, NEG_INF, NEG_INF);
        return Ok(monotone(PiecewiseAffine::new(0.0, 0.0, vec![knot], NEG_INF, NEG_INF)?));
    }
    // swap axes; group points sharing a level
    let mut knots: Vec<Breakpoint> = Vec::new();
    for (x, v) in graph_path(f) {
        let eta = v.clamp(0.0, c);
        match knots.last_mut() {
            Some(k) if k.x == eta => k.right = x,
            _ => knots.push(Breakpoint::new(eta, x, x)),
        }
    }
    // snap the top level to C
    let top = *knots.last().expect("C > 0 implies a nonempty path");
    if top.x < c {
        if knots.len() == 1 {
            knots.push(Breakpoint::continuous(c, top.right));
        } else {
            knots.last_mut().unwrap().x = c;
        }
    }
    if knots.first().map(|k| k.x) != Some(0.0) {
        return Err(Error::InvalidFunction("cumulative function does not start at 0".into()));
    }
    knots[0].left = NEG_INF;
    let hi = knots.last().unwrap().right;
    Ok(monotone(PiecewiseAffine::new(0.0, c, knots, NEG_INF, hi)?))
}

/// `F(x) = |{ eta in (0, C) : chi(eta) < x }|`; flat pieces of `chi` become jumps of `F`.
///
/// Pieces of `chi` flatter than [`tol::ATOM_MERGE`] (relative) are treated as flat.
pub fn inverse_to_cumulative(chi: &MonotoneFunction, c: f64) -> Result<MonotoneFunction> {
    let mut knots: Vec<Breakpoint> = Vec::new();
    for (eta, x) in graph_path(chi) {
        let eta = eta.clamp(0.0, c);
        match knots.last_mut() {
            Some(k) if x - k.x <= tol::scaled(tol::ATOM_MERGE, k.x) => k.right = eta,
            _ => knots.push(Breakpoint::new(x, eta, eta)),
        }
    }
    if knots.is_empty() {
        return Ok(monotone(PiecewiseAffine::new(NEG_INF, INF, vec![], 0.0, 0.0)?));
    }
    knots[0].left = 0.0;
    let last = knots.last_mut().unwrap();
    if (last.right - c).abs() > tol::scaled(tol::MASS_MATCH, c) {
        return Err(Error::IncompleteRange { found: last.right, total: c });
    }
    last.right = c;
    Ok(monotone(PiecewiseAffine::new(NEG_INF, INF, knots, 0.0, c)?))
}

/// `(knot, left_f, right_f, left_g, right_g)` over the union of knots inside `[lo, hi]`.
fn paired_limits(f: &PiecewiseAffine, g: &PiecewiseAffine, lo: f64, hi: f64) -> Vec<(f64, [f64; 4])> {
    merge_sorted(&f.knots(), &g.knots())
        .into_iter()
        .filter(|&x| x >= lo && x <= hi)
        .map(|x| (x, [f.eval(x), f.right_limit(x), g.eval(x), g.right_limit(x)]))
        .collect()
}

fn check_same_domain(f: &PiecewiseAffine, g: &PiecewiseAffine) -> Result<(f64, f64)> {
    let (a0, a1) = f.domain();
    let (b0, b1) = g.domain();
    let close = |p: f64, q: f64| p == q || (p - q).abs() <= tol::scaled(tol::MASS_MATCH, p);
    if !close(a0, b0) || !close(a1, b1) {
        return Err(Error::MassMismatch(a1 - a0, b1 - b0));
    }
    Ok((a0.max(b0), a1.min(b1)))
}

/// Exact `∫ |chi1 - chi2|` over their common interval `[0, C]`.
pub fn l1_distance(chi1: &PiecewiseAffine, chi2: &PiecewiseAffine) -> Result<f64> {
    let (lo, hi) = check_same_domain(chi1, chi2)?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidFunction("L1 distance needs a bounded interval".into()));
    }
    if hi <= lo {
        return Ok(0.0);
    }
    let mut pts = paired_limits(chi1, chi2, lo, hi);
    for end in [lo, hi] {
        if !pts.iter().any(|p| p.0 == end) {
            pts.push((end, [chi1.eval(end), chi1.right_limit(end), chi2.eval(end), chi2.right_limit(end)]));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = CompensatedSum::new();
    for w in pts.windows(2) {
        let (a, la) = w[0];
        let (b, lb) = w[1];
        let d0 = la[1] - la[3];
        let d1 = lb[0] - lb[2];
        if !(d0.is_finite() && d1.is_finite()) {
            return Err(Error::NonIntegrable { at: a });
        }
        acc.add(abs_affine_integral(d0, d1, b - a));
    }
    Ok(acc.value())
}

/// `sup |f - g|` over the common domain. Endpoint limits that are infinite for
/// both functions (e.g. `chi(0) = -inf`) are skipped.
pub fn sup_distance(f: &PiecewiseAffine, g: &PiecewiseAffine) -> Result<f64> {
    let (lo, hi) = check_same_domain(f, g)?;
    let mut worst = 0.0f64;
    let mut consider = |p: f64, q: f64| {
        if p == q {
            return;
        }
        let d = (p - q).abs();
        worst = if d.is_nan() { INF } else { worst.max(d) };
    };
    if lo == NEG_INF {
        consider(f.tail_lo(), g.tail_lo());
    }
    if hi == INF {
        consider(f.tail_hi(), g.tail_hi());
    }
    for (x, [fl, fr, gl, gr]) in paired_limits(f, g, lo, hi) {
        if x > lo {
            consider(fl, gl);
        }
        if x < hi {
            consider(fr, gr);
        }
    }
    if f.breakpoints().is_empty() && g.breakpoints().is_empty() {
        consider(f.tail_lo(), g.tail_lo());
    }
    Ok(worst)
}

/// `(∫_{-inf}^0 F dx, ∫_0^inf (C - F) dx)`, each possibly infinite.
pub fn tail_integrals(f: &PiecewiseAffine, c: f64) -> (f64, f64) {
    let (lo, hi) = f.domain();
    let mut below = CompensatedSum::new();
    let mut above = CompensatedSum::new();
    let below_inf = lo == NEG_INF && f.tail_lo() != 0.0;
    let above_inf = hi == INF && (f.tail_hi() - c).abs() > tol::scaled(tol::MASS_MATCH, c);
    let bps = f.breakpoints();
    if let (Some(first), Some(last)) = (bps.first(), bps.last()) {
        // constant tails inside the bounded stretch of the axis
        if first.x > 0.0 {
            above.add((c - f.tail_lo()) * first.x);
        }
        if last.x < 0.0 {
            below.add(f.tail_hi() * -last.x);
        }
    }
    for s in f.segments() {
        if !(s.v0.is_finite() && s.v1.is_finite()) {
            continue;
        }
        if s.x0 < 0.0 {
            let b = s.x1.min(0.0);
            below.add(0.5 * (s.v0 + s.at(b)) * (b - s.x0));
        }
        if s.x1 > 0.0 {
            let a = s.x0.max(0.0);
            above.add(0.5 * ((c - s.at(a)) + (c - s.v1)) * (s.x1 - a));
        }
    }
    (if below_inf { INF } else { below.value() }, if above_inf { INF } else { above.value() })
}

/// True iff both tail integrals of `F` are finite.
pub fn check_integrability(f: &PiecewiseAffine, c: f64) -> bool {
    let (a, b) = tail_integrals(f, c);
    a.is_finite() && b.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_ramp() -> RadonMeasure {
        RadonMeasure::uniform(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn cumulative_of_dirac_is_a_left_continuous_step() {
        let f = cumulative(&RadonMeasure::dirac(0.0, 1.0).unwrap());
        assert_eq!(f.eval(-1.0), 0.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1e-300), 1.0);
        assert_eq!(f.eval(7.0), 1.0);
    }

    #[test]
    fn cumulative_of_zero_measure() {
        let f = cumulative(&RadonMeasure::zero());
        assert_eq!(f.eval(-3.0), 0.0);
        assert_eq!(f.eval(3.0), 0.0);
    }

    #[test]
    fn cumulative_of_uniform_is_clamp() {
        let f = cumulative(&unit_ramp());
        for x in [-1.0, 0.0, 0.3, 0.75, 1.0, 2.0] {
            assert_eq!(f.eval(x), x.clamp(0.0, 1.0));
        }
    }

    #[test]
    fn pseudo_inverse_of_dirac_is_flat() {
        let alpha = 2.5;
        let f = cumulative(&RadonMeasure::dirac(0.0, alpha).unwrap());
        let chi = pseudo_inverse(&f, alpha).unwrap();
        assert_eq!(chi.eval(0.0), NEG_INF);
        for eta in [1e-9, 0.5, 1.7, alpha] {
            assert_eq!(chi.eval(eta), 0.0);
        }
    }

    #[test]
    fn pseudo_inverse_of_clamp_is_identity() {
        let chi = pseudo_inverse(&cumulative(&unit_ramp()), 1.0).unwrap();
        for eta in [0.1, 0.5, 0.99, 1.0] {
            assert_eq!(chi.eval(eta), eta);
        }
    }

    #[test]
    fn flats_of_f_become_jumps_of_chi() {
        // delta_0 + 2 delta_1
        let mu = RadonMeasure::new(vec![Atom { x: 0.0, mass: 1.0 }, Atom { x: 1.0, mass: 2.0 }], vec![]).unwrap();
        let chi = pseudo_inverse(&cumulative(&mu), 3.0).unwrap();
        assert_eq!(chi.eval(0.5), 0.0);
        assert_eq!(chi.eval(1.0), 0.0);
        assert_eq!(chi.right_limit(1.0), 1.0);
        assert_eq!(chi.eval(2.0), 1.0);
    }

    #[test]
    fn pseudo_inverse_rejects_wrong_mass() {
        let f = cumulative(&unit_ramp());
        assert!(matches!(pseudo_inverse(&f, 0.5), Err(Error::RangeExceedsMass { .. })));
        assert!(matches!(pseudo_inverse(&f, 2.0), Err(Error::IncompleteRange { .. })));
    }

    #[test]
    fn inverse_to_cumulative_examples() {
        let chi = pseudo_inverse(&cumulative(&RadonMeasure::dirac(0.0, 1.5).unwrap()), 1.5).unwrap();
        let f = inverse_to_cumulative(&chi, 1.5).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.right_limit(0.0), 1.5);

        let id = pseudo_inverse(&cumulative(&unit_ramp()), 1.0).unwrap();
        let f = inverse_to_cumulative(&id, 1.0).unwrap();
        for x in [-1.0, 0.25, 0.5, 2.0] {
            assert_eq!(f.eval(x), x.clamp(0.0, 1.0));
        }

        // a constant pseudo-inverse at -1/2 is a unit atom there
        let flat = MonotoneFunction::new(
            PiecewiseAffine::new(
                0.0,
                1.0,
                vec![Breakpoint::new(0.0, NEG_INF, -0.5), Breakpoint::continuous(1.0, -0.5)],
                NEG_INF,
                -0.5,
            )
            .unwrap(),
        )
        .unwrap();
        let mu = measure_from_cumulative(&inverse_to_cumulative(&flat, 1.0).unwrap()).unwrap();
        assert_eq!(mu.atoms(), &[Atom { x: -0.5, mass: 1.0 }]);
        assert!(mu.density().is_empty());
    }

    #[test]
    fn l1_examples() {
        let c0 = pseudo_inverse(&cumulative(&RadonMeasure::dirac(0.0, 1.0).unwrap()), 1.0).unwrap();
        let c1 = pseudo_inverse(&cumulative(&RadonMeasure::dirac(1.0, 1.0).unwrap()), 1.0).unwrap();
        assert_eq!(l1_distance(&c0, &c0).unwrap(), 0.0);
        assert_eq!(l1_distance(&c0, &c1).unwrap(), 1.0);
        let id = pseudo_inverse(&cumulative(&unit_ramp()), 1.0).unwrap();
        let neg = id.map_values(|v| -v);
        let neg = PiecewiseAffine::new(
            0.0,
            1.0,
            neg.breakpoints()
                .iter()
                .map(|b| Breakpoint::new(b.x, if b.x == 0.0 { NEG_INF } else { b.left }, b.right))
                .collect(),
            NEG_INF,
            neg.tail_hi(),
        )
        .unwrap();
        assert!((l1_distance(&id, &neg).unwrap() - 1.0).abs() < 1e-15);
        // uniform on [0,1] against an atom at 1/2
        let half = pseudo_inverse(&cumulative(&RadonMeasure::dirac(0.5, 1.0).unwrap()), 1.0).unwrap();
        assert!((l1_distance(&id, &half).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn l1_needs_matching_mass() {
        let a = pseudo_inverse(&cumulative(&RadonMeasure::dirac(0.0, 1.0).unwrap()), 1.0).unwrap();
        let b = pseudo_inverse(&cumulative(&RadonMeasure::dirac(0.0, 2.0).unwrap()), 2.0).unwrap();
        assert!(matches!(l1_distance(&a, &b), Err(Error::MassMismatch(..))));
    }

    #[test]
    fn compactly_supported_measures_are_integrable() {
        let f = cumulative(&RadonMeasure::dirac(0.0, 1.0).unwrap());
        assert!(check_integrability(&f, 1.0));
        let mu =
            RadonMeasure::new(vec![Atom { x: -2.0, mass: 1.0 }], vec![DensityPiece { a: 1.0, b: 3.0, density: 0.5 }])
                .unwrap();
        let f = cumulative(&mu);
        // F = 1 on (-2, 1), then rises linearly to 2 at x = 3
        assert_eq!(tail_integrals(&f, 2.0), (2.0, 2.0));
        // a function that never reaches C has an infinite upper tail
        assert!(!check_integrability(&f, 2.5));
    }
}
