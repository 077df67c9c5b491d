//! Numerical tolerances shared across modules.

/// Two atoms (or a flat piece of a pseudo-inverse) closer than this are one location.
pub const ATOM_MERGE: f64 = 1e-14;

/// Total masses closer than this (relative to max(1, C)) are treated as equal.
pub const MASS_MATCH: f64 = 1e-12;

/// Slack for the compatibility condition `u_x^2 = density` and `y_xi H_xi = U_xi^2`.
pub const COMPATIBILITY: f64 = 1e-10;

/// Smallest admissible value of `min(y_xi + H_xi)`.
pub const MIN_SPEED: f64 = 1e-12;

/// Decrease of an evolved pseudo-inverse that is attributed to rounding.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Slack in `d(t) <= (1 + t + t^2/8) d(0)`.
pub const LIPSCHITZ_SLACK: f64 = 1e-9;

/// `tol` scaled by the magnitude of `v`, never below `tol`.
#[inline]
pub fn scaled(tol: f64, v: f64) -> f64 {
    if v.is_finite() {
        tol * v.abs().max(1.0)
    } else {
        tol
    }
}
