//! Special functions not covered by `libm`.

use std::f64::consts::PI;

pub use libm::erf;

/// Inverse error function on `(-1, 1)`; `±inf` at `±1`.
///
/// Bisection brackets the root, Newton's method polishes it to about `1e-15`.
pub fn erfinv(y: f64) -> f64 {
    if y.is_nan() || !(-1.0..=1.0).contains(&y) {
        return f64::NAN;
    }
    if y == 1.0 {
        return f64::INFINITY;
    }
    if y == -1.0 {
        return f64::NEG_INFINITY;
    }
    if y == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (-6.0f64, 6.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if erf(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let scale = 2.0 / PI.sqrt();
    for _ in 0..50 {
        let step = (erf(x) - y) / (scale * (-x * x).exp());
        x -= step;
        if step.abs() <= 1e-14 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_erf() {
        for x in [-2.5, -1.0, -0.2, 1e-8, 0.7, 2.0, 2.5] {
            let y = erf(x);
            assert!((erfinv(y) - x).abs() < 1e-12 * x.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn endpoints_and_outside() {
        assert_eq!(erfinv(1.0), f64::INFINITY);
        assert_eq!(erfinv(-1.0), f64::NEG_INFINITY);
        assert!(erfinv(1.5).is_nan());
        assert_eq!(erfinv(0.0), 0.0);
    }
}
