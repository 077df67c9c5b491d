//! Monotone functions, finite measures on the line, and the cumulative / pseudo-inverse duality.

mod piecewise;
mod radon;
mod transform;

pub use piecewise::{Breakpoint, MonotoneFunction, PiecewiseAffine, Segment};
pub use radon::{Atom, DensityPiece, RadonMeasure};
pub use transform::{
    check_integrability, cumulative, inverse_to_cumulative, l1_distance, measure_from_cumulative, pseudo_inverse,
    sup_distance, tail_integrals,
};
