//! Conservative solutions of the Hunter-Saxton equation through the
//! pseudo-inverse of the energy distribution, with a Wasserstein-based
//! Lipschitz metric between solutions.
//!
//! The pipeline is `scenarios` -> `eulerian` state `(u, mu)` -> `transport`
//! state `(chi, U)` -> closed-form evolution -> reconstructed `(u(t), mu(t))`.
//! The `lagrangian` module offers the equivalent characteristic formulation and
//! `metric` compares two solutions.

pub mod error;
pub mod eulerian;
pub mod export;
pub mod lagrangian;
pub mod measure;
pub mod metric;
pub mod numeric;
pub mod scenarios;
pub mod special;
pub mod tol;
pub mod transport;
pub mod verify;

mod ext_real;

pub use error::{Error, Result};
pub use eulerian::{Diagnostics, EulerianState, Truncation};
pub use ext_real::ExtReal;
pub use lagrangian::LagrangianState;
pub use measure::{MonotoneFunction, PiecewiseAffine, RadonMeasure};
pub use metric::MetricReport;
pub use scenarios::Scenario;
pub use transport::{BoundaryCase, TransportState};
