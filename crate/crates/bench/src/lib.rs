//! Fixtures shared by the criterion benchmarks.

use hsmetric::scenarios;
use hsmetric::{EulerianState, Result, TransportState};

/// Grid-sampled smooth initial data with `n` cells.
pub fn erf_state(n: usize) -> Result<EulerianState> {
    Ok(scenarios::parse(&format!("erf:n={n}"))?.initial)
}

pub fn erf_transport(n: usize) -> Result<TransportState> {
    hsmetric::transport::init_transport(&erf_state(n)?)
}

/// The erf data and a copy shifted by `0.1`.
pub fn shifted_pair(n: usize) -> Result<(EulerianState, EulerianState)> {
    let a = erf_state(n)?;
    let b = a.translate(0.1);
    Ok((a, b))
}
