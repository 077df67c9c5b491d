//! CSV and JSON renderings of solution surfaces, Eulerian piece tables and metric reports.

use serde::Serialize;
use serde_json::{json, Value};

use crate::eulerian::{u_pieces, EulerianState};
use crate::metric::MetricReport;
use crate::transport::SurfaceRow;

/// 17 significant digits; infinities as `inf` / `-inf`.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub const SURFACE_HEADER: &str = "t,eta,chi,U";
pub const EULERIAN_HEADER: &str = "t,kind,x0,x1,value0,value1";

pub fn surface_csv(rows: &[SurfaceRow]) -> String {
    let mut out = String::from(SURFACE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", fmt_float(r.t), fmt_float(r.eta), fmt_float(r.chi), fmt_float(r.ucal)));
    }
    out
}

/// One row of the Eulerian piece table: a piece of `u`, a density piece or an atom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerianRow {
    pub t: f64,
    pub kind: &'static str,
    pub x0: f64,
    pub x1: f64,
    pub value0: f64,
    pub value1: f64,
}

pub fn eulerian_rows(t: f64, state: &EulerianState) -> Vec<EulerianRow> {
    let mut rows: Vec<EulerianRow> = u_pieces(&state.u)
        .into_iter()
        .map(|(x0, x1, value0, value1)| EulerianRow { t, kind: "u", x0, x1, value0, value1 })
        .collect();
    rows.extend(state.mu.density().iter().map(|p| EulerianRow {
        t,
        kind: "density",
        x0: p.a,
        x1: p.b,
        value0: p.density,
        value1: p.density,
    }));
    rows.extend(state.mu.atoms().iter().map(|a| EulerianRow {
        t,
        kind: "atom",
        x0: a.x,
        x1: a.x,
        value0: a.mass,
        value1: a.mass,
    }));
    rows
}

pub fn eulerian_csv(rows: &[EulerianRow]) -> String {
    let mut out = String::from(EULERIAN_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_float(r.t),
            r.kind,
            fmt_float(r.x0),
            fmt_float(r.x1),
            fmt_float(r.value0),
            fmt_float(r.value1)
        ));
    }
    out
}

/// `{"surface": [...], "eulerian": [{"t": .., "state": ..}, ...]}`.
pub fn solve_json(rows: &[SurfaceRow], states: &[(f64, EulerianState)]) -> Value {
    json!({
        "surface": rows,
        "eulerian": states
            .iter()
            .map(|(t, s)| json!({ "t": t, "state": s }))
            .collect::<Vec<_>>(),
    })
}

pub fn metric_csv(reports: &[MetricReport]) -> String {
    let mut out = String::from(MetricReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{PiecewiseAffine, RadonMeasure};

    #[test]
    fn floats_keep_17_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        let v: f64 = fmt_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }

    #[test]
    fn atom_rows() {
        let s = EulerianState::new(PiecewiseAffine::constant(-0.5), RadonMeasure::dirac(-0.5, 1.0).unwrap()).unwrap();
        let csv = eulerian_csv(&eulerian_rows(2.0, &s));
        assert!(csv.contains("atom,-5.0000000000000000e-1,-5.0000000000000000e-1,1.0000000000000000e0,"));
        assert!(csv.contains("u,-inf,inf,"));
    }
}
