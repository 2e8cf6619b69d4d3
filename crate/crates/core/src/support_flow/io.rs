//! CSV output for flow runs.

use std::fmt::Write as _;

use super::state::SupportState;
use super::stepper::TimeSeriesRecord;
use crate::real::Real;

/// Floats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const SERIES_HEADER: &str = "t,rho_minus,rho_plus,supF,pinch_ratio,area_or_volume,eta_p,f_sigma_max";

/// `series.csv`; `eta_p` reports the first configured exponent.
pub fn series_csv(records: &[TimeSeriesRecord]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.rho_minus),
            fmt_f64(r.rho_plus),
            fmt_f64(r.sup_f),
            fmt_f64(r.pinch_ratio),
            fmt_f64(r.area_or_volume),
            opt(r.eta_p.first().copied()),
            opt(r.f_sigma_max)
        );
    }
    out
}

/// Snapshot `u_<step>.csv` with header `angle,u`.
pub fn snapshot_csv<T: Real>(s: &SupportState<T>) -> String {
    let mut out = String::from("angle,u\n");
    for (a, u) in s.grid().angles().iter().zip(&s.u) {
        let _ = writeln!(out, "{},{}", fmt_f64(a.f64()), fmt_f64(u.f64()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::support_flow::state::Geometry;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        let s = SupportState::<f64>::sphere(Geometry::Planar, 8, 1.0).unwrap();
        let csv = snapshot_csv(&s);
        assert!(csv.starts_with("angle,u\n0.0000000000000000e0,1.0000000000000000e0\n"));
        assert_eq!(csv.lines().count(), 9);
    }
}
