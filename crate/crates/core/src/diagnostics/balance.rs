//! Residuals of the energy–dissipation identity and the second-moment law.

use crate::error::{Error, Result};

use super::series::{cumulative_trapezoid, DiagnosticSeries};

/// `max_t |½‖u‖² + ½M₂ + ∫ν‖∇u‖² + ∫∫∫f|v−u|² − ½‖u₀‖² − ½M₂(0)|`.
pub fn energy_balance(series: &DiagnosticSeries) -> f64 {
    let Some(first) = series.records.first() else {
        return 0.0;
    };
    let initial = first.e_fluid + 0.5 * first.m2;
    series
        .records
        .iter()
        .map(|r| (r.e_fluid + 0.5 * r.m2 + r.diss_visc + r.diss_drag - initial).abs())
        .fold(0.0, f64::max)
}

/// `max_t |M₂(t) + 2∫₀ᵗM₂ − M₂(0) − 2∫₀ᵗ∫u·j|` with trapezoidal quadrature;
/// `coupling` holds `∫u·j` at the series times.
pub fn m2_balance(series: &DiagnosticSeries, coupling: &[f64]) -> Result<f64> {
    if coupling.len() != series.len() {
        return Err(Error::invalid(format!(
            "coupling has {} samples for {} records",
            coupling.len(),
            series.len()
        )));
    }
    if series.is_empty() {
        return Ok(0.0);
    }
    let m2 = series.column(|r| r.m2);
    let int_m2 = cumulative_trapezoid(&series.times, &m2);
    let int_c = cumulative_trapezoid(&series.times, coupling);
    Ok((0..m2.len())
        .map(|k| (m2[k] + 2.0 * int_m2[k] - m2[0] - 2.0 * int_c[k]).abs())
        .fold(0.0, f64::max))
}
