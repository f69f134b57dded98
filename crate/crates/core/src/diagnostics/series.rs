//! Time-indexed diagnostic records with running dissipation integrals.

use crate::error::{Error, Result};

/// Instantaneous quantities of one coupled state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub t: f64,
    /// `½‖u‖₂²`.
    pub e_fluid: f64,
    /// `∑ w_p |v_p|²`.
    pub m2: f64,
    /// `ν‖∇u‖₂²`.
    pub visc_rate: f64,
    /// Drag dissipation rate `∑∫ f |v − u|²` (grid form).
    pub drag_rate: f64,
    /// `‖u‖∞`.
    pub u_inf: f64,
    /// `∫ u·j`.
    pub coupling: f64,
}

/// Twin-run quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwinRecord {
    /// Loeper functional `Q`.
    pub q: f64,
    /// `H = ‖w‖₂² + Q`.
    pub h: f64,
    /// Coupling term `A`.
    pub a: f64,
    /// `‖w‖₂`.
    pub w_l2: f64,
    /// `‖∇w‖₂`.
    pub w_h1: f64,
}

/// One row of a diagnostic series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRecord {
    pub e_fluid: f64,
    pub m2: f64,
    /// Running `∫₀ᵗ ν‖∇u‖₂²`.
    pub diss_visc: f64,
    /// Running `∫₀ᵗ ∑∫ f|v − u|²`.
    pub diss_drag: f64,
    pub u_inf: f64,
    pub gamma_hat: Option<f64>,
    pub twin: Option<TwinRecord>,
}

/// Records at increasing times; running integrals use the trapezoidal rule
/// on the step grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticSeries {
    pub times: Vec<f64>,
    pub records: Vec<DiagnosticRecord>,
    /// `∫ u·j` at each recorded time.
    pub coupling: Vec<f64>,
    last: Option<Observables>,
}

impl DiagnosticSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Appends the state `obs`, integrating the dissipation rates from the
    /// previous record.
    pub fn push(&mut self, obs: Observables, gamma_hat: Option<f64>, twin: Option<TwinRecord>) -> Result<()> {
        let (diss_visc, diss_drag) = match (&self.last, self.records.last()) {
            (Some(prev), Some(rec)) => {
                let dt = obs.t - prev.t;
                if !(dt > 0.0) {
                    return Err(Error::invalid(format!(
                        "times must increase: {} after {}",
                        obs.t, prev.t
                    )));
                }
                (
                    rec.diss_visc + 0.5 * dt * (prev.visc_rate + obs.visc_rate),
                    rec.diss_drag + 0.5 * dt * (prev.drag_rate + obs.drag_rate),
                )
            }
            _ => (0.0, 0.0),
        };
        self.times.push(obs.t);
        self.coupling.push(obs.coupling);
        self.records.push(DiagnosticRecord {
            e_fluid: obs.e_fluid,
            m2: obs.m2,
            diss_visc,
            diss_drag,
            u_inf: obs.u_inf,
            gamma_hat,
            twin,
        });
        self.last = Some(obs);
        Ok(())
    }

    pub fn column(&self, f: impl Fn(&DiagnosticRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Checks the structural invariants: increasing times, non-decreasing
    /// running integrals, `0 ≤ Q ≤ H`.
    pub fn check_invariants(&self) -> Result<()> {
        for k in 1..self.len() {
            if !(self.times[k] > self.times[k - 1]) {
                return Err(Error::invalid(format!("times not increasing at row {k}")));
            }
            let (a, b) = (&self.records[k - 1], &self.records[k]);
            if b.diss_visc < a.diss_visc || b.diss_drag < a.diss_drag {
                return Err(Error::invalid(format!("running integral decreased at row {k}")));
            }
        }
        for (k, r) in self.records.iter().enumerate() {
            if let Some(tw) = r.twin {
                if !(tw.q >= 0.0 && tw.h >= tw.q) {
                    return Err(Error::invalid(format!("need 0 <= Q <= H at row {k}")));
                }
            }
        }
        Ok(())
    }
}

/// Trapezoidal running integral of `values` on the grid `times`.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for k in 0..values.len() {
        if k > 0 {
            acc += 0.5 * (times[k] - times[k - 1]) * (values[k - 1] + values[k]);
        }
        out.push(acc);
    }
    out
}
