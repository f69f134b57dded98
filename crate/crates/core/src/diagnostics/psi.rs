//! The log-Lipschitz modulus `Ψ(τ) = τ|ln τ|` on `[0, e⁻¹]`, `e⁻¹` beyond.

use crate::error::{Error, Result};

/// `e⁻¹`, where the two branches of `Ψ` meet.
pub const INV_E: f64 = 0.367_879_441_171_442_33;

/// `Ψ(τ)` for `τ ≥ 0`.
pub fn psi(tau: f64) -> Result<f64> {
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::invalid(format!("psi is defined for tau >= 0, got {tau}")));
    }
    Ok(psi_nonneg(tau))
}

/// `Ψ` without the domain check; negative inputs are treated as zero.
#[inline]
pub(crate) fn psi_nonneg(tau: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else if tau < INV_E {
        -tau * tau.ln()
    } else {
        INV_E
    }
}
