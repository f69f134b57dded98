//! Short-time horizon `T₀`, the Osgood comparison envelope and the one-sided
//! check of the `Q` differential inequality.

use crate::error::{Error, Result};

use super::psi::{psi_nonneg, INV_E};

/// Bisection tolerance on `T₀`.
const T0_TOL: f64 = 1e-10;

/// Largest `t ≤ T` with `(√t + ⅔t^{3/2}) S < e⁻¹/2`, by bisection to `1e-10`.
/// `S = ‖u₁‖_{L²L∞} + ‖u₂‖_{L²L∞}`; negative `S` is treated as zero.
pub fn compute_t0(s: f64, t_final: f64) -> f64 {
    let t_final = t_final.max(0.0);
    let s = s.max(0.0);
    let target = 0.5 * INV_E;
    let excursion = |t: f64| (t.sqrt() + 2.0 / 3.0 * t.powf(1.5)) * s;
    if s == 0.0 || excursion(t_final) < target {
        return t_final;
    }
    let (mut lo, mut hi) = (0.0, t_final);
    while hi - lo > T0_TOL {
        let mid = 0.5 * (lo + hi);
        if excursion(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Comparison solution of `y' = (K/α) γ(t) (y + Ψ(K y))`, `y(0) = H₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct OsgoodEnvelope {
    pub times: Vec<f64>,
    pub bound: Vec<f64>,
    pub k: f64,
    pub alpha: f64,
    pub h0: f64,
}

impl OsgoodEnvelope {
    /// Envelope value at `t`, linearly interpolated; `None` outside the grid.
    pub fn at(&self, t: f64) -> Option<f64> {
        let last = *self.times.last()?;
        if t < self.times[0] || t > last + 1e-12 {
            return None;
        }
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len());
        if k == self.times.len() {
            return self.bound.last().copied();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let th = (t - t0) / (t1 - t0);
        Some(self.bound[k - 1] + th * (self.bound[k] - self.bound[k - 1]))
    }
}

/// RK4 integration of the comparison ODE on the recorded times up to `T₀`;
/// `γ` is interpolated linearly between samples. Requires `K > 1`,
/// `α ∈ (0,1)` and `Kα ≤ 3/K`.
pub fn osgood_envelope(
    times: &[f64],
    gamma: &[f64],
    k: f64,
    alpha: f64,
    h0: f64,
    t0: f64,
) -> Result<OsgoodEnvelope> {
    if times.len() != gamma.len() || times.is_empty() {
        return Err(Error::invalid("gamma series must be non-empty and match its times"));
    }
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::invalid(format!("K must exceed 1, got {k}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if k * alpha > 3.0 / k * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("need K*alpha <= 3/K, got K={k}, alpha={alpha}")));
    }
    if !(h0 >= 0.0 && h0.is_finite()) {
        return Err(Error::invalid(format!("H0 must be nonnegative, got {h0}")));
    }
    if gamma.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        return Err(Error::invalid("gamma must be finite and nonnegative"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("times must increase"));
    }
    let mut grid: Vec<(f64, f64)> = times
        .iter()
        .zip(gamma)
        .take_while(|(t, _)| **t <= t0 + 1e-12)
        .map(|(t, g)| (*t, *g))
        .collect();
    if let Some(&(last, _)) = grid.last() {
        let next = grid.len();
        if t0 > last + 1e-12 && next < times.len() {
            let th = (t0 - last) / (times[next] - last);
            grid.push((t0, gamma[next - 1] + th * (gamma[next] - gamma[next - 1])));
        }
    }
    let rate = k / alpha;
    let f = |g: f64, y: f64| rate * g * (y + psi_nonneg(k * y));
    let mut bound = Vec::with_capacity(grid.len());
    let mut y = h0;
    bound.push(y);
    for w in grid.windows(2) {
        let ((ta, ga), (tb, gb)) = (w[0], w[1]);
        let dt = tb - ta;
        let gm = 0.5 * (ga + gb);
        let k1 = f(ga, y);
        let k2 = f(gm, y + 0.5 * dt * k1);
        let k3 = f(gm, y + 0.5 * dt * k2);
        let k4 = f(gb, y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        bound.push(y);
    }
    Ok(OsgoodEnvelope {
        times: grid.iter().map(|p| p.0).collect(),
        bound,
        k,
        alpha,
        h0,
    })
}

/// `max_n (ΔQ/Δt − RHS)₊` with `RHS = 2Q + γ̂Ψ(Q) + K̂‖w‖₂²` averaged over
/// each step.
pub fn q_dynamics_check(
    times: &[f64],
    q: &[f64],
    gamma_hat: &[f64],
    w_l2: &[f64],
    k_hat: f64,
) -> Result<f64> {
    let n = times.len();
    if q.len() != n || gamma_hat.len() != n || w_l2.len() != n {
        return Err(Error::invalid("twin series columns differ in length"));
    }
    let rhs = |k: usize| 2.0 * q[k] + gamma_hat[k] * psi_nonneg(q[k]) + k_hat * w_l2[k] * w_l2[k];
    let mut worst: f64 = 0.0;
    for k in 1..n {
        let dt = times[k] - times[k - 1];
        let slope = (q[k] - q[k - 1]) / dt;
        worst = worst.max(slope - 0.5 * (rhs(k - 1) + rhs(k)));
    }
    Ok(worst)
}
