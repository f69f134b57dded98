//! Functionals of particle ensembles and fluid states used by the stability
//! argument: the Loeper distance, the empirical log-Lipschitz constant, the
//! coupling term `A`, kinetic moment bounds and the interpolation quotient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{geodesic_distance, MomentFields, ScalarField, TorusGrid, VelocityField};
use crate::kernels::{deposit_channels, deposit_moment};
use crate::norms::lebesgue_norm;
use crate::particles::{admissibility_gamma, f_along_trajectory, moment, InitialFamily, ParticleEnsemble};

use super::psi::{psi_nonneg, INV_E};

/// `∑ w_p (d(x₁,x₂)² + |v₁−v₂|²)` for ensembles sampled from the same
/// initial points (same `x0` and `w`, particle by particle).
pub fn loeper_q(p1: &ParticleEnsemble, p2: &ParticleEnsemble) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::Unpaired(format!("{} vs {} particles", p1.len(), p2.len())));
    }
    if p1.w != p2.w || p1.x0 != p2.x0 {
        return Err(Error::Unpaired("initial positions or weights differ".into()));
    }
    Ok((0..p1.len())
        .map(|k| {
            let d = geodesic_distance(p1.x[k], p2.x[k]);
            let dv0 = p1.v[k][0] - p2.v[k][0];
            let dv1 = p1.v[k][1] - p2.v[k][1];
            p1.w[k] * (d * d + dv0 * dv0 + dv1 * dv1)
        })
        .sum())
}

/// Integer node offsets `(di, dj)` with `0 < h|(di,dj)| ≤ e⁻¹`, paired with
/// `Ψ` of their length.
pub fn log_lip_offsets(grid: TorusGrid) -> Vec<(i64, i64, f64)> {
    let n = grid.n() as i64;
    let h = grid.h();
    let mut out = Vec::new();
    for dj in (1 - n / 2)..=(n / 2) {
        for di in (1 - n / 2)..=(n / 2) {
            let d = h * ((di * di + dj * dj) as f64).sqrt();
            if d > 0.0 && d <= INV_E {
                out.push((di, dj, psi_nonneg(d)));
            }
        }
    }
    out
}

#[inline]
fn shifted(grid: TorusGrid, k: usize, di: i64, dj: i64) -> usize {
    let n = grid.n() as i64;
    let i = (k as i64 % n + di).rem_euclid(n);
    let j = (k as i64 / n + dj).rem_euclid(n);
    (j * n + i) as usize
}

/// Empirical `γ̂ = max |u(x)−u(y)| / Ψ(d(x,y))` over node pairs with
/// `0 < d ≤ e⁻¹`. Pairs are drawn at random from `seed`; when `n_pairs`
/// reaches the number of admissible pairs every pair is scanned.
pub fn log_lip_gamma(u: &VelocityField, n_pairs: usize, seed: u64) -> Result<f64> {
    if n_pairs == 0 {
        return Err(Error::invalid("need at least one pair"));
    }
    let grid = u.grid;
    let offsets = log_lip_offsets(grid);
    let ratio = |k: usize, (di, dj, ps): (i64, i64, f64)| {
        let m = shifted(grid, k, di, dj);
        (u.x[k] - u.x[m]).hypot(u.y[k] - u.y[m]) / ps
    };
    let total = offsets.len() * grid.len();
    if n_pairs >= total {
        return Ok(offsets
            .par_iter()
            .map(|&o| (0..grid.len()).map(|k| ratio(k, o)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..n_pairs {
        let k = rng.random_range(0..grid.len());
        let o = offsets[rng.random_range(0..offsets.len())];
        best = best.max(ratio(k, o));
    }
    Ok(best)
}

/// `A = ∫(ρ₂−ρ₁)u₂·w + ∫(j₁−j₂)·w` with `w = u₁ − u₂`.
pub fn coupling_a(
    u1: &VelocityField,
    m1: &MomentFields,
    u2: &VelocityField,
    m2: &MomentFields,
) -> Result<f64> {
    let grid = u1.grid;
    for g in [u2.grid, m1.grid(), m2.grid()] {
        grid.check_same(&g)?;
    }
    let mut acc = 0.0;
    for k in 0..grid.len() {
        let w = [u1.x[k] - u2.x[k], u1.y[k] - u2.y[k]];
        let drho = m2.rho.values[k] - m1.rho.values[k];
        acc += drho * (u2.x[k] * w[0] + u2.y[k] * w[1]);
        acc += (m1.j.x[k] - m2.j.x[k]) * w[0] + (m1.j.y[k] - m2.j.y[k]) * w[1];
    }
    Ok(acc * grid.cell_area())
}

/// `∫ u·j`.
pub fn momentum_coupling(m: &MomentFields, u: &VelocityField) -> f64 {
    let acc: f64 = (0..u.grid.len())
        .map(|k| u.x[k] * m.j.x[k] + u.y[k] * m.j.y[k])
        .sum();
    acc * u.grid.cell_area()
}

/// Drag dissipation `∫(m₂ − 2u·j + ρ|u|²) = ∑_p w_p ∑_g W_pg |v_p − u_g|²`,
/// the grid form of `∫∫ f|v − u|²`.
pub fn drag_dissipation(m: &MomentFields, u: &VelocityField) -> f64 {
    let acc: f64 = (0..u.grid.len())
        .map(|k| {
            let (ux, uy) = (u.x[k], u.y[k]);
            m.m2.values[k] - 2.0 * (ux * m.j.x[k] + uy * m.j.y[k])
                + m.rho.values[k] * (ux * ux + uy * uy)
        })
        .sum();
    acc * u.grid.cell_area()
}

/// Deposited local moments `m₀`, `m₁`, `m₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticMoments {
    pub m0: ScalarField,
    pub m1: ScalarField,
    pub m2: ScalarField,
}

impl KineticMoments {
    pub fn deposit(p: &ParticleEnsemble, grid: TorusGrid) -> Self {
        let [m0, m1, m2] = deposit_channels(grid, &p.x, |k| {
            let v = p.v[k];
            let s2 = v[0] * v[0] + v[1] * v[1];
            let w = p.w[k];
            [w, w * s2.sqrt(), w * s2]
        });
        KineticMoments {
            m0: ScalarField { grid, values: m0 },
            m1: ScalarField { grid, values: m1 },
            m2: ScalarField { grid, values: m2 },
        }
    }

    /// `‖m₀‖∞ + ‖m₁‖∞ + ‖m₂‖∞`.
    pub fn sup_sum(&self) -> f64 {
        let sup = |f: &ScalarField| f.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        sup(&self.m0) + sup(&self.m1) + sup(&self.m2)
    }
}

/// Relative slack granted to the deposited moments in [`moment_bound_check`].
pub const MOMENT_BOUND_SLACK: f64 = 0.1;

/// Outcome of the kinetic moment bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBoundReport {
    pub pass: bool,
    /// Measured `sup_t (‖m₀‖∞ + ‖m₁‖∞ + ‖m₂‖∞)`.
    pub lhs: f64,
    /// `e^{2T} Γ_R(f₀)`.
    pub rhs: f64,
    pub slack: f64,
}

/// Checks `‖m₀‖∞ + ‖m₁‖∞ + ‖m₂‖∞ ≤ e^{2T} Γ_R` over the recorded moments,
/// allowing [`MOMENT_BOUND_SLACK`] for deposition noise.
pub fn moment_bound_check(
    series: &[KineticMoments],
    fam: &InitialFamily,
    t_final: f64,
    r: f64,
) -> Result<MomentBoundReport> {
    let gamma = admissibility_gamma(fam, t_final, r)?;
    let rhs = (2.0 * t_final).exp() * gamma;
    let lhs = series.iter().map(KineticMoments::sup_sum).fold(0.0, f64::max);
    Ok(MomentBoundReport {
        pass: lhs <= (1.0 + MOMENT_BOUND_SLACK) * rhs,
        lhs,
        rhs,
        slack: MOMENT_BOUND_SLACK,
    })
}

/// `R = e^T ∫₀ᵀ ‖u‖∞` with the trapezoidal rule.
pub fn drift_radius(times: &[f64], u_inf: &[f64]) -> f64 {
    let t_final = times.last().copied().unwrap_or(0.0);
    let integral = super::series::cumulative_trapezoid(times, u_inf)
        .last()
        .copied()
        .unwrap_or(0.0);
    t_final.exp() * integral
}

/// `‖m_ℓ‖_{(k+2)/(ℓ+2)} / (‖f‖∞^{(k−ℓ)/(k+2)} M_k^{(ℓ+2)/(k+2)})` with
/// `m_ℓ` deposited on `grid` and `‖f‖∞` the largest value carried by a
/// particle.
pub fn interp_inequality_ratio(
    p: &ParticleEnsemble,
    grid: TorusGrid,
    l: u32,
    k: u32,
    fam: &InitialFamily,
) -> Result<f64> {
    if k > 2 || l > k {
        return Err(Error::invalid(format!("need 0 <= l <= k <= 2, got l={l}, k={k}")));
    }
    let (lf, kf) = (l as f64, k as f64);
    let ml = deposit_moment(p, grid, l);
    let lhs = lebesgue_norm(&ml, (kf + 2.0) / (lf + 2.0))?;
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let h_inf = f_along_trajectory(p, fam).into_iter().fold(0.0, f64::max);
    let mk = moment(p, k)?;
    let rhs = h_inf.powf((kf - lf) / (kf + 2.0)) * mk.powf((lf + 2.0) / (kf + 2.0));
    Ok(lhs / rhs)
}
