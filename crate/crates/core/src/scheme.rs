//! Regularized fluid–kinetic system used for the existence construction:
//! mollified advection, truncated drag, and a Picard fixed point in the
//! fluid velocity.
//!
//! Given a velocity trajectory `u`, the particles are transported with the
//! truncated acceleration `χ(u − v)`, and the fluid `ũ` solves
//! `∂ₜũ + (ũ⋆φ_ε·∇)ũ − νΔũ + ∇p = σ∫χ(v − u)f` from `σu₀`. A fixed point
//! `ũ = u` is sought by iterating this map.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{TorusGrid, Vec2, VectorField, VelocityField};
use crate::kernels::{CicStencil, DEPOSIT_CHUNK};
use crate::ns::{mollifier_symbol, ns_step_with, step_count, Advection, ForceField, NsState};
use crate::particles::{moment, DragLaw, ParticleEnsemble, PushScheme};
use crate::spectral::{divergence_residual, SpectralVelocity, DIVERGENCE_TOL};

pub const DEFAULT_EPS_MOLLIFIER: f64 = 0.02;
pub const DEFAULT_R_CHI: f64 = 1.0;

/// Regularization of one fixed-point problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    /// Width of the mollifier.
    pub eps_mollifier: f64,
    /// Radius of the drag truncation.
    pub r_chi: f64,
    /// Homotopy parameter in `[0, 1]`.
    pub sigma: f64,
}

impl Default for RegularizationParams {
    fn default() -> Self {
        RegularizationParams {
            eps_mollifier: DEFAULT_EPS_MOLLIFIER,
            r_chi: DEFAULT_R_CHI,
            sigma: 1.0,
        }
    }
}

impl RegularizationParams {
    pub fn new(eps_mollifier: f64, r_chi: f64, sigma: f64) -> Result<Self> {
        let p = RegularizationParams {
            eps_mollifier,
            r_chi,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_mollifier > 0.0 && self.eps_mollifier.is_finite()) {
            return Err(Error::invalid(format!(
                "mollifier width must be positive, got {}",
                self.eps_mollifier
            )));
        }
        // an infinite radius is the untruncated drag
        if !(self.r_chi > 0.0) {
            return Err(Error::invalid(format!("truncation radius must be positive, got {}", self.r_chi)));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(Error::invalid(format!("sigma must lie in [0, 1], got {}", self.sigma)));
        }
        Ok(())
    }
}

/// Radial clamp `χ(z) = z·min(1, R/|z|)`.
#[inline]
pub fn chi(z: Vec2, r: f64) -> Vec2 {
    let n2 = z[0] * z[0] + z[1] * z[1];
    if n2 <= r * r {
        z
    } else {
        let s = r / n2.sqrt();
        [z[0] * s, z[1] * s]
    }
}

/// `u⋆φ_ε` through the Gaussian symbol `e^{−ε²|2πk|²/2}`. `eps = 0` is the
/// identity.
pub fn mollify(u: &VelocityField, eps: f64) -> VelocityField {
    let grid = u.grid;
    let n = grid.n();
    let mut s = SpectralVelocity::from_physical(u);
    for j in 0..n {
        for i in 0..n {
            let m = mollifier_symbol(grid, i, j, eps);
            s.x[j * n + i] *= m;
            s.y[j * n + i] *= m;
        }
    }
    s.to_physical(u.divergence_free())
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub max_iter: usize,
    /// Stop once successive iterates differ by less than this in the
    /// discrete `L²(0,T;H¹)` norm.
    pub tol: f64,
    /// Weight of the new iterate: `u ← (1−θ)u + θΘ(u)`.
    pub relaxation: f64,
    pub nu: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            max_iter: 50,
            tol: 1e-8,
            relaxation: 1.0,
            nu: 1.0,
        }
    }
}

/// Fixed point of the regularized system with per-step energy terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun {
    pub times: Vec<f64>,
    /// `ũ(t_k)`.
    pub fluid: Vec<VelocityField>,
    /// Particles at `T`.
    pub particles: ParticleEnsemble,
    /// `‖Θ(u⁽ᵐ⁾) − u⁽ᵐ⁾‖` per iteration.
    pub history: Vec<f64>,
    /// `M₂f(t_k)`.
    pub m2: Vec<f64>,
    /// `‖ũ(t_k)‖₂²`.
    pub l2_sq: Vec<f64>,
    /// `‖∇ũ(t_k)‖₂²`.
    pub h1_sq: Vec<f64>,
    /// `∑_p w_p ∑_g W_g χ(v_p − u_g)·(v_p − u_g)` at `t_k`.
    pub drag: Vec<f64>,
    pub nu: f64,
    /// `‖u₀‖₂²` of the unscaled initial velocity.
    pub u0_l2_sq: f64,
}

impl SchemeRun {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

/// Truncated drag force `σ∑_p w_p W_g χ(v_p − u_g)/h²` and the dissipation
/// `∑_p w_p ∑_g W_g χ(v_p − u_g)·(v_p − u_g)`.
pub fn truncated_drag(p: &ParticleEnsemble, u: &VelocityField, r: f64, sigma: f64) -> (ForceField, f64) {
    let grid = u.grid;
    let len = grid.len();
    let partials: Vec<(Vec<f64>, Vec<f64>, f64)> = p
        .x
        .par_chunks(DEPOSIT_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut fx = vec![0.0; len];
            let mut fy = vec![0.0; len];
            let mut diss = 0.0;
            let base = c * DEPOSIT_CHUNK;
            for (k, &x) in chunk.iter().enumerate() {
                let w = p.w[base + k];
                let v = p.v[base + k];
                let s = CicStencil::new(grid, x);
                for q in 0..4 {
                    let g = s.nodes[q];
                    let z = [v[0] - u.x[g], v[1] - u.y[g]];
                    let c = chi(z, r);
                    let ww = w * s.weights[q];
                    fx[g] += ww * c[0];
                    fy[g] += ww * c[1];
                    diss += ww * (c[0] * z[0] + c[1] * z[1]);
                }
            }
            (fx, fy, diss)
        })
        .collect();
    let mut f = VectorField::zeros(grid);
    let mut diss = 0.0;
    for (px, py, d) in &partials {
        for k in 0..len {
            f.x[k] += px[k];
            f.y[k] += py[k];
        }
        diss += d;
    }
    let scale = sigma / grid.cell_area();
    for k in 0..len {
        f.x[k] *= scale;
        f.y[k] *= scale;
    }
    (ForceField { values: f }, diss)
}

/// Discrete `L²(0,T;L²)` distance (trapezoid in time).
pub fn distance_l2_l2(a: &[VelocityField], b: &[VelocityField], dt: f64) -> Result<f64> {
    distance(a, b, dt, false)
}

/// Discrete `L²(0,T;H¹)` distance (trapezoid in time).
pub fn distance_l2_h1(a: &[VelocityField], b: &[VelocityField], dt: f64) -> Result<f64> {
    distance(a, b, dt, true)
}

fn distance(a: &[VelocityField], b: &[VelocityField], dt: f64, h1: bool) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid(format!(
            "trajectories have {} and {} states",
            a.len(),
            b.len()
        )));
    }
    let sq: Vec<f64> = a
        .par_iter()
        .zip(b.par_iter())
        .map(|(x, y)| {
            let s = SpectralVelocity::from_physical(&x.sub(y)?);
            Ok(s.l2_sq() + if h1 { s.h1_seminorm_sq() } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    let last = sq.len() - 1;
    let total: f64 = sq
        .iter()
        .enumerate()
        .map(|(k, v)| if k == 0 || k == last { 0.5 * v } else { *v })
        .sum();
    Ok((total * dt).sqrt())
}

struct Sweep {
    fluid: Vec<VelocityField>,
    particles: ParticleEnsemble,
    m2: Vec<f64>,
    l2_sq: Vec<f64>,
    h1_sq: Vec<f64>,
    drag: Vec<f64>,
}

/// One application of the fixed-point map to the trajectory `u`.
fn sweep(
    u0: &VelocityField,
    f0: &ParticleEnsemble,
    u: &[VelocityField],
    params: &RegularizationParams,
    nu: f64,
    dt: f64,
) -> Result<Sweep> {
    let steps = u.len() - 1;
    let adv = Advection::Mollified {
        eps: params.eps_mollifier,
    };
    let law = DragLaw::Truncated { radius: params.r_chi };
    let mut state = NsState::new(u0.scaled(params.sigma), nu)?;
    let mut p = f0.clone();
    let mut out = Sweep {
        fluid: Vec::with_capacity(steps + 1),
        particles: f0.clone(),
        m2: Vec::with_capacity(steps + 1),
        l2_sq: Vec::with_capacity(steps + 1),
        h1_sq: Vec::with_capacity(steps + 1),
        drag: Vec::with_capacity(steps + 1),
    };
    let record = |out: &mut Sweep, state: &NsState, p: &ParticleEnsemble, diss: f64| -> Result<()> {
        let s = SpectralVelocity::from_physical(&state.u);
        out.l2_sq.push(s.l2_sq());
        out.h1_sq.push(s.h1_seminorm_sq());
        out.m2.push(moment(p, 2)?);
        out.drag.push(diss);
        out.fluid.push(state.u.clone());
        Ok(())
    };
    let (mut force, diss) = truncated_drag(&p, &u[0], params.r_chi, params.sigma);
    record(&mut out, &state, &p, diss)?;
    for k in 0..steps {
        state = ns_step_with(&state, &force, dt, adv).map_err(|e| e.at_step(k))?;
        p.advance(&u[k + 1], dt, PushScheme::Midpoint, law)
            .map_err(|e| e.at_step(k))?;
        let (f, diss) = truncated_drag(&p, &u[k + 1], params.r_chi, params.sigma);
        force = f;
        record(&mut out, &state, &p, diss)?;
    }
    out.particles = p;
    Ok(out)
}

/// Regularized Navier–Stokes without drag, the starting iterate.
fn undriven(u0: &VelocityField, params: &RegularizationParams, nu: f64, dt: f64, steps: usize) -> Result<Vec<VelocityField>> {
    let adv = Advection::Mollified {
        eps: params.eps_mollifier,
    };
    let zero = ForceField::zeros(u0.grid);
    let mut state = NsState::new(u0.scaled(params.sigma), nu)?;
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(state.u.clone());
    for k in 0..steps {
        state = ns_step_with(&state, &zero, dt, adv).map_err(|e| e.at_step(k))?;
        traj.push(state.u.clone());
    }
    Ok(traj)
}

/// Picard iteration of the regularized system on `[0, T]` from the
/// particle sample `f0`.
///
/// Fails with `NonConvergence`, carrying the residual history, when the
/// tolerance is not reached within `max_iter` applications of the map.
pub fn picard_iterate(
    u0: &VelocityField,
    f0: &ParticleEnsemble,
    params: &RegularizationParams,
    t_final: f64,
    dt: f64,
    opts: &PicardOptions,
) -> Result<SchemeRun> {
    params.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if !(opts.relaxation > 0.0 && opts.relaxation <= 1.0) {
        return Err(Error::invalid(format!("relaxation must lie in (0, 1], got {}", opts.relaxation)));
    }
    if opts.max_iter == 0 {
        return Err(Error::invalid("at least one iteration is required"));
    }
    let div = divergence_residual(u0);
    if div > DIVERGENCE_TOL {
        return Err(Error::invalid(format!("initial velocity is not divergence-free ({div:e})")));
    }
    let steps = step_count(t_final, dt)?;
    let grid: TorusGrid = u0.grid;
    let mut iterate = undriven(u0, params, opts.nu, dt, steps)?;
    let mut history = Vec::new();
    for _ in 0..opts.max_iter {
        let s = sweep(u0, f0, &iterate, params, opts.nu, dt)?;
        let residual = distance_l2_h1(&s.fluid, &iterate, dt)?;
        history.push(residual);
        if !residual.is_finite() {
            return Err(Error::NonConvergence { history });
        }
        if residual < opts.tol {
            let times = (0..=steps).map(|k| k as f64 * dt).collect();
            return Ok(SchemeRun {
                times,
                fluid: s.fluid,
                particles: s.particles,
                history,
                m2: s.m2,
                l2_sq: s.l2_sq,
                h1_sq: s.h1_sq,
                drag: s.drag,
                nu: opts.nu,
                u0_l2_sq: SpectralVelocity::from_physical(u0).l2_sq(),
            });
        }
        let theta = opts.relaxation;
        iterate = if theta == 1.0 {
            s.fluid
        } else {
            iterate
                .iter()
                .zip(&s.fluid)
                .map(|(old, new)| {
                    let x = old.x.iter().zip(&new.x).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
                    let y = old.y.iter().zip(&new.y).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
                    VelocityField::from_components(grid, x, y).with_flag(true)
                })
                .collect()
        };
    }
    Err(Error::NonConvergence { history })
}

/// Largest deviation over time of the energy identity
/// `(σ/2)M₂f(t) + ½‖ũ(t)‖₂² + ν∫‖∇ũ‖₂² + σ∫∑wWχ(v−u)·(v−u)
///  = (σ/2)M₂f⁰ + (σ²/2)‖u⁰‖₂²`, time integrals by the trapezoid rule.
pub fn scheme_energy_residual(run: &SchemeRun, params: &RegularizationParams) -> f64 {
    let sigma = params.sigma;
    let Some(&m2_0) = run.m2.first() else {
        return 0.0;
    };
    let rhs = 0.5 * sigma * m2_0 + 0.5 * sigma * sigma * run.u0_l2_sq;
    let rate = |k: usize| run.nu * run.h1_sq[k] + sigma * run.drag[k];
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    for k in 0..run.times.len() {
        if k > 0 {
            integral += 0.5 * (run.times[k] - run.times[k - 1]) * (rate(k - 1) + rate(k));
        }
        let lhs = 0.5 * sigma * run.m2[k] + 0.5 * run.l2_sq[k] + integral;
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}
