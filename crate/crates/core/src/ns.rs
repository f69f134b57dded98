//! Pseudo-spectral incompressible Navier–Stokes on the torus with an explicit
//! body force.
//!
//! One step is Heun's method in the integrating-factor variable
//! `e^{ν|2πk|²t} û`: the viscous decay is exact, the advection and force
//! are second order. Products are formed on the grid and the full right-hand
//! side is filtered by the 2/3 rule and projected, so the velocity stays
//! band-limited and divergence-free.

use crate::error::{Error, Result};
use crate::grid::{MomentFields, TorusGrid, VectorField, VelocityField};
use crate::spectral::{
    derivative_wavevector, divergence_residual, forward, inverse_real, wavenumber_sq, Complex,
    SpectralVelocity, DIVERGENCE_TOL,
};

/// Regularizer of the CFL bound `h / (4‖u‖∞ + ε)`.
pub const CFL_EPS: f64 = 1e-12;

/// Fluid state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct NsState {
    pub t: f64,
    pub u: VelocityField,
    pub nu: f64,
}

impl NsState {
    pub fn new(u: VelocityField, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::invalid(format!("viscosity must be positive, got {nu}")));
        }
        Ok(NsState { t: 0.0, u, nu })
    }
}

/// Body force acting on the fluid, sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    pub values: VectorField,
}

impl ForceField {
    pub fn zeros(grid: TorusGrid) -> Self {
        ForceField {
            values: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.values.grid
    }
}

/// Pointwise drag `j − ρu`.
pub fn drag_force(m: &MomentFields, u: &VelocityField) -> Result<ForceField> {
    m.grid().check_same(&u.grid)?;
    let grid = u.grid;
    let mut f = VectorField::zeros(grid);
    for k in 0..grid.len() {
        let rho = m.rho.values[k];
        f.x[k] = m.j.x[k] - rho * u.x[k];
        f.y[k] = m.j.y[k] - rho * u.y[k];
    }
    if !f.is_finite() {
        return Err(Error::invalid("drag force is not finite"));
    }
    Ok(ForceField { values: f })
}

/// Largest time step accepted by [`ns_step`] for the field `u`.
pub fn admissible_dt(u: &VelocityField) -> f64 {
    u.grid.h() / (4.0 * u.max_speed() + CFL_EPS)
}

/// Velocity field transporting momentum in the advection term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Advection {
    /// `(u·∇)u`.
    #[default]
    Full,
    /// `(u⋆φ_ε·∇)u` with the Gaussian symbol `e^{−ε²|2πk|²/2}`.
    Mollified { eps: f64 },
}

/// Gaussian low-pass symbol of width `1/eps` at bin `(i, j)`.
pub fn mollifier_symbol(grid: TorusGrid, i: usize, j: usize, eps: f64) -> f64 {
    (-0.5 * eps * eps * wavenumber_sq(grid, i, j)).exp()
}

fn spectral_derivatives(grid: TorusGrid, s: &[Complex]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n();
    let mut dx = vec![Complex::default(); s.len()];
    let mut dy = vec![Complex::default(); s.len()];
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            let [kx, ky] = derivative_wavevector(grid, i, j);
            dx[idx] = s[idx] * Complex::new(0.0, kx);
            dy[idx] = s[idx] * Complex::new(0.0, ky);
        }
    }
    (inverse_real(grid, &dx), inverse_real(grid, &dy))
}

/// `P·D(−(a·∇)u + F)` in spectral form.
fn rhs(u: &SpectralVelocity, force: &SpectralVelocity, adv: Advection) -> SpectralVelocity {
    let grid = u.grid;
    let n = grid.n();
    let (ax, ay) = match adv {
        Advection::Full => (inverse_real(grid, &u.x), inverse_real(grid, &u.y)),
        Advection::Mollified { eps } => {
            let mut mx = u.x.clone();
            let mut my = u.y.clone();
            for j in 0..n {
                for i in 0..n {
                    let s = mollifier_symbol(grid, i, j, eps);
                    mx[j * n + i] *= s;
                    my[j * n + i] *= s;
                }
            }
            (inverse_real(grid, &mx), inverse_real(grid, &my))
        }
    };
    let (uxx, uxy) = spectral_derivatives(grid, &u.x);
    let (uyx, uyy) = spectral_derivatives(grid, &u.y);
    let mut nx = vec![0.0; grid.len()];
    let mut ny = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        nx[k] = -(ax[k] * uxx[k] + ay[k] * uxy[k]);
        ny[k] = -(ax[k] * uyx[k] + ay[k] * uyy[k]);
    }
    let mut out = SpectralVelocity {
        grid,
        x: forward(grid, &nx),
        y: forward(grid, &ny),
    };
    for k in 0..grid.len() {
        out.x[k] += force.x[k];
        out.y[k] += force.y[k];
    }
    out.dealias();
    out.project();
    out
}

/// One step with a selectable advecting field.
pub fn ns_step_with(s: &NsState, f: &ForceField, dt: f64, adv: Advection) -> Result<NsState> {
    let grid = s.u.grid;
    grid.check_same(&f.grid())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let limit = admissible_dt(&s.u);
    if dt > limit {
        return Err(Error::StepRejected {
            dt,
            admissible_dt: limit,
        });
    }
    let n = grid.n();
    let decay: Vec<f64> = (0..grid.len())
        .map(|idx| (-s.nu * wavenumber_sq(grid, idx % n, idx / n) * dt).exp())
        .collect();
    let u0 = SpectralVelocity::from_physical(&s.u);
    let force = SpectralVelocity::from_vector(&f.values);

    let n0 = rhs(&u0, &force, adv);
    let mut u1 = u0.clone();
    for k in 0..grid.len() {
        u1.x[k] = decay[k] * (u0.x[k] + n0.x[k] * dt);
        u1.y[k] = decay[k] * (u0.y[k] + n0.y[k] * dt);
    }
    let n1 = rhs(&u1, &force, adv);
    let half = 0.5 * dt;
    let mut next = u0;
    for k in 0..grid.len() {
        next.x[k] = decay[k] * (next.x[k] + n0.x[k] * half) + n1.x[k] * half;
        next.y[k] = decay[k] * (next.y[k] + n0.y[k] * half) + n1.y[k] * half;
    }
    next.project();
    let u = next.to_physical(true);
    if !u.is_finite() {
        return Err(Error::Diverged("velocity became non-finite".into()));
    }
    Ok(NsState {
        t: s.t + dt,
        u,
        nu: s.nu,
    })
}

/// One Navier–Stokes step of length `dt` with the force held fixed.
pub fn ns_step(s: &NsState, f: &ForceField, dt: f64) -> Result<NsState> {
    ns_step_with(s, f, dt, Advection::Full)
}

/// Number of steps of size `dt` covering `[0, T]`; `T` must be a multiple of
/// `dt` up to rounding.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::invalid(format!("final time must be nonnegative, got {t_final}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let steps = (t_final / dt).round();
    if (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::invalid(format!("T = {t_final} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

/// Recorded fluid trajectory with per-state norms.
#[derive(Debug, Clone, PartialEq)]
pub struct NsTrajectory {
    pub states: Vec<NsState>,
    /// `‖u‖₂` per state.
    pub l2: Vec<f64>,
    /// `‖∇u‖₂` per state.
    pub h1: Vec<f64>,
    /// `‖u‖∞` per state.
    pub u_inf: Vec<f64>,
}

impl NsTrajectory {
    fn push(&mut self, s: NsState) {
        let spec = SpectralVelocity::from_physical(&s.u);
        self.l2.push(spec.l2_sq().sqrt());
        self.h1.push(spec.h1_seminorm_sq().sqrt());
        self.u_inf.push(s.u.max_speed());
        self.states.push(s);
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

/// Integrates from `u0` to `T` calling `force_provider` at the start of each
/// step.
pub fn run_ns<F>(u0: &VelocityField, nu: f64, mut force_provider: F, t_final: f64, dt: f64) -> Result<NsTrajectory>
where
    F: FnMut(&NsState) -> Result<ForceField>,
{
    let div = divergence_residual(u0);
    if div > DIVERGENCE_TOL {
        return Err(Error::invalid(format!("initial velocity is not divergence-free ({div:e})")));
    }
    let steps = step_count(t_final, dt)?;
    let mut traj = NsTrajectory {
        states: Vec::with_capacity(steps + 1),
        l2: Vec::with_capacity(steps + 1),
        h1: Vec::with_capacity(steps + 1),
        u_inf: Vec::with_capacity(steps + 1),
    };
    let mut state = NsState::new(u0.clone(), nu)?;
    for step in 0..steps {
        let f = force_provider(&state).map_err(|e| e.at_step(step))?;
        let next = ns_step(&state, &f, dt).map_err(|e| e.at_step(step))?;
        traj.push(std::mem::replace(&mut state, next));
    }
    traj.push(state);
    Ok(traj)
}
