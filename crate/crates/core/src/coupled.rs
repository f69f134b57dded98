//! Time stepping of the coupled fluid–particle system by operator splitting.

use crate::diagnostics::{drag_dissipation, momentum_coupling, Observables};
use crate::error::{Error, Result};
use crate::grid::{MomentFields, VelocityField};
use crate::kernels::deposit;
use crate::ns::{drag_force, ns_step, NsState};
use crate::particles::{moment, DragLaw, ParticleEnsemble, PushScheme};
use crate::spectral::{divergence_residual, SpectralVelocity, DIVERGENCE_TOL};

/// How the fluid and particle sub-steps are composed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// Fluid step with the drag of the current particles, then particle step
    /// in the updated fluid.
    #[default]
    Split,
    /// Half-step predictors of both phases supply a midpoint drag and a
    /// midpoint fluid for the full step.
    Midpoint,
}

/// Numerical options of a coupled run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingOptions {
    pub nu: f64,
    pub coupling: Coupling,
    pub push: PushScheme,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        CouplingOptions {
            nu: 1.0,
            coupling: Coupling::Split,
            push: PushScheme::Midpoint,
        }
    }
}

/// Fluid, particles and the particle moments deposited at the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSystem {
    pub fluid: NsState,
    pub particles: ParticleEnsemble,
    pub moments: MomentFields,
    pub options: CouplingOptions,
}

impl CoupledSystem {
    pub fn new(u0: VelocityField, particles: ParticleEnsemble, options: CouplingOptions) -> Result<Self> {
        let div = divergence_residual(&u0);
        if div > DIVERGENCE_TOL {
            return Err(Error::invalid(format!("initial velocity is not divergence-free ({div:e})")));
        }
        let moments = deposit(&particles, u0.grid);
        Ok(CoupledSystem {
            fluid: NsState::new(u0, options.nu)?,
            particles,
            moments,
            options,
        })
    }

    pub fn t(&self) -> f64 {
        self.fluid.t
    }

    pub fn u(&self) -> &VelocityField {
        &self.fluid.u
    }

    /// Advances both phases by `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let grid = self.fluid.u.grid;
        let push = self.options.push;
        match self.options.coupling {
            Coupling::Split => {
                let force = drag_force(&self.moments, &self.fluid.u)?;
                let fluid = ns_step(&self.fluid, &force, dt)?;
                self.particles.advance(&fluid.u, dt, push, DragLaw::Linear)?;
                self.fluid = fluid;
            }
            Coupling::Midpoint => {
                let force = drag_force(&self.moments, &self.fluid.u)?;
                let half_fluid = ns_step(&self.fluid, &force, 0.5 * dt)?;
                let mut half_particles = self.particles.clone();
                half_particles.advance(&self.fluid.u, 0.5 * dt, push, DragLaw::Linear)?;
                let mid_force = drag_force(&deposit(&half_particles, grid), &half_fluid.u)?;
                let fluid = ns_step(&self.fluid, &mid_force, dt)?;
                self.particles.advance(&half_fluid.u, dt, push, DragLaw::Linear)?;
                self.fluid = fluid;
            }
        }
        // keep both clocks on the fluid's
        self.particles.t = self.fluid.t;
        self.moments = deposit(&self.particles, grid);
        Ok(())
    }

    /// Energies, dissipation rates and coupling at the current time.
    pub fn observables(&self) -> Observables {
        let u = &self.fluid.u;
        let spec = SpectralVelocity::from_physical(u);
        Observables {
            t: self.fluid.t,
            e_fluid: 0.5 * spec.l2_sq(),
            m2: moment(&self.particles, 2).unwrap_or(f64::NAN),
            visc_rate: self.fluid.nu * spec.h1_seminorm_sq(),
            drag_rate: drag_dissipation(&self.moments, u),
            u_inf: u.max_speed(),
            coupling: momentum_coupling(&self.moments, u),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{energy_balance, DiagnosticSeries};
    use crate::grid::make_grid;
    use crate::particles::{sample_f0, InitialFamily};
    use crate::spectral::leray_project;
    use std::f64::consts::PI;

    fn initial(n: usize) -> VelocityField {
        let g = make_grid(n).unwrap();
        leray_project(&VelocityField::from_fn(g, |p| {
            let (x, y) = (2.0 * PI * p[0], 2.0 * PI * p[1]);
            [0.5 * x.sin() * y.cos() + 0.25 * y.sin(), -0.5 * x.cos() * y.sin()]
        }))
        .unwrap()
    }

    fn residual(coupling: Coupling, dt: f64) -> f64 {
        let p = sample_f0(&InitialFamily::maxwellian(0.5), 4000, 3).unwrap();
        let opts = CouplingOptions {
            coupling,
            ..Default::default()
        };
        let mut sys = CoupledSystem::new(initial(16), p, opts).unwrap();
        let mut series = DiagnosticSeries::new();
        series.push(sys.observables(), None, None).unwrap();
        let steps = (0.2 / dt).round() as usize;
        for _ in 0..steps {
            sys.step(dt).unwrap();
            series.push(sys.observables(), None, None).unwrap();
        }
        energy_balance(&series)
    }

    #[test]
    fn at_rest_nothing_moves() {
        let g = make_grid(16).unwrap();
        let mut p = sample_f0(&InitialFamily::maxwellian(0.5), 100, 3).unwrap();
        for v in p.v.iter_mut() {
            *v = [0.0, 0.0];
        }
        let x0 = p.x.clone();
        let mut sys = CoupledSystem::new(VelocityField::zeros(g), p, CouplingOptions::default()).unwrap();
        for _ in 0..10 {
            sys.step(0.01).unwrap();
        }
        assert_eq!(sys.particles.x, x0);
        assert!(sys.fluid.u.x.iter().all(|&v| v == 0.0));
        let o = sys.observables();
        assert_eq!((o.e_fluid, o.m2, o.drag_rate), (0.0, 0.0, 0.0));
    }

    #[test]
    fn energy_residual_first_order_for_split() {
        let r1 = residual(Coupling::Split, 0.01);
        let r2 = residual(Coupling::Split, 0.005);
        assert!(r2 / r1 < 0.6, "{r1:e} {r2:e}");
    }

    fn final_state(coupling: Coupling, dt: f64) -> CoupledSystem {
        let p = sample_f0(&InitialFamily::maxwellian(0.5), 4000, 3).unwrap();
        let opts = CouplingOptions {
            coupling,
            ..Default::default()
        };
        let mut sys = CoupledSystem::new(initial(16), p, opts).unwrap();
        for _ in 0..(0.2 / dt).round() as usize {
            sys.step(dt).unwrap();
        }
        sys
    }

    fn velocity_error(a: &CoupledSystem, b: &CoupledSystem) -> f64 {
        a.particles
            .v
            .iter()
            .zip(&b.particles.v)
            .map(|(p, q)| (p[0] - q[0]).abs().max((p[1] - q[1]).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn midpoint_coupling_is_second_order_in_particles() {
        let reference = final_state(Coupling::Midpoint, 0.2 / 512.0);
        let split = [32.0, 64.0].map(|k| velocity_error(&final_state(Coupling::Split, 0.2 / k), &reference));
        let mid = [32.0, 64.0].map(|k| velocity_error(&final_state(Coupling::Midpoint, 0.2 / k), &reference));
        assert!(split[0] / split[1] > 1.6 && split[0] / split[1] < 2.6, "{split:?}");
        assert!(mid[0] / mid[1] > 3.0, "{mid:?}");
        assert!(mid[1] < split[1]);
    }

    #[test]
    fn momentum_is_conserved_without_mean_forcing() {
        // total momentum ∫u + ∑w v is invariant: drag exchanges it, the
        // nonlinearity and viscosity leave the mean mode untouched
        let p = sample_f0(&InitialFamily::maxwellian(0.5), 2000, 8).unwrap();
        let mut sys = CoupledSystem::new(initial(16), p, CouplingOptions::default()).unwrap();
        let total = |s: &CoupledSystem| {
            let g = s.fluid.u.grid;
            let fx: f64 = s.fluid.u.x.iter().sum::<f64>() * g.cell_area();
            let px: f64 = s.particles.w.iter().zip(&s.particles.v).map(|(w, v)| w * v[0]).sum();
            fx + px
        };
        let before = total(&sys);
        for _ in 0..20 {
            sys.step(0.01).unwrap();
        }
        // splitting error: fluid uses step-start moments, particles the new fluid
        assert!((total(&sys) - before).abs() < 5e-3, "{}", total(&sys) - before);
    }
}
