//! Characteristics `Ẋ = V`, `V̇ = a(X, V)` integrated exactly in the drag
//! with the fluid frozen over a step.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{wrap_point, Vec2, VelocityField};
use crate::kernels::CicStencil;

use super::ParticleEnsemble;

/// Where the frozen fluid velocity is sampled during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PushScheme {
    /// At the particle's start-of-step position.
    StartPoint,
    /// At the half-step predicted position.
    #[default]
    Midpoint,
}

/// Acceleration law.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DragLaw {
    /// `a = u(X) − V`.
    #[default]
    Linear,
    /// `a = ∑_g W_g χ(u_g − V)` with the radial clamp `χ(z) = z·min(1, R/|z|)`.
    Truncated { radius: f64 },
}

/// Relaxation rate `Λ` and target velocity `U` such that the acceleration
/// reads `Λ (U − V)`.
#[inline]
fn relaxation(u: &VelocityField, x: Vec2, v: Vec2, law: DragLaw) -> (f64, Vec2) {
    let s = CicStencil::new(u.grid, x);
    match law {
        DragLaw::Linear => (1.0, [s.interpolate(&u.x), s.interpolate(&u.y)]),
        DragLaw::Truncated { radius } => {
            let mut rate = 0.0;
            let mut target = [0.0, 0.0];
            for q in 0..4 {
                let g = s.nodes[q];
                let ug = [u.x[g], u.y[g]];
                let (dx, dy) = (ug[0] - v[0], ug[1] - v[1]);
                let d2 = dx * dx + dy * dy;
                let lam = if d2 > radius * radius { radius / d2.sqrt() } else { 1.0 };
                let wl = s.weights[q] * lam;
                rate += wl;
                target[0] += wl * ug[0];
                target[1] += wl * ug[1];
            }
            (rate, [target[0] / rate, target[1] / rate])
        }
    }
}

/// Exact solution over `dt` of `Ẋ = V`, `V̇ = Λ(U − V)` with `Λ`, `U` fixed.
#[inline]
fn exact_step(x: Vec2, v: Vec2, rate: f64, target: Vec2, dt: f64) -> (Vec2, Vec2) {
    let em1 = (-rate * dt).exp_m1();
    let decay = 1.0 + em1;
    // ∫₀^dt e^{-Λs} ds
    let travel = -em1 / rate;
    let drift = dt - travel;
    let mut xn = [0.0; 2];
    let mut vn = [0.0; 2];
    for c in 0..2 {
        vn[c] = target[c] + (v[c] - target[c]) * decay;
        xn[c] = x[c] + v[c] * travel + target[c] * drift;
    }
    (xn, vn)
}

#[inline]
fn step_one(u: &VelocityField, x: Vec2, v: Vec2, dt: f64, scheme: PushScheme, law: DragLaw) -> (Vec2, Vec2) {
    let (rate, target) = relaxation(u, x, v, law);
    let (rate, target) = match scheme {
        PushScheme::StartPoint => (rate, target),
        PushScheme::Midpoint => {
            let (xh, vh) = exact_step(x, v, rate, target, 0.5 * dt);
            relaxation(u, wrap_point(xh), vh, law)
        }
    };
    let (xn, vn) = exact_step(x, v, rate, target, dt);
    (wrap_point(xn), vn)
}

impl ParticleEnsemble {
    /// Advances every particle by `dt` under the frozen field `u`.
    pub fn advance(&mut self, u: &VelocityField, dt: f64, scheme: PushScheme, law: DragLaw) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if let DragLaw::Truncated { radius } = law {
            if !(radius > 0.0) {
                return Err(Error::invalid("truncation radius must be positive"));
            }
        }
        self.x
            .par_iter_mut()
            .zip(self.v.par_iter_mut())
            .for_each(|(x, v)| {
                let (xn, vn) = step_one(u, *x, *v, dt, scheme, law);
                *x = xn;
                *v = vn;
            });
        self.t += dt;
        Ok(())
    }
}

/// One step of the linear-drag characteristics with `u` frozen at each
/// particle's start position.
pub fn push_particles(p: &ParticleEnsemble, u: &VelocityField, dt: f64) -> Result<ParticleEnsemble> {
    let mut out = p.clone();
    out.advance(u, dt, PushScheme::StartPoint, DragLaw::Linear)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, periodic_delta};
    use crate::kernels::interpolate_velocity;
    use std::f64::consts::PI;

    fn ensemble() -> ParticleEnsemble {
        ParticleEnsemble::new(
            vec![[0.1, 0.2], [0.7, 0.4], [0.33, 0.91]],
            vec![[1.5, -0.5], [-2.0, 0.25], [0.0, 3.0]],
            vec![0.5, 0.25, 0.25],
        )
        .unwrap()
    }

    #[test]
    fn free_streaming_with_drag_closed_form() {
        let g = make_grid(16).unwrap();
        let u = VelocityField::zeros(g);
        let mut p = ensemble();
        let dt = 1e-3;
        for _ in 0..1000 {
            p = push_particles(&p, &u, dt).unwrap();
        }
        let t: f64 = 1.0;
        for k in 0..p.len() {
            let v0 = p.v0[k];
            for c in 0..2 {
                let ve = v0[c] * (-t).exp();
                assert!((p.v[k][c] - ve).abs() <= 1e-12 * ve.abs().max(1e-300));
                let disp = v0[c] * -(-t).exp_m1();
                let err = periodic_delta(p.x[k][c], p.x0[k][c] + disp);
                assert!(err.abs() <= 1e-12 * disp.abs().max(1.0), "{err}");
            }
        }
        assert!((p.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_field_relaxation() {
        let g = make_grid(8).unwrap();
        let c = [0.3, -0.7];
        let u = VelocityField::constant(g, c);
        let mut p = ensemble();
        for _ in 0..200 {
            p.advance(&u, 5e-3, PushScheme::Midpoint, DragLaw::Linear).unwrap();
        }
        for k in 0..p.len() {
            for d in 0..2 {
                let ve = c[d] + (p.v0[k][d] - c[d]) * (-1.0f64).exp();
                assert!((p.v[k][d] - ve).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn weights_unchanged_and_positions_wrapped() {
        let g = make_grid(8).unwrap();
        let u = VelocityField::constant(g, [5.0, -5.0]);
        let p = ensemble();
        let q = push_particles(&p, &u, 0.5).unwrap();
        assert_eq!(p.w, q.w);
        for x in &q.x {
            assert!((0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1]));
        }
        assert!(push_particles(&p, &u, 0.0).is_err());
    }

    fn rk4_reference(u: &VelocityField, x: Vec2, v: Vec2, t: f64, steps: usize) -> (Vec2, Vec2) {
        let dt = t / steps as f64;
        let rhs = |x: Vec2, v: Vec2| {
            let uu = interpolate_velocity(u, wrap_point(x));
            ([v[0], v[1]], [uu[0] - v[0], uu[1] - v[1]])
        };
        let (mut x, mut v) = (x, v);
        let add = |a: Vec2, b: Vec2, s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
        for _ in 0..steps {
            let (k1x, k1v) = rhs(x, v);
            let (k2x, k2v) = rhs(add(x, k1x, dt / 2.0), add(v, k1v, dt / 2.0));
            let (k3x, k3v) = rhs(add(x, k2x, dt / 2.0), add(v, k2v, dt / 2.0));
            let (k4x, k4v) = rhs(add(x, k3x, dt), add(v, k3v, dt));
            for c in 0..2 {
                x[c] += dt / 6.0 * (k1x[c] + 2.0 * k2x[c] + 2.0 * k3x[c] + k4x[c]);
                v[c] += dt / 6.0 * (k1v[c] + 2.0 * k2v[c] + 2.0 * k3v[c] + k4v[c]);
            }
        }
        (x, v)
    }

    fn global_error(u: &VelocityField, dt: f64, scheme: PushScheme) -> f64 {
        let p0 = ParticleEnsemble::new(vec![[0.23, 0.61]], vec![[0.4, -0.3]], vec![1.0]).unwrap();
        let t = 0.5;
        let steps = (t / dt).round() as usize;
        let mut p = p0.clone();
        for _ in 0..steps {
            p.advance(u, dt, scheme, DragLaw::Linear).unwrap();
        }
        let (xr, vr) = rk4_reference(u, p0.x[0], p0.v[0], t, steps * 100);
        let xr = wrap_point(xr);
        let mut e: f64 = 0.0;
        for c in 0..2 {
            e = e.max(periodic_delta(p.x[0][c], xr[c]).abs());
            e = e.max((p.v[0][c] - vr[c]).abs());
        }
        e
    }

    #[test]
    fn smooth_field_convergence_orders() {
        let g = make_grid(128).unwrap();
        let u = VelocityField::from_fn(g, |p| {
            [(2.0 * PI * p[1]).sin() + 0.3, 0.8 * (2.0 * PI * p[0]).cos()]
        });
        let mid = [global_error(&u, 0.02, PushScheme::Midpoint), global_error(&u, 0.01, PushScheme::Midpoint)];
        let start = [
            global_error(&u, 0.02, PushScheme::StartPoint),
            global_error(&u, 0.01, PushScheme::StartPoint),
        ];
        let mid_order = (mid[0] / mid[1]).log2();
        let start_order = (start[0] / start[1]).log2();
        assert!(mid_order > 1.8, "midpoint order {mid_order} ({mid:?})");
        assert!(start_order > 0.85 && start_order < 1.3, "start-point order {start_order}");
        assert!(mid[1] < start[1]);
    }

    #[test]
    fn truncated_law_reduces_to_linear_for_large_radius() {
        let g = make_grid(16).unwrap();
        let u = VelocityField::from_fn(g, |p| [(2.0 * PI * p[1]).sin(), (2.0 * PI * p[0]).cos()]);
        let mut a = ensemble();
        let mut b = ensemble();
        a.advance(&u, 0.01, PushScheme::Midpoint, DragLaw::Linear).unwrap();
        b.advance(&u, 0.01, PushScheme::Midpoint, DragLaw::Truncated { radius: 1e6 }).unwrap();
        for k in 0..a.len() {
            for c in 0..2 {
                assert!((a.x[k][c] - b.x[k][c]).abs() < 1e-15);
                assert!((a.v[k][c] - b.v[k][c]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn truncated_acceleration_is_bounded_by_radius() {
        // |Λ(U − V)| = |∑ W χ(u_g − V)| ≤ R, so |Δv| ≤ R·dt.
        let g = make_grid(8).unwrap();
        let u = VelocityField::constant(g, [0.0, 0.0]);
        let mut p = ParticleEnsemble::new(vec![[0.5, 0.5]], vec![[10.0, 0.0]], vec![1.0]).unwrap();
        let r = 0.5;
        p.advance(&u, 0.1, PushScheme::StartPoint, DragLaw::Truncated { radius: r }).unwrap();
        let dv = 10.0 - p.v[0][0];
        // rate R/|v| = 0.05, exact: v' = 10 e^{-0.005}
        assert!((p.v[0][0] - 10.0 * (-0.005f64).exp()).abs() < 1e-13);
        assert!(dv <= r * 0.1 + 1e-15);
    }
}
