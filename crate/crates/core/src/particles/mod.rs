//! Weighted particle representation of the kinetic density.

mod admissibility;
mod family;
mod push;

pub use admissibility::admissibility_gamma;
pub use family::{
    power_tail_constant, sample_f0, DensityProfile, InitialFamily, ProfileMode, VelocityLaw,
    PROFILE_SUP_GRID,
};
pub use push::{push_particles, DragLaw, PushScheme};

use crate::error::{Error, Result};
use crate::grid::{wrap_point, Vec2};

/// Particles `(x_p, v_p)` with constant weights `w_p`. The initial
/// coordinates `(x0_p, v0_p)` are kept so that `f` can be evaluated along
/// characteristics and twin ensembles can be paired.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub x: Vec<Vec2>,
    pub v: Vec<Vec2>,
    pub w: Vec<f64>,
    pub x0: Vec<Vec2>,
    pub v0: Vec<Vec2>,
    pub t: f64,
}

impl ParticleEnsemble {
    /// Builds an ensemble at `t = 0` with `x0 = x`, `v0 = v`; positions are
    /// wrapped into the unit torus.
    pub fn new(x: Vec<Vec2>, v: Vec<Vec2>, w: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("ensemble needs at least one particle"));
        }
        if x.len() != v.len() || x.len() != w.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} positions, {} velocities, {} weights",
                x.len(),
                v.len(),
                w.len()
            )));
        }
        if w.iter().any(|&wp| !(wp >= 0.0 && wp.is_finite())) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        if x.iter().chain(v.iter()).any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::invalid("particle coordinates must be finite"));
        }
        let x: Vec<Vec2> = x.into_iter().map(wrap_point).collect();
        Ok(ParticleEnsemble {
            x0: x.clone(),
            v0: v.clone(),
            x,
            v,
            w,
            t: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.w.iter().sum()
    }
}

/// `∑ w_p |v_p|^k` for `k ∈ {0, 1, 2}`.
pub fn moment(p: &ParticleEnsemble, k: u32) -> Result<f64> {
    let s = match k {
        0 => p.w.iter().sum(),
        1 => p.w.iter().zip(&p.v).map(|(w, v)| w * v[0].hypot(v[1])).sum(),
        2 => p.w.iter().zip(&p.v).map(|(w, v)| w * (v[0] * v[0] + v[1] * v[1])).sum(),
        _ => return Err(Error::invalid(format!("moment order must be 0, 1 or 2, got {k}"))),
    };
    Ok(s)
}

/// `e^{2t} f₀(x0_p, v0_p)` per particle. The caller guarantees `fam` is the
/// family the ensemble was sampled from.
pub fn f_along_trajectory(p: &ParticleEnsemble, fam: &InitialFamily) -> Vec<f64> {
    let growth = (2.0 * p.t).exp();
    p.x0.iter()
        .zip(&p.v0)
        .map(|(&x, &v)| growth * fam.f0(x, v))
        .collect()
}
