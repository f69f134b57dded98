//! Initial distribution families `f₀(x, v) = mass · A(x) · φ(v)` and their
//! Monte Carlo sampling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Vec2;

use super::ParticleEnsemble;

/// Resolution of the grid on which the density profile's maximum is taken.
pub const PROFILE_SUP_GRID: usize = 256;

/// One cosine mode `a·cos(2π(k·x) + phase)` of the spatial density profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileMode {
    pub k: [i32; 2],
    pub amplitude: f64,
    pub phase: f64,
}

/// Band-limited density profile `A(x) = 1 + ∑ modes`, mean one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensityProfile {
    pub modes: Vec<ProfileMode>,
}

impl DensityProfile {
    pub fn uniform() -> Self {
        DensityProfile::default()
    }

    pub fn single(k: [i32; 2], amplitude: f64) -> Self {
        DensityProfile {
            modes: vec![ProfileMode {
                k,
                amplitude,
                phase: 0.0,
            }],
        }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        1.0 + self
            .modes
            .iter()
            .map(|m| {
                m.amplitude
                    * (2.0 * PI * (m.k[0] as f64 * x[0] + m.k[1] as f64 * x[1]) + m.phase).cos()
            })
            .sum::<f64>()
    }

    /// `1 + ∑|a|`, an upper bound used for rejection sampling.
    pub fn bound(&self) -> f64 {
        1.0 + self.modes.iter().map(|m| m.amplitude.abs()).sum::<f64>()
    }

    /// Maximum of `A` over a `PROFILE_SUP_GRID²` lattice.
    pub fn grid_max(&self) -> f64 {
        if self.modes.is_empty() {
            return 1.0;
        }
        let m = PROFILE_SUP_GRID;
        let h = 1.0 / m as f64;
        let mut best = f64::NEG_INFINITY;
        for j in 0..m {
            for i in 0..m {
                best = best.max(self.eval([i as f64 * h, j as f64 * h]));
            }
        }
        best
    }

    fn validate(&self) -> Result<()> {
        if self.modes.iter().any(|m| m.k == [0, 0]) {
            return Err(Error::invalid("profile modes must have nonzero wavevector"));
        }
        if self.modes.iter().any(|m| !m.amplitude.is_finite() || !m.phase.is_finite()) {
            return Err(Error::invalid("profile parameters must be finite"));
        }
        if self.bound() - 1.0 > 1.0 {
            return Err(Error::invalid(
                "profile amplitudes must satisfy sum |a| <= 1 to keep A >= 0",
            ));
        }
        Ok(())
    }
}

/// Velocity part `φ(v)` of the initial datum, normalized to unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityLaw {
    /// Isotropic Gaussian with per-component standard deviation `sigma`.
    Maxwellian { sigma: f64 },
    /// `c_q / (1 + |v|^q)`.
    PowerTail { q: f64 },
    /// Uniform on the square `[-b, b]²`.
    UniformBox { half_width: f64 },
}

impl VelocityLaw {
    pub fn density(&self, v: Vec2) -> f64 {
        let r2 = v[0] * v[0] + v[1] * v[1];
        match *self {
            VelocityLaw::Maxwellian { sigma } => {
                (-r2 / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma)
            }
            VelocityLaw::PowerTail { q } => power_tail_constant(q) / (1.0 + r2.sqrt().powf(q)),
            VelocityLaw::UniformBox { half_width: b } => {
                if v[0].abs() <= b && v[1].abs() <= b {
                    1.0 / (4.0 * b * b)
                } else {
                    0.0
                }
            }
        }
    }

    /// `sup φ`.
    pub fn peak(&self) -> f64 {
        match *self {
            VelocityLaw::Maxwellian { sigma } => 1.0 / (2.0 * PI * sigma * sigma),
            VelocityLaw::PowerTail { q } => power_tail_constant(q),
            VelocityLaw::UniformBox { half_width: b } => 1.0 / (4.0 * b * b),
        }
    }

    /// Analytic `∫ |v|² φ dv`; infinite for power tails with `q ≤ 4`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            VelocityLaw::Maxwellian { sigma } => 2.0 * sigma * sigma,
            VelocityLaw::PowerTail { q } => {
                if q <= 4.0 {
                    f64::INFINITY
                } else {
                    (2.0 * PI / q).sin() / (4.0 * PI / q).sin()
                }
            }
            VelocityLaw::UniformBox { half_width: b } => 2.0 * b * b / 3.0,
        }
    }
}

/// Normalization `c_q` making `c_q/(1+|v|^q)` a probability density on ℝ².
pub fn power_tail_constant(q: f64) -> f64 {
    q * (2.0 * PI / q).sin() / (2.0 * PI * PI)
}

/// An initial datum family.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialFamily {
    pub law: VelocityLaw,
    pub profile: DensityProfile,
    /// Total mass `‖f₀‖₁`.
    pub mass: f64,
}

impl InitialFamily {
    pub fn maxwellian(sigma: f64) -> Self {
        InitialFamily {
            law: VelocityLaw::Maxwellian { sigma },
            profile: DensityProfile::uniform(),
            mass: 1.0,
        }
    }

    pub fn power_tail(q: f64) -> Self {
        InitialFamily {
            law: VelocityLaw::PowerTail { q },
            profile: DensityProfile::uniform(),
            mass: 1.0,
        }
    }

    pub fn uniform_box(half_width: f64) -> Self {
        InitialFamily {
            law: VelocityLaw::UniformBox { half_width },
            profile: DensityProfile::uniform(),
            mass: 1.0,
        }
    }

    pub fn with_profile(mut self, profile: DensityProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    /// Checks that the family defines a nonnegative datum with finite mass
    /// (power tails need `q > 2`).
    pub fn check_normalizable(&self) -> Result<()> {
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("mass must be finite and nonnegative"));
        }
        match self.law {
            VelocityLaw::Maxwellian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                return Err(Error::invalid("maxwellian sigma must be positive"))
            }
            VelocityLaw::PowerTail { q } if !(q > 2.0 && q.is_finite()) => {
                return Err(Error::invalid("power-tail exponent must exceed 2"))
            }
            VelocityLaw::UniformBox { half_width } if !(half_width > 0.0 && half_width.is_finite()) => {
                return Err(Error::invalid("box half-width must be positive"))
            }
            _ => {}
        }
        self.profile.validate()
    }

    /// Full admissibility of the family as an initial datum: finite mass and
    /// finite second moment (power tails need `q > 4`).
    pub fn validate(&self) -> Result<()> {
        self.check_normalizable()?;
        if let VelocityLaw::PowerTail { q } = self.law {
            if q <= 4.0 {
                return Err(Error::invalid(format!(
                    "power-tail exponent must exceed 4 for a finite second moment, got {q}"
                )));
            }
        }
        Ok(())
    }

    /// `f₀(x, v)`.
    pub fn f0(&self, x: Vec2, v: Vec2) -> f64 {
        self.mass * self.profile.eval(x) * self.law.density(v)
    }

    /// `sup_{x,v} f₀` with the profile maximum taken on a lattice.
    pub fn sup(&self) -> f64 {
        self.mass * self.profile.grid_max() * self.law.peak()
    }
}

fn sample_position(profile: &DensityProfile, rng: &mut ChaCha8Rng) -> Vec2 {
    let bound = profile.bound();
    loop {
        let x = [rng.random::<f64>(), rng.random::<f64>()];
        if profile.modes.is_empty() || rng.random::<f64>() * bound <= profile.eval(x) {
            return x;
        }
    }
}

/// Radius with density `∝ r/(1+r^q)`: rejection from the envelope `r` on
/// `[0,1]`, `r^{1-q}` beyond, each piece sampled by inversion.
fn sample_power_tail_radius(q: f64, rng: &mut ChaCha8Rng) -> f64 {
    let inner = 0.5;
    let outer = 1.0 / (q - 2.0);
    loop {
        let r = if rng.random::<f64>() * (inner + outer) < inner {
            rng.random::<f64>().sqrt()
        } else {
            // survival (r^{2-q}) on (1, ∞)
            let u: f64 = 1.0 - rng.random::<f64>();
            u.powf(-1.0 / (q - 2.0))
        };
        let accept = r.powf(q).max(1.0) / (1.0 + r.powf(q));
        if rng.random::<f64>() <= accept {
            return r;
        }
    }
}

fn sample_velocity(law: &VelocityLaw, rng: &mut ChaCha8Rng) -> Vec2 {
    match *law {
        VelocityLaw::Maxwellian { sigma } => {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            [sigma * a, sigma * b]
        }
        VelocityLaw::PowerTail { q } => {
            let r = sample_power_tail_radius(q, rng);
            let th = 2.0 * PI * rng.random::<f64>();
            [r * th.cos(), r * th.sin()]
        }
        VelocityLaw::UniformBox { half_width: b } => [
            b * (2.0 * rng.random::<f64>() - 1.0),
            b * (2.0 * rng.random::<f64>() - 1.0),
        ],
    }
}

/// Draws `n` equal-weight samples of `fam`; deterministic in `seed`.
pub fn sample_f0(fam: &InitialFamily, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    if n == 0 {
        return Err(Error::invalid("need at least one particle"));
    }
    fam.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        x.push(sample_position(&fam.profile, &mut rng));
        v.push(sample_velocity(&fam.law, &mut rng));
    }
    ParticleEnsemble::new(x, v, vec![fam.mass / n as f64; n])
}
