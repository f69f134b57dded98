//! The admissibility functional
//! `sup_{t≤T} ∫ (1+|v|²) sup_{x, |v'−e^t v|≤R} f₀(x, v') dv`.
//!
//! For radially decreasing laws the inner sup is `g((e^t|v| − R)₊)`; after
//! the substitution `s = e^t|v|` the integral splits into the flat core
//! `s ≤ R` and the half-line moments `μ_m = ∫₀^∞ ρ^m g(ρ) dρ`, `m ≤ 3`, which
//! are known in closed form. The box law reduces to polynomial integrals
//! over the box dilated by a disc of radius `R`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::family::{power_tail_constant, InitialFamily, VelocityLaw};

/// Number of sub-intervals of `[0, T]` on which the sup over time is taken.
const TIME_SAMPLES: usize = 64;

fn half_line_moments(law: &VelocityLaw) -> Result<[f64; 4]> {
    match *law {
        VelocityLaw::Maxwellian { sigma } => {
            let norm = 1.0 / (2.0 * PI * sigma * sigma);
            let half_gauss = (PI / 2.0).sqrt();
            Ok([
                norm * sigma * half_gauss,
                norm * sigma * sigma,
                norm * sigma.powi(3) * half_gauss,
                norm * 2.0 * sigma.powi(4),
            ])
        }
        VelocityLaw::PowerTail { q } => {
            if q <= 4.0 {
                return Err(Error::Diverged(format!(
                    "(1+|v|²)/(1+|v|^{q}) is not integrable in two dimensions"
                )));
            }
            let c = power_tail_constant(q);
            Ok(std::array::from_fn(|m| {
                c * (PI / q) / ((m as f64 + 1.0) * PI / q).sin()
            }))
        }
        VelocityLaw::UniformBox { .. } => unreachable!("box law is not radial"),
    }
}

/// `∫ (1+|v|²) sup_{|v'−e^t v|≤R} φ(v') dv` for unit-mass `φ`.
fn velocity_integral(law: &VelocityLaw, t: f64, r: f64) -> Result<f64> {
    let shrink = (-2.0 * t).exp();
    match *law {
        VelocityLaw::UniformBox { half_width: b } => {
            let area = 4.0 * b * b + 8.0 * b * r + PI * r * r;
            let core = 8.0 * b.powi(4) / 3.0;
            let strips = 4.0 * (2.0 * b * ((b + r).powi(3) - b.powi(3)) / 3.0 + 2.0 * b.powi(3) * r / 3.0);
            let corners = 4.0 * (b * b * PI * r * r / 2.0 + 4.0 * b * r.powi(3) / 3.0 + PI * r.powi(4) / 8.0);
            let second = core + strips + corners;
            Ok(law.peak() * shrink * (area + shrink * second))
        }
        _ => {
            let mu = half_line_moments(law)?;
            let g0 = law.peak();
            let flat = g0 * (r * r / 2.0 + shrink * r.powi(4) / 4.0);
            let tail = r * mu[0]
                + mu[1]
                + shrink * (r.powi(3) * mu[0] + 3.0 * r * r * mu[1] + 3.0 * r * mu[2] + mu[3]);
            Ok(2.0 * PI * shrink * (flat + tail))
        }
    }
}

/// Admissibility constant of `fam` on `[0, T]` for drift radius `R`.
///
/// Returns `Diverged` when the weighted integral is infinite (power tails
/// with `q ≤ 4`).
pub fn admissibility_gamma(fam: &InitialFamily, t_final: f64, r: f64) -> Result<f64> {
    if !(t_final >= 0.0 && t_final.is_finite() && r >= 0.0 && r.is_finite()) {
        return Err(Error::invalid("T and R must be finite and nonnegative"));
    }
    fam.check_normalizable()?;
    let amp = fam.mass * fam.profile.grid_max();
    let mut best = 0.0f64;
    for k in 0..=TIME_SAMPLES {
        let t = t_final * k as f64 / TIME_SAMPLES as f64;
        best = best.max(velocity_integral(&fam.law, t, r)?);
    }
    Ok(amp * best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::DensityProfile;

    /// Radial oracle: composite Simpson in `s ∈ [0,1)` with `|v| = s/(1−s)²`,
    /// split at the kink `|v| = R e^{-t}` of the inner sup.
    fn radial_oracle(law: &VelocityLaw, t: f64, r: f64) -> f64 {
        let g = |rho: f64| law.density([rho, 0.0]);
        let integrand = |s: f64| {
            if s >= 1.0 {
                return 0.0;
            }
            let v = s / ((1.0 - s) * (1.0 - s));
            let jac = (1.0 + s) / (1.0 - s).powi(3);
            let arg = (t.exp() * v - r).max(0.0);
            2.0 * PI * v * (1.0 + v * v) * g(arg) * jac
        };
        let kink_v = r * (-t).exp();
        let kink = if kink_v > 0.0 {
            ((2.0 * kink_v + 1.0) - (4.0 * kink_v + 1.0).sqrt()) / (2.0 * kink_v)
        } else {
            0.0
        };
        simpson(&integrand, 0.0, kink, 20_000) + simpson(&integrand, kink, 1.0, 400_000)
    }

    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
        if b <= a {
            return 0.0;
        }
        let h = (b - a) / m as f64;
        let mut acc = f(a) + f(b);
        for k in 1..m {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    /// Box oracle: dense midpoint lattice of the dilated box.
    fn box_oracle(b: f64, t: f64, r: f64, m: usize) -> f64 {
        let half = (b + r) * (-t).exp();
        let d = 2.0 * half / m as f64;
        let mut acc = 0.0;
        for jy in 0..m {
            let vy = -half + (jy as f64 + 0.5) * d;
            for ix in 0..m {
                let vx = -half + (ix as f64 + 0.5) * d;
                let wx = (t.exp() * vx).abs() - b;
                let wy = (t.exp() * vy).abs() - b;
                let dist = wx.max(0.0).hypot(wy.max(0.0));
                if dist <= r {
                    acc += 1.0 + vx * vx + vy * vy;
                }
            }
        }
        acc * d * d / (4.0 * b * b)
    }

    #[test]
    fn power_tail_three_diverges() {
        let r = admissibility_gamma(&InitialFamily::power_tail(3.0), 1.0, 0.5);
        assert!(matches!(r, Err(Error::Diverged(_))));
        assert!(matches!(
            admissibility_gamma(&InitialFamily::power_tail(4.0), 0.0, 0.0),
            Err(Error::Diverged(_))
        ));
    }

    #[test]
    fn power_tail_five_matches_oracle() {
        let law = VelocityLaw::PowerTail { q: 5.0 };
        for (t, r) in [(0.0, 0.0), (0.0, 0.7), (0.4, 1.3)] {
            let closed = velocity_integral(&law, t, r).unwrap();
            let oracle = radial_oracle(&law, t, r);
            assert!((closed - oracle).abs() < 1e-7 * oracle, "t={t} R={r}: {closed} vs {oracle}");
        }
    }

    #[test]
    fn maxwellian_matches_oracle() {
        let law = VelocityLaw::Maxwellian { sigma: 0.6 };
        for (t, r) in [(0.0, 0.0), (0.3, 0.5), (1.0, 2.0)] {
            let closed = velocity_integral(&law, t, r).unwrap();
            let oracle = radial_oracle(&law, t, r);
            assert!((closed - oracle).abs() < 1e-9 * oracle, "t={t} R={r}: {closed} vs {oracle}");
        }
        // R = 0, t = 0 is ∫(1+|v|²)φ = 1 + 2σ²
        assert!((velocity_integral(&law, 0.0, 0.0).unwrap() - 1.72).abs() < 1e-14);
    }

    #[test]
    fn box_matches_lattice() {
        let b = 0.8;
        let law = VelocityLaw::UniformBox { half_width: b };
        let exact = velocity_integral(&law, 0.0, 0.0).unwrap();
        assert!((exact - (1.0 + 2.0 * b * b / 3.0)).abs() < 1e-14);
        for (t, r) in [(0.0, 0.0), (0.0, 0.4), (0.5, 1.1)] {
            let closed = velocity_integral(&law, t, r).unwrap();
            let oracle = box_oracle(b, t, r, 3000);
            assert!((closed - oracle).abs() < 2e-3 * oracle, "t={t} R={r}: {closed} vs {oracle}");
        }
    }

    #[test]
    fn profile_maximum_scales_result() {
        let fam = InitialFamily::maxwellian(0.5);
        let g1 = admissibility_gamma(&fam, 1.0, 0.3).unwrap();
        let bumped = fam.clone().with_profile(DensityProfile::single([1, 0], 0.5)).with_mass(2.0);
        let g2 = admissibility_gamma(&bumped, 1.0, 0.3).unwrap();
        assert!((g2 / g1 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn nondecreasing_in_horizon_and_radius() {
        let fam = InitialFamily::power_tail(6.0);
        let a = admissibility_gamma(&fam, 0.5, 0.2).unwrap();
        assert!(admissibility_gamma(&fam, 1.0, 0.2).unwrap() >= a);
        assert!(admissibility_gamma(&fam, 0.5, 0.4).unwrap() > a);
        assert!(a.is_finite());
    }
}
