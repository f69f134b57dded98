//! Seeded random field corpora for the inequality audits, and the regression
//! constants measured on them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{ScalarField, TorusGrid};
use crate::particles::{sample_f0, DensityProfile, InitialFamily, ParticleEnsemble};

/// Random trigonometric polynomial `∑_{|k₁|,|k₂|≤K} a_k cos(2πk·x + φ_k)` with
/// `a_k ~ N(0,1)/(1+|k|²)`.
pub fn band_limited_field(grid: TorusGrid, kmax: i32, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for ky in -kmax..=kmax {
        for kx in -kmax..=kmax {
            let a: f64 = rng.sample(StandardNormal);
            let phase = 2.0 * PI * rng.random::<f64>();
            let k2 = (kx * kx + ky * ky) as f64;
            modes.push((kx as f64, ky as f64, a / (1.0 + k2), phase));
        }
    }
    ScalarField::from_fn(grid, |p| {
        modes
            .iter()
            .map(|&(kx, ky, a, ph)| a * (2.0 * PI * (kx * p[0] + ky * p[1]) + ph).cos())
            .sum()
    })
}

/// Field of integers in `[-range, range]`; sums of such values are exact in
/// floating point.
pub fn integer_field(grid: TorusGrid, range: i64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| rng.random_range(-range..=range) as f64)
        .collect();
    ScalarField { grid, values }
}

/// Seeds and sizes of the standard corpora.
pub const MAXIMAL_CORPUS_SIZE: usize = 200;
pub const MAXIMAL_CORPUS_N: usize = 16;
pub const LIP_CORPUS_SIZE: usize = 40;
pub const LIP_CORPUS_N: usize = 32;
pub const GN_CORPUS_SIZE: usize = 100;
pub const GN_CORPUS_N: usize = 32;
const MAXIMAL_SEED: u64 = 0x6d61_7869;
const LIP_SEED: u64 = 0x6c69_7073;
const GN_SEED: u64 = 0x676e_6e67;
pub const INTERP_CORPUS_SIZE: usize = 20;
pub const INTERP_CORPUS_N: usize = 32;
pub const INTERP_CORPUS_PARTICLES: usize = 20_000;
const INTERP_SEED: u64 = 0x696e_7470;

/// The `k`-th field of the maximal-function corpus: band-limited with
/// cutoff cycling through 1..=4, on a 16×16 grid.
pub fn maximal_corpus_field(k: usize) -> ScalarField {
    let grid = TorusGrid::new(MAXIMAL_CORPUS_N).expect("valid corpus grid");
    band_limited_field(grid, 1 + (k % 4) as i32, MAXIMAL_SEED + k as u64)
}

/// The `k`-th field of the pointwise-difference corpus (32×32, cutoff 1..=3).
pub fn lip_corpus_field(k: usize) -> ScalarField {
    let grid = TorusGrid::new(LIP_CORPUS_N).expect("valid corpus grid");
    band_limited_field(grid, 1 + (k % 3) as i32, LIP_SEED + k as u64)
}

/// The `k`-th field of the Gagliardo–Nirenberg corpus (32×32, cutoff 1..=6).
pub fn gn_corpus_field(k: usize) -> ScalarField {
    let grid = TorusGrid::new(GN_CORPUS_N).expect("valid corpus grid");
    band_limited_field(grid, 1 + (k % 6) as i32, GN_SEED + k as u64)
}

/// Family of the `k`-th interpolation case: a Maxwellian of width
/// 0.3..0.7 with a single-mode position profile.
pub fn interp_corpus_family(k: usize) -> InitialFamily {
    let sigma = 0.3 + 0.4 * (k % 5) as f64 / 4.0;
    let amp = 0.1 * (k % 4) as f64;
    InitialFamily::maxwellian(sigma).with_profile(DensityProfile::single([1, (k % 3) as i32], amp))
}

/// The `k`-th particle sample of the interpolation corpus.
pub fn interp_corpus_sample(k: usize) -> ParticleEnsemble {
    sample_f0(&interp_corpus_family(k), INTERP_CORPUS_PARTICLES, INTERP_SEED + k as u64)
        .expect("valid corpus family")
}

/// Largest `‖Mg‖₂/‖g‖₂` over the maximal-function corpus, measured with the
/// exhaustive scan.
pub const FROZEN_MAX_L2_RATIO: f64 = 1.172_546_771_256_957_7;

/// Bound on the empirical constant of `|g(x)−g(y)| ≤ C d(x,y)(M|∇g|(x)+M|∇g|(y))`
/// over the pointwise-difference corpus (measured maximum, rounded up).
pub const FROZEN_LIP_CONSTANT: f64 = 0.775;

/// Bound on `‖φ‖₄ / (‖φ‖₂^{1/2}(‖φ‖₂²+‖∇φ‖₂²)^{1/4})` over the
/// Gagliardo–Nirenberg corpus (measured maximum, rounded up).
pub const FROZEN_GN_CONSTANT: f64 = 0.563;

/// Bound on `‖m₁‖_{4/3} / (‖f‖∞^{1/4} M₂^{3/4})` over the interpolation
/// corpus on a 32×32 grid (measured maximum, rounded up).
pub const FROZEN_INTERP_CONSTANT: f64 = 1.189;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpora_are_deterministic() {
        assert_eq!(maximal_corpus_field(7), maximal_corpus_field(7));
        assert_ne!(maximal_corpus_field(7), maximal_corpus_field(8));
        let g = TorusGrid::new(8).unwrap();
        let f = integer_field(g, 5, 1);
        assert!(f.values.iter().all(|v| v.fract() == 0.0 && v.abs() <= 5.0));
    }

    #[test]
    fn band_limited_has_no_high_modes() {
        let g = TorusGrid::new(16).unwrap();
        let f = band_limited_field(g, 2, 3);
        let s = crate::spectral::forward(g, &f.values);
        for j in 0..16 {
            for i in 0..16 {
                if g.wavenumber(i).abs() > 2 || g.wavenumber(j).abs() > 2 {
                    assert!(s[j * 16 + i].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn regression_constants_hold() {
        use crate::maximal::{all_node_pairs, max_l2_ratio, pointwise_lip_check};
        use crate::norms::gagliardo_nirenberg_ratio;
        let l2 = (0..MAXIMAL_CORPUS_SIZE)
            .map(|k| max_l2_ratio(&maximal_corpus_field(k)).unwrap())
            .fold(0.0, f64::max);
        assert!((l2 - FROZEN_MAX_L2_RATIO).abs() < 1e-12, "{l2:.17e}");
        let pairs = all_node_pairs(TorusGrid::new(LIP_CORPUS_N).unwrap());
        for k in 0..LIP_CORPUS_SIZE {
            assert!(pointwise_lip_check(&lip_corpus_field(k), &pairs) <= FROZEN_LIP_CONSTANT);
        }
        for k in 0..GN_CORPUS_SIZE {
            assert!(gagliardo_nirenberg_ratio(&gn_corpus_field(k)) <= FROZEN_GN_CONSTANT);
        }
        let g = TorusGrid::new(INTERP_CORPUS_N).unwrap();
        for k in 0..INTERP_CORPUS_SIZE {
            let r = crate::diagnostics::interp_inequality_ratio(&interp_corpus_sample(k), g, 1, 2, &interp_corpus_family(k))
                .unwrap();
            assert!(r <= FROZEN_INTERP_CONSTANT);
        }
    }
}
