//! Fourier machinery on the unit torus: 2-D FFTs, wavenumbers, the Leray
//! projector, the 2/3 dealiasing filter and Parseval norms.
//!
//! Transforms are unnormalized forward / `1/n²`-normalized inverse, so that
//! `‖f‖₂² = ∑ |f|² h² = n⁻⁴ ∑ |f̂|²`. Wavenumbers carry the `2π` factor of the
//! unit period explicitly.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid, VectorField, VelocityField};

pub use rustfft::num_complex::Complex64 as Complex;

type Plan = Arc<dyn Fft<f64>>;

thread_local! {
    static PLANS: RefCell<HashMap<usize, (Plan, Plan)>> = RefCell::new(HashMap::new());
}

fn plans(n: usize) -> (Plan, Plan) {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    })
}

fn transpose(n: usize, src: &[Complex64], dst: &mut [Complex64]) {
    for j in 0..n {
        for i in 0..n {
            dst[i * n + j] = src[j * n + i];
        }
    }
}

fn fft2_in_place(n: usize, buf: &mut Vec<Complex64>, plan: &Plan) {
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    plan.process_with_scratch(buf, &mut scratch);
    let mut t = vec![Complex64::default(); buf.len()];
    transpose(n, buf, &mut t);
    plan.process_with_scratch(&mut t, &mut scratch);
    transpose(n, &t, buf);
}

/// Unnormalized forward transform of nodal values.
pub fn forward(grid: TorusGrid, values: &[f64]) -> Vec<Complex64> {
    debug_assert_eq!(values.len(), grid.len());
    let (fwd, _) = plans(grid.n());
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(grid.n(), &mut buf, &fwd);
    buf
}

/// Inverse transform, keeping the real part.
pub fn inverse_real(grid: TorusGrid, spec: &[Complex64]) -> Vec<f64> {
    debug_assert_eq!(spec.len(), grid.len());
    let (_, inv) = plans(grid.n());
    let mut buf = spec.to_vec();
    fft2_in_place(grid.n(), &mut buf, &inv);
    let scale = 1.0 / grid.len() as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Physical wavevector `2π(k₁, k₂)` of bin `(i, j)`.
#[inline]
pub fn wavevector(grid: TorusGrid, i: usize, j: usize) -> [f64; 2] {
    [
        2.0 * PI * grid.wavenumber(i) as f64,
        2.0 * PI * grid.wavenumber(j) as f64,
    ]
}

/// Wavevector used for first derivatives: the Nyquist component is zeroed so
/// derivatives of real fields stay real.
#[inline]
pub fn derivative_wavevector(grid: TorusGrid, i: usize, j: usize) -> [f64; 2] {
    let half = grid.n() / 2;
    let [kx, ky] = wavevector(grid, i, j);
    [
        if i == half { 0.0 } else { kx },
        if j == half { 0.0 } else { ky },
    ]
}

/// `|2πk|²` for bin `(i, j)`.
#[inline]
pub fn wavenumber_sq(grid: TorusGrid, i: usize, j: usize) -> f64 {
    let [kx, ky] = wavevector(grid, i, j);
    kx * kx + ky * ky
}

/// Largest retained integer wavenumber under the 2/3 rule: `3K < n`.
pub fn dealias_cutoff(grid: TorusGrid) -> i64 {
    ((grid.n() - 1) / 3) as i64
}

/// Zeroes every bin with `|k₁| > K` or `|k₂| > K`.
pub fn dealias(grid: TorusGrid, spec: &mut [Complex64]) {
    let cut = dealias_cutoff(grid);
    let n = grid.n();
    for j in 0..n {
        let ky = grid.wavenumber(j).abs();
        for i in 0..n {
            if ky > cut || grid.wavenumber(i).abs() > cut {
                spec[j * n + i] = Complex64::default();
            }
        }
    }
}

/// Applies `û ↦ û − k(k·û)/|k|²` to a spectral vector field; the mean mode is
/// passed through. Nyquist components use the derivative wavevector so that
/// real fields stay real.
pub fn project_spectral(grid: TorusGrid, ux: &mut [Complex64], uy: &mut [Complex64]) {
    let n = grid.n();
    for j in 0..n {
        for i in 0..n {
            let [kx, ky] = derivative_wavevector(grid, i, j);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let idx = j * n + i;
            let dot = ux[idx] * kx + uy[idx] * ky;
            ux[idx] -= dot * (kx / k2);
            uy[idx] -= dot * (ky / k2);
        }
    }
}

/// Spectral (dual) representation of a velocity field.
#[derive(Debug, Clone)]
pub struct SpectralVelocity {
    pub grid: TorusGrid,
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl SpectralVelocity {
    pub fn from_physical(u: &VelocityField) -> Self {
        SpectralVelocity {
            grid: u.grid,
            x: forward(u.grid, &u.x),
            y: forward(u.grid, &u.y),
        }
    }

    pub fn from_vector(v: &VectorField) -> Self {
        SpectralVelocity {
            grid: v.grid,
            x: forward(v.grid, &v.x),
            y: forward(v.grid, &v.y),
        }
    }

    pub fn to_physical(&self, divergence_free: bool) -> VelocityField {
        VelocityField::from_components(
            self.grid,
            inverse_real(self.grid, &self.x),
            inverse_real(self.grid, &self.y),
        )
        .with_flag(divergence_free)
    }

    pub fn project(&mut self) {
        project_spectral(self.grid, &mut self.x, &mut self.y);
    }

    pub fn dealias(&mut self) {
        dealias(self.grid, &mut self.x);
        dealias(self.grid, &mut self.y);
    }

    /// Parseval `‖u‖₂²`.
    pub fn l2_sq(&self) -> f64 {
        let norm = (self.grid.len() as f64).powi(2);
        self.x
            .iter()
            .chain(self.y.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            / norm
    }

    /// Parseval `‖∇u‖₂²`.
    pub fn h1_seminorm_sq(&self) -> f64 {
        let n = self.grid.n();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                acc += wavenumber_sq(self.grid, i, j)
                    * (self.x[idx].norm_sqr() + self.y[idx].norm_sqr());
            }
        }
        acc / (self.grid.len() as f64).powi(2)
    }

    /// `max_k |k·û(k)| / ‖û‖` over all nonzero modes.
    pub fn relative_divergence(&self) -> f64 {
        let n = self.grid.n();
        let total = self
            .x
            .iter()
            .chain(self.y.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if total == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let [kx, ky] = derivative_wavevector(self.grid, i, j);
                let kn = kx.hypot(ky);
                if kn == 0.0 {
                    continue;
                }
                let idx = j * n + i;
                let d = (self.x[idx] * (kx / kn) + self.y[idx] * (ky / kn)).norm();
                worst = worst.max(d);
            }
        }
        worst / total
    }
}

/// Tolerance of the divergence-free invariant.
pub const DIVERGENCE_TOL: f64 = 1e-10;

/// Leray projection onto divergence-free fields; idempotent, leaves the mean
/// flow untouched.
pub fn leray_project(u: &VelocityField) -> Result<VelocityField> {
    if !u.is_finite() {
        return Err(Error::invalid("velocity field contains non-finite values"));
    }
    let mut s = SpectralVelocity::from_physical(u);
    s.project();
    Ok(s.to_physical(true))
}

/// Relative spectral divergence of `u`.
pub fn divergence_residual(u: &VelocityField) -> f64 {
    SpectralVelocity::from_physical(u).relative_divergence()
}

/// Spectral `‖∇u‖₂` via Parseval.
pub fn h1_seminorm(u: &VelocityField) -> f64 {
    SpectralVelocity::from_physical(u).h1_seminorm_sq().sqrt()
}

/// Spectral `‖∇φ‖₂` of a scalar field.
pub fn scalar_h1_seminorm(f: &ScalarField) -> f64 {
    let n = f.grid.n();
    let s = forward(f.grid, &f.values);
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += wavenumber_sq(f.grid, i, j) * s[j * n + i].norm_sqr();
        }
    }
    (acc / (f.grid.len() as f64).powi(2)).sqrt()
}

/// Spectral gradient of a scalar field.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid;
    let n = grid.n();
    let s = forward(grid, &f.values);
    let mut gx = vec![Complex64::default(); s.len()];
    let mut gy = vec![Complex64::default(); s.len()];
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            let [kx, ky] = derivative_wavevector(grid, i, j);
            gx[idx] = s[idx] * Complex64::new(0.0, kx);
            gy[idx] = s[idx] * Complex64::new(0.0, ky);
        }
    }
    VectorField {
        grid,
        x: inverse_real(grid, &gx),
        y: inverse_real(grid, &gy),
    }
}
