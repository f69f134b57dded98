//! Cloud-in-cell pair: bilinear interpolation of nodal fields to particles and
//! its adjoint, bilinear deposition of particle quantities to nodes.
//!
//! Deposition splits particles into fixed-size chunks, accumulates each chunk
//! into its own buffers and merges the buffers in chunk order, so the result is
//! bitwise identical for any thread count.

use rayon::prelude::*;

use crate::grid::{MomentFields, ScalarField, TorusGrid, Vec2, VectorField, VelocityField};
use crate::particles::ParticleEnsemble;

/// Particles per deposition chunk. Fixed so that results never depend on
/// scheduling.
pub const DEPOSIT_CHUNK: usize = 16_384;

/// The four nodes surrounding a point and their bilinear weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CicStencil {
    pub nodes: [usize; 4],
    pub weights: [f64; 4],
}

impl CicStencil {
    #[inline]
    pub fn new(grid: TorusGrid, p: Vec2) -> Self {
        let n = grid.n();
        let nf = n as f64;
        let sx = p[0] * nf;
        let sy = p[1] * nf;
        let fx0 = sx.floor();
        let fy0 = sy.floor();
        let fx = sx - fx0;
        let fy = sy - fy0;
        let cell = |f: f64| {
            let c = f as i64;
            if (0..n as i64).contains(&c) {
                c as usize
            } else {
                c.rem_euclid(n as i64) as usize
            }
        };
        let i0 = cell(fx0);
        let j0 = cell(fy0);
        let i1 = if i0 + 1 == n { 0 } else { i0 + 1 };
        let j1 = if j0 + 1 == n { 0 } else { j0 + 1 };
        CicStencil {
            nodes: [j0 * n + i0, j0 * n + i1, j1 * n + i0, j1 * n + i1],
            weights: [
                (1.0 - fx) * (1.0 - fy),
                fx * (1.0 - fy),
                (1.0 - fx) * fy,
                fx * fy,
            ],
        }
    }

    #[inline]
    pub fn interpolate(&self, values: &[f64]) -> f64 {
        self.weights[0] * values[self.nodes[0]]
            + self.weights[1] * values[self.nodes[1]]
            + self.weights[2] * values[self.nodes[2]]
            + self.weights[3] * values[self.nodes[3]]
    }
}

/// Bilinear interpolation of a velocity field at one point.
#[inline]
pub fn interpolate_velocity(u: &VelocityField, p: Vec2) -> Vec2 {
    let s = CicStencil::new(u.grid, p);
    [s.interpolate(&u.x), s.interpolate(&u.y)]
}

/// Bilinear interpolation of a scalar field at one point.
#[inline]
pub fn interpolate_scalar(f: &ScalarField, p: Vec2) -> f64 {
    CicStencil::new(f.grid, p).interpolate(&f.values)
}

/// Evaluates `u` at each point with periodic bilinear interpolation.
pub fn eval_velocity(u: &VelocityField, points: &[Vec2]) -> Vec<Vec2> {
    points
        .par_iter()
        .map(|&p| interpolate_velocity(u, p))
        .collect()
}

/// Deposits `C` per-particle channels onto the grid as densities (divided by
/// `h²`).
pub fn deposit_channels<const C: usize, F>(
    grid: TorusGrid,
    positions: &[Vec2],
    channel: F,
) -> [Vec<f64>; C]
where
    F: Fn(usize) -> [f64; C] + Sync,
{
    let len = grid.len();
    let partials: Vec<[Vec<f64>; C]> = positions
        .par_chunks(DEPOSIT_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut acc: [Vec<f64>; C] = std::array::from_fn(|_| vec![0.0; len]);
            let base = c * DEPOSIT_CHUNK;
            for (k, &p) in chunk.iter().enumerate() {
                let s = CicStencil::new(grid, p);
                let vals = channel(base + k);
                for (a, v) in acc.iter_mut().zip(vals) {
                    for q in 0..4 {
                        a[s.nodes[q]] += s.weights[q] * v;
                    }
                }
            }
            acc
        })
        .collect();
    let mut out: [Vec<f64>; C] = std::array::from_fn(|_| vec![0.0; len]);
    for part in &partials {
        for (o, p) in out.iter_mut().zip(part) {
            for (a, b) in o.iter_mut().zip(p) {
                *a += b;
            }
        }
    }
    let inv_area = 1.0 / grid.cell_area();
    for o in out.iter_mut() {
        for a in o.iter_mut() {
            *a *= inv_area;
        }
    }
    out
}

/// Cloud-in-cell deposition of `ρ`, `j` and `m₂`.
pub fn deposit(p: &ParticleEnsemble, grid: TorusGrid) -> MomentFields {
    let [rho, jx, jy, m2] = deposit_channels(grid, &p.x, |k| {
        let w = p.w[k];
        let v = p.v[k];
        [w, w * v[0], w * v[1], w * (v[0] * v[0] + v[1] * v[1])]
    });
    MomentFields {
        rho: ScalarField { grid, values: rho },
        j: VectorField { grid, x: jx, y: jy },
        m2: ScalarField { grid, values: m2 },
    }
}

/// Deposits the scalar moment `m_ℓ = ∫ |v|^ℓ f dv`.
pub fn deposit_moment(p: &ParticleEnsemble, grid: TorusGrid, order: u32) -> ScalarField {
    let [m] = deposit_channels(grid, &p.x, |k| {
        let v = p.v[k];
        let s = (v[0] * v[0] + v[1] * v[1]).sqrt();
        [p.w[k] * s.powi(order as i32)]
    });
    ScalarField { grid, values: m }
}
