//! Geometry of the unit torus `[0,1)²` and the nodal fields that live on it.
//!
//! Node `(i, j)` sits at `(i·h, j·h)` and is stored at flat index `j·n + i`
//! (rows run along `x₁`).

use crate::error::{Error, Result};

/// A torus point or a plain 2-vector.
pub type Vec2 = [f64; 2];

/// Period of the torus along each axis.
pub const TORUS_LENGTH: f64 = 1.0;

/// Uniform `n × n` grid on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    n: usize,
    h: f64,
}

/// Builds the `n × n` grid; `n` must be even and at least 4.
pub fn make_grid(n: usize) -> Result<TorusGrid> {
    TorusGrid::new(n)
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid(format!(
                "grid size must be even and >= 4, got {n}"
            )));
        }
        Ok(TorusGrid {
            n,
            h: TORUS_LENGTH / n as f64,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn length(&self) -> f64 {
        TORUS_LENGTH
    }

    /// Number of nodes, `n²`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Area element `h²` of one node.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Coordinates of node `(i, j)`.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        [i as f64 * self.h, j as f64 * self.h]
    }

    /// Coordinates of the node stored at flat index `k`.
    #[inline]
    pub fn node_at(&self, k: usize) -> Vec2 {
        self.node(k % self.n, k / self.n)
    }

    /// Signed integer wavenumber of FFT bin `i` (`0..n/2` then negative).
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

/// Wraps a coordinate into `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    if (0.0..TORUS_LENGTH).contains(&x) {
        return x;
    }
    let r = x.rem_euclid(TORUS_LENGTH);
    // rem_euclid can round up to exactly the period for tiny negative inputs
    if r >= TORUS_LENGTH {
        0.0
    } else {
        r
    }
}

#[inline]
pub fn wrap_point(p: Vec2) -> Vec2 {
    [wrap(p[0]), wrap(p[1])]
}

/// Shortest signed displacement `b − a` along one periodic axis, in `[-½, ½]`.
#[inline]
pub fn periodic_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(TORUS_LENGTH);
    if d > 0.5 * TORUS_LENGTH {
        d - TORUS_LENGTH
    } else {
        d
    }
}

/// Geodesic (flat torus) distance; always in `[0, √2/2]`.
pub fn geodesic_distance(x: Vec2, y: Vec2) -> f64 {
    let dx = periodic_delta(x[0], y[0]);
    let dy = periodic_delta(x[1], y[1]);
    dx.hypot(dy)
}

/// Real field sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(Vec2) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.node_at(k))).collect();
        ScalarField { grid, values }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn abs(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }

    /// Grid quadrature `∑ f h²`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Generic 2-component field at the grid nodes (momentum density, forces).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: TorusGrid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: TorusGrid) -> Self {
        VectorField {
            grid,
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(Vec2) -> Vec2) -> Self {
        let mut out = VectorField::zeros(grid);
        for k in 0..grid.len() {
            let v = f(grid.node_at(k));
            out.x[k] = v[0];
            out.y[k] = v[1];
        }
        out
    }

    #[inline]
    pub fn at(&self, k: usize) -> Vec2 {
        [self.x[k], self.y[k]]
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self
                .x
                .iter()
                .zip(&self.y)
                .map(|(a, b)| a.hypot(*b))
                .collect(),
        }
    }
}

/// Velocity on the grid. The `divergence_free` flag is only ever set by the
/// Leray projection (or by solvers that end with it).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub grid: TorusGrid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    divergence_free: bool,
}

impl VelocityField {
    pub fn zeros(grid: TorusGrid) -> Self {
        VelocityField {
            grid,
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
            divergence_free: true,
        }
    }

    pub fn constant(grid: TorusGrid, c: Vec2) -> Self {
        VelocityField {
            grid,
            x: vec![c[0]; grid.len()],
            y: vec![c[1]; grid.len()],
            divergence_free: true,
        }
    }

    /// Samples `f` at the nodes. The result is not flagged divergence-free.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(Vec2) -> Vec2) -> Self {
        let v = VectorField::from_fn(grid, f);
        VelocityField::from_components(grid, v.x, v.y)
    }

    pub fn from_components(grid: TorusGrid, x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), grid.len());
        assert_eq!(y.len(), grid.len());
        VelocityField {
            grid,
            x,
            y,
            divergence_free: false,
        }
    }

    pub(crate) fn with_flag(mut self, divergence_free: bool) -> Self {
        self.divergence_free = divergence_free;
        self
    }

    #[inline]
    pub fn divergence_free(&self) -> bool {
        self.divergence_free
    }

    #[inline]
    pub fn at(&self, k: usize) -> Vec2 {
        [self.x[k], self.y[k]]
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
    }

    /// Pointwise difference `self − other`; not flagged.
    pub fn sub(&self, other: &VelocityField) -> Result<VelocityField> {
        self.grid.check_same(&other.grid)?;
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect();
        let y = self.y.iter().zip(&other.y).map(|(a, b)| a - b).collect();
        Ok(VelocityField::from_components(self.grid, x, y)
            .with_flag(self.divergence_free && other.divergence_free))
    }

    pub fn scaled(&self, s: f64) -> VelocityField {
        VelocityField {
            grid: self.grid,
            x: self.x.iter().map(|v| s * v).collect(),
            y: self.y.iter().map(|v| s * v).collect(),
            divergence_free: self.divergence_free,
        }
    }

    pub fn magnitude(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self
                .x
                .iter()
                .zip(&self.y)
                .map(|(a, b)| a.hypot(*b))
                .collect(),
        }
    }

    pub fn as_vector(&self) -> VectorField {
        VectorField {
            grid: self.grid,
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }

    /// Maximum nodal speed `max |u|`.
    pub fn max_speed(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }
}

/// Kinetic moments deposited on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFields {
    /// Number density `m₀`.
    pub rho: ScalarField,
    /// Momentum density `∫ v f dv`.
    pub j: VectorField,
    /// Second moment density `m₂ = ∫ |v|² f dv`.
    pub m2: ScalarField,
}

impl MomentFields {
    pub fn grid(&self) -> TorusGrid {
        self.rho.grid
    }

    /// Largest violation of `|j|² ≤ ρ·m₂` relative to `ρ·m₂`.
    pub fn cauchy_schwarz_excess(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.rho.values.len() {
            let j2 = self.j.x[k].powi(2) + self.j.y[k].powi(2);
            let bound = self.rho.values[k] * self.m2.values[k];
            let scale = bound.abs().max(f64::MIN_POSITIVE);
            worst = worst.max((j2 - bound) / scale);
        }
        worst
    }
}
