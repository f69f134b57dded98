//! Lebesgue norms with grid quadrature, and the Gagliardo–Nirenberg quotient
//! used by the inequality audit.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid, VectorField, VelocityField};
use crate::spectral::scalar_h1_seminorm;

/// Exponent of a Lebesgue norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }
}

/// Anything with a pointwise magnitude at the grid nodes.
pub trait NodalMagnitude {
    fn grid(&self) -> TorusGrid;
    fn magnitude_at(&self, k: usize) -> f64;
}

impl NodalMagnitude for ScalarField {
    fn grid(&self) -> TorusGrid {
        self.grid
    }
    fn magnitude_at(&self, k: usize) -> f64 {
        self.values[k].abs()
    }
}

impl NodalMagnitude for VelocityField {
    fn grid(&self) -> TorusGrid {
        self.grid
    }
    fn magnitude_at(&self, k: usize) -> f64 {
        self.x[k].hypot(self.y[k])
    }
}

impl NodalMagnitude for VectorField {
    fn grid(&self) -> TorusGrid {
        self.grid
    }
    fn magnitude_at(&self, k: usize) -> f64 {
        self.x[k].hypot(self.y[k])
    }
}

/// `(∑ |f|^p h²)^{1/p}`, or `max |f|` for `p = ∞`.
pub fn lebesgue_norm<F: NodalMagnitude + ?Sized>(f: &F, p: impl Into<Exponent>) -> Result<f64> {
    let grid = f.grid();
    let mags = (0..grid.len()).map(|k| f.magnitude_at(k));
    match p.into() {
        Exponent::Infinity => Ok(mags.fold(0.0, f64::max)),
        Exponent::Finite(p) if p >= 1.0 => {
            let s: f64 = if p == 2.0 {
                mags.map(|m| m * m).sum()
            } else if p == 1.0 {
                mags.sum()
            } else {
                mags.map(|m| m.powf(p)).sum()
            };
            Ok((s * grid.cell_area()).powf(1.0 / p))
        }
        Exponent::Finite(p) => Err(Error::invalid(format!("norm exponent must be >= 1, got {p}"))),
    }
}

/// `‖φ‖₄ / (‖φ‖₂^{1/2} (‖φ‖₂² + ‖∇φ‖₂²)^{1/4})`; zero for the zero field.
pub fn gagliardo_nirenberg_ratio(phi: &ScalarField) -> f64 {
    let l4 = lebesgue_norm(phi, 4.0).unwrap_or(0.0);
    let l2 = lebesgue_norm(phi, 2.0).unwrap_or(0.0);
    if l2 == 0.0 {
        return 0.0;
    }
    let g = scalar_h1_seminorm(phi);
    l4 / (l2.sqrt() * (l2 * l2 + g * g).powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_one_has_unit_norm() {
        let g = make_grid(16).unwrap();
        let f = ScalarField::constant(g, 1.0);
        for p in [1.0, 1.5, 2.0, 4.0, 7.3, f64::INFINITY] {
            assert!((lebesgue_norm(&f, p).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sine_l2() {
        let g = make_grid(32).unwrap();
        let f = ScalarField::from_fn(g, |p| (2.0 * PI * p[0]).sin());
        assert!((lebesgue_norm(&f, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sup_norm_matches_scan() {
        let g = make_grid(16).unwrap();
        let f = ScalarField::from_fn(g, |p| (p[0] - 0.3) * (p[1] + 0.1) - 0.4 * (9.0 * p[1]).cos());
        let mut best: f64 = 0.0;
        for j in 0..16 {
            for i in 0..16 {
                best = best.max(f.at(i, j).abs());
            }
        }
        assert_eq!(lebesgue_norm(&f, f64::INFINITY).unwrap(), best);
    }

    #[test]
    fn rejects_sub_unit_exponent() {
        let g = make_grid(4).unwrap();
        assert!(lebesgue_norm(&ScalarField::zeros(g), 0.5).is_err());
    }

    #[test]
    fn velocity_norm_uses_euclidean_magnitude() {
        let g = make_grid(8).unwrap();
        let u = VelocityField::constant(g, [3.0, 4.0]);
        assert!((lebesgue_norm(&u, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(lebesgue_norm(&u, f64::INFINITY).unwrap(), 5.0);
    }

    #[test]
    fn gn_ratio_of_constant() {
        // ‖1‖₄ = 1, ‖1‖₂ = 1, ∇1 = 0
        let g = make_grid(8).unwrap();
        assert!((gagliardo_nirenberg_ratio(&ScalarField::constant(g, 2.5)) - 1.0).abs() < 1e-14);
    }
}
