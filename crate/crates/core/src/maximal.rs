//! Discrete Hardy–Littlewood maximal function on the torus with geodesic
//! balls, and the empirical constants of its two inequalities.
//!
//! Balls are centred at nodes and contain the nodes within geodesic distance
//! `r`. Averages only change when a node enters the ball, so the radius set
//! is quantized: the centre alone, then `m·h` for `m = 1, 2, …`, the last
//! radius clamped to `√2/2` (the whole torus).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{geodesic_distance, ScalarField, TorusGrid};
use crate::norms::lebesgue_norm;
use crate::spectral::gradient;

/// Maximal function values with the radii that were scanned.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
    pub radii_used: Vec<f64>,
}

impl MaximalField {
    pub fn to_scalar(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.clone(),
        }
    }
}

/// Node offsets sorted by length, and for every radius class the number of
/// leading offsets inside the ball.
struct Rings {
    offsets: Vec<(i64, i64)>,
    class_ends: Vec<usize>,
    radii: Vec<f64>,
}

fn rings(grid: TorusGrid) -> Rings {
    let n = grid.n() as i64;
    let h = grid.h();
    let mut offsets: Vec<(i64, i64)> = Vec::with_capacity(grid.len());
    for dj in (1 - n / 2)..=(n / 2) {
        for di in (1 - n / 2)..=(n / 2) {
            offsets.push((di, dj));
        }
    }
    offsets.sort_by_key(|&(di, dj)| (di * di + dj * dj, dj, di));
    let whole = n * n / 2;
    let last_m = (n as f64 / std::f64::consts::SQRT_2).ceil() as i64;
    let mut class_ends = vec![1];
    let mut radii = vec![0.5 * h];
    for m in 1..=last_m {
        let thresh = (m * m).min(whole);
        let end = offsets.partition_point(|&(di, dj)| di * di + dj * dj <= thresh);
        class_ends.push(end);
        radii.push(if thresh == whole {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            m as f64 * h
        });
    }
    Rings {
        offsets,
        class_ends,
        radii,
    }
}

/// `Mg(x) = max_r` of the average of `|g|` over the nodes within geodesic
/// distance `r` of `x`.
pub fn maximal_function(g: &ScalarField) -> MaximalField {
    let grid = g.grid;
    let n = grid.n() as i64;
    let abs: Vec<f64> = g.values.iter().map(|v| v.abs()).collect();
    let r = rings(grid);
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k as i64 % n, k as i64 / n);
            let mut sum = 0.0;
            let mut best: f64 = 0.0;
            let mut start = 0;
            for &end in &r.class_ends {
                for &(di, dj) in &r.offsets[start..end] {
                    let idx = (j + dj).rem_euclid(n) * n + (i + di).rem_euclid(n);
                    sum += abs[idx as usize];
                }
                start = end;
                best = best.max(sum / end as f64);
            }
            best
        })
        .collect();
    MaximalField {
        grid,
        values,
        radii_used: r.radii,
    }
}

/// `‖Mg‖₂ / ‖g‖₂`.
pub fn max_l2_ratio(g: &ScalarField) -> Result<f64> {
    let denom = lebesgue_norm(g, 2.0)?;
    if denom == 0.0 {
        return Err(Error::invalid("maximal L2 ratio of the zero field"));
    }
    Ok(lebesgue_norm(&maximal_function(g).to_scalar(), 2.0)? / denom)
}

/// `max |g(x)−g(y)| / (d(x,y)(M|∇g|(x) + M|∇g|(y)))` over node pairs, with
/// the gradient computed spectrally. Coincident pairs are skipped.
pub fn pointwise_lip_check(g: &ScalarField, pairs: &[(usize, usize)]) -> f64 {
    let grid = g.grid;
    let grad = maximal_function(&gradient(g).magnitude());
    pairs
        .iter()
        .filter(|(a, b)| a != b)
        .map(|&(a, b)| {
            let num = (g.values[a] - g.values[b]).abs();
            if num == 0.0 {
                return 0.0;
            }
            let d = geodesic_distance(grid.node_at(a), grid.node_at(b));
            num / (d * (grad.values[a] + grad.values[b]))
        })
        .fold(0.0, f64::max)
}

/// Every unordered pair of distinct nodes.
pub fn all_node_pairs(grid: TorusGrid) -> Vec<(usize, usize)> {
    let m = grid.len();
    (0..m).flat_map(|a| ((a + 1)..m).map(move |b| (a, b))).collect()
}
