//! Acceptance run: every criterion at its stated tolerance, one line each.
//!
//! `cargo test --test acceptance -- 3 5` runs a subset. The exit status is
//! nonzero when a criterion outside `KNOWN_RED` fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use vns_core::corpus::{
    integer_field, maximal_corpus_field, FROZEN_LIP_CONSTANT, FROZEN_MAX_L2_RATIO, MAXIMAL_CORPUS_SIZE,
};
use vns_core::diagnostics::{psi, INV_E};
use vns_core::grid::{geodesic_distance, periodic_delta, ScalarField, TorusGrid, VelocityField};
use vns_core::maximal::{max_l2_ratio, maximal_function};
use vns_core::particles::{admissibility_gamma, moment, push_particles, sample_f0, InitialFamily, VelocityLaw};
use vns_core::Error;
use vns_lab::audit::{audit_inequalities, AuditCorpus};
use vns_lab::config::{Perturbation, RunConfig, SchedulePoint};
use vns_lab::experiments::{run_scheme, run_single, run_twin};

/// Criteria that cannot pass as stated; the ledger has the analysis.
const KNOWN_RED: &[usize] = &[2];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn canonical() -> RunConfig {
    RunConfig::default()
}

fn twin_config(delta_v: f64) -> RunConfig {
    RunConfig {
        perturbation: Some(Perturbation {
            delta_v,
            fluid_mode: [1, 0],
            fluid_amplitude: 0.0,
        }),
        ..canonical()
    }
}

fn exact_characteristics() -> Outcome {
    let grid = TorusGrid::new(32).unwrap();
    let zero = VelocityField::zeros(grid);
    let mut p = sample_f0(&InitialFamily::maxwellian(1.0), 10_000, 11).unwrap();
    let dt = 1e-3;
    for _ in 0..1000 {
        p = push_particles(&p, &zero, dt).unwrap();
    }
    let t = p.t;
    let mut worst: f64 = 0.0;
    for k in 0..p.len() {
        for c in 0..2 {
            let v0 = p.v0[k][c];
            let ve = v0 * (-t).exp();
            worst = worst.max((p.v[k][c] - ve).abs() / ve.abs());
            let xe = p.x0[k][c] + v0 * -(-t).exp_m1();
            worst = worst.max(periodic_delta(xe, p.x[k][c]).abs() / xe.abs().max(1.0));
        }
    }
    outcome(worst < 1e-12, format!("max relative error {worst:.3e} after 1000 steps"))
}

fn moment_law() -> Outcome {
    let grid = TorusGrid::new(32).unwrap();
    let zero = VelocityField::zeros(grid);
    let mut p = sample_f0(&InitialFamily::maxwellian(0.5), 20_000, 12).unwrap();
    let (dt, steps) = (1e-3, 1000);
    let mut m2 = vec![moment(&p, 2).unwrap()];
    for _ in 0..steps {
        p = push_particles(&p, &zero, dt).unwrap();
        m2.push(moment(&p, 2).unwrap());
    }
    let m0 = m2[0];
    let mut ratio_err: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut integral = 0.0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        ratio_err = ratio_err.max((m2[k] / m0 - (-2.0 * t).exp()).abs());
        if k > 0 {
            integral += 0.5 * dt * (m2[k - 1] + m2[k]);
        }
        residual = residual.max((m2[k] + 2.0 * integral - m0).abs());
    }
    // trapezoid error of 2∫M₂ for M₂ = M₂(0)e^{−2t}: (dt²/3) M₂(0)(1−e^{−2t})
    let predicted = dt * dt / 3.0 * m0 * -(-2.0f64).exp_m1();
    outcome(
        ratio_err < 1e-12 && residual < 1e-10,
        format!(
            "ratio error {ratio_err:.3e} (< 1e-12), moment-law residual {residual:.3e} (< 1e-10), \
             trapezoid error predicted {predicted:.3e}"
        ),
    )
}

fn energy_identity() -> Outcome {
    let mut res = Vec::new();
    for dt in [2e-3, 1e-3, 5e-4] {
        let cfg = RunConfig {
            t_final: 0.5,
            dt,
            ..canonical()
        };
        res.push(run_single(&cfg).unwrap().energy_residual);
    }
    let ratios = [res[1] / res[0], res[2] / res[1]];
    outcome(
        ratios.iter().all(|&r| r <= 0.6),
        format!(
            "R = {:.3e}, {:.3e}, {:.3e}; ratios {:.3}, {:.3} (<= 0.6)",
            res[0], res[1], res[2], ratios[0], ratios[1]
        ),
    )
}

fn uniqueness_shadow() -> Outcome {
    let run = run_twin(&twin_config(0.0)).unwrap();
    let nonzero = run
        .series
        .records
        .iter()
        .filter(|r| r.twin.is_none_or(|t| t.q.to_bits() != 0 || t.w_l2.to_bits() != 0))
        .count();
    outcome(
        nonzero == 0,
        format!("{} records, {nonzero} with nonzero Q or |w|", run.series.len()),
    )
}

fn stability_envelope() -> Outcome {
    let full = run_twin(&twin_config(1e-6)).unwrap();
    let half = run_twin(&twin_config(5e-7)).unwrap();
    let h_full = *full.h().last().unwrap();
    let h_half = *half.h().last().unwrap();
    let ratio = h_full / h_half;
    outcome(
        full.h_excess <= 0.0 && (3.5..=4.5).contains(&ratio),
        format!(
            "max H - envelope on [0, {:.3}] = {:.3e}; H(T) ratio under halved delta_v {ratio:.4}",
            full.t0, full.h_excess
        ),
    )
}

/// Exhaustive scan over every radius and every node pair.
fn brute_force_maximal(g: &ScalarField, radii: &[f64]) -> Vec<f64> {
    let grid = g.grid;
    (0..grid.len())
        .map(|x| {
            radii
                .iter()
                .map(|&r| {
                    let (mut sum, mut count) = (0.0, 0usize);
                    for y in 0..grid.len() {
                        if geodesic_distance(grid.node_at(x), grid.node_at(y)) <= r + 1e-12 {
                            sum += g.values[y].abs();
                            count += 1;
                        }
                    }
                    sum / count as f64
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

fn maximal_properties() -> Outcome {
    let fields: Vec<ScalarField> = (0..MAXIMAL_CORPUS_SIZE).map(maximal_corpus_field).collect();
    let maxes: Vec<_> = fields.iter().map(maximal_function).collect();
    let mut violations = 0;
    for k in 0..fields.len() {
        let (g, m) = (&fields[k], &maxes[k].values);
        let other = (k + 1) % fields.len();
        let sum = ScalarField::from_values(
            g.grid,
            g.values.iter().zip(&fields[other].values).map(|(a, b)| a + b).collect(),
        )
        .unwrap();
        let ms = maximal_function(&sum);
        let lambda = -1.7 + 0.01 * k as f64;
        let mh = maximal_function(&g.scaled(lambda));
        for i in 0..g.values.len() {
            let scale = m[i].max(1e-300);
            if m[i] < g.values[i].abs()
                || ms.values[i] > m[i] + maxes[other].values[i] + 1e-12 * (m[i] + maxes[other].values[i])
                || (mh.values[i] - lambda.abs() * m[i]).abs() > 1e-12 * lambda.abs() * scale
            {
                violations += 1;
            }
        }
    }
    let grid = TorusGrid::new(16).unwrap();
    let mut mismatches = 0;
    for seed in 0..20 {
        let g = integer_field(grid, 1 + 50 * seed as i64, 900 + seed);
        let fast = maximal_function(&g);
        if fast.values != brute_force_maximal(&g, &fast.radii_used) {
            mismatches += 1;
        }
    }
    let worst = fields.iter().map(|g| max_l2_ratio(g).unwrap()).fold(0.0, f64::max);
    let drift = (worst - FROZEN_MAX_L2_RATIO).abs();
    outcome(
        violations == 0 && mismatches == 0 && drift <= 1e-12,
        format!(
            "{violations} property violations on {} fields, {mismatches}/20 brute-force mismatches, \
             max L2 ratio {worst:.16} (frozen {FROZEN_MAX_L2_RATIO:.16}, drift {drift:.1e})",
            fields.len()
        ),
    )
}

fn pointwise_difference() -> Outcome {
    let corpus = AuditCorpus {
        lip: AuditCorpus::standard().lip,
        ..AuditCorpus::empty()
    };
    let report = audit_inequalities(&corpus).unwrap();
    let row = &report.rows[0];
    outcome(
        row.pass(),
        format!(
            "max empirical constant {:.6} over {} fields (frozen {FROZEN_LIP_CONSTANT})",
            row.measured, row.cases
        ),
    )
}

fn psi_properties() -> Outcome {
    const M: usize = 10_000;
    let p = |t: f64| psi(t).unwrap();
    let tol = |v: f64| 4.0 * f64::EPSILON * v.abs().max(f64::MIN_POSITIVE);
    let wide: Vec<f64> = (0..=M).map(|k| 10.0 * k as f64 / M as f64).collect();
    let narrow: Vec<f64> = (0..=M).map(|k| INV_E * k as f64 / M as f64).collect();
    let mut counts = [0usize; 4];
    for w in wide.windows(2) {
        if p(w[1]) < p(w[0]) {
            counts[0] += 1;
        }
    }
    for w in wide.windows(3) {
        let chord = 0.5 * (p(w[0]) + p(w[2]));
        if p(w[1]) < chord - tol(chord) {
            counts[1] += 1;
        }
    }
    for &t in &narrow {
        let rhs = p(t * t);
        if t * p(t) > rhs + tol(rhs) {
            counts[2] += 1;
        }
    }
    for &t in &wide {
        let rhs = t * t + p(t * t);
        if t * p(t) > rhs + tol(rhs) {
            counts[3] += 1;
        }
    }
    outcome(
        counts.iter().all(|&c| c == 0),
        format!(
            "violations: monotone {}, concave {}, t psi(t) <= psi(t^2) {}, t psi(t) <= t^2 + psi(t^2) {}",
            counts[0], counts[1], counts[2], counts[3]
        ),
    )
}

/// `sup_t ∫(1+|v|²) g((e^t|v|−R)₊) dv` on a dense radial lattice in
/// `s ∈ [0,1)`, `|v| = s/(1−s)²`, split at the kink and refined by Richardson
/// extrapolation of the composite Simpson rule.
fn radial_lattice(law: &VelocityLaw, t_final: f64, r: f64) -> f64 {
    let at = |t: f64| {
        let g = |rho: f64| law.density([rho, 0.0]);
        let f = |s: f64| {
            if s >= 1.0 {
                return 0.0;
            }
            let v = s / ((1.0 - s) * (1.0 - s));
            let jac = (1.0 + s) / (1.0 - s).powi(3);
            2.0 * PI * v * (1.0 + v * v) * g((t.exp() * v - r).max(0.0)) * jac
        };
        let kink_v = r * (-t).exp();
        let kink = if kink_v > 0.0 {
            ((2.0 * kink_v + 1.0) - (4.0 * kink_v + 1.0).sqrt()) / (2.0 * kink_v)
        } else {
            0.0
        };
        let simpson = |a: f64, b: f64, m: usize| {
            if b <= a {
                return 0.0;
            }
            let h = (b - a) / m as f64;
            let inner: f64 = (1..m)
                .map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h))
                .sum();
            (f(a) + f(b) + inner) * h / 3.0
        };
        let coarse = simpson(0.0, kink, 100_000) + simpson(kink, 1.0, 1_000_000);
        let fine = simpson(0.0, kink, 200_000) + simpson(kink, 1.0, 2_000_000);
        fine + (fine - coarse) / 15.0
    };
    (0..=16).map(|k| at(t_final * k as f64 / 16.0)).fold(0.0, f64::max)
}

fn admissibility() -> Outcome {
    let diverges = matches!(
        admissibility_gamma(&InitialFamily::power_tail(3.0), 1.0, 0.5),
        Err(Error::Diverged(_))
    );
    let fam = InitialFamily::power_tail(5.0);
    let mut worst: f64 = 0.0;
    for (t, r) in [(1.0, 0.5), (0.5, 0.0), (1.0, 2.0)] {
        let got = admissibility_gamma(&fam, t, r).unwrap();
        let oracle = radial_lattice(&fam.law, t, r);
        worst = worst.max((got - oracle).abs() / oracle);
    }
    let run = run_single(&canonical()).unwrap();
    let bound = run.moment_bound.unwrap();
    outcome(
        diverges && worst < 1e-6 && bound.pass,
        format!(
            "q=3 diverged: {diverges}; q=5 relative error {worst:.2e}; canonical moment bound \
             lhs {:.4} rhs {:.4} (slack {:.0}%)",
            bound.lhs,
            bound.rhs,
            100.0 * bound.slack
        ),
    )
}

fn scheme() -> Outcome {
    let cfg = canonical();
    let default_point = SchedulePoint {
        eps: cfg.eps_mollifier,
        r_chi: cfg.r_chi,
        sigma: None,
    };
    let canon = run_scheme(&RunConfig {
        schedule: vec![default_point],
        ..cfg.clone()
    })
    .unwrap();
    let picard = &canon.rows[0];
    let converged = picard.error.is_none() && picard.residual < 1e-8;

    // dt refinement and the schedule on a shorter horizon
    let short = RunConfig {
        t_final: 0.25,
        ..cfg.clone()
    };
    let schedule = run_scheme(&short).unwrap();
    let coarse = run_scheme(&RunConfig {
        dt: 2e-3,
        schedule: vec![default_point],
        ..short.clone()
    })
    .unwrap();
    let fine_row = schedule
        .rows
        .iter()
        .find(|r| r.eps == default_point.eps && r.r_chi == default_point.r_chi)
        .unwrap();
    let (e_coarse, e_fine) = (
        coarse.rows[0].energy_residual.unwrap_or(f64::NAN),
        fine_row.energy_residual.unwrap_or(f64::NAN),
    );
    let distances: Vec<String> = schedule
        .rows
        .iter()
        .map(|r| r.distance.map_or("-".into(), |d| format!("{d:.2e}")))
        .collect();
    outcome(
        converged && e_fine < e_coarse && schedule.converged() && schedule.distances_monotone(),
        format!(
            "canonical Picard {} iterations, residual {:.2e}; energy residual {e_coarse:.3e} -> {e_fine:.3e} \
             (dt 2e-3 -> 1e-3, T=0.25); schedule distances [{}]",
            picard.iterations,
            picard.residual,
            distances.join(", ")
        ),
    )
}

type Criterion = (usize, &'static str, u64, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "exact characteristics", 1, exact_characteristics),
    (2, "moment law", 5, moment_law),
    (3, "energy-dissipation identity", 300, energy_identity),
    (4, "uniqueness shadow", 120, uniqueness_shadow),
    (5, "stability envelope", 300, stability_envelope),
    (6, "maximal function", 60, maximal_properties),
    (7, "pointwise difference bound", 60, pointwise_difference),
    (8, "psi properties", 1, psi_properties),
    (9, "admissibility", 60, admissibility),
    (10, "regularized scheme", 600, scheme),
];

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for &(id, name, budget, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let pass = out.pass && in_budget;
        let known = KNOWN_RED.contains(&id);
        if !pass && !known {
            unexpected += 1;
        }
        println!(
            "criterion {id:>2} {name:<28} {}{}  {}  [{:.1} s, budget {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            if !pass && known { " (known)" } else { "" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
