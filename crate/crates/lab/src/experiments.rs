//! Experiment drivers: single coupled run, twin run, regularized scheme.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vns_core::coupled::{Coupling, CouplingOptions, CoupledSystem};
use vns_core::diagnostics::{
    compute_t0, coupling_a, cumulative_trapezoid, drift_radius, energy_balance, log_lip_gamma, loeper_q,
    m2_balance, moment_bound_check, osgood_envelope, q_dynamics_check, DiagnosticSeries, KineticMoments,
    MomentBoundReport, OsgoodEnvelope, TwinRecord,
};
use vns_core::grid::{TorusGrid, VelocityField};
use vns_core::particles::{sample_f0, ParticleEnsemble};
use vns_core::scheme::{
    distance_l2_l2, picard_iterate, scheme_energy_residual, PicardOptions, RegularizationParams,
};
use vns_core::spectral::{leray_project, SpectralVelocity};

use crate::config::{Mode, Perturbation, RunConfig};
use crate::error::{LabError, Result};
use crate::series_file::SeriesFile;

/// Seed offset of the twin velocity jitter directions.
const JITTER_STREAM: u64 = 0x6a69_7474;

fn at_step(step: usize) -> impl Fn(vns_core::Error) -> LabError {
    move |e| match e {
        e @ vns_core::Error::AtStep { .. } => LabError::Solver(e),
        e => LabError::Solver(vns_core::Error::AtStep {
            step,
            source: Box::new(e),
        }),
    }
}

/// Taylor–Green vortex plus shear, projected onto divergence-free fields.
pub fn initial_velocity(cfg: &RunConfig) -> Result<VelocityField> {
    let grid = TorusGrid::new(cfg.n)?;
    let (a, b) = (cfg.tg_amplitude, cfg.shear_amplitude);
    let u = VelocityField::from_fn(grid, |p| {
        let (x, y) = (2.0 * PI * p[0], 2.0 * PI * p[1]);
        [a * x.sin() * y.cos() + b * y.sin(), -a * x.cos() * y.sin()]
    });
    Ok(leray_project(&u)?)
}

pub fn initial_particles(cfg: &RunConfig) -> Result<ParticleEnsemble> {
    Ok(sample_f0(&cfg.initial_family(), cfg.n_particles, cfg.seed)?)
}

fn coupling_options(cfg: &RunConfig) -> CouplingOptions {
    CouplingOptions {
        nu: cfg.nu,
        coupling: if cfg.midpoint_coupling {
            Coupling::Midpoint
        } else {
            Coupling::Split
        },
        ..Default::default()
    }
}

/// Shear wave `a k^⊥/|k| cos 2πk·x`, divergence-free by construction.
pub fn fluid_mode(grid: TorusGrid, k: [i32; 2], amplitude: f64) -> VelocityField {
    let (k1, k2) = (k[0] as f64, k[1] as f64);
    let norm = k1.hypot(k2);
    VelocityField::from_fn(grid, |p| {
        let c = amplitude * (2.0 * PI * (k1 * p[0] + k2 * p[1])).cos();
        [-k2 / norm * c, k1 / norm * c]
    })
}

/// Copy of `p` with every velocity moved by `delta_v` in a random direction.
pub fn jitter_velocities(p: &ParticleEnsemble, delta_v: f64, seed: u64) -> Result<ParticleEnsemble> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ JITTER_STREAM);
    let v = p
        .v
        .iter()
        .map(|v| {
            let th = 2.0 * PI * rng.random::<f64>();
            [v[0] + delta_v * th.cos(), v[1] + delta_v * th.sin()]
        })
        .collect();
    Ok(ParticleEnsemble::new(p.x.clone(), v, p.w.clone())?)
}

fn config_metadata(file: &mut SeriesFile, cfg: &RunConfig, kind: &str) {
    file.push_meta("kind", kind);
    file.push_meta("code_version", env!("CARGO_PKG_VERSION"));
    for (k, v) in cfg.entries() {
        file.push_meta(format!("config.{k}"), v);
    }
}

/// Outcome of [`run_single`].
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub series: DiagnosticSeries,
    pub file: SeriesFile,
    pub energy_residual: f64,
    pub m2_residual: f64,
    pub drift_radius: f64,
    /// `None` when the admissibility integral diverges for the family.
    pub moment_bound: Option<MomentBoundReport>,
}

/// Full coupled run with the energy, moment and moment-bound diagnostics.
pub fn run_single(cfg: &RunConfig) -> Result<SingleRun> {
    cfg.validate(Mode::Single)?;
    let steps = cfg.steps()?;
    let fam = cfg.initial_family();
    let mut sys = CoupledSystem::new(initial_velocity(cfg)?, initial_particles(cfg)?, coupling_options(cfg))?;
    let grid = sys.u().grid;
    let mut series = DiagnosticSeries::new();
    series.push(sys.observables(), None, None)?;
    let mut moments = vec![KineticMoments::deposit(&sys.particles, grid)];
    for step in 0..steps {
        sys.step(cfg.dt).map_err(at_step(step))?;
        series.push(sys.observables(), None, None)?;
        if (step + 1) % cfg.cadence == 0 || step + 1 == steps {
            moments.push(KineticMoments::deposit(&sys.particles, grid));
        }
    }
    let energy_residual = energy_balance(&series);
    let m2_residual = m2_balance(&series, &series.coupling)?;
    let radius = drift_radius(&series.times, &series.column(|r| r.u_inf));
    let moment_bound = match moment_bound_check(&moments, &fam, cfg.t_final, radius) {
        Ok(r) => Some(r),
        Err(vns_core::Error::Diverged(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut file = SeriesFile::from_series(&series, None, cfg.cadence);
    config_metadata(&mut file, cfg, "single");
    file.push_meta("measured.energy_residual", format!("{energy_residual:e}"));
    file.push_meta("measured.m2_residual", format!("{m2_residual:e}"));
    file.push_meta("measured.drift_radius", format!("{radius:e}"));
    let u_inf = series.column(|r| r.u_inf);
    file.push_meta("measured.u_l2_linf", format!("{:e}", l2_in_time(&series.times, &u_inf)));
    match &moment_bound {
        Some(r) => {
            file.push_meta("measured.moment_bound_lhs", format!("{:e}", r.lhs));
            file.push_meta("measured.moment_bound_rhs", format!("{:e}", r.rhs));
            file.push_meta("measured.moment_bound_pass", r.pass);
        }
        None => file.push_meta("measured.moment_bound_pass", "diverged"),
    }
    Ok(SingleRun {
        series,
        file,
        energy_residual,
        m2_residual,
        drift_radius: radius,
        moment_bound,
    })
}

/// `(∫ f²)^{1/2}` by the trapezoid rule.
fn l2_in_time(times: &[f64], f: &[f64]) -> f64 {
    let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
    cumulative_trapezoid(times, &sq).last().copied().unwrap_or(0.0).sqrt()
}

/// Outcome of [`run_twin`].
#[derive(Debug, Clone)]
pub struct TwinRun {
    /// Observables of the first member with the twin records.
    pub series: DiagnosticSeries,
    pub file: SeriesFile,
    pub envelope: OsgoodEnvelope,
    /// `sup_t max_k ‖ρ_k‖∞`.
    pub k_hat: f64,
    /// Envelope constants.
    pub k: f64,
    pub alpha: f64,
    /// `‖u₁‖_{L²L∞} + ‖u₂‖_{L²L∞}`.
    pub s: f64,
    pub t0: f64,
    /// `1 + max_k ‖u_k‖∞² + max_k γ̂_k` per step.
    pub gamma_env: Vec<f64>,
    /// One-sided violation of the `Q` inequality.
    pub q_violation: f64,
    /// `max_{t ≤ T₀} (H(t) − envelope(t))`; nonpositive when `H` stays below.
    pub h_excess: f64,
}

impl TwinRun {
    pub fn h(&self) -> Vec<f64> {
        self.series.column(|r| r.twin.map_or(f64::NAN, |t| t.h))
    }
}

/// Two coupled runs from common samples, the second perturbed.
pub fn run_twin(cfg: &RunConfig) -> Result<TwinRun> {
    cfg.validate(Mode::Twin)?;
    let pert: Perturbation = cfg.perturbation.expect("validated");
    let steps = cfg.steps()?;
    let u0 = initial_velocity(cfg)?;
    let grid = u0.grid;
    let p1 = initial_particles(cfg)?;
    let p2 = if pert.delta_v > 0.0 {
        jitter_velocities(&p1, pert.delta_v, cfg.seed)?
    } else {
        p1.clone()
    };
    let u2 = if pert.fluid_amplitude != 0.0 {
        let m = fluid_mode(grid, pert.fluid_mode, pert.fluid_amplitude);
        let sum = VelocityField::from_components(
            grid,
            u0.x.iter().zip(&m.x).map(|(a, b)| a + b).collect(),
            u0.y.iter().zip(&m.y).map(|(a, b)| a + b).collect(),
        );
        leray_project(&sum)?
    } else {
        u0.clone()
    };
    let opts = coupling_options(cfg);
    let mut s1 = CoupledSystem::new(u0, p1, opts)?;
    let mut s2 = CoupledSystem::new(u2, p2, opts)?;

    let mut series = DiagnosticSeries::new();
    let mut gamma_env = Vec::with_capacity(steps + 1);
    let mut u2_inf = Vec::with_capacity(steps + 1);
    let mut k_hat: f64 = 0.0;
    let mut record = |s1: &CoupledSystem, s2: &CoupledSystem| -> Result<()> {
        let w = s1.u().sub(s2.u())?;
        let ws = SpectralVelocity::from_physical(&w);
        let w_l2 = ws.l2_sq().sqrt();
        let q = loeper_q(&s1.particles, &s2.particles)?;
        let twin = TwinRecord {
            q,
            h: w_l2 * w_l2 + q,
            a: coupling_a(s1.u(), &s1.moments, s2.u(), &s2.moments)?,
            w_l2,
            w_h1: ws.h1_seminorm_sq().sqrt(),
        };
        let g1 = log_lip_gamma(s1.u(), cfg.gamma_pairs, cfg.seed)?;
        let g2 = log_lip_gamma(s2.u(), cfg.gamma_pairs, cfg.seed)?;
        let (i1, i2) = (s1.u().max_speed(), s2.u().max_speed());
        gamma_env.push(1.0 + i1.max(i2).powi(2) + g1.max(g2));
        u2_inf.push(i2);
        for s in [s1, s2] {
            k_hat = s.moments.rho.values.iter().copied().fold(k_hat, f64::max);
        }
        series.push(s1.observables(), Some(g1), Some(twin))?;
        Ok(())
    };
    record(&s1, &s2)?;
    for step in 0..steps {
        let (a, b) = rayon::join(|| s1.step(cfg.dt), || s2.step(cfg.dt));
        a.map_err(at_step(step))?;
        b.map_err(at_step(step))?;
        record(&s1, &s2)?;
    }

    let times = series.times.clone();
    let u1_inf = series.column(|r| r.u_inf);
    let s = l2_in_time(&times, &u1_inf) + l2_in_time(&times, &u2_inf);
    let t0 = compute_t0(s, cfg.t_final);
    let k = k_hat.max(1.0 + 1e-9);
    let alpha = (3.0 / (k * k)).min(0.5);
    let h: Vec<f64> = series.column(|r| r.twin.map_or(0.0, |t| t.h));
    let envelope = osgood_envelope(&times, &gamma_env, k, alpha, h[0], t0)?;
    let h_excess = times
        .iter()
        .zip(&h)
        .filter_map(|(&t, &hv)| envelope.at(t).map(|e| hv - e))
        .fold(f64::NEG_INFINITY, f64::max);
    let q_col = series.column(|r| r.twin.map_or(0.0, |t| t.q));
    let w_col = series.column(|r| r.twin.map_or(0.0, |t| t.w_l2));
    let g_col = series.column(|r| r.gamma_hat.unwrap_or(0.0));
    let q_violation = q_dynamics_check(&times, &q_col, &g_col, &w_col, k_hat)?;

    let mut file = SeriesFile::from_series(&series, Some(&envelope), cfg.cadence);
    config_metadata(&mut file, cfg, "twin");
    let gamma_int = cumulative_trapezoid(&times, &g_col).last().copied().unwrap_or(0.0);
    let env_int = cumulative_trapezoid(&times, &gamma_env).last().copied().unwrap_or(0.0);
    for (key, v) in [
        ("k_hat", k_hat),
        ("k", k),
        ("alpha", alpha),
        ("u1_l2_linf", l2_in_time(&times, &u1_inf)),
        ("u2_l2_linf", l2_in_time(&times, &u2_inf)),
        ("s", s),
        ("t0", t0),
        ("gamma_hat_integral", gamma_int),
        ("gamma_env_integral", env_int),
        ("h0", h[0]),
        ("h_final", *h.last().unwrap_or(&0.0)),
        ("h_excess", h_excess),
        ("q_violation", q_violation),
    ] {
        file.push_meta(format!("measured.{key}"), format!("{v:e}"));
    }
    Ok(TwinRun {
        series,
        file,
        envelope,
        k_hat,
        k,
        alpha,
        s,
        t0,
        gamma_env,
        q_violation,
        h_excess,
    })
}

/// One schedule point of [`run_scheme`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRow {
    pub eps: f64,
    pub r_chi: f64,
    pub sigma: f64,
    pub iterations: usize,
    /// Last fixed-point residual.
    pub residual: f64,
    pub energy_residual: Option<f64>,
    /// Discrete `L²(0,T;L²)` distance to the direct solver.
    pub distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeReport {
    /// `L²(0,T;L²)` norm of the direct trajectory.
    pub direct_norm: f64,
    pub rows: Vec<SchemeRow>,
}

impl SchemeReport {
    pub fn converged(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
    }

    /// Distances strictly decreasing along the schedule.
    pub fn distances_monotone(&self) -> bool {
        let d: Vec<f64> = self.rows.iter().filter_map(|r| r.distance).collect();
        d.len() == self.rows.len() && d.windows(2).all(|w| w[1] < w[0])
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:>10} {:>10} {:>6} {:>5} {:>12} {:>12} {:>12}  status\n",
            "eps", "r_chi", "sigma", "iter", "residual", "energy_res", "distance"
        );
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4e}"));
        for r in &self.rows {
            s.push_str(&format!(
                "{:>10.4e} {:>10.4e} {:>6.3} {:>5} {:>12.4e} {:>12} {:>12}  {}\n",
                r.eps,
                r.r_chi,
                r.sigma,
                r.iterations,
                r.residual,
                opt(r.energy_residual),
                opt(r.distance),
                r.error.as_deref().unwrap_or("converged")
            ));
        }
        s.push_str(&format!("direct trajectory norm {:.6e}\n", self.direct_norm));
        s
    }

    pub fn to_file(&self, cfg: &RunConfig) -> SchemeFile {
        SchemeFile {
            table: self.clone(),
            config: cfg.to_text(),
        }
    }
}

/// Convergence table as CSV plus the echoed config.
#[derive(Debug, Clone)]
pub struct SchemeFile {
    pub table: SchemeReport,
    pub config: String,
}

impl SchemeFile {
    pub fn write(&self, dir: &std::path::Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir).map_err(|source| LabError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = dir.join("scheme.csv");
        let csv_err = |source| LabError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(["eps", "r_chi", "sigma", "iterations", "residual", "energy_residual", "distance", "error"])
            .map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        for r in &self.table.rows {
            w.write_record([
                format!("{:e}", r.eps),
                format!("{:e}", r.r_chi),
                format!("{:e}", r.sigma),
                r.iterations.to_string(),
                format!("{:e}", r.residual),
                opt(r.energy_residual),
                opt(r.distance),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|source| LabError::Io {
            path: path.clone(),
            source,
        })?;
        let meta = dir.join("scheme.meta");
        let mut text: String = self.config.lines().map(|l| format!("config.{l}\n")).collect();
        text.push_str(&format!("measured.direct_norm = {:e}\n", self.table.direct_norm));
        std::fs::write(&meta, text).map_err(|source| LabError::Io { path: meta, source })?;
        Ok(path)
    }
}

/// Velocity trajectory of the split-coupled solver, the scheme's limit.
pub fn direct_trajectory(cfg: &RunConfig, u0: &VelocityField, p: &ParticleEnsemble) -> Result<Vec<VelocityField>> {
    let steps = cfg.steps()?;
    let opts = CouplingOptions {
        nu: cfg.nu,
        coupling: Coupling::Split,
        ..Default::default()
    };
    let mut sys = CoupledSystem::new(u0.clone(), p.clone(), opts)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(sys.u().clone());
    for step in 0..steps {
        sys.step(cfg.dt).map_err(at_step(step))?;
        out.push(sys.u().clone());
    }
    Ok(out)
}

/// Picard fixed points along the configured schedule and their distances
/// to the direct solver.
pub fn run_scheme(cfg: &RunConfig) -> Result<SchemeReport> {
    cfg.validate(Mode::Scheme)?;
    let u0 = initial_velocity(cfg)?;
    let p = initial_particles(cfg)?;
    let direct = direct_trajectory(cfg, &u0, &p)?;
    let zero = vec![VelocityField::zeros(u0.grid); direct.len()];
    let direct_norm = distance_l2_l2(&direct, &zero, cfg.dt)?;
    let opts = PicardOptions {
        max_iter: cfg.picard_max_iter,
        tol: cfg.picard_tol,
        relaxation: cfg.relaxation,
        nu: cfg.nu,
    };
    let mut rows = Vec::with_capacity(cfg.schedule.len());
    for point in &cfg.schedule {
        let sigma = point.sigma.unwrap_or(cfg.sigma);
        let mut row = SchemeRow {
            eps: point.eps,
            r_chi: point.r_chi,
            sigma,
            iterations: 0,
            residual: f64::NAN,
            energy_residual: None,
            distance: None,
            error: None,
        };
        let outcome = RegularizationParams::new(point.eps, point.r_chi, sigma)
            .and_then(|params| picard_iterate(&u0, &p, &params, cfg.t_final, cfg.dt, &opts).map(|run| (params, run)));
        match outcome {
            Ok((params, run)) => {
                row.iterations = run.iterations();
                row.residual = *run.history.last().unwrap_or(&0.0);
                row.energy_residual = Some(scheme_energy_residual(&run, &params));
                row.distance = Some(distance_l2_l2(&run.fluid, &direct, cfg.dt)?);
            }
            Err(vns_core::Error::NonConvergence { history }) => {
                row.iterations = history.len();
                row.residual = *history.last().unwrap_or(&f64::NAN);
                row.error = Some(format!("no convergence after {} iterations", history.len()));
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    Ok(SchemeReport { direct_norm, rows })
}
