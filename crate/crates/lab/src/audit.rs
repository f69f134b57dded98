//! Corpus audit of the maximal-function, interpolation, moment and
//! Gagliardo–Nirenberg inequalities against their frozen constants.

use rayon::prelude::*;

use vns_core::corpus::{
    gn_corpus_field, interp_corpus_family, interp_corpus_sample, lip_corpus_field, maximal_corpus_field,
    FROZEN_GN_CONSTANT, FROZEN_INTERP_CONSTANT, FROZEN_LIP_CONSTANT, FROZEN_MAX_L2_RATIO, GN_CORPUS_SIZE,
    INTERP_CORPUS_N, INTERP_CORPUS_SIZE, LIP_CORPUS_SIZE, MAXIMAL_CORPUS_SIZE,
};
use vns_core::diagnostics::{interp_inequality_ratio, moment_bound_check, KineticMoments, MOMENT_BOUND_SLACK};
use vns_core::grid::{ScalarField, TorusGrid, VelocityField};
use vns_core::maximal::{all_node_pairs, maximal_function, max_l2_ratio, pointwise_lip_check};
use vns_core::norms::gagliardo_nirenberg_ratio;
use vns_core::particles::{sample_f0, DragLaw, InitialFamily, ParticleEnsemble, PushScheme};

use crate::error::Result;

/// Tolerance on the regression match of the maximal `L²` ratio.
pub const MAX_L2_TOL: f64 = 1e-12;

/// Particle sample and its family for the interpolation quotient.
#[derive(Debug, Clone)]
pub struct InterpCase {
    pub particles: ParticleEnsemble,
    pub family: InitialFamily,
    pub grid: TorusGrid,
}

/// Free transport (`u ≡ 0`) of a sample, checked against the moment bound.
#[derive(Debug, Clone)]
pub struct MomentCase {
    pub particles: ParticleEnsemble,
    pub family: InitialFamily,
    pub grid: TorusGrid,
    pub t_final: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AuditCorpus {
    pub maximal: Vec<ScalarField>,
    pub lip: Vec<ScalarField>,
    pub gn: Vec<ScalarField>,
    pub interp: Vec<InterpCase>,
    pub moment: Vec<MomentCase>,
}

impl AuditCorpus {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The seeded corpora behind the frozen constants.
    pub fn standard() -> Self {
        let grid = TorusGrid::new(INTERP_CORPUS_N).expect("valid corpus grid");
        let moment_grid = TorusGrid::new(16).expect("valid corpus grid");
        let moment = [
            InitialFamily::maxwellian(0.5),
            InitialFamily::uniform_box(0.8),
            InitialFamily::power_tail(6.0),
        ]
        .into_iter()
        .enumerate()
        .map(|(k, family)| MomentCase {
            particles: sample_f0(&family, 50_000, 100 + k as u64).expect("valid corpus family"),
            family,
            grid: moment_grid,
            t_final: 0.5,
            steps: 10,
        })
        .collect();
        AuditCorpus {
            maximal: (0..MAXIMAL_CORPUS_SIZE).map(maximal_corpus_field).collect(),
            lip: (0..LIP_CORPUS_SIZE).map(lip_corpus_field).collect(),
            gn: (0..GN_CORPUS_SIZE).map(gn_corpus_field).collect(),
            interp: (0..INTERP_CORPUS_SIZE)
                .map(|k| InterpCase {
                    particles: interp_corpus_sample(k),
                    family: interp_corpus_family(k),
                    grid,
                })
                .collect(),
            moment,
        }
    }
}

/// One line of the audit table.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub check: &'static str,
    pub cases: usize,
    /// Worst measured value over the corpus.
    pub measured: f64,
    pub bound: f64,
    /// Index of the worst case.
    pub worst_case: usize,
    /// Indices of the cases exceeding the bound.
    pub failures: Vec<usize>,
}

impl AuditRow {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    fn from_values(check: &'static str, values: Vec<f64>, bound: f64) -> Self {
        let (worst_case, measured) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv || v.is_nan() { (i, v) } else { (bi, bv) });
        let failures = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| !(v <= bound))
            .map(|(i, _)| i)
            .collect();
        AuditRow {
            check,
            cases: values.len(),
            measured,
            bound,
            worst_case,
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(AuditRow::pass)
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<22} {:>6} {:>22} {:>22} {:>6}  status\n",
            "check", "cases", "measured", "bound", "worst"
        );
        for r in &self.rows {
            let status = if r.pass() {
                "pass".to_string()
            } else {
                format!("FAIL cases {:?}", r.failures)
            };
            s.push_str(&format!(
                "{:<22} {:>6} {:>22.15e} {:>22.15e} {:>6}  {}\n",
                r.check, r.cases, r.measured, r.bound, r.worst_case, status
            ));
        }
        s
    }
}

/// Free transport over `[0, T]` with the moments deposited at every step.
fn free_transport_moments(c: &MomentCase) -> Result<Vec<KineticMoments>> {
    let zero = VelocityField::zeros(c.grid);
    let dt = c.t_final / c.steps as f64;
    let mut p = c.particles.clone();
    let mut out = vec![KineticMoments::deposit(&p, c.grid)];
    for _ in 0..c.steps {
        p.advance(&zero, dt, PushScheme::Midpoint, DragLaw::Linear)?;
        out.push(KineticMoments::deposit(&p, c.grid));
    }
    Ok(out)
}

/// Scans every non-empty corpus; empty corpora produce no row.
pub fn audit_inequalities(corpus: &AuditCorpus) -> Result<AuditReport> {
    let mut rows = Vec::new();
    if !corpus.maximal.is_empty() {
        let dominance: Vec<f64> = corpus
            .maximal
            .par_iter()
            .map(|g| {
                let m = maximal_function(g);
                g.values
                    .iter()
                    .zip(&m.values)
                    .map(|(v, mv)| v.abs() - mv)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        rows.push(AuditRow::from_values("maximal_dominance", dominance, 0.0));
        let ratios = corpus
            .maximal
            .par_iter()
            .map(|g| Ok(max_l2_ratio(g)?))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(AuditRow::from_values(
            "maximal_l2_ratio",
            ratios,
            FROZEN_MAX_L2_RATIO + MAX_L2_TOL,
        ));
    }
    if !corpus.lip.is_empty() {
        let values = corpus
            .lip
            .par_iter()
            .map(|g| pointwise_lip_check(g, &all_node_pairs(g.grid)))
            .collect();
        rows.push(AuditRow::from_values("pointwise_difference", values, FROZEN_LIP_CONSTANT));
    }
    if !corpus.gn.is_empty() {
        let values = corpus.gn.par_iter().map(gagliardo_nirenberg_ratio).collect();
        rows.push(AuditRow::from_values("gagliardo_nirenberg", values, FROZEN_GN_CONSTANT));
    }
    if !corpus.interp.is_empty() {
        let values = corpus
            .interp
            .iter()
            .map(|c| Ok(interp_inequality_ratio(&c.particles, c.grid, 1, 2, &c.family)?))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(AuditRow::from_values("interpolation_l1_k2", values, FROZEN_INTERP_CONSTANT));
    }
    if !corpus.moment.is_empty() {
        let values = corpus
            .moment
            .iter()
            .map(|c| {
                let rep = moment_bound_check(&free_transport_moments(c)?, &c.family, c.t_final, 0.0)?;
                Ok(rep.lhs / rep.rhs)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(AuditRow::from_values("moment_bound", values, 1.0 + MOMENT_BOUND_SLACK));
    }
    Ok(AuditReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_gives_empty_passing_report() {
        let r = audit_inequalities(&AuditCorpus::empty()).unwrap();
        assert!(r.rows.is_empty() && r.pass());
    }

    #[test]
    fn injected_violation_is_reported() {
        // the checkerboard lives on the Nyquist mode, where the spectral
        // gradient vanishes; a constant has GN ratio exactly 1
        let g = TorusGrid::new(32).unwrap();
        let flat = ScalarField::constant(g, 2.0);
        let board = ScalarField::from_fn(g, |p| {
            let (i, j) = ((p[0] * 32.0).round() as i64, (p[1] * 32.0).round() as i64);
            if (i + j) % 2 == 0 { 1.0 } else { -1.0 }
        });
        let corpus = AuditCorpus {
            gn: vec![gn_corpus_field(0), flat, gn_corpus_field(1)],
            lip: vec![lip_corpus_field(0), board],
            ..Default::default()
        };
        let r = audit_inequalities(&corpus).unwrap();
        assert!(!r.pass());
        let gn = r.rows.iter().find(|x| x.check == "gagliardo_nirenberg").unwrap();
        assert_eq!(gn.failures, vec![1]);
        assert_eq!(gn.worst_case, 1);
        assert!((gn.measured - 1.0).abs() < 1e-12);
        let lip = r.rows.iter().find(|x| x.check == "pointwise_difference").unwrap();
        assert_eq!(lip.failures, vec![1]);
        assert!(r.to_table().contains("FAIL cases [1]"));
    }
}
