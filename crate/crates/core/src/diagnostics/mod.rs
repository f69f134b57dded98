//! Quantitative functionals of the stability argument and the balance laws
//! of the coupled system.

mod balance;
mod functionals;
mod psi;
mod series;
mod stability;

pub use balance::{energy_balance, m2_balance};
pub use functionals::{
    coupling_a, drag_dissipation, drift_radius, interp_inequality_ratio, log_lip_gamma,
    log_lip_offsets, loeper_q, moment_bound_check, momentum_coupling, KineticMoments,
    MomentBoundReport, MOMENT_BOUND_SLACK,
};
pub use psi::{psi, INV_E};
pub use series::{cumulative_trapezoid, DiagnosticRecord, DiagnosticSeries, Observables, TwinRecord};
pub use stability::{compute_t0, osgood_envelope, q_dynamics_check, OsgoodEnvelope};
