//! Stability and characterization checks on tracker output: the weighted
//! distance `Φ`, the local solutions `U♯` and `U♭`, the weak residual and the
//! interaction-estimate audit.

mod audit;
mod decompose;
mod local;
mod phi;
mod report;
mod residual;

pub use audit::{approaching_sum, draw_samples, interaction_audit, measure, AuditConfig, AuditMeasure, AuditReport, AuditSample, ScaleFit, ESTIMATE_NAMES};
pub use decompose::{field_jumps, field_potentials, shock_decompose, FieldJump, ShockDecomposition};
pub use local::{flat_error, sharp_error, u_flat, u_sharp, CoefficientRef, FlatSolution, LOCAL_QUAD_TOL};
pub use phi::{admissible_kappa, phi, PhiReport, PhiTerms};
pub use report::{CheckOutcome, Table, VerificationReport};
pub use residual::{weak_residual, TestFunction, WeakResidual, RESIDUAL_QUAD_TOL};
