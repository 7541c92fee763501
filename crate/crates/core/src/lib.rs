//! Bayesian dose finding for two-drug combinations with partial toxicity
//! attribution.
//!
//! The DLT risk of a combination `(x, y)` of standardized doses follows a
//! Gumbel-type copula of power marginals `x^alpha` and `y^beta` with
//! interaction `gamma`. Some DLTs are attributed by the clinician to one drug
//! or both; `eta` is the probability that a DLT gets attributed. Cohorts of
//! two patients are escalated along alternating axes with a univariate CRM
//! step at the posterior medians.

pub mod dose;
pub mod engine;
pub mod error;
pub mod inference;
pub mod model;
pub mod outcome;
pub mod rng;
pub mod simulation;

pub use dose::{Axis, DoseBounds, StandardizedDose};
pub use engine::{CohortAssignment, CohortDecision, DesignConfig, DoseGrid, MtdEstimate, TrialState};
pub use error::{Error, Result};
pub use inference::{McmcConfig, PosteriorSamples, PriorSpec};
pub use model::{AttributionFlags, ModelParams, MtdCurve};
pub use outcome::{Outcome, PatientRecord};
pub use simulation::{Scenario, StudySpec};
