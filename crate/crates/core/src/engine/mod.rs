//! Trial engine: design configuration, dose-assignment rules and the
//! per-cohort state machine.

pub mod config;
pub mod rules;
pub mod state;

pub use config::{DesignConfig, DiscreteSelection, DoseGrid};
pub use rules::{
    apply_attribution_restriction, apply_escalation_cap, check_stopping, crm_dose_given,
    restriction_active, round_to_grid, stop_from_exceedance, StopDecision,
};
pub use state::{
    final_mtd, in_band, mtd_estimate_at, start_trial, CohortAssignment, CohortDecision,
    CohortRecord, DoseRationale, EscalationSteps, GridCell, McmcFitter, MtdEstimate,
    PointMassFitter, PosteriorFitter, PosteriorSummary, Restrictions, StopReport, TrialState,
    TrialStatus,
};
