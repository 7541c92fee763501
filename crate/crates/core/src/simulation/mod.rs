//! Simulation harness: scenarios, replicated trials and operating
//! characteristics.

pub mod metrics;
pub mod runner;
pub mod scenario;

pub use metrics::{
    discrete_pct_selection, pointwise_bias, pointwise_pct_recommendation, safety_stats,
    signed_min_distance, Contour, OperatingCharacteristics, PctRecommendation, SafetyStats,
    SelectionPct,
};
pub use runner::{
    characteristics, effective_config, run_study, run_trial, run_trial_with, StudyResult, StudySpec,
    TrialRun, TrialSummary,
};
pub use scenario::{make_grid_scenario, ProbTable, Scenario, Truth, WorkingModel};
