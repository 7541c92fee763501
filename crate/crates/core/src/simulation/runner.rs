//! Simulated trials and replicated studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    start_trial, CohortDecision, CohortRecord, DesignConfig, McmcFitter, MtdEstimate, PosteriorFitter,
    TrialState, TrialStatus,
};
use crate::error::{Error, Result};
use crate::model::{ModelParams, MtdCurve};
use crate::rng::{derive_seed, stream_rng};
use crate::simulation::metrics::{
    discrete_pct_selection, pointwise_bias, pointwise_pct_recommendation, safety_stats,
    OperatingCharacteristics, PctRecommendation,
};
use crate::simulation::scenario::Scenario;

/// Stream reserved for outcome generation within a trial.
const OUTCOME_STREAM: u64 = 0;
/// Stream from which the trial's posterior-refit seed is drawn.
const DESIGN_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub replicate: usize,
    pub seed: u64,
    pub patients: usize,
    pub dlts: usize,
    pub stopped: bool,
    pub cohorts: usize,
    pub medians: Option<ModelParams>,
    pub estimate: MtdEstimate,
}

impl TrialSummary {
    pub fn dlt_rate(&self) -> f64 {
        if self.patients == 0 {
            0.0
        } else {
            self.dlts as f64 / self.patients as f64
        }
    }

    /// Grid cells of a discrete recommendation.
    pub fn recommended_cells(&self) -> Vec<(usize, usize)> {
        self.estimate.cells().iter().map(|c| (c.ix, c.iy)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub summary: TrialSummary,
    pub state: TrialState,
}

/// The design actually run against `scenario`: tabulated truths supply the
/// dose grid when the configuration has none.
pub fn effective_config(scenario: &Scenario, config: &DesignConfig) -> DesignConfig {
    let mut cfg = config.clone();
    if cfg.grid.is_none() {
        cfg.grid = scenario.grid();
    }
    cfg
}

pub fn run_trial(scenario: &Scenario, config: &DesignConfig, seed: u64) -> Result<TrialRun> {
    run_trial_with(scenario, config, seed, &McmcFitter)
}

/// Runs one trial to completion with outcomes drawn from `scenario`.
pub fn run_trial_with(
    scenario: &Scenario,
    config: &DesignConfig,
    seed: u64,
    fitter: &dyn PosteriorFitter,
) -> Result<TrialRun> {
    scenario.validate()?;
    let mut cfg = effective_config(scenario, config);
    cfg.seed = derive_seed(seed, DESIGN_STREAM);
    let mut rng = stream_rng(seed, OUTCOME_STREAM);
    let (mut state, mut assignment) = start_trial(cfg)?;
    loop {
        let [da, db] = assignment.doses();
        let outcomes = [
            scenario.generate_outcome(da, &mut rng)?.outcome,
            scenario.generate_outcome(db, &mut rng)?.outcome,
        ];
        match state.next_cohort(assignment.cohort, outcomes, fitter)? {
            CohortDecision::Assigned { assignment: next } => assignment = next,
            CohortDecision::Stopped { .. } | CohortDecision::Completed { .. } => break,
        }
    }
    let estimate = state
        .final_estimate
        .clone()
        .ok_or_else(|| Error::Usage("trial ended without an estimate".into()))?;
    let summary = TrialSummary {
        replicate: 0,
        seed,
        patients: state.patients_treated(),
        dlts: state.dlt_count(),
        stopped: matches!(state.status, TrialStatus::Stopped(_)),
        cohorts: state.cohorts.len(),
        medians: state.posterior.as_ref().map(|p| p.medians),
        estimate,
    };
    Ok(TrialRun { summary, state })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub replicates: usize,
    pub root_seed: u64,
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
    /// Keep every trial's cohort trace.
    pub keep_traces: bool,
    /// Points of the uniform `x` grid for the pointwise metrics.
    pub x_grid_points: usize,
    /// Discretization of each estimated curve in the distance metrics.
    pub curve_points: usize,
    pub p_values: Vec<f64>,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec {
            replicates: 200,
            root_seed: 1,
            threads: 0,
            keep_traces: false,
            x_grid_points: 51,
            curve_points: 1000,
            p_values: vec![0.1, 0.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub scenario: Scenario,
    pub config: DesignConfig,
    pub spec: StudySpec,
    pub characteristics: OperatingCharacteristics,
    pub trials: Vec<TrialSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<Vec<CohortRecord>>>,
}

/// Runs `spec.replicates` independent trials. Replicate `r` uses the seed
/// `derive_seed(root_seed, r)`, so results do not depend on thread count.
pub fn run_study(scenario: &Scenario, config: &DesignConfig, spec: &StudySpec) -> Result<StudyResult> {
    if spec.replicates == 0 {
        return Err(Error::config("replicates", "must be at least 1"));
    }
    scenario.validate()?;
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    let runs: Vec<TrialRun> = pool.install(|| {
        (0..spec.replicates)
            .into_par_iter()
            .map(|r| {
                let mut run = run_trial(scenario, config, derive_seed(spec.root_seed, r as u64))?;
                run.summary.replicate = r;
                Ok(run)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let characteristics = characteristics(scenario, config, spec, runs.iter().map(|r| &r.summary))?;
    let traces = spec
        .keep_traces
        .then(|| runs.iter().map(|r| r.state.cohorts.clone()).collect());
    Ok(StudyResult {
        scenario: scenario.clone(),
        config: config.clone(),
        spec: spec.clone(),
        characteristics,
        trials: runs.into_iter().map(|r| r.summary).collect(),
        traces,
    })
}

/// Aggregates trial summaries into operating characteristics.
pub fn characteristics<'a>(
    scenario: &Scenario,
    config: &DesignConfig,
    spec: &StudySpec,
    trials: impl IntoIterator<Item = &'a TrialSummary>,
) -> Result<OperatingCharacteristics> {
    let trials: Vec<&TrialSummary> = trials.into_iter().collect();
    let m = trials.len();
    let counts: Vec<(usize, usize)> = trials.iter().map(|t| (t.dlts, t.patients)).collect();
    let safety = safety_stats(&counts, config.theta);
    let stopped = trials.iter().filter(|t| t.stopped).count();

    let cfg = effective_config(scenario, config);
    let mut x_grid = Vec::new();
    let mut bias = Vec::new();
    let mut pct = Vec::new();
    if cfg.grid.is_none() {
        if let Some(truth) = scenario.true_curve(cfg.theta, cfg.curve_points, cfg.x_bounds, cfg.y_bounds)? {
            x_grid = cfg.x_bounds.levels(spec.x_grid_points);
            let estimates: Vec<Option<&MtdCurve>> = trials
                .iter()
                .map(|t| t.estimate.curve().filter(|c| !c.is_empty()))
                .collect();
            bias = pointwise_bias(&truth, &estimates, &x_grid, spec.curve_points);
            pct = spec
                .p_values
                .iter()
                .map(|&p| PctRecommendation {
                    p,
                    values: pointwise_pct_recommendation(&truth, &estimates, &x_grid, p, spec.curve_points),
                })
                .collect();
        }
    }
    let discrete_pct_selection = match &cfg.grid {
        Some(grid) => {
            let truth = scenario.true_mtd_set(grid, cfg.theta, cfg.delta_select)?;
            let recs: Vec<Vec<(usize, usize)>> = trials.iter().map(|t| t.recommended_cells()).collect();
            Some(discrete_pct_selection(&recs, &truth))
        }
        None => None,
    };
    Ok(OperatingCharacteristics {
        replicates: m,
        avg_pct_dlt: safety.avg_pct_dlt,
        pct_trials_rate_gt_theta_p05: safety.pct_trials_rate_gt_theta_p05,
        pct_trials_rate_gt_theta_p10: safety.pct_trials_rate_gt_theta_p10,
        pct_stopped: 100.0 * stopped as f64 / m.max(1) as f64,
        x_grid,
        pointwise_bias: bias,
        pointwise_pct_recommendation: pct,
        discrete_pct_selection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::PointMassFitter;
    use crate::inference::McmcConfig;
    use crate::simulation::scenario::{ProbTable, WorkingModel};

    fn quick() -> DesignConfig {
        DesignConfig {
            mcmc: McmcConfig {
                chain_length: 400,
                burn_in: 100,
                ..McmcConfig::default()
            },
            ..DesignConfig::default()
        }
    }

    fn flat(p: f64) -> Scenario {
        let levels = crate::dose::DoseBounds::default().levels(4);
        Scenario::prob_table(
            "flat",
            ProbTable {
                x_levels: levels.clone(),
                y_levels: levels,
                probs: vec![vec![p; 4]; 4],
            },
            0.3,
        )
    }

    #[test]
    fn harmless_scenario_runs_to_n_max() {
        let run = run_trial(&flat(0.0), &quick(), 9).unwrap();
        assert_eq!(run.summary.dlts, 0);
        assert!(!run.summary.stopped);
        assert_eq!(run.summary.cohorts, 20);
        assert_eq!(run.summary.patients, 40);
    }

    #[test]
    fn same_seed_same_trace() {
        let s = Scenario::working_model("s2", WorkingModel::new(1.1, 1.1, 1.0), 0.25);
        let cfg = DesignConfig {
            n_max: 12,
            ..quick()
        };
        let a = run_trial(&s, &cfg, 42).unwrap();
        let b = run_trial(&s, &cfg, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn point_mass_fitter_drives_trial() {
        let s = Scenario::working_model("s2", WorkingModel::new(1.1, 1.1, 1.0), 0.0);
        let fitter = PointMassFitter(ModelParams::new(1.1, 1.1, 1.0, 0.0));
        let run = run_trial_with(&s, &DesignConfig::default(), 3, &fitter).unwrap();
        assert_eq!(run.summary.patients, 40);
        assert!(run.summary.estimate.curve().is_some());
    }

    #[test]
    fn study_independent_of_threads() {
        let cfg = DesignConfig {
            n_max: 8,
            ..quick()
        };
        let s = Scenario::working_model("s1", WorkingModel::new(0.9, 0.9, 1.0), 0.1);
        let one = StudySpec {
            replicates: 6,
            root_seed: 5,
            threads: 1,
            ..StudySpec::default()
        };
        let three = StudySpec { threads: 3, ..one.clone() };
        let a = run_study(&s, &cfg, &one).unwrap();
        let b = run_study(&s, &cfg, &three).unwrap();
        assert_eq!(a.trials, b.trials);
        assert_eq!(a.characteristics, b.characteristics);
        assert_eq!(a.characteristics.x_grid.len(), 51);
        assert!(a.characteristics.discrete_pct_selection.is_none());
    }

    #[test]
    fn discrete_study_reports_selection() {
        let cfg = DesignConfig {
            n_max: 8,
            ..quick()
        };
        let spec = StudySpec {
            replicates: 3,
            ..StudySpec::default()
        };
        let res = run_study(&flat(0.3), &cfg, &spec).unwrap();
        let sel = res.characteristics.discrete_pct_selection.unwrap();
        assert!((0.0..=100.0).contains(&sel.all));
        assert!(res.characteristics.x_grid.is_empty());
    }

    #[test]
    fn zero_replicates_rejected() {
        let spec = StudySpec {
            replicates: 0,
            ..StudySpec::default()
        };
        assert!(run_study(&flat(0.1), &quick(), &spec).is_err());
    }
}
