//! Trial state and the cohort-by-cohort assignment procedure.
//!
//! Patients are treated in pairs. Cohort 1 receives the lowest combination.
//! In cohort `i >= 2` each patient takes the dose of the matching patient of
//! cohort `i - 1` (patient `2i-3` for the first slot, `2i-2` for the second)
//! and moves along one axis only:
//!
//! | cohort | first patient varies | second patient varies |
//! |--------|----------------------|-----------------------|
//! | even   | drug D1 (`x`)        | drug D2 (`y`)         |
//! | odd    | drug D2 (`y`)        | drug D1 (`x`)         |
//!
//! Each candidate passes CRM solve, attribution restriction, escalation cap
//! and, in the discrete design, grid rounding, in that order.

use serde::{Deserialize, Serialize};

use crate::dose::{Axis, StandardizedDose};
use crate::engine::config::{DesignConfig, DiscreteSelection};
use crate::engine::rules::{
    apply_attribution_restriction, apply_escalation_cap, crm_dose_given, restriction_active,
    round_to_grid, stop_from_exceedance, StopDecision,
};
use crate::error::{Error, Result};
use crate::inference::{
    posterior_median, posterior_prob_dlt_exceeds, sample_posterior, McmcDiagnostics,
};
use crate::model::{mtd_curve, mtd_solve, prob_dlt, ModelParams, MtdCurve};
use crate::outcome::{Outcome, PatientRecord};
use crate::rng::derive_seed;

/// How one patient's dose was reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscalationSteps {
    pub varying: Axis,
    /// Patient whose dose this assignment starts from.
    pub reference_patient: usize,
    /// Reference patient's dose of the varying drug.
    pub reference_dose: f64,
    pub crm: f64,
    pub after_restriction: f64,
    pub after_cap: f64,
    pub restriction_applied: bool,
    pub cap_applied: bool,
    /// Dose after grid rounding, in the discrete design.
    pub rounded: Option<f64>,
}

impl EscalationSteps {
    pub fn final_value(&self) -> f64 {
        self.rounded.unwrap_or(self.after_cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseRationale {
    /// 1-based patient number.
    pub patient: usize,
    pub dose: StandardizedDose,
    /// `None` for the first cohort, which starts at the lowest combination.
    pub steps: Option<EscalationSteps>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortAssignment {
    /// 1-based cohort index.
    pub cohort: usize,
    pub patient_a: StandardizedDose,
    pub patient_b: StandardizedDose,
    pub rationale: [DoseRationale; 2],
}

impl CohortAssignment {
    pub fn doses(&self) -> [StandardizedDose; 2] {
        [self.patient_a, self.patient_b]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortRecord {
    pub assignment: CohortAssignment,
    pub outcomes: [Outcome; 2],
}

impl CohortRecord {
    pub fn records(&self) -> [PatientRecord; 2] {
        let [a, b] = self.assignment.doses();
        [
            PatientRecord::new(a, self.outcomes[0]),
            PatientRecord::new(b, self.outcomes[1]),
        ]
    }
}

/// Drugs whose escalation is blocked for the next cohort.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restrictions {
    pub drug1: bool,
    pub drug2: bool,
}

impl Restrictions {
    pub fn from_cohort(records: &[PatientRecord]) -> Self {
        Restrictions {
            drug1: restriction_active(Axis::Drug1, records),
            drug2: restriction_active(Axis::Drug2, records),
        }
    }
}

/// What the engine keeps from a posterior refit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub medians: ModelParams,
    /// Posterior probability that the lowest combination's DLT risk is at
    /// least `theta + xi1`.
    pub stop_exceedance: f64,
    pub n_draws: usize,
    pub diagnostics: Option<McmcDiagnostics>,
}

/// Produces the posterior summary after each cohort.
pub trait PosteriorFitter {
    fn fit(&self, data: &[PatientRecord], config: &DesignConfig, cohort: usize) -> Result<PosteriorSummary>;
}

/// MCMC refit; the chain seed is derived from the design seed and cohort.
#[derive(Debug, Clone, Copy, Default)]
pub struct McmcFitter;

impl PosteriorFitter for McmcFitter {
    fn fit(&self, data: &[PatientRecord], config: &DesignConfig, cohort: usize) -> Result<PosteriorSummary> {
        let mcmc = config.mcmc.with_seed(derive_seed(config.seed, cohort as u64));
        let samples = sample_posterior(data, &config.prior, &mcmc)?;
        let medians = posterior_median(&samples)?;
        let stop_exceedance =
            posterior_prob_dlt_exceeds(&samples, config.lowest_dose(), config.theta + config.xi1)?;
        Ok(PosteriorSummary {
            medians,
            stop_exceedance,
            n_draws: samples.len(),
            diagnostics: Some(samples.diagnostics),
        })
    }
}

/// A degenerate posterior concentrated on fixed parameters.
#[derive(Debug, Clone, Copy)]
pub struct PointMassFitter(pub ModelParams);

impl PosteriorFitter for PointMassFitter {
    fn fit(&self, _data: &[PatientRecord], config: &DesignConfig, _cohort: usize) -> Result<PosteriorSummary> {
        let risk = prob_dlt(config.lowest_dose(), &self.0);
        Ok(PosteriorSummary {
            medians: self.0,
            stop_exceedance: if risk >= config.theta + config.xi1 { 1.0 } else { 0.0 },
            n_draws: 1,
            diagnostics: None,
        })
    }
}

/// A grid combination in a discrete MTD recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub ix: usize,
    pub iy: usize,
    pub dose: StandardizedDose,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MtdEstimate {
    Curve { curve: MtdCurve },
    Set { cells: Vec<GridCell> },
    StoppedForSafety { reason: String },
}

impl MtdEstimate {
    pub fn curve(&self) -> Option<&MtdCurve> {
        match self {
            MtdEstimate::Curve { curve } => Some(curve),
            _ => None,
        }
    }

    pub fn cells(&self) -> &[GridCell] {
        match self {
            MtdEstimate::Set { cells } => cells,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopReport {
    pub reason: String,
    pub exceedance: f64,
    pub medians: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialStatus {
    Enrolling,
    Stopped(StopReport),
    Completed,
}

/// Result of recording a cohort's outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum CohortDecision {
    Assigned { assignment: CohortAssignment },
    Stopped { report: StopReport },
    Completed { estimate: MtdEstimate },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialState {
    pub config: DesignConfig,
    pub cohorts: Vec<CohortRecord>,
    pub pending: Option<CohortAssignment>,
    pub status: TrialStatus,
    pub restrictions: Restrictions,
    pub posterior: Option<PosteriorSummary>,
    pub final_estimate: Option<MtdEstimate>,
}

/// Opens a trial: both patients of cohort 1 get the lowest combination.
pub fn start_trial(config: DesignConfig) -> Result<(TrialState, CohortAssignment)> {
    config.validate()?;
    let start = config.lowest_dose();
    let assignment = CohortAssignment {
        cohort: 1,
        patient_a: start,
        patient_b: start,
        rationale: [
            DoseRationale {
                patient: 1,
                dose: start,
                steps: None,
            },
            DoseRationale {
                patient: 2,
                dose: start,
                steps: None,
            },
        ],
    };
    let state = TrialState {
        config,
        cohorts: Vec::new(),
        pending: Some(assignment),
        status: TrialStatus::Enrolling,
        restrictions: Restrictions::default(),
        posterior: None,
        final_estimate: None,
    };
    Ok((state, assignment))
}

impl TrialState {
    pub fn records(&self) -> Vec<PatientRecord> {
        self.cohorts.iter().flat_map(|c| c.records()).collect()
    }

    pub fn patients_treated(&self) -> usize {
        2 * self.cohorts.len()
    }

    pub fn dlt_count(&self) -> usize {
        self.cohorts
            .iter()
            .flat_map(|c| c.outcomes)
            .filter(Outcome::is_dlt)
            .count()
    }

    pub fn is_open(&self) -> bool {
        matches!(self.status, TrialStatus::Enrolling)
    }

    /// Index of the cohort awaiting outcomes.
    pub fn pending_cohort(&self) -> Option<usize> {
        self.pending.map(|a| a.cohort)
    }

    fn check_pending(&self, cohort: usize) -> Result<CohortAssignment> {
        if !self.is_open() {
            return Err(Error::TrialClosed(match &self.status {
                TrialStatus::Stopped(r) => format!("stopped: {}", r.reason),
                _ => "completed".into(),
            }));
        }
        let pending = self
            .pending
            .ok_or_else(|| Error::Usage("no cohort awaiting outcomes".into()))?;
        if pending.cohort != cohort {
            return Err(Error::WrongCohort {
                expected: pending.cohort,
                got: cohort,
            });
        }
        Ok(pending)
    }

    /// Records the pending cohort's outcomes, refits the posterior with
    /// `fitter` and decides how the trial continues.
    pub fn next_cohort(
        &mut self,
        cohort: usize,
        outcomes: [Outcome; 2],
        fitter: &dyn PosteriorFitter,
    ) -> Result<CohortDecision> {
        let pending = self.check_pending(cohort)?;
        let mut data = self.records();
        data.extend(CohortRecord {
            assignment: pending,
            outcomes,
        }
        .records());
        let summary = fitter.fit(&data, &self.config, cohort)?;
        self.advance(cohort, outcomes, summary)
    }

    /// Deterministic part of [`TrialState::next_cohort`]: everything after the
    /// refit. Replaying a log feeds recorded summaries through here.
    pub fn advance(
        &mut self,
        cohort: usize,
        outcomes: [Outcome; 2],
        summary: PosteriorSummary,
    ) -> Result<CohortDecision> {
        let pending = self.check_pending(cohort)?;
        let record = CohortRecord {
            assignment: pending,
            outcomes,
        };
        let mut next = self.clone();
        next.cohorts.push(record);
        next.pending = None;
        next.restrictions = Restrictions::from_cohort(&record.records());
        let stop: StopDecision = stop_from_exceedance(summary.stop_exceedance, next.config.xi2);
        let medians = summary.medians;
        next.posterior = Some(summary);

        let decision = if stop.stop {
            let report = StopReport {
                reason: format!(
                    "posterior probability {:.3} that the lowest combination's DLT risk is at least {:.2} exceeds {:.2}",
                    stop.exceedance,
                    next.config.theta + next.config.xi1,
                    next.config.xi2
                ),
                exceedance: stop.exceedance,
                medians,
            };
            next.status = TrialStatus::Stopped(report.clone());
            next.final_estimate = Some(MtdEstimate::StoppedForSafety {
                reason: report.reason.clone(),
            });
            CohortDecision::Stopped { report }
        } else if next.patients_treated() >= next.config.n_max {
            let estimate = final_mtd(&next)?;
            next.status = TrialStatus::Completed;
            next.final_estimate = Some(estimate.clone());
            CohortDecision::Completed { estimate }
        } else {
            let assignment = next.assign(&medians)?;
            next.pending = Some(assignment);
            CohortDecision::Assigned { assignment }
        };
        *self = next;
        Ok(decision)
    }

    /// Builds the assignment for the cohort after the last completed one.
    fn assign(&self, medians: &ModelParams) -> Result<CohortAssignment> {
        let previous = self
            .cohorts
            .last()
            .ok_or_else(|| Error::Usage("no completed cohort to escalate from".into()))?;
        let cohort = previous.assignment.cohort + 1;
        let prev_records = previous.records();
        let even = cohort % 2 == 0;
        let mut rationale = [DoseRationale {
            patient: 0,
            dose: StandardizedDose::new(0.0, 0.0),
            steps: None,
        }; 2];
        for slot in 0..2 {
            let varying = match (even, slot) {
                (true, 0) | (false, 1) => Axis::Drug1,
                _ => Axis::Drug2,
            };
            let reference = previous.assignment.doses()[slot];
            let reference_patient = 2 * (cohort - 1) - 1 + slot;
            rationale[slot] = self.step_dose(
                medians,
                varying,
                reference,
                reference_patient,
                &prev_records,
                2 * cohort - 1 + slot,
            );
        }
        Ok(CohortAssignment {
            cohort,
            patient_a: rationale[0].dose,
            patient_b: rationale[1].dose,
            rationale,
        })
    }

    fn step_dose(
        &self,
        medians: &ModelParams,
        varying: Axis,
        reference: StandardizedDose,
        reference_patient: usize,
        prev_records: &[PatientRecord],
        patient: usize,
    ) -> DoseRationale {
        let cfg = &self.config;
        let bounds = cfg.bounds(varying);
        let held = reference.get(varying.other());
        let reference_dose = reference.get(varying);

        let crm = crm_dose_given(medians, held, varying, cfg.theta, bounds);
        let after_restriction = apply_attribution_restriction(crm, varying, prev_records, reference_dose);
        let after_cap = apply_escalation_cap(after_restriction, reference_dose, cfg.cap_fraction, bounds);
        let rounded = cfg
            .grid
            .as_ref()
            .map(|g| round_to_grid(after_cap, g.levels(varying)));
        let steps = EscalationSteps {
            varying,
            reference_patient,
            reference_dose,
            crm,
            after_restriction,
            after_cap,
            restriction_applied: after_restriction < crm,
            cap_applied: after_cap < after_restriction,
            rounded,
        };
        DoseRationale {
            patient,
            dose: reference.with(varying, steps.final_value()),
            steps: Some(steps),
        }
    }
}

/// The MTD estimate at the current posterior medians.
pub fn final_mtd(state: &TrialState) -> Result<MtdEstimate> {
    if let TrialStatus::Stopped(report) = &state.status {
        return Ok(MtdEstimate::StoppedForSafety {
            reason: report.reason.clone(),
        });
    }
    let summary = state
        .posterior
        .as_ref()
        .ok_or_else(|| Error::Usage("no posterior available yet".into()))?;
    mtd_estimate_at(&state.config, &summary.medians)
}

/// Continuous designs return the contour. Discrete designs return either the
/// grid cells whose estimated risk is within `delta_select` of `theta`, or
/// the cells the estimated contour rounds to.
pub fn mtd_estimate_at(config: &DesignConfig, params: &ModelParams) -> Result<MtdEstimate> {
    let curve = || mtd_curve(params, config.theta, config.curve_points, config.x_bounds, config.y_bounds);
    let Some(grid) = &config.grid else {
        return Ok(MtdEstimate::Curve { curve: curve()? });
    };
    let cell = |ix: usize, iy: usize| {
        let dose = StandardizedDose::new(grid.x_levels[ix], grid.y_levels[iy]);
        GridCell {
            ix,
            iy,
            dose,
            prob: prob_dlt(dose, params),
        }
    };
    let cells = match config.discrete_selection {
        DiscreteSelection::Band => grid
            .cells()
            .map(|(ix, iy, _)| cell(ix, iy))
            .filter(|c| in_band(c.prob, config.theta, config.delta_select))
            .collect(),
        DiscreteSelection::CurveRounding => {
            let n = config.curve_points;
            let mut points = curve()?.polyline(n);
            for y in config.y_bounds.levels(n) {
                if let Some(sol) = mtd_solve(y, Axis::Drug2, params, config.theta, config.x_bounds) {
                    points.push((sol.dose, y));
                }
            }
            let nearest = |levels: &[f64], v: f64| {
                let level = round_to_grid(v, levels);
                levels.iter().position(|&l| l == level).unwrap_or(0)
            };
            let mut idx: Vec<(usize, usize)> = points
                .into_iter()
                .map(|(x, y)| (nearest(&grid.x_levels, x), nearest(&grid.y_levels, y)))
                .collect();
            idx.sort_unstable();
            idx.dedup();
            idx.into_iter().map(|(ix, iy)| cell(ix, iy)).collect()
        }
    };
    Ok(MtdEstimate::Set { cells })
}

/// `|prob - theta| <= delta`, allowing for representation error in
/// tabulated probabilities such as `0.40 - 0.30`.
pub fn in_band(prob: f64, theta: f64, delta: f64) -> bool {
    (prob - theta).abs() <= delta + 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::config::DoseGrid;
    use crate::model::AttributionFlags;

    fn unit_model() -> PointMassFitter {
        PointMassFitter(ModelParams::new(1.0, 1.0, 0.0, 0.5))
    }

    fn uncapped() -> DesignConfig {
        DesignConfig {
            cap_fraction: 1.0,
            ..DesignConfig::default()
        }
    }

    const QUIET: [Outcome; 2] = [Outcome::NoDlt, Outcome::NoDlt];

    #[test]
    fn first_cohort_at_lowest_dose() {
        let (_, a) = start_trial(DesignConfig::default()).unwrap();
        assert_eq!(a.patient_a, StandardizedDose::new(0.05, 0.05));
        assert_eq!(a.patient_b, StandardizedDose::new(0.05, 0.05));

        let grid = DoseGrid {
            x_levels: vec![0.05, 0.1333, 0.2167, 0.30],
            y_levels: vec![0.05, 0.1333, 0.2167, 0.30],
        };
        let cfg = DesignConfig {
            grid: Some(grid),
            ..DesignConfig::default()
        };
        let (_, a) = start_trial(cfg).unwrap();
        assert_eq!(a.patient_a, StandardizedDose::new(0.05, 0.05));

        let b = crate::dose::DoseBounds { min: 0.1, max: 0.4 };
        let cfg = DesignConfig {
            x_bounds: b,
            y_bounds: b,
            ..DesignConfig::default()
        };
        let (_, a) = start_trial(cfg).unwrap();
        assert_eq!(a.patient_b, StandardizedDose::new(0.1, 0.1));
    }

    #[test]
    fn second_cohort_closed_form() {
        let (mut st, _) = start_trial(uncapped()).unwrap();
        let d = st.next_cohort(1, QUIET, &unit_model()).unwrap();
        let CohortDecision::Assigned { assignment } = d else {
            panic!("{d:?}")
        };
        let target = 0.25 / 0.95;
        assert_eq!(assignment.cohort, 2);
        assert!((assignment.patient_a.x - target).abs() < 1e-12);
        assert_eq!(assignment.patient_a.y, 0.05);
        assert_eq!(assignment.patient_b.x, 0.05);
        assert!((assignment.patient_b.y - target).abs() < 1e-12);
        let steps = assignment.rationale[0].steps.unwrap();
        assert_eq!(steps.reference_patient, 1);
        assert_eq!(assignment.rationale[1].steps.unwrap().reference_patient, 2);
        assert_eq!(assignment.rationale[0].patient, 3);
    }

    #[test]
    fn attributed_dlt_blocks_escalation() {
        let (mut st, _) = start_trial(uncapped()).unwrap();
        let outcomes = [Outcome::Attributed(AttributionFlags::DRUG1), Outcome::NoDlt];
        let CohortDecision::Assigned { assignment } = st.next_cohort(1, outcomes, &unit_model()).unwrap() else {
            panic!()
        };
        assert_eq!(assignment.patient_a.x, 0.05);
        assert!(assignment.rationale[0].steps.unwrap().restriction_applied);
        // drug D2 is free to escalate
        assert!(assignment.patient_b.y > 0.26);
        assert!(st.restrictions.drug1 && !st.restrictions.drug2);
    }

    #[test]
    fn cap_limits_escalation() {
        let (mut st, _) = start_trial(DesignConfig::default()).unwrap();
        let CohortDecision::Assigned { assignment } = st.next_cohort(1, QUIET, &unit_model()).unwrap() else {
            panic!()
        };
        assert!((assignment.patient_a.x - 0.10).abs() < 1e-12);
        assert_eq!(assignment.patient_a.y, 0.05);
        assert!(assignment.rationale[0].steps.unwrap().cap_applied);
    }

    #[test]
    fn odd_cohort_swaps_axes() {
        let (mut st, _) = start_trial(DesignConfig::default()).unwrap();
        st.next_cohort(1, QUIET, &unit_model()).unwrap();
        let CohortDecision::Assigned { assignment } = st.next_cohort(2, QUIET, &unit_model()).unwrap() else {
            panic!()
        };
        let prev = st.cohorts[1].assignment;
        assert_eq!(assignment.cohort, 3);
        // patient 5 keeps x of patient 3, patient 6 keeps y of patient 4
        assert_eq!(assignment.patient_a.x, prev.patient_a.x);
        assert_eq!(assignment.patient_b.y, prev.patient_b.y);
        assert_eq!(assignment.rationale[0].steps.unwrap().varying, Axis::Drug2);
        assert_eq!(assignment.rationale[1].steps.unwrap().varying, Axis::Drug1);
    }

    #[test]
    fn wrong_cohort_is_rejected() {
        let (mut st, _) = start_trial(DesignConfig::default()).unwrap();
        let before = st.clone();
        let err = st.next_cohort(2, QUIET, &unit_model()).unwrap_err();
        assert_eq!(err, Error::WrongCohort { expected: 1, got: 2 });
        assert_eq!(st, before);
    }

    #[test]
    fn toxic_point_mass_stops() {
        let (mut st, _) = start_trial(DesignConfig::default()).unwrap();
        let toxic = PointMassFitter(ModelParams::new(0.2, 0.2, 0.0, 0.5));
        let d = st.next_cohort(1, [Outcome::Unattributed; 2], &toxic).unwrap();
        assert!(matches!(d, CohortDecision::Stopped { .. }));
        assert!(!st.is_open());
        assert!(matches!(final_mtd(&st).unwrap(), MtdEstimate::StoppedForSafety { .. }));
        assert!(matches!(
            st.next_cohort(2, QUIET, &toxic),
            Err(Error::TrialClosed(_))
        ));
    }

    #[test]
    fn completes_at_n_max() {
        let cfg = DesignConfig {
            n_max: 6,
            ..DesignConfig::default()
        };
        let (mut st, _) = start_trial(cfg).unwrap();
        st.next_cohort(1, QUIET, &unit_model()).unwrap();
        st.next_cohort(2, QUIET, &unit_model()).unwrap();
        let d = st.next_cohort(3, QUIET, &unit_model()).unwrap();
        let CohortDecision::Completed { estimate } = d else {
            panic!("{d:?}")
        };
        let curve = estimate.curve().unwrap();
        for p in &curve.points {
            if let Some(y) = p.y {
                assert!((y - (0.3 - p.x) / (1.0 - p.x)).abs() < 1e-12);
            }
        }
        assert_eq!(st.status, TrialStatus::Completed);
        assert!(st.pending.is_none());
    }

    #[test]
    fn discrete_estimate_is_band() {
        let levels = crate::dose::DoseBounds::default().levels(4);
        let cfg = DesignConfig {
            grid: Some(DoseGrid {
                x_levels: levels.clone(),
                y_levels: levels,
            }),
            ..DesignConfig::default()
        };
        let est = mtd_estimate_at(&cfg, &ModelParams::new(1.1, 1.1, 1.0, 0.0)).unwrap();
        assert_eq!(est.cells().len(), 10);
        assert!(est.cells().iter().all(|c| (c.prob - 0.3).abs() <= 0.1));
    }

    #[test]
    fn curve_rounding_estimate() {
        let levels = crate::dose::DoseBounds::default().levels(4);
        let cfg = DesignConfig {
            grid: Some(DoseGrid {
                x_levels: levels.clone(),
                y_levels: levels,
            }),
            discrete_selection: DiscreteSelection::CurveRounding,
            ..DesignConfig::default()
        };
        // contour y = (0.3 - x) / (1 - x) on [0.05, 0.3]
        let est = mtd_estimate_at(&cfg, &ModelParams::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        let idx: Vec<(usize, usize)> = est.cells().iter().map(|c| (c.ix, c.iy)).collect();
        assert_eq!(idx, vec![(0, 2), (0, 3), (1, 1), (1, 2), (2, 0), (2, 1), (3, 0)]);
    }
}
