//! Simulated trials written in the event-log format.

use std::sync::Mutex;

use copula_crm::engine::{start_trial, PosteriorFitter, PosteriorSummary};
use copula_crm::simulation::{run_trial_with, TrialRun};
use copula_crm::{DesignConfig, Error, PatientRecord, Scenario};

use crate::events::{decision_payload, EventPayload, TrialEvent};

struct Recording<'a> {
    inner: &'a dyn PosteriorFitter,
    fits: Mutex<Vec<PosteriorSummary>>,
}

impl PosteriorFitter for Recording<'_> {
    fn fit(&self, data: &[PatientRecord], config: &DesignConfig, cohort: usize) -> copula_crm::Result<PosteriorSummary> {
        let s = self.inner.fit(data, config, cohort)?;
        self.fits.lock().unwrap_or_else(|e| e.into_inner()).push(s.clone());
        Ok(s)
    }
}

/// Runs one simulated trial and returns it with its event log. Timestamps
/// are zero so the log is reproducible from the seed.
pub fn simulated_log(
    scenario: &Scenario,
    config: &DesignConfig,
    seed: u64,
    trial_id: &str,
    fitter: &dyn PosteriorFitter,
) -> copula_crm::Result<(TrialRun, Vec<TrialEvent>)> {
    let rec = Recording {
        inner: fitter,
        fits: Mutex::new(Vec::new()),
    };
    let run = run_trial_with(scenario, config, seed, &rec)?;
    let fits = rec.fits.into_inner().unwrap_or_else(|e| e.into_inner());

    let (mut state, opening) = start_trial(run.state.config.clone())?;
    let mut payloads = vec![
        EventPayload::TrialCreated {
            trial_id: trial_id.to_string(),
            label: Some(scenario.label.clone()),
            config: run.state.config.clone(),
        },
        EventPayload::CohortAssigned { assignment: opening },
    ];
    for (record, summary) in run.state.cohorts.iter().zip(fits) {
        let cohort = record.assignment.cohort;
        let decision = state.advance(cohort, record.outcomes, summary.clone())?;
        payloads.push(EventPayload::OutcomesRecorded {
            cohort,
            outcomes: record.outcomes,
        });
        payloads.push(EventPayload::PosteriorRefit { cohort, summary });
        payloads.push(decision_payload(&decision));
    }
    if state != run.state {
        return Err(Error::Usage("recorded refits do not reproduce the trial".into()));
    }
    let events = payloads
        .into_iter()
        .enumerate()
        .map(|(i, payload)| TrialEvent {
            event_id: i as u64 + 1,
            timestamp: 0,
            payload,
        })
        .collect();
    Ok((run, events))
}
