//! Append-only trial events and their replay.

use copula_crm::engine::{
    start_trial, CohortAssignment, CohortDecision, MtdEstimate, PosteriorSummary, StopReport, TrialState,
};
use copula_crm::{DesignConfig, Outcome};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEvent {
    /// Dense per trial, starting at 1.
    pub event_id: u64,
    /// Unix time in milliseconds.
    pub timestamp: u64,
    #[serde(flatten)]
    pub payload: EventPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventPayload {
    TrialCreated {
        trial_id: String,
        label: Option<String>,
        config: DesignConfig,
    },
    CohortAssigned {
        assignment: CohortAssignment,
    },
    OutcomesRecorded {
        cohort: usize,
        outcomes: [Outcome; 2],
    },
    PosteriorRefit {
        cohort: usize,
        summary: PosteriorSummary,
    },
    TrialStopped {
        report: StopReport,
    },
    TrialCompleted {
        estimate: MtdEstimate,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::TrialCreated { .. } => "trial_created",
            EventPayload::CohortAssigned { .. } => "cohort_assigned",
            EventPayload::OutcomesRecorded { .. } => "outcomes_recorded",
            EventPayload::PosteriorRefit { .. } => "posterior_refit",
            EventPayload::TrialStopped { .. } => "trial_stopped",
            EventPayload::TrialCompleted { .. } => "trial_completed",
        }
    }
}

/// The payload that records a decision.
pub fn decision_payload(decision: &CohortDecision) -> EventPayload {
    match decision {
        CohortDecision::Assigned { assignment } => EventPayload::CohortAssigned {
            assignment: *assignment,
        },
        CohortDecision::Stopped { report } => EventPayload::TrialStopped { report: report.clone() },
        CohortDecision::Completed { estimate } => EventPayload::TrialCompleted {
            estimate: estimate.clone(),
        },
    }
}

/// A trial rebuilt from its log.
#[derive(Debug, Clone, PartialEq)]
pub struct Replayed {
    pub trial_id: String,
    pub label: Option<String>,
    pub state: TrialState,
    pub last_decision: Option<CohortDecision>,
    /// Number of events that form complete groups. Trailing events past
    /// this point belong to an unfinished write.
    pub committed: usize,
}

/// Rebuilds a trial by feeding the logged refits back through the engine and
/// checking every logged decision against the recomputed one.
pub fn replay(events: &[TrialEvent]) -> Result<Replayed, String> {
    for (i, e) in events.iter().enumerate() {
        if e.event_id != i as u64 + 1 {
            return Err(format!("event {} has id {}", i + 1, e.event_id));
        }
    }
    let Some(first) = events.first() else {
        return Err("empty log".into());
    };
    let EventPayload::TrialCreated {
        trial_id,
        label,
        config,
    } = &first.payload
    else {
        return Err(format!("log starts with {}", first.payload.kind()));
    };
    let (mut state, opening) = start_trial(config.clone()).map_err(|e| e.to_string())?;
    let mut last_decision = None;
    let mut expected = Some(EventPayload::CohortAssigned { assignment: opening });
    let mut committed = 1;
    let mut i = 1;

    while i < events.len() {
        if let Some(want) = expected.take() {
            if events[i].payload != want {
                return Err(format!(
                    "event {} is {}, expected {}",
                    i + 1,
                    events[i].payload.kind(),
                    want.kind()
                ));
            }
            i += 1;
            committed = i;
            continue;
        }
        let EventPayload::OutcomesRecorded { cohort, outcomes } = &events[i].payload else {
            return Err(format!("event {} is {}, expected outcomes_recorded", i + 1, events[i].payload.kind()));
        };
        let Some(next) = events.get(i + 1) else {
            break;
        };
        let EventPayload::PosteriorRefit { cohort: c, summary } = &next.payload else {
            return Err(format!("event {} is {}, expected posterior_refit", i + 2, next.payload.kind()));
        };
        if c != cohort {
            return Err(format!("refit for cohort {c} follows outcomes of cohort {cohort}"));
        }
        if i + 2 >= events.len() {
            break;
        }
        let decision = state
            .advance(*cohort, *outcomes, summary.clone())
            .map_err(|e| format!("event {}: {e}", i + 1))?;
        expected = Some(decision_payload(&decision));
        last_decision = Some(decision);
        i += 2;
    }
    if let Some(want) = expected {
        return Err(format!("log ends before the {} event", want.kind()));
    }
    Ok(Replayed {
        trial_id: trial_id.clone(),
        label: label.clone(),
        state,
        last_decision,
        committed,
    })
}
