//! Trial storage: one newline-delimited JSON event log per trial.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use copula_crm::engine::{
    mtd_estimate_at, start_trial, CohortAssignment, CohortDecision, McmcFitter, MtdEstimate, PosteriorFitter,
    TrialState,
};
use copula_crm::{DesignConfig, Outcome, StandardizedDose};

use crate::error::{Result, ServiceError};
use crate::events::{decision_payload, replay, EventPayload, TrialEvent};

/// An immutable view of a trial at a committed point of its log.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub trial_id: String,
    pub label: Option<String>,
    pub state: TrialState,
    pub last_decision: Option<CohortDecision>,
    pub event_count: u64,
}

impl Snapshot {
    /// MTD estimate at the current posterior medians, or the final estimate
    /// once the trial has ended.
    pub fn mtd_preview(&self) -> Result<Option<MtdEstimate>> {
        if let Some(est) = &self.state.final_estimate {
            return Ok(Some(est.clone()));
        }
        match &self.state.posterior {
            Some(p) => Ok(Some(mtd_estimate_at(&self.state.config, &p.medians)?)),
            None => Ok(None),
        }
    }
}

struct Slot {
    path: PathBuf,
    writer: Mutex<()>,
    snapshot: RwLock<Arc<Snapshot>>,
}

impl Slot {
    fn current(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

pub struct TrialService {
    dir: PathBuf,
    fitter: Box<dyn PosteriorFitter + Send + Sync>,
    trials: Mutex<HashMap<String, Arc<Slot>>>,
    creating: Mutex<()>,
}

#[derive(Debug)]
pub struct Created {
    pub snapshot: Arc<Snapshot>,
    pub assignment: CohortAssignment,
}

#[derive(Debug)]
pub struct Recorded {
    pub snapshot: Arc<Snapshot>,
    pub decision: CohortDecision,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

impl TrialService {
    /// Opens a data directory with the MCMC fitter.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        Self::with_fitter(dir, McmcFitter)
    }

    pub fn with_fitter(dir: impl Into<PathBuf>, fitter: impl PosteriorFitter + Send + Sync + 'static) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("trials"))?;
        Ok(TrialService {
            dir,
            fitter: Box::new(fitter),
            trials: Mutex::new(HashMap::new()),
            creating: Mutex::new(()),
        })
    }

    pub fn data_dir(&self) -> &Path {
        &self.dir
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.dir.join("trials").join(format!("{id}.ndjson"))
    }

    /// Trial ids with a log on disk, sorted.
    pub fn list(&self) -> Result<Vec<String>> {
        let mut ids: Vec<String> = fs::read_dir(self.dir.join("trials"))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(".ndjson").map(str::to_string)
            })
            .collect();
        ids.sort();
        Ok(ids)
    }

    pub fn create(&self, config: DesignConfig, label: Option<String>) -> Result<Created> {
        let (state, assignment) = start_trial(config.clone())?;
        let _guard = self.creating.lock().unwrap_or_else(|e| e.into_inner());
        let mut n = self.list()?.len() + 1;
        let (id, file) = loop {
            let id = format!("trial-{n:06}");
            match OpenOptions::new().write(true).create_new(true).open(self.log_path(&id)) {
                Ok(f) => break (id, f),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => n += 1,
                Err(e) => return Err(e.into()),
            }
        };
        let events = [
            EventPayload::TrialCreated {
                trial_id: id.clone(),
                label: label.clone(),
                config,
            },
            EventPayload::CohortAssigned { assignment },
        ];
        let path = self.log_path(&id);
        if let Err(e) = write_group(file, 1, &events) {
            let _ = fs::remove_file(&path);
            return Err(e);
        }
        let snapshot = Arc::new(Snapshot {
            trial_id: id.clone(),
            label,
            state,
            last_decision: None,
            event_count: 2,
        });
        let slot = Arc::new(Slot {
            path,
            writer: Mutex::new(()),
            snapshot: RwLock::new(snapshot.clone()),
        });
        self.trials.lock().unwrap_or_else(|e| e.into_inner()).insert(id, slot);
        Ok(Created { snapshot, assignment })
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>> {
        if !valid_id(id) {
            return Err(ServiceError::NotFound(id.to_string()));
        }
        let mut trials = self.trials.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = trials.get(id) {
            return Ok(s.clone());
        }
        let path = self.log_path(id);
        if !path.exists() {
            return Err(ServiceError::NotFound(id.to_string()));
        }
        let snapshot = load(id, &path)?;
        let slot = Arc::new(Slot {
            path,
            writer: Mutex::new(()),
            snapshot: RwLock::new(Arc::new(snapshot)),
        });
        trials.insert(id.to_string(), slot.clone());
        Ok(slot)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Snapshot>> {
        Ok(self.slot(id)?.current())
    }

    pub fn events(&self, id: &str) -> Result<Vec<TrialEvent>> {
        let slot = self.slot(id)?;
        let _w = slot.writer.lock().unwrap_or_else(|e| e.into_inner());
        read_events(id, &slot.path)
    }

    /// Records a cohort's outcomes, refits and persists the outcome, refit and
    /// decision events in one append. `doses`, when given, must match the
    /// pending assignment.
    pub fn record_outcomes(
        &self,
        id: &str,
        cohort: usize,
        outcomes: [Outcome; 2],
        doses: Option<[StandardizedDose; 2]>,
    ) -> Result<Recorded> {
        let slot = self.slot(id)?;
        let _w = slot.writer.lock().unwrap_or_else(|e| e.into_inner());
        let current = slot.current();
        let mut state = current.state.clone();
        if state.is_open() && state.pending_cohort() == Some(cohort) {
            if let (Some(d), Some(p)) = (doses, state.pending) {
                if d != p.doses() {
                    return Err(ServiceError::validation("doses", "do not match the pending assignment"));
                }
            }
        }
        let decision = state.next_cohort(cohort, outcomes, self.fitter.as_ref())?;
        let summary = state
            .posterior
            .clone()
            .ok_or_else(|| ServiceError::Conflict("refit produced no posterior".into()))?;
        let events = [
            EventPayload::OutcomesRecorded { cohort, outcomes },
            EventPayload::PosteriorRefit { cohort, summary },
            decision_payload(&decision),
        ];
        let file = OpenOptions::new().append(true).open(&slot.path)?;
        let before = file.metadata()?.len();
        if let Err(e) = write_group(file, current.event_count + 1, &events) {
            if let Ok(f) = OpenOptions::new().write(true).open(&slot.path) {
                let _ = f.set_len(before);
            }
            return Err(e);
        }
        let snapshot = Arc::new(Snapshot {
            trial_id: current.trial_id.clone(),
            label: current.label.clone(),
            state,
            last_decision: Some(decision.clone()),
            event_count: current.event_count + events.len() as u64,
        });
        *slot.snapshot.write().unwrap_or_else(|e| e.into_inner()) = snapshot.clone();
        Ok(Recorded { snapshot, decision })
    }
}

/// Serializes a group of events and appends it with a single write.
fn write_group(mut file: File, first_id: u64, payloads: &[EventPayload]) -> Result<()> {
    let ts = now_ms();
    let mut buf = String::new();
    for (k, payload) in payloads.iter().enumerate() {
        let event = TrialEvent {
            event_id: first_id + k as u64,
            timestamp: ts,
            payload: payload.clone(),
        };
        buf.push_str(&serde_json::to_string(&event).map_err(std::io::Error::other)?);
        buf.push('\n');
    }
    file.write_all(buf.as_bytes())?;
    file.sync_data()?;
    Ok(())
}

fn corrupt(id: &str, message: impl Into<String>) -> ServiceError {
    ServiceError::CorruptLog {
        trial: id.to_string(),
        message: message.into(),
    }
}

/// Parses complete lines; a final line without a newline is a torn write and
/// is skipped. Returns the events and the byte length they occupy.
fn parse_log(id: &str, path: &Path) -> Result<(Vec<TrialEvent>, Vec<u64>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    let mut ends = Vec::new();
    let mut offset = 0u64;
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 || !line.ends_with('\n') {
            break;
        }
        offset += n as u64;
        let event: TrialEvent =
            serde_json::from_str(&line).map_err(|e| corrupt(id, format!("line {}: {e}", events.len() + 1)))?;
        events.push(event);
        ends.push(offset);
    }
    Ok((events, ends))
}

fn read_events(id: &str, path: &Path) -> Result<Vec<TrialEvent>> {
    Ok(parse_log(id, path)?.0)
}

/// Replays a log and truncates any uncommitted tail left by an interrupted
/// append.
fn load(id: &str, path: &Path) -> Result<Snapshot> {
    let (events, ends) = parse_log(id, path)?;
    let r = replay(&events).map_err(|m| corrupt(id, m))?;
    if r.trial_id != id {
        return Err(corrupt(id, format!("log belongs to trial {}", r.trial_id)));
    }
    let keep = ends[r.committed - 1];
    if fs::metadata(path)?.len() > keep {
        OpenOptions::new().write(true).open(path)?.set_len(keep)?;
    }
    Ok(Snapshot {
        trial_id: r.trial_id,
        label: r.label,
        state: r.state,
        last_decision: r.last_decision,
        event_count: r.committed as u64,
    })
}

/// Rebuilds a snapshot from a log file without touching it.
pub fn replay_file(id: &str, path: &Path) -> Result<Snapshot> {
    let (events, _) = parse_log(id, path)?;
    let r = replay(&events).map_err(|m| corrupt(id, m))?;
    Ok(Snapshot {
        trial_id: r.trial_id,
        label: r.label,
        state: r.state,
        last_decision: r.last_decision,
        event_count: r.committed as u64,
    })
}
