//! Trial-conduct service: create trials, record cohort outcomes and read
//! recommendations over JSON, with every change appended to a per-trial
//! event log that replays to the same state after a restart.

pub mod error;
pub mod events;
pub mod http;
pub mod store;
pub mod trace;

pub use error::{Result, ServiceError};
pub use events::{replay, EventPayload, Replayed, TrialEvent};
pub use http::{router, serve, serve_on, trial_view};
pub use store::{replay_file, Snapshot, TrialService};
pub use trace::simulated_log;

/// Version of the JSON bodies.
pub const SCHEMA_VERSION: u32 = 1;
