//! Patient-level toxicity and attribution outcomes.

use serde::{Deserialize, Serialize};

use crate::dose::{Axis, StandardizedDose};
use crate::error::{Error, Result};
use crate::model::AttributionFlags;

/// One of the five observable outcomes of a treated patient.
///
/// On the wire this is the flat record `{t, a, delta1, delta2}` where `a` is
/// present only when `t = 1` and the deltas only when `a = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOutcome", into = "RawOutcome")]
pub enum Outcome {
    /// `T = 0`.
    NoDlt,
    /// `T = 1, A = 0`.
    Unattributed,
    /// `T = 1, A = 1` with the implicated drug(s); never [`AttributionFlags::NONE`].
    Attributed(AttributionFlags),
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::NoDlt,
        Outcome::Unattributed,
        Outcome::Attributed(AttributionFlags::DRUG1),
        Outcome::Attributed(AttributionFlags::DRUG2),
        Outcome::Attributed(AttributionFlags::BOTH),
    ];

    /// Builds an outcome from the raw indicators, rejecting impossible shapes.
    pub fn from_indicators(t: bool, a: Option<bool>, flags: Option<AttributionFlags>) -> Result<Self> {
        match (t, a, flags) {
            (false, None | Some(false), None) => Ok(Outcome::NoDlt),
            (false, _, _) => Err(Error::Domain(
                "attribution recorded for a patient without DLT".into(),
            )),
            (true, None, _) => Err(Error::Domain("DLT recorded without attribution indicator".into())),
            (true, Some(false), None) | (true, Some(false), Some(AttributionFlags::NONE)) => {
                Ok(Outcome::Unattributed)
            }
            (true, Some(false), Some(_)) => Err(Error::Domain(
                "drug flags recorded for an unattributed DLT".into(),
            )),
            (true, Some(true), None) | (true, Some(true), Some(AttributionFlags::NONE)) => Err(
                Error::Domain("attributed DLT must implicate at least one drug".into()),
            ),
            (true, Some(true), Some(f)) => Ok(Outcome::Attributed(f)),
        }
    }

    pub fn is_dlt(&self) -> bool {
        !matches!(self, Outcome::NoDlt)
    }

    pub fn is_attributed(&self) -> bool {
        matches!(self, Outcome::Attributed(_))
    }

    /// True for an attributed DLT that implicates `axis`'s drug.
    pub fn implicates(&self, axis: Axis) -> bool {
        match self {
            Outcome::Attributed(f) => f.implicates(axis),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct RawOutcome {
    t: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta1: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta2: Option<u8>,
}

fn bit(v: u8, name: &str) -> Result<bool> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(Error::Domain(format!("{name} must be 0 or 1, got {v}"))),
    }
}

impl TryFrom<RawOutcome> for Outcome {
    type Error = Error;

    fn try_from(raw: RawOutcome) -> Result<Self> {
        let t = bit(raw.t, "t")?;
        let a = raw.a.map(|v| bit(v, "a")).transpose()?;
        let flags = match (raw.delta1, raw.delta2) {
            (None, None) => None,
            (d1, d2) => Some(AttributionFlags::new(
                bit(d1.unwrap_or(0), "delta1")?,
                bit(d2.unwrap_or(0), "delta2")?,
            )),
        };
        Outcome::from_indicators(t, a, flags)
    }
}

impl From<Outcome> for RawOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::NoDlt => RawOutcome {
                t: 0,
                a: None,
                delta1: None,
                delta2: None,
            },
            Outcome::Unattributed => RawOutcome {
                t: 1,
                a: Some(0),
                delta1: None,
                delta2: None,
            },
            Outcome::Attributed(f) => RawOutcome {
                t: 1,
                a: Some(1),
                delta1: Some(f.delta1 as u8),
                delta2: Some(f.delta2 as u8),
            },
        }
    }
}

/// A treated patient: assigned dose and observed outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub dose: StandardizedDose,
    pub outcome: Outcome,
}

impl PatientRecord {
    pub fn new(dose: StandardizedDose, outcome: Outcome) -> Self {
        PatientRecord { dose, outcome }
    }
}
