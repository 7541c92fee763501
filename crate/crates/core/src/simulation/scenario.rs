//! True dose-toxicity scenarios and outcome generation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dose::{DoseBounds, StandardizedDose};
use crate::engine::{in_band, DoseGrid};
use crate::error::{Error, Result};
use crate::model::{mtd_curve, prob_dlt, AttributionFlags, ModelParams, MtdCurve};
use crate::outcome::{Outcome, PatientRecord};

/// Tolerance when matching a dose to a probability-table level.
const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingModel {
    pub alpha_true: f64,
    pub beta_true: f64,
    pub gamma_true: f64,
}

impl WorkingModel {
    pub fn new(alpha_true: f64, beta_true: f64, gamma_true: f64) -> Self {
        WorkingModel {
            alpha_true,
            beta_true,
            gamma_true,
        }
    }

    pub fn params(&self, eta: f64) -> ModelParams {
        ModelParams::new(self.alpha_true, self.beta_true, self.gamma_true, eta)
    }
}

/// True DLT probabilities on a dose grid; `probs[ix][iy]` is the risk at
/// `(x_levels[ix], y_levels[iy])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbTable {
    pub x_levels: Vec<f64>,
    pub y_levels: Vec<f64>,
    pub probs: Vec<Vec<f64>>,
}

impl ProbTable {
    pub fn grid(&self) -> DoseGrid {
        DoseGrid {
            x_levels: self.x_levels.clone(),
            y_levels: self.y_levels.clone(),
        }
    }

    pub fn lookup(&self, dose: StandardizedDose) -> Result<f64> {
        let find = |levels: &[f64], v: f64| levels.iter().position(|l| (l - v).abs() <= LEVEL_TOL);
        match (find(&self.x_levels, dose.x), find(&self.y_levels, dose.y)) {
            (Some(ix), Some(iy)) => Ok(self.probs[ix][iy]),
            _ => Err(Error::Domain(format!(
                "dose ({}, {}) is not a grid point of the probability table",
                dose.x, dose.y
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Truth {
    WorkingModel(WorkingModel),
    ProbTable(ProbTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub truth: Truth,
    /// Probability that a DLT is attributed.
    pub eta_true: f64,
    /// Probability that an attributed DLT's label is replaced by one of the
    /// two wrong labels.
    #[serde(default)]
    pub attribution_error_rate: f64,
}

impl Scenario {
    pub fn working_model(label: impl Into<String>, model: WorkingModel, eta_true: f64) -> Self {
        Scenario {
            label: label.into(),
            truth: Truth::WorkingModel(model),
            eta_true,
            attribution_error_rate: 0.0,
        }
    }

    pub fn prob_table(label: impl Into<String>, table: ProbTable, eta_true: f64) -> Self {
        Scenario {
            label: label.into(),
            truth: Truth::ProbTable(table),
            eta_true,
            attribution_error_rate: 0.0,
        }
    }

    pub fn with_eta(mut self, eta_true: f64) -> Self {
        self.eta_true = eta_true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.eta_true) {
            return Err(Error::config("eta_true", "must lie in [0, 1]"));
        }
        if !unit(self.attribution_error_rate) {
            return Err(Error::config("attribution_error_rate", "must lie in [0, 1]"));
        }
        match &self.truth {
            Truth::WorkingModel(m) => {
                for (field, v) in [
                    ("truth.alpha_true", m.alpha_true),
                    ("truth.beta_true", m.beta_true),
                ] {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::config(field, "must be positive"));
                    }
                }
                if !(m.gamma_true >= 0.0 && m.gamma_true.is_finite()) {
                    return Err(Error::config("truth.gamma_true", "must be non-negative"));
                }
            }
            Truth::ProbTable(t) => {
                for (field, levels) in [("truth.x_levels", &t.x_levels), ("truth.y_levels", &t.y_levels)] {
                    if levels.is_empty() || levels.windows(2).any(|w| !(w[0] < w[1])) {
                        return Err(Error::config(field, "must be non-empty and strictly ascending"));
                    }
                    if levels.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
                        return Err(Error::config(field, "levels must lie in (0, 1]"));
                    }
                }
                if t.probs.len() != t.x_levels.len() || t.probs.iter().any(|r| r.len() != t.y_levels.len()) {
                    return Err(Error::config(
                        "truth.probs",
                        format!("must be {} rows of {} entries", t.x_levels.len(), t.y_levels.len()),
                    ));
                }
                if t.probs.iter().flatten().any(|p| !unit(*p)) {
                    return Err(Error::config("truth.probs", "entries must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn true_prob(&self, dose: StandardizedDose) -> Result<f64> {
        match &self.truth {
            Truth::WorkingModel(m) => Ok(prob_dlt(dose, &m.params(self.eta_true))),
            Truth::ProbTable(t) => t.lookup(dose),
        }
    }

    /// Draws one patient's outcome at `dose`.
    pub fn generate_outcome<R: Rng + ?Sized>(&self, dose: StandardizedDose, rng: &mut R) -> Result<PatientRecord> {
        let p = self.true_prob(dose)?;
        let outcome = if !rng.random_bool(p) {
            Outcome::NoDlt
        } else if !rng.random_bool(self.eta_true) {
            Outcome::Unattributed
        } else {
            const LABELS: [AttributionFlags; 3] = [
                AttributionFlags::DRUG1,
                AttributionFlags::DRUG2,
                AttributionFlags::BOTH,
            ];
            let mut k = rng.random_range(0..3);
            if self.attribution_error_rate > 0.0 && rng.random_bool(self.attribution_error_rate) {
                k = (k + rng.random_range(1..3)) % 3;
            }
            Outcome::Attributed(LABELS[k])
        };
        Ok(PatientRecord::new(dose, outcome))
    }

    /// The probability table's grid, if the truth is tabulated.
    pub fn grid(&self) -> Option<DoseGrid> {
        match &self.truth {
            Truth::ProbTable(t) => Some(t.grid()),
            Truth::WorkingModel(_) => None,
        }
    }

    /// Grid cells `(ix, iy)` whose true risk lies within `delta` of `theta`.
    pub fn true_mtd_set(&self, grid: &DoseGrid, theta: f64, delta: f64) -> Result<Vec<(usize, usize)>> {
        let mut set = Vec::new();
        for (ix, iy, dose) in grid.cells() {
            if in_band(self.true_prob(dose)?, theta, delta) {
                set.push((ix, iy));
            }
        }
        Ok(set)
    }

    /// The true MTD contour; only defined for a working-model truth.
    pub fn true_curve(
        &self,
        theta: f64,
        grid_size: usize,
        x_bounds: DoseBounds,
        y_bounds: DoseBounds,
    ) -> Result<Option<MtdCurve>> {
        match &self.truth {
            Truth::WorkingModel(m) => mtd_curve(&m.params(self.eta_true), theta, grid_size, x_bounds, y_bounds).map(Some),
            Truth::ProbTable(_) => Ok(None),
        }
    }
}

/// Tabulates a working model on equally spaced levels spanning each drug's
/// bounds.
pub fn make_grid_scenario(
    model: WorkingModel,
    x_levels: usize,
    y_levels: usize,
    x_bounds: DoseBounds,
    y_bounds: DoseBounds,
) -> Result<ProbTable> {
    if x_levels < 2 || y_levels < 2 {
        return Err(Error::Usage("need at least 2 levels per drug".into()));
    }
    let params = model.params(0.0);
    let xs = x_bounds.levels(x_levels);
    let ys = y_bounds.levels(y_levels);
    let probs = xs
        .iter()
        .map(|&x| ys.iter().map(|&y| prob_dlt(StandardizedDose::new(x, y), &params)).collect())
        .collect();
    Ok(ProbTable {
        x_levels: xs,
        y_levels: ys,
        probs,
    })
}
