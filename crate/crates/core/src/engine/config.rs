use serde::{Deserialize, Serialize};

use crate::dose::{Axis, DoseBounds, StandardizedDose};
use crate::error::{Error, Result};
use crate::inference::{McmcConfig, PriorSpec};

/// Discrete dose levels per drug, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseGrid {
    pub x_levels: Vec<f64>,
    pub y_levels: Vec<f64>,
}

impl DoseGrid {
    /// Equally spaced levels spanning each drug's bounds.
    pub fn uniform(x_bounds: DoseBounds, nx: usize, y_bounds: DoseBounds, ny: usize) -> Self {
        DoseGrid {
            x_levels: x_bounds.levels(nx),
            y_levels: y_bounds.levels(ny),
        }
    }

    pub fn levels(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::Drug1 => &self.x_levels,
            Axis::Drug2 => &self.y_levels,
        }
    }

    /// Every combination, `x` index varying slowest.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, StandardizedDose)> + '_ {
        self.x_levels.iter().enumerate().flat_map(move |(ix, &x)| {
            self.y_levels
                .iter()
                .enumerate()
                .map(move |(iy, &y)| (ix, iy, StandardizedDose::new(x, y)))
        })
    }
}

/// How the final discrete recommendation is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscreteSelection {
    /// Combinations whose estimated risk is within `delta_select` of `theta`.
    #[default]
    Band,
    /// Combinations nearest to points of the estimated MTD curve.
    CurveRounding,
}

/// Design parameters of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignConfig {
    /// Target DLT probability.
    pub theta: f64,
    /// Maximum number of patients; cohorts are pairs.
    pub n_max: usize,
    /// Stopping margin above `theta`.
    pub xi1: f64,
    /// Posterior probability above which the trial stops.
    pub xi2: f64,
    /// Largest escalation step as a fraction of the drug's dose range.
    pub cap_fraction: f64,
    pub x_bounds: DoseBounds,
    pub y_bounds: DoseBounds,
    /// Discrete levels; `None` runs the continuous design.
    pub grid: Option<DoseGrid>,
    /// Half-width of the band around `theta` defining the discrete MTD set.
    pub delta_select: f64,
    pub discrete_selection: DiscreteSelection,
    /// Points used when sampling the final MTD curve.
    pub curve_points: usize,
    pub prior: PriorSpec,
    pub mcmc: McmcConfig,
    /// Root seed for posterior refits.
    pub seed: u64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            theta: 0.3,
            n_max: 40,
            xi1: 0.05,
            xi2: 0.8,
            cap_fraction: 0.2,
            x_bounds: DoseBounds::default(),
            y_bounds: DoseBounds::default(),
            grid: None,
            delta_select: 0.10,
            discrete_selection: DiscreteSelection::Band,
            curve_points: 101,
            prior: PriorSpec::default(),
            mcmc: McmcConfig::default(),
            seed: 1,
        }
    }
}

impl DesignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::config("theta", format!("must lie in (0, 1), got {}", self.theta)));
        }
        if self.n_max < 2 || self.n_max % 2 != 0 {
            return Err(Error::config(
                "n_max",
                format!("must be a positive even number, got {}", self.n_max),
            ));
        }
        if !(self.xi1 >= 0.0 && self.theta + self.xi1 < 1.0) {
            return Err(Error::config("xi1", "need xi1 >= 0 and theta + xi1 < 1"));
        }
        if !(0.0..1.0).contains(&self.xi2) {
            return Err(Error::config("xi2", "must lie in [0, 1)"));
        }
        if !(self.cap_fraction > 0.0 && self.cap_fraction <= 1.0) {
            return Err(Error::config("cap_fraction", "must lie in (0, 1]"));
        }
        if !(self.delta_select > 0.0 && self.delta_select < 1.0) {
            return Err(Error::config("delta_select", "must lie in (0, 1)"));
        }
        if self.curve_points < 2 {
            return Err(Error::config("curve_points", "must be at least 2"));
        }
        self.x_bounds.validate("x_bounds")?;
        self.y_bounds.validate("y_bounds")?;
        if let Some(grid) = &self.grid {
            for (field, levels, bounds) in [
                ("grid.x_levels", &grid.x_levels, self.x_bounds),
                ("grid.y_levels", &grid.y_levels, self.y_bounds),
            ] {
                if levels.is_empty() {
                    return Err(Error::config(field, "must not be empty"));
                }
                if levels.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::config(field, "must be strictly ascending"));
                }
                if levels.iter().any(|l| !bounds.contains(*l)) {
                    return Err(Error::config(field, "levels must lie within the dose bounds"));
                }
            }
        }
        self.prior.validate()?;
        self.mcmc.validate()?;
        Ok(())
    }

    pub fn bounds(&self, axis: Axis) -> DoseBounds {
        match axis {
            Axis::Drug1 => self.x_bounds,
            Axis::Drug2 => self.y_bounds,
        }
    }

    /// The lowest available combination: the smallest grid level, or the
    /// lower dose bound in the continuous design.
    pub fn lowest_dose(&self) -> StandardizedDose {
        match &self.grid {
            Some(g) => StandardizedDose::new(g.x_levels[0], g.y_levels[0]),
            None => StandardizedDose::new(self.x_bounds.min, self.y_bounds.min),
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.grid.is_some()
    }
}
