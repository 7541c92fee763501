//! Standardized dose coordinates for the two agents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default lower bound of the standardized dose interval.
pub const DEFAULT_DOSE_MIN: f64 = 0.05;
/// Default upper bound of the standardized dose interval.
pub const DEFAULT_DOSE_MAX: f64 = 0.3;

/// Which agent a dose coordinate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Drug D1, the `x` coordinate.
    Drug1,
    /// Drug D2, the `y` coordinate.
    Drug2,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Drug1 => Axis::Drug2,
            Axis::Drug2 => Axis::Drug1,
        }
    }
}

/// Closed interval of admissible standardized doses for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for DoseBounds {
    fn default() -> Self {
        DoseBounds {
            min: DEFAULT_DOSE_MIN,
            max: DEFAULT_DOSE_MAX,
        }
    }
}

impl DoseBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let bounds = DoseBounds { min, max };
        bounds.validate("dose_bounds")?;
        Ok(bounds)
    }

    pub(crate) fn validate(&self, field: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::config(field, "bounds must be finite"));
        }
        if !(self.min > 0.0 && self.min < self.max && self.max <= 1.0) {
            return Err(Error::config(
                field,
                format!("need 0 < min < max <= 1, got [{}, {}]", self.min, self.max),
            ));
        }
        Ok(())
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, dose: f64) -> bool {
        dose >= self.min && dose <= self.max
    }

    pub fn clamp(&self, dose: f64) -> f64 {
        dose.clamp(self.min, self.max)
    }

    /// `n` equally spaced levels spanning the interval, endpoints included.
    pub fn levels(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![self.min],
            _ => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.max
                    } else {
                        self.min + self.range() * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// A dose combination `(x, y)` on the standardized scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizedDose {
    pub x: f64,
    pub y: f64,
}

impl StandardizedDose {
    pub const fn new(x: f64, y: f64) -> Self {
        StandardizedDose { x, y }
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Drug1 => self.x,
            Axis::Drug2 => self.y,
        }
    }

    pub fn with(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::Drug1 => self.x = value,
            Axis::Drug2 => self.y = value,
        }
        self
    }
}

/// Affine map from clinician units onto the standardized interval.
///
/// `raw_min` maps to `target_min` and `raw_max` to `target_max`.
pub fn standardize_dose(
    raw: f64,
    raw_min: f64,
    raw_max: f64,
    target_min: f64,
    target_max: f64,
) -> Result<f64> {
    check_interval(raw_min, raw_max, "raw")?;
    check_interval(target_min, target_max, "target")?;
    if !raw.is_finite() || raw < raw_min || raw > raw_max {
        return Err(Error::Domain(format!(
            "raw dose {raw} outside [{raw_min}, {raw_max}]"
        )));
    }
    let frac = (raw - raw_min) / (raw_max - raw_min);
    Ok(target_min + frac * (target_max - target_min))
}

/// Inverse of [`standardize_dose`].
pub fn destandardize_dose(
    standardized: f64,
    raw_min: f64,
    raw_max: f64,
    target_min: f64,
    target_max: f64,
) -> Result<f64> {
    check_interval(raw_min, raw_max, "raw")?;
    check_interval(target_min, target_max, "target")?;
    if !standardized.is_finite() || standardized < target_min || standardized > target_max {
        return Err(Error::Domain(format!(
            "standardized dose {standardized} outside [{target_min}, {target_max}]"
        )));
    }
    let frac = (standardized - target_min) / (target_max - target_min);
    Ok(raw_min + frac * (raw_max - raw_min))
}

fn check_interval(lo: f64, hi: f64, what: &str) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("{what} interval [{lo}, {hi}] is empty")));
    }
    Ok(())
}
