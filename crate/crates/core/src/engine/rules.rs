//! Dose-assignment rules applied to each CRM candidate, and the stopping rule.

use serde::{Deserialize, Serialize};

use crate::dose::{Axis, DoseBounds, StandardizedDose};
use crate::engine::config::DesignConfig;
use crate::error::Result;
use crate::inference::{posterior_prob_dlt_exceeds, PosteriorSamples};
use crate::model::{mtd_solve, prob_dlt, ModelParams};
use crate::outcome::PatientRecord;

/// CRM step along one axis: the dose of the `varying` drug minimizing
/// `|prob_dlt - theta|` with the other drug held at `fixed`.
pub fn crm_dose_given(
    params_hat: &ModelParams,
    fixed: f64,
    varying: Axis,
    theta: f64,
    bounds: DoseBounds,
) -> f64 {
    let at = |v: f64| {
        let dose = StandardizedDose::new(fixed, fixed).with(varying, v);
        prob_dlt(dose, params_hat)
    };
    // prob_dlt is non-decreasing along either axis
    if at(bounds.min) >= theta {
        return bounds.min;
    }
    if at(bounds.max) <= theta {
        return bounds.max;
    }
    if let Some(sol) = mtd_solve(fixed, varying.other(), params_hat, theta, bounds) {
        return sol.dose;
    }
    // bracketed crossing the quadratic missed through rounding
    let (mut lo, mut hi) = (bounds.min, bounds.max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < theta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (plo, phi) = (at(lo), at(hi));
    if (plo - theta).abs() <= (phi - theta).abs() {
        lo
    } else {
        hi
    }
}

/// Caps an escalation at `cap_fraction` of the dose range above `previous`.
pub fn apply_escalation_cap(candidate: f64, previous: f64, cap_fraction: f64, bounds: DoseBounds) -> f64 {
    candidate.min(previous + cap_fraction * bounds.range())
}

/// Forbids escalating the `axis` drug past `previous_dose_on_line` when the
/// previous cohort had a DLT attributed to that drug.
pub fn apply_attribution_restriction(
    candidate: f64,
    axis: Axis,
    previous_cohort: &[PatientRecord],
    previous_dose_on_line: f64,
) -> f64 {
    if restriction_active(axis, previous_cohort) {
        candidate.min(previous_dose_on_line)
    } else {
        candidate
    }
}

pub fn restriction_active(axis: Axis, previous_cohort: &[PatientRecord]) -> bool {
    previous_cohort.iter().any(|r| r.outcome.implicates(axis))
}

/// Nearest level by absolute distance; exact ties go to the lower level.
pub fn round_to_grid(candidate: f64, levels: &[f64]) -> f64 {
    let mut best = levels[0];
    let mut best_dist = (candidate - best).abs();
    for &level in &levels[1..] {
        let d = (candidate - level).abs();
        if d < best_dist {
            best = level;
            best_dist = d;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopDecision {
    pub stop: bool,
    /// Posterior probability that the lowest combination's DLT risk is at
    /// least `theta + xi1`.
    pub exceedance: f64,
}

/// Stops when the exceedance probability is strictly greater than `xi2`.
pub fn stop_from_exceedance(exceedance: f64, xi2: f64) -> StopDecision {
    StopDecision {
        stop: exceedance > xi2,
        exceedance,
    }
}

pub fn check_stopping(samples: &PosteriorSamples, config: &DesignConfig) -> Result<StopDecision> {
    let exceedance =
        posterior_prob_dlt_exceeds(samples, config.lowest_dose(), config.theta + config.xi1)?;
    Ok(stop_from_exceedance(exceedance, config.xi2))
}
