//! Likelihood of the five-outcome data and the unnormalized posterior.

use crate::dose::StandardizedDose;
use crate::inference::prior::PriorSpec;
#[cfg(test)]
use crate::model::interaction_factor;
use crate::model::{outcome_probs, AttributionFlags, ModelParams, OutcomeProbs};
use crate::outcome::{Outcome, PatientRecord};

/// Contributions at or below this value are treated as impossible.
pub const MIN_CONTRIBUTION: f64 = 1e-300;

#[inline]
fn guarded_ln(v: f64) -> f64 {
    if v > MIN_CONTRIBUTION {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Likelihood contribution of one outcome at a dose with the given pattern
/// probabilities.
pub fn outcome_contribution(outcome: Outcome, probs: &OutcomeProbs, eta: f64) -> f64 {
    match outcome {
        Outcome::NoDlt => 1.0 - probs.total(),
        Outcome::Unattributed => probs.total() * (1.0 - eta),
        Outcome::Attributed(flags) => eta * probs.get(flags),
    }
}

pub fn log_likelihood(data: &[PatientRecord], params: &ModelParams) -> f64 {
    data.iter()
        .map(|r| {
            let probs = outcome_probs(r.dose, params);
            guarded_ln(outcome_contribution(r.outcome, &probs, params.eta))
        })
        .sum()
}

/// Log prior plus log likelihood; `-inf` outside the prior support.
pub fn log_posterior(data: &[PatientRecord], params: &ModelParams, prior: &PriorSpec) -> f64 {
    let lp = prior.log_density(params);
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    lp + log_likelihood(data, params)
}

/// Outcome counts at one distinct dose, with cached log-doses.
#[derive(Debug, Clone)]
pub(crate) struct DoseTally {
    pub ln_x: f64,
    pub ln_y: f64,
    dose: StandardizedDose,
    no_dlt: u32,
    unattributed: u32,
    drug1: u32,
    drug2: u32,
    both: u32,
}

impl DoseTally {
    fn new(dose: StandardizedDose) -> Self {
        DoseTally {
            ln_x: dose.x.ln(),
            ln_y: dose.y.ln(),
            dose,
            no_dlt: 0,
            unattributed: 0,
            drug1: 0,
            drug2: 0,
            both: 0,
        }
    }

    /// Log of the `eta`-free part of the likelihood at this dose.
    #[inline]
    pub fn dose_part(&self, a: f64, b: f64, factor: f64) -> f64 {
        let probs = OutcomeProbs::from_marginals(a, b, factor);
        let mut ll = 0.0;
        if self.no_dlt > 0 {
            ll += self.no_dlt as f64 * guarded_ln(1.0 - probs.total());
        }
        if self.unattributed > 0 {
            ll += self.unattributed as f64 * guarded_ln(probs.total());
        }
        if self.drug1 > 0 {
            ll += self.drug1 as f64 * guarded_ln(probs.get(AttributionFlags::DRUG1));
        }
        if self.drug2 > 0 {
            ll += self.drug2 as f64 * guarded_ln(probs.get(AttributionFlags::DRUG2));
        }
        if self.both > 0 {
            ll += self.both as f64 * guarded_ln(probs.get(AttributionFlags::BOTH));
        }
        ll
    }
}

/// Data reduced to per-dose counts. The likelihood factors into a part
/// depending on `(alpha, beta, gamma)` and an `eta` part depending only on
/// the attributed and unattributed DLT counts.
#[derive(Debug, Clone, Default)]
pub(crate) struct TalliedData {
    pub doses: Vec<DoseTally>,
    pub attributed: u32,
    pub unattributed: u32,
}

impl TalliedData {
    pub fn new(data: &[PatientRecord]) -> Self {
        let mut out = TalliedData::default();
        for r in data {
            let idx = match out.doses.iter().position(|t| t.dose == r.dose) {
                Some(i) => i,
                None => {
                    out.doses.push(DoseTally::new(r.dose));
                    out.doses.len() - 1
                }
            };
            let t = &mut out.doses[idx];
            match r.outcome {
                Outcome::NoDlt => t.no_dlt += 1,
                Outcome::Unattributed => {
                    t.unattributed += 1;
                    out.unattributed += 1;
                }
                Outcome::Attributed(f) => {
                    out.attributed += 1;
                    match (f.delta1, f.delta2) {
                        (true, false) => t.drug1 += 1,
                        (false, true) => t.drug2 += 1,
                        _ => t.both += 1,
                    }
                }
            }
        }
        out
    }

    pub fn eta_part(&self, eta: f64) -> f64 {
        let mut ll = 0.0;
        if self.attributed > 0 {
            ll += self.attributed as f64 * guarded_ln(eta);
        }
        if self.unattributed > 0 {
            ll += self.unattributed as f64 * guarded_ln(1.0 - eta);
        }
        ll
    }

    pub fn dose_part(&self, marg_x: &[f64], marg_y: &[f64], factor: f64) -> f64 {
        self.doses
            .iter()
            .zip(marg_x.iter().zip(marg_y))
            .map(|(t, (&a, &b))| t.dose_part(a, b, factor))
            .sum()
    }

    #[cfg(test)]
    pub fn log_likelihood(&self, params: &ModelParams) -> f64 {
        let mx: Vec<f64> = self.doses.iter().map(|t| (params.alpha * t.ln_x).exp()).collect();
        let my: Vec<f64> = self.doses.iter().map(|t| (params.beta * t.ln_y).exp()).collect();
        self.dose_part(&mx, &my, interaction_factor(params.gamma)) + self.eta_part(params.eta)
    }
}
