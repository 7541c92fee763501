//! Component-wise random-walk Metropolis sampler for the copula posterior.
//!
//! Each parameter is updated in an unconstrained coordinate: a scaled logit
//! for the box-bounded `alpha`, `beta` and `eta`, and `log` for `gamma`. The
//! log-Jacobian of each map is added to the target. Proposal scales adapt in
//! batches during burn-in and are frozen afterwards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::likelihood::TalliedData;
use crate::inference::prior::{PriorSpec, UniformPrior};
use crate::model::{interaction_factor, ModelParams};
use crate::outcome::PatientRecord;

const ADAPT_BATCH: usize = 50;
const TARGET_ACCEPT_LO: f64 = 0.25;
const TARGET_ACCEPT_HI: f64 = 0.45;

/// Per-parameter values in `(alpha, beta, gamma, eta)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerParameter {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl PerParameter {
    fn from_array(a: [f64; 4]) -> Self {
        PerParameter {
            alpha: a[0],
            beta: a[1],
            gamma: a[2],
            eta: a[3],
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.eta]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub chain_length: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Initial proposal standard deviations on the unconstrained scale.
    pub proposal_scales: PerParameter,
    /// Adapt proposal scales during burn-in.
    pub adapt: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chain_length: 12_000,
            burn_in: 2_000,
            thin: 1,
            seed: 1,
            proposal_scales: PerParameter {
                alpha: 1.5,
                beta: 1.5,
                gamma: 3.0,
                eta: 1.5,
            },
            adapt: true,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chain_length <= self.burn_in {
            return Err(Error::config(
                "mcmc.chain_length",
                format!(
                    "chain_length ({}) must exceed burn_in ({})",
                    self.chain_length, self.burn_in
                ),
            ));
        }
        if self.thin == 0 {
            return Err(Error::config("mcmc.thin", "must be at least 1"));
        }
        if self
            .proposal_scales
            .to_array()
            .iter()
            .any(|s| !(s.is_finite() && *s > 0.0))
        {
            return Err(Error::config("mcmc.proposal_scales", "must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn retained_draws(&self) -> usize {
        (self.chain_length - self.burn_in).div_ceil(self.thin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcDiagnostics {
    /// Post-burn-in acceptance rate of each block.
    pub acceptance: PerParameter,
    /// Batch-means effective sample size of each retained component.
    pub ess: PerParameter,
    /// Proposal scales after adaptation.
    pub final_scales: PerParameter,
    pub chain_length: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub draws: Vec<ModelParams>,
    pub diagnostics: McmcDiagnostics,
}

impl PosteriorSamples {
    /// Wraps externally produced draws, e.g. a point mass.
    pub fn from_draws(draws: Vec<ModelParams>) -> Self {
        let n = draws.len();
        PosteriorSamples {
            draws,
            diagnostics: McmcDiagnostics {
                acceptance: PerParameter::from_array([0.0; 4]),
                ess: PerParameter::from_array([n as f64; 4]),
                final_scales: PerParameter::from_array([0.0; 4]),
                chain_length: n,
                burn_in: 0,
                thin: 1,
                seed: 0,
                warnings: Vec::new(),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.draws
            .iter()
            .map(|d| [d.alpha, d.beta, d.gamma, d.eta][k])
            .collect()
    }
}

#[inline]
fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Maps between a bounded parameter and the real line.
#[derive(Debug, Clone, Copy)]
enum Transform {
    Logit { lo: f64, hi: f64 },
    Log,
}

impl Transform {
    fn for_uniform(u: UniformPrior) -> Self {
        Transform::Logit { lo: u.lo, hi: u.hi }
    }

    /// Parameter value and log-Jacobian at unconstrained `u`.
    #[inline]
    fn forward(&self, u: f64) -> (f64, f64) {
        match *self {
            Transform::Logit { lo, hi } => {
                let s = logistic(u);
                let v = lo + (hi - lo) * s;
                // log s + log(1 - s) written to stay finite for large |u|
                let log_jac = (hi - lo).ln() - u.abs() - 2.0 * (-u.abs()).exp().ln_1p();
                (v, log_jac)
            }
            Transform::Log => {
                let v = u.exp();
                (v, u)
            }
        }
    }

    fn inverse(&self, v: f64) -> f64 {
        match *self {
            Transform::Logit { lo, hi } => {
                let s = ((v - lo) / (hi - lo)).clamp(1e-12, 1.0 - 1e-12);
                (s / (1.0 - s)).ln()
            }
            Transform::Log => v.ln(),
        }
    }

    /// `forward` can round onto a closed bound for extreme `u`.
    fn interior(&self, v: f64) -> bool {
        match *self {
            Transform::Logit { lo, hi } => v > lo && v < hi,
            Transform::Log => v > 0.0 && v.is_finite(),
        }
    }
}

struct ChainState<'a> {
    data: &'a TalliedData,
    prior: &'a PriorSpec,
    transforms: [Transform; 4],
    u: [f64; 4],
    value: [f64; 4],
    log_jac: [f64; 4],
    marg_x: Vec<f64>,
    marg_y: Vec<f64>,
    scratch: Vec<f64>,
    dose_ll: f64,
    eta_ll: f64,
}

impl<'a> ChainState<'a> {
    fn new(data: &'a TalliedData, prior: &'a PriorSpec) -> Self {
        let transforms = [
            Transform::for_uniform(prior.alpha),
            Transform::for_uniform(prior.beta),
            Transform::Log,
            Transform::for_uniform(prior.eta),
        ];
        let start = [
            prior.alpha.median(),
            prior.beta.median(),
            1.0,
            prior.eta.median(),
        ];
        let mut u = [0.0; 4];
        let mut value = [0.0; 4];
        let mut log_jac = [0.0; 4];
        for k in 0..4 {
            u[k] = transforms[k].inverse(start[k]);
            (value[k], log_jac[k]) = transforms[k].forward(u[k]);
        }
        let marg_x: Vec<f64> = data.doses.iter().map(|t| (value[0] * t.ln_x).exp()).collect();
        let marg_y: Vec<f64> = data.doses.iter().map(|t| (value[1] * t.ln_y).exp()).collect();
        let dose_ll = data.dose_part(&marg_x, &marg_y, interaction_factor(value[2]));
        let eta_ll = data.eta_part(value[3]);
        ChainState {
            data,
            prior,
            transforms,
            u,
            value,
            log_jac,
            scratch: Vec::with_capacity(marg_x.len()),
            marg_x,
            marg_y,
            dose_ll,
            eta_ll,
        }
    }

    fn prior_component(&self, k: usize, v: f64) -> f64 {
        match k {
            0 => self.prior.alpha.log_density(v),
            1 => self.prior.beta.log_density(v),
            2 => self.prior.gamma.log_density(v),
            _ => self.prior.eta.log_density(v),
        }
    }

    /// Proposes `u_k -> u_new` and accepts by the Metropolis rule.
    fn update(&mut self, k: usize, u_new: f64, log_unif: f64) -> bool {
        let (v_new, jac_new) = self.transforms[k].forward(u_new);
        if !self.transforms[k].interior(v_new) {
            return false;
        }
        let prior_delta = self.prior_component(k, v_new) - self.prior_component(k, self.value[k]);
        let jac_delta = jac_new - self.log_jac[k];

        let (ll_new, is_eta) = match k {
            0 => {
                self.scratch.clear();
                self.scratch
                    .extend(self.data.doses.iter().map(|t| (v_new * t.ln_x).exp()));
                let ll = self.data.dose_part(&self.scratch, &self.marg_y, interaction_factor(self.value[2]));
                (ll, false)
            }
            1 => {
                self.scratch.clear();
                self.scratch
                    .extend(self.data.doses.iter().map(|t| (v_new * t.ln_y).exp()));
                let ll = self.data.dose_part(&self.marg_x, &self.scratch, interaction_factor(self.value[2]));
                (ll, false)
            }
            2 => (
                self.data
                    .dose_part(&self.marg_x, &self.marg_y, interaction_factor(v_new)),
                false,
            ),
            _ => (self.data.eta_part(v_new), true),
        };
        let ll_old = if is_eta { self.eta_ll } else { self.dose_ll };
        let log_ratio = prior_delta + jac_delta + (ll_new - ll_old);
        if !(log_ratio.is_finite() || log_ratio == f64::INFINITY) || log_unif >= log_ratio {
            return false;
        }
        self.u[k] = u_new;
        self.value[k] = v_new;
        self.log_jac[k] = jac_new;
        match k {
            0 => std::mem::swap(&mut self.marg_x, &mut self.scratch),
            1 => std::mem::swap(&mut self.marg_y, &mut self.scratch),
            _ => {}
        }
        if is_eta {
            self.eta_ll = ll_new;
        } else {
            self.dose_ll = ll_new;
        }
        true
    }

    fn params(&self) -> ModelParams {
        ModelParams::new(self.value[0], self.value[1], self.value[2], self.value[3])
    }
}

/// Draws from the posterior of `(alpha, beta, gamma, eta)` given `data`.
///
/// The chain is a pure function of its inputs: the same data, prior and
/// configuration always produce bit-identical draws.
pub fn sample_posterior(
    data: &[PatientRecord],
    prior: &PriorSpec,
    config: &McmcConfig,
) -> Result<PosteriorSamples> {
    config.validate()?;
    prior.validate()?;
    let tallied = TalliedData::new(data);
    let mut state = ChainState::new(&tallied, prior);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut scales = config.proposal_scales.to_array();
    let mut batch_accepts = [0usize; 4];
    let mut kept_accepts = [0usize; 4];
    let mut draws = Vec::with_capacity(config.retained_draws());

    for iter in 0..config.chain_length {
        for k in 0..4 {
            let z: f64 = rng.sample(StandardNormal);
            let log_unif = rng.random::<f64>().ln();
            let accepted = state.update(k, state.u[k] + scales[k] * z, log_unif);
            if accepted {
                if iter < config.burn_in {
                    batch_accepts[k] += 1;
                } else {
                    kept_accepts[k] += 1;
                }
            }
        }
        if iter < config.burn_in {
            if config.adapt && (iter + 1) % ADAPT_BATCH == 0 {
                for k in 0..4 {
                    let rate = batch_accepts[k] as f64 / ADAPT_BATCH as f64;
                    if rate < TARGET_ACCEPT_LO {
                        scales[k] *= 0.8;
                    } else if rate > TARGET_ACCEPT_HI {
                        scales[k] *= 1.25;
                    }
                    batch_accepts[k] = 0;
                }
            }
        } else if (iter - config.burn_in) % config.thin == 0 {
            let p = state.params();
            debug_assert!(prior.contains(&p), "draw left prior support: {p:?}");
            draws.push(p);
        }
    }

    let kept_iters = (config.chain_length - config.burn_in) as f64;
    let acceptance = kept_accepts.map(|a| a as f64 / kept_iters);
    let mut warnings = Vec::new();
    for (name, rate) in ["alpha", "beta", "gamma", "eta"].iter().zip(acceptance) {
        if rate == 0.0 {
            warnings.push(format!("no {name} proposals accepted after burn-in"));
        }
    }
    let mut samples = PosteriorSamples {
        draws,
        diagnostics: McmcDiagnostics {
            acceptance: PerParameter::from_array(acceptance),
            ess: PerParameter::from_array([0.0; 4]),
            final_scales: PerParameter::from_array(scales),
            chain_length: config.chain_length,
            burn_in: config.burn_in,
            thin: config.thin,
            seed: config.seed,
            warnings,
        },
    };
    let ess = [0, 1, 2, 3].map(|k| batch_means_ess(&samples.component(k)));
    samples.diagnostics.ess = PerParameter::from_array(ess);
    Ok(samples)
}

/// Effective sample size by the method of non-overlapping batch means.
pub fn batch_means_ess(chain: &[f64]) -> f64 {
    let n = chain.len();
    if n < 4 {
        return n as f64;
    }
    let batch = (n as f64).sqrt().floor() as usize;
    let n_batches = n / batch;
    let used = n_batches * batch;
    let mean = chain[..used].iter().sum::<f64>() / used as f64;
    let var = chain[..used].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (used - 1) as f64;
    if var == 0.0 || n_batches < 2 {
        return n as f64;
    }
    let batch_var = chain[..used]
        .chunks_exact(batch)
        .map(|c| {
            let m = c.iter().sum::<f64>() / batch as f64;
            (m - mean).powi(2)
        })
        .sum::<f64>()
        / (n_batches - 1) as f64;
    if batch_var == 0.0 {
        return n as f64;
    }
    (used as f64 * var / (batch as f64 * batch_var)).min(n as f64)
}
