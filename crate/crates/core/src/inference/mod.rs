//! Likelihood, priors, posterior sampling and posterior summaries.

pub mod likelihood;
pub mod mcmc;
pub mod prior;
pub mod summary;

pub use likelihood::{log_likelihood, log_posterior, outcome_contribution};
pub use mcmc::{sample_posterior, McmcConfig, McmcDiagnostics, PerParameter, PosteriorSamples};
pub use prior::{GammaPrior, PriorSpec, UniformPrior};
pub use summary::{posterior_mean, posterior_median, posterior_prob_dlt_exceeds};
