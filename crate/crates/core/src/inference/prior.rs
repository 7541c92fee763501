use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformPrior {
    pub lo: f64,
    pub hi: f64,
}

impl UniformPrior {
    pub fn log_density(&self, v: f64) -> f64 {
        if v >= self.lo && v <= self.hi {
            -(self.hi - self.lo).ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn median(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Gamma prior in the shape/rate parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn log_density(&self, v: f64) -> f64 {
        if v > 0.0 && v.is_finite() {
            self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * v.ln()
                - self.rate * v
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Independent priors on `(alpha, beta, gamma, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub alpha: UniformPrior,
    pub beta: UniformPrior,
    pub gamma: GammaPrior,
    pub eta: UniformPrior,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            alpha: UniformPrior { lo: 0.2, hi: 2.0 },
            beta: UniformPrior { lo: 0.2, hi: 2.0 },
            gamma: GammaPrior {
                shape: 0.1,
                rate: 0.1,
            },
            eta: UniformPrior { lo: 0.0, hi: 1.0 },
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, u, floor) in [
            ("prior.alpha", self.alpha, f64::MIN_POSITIVE),
            ("prior.beta", self.beta, f64::MIN_POSITIVE),
            ("prior.eta", self.eta, 0.0),
        ] {
            if !(u.lo.is_finite() && u.hi.is_finite() && u.lo >= floor && u.lo < u.hi) {
                return Err(Error::config(name, format!("invalid support [{}, {}]", u.lo, u.hi)));
            }
        }
        if self.eta.hi > 1.0 {
            return Err(Error::config("prior.eta", "support must lie within [0, 1]"));
        }
        let g = self.gamma;
        if !(g.shape > 0.0 && g.rate > 0.0 && g.shape.is_finite() && g.rate.is_finite()) {
            return Err(Error::config("prior.gamma", "shape and rate must be positive"));
        }
        Ok(())
    }

    pub fn log_density(&self, params: &ModelParams) -> f64 {
        self.alpha.log_density(params.alpha)
            + self.beta.log_density(params.beta)
            + self.gamma.log_density(params.gamma)
            + self.eta.log_density(params.eta)
    }

    pub fn contains(&self, params: &ModelParams) -> bool {
        self.log_density(params) > f64::NEG_INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_log_density() {
        let prior = PriorSpec::default();
        let p = ModelParams::new(1.0, 1.0, 1.0, 0.5);
        // two Uniform(0.2, 2), Gamma(0.1, 0.1) at 1, Uniform(0, 1)
        let expected = -2.0 * 1.8_f64.ln() + 0.1 * 0.1_f64.ln() - ln_gamma(0.1) - 0.1;
        assert!((prior.log_density(&p) - expected).abs() < 1e-12);
    }

    #[test]
    fn outside_support() {
        let prior = PriorSpec::default();
        assert_eq!(prior.log_density(&ModelParams::new(0.1, 1.0, 1.0, 0.5)), f64::NEG_INFINITY);
        assert_eq!(prior.log_density(&ModelParams::new(1.0, 1.0, -1.0, 0.5)), f64::NEG_INFINITY);
        assert_eq!(prior.log_density(&ModelParams::new(1.0, 1.0, 1.0, 1.5)), f64::NEG_INFINITY);
    }
}
