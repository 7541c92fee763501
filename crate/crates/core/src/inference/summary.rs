use crate::dose::StandardizedDose;
use crate::error::{Error, Result};
use crate::inference::mcmc::PosteriorSamples;
use crate::model::{prob_dlt, ModelParams};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn require_draws(samples: &PosteriorSamples) -> Result<()> {
    if samples.is_empty() {
        Err(Error::Usage("posterior summary needs at least one draw".into()))
    } else {
        Ok(())
    }
}

/// Componentwise posterior median; even counts average the two middle draws.
pub fn posterior_median(samples: &PosteriorSamples) -> Result<ModelParams> {
    require_draws(samples)?;
    let [a, b, g, e] = [0, 1, 2, 3].map(|k| median(samples.component(k)));
    Ok(ModelParams::new(a, b, g, e))
}

pub fn posterior_mean(samples: &PosteriorSamples) -> Result<ModelParams> {
    require_draws(samples)?;
    let n = samples.len() as f64;
    let [a, b, g, e] = [0, 1, 2, 3].map(|k| samples.component(k).iter().sum::<f64>() / n);
    Ok(ModelParams::new(a, b, g, e))
}

/// Posterior probability that the DLT risk at `dose` is at least `threshold`.
pub fn posterior_prob_dlt_exceeds(
    samples: &PosteriorSamples,
    dose: StandardizedDose,
    threshold: f64,
) -> Result<f64> {
    require_draws(samples)?;
    let hits = samples
        .draws
        .iter()
        .filter(|d| prob_dlt(dose, d) >= threshold)
        .count();
    Ok(hits as f64 / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphas(v: &[f64]) -> PosteriorSamples {
        PosteriorSamples::from_draws(v.iter().map(|&a| ModelParams::new(a, 1.0, 1.0, 0.5)).collect())
    }

    #[test]
    fn medians() {
        assert_eq!(posterior_median(&alphas(&[3.0, 1.0, 2.0])).unwrap().alpha, 2.0);
        assert_eq!(posterior_median(&alphas(&[1.0, 2.0])).unwrap().alpha, 1.5);
        assert!(matches!(posterior_median(&alphas(&[])), Err(Error::Usage(_))));
    }

    /// Draws whose DLT risk at (0.5, 0.5) equals each requested value:
    /// gamma = 0 and beta = 500 leave prob_dlt = 0.5^alpha.
    fn risks(pis: &[f64]) -> PosteriorSamples {
        PosteriorSamples::from_draws(
            pis.iter()
                .map(|&pi| ModelParams::new(pi.ln() / 0.5_f64.ln(), 500.0, 0.0, 0.5))
                .collect(),
        )
    }

    fn exceed(pis: &[f64], threshold: f64) -> f64 {
        posterior_prob_dlt_exceeds(&risks(pis), StandardizedDose::new(0.5, 0.5), threshold).unwrap()
    }

    #[test]
    fn exceedance_counts() {
        assert_eq!(exceed(&[0.5], 0.35), 1.0);
        assert_eq!(exceed(&[0.2], 0.35), 0.0);
        assert_eq!(exceed(&[0.30, 0.36, 0.40, 0.20], 0.35), 0.5);
    }
}
