//! Gumbel copula dose-toxicity model with power-model marginals.
//!
//! Marginal DLT probabilities are `a = x^alpha` for drug D1 and
//! `b = y^beta` for drug D2. The joint probability of the attribution
//! pattern `(delta1, delta2)` is
//!
//! ```text
//! pi(d1, d2) = a^d1 (1-a)^(1-d1) b^d2 (1-b)^(1-d2)
//!            + (-1)^(d1+d2) a(1-a) b(1-b) (e^-gamma - 1)/(e^-gamma + 1)
//! ```
//!
//! and the total DLT probability is `pi = pi(1,0) + pi(0,1) + pi(1,1)`.

use serde::{Deserialize, Serialize};

use crate::dose::{Axis, DoseBounds, StandardizedDose};
use crate::error::{Error, Result};

/// Below this magnitude of the quadratic coefficient the MTD equation is
/// solved as a linear equation.
pub const KAPPA_TOL: f64 = 1e-12;

/// Copula parameters plus the attributable fraction `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl ModelParams {
    pub const fn new(alpha: f64, beta: f64, gamma: f64, eta: f64) -> Self {
        ModelParams {
            alpha,
            beta,
            gamma,
            eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ModelParams {
            alpha,
            beta,
            gamma,
            eta,
        } = *self;
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite() && eta.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameters {self:?}")));
        }
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(Error::Domain(format!(
                "exponents must be positive, got alpha={alpha}, beta={beta}"
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("eta={eta} outside [0, 1]")));
        }
        Ok(())
    }
}

/// DLT attribution indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttributionFlags {
    pub delta1: bool,
    pub delta2: bool,
}

impl AttributionFlags {
    pub const NONE: AttributionFlags = AttributionFlags::new(false, false);
    pub const DRUG1: AttributionFlags = AttributionFlags::new(true, false);
    pub const DRUG2: AttributionFlags = AttributionFlags::new(false, true);
    pub const BOTH: AttributionFlags = AttributionFlags::new(true, true);

    /// The three patterns that describe an attributed DLT.
    pub const ATTRIBUTED: [AttributionFlags; 3] = [Self::DRUG1, Self::DRUG2, Self::BOTH];

    pub const fn new(delta1: bool, delta2: bool) -> Self {
        AttributionFlags { delta1, delta2 }
    }

    pub fn implicates(&self, axis: Axis) -> bool {
        match axis {
            Axis::Drug1 => self.delta1,
            Axis::Drug2 => self.delta2,
        }
    }
}

/// `(e^-gamma - 1) / (e^-gamma + 1)`, evaluated as `-tanh(gamma / 2)`.
#[inline]
pub fn interaction_factor(gamma: f64) -> f64 {
    -(0.5 * gamma).tanh()
}

/// Attribution-pattern probabilities at one dose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbs {
    pub drug1_only: f64,
    pub drug2_only: f64,
    pub both: f64,
}

impl OutcomeProbs {
    /// Probabilities from the marginals `a`, `b` and the interaction factor.
    #[inline]
    pub fn from_marginals(a: f64, b: f64, factor: f64) -> Self {
        let cross = a * (1.0 - a) * b * (1.0 - b) * factor;
        OutcomeProbs {
            drug1_only: a * (1.0 - b) - cross,
            drug2_only: b * (1.0 - a) - cross,
            both: a * b + cross,
        }
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.drug1_only + self.drug2_only + self.both
    }

    #[inline]
    pub fn get(&self, flags: AttributionFlags) -> f64 {
        match (flags.delta1, flags.delta2) {
            (true, false) => self.drug1_only,
            (false, true) => self.drug2_only,
            (true, true) => self.both,
            (false, false) => 1.0 - self.total(),
        }
    }
}

#[inline]
fn marginals(dose: StandardizedDose, params: &ModelParams) -> (f64, f64) {
    (dose.x.powf(params.alpha), dose.y.powf(params.beta))
}

pub fn outcome_probs(dose: StandardizedDose, params: &ModelParams) -> OutcomeProbs {
    let (a, b) = marginals(dose, params);
    OutcomeProbs::from_marginals(a, b, interaction_factor(params.gamma))
}

fn check_inputs(dose: StandardizedDose, params: &ModelParams) -> Result<()> {
    if !(dose.x.is_finite() && dose.y.is_finite()) {
        return Err(Error::Domain(format!("non-finite dose {dose:?}")));
    }
    if !(0.0..=1.0).contains(&dose.x) || !(0.0..=1.0).contains(&dose.y) {
        return Err(Error::Domain(format!("dose {dose:?} outside [0, 1]^2")));
    }
    params.validate()
}

/// Probability of the joint pattern `(delta1, delta2)`; the four patterns sum to one.
pub fn joint_outcome_prob(
    dose: StandardizedDose,
    flags: AttributionFlags,
    params: &ModelParams,
) -> Result<f64> {
    check_inputs(dose, params)?;
    let (a, b) = marginals(dose, params);
    let pa = if flags.delta1 { a } else { 1.0 - a };
    let pb = if flags.delta2 { b } else { 1.0 - b };
    let sign = if flags.delta1 == flags.delta2 { 1.0 } else { -1.0 };
    Ok(pa * pb + sign * a * (1.0 - a) * b * (1.0 - b) * interaction_factor(params.gamma))
}

/// Probability of a DLT caused by the drug(s) named in `flags`.
///
/// `flags` must name at least one drug; use [`joint_outcome_prob`] for the
/// no-DLT pattern.
pub fn attribution_prob(
    dose: StandardizedDose,
    flags: AttributionFlags,
    params: &ModelParams,
) -> Result<f64> {
    if flags == AttributionFlags::NONE {
        return Err(Error::Usage(
            "attribution probability needs at least one implicated drug".into(),
        ));
    }
    check_inputs(dose, params)?;
    Ok(outcome_probs(dose, params).get(flags))
}

/// Total probability of a DLT at `dose`.
#[inline]
pub fn prob_dlt(dose: StandardizedDose, params: &ModelParams) -> f64 {
    let (a, b) = marginals(dose, params);
    let factor = interaction_factor(params.gamma);
    a + b - a * b - a * (1.0 - a) * b * (1.0 - b) * factor
}

/// A point on the MTD contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtdSolution {
    pub dose: f64,
    /// Both quadratic roots fell in `(0, 1]`; the lower dose was taken.
    pub ambiguous: bool,
}

/// Solves `prob_dlt = theta` for the dose of one drug given the marginal
/// probability `fixed_marginal` of the other.
fn solve_for_other(
    fixed_marginal: f64,
    exponent: f64,
    factor: f64,
    theta: f64,
    bounds: DoseBounds,
) -> Option<MtdSolution> {
    let a = fixed_marginal;
    let kappa = a * (1.0 - a) * factor;
    let lin = 1.0 - a - kappa;
    let constant = a - theta;

    let mut roots: [Option<f64>; 2] = [None, None];
    if kappa.abs() < KAPPA_TOL {
        if (1.0 - a).abs() > 0.0 {
            roots[0] = Some((theta - a) / (1.0 - a));
        }
    } else {
        let disc = lin * lin - 4.0 * kappa * constant;
        if disc < 0.0 {
            return None;
        }
        let q = -0.5 * (lin + lin.signum() * disc.sqrt());
        if q != 0.0 {
            roots[0] = Some(q / kappa);
            roots[1] = Some(constant / q);
        } else {
            roots[0] = Some(0.0);
        }
    }

    let admissible: Vec<f64> = roots
        .iter()
        .flatten()
        .copied()
        .filter(|t| t.is_finite() && *t > 0.0 && *t <= 1.0)
        .collect();
    let ambiguous = admissible.len() > 1;

    const EDGE: f64 = 1e-12;
    admissible
        .iter()
        .map(|t| t.powf(1.0 / exponent))
        .filter(|d| *d >= bounds.min - EDGE && *d <= bounds.max + EDGE)
        .map(|d| bounds.clamp(d))
        .min_by(|p, q| p.total_cmp(q))
        .map(|dose| MtdSolution { dose, ambiguous })
}

fn check_theta(theta: f64) -> Option<()> {
    (theta > 0.0 && theta < 1.0).then_some(())
}

/// Dose of drug D2 on the MTD contour at `x_star`, if it lies within `y_bounds`.
pub fn mtd_solve_y(
    x_star: f64,
    params: &ModelParams,
    theta: f64,
    y_bounds: DoseBounds,
) -> Option<MtdSolution> {
    check_theta(theta)?;
    let a = x_star.powf(params.alpha);
    solve_for_other(a, params.beta, interaction_factor(params.gamma), theta, y_bounds)
}

/// Dose of drug D1 on the MTD contour at `y_star`, if it lies within `x_bounds`.
pub fn mtd_solve_x(
    y_star: f64,
    params: &ModelParams,
    theta: f64,
    x_bounds: DoseBounds,
) -> Option<MtdSolution> {
    check_theta(theta)?;
    let b = y_star.powf(params.beta);
    solve_for_other(b, params.alpha, interaction_factor(params.gamma), theta, x_bounds)
}

/// Contour solution along one drug's axis.
pub fn mtd_solve(
    fixed: f64,
    fixed_axis: Axis,
    params: &ModelParams,
    theta: f64,
    bounds: DoseBounds,
) -> Option<MtdSolution> {
    match fixed_axis {
        Axis::Drug1 => mtd_solve_y(fixed, params, theta, bounds),
        Axis::Drug2 => mtd_solve_x(fixed, params, theta, bounds),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    /// `None` where the contour leaves the dose rectangle.
    pub y: Option<f64>,
}

/// The MTD contour `prob_dlt(x, y) = theta` sampled over the drug D1 range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtdCurve {
    pub params: ModelParams,
    pub theta: f64,
    pub x_bounds: DoseBounds,
    pub y_bounds: DoseBounds,
    pub points: Vec<CurvePoint>,
    /// Smallest and largest grid `x` with an in-range solution.
    pub domain: Option<(f64, f64)>,
    pub ambiguous: bool,
}

impl MtdCurve {
    pub fn y_at(&self, x: f64) -> Option<f64> {
        mtd_solve_y(x, &self.params, self.theta, self.y_bounds).map(|s| s.dose)
    }

    /// In-range contour points on an `n`-point uniform grid.
    pub fn polyline(&self, n: usize) -> Vec<(f64, f64)> {
        self.x_bounds
            .levels(n)
            .into_iter()
            .filter_map(|x| self.y_at(x).map(|y| (x, y)))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_none()
    }
}

/// Samples the MTD contour on `grid_size` equally spaced `x` values.
pub fn mtd_curve(
    params: &ModelParams,
    theta: f64,
    grid_size: usize,
    x_bounds: DoseBounds,
    y_bounds: DoseBounds,
) -> Result<MtdCurve> {
    if grid_size < 2 {
        return Err(Error::Usage(format!("grid_size must be >= 2, got {grid_size}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta={theta} outside (0, 1)")));
    }
    params.validate()?;
    let mut ambiguous = false;
    let points: Vec<CurvePoint> = x_bounds
        .levels(grid_size)
        .into_iter()
        .map(|x| {
            let sol = mtd_solve_y(x, params, theta, y_bounds);
            ambiguous |= sol.is_some_and(|s| s.ambiguous);
            CurvePoint {
                x,
                y: sol.map(|s| s.dose),
            }
        })
        .collect();
    let mut valid = points.iter().filter(|p| p.y.is_some()).map(|p| p.x);
    let domain = valid.next().map(|first| (first, valid.last().unwrap_or(first)));
    Ok(MtdCurve {
        params: *params,
        theta,
        x_bounds,
        y_bounds,
        points,
        domain,
        ambiguous,
    })
}
