//! Conditional structural densities.
//!
//! Given the total mass `T = t`, the first size-biased pick `P_1` of the
//! normalized jumps has density
//!
//! ```text
//! f(p | t) = p t rho(p t) f_T((1 - p) t) / f_T(t),   0 < p < 1.
//! ```
//!
//! The density can blow up (integrably) at either end of the unit interval;
//! evaluation is only defined on the open interval and the quadrature owns
//! the endpoint handling.

use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::quadrature::{integrate_01_ln, Estimate, QuadratureSpec};

/// Structural density of the first size-biased pick for a Lévy model.
#[derive(Debug, Clone)]
pub struct StructuralDensity {
    model: LevyModel,
}

/// Structural density with the total mass fixed at `t`; `ln f_T(t)` is
/// computed once on construction.
#[derive(Debug, Clone)]
pub struct ConditionalStructural<'a> {
    model: &'a LevyModel,
    t: f64,
    ln_ft: f64,
}

/// Builds the structural density evaluator for `model`.
pub fn structural_density(model: &LevyModel) -> Result<StructuralDensity> {
    model.ensure_normalizable()?;
    if model.density_kind() == crate::levy::DensityKind::Unavailable {
        return Err(Error::MissingDensity(model.name()));
    }
    Ok(StructuralDensity {
        model: model.clone(),
    })
}

impl StructuralDensity {
    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn at(&self, t: f64) -> Result<ConditionalStructural<'_>> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(crate::error::invalid("t", t, "total mass must be positive"));
        }
        let ln_ft = self.model.ln_density(t)?;
        if ln_ft == f64::NEG_INFINITY {
            return Err(Error::ToleranceExceeded {
                what: format!("f_T({t}) underflows for {}", self.model.name()),
                deviation: 0.0,
                tolerance: 0.0,
            });
        }
        Ok(ConditionalStructural {
            model: &self.model,
            t,
            ln_ft,
        })
    }

    /// `ln f(p | t)` with `1 - p` computed internally.
    pub fn ln_evaluate(&self, p: f64, t: f64) -> Result<f64> {
        self.at(t)?.ln_evaluate(p, 1.0 - p)
    }

    pub fn evaluate(&self, p: f64, t: f64) -> Result<f64> {
        Ok(self.ln_evaluate(p, t)?.exp())
    }
}

impl ConditionalStructural<'_> {
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `ln f(p | t)`, taking `p` and `1 - p` separately.
    pub fn ln_evaluate(&self, p: f64, p_bar: f64) -> Result<f64> {
        if !(p > 0.0 && p_bar > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        let x = p * self.t;
        Ok(x.ln() + self.model.ln_levy_density(x) + self.model.ln_density(p_bar * self.t)?
            - self.ln_ft)
    }

    /// `E[P_1^q | T = t]` by quadrature, to relative accuracy `spec.rel_tol`.
    pub fn moment(&self, q: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        let failure = RefCell::new(None);
        let est = integrate_01_ln(
            |p, p_bar| match self.ln_evaluate(p, p_bar) {
                Ok(v) => q * p.ln() + v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            spec,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let est = est?;
        let value = est.value();
        Ok(Estimate {
            value,
            error: est.rel_error * value,
            evaluations: est.evaluations,
        })
    }
}

/// `mu(q | t) = E[P_1^q | T = t]` for `q >= 0`.
pub fn structural_moment(model: &LevyModel, q: f64, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(q >= 0.0) {
        return Err(crate::error::invalid("q", q, "moment order must be >= 0"));
    }
    structural_density(model)?.at(t)?.moment(q, spec)
}

/// Maximum relative discrepancy between the structural densities of `model`
/// and of `model` tilted by `lambda`, over every `(p, t)` in the grid.
/// Differences are taken relative to the untilted value with a floor of
/// `1e-300`.
pub fn verify_tilt_invariance(model: &LevyModel, lambda: f64, grid: &[(f64, f64)]) -> Result<f64> {
    let base = structural_density(model)?;
    let tilted = structural_density(&model.tilt(lambda)?)?;
    let mut worst: f64 = 0.0;
    for &(p, t) in grid {
        let a = base.evaluate(p, t)?;
        let b = tilted.evaluate(p, t)?;
        worst = worst.max((a - b).abs() / a.abs().max(1e-300));
    }
    Ok(worst)
}

/// Closed-form structural density of the `1/2`-stable family,
/// `delta / (sqrt(2 pi) sqrt(p t)) (1 - p)^(-3/2) exp(-p delta^2 / (2 (1 - p) t))`.
///
/// It is shared by every exponential tilt of the `1/2`-stable law, including
/// the inverse Gaussian.
pub fn half_stable_structural_ln_density(delta: f64, p: f64, p_bar: f64, t: f64) -> f64 {
    delta.ln() - 0.5 * (2.0 * PI).ln() - 0.5 * (p * t).ln() - 1.5 * p_bar.ln()
        - 0.5 * p * delta * delta / (p_bar * t)
}

/// Structural density of the Gamma(theta) family, `theta (1 - p)^(theta - 1)`,
/// the Beta(1, theta) density regardless of `t`.
pub fn gamma_structural_ln_density(theta: f64, p_bar: f64) -> f64 {
    theta.ln() + (theta - 1.0) * p_bar.ln()
}

/// The 9 x 3 grid `p in {0.1, ..., 0.9}`, `t in {0.5, 1, 2}`.
pub fn default_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::with_capacity(27);
    for i in 1..=9 {
        for t in [0.5, 1.0, 2.0] {
            g.push((i as f64 / 10.0, t));
        }
    }
    g
}
