use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use statrs::function::gamma::{gamma_lr, ln_gamma};

use super::conditional::{cached, ConditionalStableEppf};
use super::{ln_weight_product, Eppf};
use crate::combinatorics::PartitionShape;
use crate::error::{invalid, Error, Result};
use crate::levy::{generalized_gamma_model, LevyModel};
use crate::quadrature::{integrate_01_ln, integrate_0inf_ln, LogEstimate, QuadratureSpec};

const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// Where a mixing density lives; quadrature is organised around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// `(0, inf)`, with `scale` a typical value of `t`.
    HalfLine { scale: f64 },
    /// `(lo, hi)`; the density is taken to vanish outside.
    Interval(f64, f64),
}

type LnDensity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A probability density `gamma(t)` on `(0, inf)`, checked to integrate to
/// one within `1e-8` when built.
#[derive(Clone)]
pub struct MixingDensity {
    name: String,
    ln_density: LnDensity,
    support: Support,
}

impl fmt::Debug for MixingDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixingDensity")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

fn integrate_support<F>(mut ln_f: F, support: Support, spec: &QuadratureSpec) -> Result<LogEstimate>
where
    F: FnMut(f64) -> f64,
{
    Ok(match support {
        Support::HalfLine { scale } => integrate_0inf_ln(ln_f, &spec.with_scale(scale))?,
        Support::Interval(lo, hi) => {
            let ln_w = (hi - lo).ln();
            integrate_01_ln(|u, u_c| ln_f(lo * u_c + hi * u) + ln_w, spec)?
        }
    })
}

impl MixingDensity {
    /// Wraps `ln gamma(t)`; fails unless it integrates to one.
    pub fn new<F>(name: impl Into<String>, ln_density: F, support: Support) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        match support {
            Support::HalfLine { scale } if !(scale > 0.0 && scale.is_finite()) => {
                return Err(invalid("scale", scale, "must be positive and finite"));
            }
            Support::Interval(lo, hi) if !(lo >= 0.0 && hi > lo && hi.is_finite()) => {
                return Err(invalid("hi", hi, "support must satisfy 0 <= lo < hi < inf"));
            }
            _ => {}
        }
        let density = Self {
            name: name.into(),
            ln_density: Arc::new(ln_density),
            support,
        };
        let spec = QuadratureSpec::default().with_rel_tol(1e-11);
        let total = integrate_support(|t| density.ln_density(t), support, &spec)?.value();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::ToleranceExceeded {
                what: format!("mixing density {} does not integrate to one", density.name),
                deviation: (total - 1.0).abs(),
                tolerance: NORMALIZATION_TOLERANCE,
            });
        }
        Ok(density)
    }

    /// Total-mass density of a Lévy model.
    pub fn from_levy(model: &LevyModel) -> Result<Self> {
        model.ensure_normalizable()?;
        let m = model.clone();
        // an evaluation error surfaces as a non-finite quadrature value
        Self::new(model.name(), move |t| m.ln_density(t).unwrap_or(f64::NAN), Support::HalfLine {
            scale: 1.0,
        })
    }

    /// Tilted stable density `f_(alpha,delta)(t) exp(psi(l) - l t)` with
    /// `l = zeta^(1/alpha) / 2`, i.e. the generalized Gamma total mass.
    pub fn tilted_stable(alpha: f64, delta: f64, zeta: f64) -> Result<Self> {
        Self::from_levy(&generalized_gamma_model(alpha, delta, zeta)?)
    }

    /// Gamma(shape, rate) restricted to `(0, upper)` and renormalized.
    pub fn truncated_gamma(shape: f64, rate: f64, upper: f64) -> Result<Self> {
        for (name, v) in [("shape", shape), ("rate", rate), ("upper", upper)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, v, "must be positive and finite"));
            }
        }
        let ln_norm = shape * rate.ln() - ln_gamma(shape) - gamma_lr(shape, rate * upper).ln();
        Self::new(
            format!("truncated-gamma(shape={shape}, rate={rate}, upper={upper})"),
            move |t| {
                if t <= 0.0 || t >= upper {
                    f64::NEG_INFINITY
                } else {
                    ln_norm + (shape - 1.0) * t.ln() - rate * t
                }
            },
            Support::Interval(0.0, upper),
        )
    }

    /// Log-normal density, supported numerically on `exp(mu +- 12 sigma)`.
    pub fn log_normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid("mu", mu, "must be finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", sigma, "must be positive and finite"));
        }
        let ln_norm = -(sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
        Self::new(
            format!("log-normal(mu={mu}, sigma={sigma})"),
            move |t| {
                let z = (t.ln() - mu) / sigma;
                ln_norm - t.ln() - 0.5 * z * z
            },
            Support::Interval((mu - 12.0 * sigma).exp(), (mu + 12.0 * sigma).exp()),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn ln_density(&self, t: f64) -> f64 {
        if t > 0.0 {
            (self.ln_density)(t)
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// `int p(shape | t) gamma(t) dt` for the `(alpha, delta)`-stable
/// conditional EPPF mixed over `gamma`.
#[derive(Debug)]
pub struct MixtureEppf {
    conditional: Arc<ConditionalStableEppf>,
    mixing: MixingDensity,
    spec: QuadratureSpec,
    // ln of the integral without the block weight product, per (n, k)
    cache: Mutex<HashMap<(usize, usize), f64>>,
}

impl MixtureEppf {
    /// The conditional EPPF is evaluated with a relative tolerance a hundred
    /// times tighter than `spec` (floored at `1e-12`) so that its noise stays
    /// below the outer quadrature's target.
    pub fn new(alpha: f64, delta: f64, mixing: MixingDensity, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let inner = spec.with_rel_tol((spec.rel_tol * 1e-2).max(1e-12));
        Ok(Self {
            conditional: cached(alpha, delta, &inner)?,
            mixing,
            spec: *spec,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn conditional(&self) -> &ConditionalStableEppf {
        &self.conditional
    }

    pub fn mixing(&self) -> &MixingDensity {
        &self.mixing
    }

    fn ln_integral(&self, shape: &PartitionShape) -> Result<f64> {
        let key = (shape.n(), shape.k());
        if let Some(v) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(*v);
        }
        let failure = RefCell::new(None);
        let est = integrate_support(
            |t| {
                let ln_g = self.mixing.ln_density(t);
                // gamma is normalized and p <= 1: the contribution is below
                // the smallest subnormal
                if !(ln_g > -745.0) {
                    return if ln_g.is_nan() { f64::NAN } else { f64::NEG_INFINITY };
                }
                match self.conditional.ln_eppf(shape, t) {
                    Ok(v) => ln_g + v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NEG_INFINITY
                    }
                }
            },
            self.mixing.support,
            &self.spec,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let v = est?.ln_value - ln_weight_product(self.conditional.alpha(), shape);
        self.cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, v);
        Ok(v)
    }
}

impl Eppf for MixtureEppf {
    fn ln_eppf(&self, shape: &PartitionShape) -> Result<f64> {
        Ok(self.ln_integral(shape)? + ln_weight_product(self.conditional.alpha(), shape))
    }
}

/// One-off evaluation of `int p(shape | t) gamma(t) dt`. Build a
/// [`MixtureEppf`] to evaluate many shapes.
pub fn mixture_eppf(
    alpha: f64,
    delta: f64,
    mixing: &MixingDensity,
    shape: &PartitionShape,
    spec: &QuadratureSpec,
) -> Result<f64> {
    MixtureEppf::new(alpha, delta, mixing.clone(), spec)?.eppf(shape)
}
