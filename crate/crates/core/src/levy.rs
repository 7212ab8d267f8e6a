//! Lévy densities, Laplace exponents and exponential tilting.
//!
//! Units follow the `2^alpha` stable convention throughout: the positive
//! `(alpha, delta)`-stable law has Lévy density
//! `delta 2^alpha alpha / Gamma(1 - alpha) x^(-1 - alpha)` and Laplace exponent
//! `psi(lambda) = delta (2 lambda)^alpha`. To convert to the more common
//! `psi(lambda) = c lambda^alpha` parameterization set `c = delta 2^alpha`.
//!
//! Tilting a model by `lambda` multiplies the Lévy density by
//! `exp(-lambda x)`, shifts the Laplace exponent to
//! `psi(b + lambda) - psi(lambda)` and reweights the total-mass density by
//! `exp(psi(lambda) - lambda t)`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_0inf, integrate_01_ln, integrate_interval, QuadratureSpec};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub theta: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    pub delta: f64,
}

/// Exponentially tilted stable, parameterized by `zeta >= 0`; the tilt is
/// `lambda = zeta^(1/alpha) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedStableParams {
    pub alpha: f64,
    pub delta: f64,
    pub zeta: f64,
}

impl TiltedStableParams {
    pub fn tilt(&self) -> f64 {
        self.zeta.powf(1.0 / self.alpha) / 2.0
    }
}

/// Compound Poisson sum of Gamma(shape, 1) jumps with the given intensity.
/// Finite activity: the total mass has an atom at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundPoissonGammaParams {
    pub intensity: f64,
    pub shape: f64,
}

/// How the total-mass density `f_T` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    ClosedForm,
    /// Computed by deterministic quadrature of an integral representation.
    SeriesComputed,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevyFamily {
    Gamma(GammaParams),
    Stable(StableParams),
    GeneralizedGamma(TiltedStableParams),
    CompoundPoissonGamma(CompoundPoissonGammaParams),
    Tilted { base: Box<LevyModel>, lambda: f64 },
}

/// A Lévy density `rho` together with its Laplace exponent `psi` and, where
/// available, the density `f_T` of the total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    family: LevyFamily,
    series_spec: QuadratureSpec,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", alpha, "stable index must lie in (0, 1)"))
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, v, "must be positive and finite"))
    }
}

/// Lévy model of the Gamma(theta, 1) subordinator.
pub fn gamma_model(theta: f64) -> Result<LevyModel> {
    gamma_model_with_rate(theta, 1.0)
}

pub fn gamma_model_with_rate(theta: f64, rate: f64) -> Result<LevyModel> {
    check_positive("theta", theta)?;
    check_positive("rate", rate)?;
    Ok(LevyModel::new(LevyFamily::Gamma(GammaParams { theta, rate })))
}

/// Positive `(alpha, delta)`-stable model.
pub fn stable_model(alpha: f64, delta: f64) -> Result<LevyModel> {
    check_alpha(alpha)?;
    check_positive("delta", delta)?;
    Ok(LevyModel::new(LevyFamily::Stable(StableParams { alpha, delta })))
}

/// Generalized Gamma (exponentially tilted stable) model. At `alpha = 1/2` this
/// is the inverse Gaussian `(delta, zeta)` law.
pub fn generalized_gamma_model(alpha: f64, delta: f64, zeta: f64) -> Result<LevyModel> {
    check_alpha(alpha)?;
    check_positive("delta", delta)?;
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(invalid("zeta", zeta, "tilt parameter must be >= 0"));
    }
    Ok(LevyModel::new(LevyFamily::GeneralizedGamma(
        TiltedStableParams { alpha, delta, zeta },
    )))
}

pub fn compound_poisson_gamma_model(intensity: f64, shape: f64) -> Result<LevyModel> {
    check_positive("intensity", intensity)?;
    check_positive("shape", shape)?;
    Ok(LevyModel::new(LevyFamily::CompoundPoissonGamma(
        CompoundPoissonGammaParams { intensity, shape },
    )))
}

/// Exponential tilt of `model` by `lambda`.
pub fn tilt(model: &LevyModel, lambda: f64) -> Result<LevyModel> {
    model.tilt(lambda)
}

/// Inverse Gaussian `(delta, zeta)` density in closed form.
pub fn inverse_gaussian_ln_density(delta: f64, zeta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    delta.ln() - LN_SQRT_2PI + delta * zeta - 1.5 * t.ln()
        - 0.5 * (delta * delta / t + zeta * zeta * t)
}

impl LevyModel {
    fn new(family: LevyFamily) -> Self {
        Self {
            family,
            series_spec: QuadratureSpec::default().with_rel_tol(1e-12).with_abs_tol(1e-300),
        }
    }

    /// Replaces the quadrature settings used for series-computed densities.
    pub fn with_series_spec(mut self, spec: QuadratureSpec) -> Self {
        self.series_spec = spec;
        self
    }

    pub fn family(&self) -> &LevyFamily {
        &self.family
    }

    pub fn name(&self) -> String {
        match &self.family {
            LevyFamily::Gamma(p) => format!("gamma(theta={}, rate={})", p.theta, p.rate),
            LevyFamily::Stable(p) => format!("stable(alpha={}, delta={})", p.alpha, p.delta),
            LevyFamily::GeneralizedGamma(p) => format!(
                "generalized-gamma(alpha={}, delta={}, zeta={})",
                p.alpha, p.delta, p.zeta
            ),
            LevyFamily::CompoundPoissonGamma(p) => format!(
                "compound-poisson-gamma(intensity={}, shape={})",
                p.intensity, p.shape
            ),
            LevyFamily::Tilted { base, lambda } => format!("tilt({}, lambda={lambda})", base.name()),
        }
    }

    /// Stable index of the underlying stable family, if any.
    pub fn stable_index(&self) -> Option<f64> {
        match &self.family {
            LevyFamily::Stable(p) => Some(p.alpha),
            LevyFamily::GeneralizedGamma(p) => Some(p.alpha),
            LevyFamily::Tilted { base, .. } => base.stable_index(),
            _ => None,
        }
    }

    /// Whether `int_0^inf rho(x) dx` is finite. Decided per family.
    pub fn total_mass_finite(&self) -> bool {
        match &self.family {
            LevyFamily::CompoundPoissonGamma(_) => true,
            LevyFamily::Tilted { base, .. } => base.total_mass_finite(),
            _ => false,
        }
    }

    /// Fails for finite-activity models, whose total mass is zero with
    /// positive probability and so cannot be normalized.
    pub fn ensure_normalizable(&self) -> Result<()> {
        if self.total_mass_finite() {
            Err(Error::MissingDensity(format!(
                "{} (finite Lévy mass: P(T = 0) = {:.6e} > 0)",
                self.name(),
                (-self.laplace_exponent(f64::INFINITY)).exp()
            )))
        } else {
            Ok(())
        }
    }

    pub fn ln_levy_density(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        match &self.family {
            LevyFamily::Gamma(p) => p.theta.ln() - x.ln() - p.rate * x,
            LevyFamily::Stable(p) => stable_ln_levy(p.alpha, p.delta, x),
            LevyFamily::GeneralizedGamma(p) => {
                stable_ln_levy(p.alpha, p.delta, x) - p.tilt() * x
            }
            LevyFamily::CompoundPoissonGamma(p) => {
                p.intensity.ln() + (p.shape - 1.0) * x.ln() - x - ln_gamma(p.shape)
            }
            LevyFamily::Tilted { base, lambda } => base.ln_levy_density(x) - lambda * x,
        }
    }

    pub fn levy_density(&self, x: f64) -> f64 {
        self.ln_levy_density(x).exp()
    }

    /// Laplace exponent `psi(lambda)`, with `psi(inf)` the total Lévy mass.
    pub fn laplace_exponent(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        match &self.family {
            LevyFamily::Gamma(p) => p.theta * (lambda / p.rate).ln_1p(),
            LevyFamily::Stable(p) => p.delta * (2.0 * lambda).powf(p.alpha),
            LevyFamily::GeneralizedGamma(p) => {
                let z = p.zeta.powf(1.0 / p.alpha);
                -p.delta * p.zeta + p.delta * (z + 2.0 * lambda).powf(p.alpha)
            }
            LevyFamily::CompoundPoissonGamma(p) => {
                if lambda.is_infinite() {
                    p.intensity
                } else {
                    -p.intensity * (-p.shape * lambda.ln_1p()).exp_m1()
                }
            }
            LevyFamily::Tilted { base, lambda: tilt } => {
                base.laplace_exponent(lambda + tilt) - base.laplace_exponent(*tilt)
            }
        }
    }

    pub fn density_kind(&self) -> DensityKind {
        match &self.family {
            LevyFamily::Gamma(_) => DensityKind::ClosedForm,
            LevyFamily::Stable(p) if p.alpha == 0.5 => DensityKind::ClosedForm,
            LevyFamily::GeneralizedGamma(p) if p.alpha == 0.5 => DensityKind::ClosedForm,
            LevyFamily::Stable(_) | LevyFamily::GeneralizedGamma(_) => DensityKind::SeriesComputed,
            LevyFamily::CompoundPoissonGamma(_) => DensityKind::Unavailable,
            LevyFamily::Tilted { base, .. } => base.density_kind(),
        }
    }

    /// `ln f_T(t)` for the total mass `T`.
    pub fn ln_density(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        match &self.family {
            LevyFamily::Gamma(p) => Ok(p.theta * p.rate.ln() + (p.theta - 1.0) * t.ln()
                - p.rate * t
                - ln_gamma(p.theta)),
            LevyFamily::Stable(p) => stable_ln_density(p.alpha, p.delta, t, &self.series_spec),
            LevyFamily::GeneralizedGamma(p) => {
                if p.alpha == 0.5 {
                    Ok(inverse_gaussian_ln_density(p.delta, p.zeta, t))
                } else {
                    let base = stable_ln_density(p.alpha, p.delta, t, &self.series_spec)?;
                    Ok(base + p.delta * p.zeta - p.tilt() * t)
                }
            }
            LevyFamily::CompoundPoissonGamma(_) => Err(Error::MissingDensity(self.name())),
            LevyFamily::Tilted { base, lambda } => {
                Ok(base.ln_density(t)? + base.laplace_exponent(*lambda) - lambda * t)
            }
        }
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        Ok(self.ln_density(t)?.exp())
    }

    /// Exponential tilt by `lambda >= 0`; `lambda = 0` is the identity.
    pub fn tilt(&self, lambda: f64) -> Result<LevyModel> {
        if !(lambda >= 0.0) || lambda.is_infinite() {
            return Err(invalid("lambda", lambda, "tilt must be a finite value >= 0"));
        }
        if !self.laplace_exponent(lambda).is_finite() {
            return Err(Error::InfiniteExponent(lambda));
        }
        Ok(LevyModel {
            family: LevyFamily::Tilted {
                base: Box::new(self.clone()),
                lambda,
            },
            series_spec: self.series_spec,
        })
    }

    /// `int_lo^hi rho(x) dx` by quadrature.
    pub fn levy_mass_between(&self, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64> {
        Ok(integrate_interval(|x| self.ln_levy_density(x), lo, hi, spec)?.value)
    }
}

fn stable_ln_levy(alpha: f64, delta: f64, x: f64) -> f64 {
    delta.ln() + alpha * std::f64::consts::LN_2 + alpha.ln() - ln_gamma(1.0 - alpha)
        - (1.0 + alpha) * x.ln()
}

/// `ln f(t)` of the positive stable law with `psi(lambda) = delta (2 lambda)^alpha`.
fn stable_ln_density(alpha: f64, delta: f64, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    if alpha == 0.5 {
        return Ok(delta.ln() - LN_SQRT_2PI - 1.5 * t.ln() - delta * delta / (2.0 * t));
    }
    // T = c^(1/alpha) S with S standard, E exp(-lambda S) = exp(-lambda^alpha).
    let ln_c = delta.ln() + alpha * std::f64::consts::LN_2;
    let ln_scale = ln_c / alpha;
    Ok(standard_stable_ln_density(alpha, t.ln() - ln_scale, spec)? - ln_scale)
}

/// Zolotarev/Kanter integral representation of the standard positive stable
/// density,
/// `f(x) = alpha / ((1 - alpha) pi) x^(-1/(1-alpha)) int_0^pi A(u) exp(-A(u) x^(-alpha/(1-alpha))) du`
/// with `A(u) = sin(alpha u)^(alpha/(1-alpha)) sin((1-alpha) u) / sin(u)^(1/(1-alpha))`.
pub(crate) fn standard_stable_ln_density(alpha: f64, ln_x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let beta = 1.0 / (1.0 - alpha);
    let ln_w = -alpha * beta * ln_x; // ln x^(-alpha/(1-alpha))
    let est = integrate_01_ln(
        |p, q| {
            let u = PI * p;
            // sin(pi p) = sin(pi (1 - p)); use the smaller argument.
            let sin_u = (PI * p.min(q)).sin();
            let ln_a = alpha * beta * (alpha * u).sin().ln() + ((1.0 - alpha) * u).sin().ln()
                - beta * sin_u.ln();
            ln_a - (ln_a + ln_w).exp()
        },
        spec,
    )?;
    // du = pi dp cancels the 1/pi prefactor
    Ok(alpha.ln() + beta.ln() - beta * ln_x + est.ln_value)
}

/// Residual `|psi(b) - int_0^inf (1 - e^{-b x}) rho(x) dx|`.
pub fn verify_laplace_exponent(model: &LevyModel, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(b > 0.0) {
        return Err(invalid("b", b, "must be positive"));
    }
    let est = integrate_0inf(
        |x| (-(-b * x).exp_m1()).ln() + model.ln_levy_density(x),
        spec,
    )?;
    Ok((model.laplace_exponent(b) - est.value).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_0inf;

    const E: f64 = std::f64::consts::E;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gamma_examples() {
        let m = gamma_model(2.0).unwrap();
        assert_eq!(m.laplace_exponent(0.0), 0.0);
        assert!((m.laplace_exponent(1.0) - 2.0 * 2f64.ln()).abs() < 1e-15);
        let m1 = gamma_model(1.0).unwrap();
        assert!((m1.levy_density(1.0) - 1.0 / E).abs() < 1e-15);
        assert!(!m.total_mass_finite());
        assert!(gamma_model(0.0).is_err());
        assert!(gamma_model(-1.0).is_err());
    }

    #[test]
    fn stable_examples() {
        let m = stable_model(0.5, 1.0).unwrap();
        assert!((m.laplace_exponent(2.0) - 2.0).abs() < 1e-15);
        let expect = (2.0 * PI).powf(-0.5) * (-0.5f64).exp();
        assert!((m.density(1.0).unwrap() - expect).abs() < 1e-15);
        assert_eq!(m.density_kind(), DensityKind::ClosedForm);
        assert_eq!(stable_model(0.3, 1.0).unwrap().density_kind(), DensityKind::SeriesComputed);
        assert!(stable_model(1.0, 1.0).is_err());
        assert!(stable_model(0.5, 0.0).is_err());
    }

    #[test]
    fn stable_levy_mass_diverges_near_zero() {
        for m in [
            stable_model(0.5, 1.0).unwrap(),
            stable_model(0.2, 2.0).unwrap(),
            gamma_model(1.5).unwrap(),
            generalized_gamma_model(0.5, 1.0, 1.0).unwrap(),
            gamma_model(1.0).unwrap().tilt(3.0).unwrap(),
        ] {
            assert!(!m.total_mass_finite());
            let mut last = 0.0;
            for eps in [1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
                let mass = m.levy_mass_between(eps, 1.0, &spec()).unwrap();
                assert!(mass.is_finite());
                assert!(mass > last * 1.2, "{}: eps={eps} mass={mass}", m.name());
                last = mass;
            }
        }
    }

    #[test]
    fn series_density_matches_closed_form_at_half() {
        // standard stable at 1/2: exp(-sqrt(lambda)) <-> x^{-3/2} e^{-1/(4x)} / (2 sqrt(pi))
        for x in [0.05, 0.3, 1.0, 4.0, 50.0] {
            let series = standard_stable_ln_density(0.5, f64::ln(x), &spec().with_rel_tol(1e-12)).unwrap();
            let exact = -(2.0 * PI.sqrt()).ln() - 1.5 * f64::ln(x) - 1.0 / (4.0 * x);
            assert!((series - exact).abs() < 1e-10, "x={x}: {series} vs {exact}");
        }
    }

    #[test]
    fn series_density_has_the_right_laplace_transform() {
        let m = stable_model(0.3, 0.7).unwrap();
        for lambda in [0.5, 2.0] {
            let est = integrate_0inf(
                |t| m.ln_density(t).unwrap() - lambda * t,
                &spec().with_rel_tol(1e-8),
            )
            .unwrap();
            let exact = (-m.laplace_exponent(lambda)).exp();
            assert!((est.value - exact).abs() < 1e-7, "lambda={lambda}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn tilting_gamma_gives_gamma_with_higher_rate() {
        let theta = 2.5;
        let lambda = 0.7;
        let tilted = gamma_model(theta).unwrap().tilt(lambda).unwrap();
        let direct = gamma_model_with_rate(theta, 1.0 + lambda).unwrap();
        for t in [0.01, 0.5, 1.0, 3.0, 20.0] {
            let a = tilted.density(t).unwrap();
            let b = direct.density(t).unwrap();
            assert!((a - b).abs() <= 1e-12 * b, "t={t}");
        }
    }

    #[test]
    fn generalized_gamma_is_tilted_stable() {
        for (alpha, delta, zeta) in [(0.5, 1.0, 1.0), (0.5, 2.0, 0.3), (0.3, 1.0, 2.0)] {
            let gg = generalized_gamma_model(alpha, delta, zeta).unwrap();
            let lambda = f64::powf(zeta, 1.0 / alpha) / 2.0;
            let via_tilt = stable_model(alpha, delta).unwrap().tilt(lambda).unwrap();
            for b in [0.0, 0.1, 1.0, 10.0] {
                let a = gg.laplace_exponent(b);
                let c = via_tilt.laplace_exponent(b);
                assert!((a - c).abs() <= 1e-12 * a.abs().max(1.0), "psi({b})");
            }
            for x in [0.01, 1.0, 5.0] {
                let a = gg.ln_levy_density(x);
                let c = via_tilt.ln_levy_density(x);
                assert!((a - c).abs() < 1e-12);
            }
            for t in [0.2, 1.0, 3.0] {
                let a = gg.ln_density(t).unwrap();
                let c = via_tilt.ln_density(t).unwrap();
                assert!((a - c).abs() < 1e-9, "t={t}: {a} vs {c}");
            }
        }
    }

    #[test]
    fn generalized_gamma_examples() {
        let z0 = generalized_gamma_model(0.5, 1.3, 0.0).unwrap();
        let st = stable_model(0.5, 1.3).unwrap();
        for t in [0.1, 1.0, 7.0] {
            assert!((z0.ln_density(t).unwrap() - st.ln_density(t).unwrap()).abs() < 1e-14);
            assert!((z0.laplace_exponent(t) - st.laplace_exponent(t)).abs() < 1e-14);
        }
        let ig = generalized_gamma_model(0.5, 1.0, 1.0).unwrap();
        let b: f64 = 0.8;
        assert!((ig.laplace_exponent(b) - (-1.0 + (1.0 + 2.0 * b).sqrt())).abs() < 1e-15);
        assert!((ig.density(1.0).unwrap() - (2.0 * PI).powf(-0.5)).abs() < 1e-15);
        assert!(generalized_gamma_model(0.5, 1.0, -0.1).is_err());
    }

    #[test]
    fn tilt_composes() {
        let base = stable_model(0.5, 1.0).unwrap();
        let twice = base.tilt(0.4).unwrap().tilt(1.1).unwrap();
        let once = base.tilt(1.5).unwrap();
        for x in [0.1, 1.0, 4.0] {
            let a = twice.levy_density(x);
            let b = once.levy_density(x);
            assert!((a - b).abs() <= 1e-12 * b);
            let a = twice.laplace_exponent(x);
            let b = once.laplace_exponent(x);
            assert!((a - b).abs() <= 1e-12 * b);
            let a = twice.density(x).unwrap();
            let b = once.density(x).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
        assert_eq!(base.tilt(0.3).unwrap().laplace_exponent(0.0), 0.0);
        assert!(base.tilt(-1.0).is_err());
        assert!(base.tilt(f64::NAN).is_err());
    }

    #[test]
    fn tilted_densities_normalize() {
        for m in [
            gamma_model(2.0).unwrap().tilt(0.5).unwrap(),
            gamma_model(0.5).unwrap().tilt(3.0).unwrap(),
            stable_model(0.5, 1.0).unwrap().tilt(0.5).unwrap(),
            stable_model(0.5, 2.0).unwrap().tilt(2.0).unwrap(),
        ] {
            let est = integrate_0inf(|t| m.ln_density(t).unwrap(), &spec().with_rel_tol(1e-11)).unwrap();
            assert!((est.value - 1.0).abs() < 1e-8, "{}: {}", m.name(), est.value);
        }
    }

    #[test]
    fn laplace_exponent_identity() {
        for m in [gamma_model(2.0).unwrap(), stable_model(0.5, 1.0).unwrap()] {
            let r = verify_laplace_exponent(&m, 1.0, &spec().with_rel_tol(1e-11)).unwrap();
            assert!(r < 1e-8, "{}: {r}", m.name());
        }
        assert!(verify_laplace_exponent(&gamma_model(1.0).unwrap(), 0.0, &spec()).is_err());
        let m = gamma_model(3.0).unwrap();
        assert!(m.laplace_exponent(1e-12) < 1e-11);
    }

    #[test]
    fn laplace_exponent_is_concave_and_increasing() {
        for m in [
            gamma_model(1.5).unwrap(),
            stable_model(0.7, 1.0).unwrap(),
            generalized_gamma_model(0.5, 1.0, 2.0).unwrap(),
            stable_model(0.5, 1.0).unwrap().tilt(0.3).unwrap(),
        ] {
            let grid: Vec<f64> = (0..60).map(|i| 0.25 * i as f64).collect();
            let psi: Vec<f64> = grid.iter().map(|&l| m.laplace_exponent(l)).collect();
            for w in psi.windows(2) {
                assert!(w[1] >= w[0]);
            }
            for w in psi.windows(3) {
                assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-12, "{}", m.name());
            }
        }
    }

    #[test]
    fn finite_activity_is_rejected() {
        let cp = compound_poisson_gamma_model(2.0, 0.5).unwrap();
        assert!(cp.total_mass_finite());
        assert!((cp.laplace_exponent(f64::INFINITY) - 2.0).abs() < 1e-15);
        assert!(cp.ensure_normalizable().is_err());
        assert!(matches!(cp.ln_density(1.0), Err(Error::MissingDensity(_))));
        let r = verify_laplace_exponent(&cp, 1.0, &spec()).unwrap();
        assert!(r < 1e-9);
        assert!(gamma_model(1.0).unwrap().ensure_normalizable().is_ok());
    }
}
