use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, LazyLock, Mutex};

use statrs::function::gamma::ln_gamma;

use super::{ln_weight_product, Eppf, GibbsModel, VTable};
use crate::combinatorics::PartitionShape;
use crate::error::{invalid, Error, Result};
use crate::levy::{stable_model, LevyModel};
use crate::quadrature::QuadratureSpec;
use crate::structural::structural_moment;

const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// EPPF of the `alpha`-stable Poisson-Kingman partition given the total mass,
///
/// ```text
/// p(n_1..n_k | t) = Gamma(1 - alpha) / Gamma(n - k alpha) (kappa alpha / t^alpha)^(k-1)
///                   * mu(n - 1 - k alpha + alpha | t) * prod_i (1 - alpha)_(n_i - 1)
/// ```
///
/// where `mu(q | t)` is the `q`-th structural moment. The constant `kappa`
/// carries the scale of the Laplace exponent; it is determined once from the
/// requirement `p(2 | 1) + p(1, 1 | 1) = 1` and then checked against the
/// normalization at `n = 3`. Under `psi(l) = delta (2 l)^alpha` it should come
/// out as `delta 2^alpha`, see [`ConditionalStableEppf::reference_correction`].
#[derive(Debug)]
pub struct ConditionalStableEppf {
    alpha: f64,
    delta: f64,
    model: LevyModel,
    spec: QuadratureSpec,
    ln_kappa: f64,
    moments: Mutex<HashMap<(u64, u64), f64>>,
}

impl ConditionalStableEppf {
    pub fn new(alpha: f64, delta: f64, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let model = stable_model(alpha, delta)?;
        let mut eppf = Self {
            alpha,
            delta,
            model,
            spec: *spec,
            ln_kappa: 0.0,
            moments: Mutex::new(HashMap::new()),
        };
        let two = PartitionShape::new(vec![2])?;
        let pair = PartitionShape::new(vec![1, 1])?;
        let raw_two = eppf.ln_eppf_uncorrected(&two, 1.0)?.exp();
        let raw_pair = eppf.ln_eppf_uncorrected(&pair, 1.0)?.exp();
        let kappa = (1.0 - raw_two) / raw_pair;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::ToleranceExceeded {
                what: format!("normalizing constant of the conditional stable EPPF is {kappa}"),
                deviation: f64::INFINITY,
                tolerance: NORMALIZATION_TOLERANCE,
            });
        }
        eppf.ln_kappa = kappa.ln();
        let deviation = super::verify_normalization(&eppf.at(1.0)?, 3)?;
        if deviation > NORMALIZATION_TOLERANCE {
            return Err(Error::ToleranceExceeded {
                what: "normalization of the conditional stable EPPF at n = 3".into(),
                deviation,
                tolerance: NORMALIZATION_TOLERANCE,
            });
        }
        Ok(eppf)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The fitted constant `kappa`.
    pub fn correction_factor(&self) -> f64 {
        self.ln_kappa.exp()
    }

    /// `delta 2^alpha`, the value `kappa` takes when the structural moments
    /// and the Laplace exponent share one scale.
    pub fn reference_correction(&self) -> f64 {
        self.delta * 2f64.powf(self.alpha)
    }

    /// Fixes the total mass.
    pub fn at(&self, t: f64) -> Result<ConditionalStableAt<'_>> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", t, "total mass must be positive and finite"));
        }
        Ok(ConditionalStableAt { eppf: self, t })
    }

    /// Weights `V(n, k | t)` for `n <= max_n`, read off the EPPF. Given the
    /// total mass the partition is still of Gibbs type, so the table drives
    /// the predictive sampler.
    pub fn gibbs_model(&self, t: f64, max_n: usize) -> Result<GibbsModel> {
        self.at(t)?;
        if max_n == 0 {
            return Err(invalid("N", 0.0, "table size must be >= 1"));
        }
        let mut rows = Vec::with_capacity(max_n);
        for n in 1..=max_n {
            let mut row = Vec::with_capacity(n);
            for k in 1..=n {
                let mut parts = vec![1; k];
                parts[0] = n - k + 1;
                let shape = PartitionShape::new(parts)?;
                row.push(self.ln_eppf(&shape, t)? - ln_weight_product(self.alpha, &shape));
            }
            rows.push(row);
        }
        let mut params = BTreeMap::new();
        params.insert("delta".to_string(), self.delta);
        params.insert("t".to_string(), t);
        Ok(GibbsModel::from_table(
            self.alpha,
            VTable::from_ln_rows(rows)?,
            format!("conditional-stable(alpha={}, delta={}, t={t})", self.alpha, self.delta),
        )?
        .with_params(params)
        .with_tolerances(self.spec))
    }

    pub fn ln_eppf(&self, shape: &PartitionShape, t: f64) -> Result<f64> {
        Ok(self.ln_eppf_uncorrected(shape, t)? + (shape.k() - 1) as f64 * self.ln_kappa)
    }

    /// The expression with `kappa = 1`.
    pub fn ln_eppf_uncorrected(&self, shape: &PartitionShape, t: f64) -> Result<f64> {
        let (n, k) = (shape.n() as f64, shape.k() as f64);
        let a = self.alpha;
        let q = n - 1.0 - k * a + a;
        let ln_mu = self.ln_moment(q, t)?;
        Ok(ln_gamma(1.0 - a) - ln_gamma(n - k * a) + (k - 1.0) * (a.ln() - a * t.ln())
            + ln_mu
            + ln_weight_product(a, shape))
    }

    fn ln_moment(&self, q: f64, t: f64) -> Result<f64> {
        if q == 0.0 {
            return Ok(0.0);
        }
        let key = (q.to_bits(), t.to_bits());
        if let Some(v) = self.moments.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(*v);
        }
        let v = structural_moment(&self.model, q, t, &self.spec)?.value.ln();
        self.moments
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, v);
        Ok(v)
    }
}

/// [`ConditionalStableEppf`] at a fixed total mass.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalStableAt<'a> {
    eppf: &'a ConditionalStableEppf,
    t: f64,
}

impl ConditionalStableAt<'_> {
    pub fn t(&self) -> f64 {
        self.t
    }
}

impl Eppf for ConditionalStableAt<'_> {
    fn ln_eppf(&self, shape: &PartitionShape) -> Result<f64> {
        self.eppf.ln_eppf(shape, self.t)
    }
}

type Key = [u64; 6];

static CACHE: LazyLock<Mutex<HashMap<Key, Arc<ConditionalStableEppf>>>> = LazyLock::new(Default::default);

/// Shared, cached instance for `(alpha, delta, spec)`.
pub(crate) fn cached(alpha: f64, delta: f64, spec: &QuadratureSpec) -> Result<Arc<ConditionalStableEppf>> {
    let key = [
        alpha.to_bits(),
        delta.to_bits(),
        spec.rel_tol.to_bits(),
        spec.abs_tol.to_bits(),
        (spec.max_subdivisions as u64) << 16 | spec.initial_panels as u64,
        spec.semi_infinite_scale.to_bits(),
    ];
    if let Some(e) = CACHE.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(e.clone());
    }
    let e = Arc::new(ConditionalStableEppf::new(alpha, delta, spec)?);
    CACHE
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, e.clone());
    Ok(e)
}

/// `p(shape | t)` for the `(alpha, delta)`-stable model.
///
/// ```
/// use gibbs_partitions::eppf::conditional_stable_eppf;
/// use gibbs_partitions::combinatorics::PartitionShape;
/// use gibbs_partitions::quadrature::QuadratureSpec;
///
/// let one = PartitionShape::new(vec![1]).unwrap();
/// let p = conditional_stable_eppf(0.5, 1.0, 1.0, &one, &QuadratureSpec::default()).unwrap();
/// assert!((p - 1.0).abs() < 1e-15);
/// ```
pub fn conditional_stable_eppf(
    alpha: f64,
    delta: f64,
    t: f64,
    shape: &PartitionShape,
    spec: &QuadratureSpec,
) -> Result<f64> {
    cached(alpha, delta, spec)?.at(t)?.eppf(shape)
}
