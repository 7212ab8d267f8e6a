use std::collections::{BTreeMap, HashMap};
use std::sync::{LazyLock, Mutex};

use statrs::function::gamma::ln_gamma;

use super::{verify_gibbs_recursion, GibbsModel, VTable};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_0inf_ln, QuadratureSpec};

const V11_TOLERANCE: f64 = 1e-8;
const RECURSION_TOLERANCE: f64 = 1e-6;

type CacheKey = [u64; 8];

static CACHE: LazyLock<Mutex<HashMap<CacheKey, GibbsModel>>> = LazyLock::new(Default::default);

fn cache_key(alpha: f64, delta: f64, zeta: f64, max_n: usize, spec: &QuadratureSpec) -> CacheKey {
    [
        alpha.to_bits(),
        delta.to_bits(),
        zeta.to_bits(),
        max_n as u64,
        spec.rel_tol.to_bits(),
        spec.abs_tol.to_bits(),
        (spec.max_subdivisions as u64) << 16 | spec.initial_panels as u64,
        spec.semi_infinite_scale.to_bits(),
    ]
}

/// Generalized Gamma weights
///
/// ```text
/// V(n, k) = e^(delta zeta) delta^k alpha^k 2^n / Gamma(n)
///           * int_0^inf l^(n-1) exp(-delta (z + 2 l)^alpha) (z + 2 l)^(k alpha - n) dl
/// ```
///
/// with `z = zeta^(1/alpha)`, tabled for `1 <= k <= n <= max_n`. The table is
/// checked on construction (`V(1,1) = 1` within `1e-8`, recursion within
/// `1e-6`) and cached per parameter set and tolerance.
pub fn gg_v_weights(alpha: f64, delta: f64, zeta: f64, max_n: usize, spec: &QuadratureSpec) -> Result<GibbsModel> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", alpha, "must lie in (0, 1)"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", delta, "must be positive and finite"));
    }
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(invalid("zeta", zeta, "must be >= 0 and finite"));
    }
    if max_n == 0 {
        return Err(invalid("N", 0.0, "table size must be >= 1"));
    }
    spec.validate()?;
    let key = cache_key(alpha, delta, zeta, max_n, spec);
    if let Some(m) = CACHE.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(m.clone());
    }
    let model = build(alpha, delta, zeta, max_n, spec)?;
    CACHE
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, model.clone());
    Ok(model)
}

fn build(alpha: f64, delta: f64, zeta: f64, max_n: usize, spec: &QuadratureSpec) -> Result<GibbsModel> {
    let z = zeta.powf(1.0 / alpha);
    let mut rows = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let mut row = Vec::with_capacity(n);
        for k in 1..=n {
            row.push(ln_v(alpha, delta, zeta, z, n, k, spec)?);
        }
        rows.push(row);
    }
    let table = VTable::from_ln_rows(rows)?;
    let mut params = BTreeMap::new();
    params.insert("delta".to_string(), delta);
    params.insert("zeta".to_string(), zeta);
    let model = GibbsModel::from_table(alpha, table, format!("gg(alpha={alpha}, delta={delta}, zeta={zeta})"))?
        .with_params(params)
        .with_tolerances(*spec);

    let v11 = model.v(1, 1)?;
    if (v11 - 1.0).abs() > V11_TOLERANCE {
        return Err(Error::ToleranceExceeded {
            what: "V(1,1) of generalized Gamma weights".into(),
            deviation: (v11 - 1.0).abs(),
            tolerance: V11_TOLERANCE,
        });
    }
    if max_n > 1 {
        let residual = verify_gibbs_recursion(&model, max_n - 1)?;
        if residual > RECURSION_TOLERANCE {
            return Err(Error::ToleranceExceeded {
                what: "Gibbs recursion of generalized Gamma weights".into(),
                deviation: residual,
                tolerance: RECURSION_TOLERANCE,
            });
        }
    }
    Ok(model)
}

fn ln_v(alpha: f64, delta: f64, zeta: f64, z: f64, n: usize, k: usize, spec: &QuadratureSpec) -> Result<f64> {
    let nf = n as f64;
    let kf = k as f64;
    let expo = nf - kf * alpha;
    // the integrand peaks near (z + 2l)^alpha ~ k / delta
    let peak = 0.5 * (kf / delta).powf(1.0 / alpha);
    let local = spec.with_scale(spec.semi_infinite_scale * peak.max(f64::MIN_POSITIVE));
    let est = integrate_0inf_ln(
        |l| {
            let s = z + 2.0 * l;
            (nf - 1.0) * l.ln() - delta * s.powf(alpha) - expo * s.ln()
        },
        &local,
    )?;
    Ok(delta * zeta + kf * (delta.ln() + alpha.ln()) + nf * std::f64::consts::LN_2 - ln_gamma(nf)
        + est.ln_value)
}
