use std::collections::BTreeMap;

use super::{GibbsModel, PdFunctional, VTable, TABLE_LIMIT};
use crate::combinatorics::ln_rising_factorial;
use crate::error::{invalid, Result};

/// Two-parameter Poisson-Dirichlet weights
/// `V(n, k) = (theta + alpha)_(k-1; alpha) / (1 + theta)_(n-1)`.
///
/// Valid for `0 <= alpha < 1, theta > -alpha`, and for `alpha < 0` with
/// `theta = m |alpha|`, `m` a positive integer (Fisher's finite model, where
/// `V(n, k) = 0` for `k > m`). Weights through `min(max_n, 30)` are tabled;
/// beyond that they are evaluated in closed form on demand.
pub fn pd_v_weights(alpha: f64, theta: f64, max_n: usize) -> Result<GibbsModel> {
    let diagnostics = validate(alpha, theta)?;
    if max_n == 0 {
        return Err(invalid("N", 0.0, "table size must be >= 1"));
    }
    let rows = (1..=max_n.min(TABLE_LIMIT))
        .map(|n| (1..=n).map(|k| ln_v(alpha, theta, n, k)).collect())
        .collect();
    let table = VTable::from_ln_rows(rows)?;
    let mut params = BTreeMap::new();
    params.insert("theta".to_string(), theta);
    Ok(GibbsModel::from_table(alpha, table, format!("pd(alpha={alpha}, theta={theta})"))?
        .with_params(params)
        .with_functional(PdFunctional { alpha, theta }, max_n)
        .with_diagnostics(diagnostics))
}

pub(crate) fn ln_v(alpha: f64, theta: f64, n: usize, k: usize) -> f64 {
    let den = ln_rising_factorial(1.0 + theta, n - 1, 1.0).ln_abs;
    if alpha < 0.0 {
        // theta + i alpha = |alpha| (m - i), taken exactly
        let m = fisher_atoms(alpha, theta).expect("validated Fisher parameters");
        if k > m {
            return f64::NEG_INFINITY;
        }
        return (1..k).map(|i| (-alpha * (m - i) as f64).ln()).sum::<f64>() - den;
    }
    // (theta + alpha)_(k-1; alpha) = prod_{i=1}^{k-1} (theta + i alpha)
    let num = ln_rising_factorial(theta + alpha, k - 1, alpha);
    if num.sign == 0 {
        return f64::NEG_INFINITY;
    }
    debug_assert_eq!(num.sign, 1);
    num.ln_abs - den
}

/// Number of atoms `m` of a Fisher model `theta = m |alpha|`.
pub(crate) fn fisher_atoms(alpha: f64, theta: f64) -> Option<usize> {
    let m = theta / -alpha;
    let rounded = m.round();
    ((m - rounded).abs() <= 1e-9 * rounded.max(1.0) && rounded >= 1.0).then_some(rounded as usize)
}

fn validate(alpha: f64, theta: f64) -> Result<Vec<String>> {
    if !(alpha < 1.0) || !alpha.is_finite() {
        return Err(invalid("alpha", alpha, "must be finite and < 1"));
    }
    if !theta.is_finite() {
        return Err(invalid("theta", theta, "must be finite"));
    }
    let mut diagnostics = Vec::new();
    if alpha >= 0.0 {
        if !(theta > -alpha) {
            return Err(invalid("theta", theta, "must exceed -alpha when alpha >= 0"));
        }
        // digits lost forming theta + alpha and 1 - alpha
        let cond = theta.abs().max(alpha.abs()) / (theta + alpha);
        if cond > 1e6 {
            diagnostics.push(format!(
                "theta + alpha = {:e} loses about {:.0} digits to cancellation",
                theta + alpha,
                cond.log10()
            ));
        }
        if 1.0 / (1.0 - alpha) > 1e6 {
            diagnostics.push(format!(
                "1 - alpha = {:e} loses about {:.0} digits to cancellation",
                1.0 - alpha,
                (1.0 / (1.0 - alpha)).log10()
            ));
        }
    } else if fisher_atoms(alpha, theta).is_none() {
        return Err(invalid(
            "theta",
            theta,
            "for alpha < 0, theta must equal m |alpha| with m a positive integer",
        ));
    }
    Ok(diagnostics)
}
