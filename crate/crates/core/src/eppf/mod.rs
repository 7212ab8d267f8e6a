//! Exchangeable partition probability functions of Gibbs type.
//!
//! A Gibbs partition of type `alpha < 1` has EPPF
//!
//! ```text
//! p(n_1, ..., n_k) = V(n, k) * prod_j (1 - alpha)_(n_j - 1)
//! ```
//!
//! where the weights satisfy `V(1, 1) = 1` and the backward recursion
//! `V(n, k) = (n - alpha k) V(n + 1, k) + V(n + 1, k + 1)`. All arithmetic is
//! done on `ln V`; zero weights are stored as `-inf`.
//!
//! ```
//! use gibbs_partitions::eppf::{pd_v_weights, Eppf};
//! use gibbs_partitions::combinatorics::PartitionShape;
//!
//! let ewens = pd_v_weights(0.0, 1.0, 10).unwrap();
//! let pair = PartitionShape::new(vec![1, 1]).unwrap();
//! assert!((ewens.eppf(&pair).unwrap() - 0.5).abs() < 1e-15);
//! ```

mod conditional;
mod gg;
mod mixture;
mod pd;
mod table;

use std::collections::{BTreeMap, HashMap};

pub use conditional::{conditional_stable_eppf, ConditionalStableEppf, ConditionalStableAt};
pub use gg::gg_v_weights;
pub use mixture::{mixture_eppf, MixingDensity, MixtureEppf, Support};
pub use pd::pd_v_weights;
pub use table::{VTableDocument, V_TABLE_FORMAT, V_TABLE_VERSION};

use crate::combinatorics::{enumerate_set_partitions, ln_rising_factorial, PartitionShape};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

/// Largest `n` for which closed-form weights are materialized as a table.
pub const TABLE_LIMIT: usize = 30;

/// Anything that assigns a probability to every partition shape.
pub trait Eppf {
    /// Natural log of the EPPF; `-inf` for impossible shapes.
    fn ln_eppf(&self, shape: &PartitionShape) -> Result<f64>;

    fn eppf(&self, shape: &PartitionShape) -> Result<f64> {
        Ok(self.ln_eppf(shape)?.exp())
    }
}

/// Lower-triangular table of `ln V(n, k)` for `1 <= k <= n <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct VTable {
    rows: Vec<Vec<f64>>,
}

impl VTable {
    /// Builds a table from `ln V` rows; row `i` must have `i + 1` entries.
    pub fn from_ln_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::TableFormat(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    i + 1
                )));
            }
            if row.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
                return Err(Error::TableFormat(format!("row {} has a non-finite weight", i + 1)));
            }
        }
        Ok(Self { rows })
    }

    pub fn max_n(&self) -> usize {
        self.rows.len()
    }

    pub fn ln_v(&self, n: usize, k: usize) -> Option<f64> {
        self.rows.get(n.checked_sub(1)?)?.get(k.checked_sub(1)?).copied()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Closed-form weights kept alongside the table for `n` beyond it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PdFunctional {
    alpha: f64,
    theta: f64,
}

/// A type-`alpha` Gibbs EPPF given by its `V(n, k)` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsModel {
    alpha: f64,
    table: VTable,
    functional: Option<PdFunctional>,
    max_n: usize,
    label: String,
    params: BTreeMap<String, f64>,
    tolerances: Option<QuadratureSpec>,
    diagnostics: Vec<String>,
}

impl GibbsModel {
    /// Wraps an explicit weight table.
    pub fn from_table(alpha: f64, table: VTable, label: impl Into<String>) -> Result<Self> {
        if !(alpha < 1.0) || alpha.is_nan() {
            return Err(crate::error::invalid("alpha", alpha, "Gibbs type must be < 1"));
        }
        let max_n = table.max_n();
        if max_n == 0 {
            return Err(Error::TableFormat("empty table".into()));
        }
        Ok(Self {
            alpha,
            table,
            functional: None,
            max_n,
            label: label.into(),
            params: BTreeMap::new(),
            tolerances: None,
            diagnostics: Vec::new(),
        })
    }

    pub(crate) fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub(crate) fn with_tolerances(mut self, spec: QuadratureSpec) -> Self {
        self.tolerances = Some(spec);
        self
    }

    pub(crate) fn with_functional(mut self, f: PdFunctional, max_n: usize) -> Self {
        self.functional = Some(f);
        self.max_n = max_n.max(self.table.max_n());
        self
    }

    pub(crate) fn with_diagnostics(mut self, d: Vec<String>) -> Self {
        self.diagnostics = d;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Largest `n` for which weights are available.
    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn tolerances(&self) -> Option<&QuadratureSpec> {
        self.tolerances.as_ref()
    }

    pub fn table(&self) -> &VTable {
        &self.table
    }

    /// Warnings raised while building the weights, e.g. loss of precision
    /// near parameter boundaries.
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn ln_v(&self, n: usize, k: usize) -> Result<f64> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::InvalidPartition(format!("no weight V({n}, {k})")));
        }
        if let Some(v) = self.table.ln_v(n, k) {
            return Ok(v);
        }
        match self.functional {
            Some(f) if n <= self.max_n => Ok(pd::ln_v(f.alpha, f.theta, n, k)),
            _ => Err(Error::TableTooSmall {
                requested: n,
                available: self.max_n,
            }),
        }
    }

    pub fn v(&self, n: usize, k: usize) -> Result<f64> {
        Ok(self.ln_v(n, k)?.exp())
    }

    /// One-step predictive probabilities from block sizes `sizes`: joining
    /// block `j` for each `j`, followed by opening a new block.
    pub fn predictive_probabilities(&self, sizes: &[usize]) -> Result<Vec<f64>> {
        let n: usize = sizes.iter().sum();
        let k = sizes.len();
        let ln_vn = self.ln_v(n, k)?;
        if ln_vn == f64::NEG_INFINITY {
            return Err(Error::InvalidPartition(format!(
                "state with n = {n}, k = {k} has zero probability"
            )));
        }
        let stay = (self.ln_v(n + 1, k)? - ln_vn).exp();
        let open = (self.ln_v(n + 1, k + 1)? - ln_vn).exp();
        let mut probs: Vec<f64> = sizes.iter().map(|&nj| (nj as f64 - self.alpha) * stay).collect();
        probs.push(open);
        if let Some(&bad) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::NegativePredictive { n, k, value: bad });
        }
        Ok(probs)
    }
}

impl Eppf for GibbsModel {
    fn ln_eppf(&self, shape: &PartitionShape) -> Result<f64> {
        let ln_v = self.ln_v(shape.n(), shape.k())?;
        Ok(ln_v + ln_weight_product(self.alpha, shape))
    }
}

/// `sum_j ln (1 - alpha)_(n_j - 1)`.
pub fn ln_weight_product(alpha: f64, shape: &PartitionShape) -> f64 {
    shape
        .parts()
        .iter()
        .map(|&nj| ln_rising_factorial(1.0 - alpha, nj - 1, 1.0).ln_abs)
        .sum()
}

/// `V(n, k) * prod_j (1 - alpha)_(n_j - 1)`.
pub fn gibbs_eppf(model: &GibbsModel, shape: &PartitionShape) -> Result<f64> {
    model.eppf(shape)
}

/// Largest relative residual of `V(n,k) = (n - alpha k) V(n+1,k) + V(n+1,k+1)`
/// over `1 <= k <= n <= N`. Needs weights through `N + 1`.
pub fn verify_gibbs_recursion(model: &GibbsModel, max_n: usize) -> Result<f64> {
    let alpha = model.alpha();
    let mut worst: f64 = (model.v(1, 1)? - 1.0).abs();
    for n in 1..=max_n {
        for k in 1..=n {
            let lv = model.ln_v(n, k)?;
            let a = model.ln_v(n + 1, k)?;
            let b = model.ln_v(n + 1, k + 1)?;
            let residual = if lv == f64::NEG_INFINITY {
                // both successors must vanish as well
                if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                let rhs = (n as f64 - alpha * k as f64) * (a - lv).exp() + (b - lv).exp();
                (1.0 - rhs).abs()
            };
            worst = worst.max(residual);
        }
    }
    Ok(worst)
}

/// `|sum over set partitions of [n] of p(shape) - 1|`, by exhaustive
/// enumeration.
pub fn verify_normalization<E: Eppf + ?Sized>(eppf: &E, n: usize) -> Result<f64> {
    let mut cache: HashMap<PartitionShape, f64> = HashMap::new();
    let mut total = 0.0;
    for p in enumerate_set_partitions(n)? {
        let shape = p.shape();
        let v = match cache.get(&shape) {
            Some(v) => *v,
            None => {
                let v = eppf.eppf(&shape)?;
                cache.insert(shape, v);
                v
            }
        };
        total += v;
    }
    Ok((total - 1.0).abs())
}

/// `p(shape) - sum_j p(shape + e_j) - p(shape, 1)`, the addition rule that
/// makes the restrictions of an infinite partition consistent.
pub fn consistency_residual<E: Eppf + ?Sized>(eppf: &E, shape: &PartitionShape) -> Result<f64> {
    let mut rhs = eppf.eppf(&shape.add_singleton())?;
    for j in 0..shape.k() {
        rhs += eppf.eppf(&shape.grow_block(j))?;
    }
    Ok(eppf.eppf(shape)? - rhs)
}
