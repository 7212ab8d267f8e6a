use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GibbsModel, VTable};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

pub const V_TABLE_FORMAT: &str = "gibbs-v-table";
pub const V_TABLE_VERSION: u32 = 1;

/// Serialized V-table. Weights are linear values written as decimal
/// strings with 17 significant digits, which round-trip every `f64`.
///
/// ```
/// use gibbs_partitions::eppf::{pd_v_weights, VTableDocument};
///
/// let model = pd_v_weights(0.5, 1.0, 4).unwrap();
/// let json = VTableDocument::from_model(&model).to_json().unwrap();
/// let back = VTableDocument::from_json(&json).unwrap().into_model().unwrap();
/// assert_eq!(back.v(4, 2).unwrap(), model.v(4, 2).unwrap());
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VTableDocument {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub label: String,
    pub alpha: f64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub tolerances: Option<QuadratureSpec>,
    pub rows: Vec<Vec<String>>,
}

impl VTableDocument {
    /// Exports the tabled part of `model`.
    pub fn from_model(model: &GibbsModel) -> Self {
        let rows: Vec<Vec<String>> = model
            .table()
            .rows()
            .iter()
            .map(|row| row.iter().map(|lv| format!("{:.16e}", lv.exp())).collect())
            .collect();
        Self {
            format: V_TABLE_FORMAT.into(),
            version: V_TABLE_VERSION,
            label: model.label().into(),
            alpha: model.alpha(),
            params: model.params().clone(),
            n: rows.len(),
            tolerances: model.tolerances().copied(),
            rows,
        }
    }

    /// Rebuilds a model from the document. No recursion check is made here:
    /// a damaged table loads and is caught by verification.
    pub fn into_model(self) -> Result<GibbsModel> {
        if self.format != V_TABLE_FORMAT {
            return Err(Error::TableFormat(format!("unknown format `{}`", self.format)));
        }
        if self.version != V_TABLE_VERSION {
            return Err(Error::TableFormat(format!("unsupported version {}", self.version)));
        }
        if self.n != self.rows.len() {
            return Err(Error::TableFormat(format!(
                "N = {} but {} rows present",
                self.n,
                self.rows.len()
            )));
        }
        let mut ln_rows = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            let mut ln_row = Vec::with_capacity(row.len());
            for (j, s) in row.iter().enumerate() {
                let v: f64 = s.trim().parse().map_err(|_| {
                    Error::TableFormat(format!("V({}, {}) = `{s}` is not a number", i + 1, j + 1))
                })?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::TableFormat(format!(
                        "V({}, {}) = {v} is not a finite non-negative weight",
                        i + 1,
                        j + 1
                    )));
                }
                ln_row.push(v.ln());
            }
            ln_rows.push(ln_row);
        }
        let mut model = GibbsModel::from_table(self.alpha, VTable::from_ln_rows(ln_rows)?, self.label)?
            .with_params(self.params);
        if let Some(t) = self.tolerances {
            model = model.with_tolerances(t);
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
