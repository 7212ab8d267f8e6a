use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gibbs_partitions::eppf::{gg_v_weights, pd_v_weights, ConditionalStableEppf, GibbsModel, VTableDocument};
use gibbs_partitions::quadrature::QuadratureSpec;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Two-parameter Poisson-Dirichlet (alpha, theta).
    Pd,
    /// Generalized Gamma (alpha, delta, zeta).
    Gg,
    /// Stable given the total mass (alpha, delta, t).
    ConditionalStable,
    /// Symmetric Dirichlet with m atoms (alpha < 0, m).
    Fisher,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, conflicts_with = "table_in")]
    pub model: Option<ModelKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Read V-weights from a JSON table instead of building a model.
    #[arg(long)]
    pub table_in: Option<PathBuf>,
}

/// A model ready for evaluation, with what the samplers need to know.
pub struct Resolved {
    kind: Option<ModelKind>,
    model: GibbsModel,
    theta: f64,
    atoms: usize,
}

impl Resolved {
    pub fn kind(&self) -> Option<ModelKind> {
        self.kind
    }

    pub fn model(&self) -> &GibbsModel {
        &self.model
    }

    pub fn alpha(&self) -> f64 {
        self.model.alpha()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    /// Normalization tolerance: quadrature-built tables are held to `1e-6`.
    pub fn tolerance(&self) -> f64 {
        if self.model.tolerances().is_some() {
            1e-6
        } else {
            1e-10
        }
    }
}

fn need<T>(v: Option<T>, flag: &str, model: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for --model {model}")))
}

impl ModelArgs {
    pub fn is_specified(&self) -> bool {
        self.model.is_some() || self.table_in.is_some()
    }

    fn spec(&self) -> Result<QuadratureSpec, CliError> {
        let mut spec = QuadratureSpec::default();
        if let Some(r) = self.rel_tol {
            spec.rel_tol = r;
        }
        if let Some(a) = self.abs_tol {
            spec.abs_tol = a;
        }
        spec.validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }

    /// Checks the flags for the chosen model, then builds weights through
    /// `max_n`.
    pub fn resolve(&self, max_n: usize) -> Result<Resolved, CliError> {
        if let Some(path) = &self.table_in {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let model = VTableDocument::from_json(&text)?.into_model()?;
            return Ok(Resolved {
                kind: None,
                theta: f64::NAN,
                atoms: 0,
                model,
            });
        }
        let kind = self
            .model
            .ok_or_else(|| CliError::Usage("either --model or --table-in is required".into()))?;
        let name = kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        let spec = self.spec()?;
        let alpha = need(self.alpha, "alpha", &name)?;
        // validate everything before any quadrature runs
        let (model, theta, atoms) = match kind {
            ModelKind::Pd => {
                let theta = need(self.theta, "theta", &name)?;
                (pd_v_weights(alpha, theta, max_n)?, theta, 0)
            }
            ModelKind::Fisher => {
                let m = need(self.m, "m", &name)?;
                if m == 0 {
                    return Err(CliError::Usage("--m must be at least 1".into()));
                }
                if !(alpha < 0.0) {
                    return Err(CliError::Usage("--model fisher needs --alpha < 0".into()));
                }
                let theta = m as f64 * -alpha;
                (pd_v_weights(alpha, theta, max_n)?, theta, m)
            }
            ModelKind::Gg => {
                let delta = need(self.delta, "delta", &name)?;
                let zeta = need(self.zeta, "zeta", &name)?;
                check_ranges(alpha, delta, Some(zeta), None)?;
                (gg_v_weights(alpha, delta, zeta, max_n, &spec)?, f64::NAN, 0)
            }
            ModelKind::ConditionalStable => {
                let delta = need(self.delta, "delta", &name)?;
                let t = need(self.t, "t", &name)?;
                check_ranges(alpha, delta, None, Some(t))?;
                let c = ConditionalStableEppf::new(alpha, delta, &spec)?;
                eprintln!(
                    "gibbs: conditional stable constant kappa = {:.15} (delta 2^alpha = {:.15})",
                    c.correction_factor(),
                    c.reference_correction()
                );
                (c.gibbs_model(t, max_n)?, f64::NAN, 0)
            }
        };
        for d in model.diagnostics() {
            eprintln!("gibbs: warning: {d}");
        }
        Ok(Resolved {
            kind: Some(kind),
            model,
            theta,
            atoms,
        })
    }
}

fn check_ranges(alpha: f64, delta: f64, zeta: Option<f64>, t: Option<f64>) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha {alpha} must lie in (0, 1)")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CliError::Usage(format!("--delta {delta} must be positive")));
    }
    if let Some(z) = zeta {
        if !(z >= 0.0 && z.is_finite()) {
            return Err(CliError::Usage(format!("--zeta {z} must be >= 0")));
        }
    }
    if let Some(t) = t {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("--t {t} must be positive")));
        }
    }
    Ok(())
}
