//! Executable checks with a machine-readable report.
//!
//! Two suites are provided. The tilting suite checks that exponential
//! tilting leaves structural densities unchanged, that mixing the stable
//! conditional partition over a tilted stable law reproduces the generalized
//! Gamma EPPF, and that other mixings do not. The Gibbs suite runs recursion,
//! normalization, consistency and Monte Carlo checks over the Fisher,
//! Ewens/Poisson-Dirichlet, conditional stable and generalized Gamma cases.
//!
//! ```
//! use gibbs_partitions::eppf::pd_v_weights;
//! use gibbs_partitions::verification::verify_model;
//!
//! let report = verify_model(&pd_v_weights(0.5, 1.0, 8).unwrap(), 7).unwrap();
//! assert!(report.all_passed());
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{partition_shapes, PartitionShape, MAX_ENUMERATION_N};
use crate::eppf::{
    consistency_residual, gg_v_weights, pd_v_weights, verify_gibbs_recursion, verify_normalization,
    ConditionalStableEppf, Eppf, GibbsModel, MixingDensity, MixtureEppf,
};
use crate::error::Result;
use crate::levy::{gamma_model, stable_model, LevyModel};
use crate::quadrature::QuadratureSpec;
use crate::samplers::{crp_sample, fisher_sample, gibbs_predictive_sample, shape_histogram, RandomSource};
use crate::structural::{default_grid, verify_tilt_invariance};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

type CheckResult = std::result::Result<(f64, Option<String>), Box<dyn std::error::Error>>;

// JSON has no inf or NaN; such metrics are written as strings.
mod lenient_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// How the metric is compared with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass when `metric <= tolerance`.
    AtMost,
    /// Pass when `metric > tolerance`; used for falsification runs.
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The identity being checked, written out.
    pub anchor: String,
    pub parameters: BTreeMap<String, f64>,
    #[serde(with = "lenient_float")]
    pub metric: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub checks: Vec<Check>,
}

impl Default for CheckReport {
    fn default() -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            checks: Vec::new(),
        }
    }
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checks.extend(other.checks);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Plain-text summary, one row per check.
    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>12}  {:>4} {:>10}  {:>10}  result", "check", "metric", "", "tolerance", "ms");
        for c in &self.checks {
            let op = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::Exceeds => ">",
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.3e}  {:>4} {:>10.1e}  {:>10.1}  {}",
                c.name,
                c.metric,
                op,
                c.tolerance,
                c.runtime_ms,
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }

    /// Runs `f` and records its metric. An error is recorded as a failed
    /// check with a NaN metric and the message as note.
    fn run<F>(&mut self, name: impl Into<String>, anchor: &str, parameters: &[(&str, f64)], tolerance: f64, comparison: Comparison, f: F)
    where
        F: FnOnce() -> CheckResult,
    {
        let start = Instant::now();
        let (metric, note) = match f() {
            Ok(v) => v,
            Err(e) => (f64::NAN, Some(format!("error: {e}"))),
        };
        let passed = match comparison {
            Comparison::AtMost => metric <= tolerance,
            Comparison::Exceeds => metric > tolerance,
        };
        self.checks.push(Check {
            name: name.into(),
            anchor: anchor.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            metric,
            tolerance,
            comparison,
            passed,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            note,
        });
    }
}

const ANCHOR_TILT: &str = "tilting rho by exp(-l x) leaves f(p | t) = p t rho(p t) f(t - p t) / f(t) unchanged";
const ANCHOR_MIXTURE: &str = "int p_alpha(. | t) f^l_(alpha,delta)(t) dt = generalized Gamma EPPF with zeta = (2 l)^alpha";
const ANCHOR_FALSIFY: &str = "mixing over a non-tilted stable law gives a different EPPF";
const ANCHOR_RECURSION: &str = "V(n,k) = (n - alpha k) V(n+1,k) + V(n+1,k+1), V(1,1) = 1";
const ANCHOR_NORMALIZATION: &str = "sum over set partitions of [n] of p(shape) = 1";
const ANCHOR_CONSISTENCY: &str = "p(n_1..n_k) = sum_j p(.., n_j + 1, ..) + p(n_1..n_k, 1)";
const ANCHOR_MC: &str = "empirical shape frequencies = EPPF x number of set partitions per shape";
const ANCHOR_FISHER: &str = "PD(alpha, m |alpha|), alpha < 0: V(n,k) = 0 for k > m";
const ANCHOR_KAPPA: &str = "conditional stable EPPF constant kappa = delta 2^alpha";

/// Grid and settings for [`run_tilting_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct TiltingSuiteConfig {
    pub alpha: f64,
    /// `(delta, zeta)` pairs for the mixture comparison.
    pub grid: Vec<(f64, f64)>,
    /// Largest `n` of the shapes compared.
    pub max_n: usize,
    pub spec: QuadratureSpec,
}

impl Default for TiltingSuiteConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            grid: vec![(1.0, 0.0), (1.0, 0.5), (1.0, 1.0), (1.0, 2.0), (2.0, 0.5)],
            max_n: 6,
            spec: QuadratureSpec::default(),
        }
    }
}

fn max_shape_discrepancy(a: &dyn Eppf, b: &dyn Eppf, max_n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 1..=max_n {
        for s in partition_shapes(n) {
            worst = worst.max((a.eppf(&s)? - b.eppf(&s)?).abs());
        }
    }
    Ok(worst)
}

/// Tilt invariance of structural densities, tilted-mixture equals
/// generalized Gamma, and non-equality for non-tilted mixings.
pub fn run_tilting_suite(config: &TiltingSuiteConfig) -> CheckReport {
    let mut report = CheckReport::default();
    let models: Vec<(String, Result<LevyModel>, Vec<(&str, f64)>)> = vec![
        ("gamma(0.5)".into(), gamma_model(0.5), vec![("theta", 0.5)]),
        ("gamma(2)".into(), gamma_model(2.0), vec![("theta", 2.0)]),
        ("stable(1/2, 0.5)".into(), stable_model(0.5, 0.5), vec![("alpha", 0.5), ("delta", 0.5)]),
        ("stable(1/2, 1)".into(), stable_model(0.5, 1.0), vec![("alpha", 0.5), ("delta", 1.0)]),
        ("stable(1/2, 2)".into(), stable_model(0.5, 2.0), vec![("alpha", 0.5), ("delta", 2.0)]),
    ];
    for (label, model, params) in &models {
        for lambda in [0.1, 1.0, 10.0] {
            let mut p = params.clone();
            p.push(("lambda", lambda));
            report.run(
                format!("structural tilt invariance {label}, lambda={lambda}"),
                ANCHOR_TILT,
                &p,
                1e-10,
                Comparison::AtMost,
                || {
                    let m = model.as_ref().map_err(|e| e.to_string())?;
                    Ok((verify_tilt_invariance(m, lambda, &default_grid())?, None))
                },
            );
        }
    }

    let alpha = config.alpha;
    for &(delta, zeta) in &config.grid {
        report.run(
            format!("tilted mixture vs generalized Gamma, delta={delta}, zeta={zeta}"),
            ANCHOR_MIXTURE,
            &[("alpha", alpha), ("delta", delta), ("zeta", zeta), ("N", config.max_n as f64)],
            1e-6,
            Comparison::AtMost,
            || {
                let mix = MixtureEppf::new(alpha, delta, MixingDensity::tilted_stable(alpha, delta, zeta)?, &config.spec)?;
                let gg = gg_v_weights(alpha, delta, zeta, config.max_n, &config.spec)?;
                Ok((max_shape_discrepancy(&mix, &gg, config.max_n)?, None))
            },
        );
    }

    let falsifiers: Vec<(&str, Vec<(&str, f64)>, fn() -> Result<MixingDensity>)> = vec![
        (
            "truncated gamma(2, 1) on (0, 10)",
            vec![("shape", 2.0), ("rate", 1.0), ("upper", 10.0)],
            || MixingDensity::truncated_gamma(2.0, 1.0, 10.0),
        ),
        (
            "log-normal(0, 0.5)",
            vec![("mu", 0.0), ("sigma", 0.5)],
            || MixingDensity::log_normal(0.0, 0.5),
        ),
    ];
    for (label, params, build) in falsifiers {
        for &(delta, zeta) in &config.grid {
            let mut p = params.clone();
            p.extend([("alpha", alpha), ("delta", delta), ("zeta", zeta)]);
            report.run(
                format!("{label} mixing differs from generalized Gamma, delta={delta}, zeta={zeta}"),
                ANCHOR_FALSIFY,
                &p,
                1e-3,
                Comparison::Exceeds,
                || {
                    let mix = MixtureEppf::new(alpha, delta, build()?, &config.spec)?;
                    let gg = gg_v_weights(alpha, delta, zeta, config.max_n, &config.spec)?;
                    Ok((max_shape_discrepancy(&mix, &gg, config.max_n)?, None))
                },
            );
        }
    }
    report
}

/// Grids and settings for [`run_gibbs_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSuiteConfig {
    /// `(alpha, theta)` pairs; `alpha < 0` pairs must have `theta = m |alpha|`.
    pub pd_grid: Vec<(f64, f64)>,
    /// `(alpha, delta, zeta)` generalized Gamma parameters.
    pub gg_grid: Vec<(f64, f64, f64)>,
    /// `(alpha, delta)` and total masses for the conditional stable EPPF.
    pub conditional: (f64, f64),
    pub conditional_t: Vec<f64>,
    /// Recursion depth for closed-form weights.
    pub pd_recursion_n: usize,
    /// Recursion depth for quadrature weights.
    pub gg_recursion_n: usize,
    /// Largest `n` for enumeration checks.
    pub max_n: usize,
    /// Monte Carlo draws per model, at `n = 5` (`n = 3` for Fisher).
    pub samples: usize,
    pub seed: u64,
    pub spec: QuadratureSpec,
}

impl Default for GibbsSuiteConfig {
    fn default() -> Self {
        Self {
            pd_grid: vec![(-1.0, 2.0), (-0.5, 1.5), (0.0, 1.0), (0.0, 5.0), (0.3, 2.0), (0.5, 0.5), (0.9, 1.0)],
            gg_grid: vec![(0.5, 1.0, 1.0), (0.5, 2.0, 0.5)],
            conditional: (0.5, 1.0),
            conditional_t: vec![0.5, 1.0, 2.0],
            pd_recursion_n: 20,
            gg_recursion_n: 8,
            max_n: 6,
            samples: 100_000,
            seed: 20_240_601,
            spec: QuadratureSpec::default(),
        }
    }
}

fn max_consistency(eppf: &dyn Eppf, max_n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 1..max_n {
        for s in partition_shapes(n) {
            worst = worst.max(consistency_residual(eppf, &s)?.abs());
        }
    }
    Ok(worst)
}

fn max_normalization(eppf: &dyn Eppf, max_n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 1..=max_n {
        worst = worst.max(verify_normalization(eppf, n)?);
    }
    Ok(worst)
}

/// Largest `|frequency - probability| / standard error` over the shapes of
/// `n`, where probability is the EPPF times the set-partition count.
pub fn max_standardized_deviation(hist: &BTreeMap<PartitionShape, u64>, count: usize, eppf: &dyn Eppf, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in partition_shapes(n) {
        let p = eppf.eppf(&s)? * s.set_partition_count();
        let observed = *hist.get(&s).unwrap_or(&0) as f64;
        let f = observed / count as f64;
        let se = (p * (1.0 - p) / count as f64).sqrt();
        let z = if se > 0.0 {
            (f - p).abs() / se
        } else if observed > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(z);
    }
    Ok(worst)
}

/// Recursion, normalization, consistency and Monte Carlo checks over the
/// Fisher, Ewens, two-parameter, conditional stable and generalized Gamma
/// cases.
pub fn run_gibbs_suite(config: &GibbsSuiteConfig) -> CheckReport {
    let mut report = CheckReport::default();
    let root = RandomSource::new(config.seed);
    let mut stream = 0u64;
    let mut next_stream = || {
        stream += 1;
        root.substream(stream)
    };
    let max_n = config.max_n.min(MAX_ENUMERATION_N);

    for &(alpha, theta) in &config.pd_grid {
        let params = [("alpha", alpha), ("theta", theta)];
        let label = format!("PD({alpha}, {theta})");
        let model = pd_v_weights(alpha, theta, config.pd_recursion_n.max(max_n) + 1);
        let get = || model.as_ref().map_err(|e| e.to_string());
        report.run(format!("{label} recursion, N={}", config.pd_recursion_n), ANCHOR_RECURSION, &params, 1e-12, Comparison::AtMost, || {
            Ok((verify_gibbs_recursion(get()?, config.pd_recursion_n)?, None))
        });
        report.run(format!("{label} normalization, n<={max_n}"), ANCHOR_NORMALIZATION, &params, 1e-10, Comparison::AtMost, || {
            Ok((max_normalization(get()?, max_n)?, None))
        });
        report.run(format!("{label} consistency, n<{max_n}"), ANCHOR_CONSISTENCY, &params, 1e-10, Comparison::AtMost, || {
            Ok((max_consistency(get()?, max_n)?, None))
        });
        if alpha < 0.0 {
            let m = (theta / -alpha).round() as usize;
            report.run(format!("{label} no more than {m} blocks"), ANCHOR_FISHER, &params, 0.0, Comparison::AtMost, || {
                let model = get()?;
                let mut worst: f64 = 0.0;
                for n in m + 1..=model.max_n() {
                    for k in m + 1..=n {
                        worst = worst.max(model.v(n, k)?);
                    }
                }
                Ok((worst, None))
            });
            let mut src = next_stream();
            report.run(format!("{label} Fisher sampler vs EPPF, n=3"), ANCHOR_MC, &params, 4.0, Comparison::AtMost, || {
                let hist = shape_histogram(config.samples, &mut src, |r| fisher_sample(alpha, m, 3, r))?;
                let blocks = hist.keys().map(PartitionShape::k).max().unwrap_or(0);
                let z = max_standardized_deviation(&hist, config.samples, get()?, 3)?;
                Ok((z, Some(format!("max blocks observed {blocks}"))))
            });
        } else {
            let mut src = next_stream();
            report.run(format!("{label} restaurant sampler vs EPPF, n=5"), ANCHOR_MC, &params, 4.0, Comparison::AtMost, || {
                let hist = shape_histogram(config.samples, &mut src, |r| crp_sample(alpha, theta, 5, r))?;
                Ok((max_standardized_deviation(&hist, config.samples, get()?, 5)?, None))
            });
        }
    }

    let (ca, cd) = config.conditional;
    let conditional = ConditionalStableEppf::new(ca, cd, &config.spec);
    let cparams = [("alpha", ca), ("delta", cd)];
    report.run("conditional stable constant", ANCHOR_KAPPA, &cparams, 1e-6, Comparison::AtMost, || {
        let c = conditional.as_ref().map_err(|e| e.to_string())?;
        let (k, r) = (c.correction_factor(), c.reference_correction());
        Ok(((k - r).abs() / r, Some(format!("kappa = {k:.15}, delta 2^alpha = {r:.15}"))))
    });
    for &t in &config.conditional_t {
        let params = [("alpha", ca), ("delta", cd), ("t", t)];
        let cn = max_n.min(5);
        report.run(format!("conditional stable normalization, t={t}, n<={cn}"), ANCHOR_NORMALIZATION, &params, 1e-6, Comparison::AtMost, || {
            let c = conditional.as_ref().map_err(|e| e.to_string())?;
            Ok((max_normalization(&c.at(t)?, cn)?, None))
        });
        report.run(format!("conditional stable consistency, t={t}, n<{cn}"), ANCHOR_CONSISTENCY, &params, 1e-6, Comparison::AtMost, || {
            let c = conditional.as_ref().map_err(|e| e.to_string())?;
            Ok((max_consistency(&c.at(t)?, cn)?, None))
        });
    }

    for &(alpha, delta, zeta) in &config.gg_grid {
        let params = [("alpha", alpha), ("delta", delta), ("zeta", zeta)];
        let label = format!("GG({alpha}, {delta}, {zeta})");
        let n_table = config.gg_recursion_n.max(max_n).max(5) + 1;
        let model = gg_v_weights(alpha, delta, zeta, n_table, &config.spec);
        let get = || model.as_ref().map_err(|e| e.to_string());
        report.run(format!("{label} recursion, N={}", config.gg_recursion_n), ANCHOR_RECURSION, &params, 1e-6, Comparison::AtMost, || {
            Ok((verify_gibbs_recursion(get()?, config.gg_recursion_n)?, None))
        });
        report.run(format!("{label} normalization, n<={max_n}"), ANCHOR_NORMALIZATION, &params, 1e-6, Comparison::AtMost, || {
            Ok((max_normalization(get()?, max_n)?, None))
        });
        report.run(format!("{label} consistency, n<{max_n}"), ANCHOR_CONSISTENCY, &params, 1e-6, Comparison::AtMost, || {
            Ok((max_consistency(get()?, max_n)?, None))
        });
        let mut src = next_stream();
        report.run(format!("{label} predictive sampler vs EPPF, n=5"), ANCHOR_MC, &params, 4.0, Comparison::AtMost, || {
            let model = get()?;
            let hist = shape_histogram(config.samples, &mut src, |r| gibbs_predictive_sample(model, 5, r))?;
            Ok((max_standardized_deviation(&hist, config.samples, model, 5)?, None))
        });
    }
    report
}

/// Recursion and normalization checks for an arbitrary (e.g. imported)
/// weight table, up to `n`. The recursion tolerance is `1e-6` for tables
/// carrying quadrature tolerances and `1e-12` otherwise.
pub fn verify_model(model: &GibbsModel, n: usize) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let tol = if model.tolerances().is_some() { 1e-6 } else { 1e-12 };
    let mut params = vec![("alpha", model.alpha())];
    params.extend(model.params().iter().map(|(k, v)| (k.as_str(), *v)));
    let rec_n = n.min(model.max_n().saturating_sub(1));
    let label = model.label().to_string();
    report.run(format!("{label} recursion, N={rec_n}"), ANCHOR_RECURSION, &params, tol, Comparison::AtMost, || {
        Ok((verify_gibbs_recursion(model, rec_n)?, None))
    });
    let norm_n = n.min(model.max_n()).min(MAX_ENUMERATION_N.min(10));
    report.run(format!("{label} normalization, n<={norm_n}"), ANCHOR_NORMALIZATION, &params, tol.max(1e-10), Comparison::AtMost, || {
        Ok((max_normalization(model, norm_n)?, None))
    });
    Ok(report)
}
