//! Adaptive Gauss-Kronrod quadrature for positive integrands given in log form.
//!
//! Every integrand returns `ln f(x)`. Each panel is exponentiated after
//! shifting by its own maximum, and panels are combined against a common
//! reference scale, so integrands spanning hundreds of orders of magnitude
//! neither overflow nor flush to zero.
//!
//! The `(0, 1)` integrator hands the integrand both `p` and `1 - p`, each
//! carried with full relative precision. Boundary layers of width `1e-15`
//! next to `p = 1` are resolved correctly this way; computing `1.0 - p`
//! inside the integrand would not be. The semi-infinite integrator maps
//! `(0, inf)` onto `(0, 1)` with `x = s * u / (1 - u)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         estimate {estimate:e}, error estimate {error:e}"
    )]
    NotConverged {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite log value {value} at x = {at:e}")]
    NonFinite { at: f64, value: f64 },
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(&'static str),
}

/// Tolerances and limits for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Number of equal panels the unit interval starts with.
    pub initial_panels: usize,
    /// Scale `s` of the map `x = s * u / (1 - u)` used on `(0, inf)`.
    pub semi_infinite_scale: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            initial_panels: 8,
            semi_infinite_scale: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.semi_infinite_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec("relative tolerance must be > 0"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec("absolute tolerance must be > 0"));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidSpec("max subdivisions must be >= 1"));
        }
        if self.initial_panels < 1 {
            return Err(QuadratureError::InvalidSpec("initial panels must be >= 1"));
        }
        if !(self.semi_infinite_scale > 0.0 && self.semi_infinite_scale.is_finite()) {
            return Err(QuadratureError::InvalidSpec("semi-infinite scale must be positive"));
        }
        Ok(())
    }
}

/// Linear-domain result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Log-domain result: `ln` of the integral and its relative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEstimate {
    pub ln_value: f64,
    pub rel_error: f64,
    pub evaluations: usize,
}

impl LogEstimate {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Sub-interval `[lo, lo + 2 * half]` of the unit interval. `lo_c = 1 - lo`
/// is tracked separately so panels near 1 keep their relative precision.
#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    lo_c: f64,
    half: f64,
    // value = scaled_value * exp(ln_scale), likewise for the error
    ln_scale: f64,
    scaled_value: f64,
    scaled_error: f64,
    refinable: bool,
}

impl Panel {
    fn ln_error(&self) -> f64 {
        self.scaled_error.ln() + self.ln_scale
    }
}

struct ByError(Panel);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.ln_error().total_cmp(&other.0.ln_error())
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn eval_panel<F>(ln_f: &mut F, lo: f64, lo_c: f64, half: f64) -> Result<Panel, QuadratureError>
where
    F: FnMut(f64, f64) -> f64,
{
    let mut lf = [0.0f64; 21];
    // node j < 10: offset half * (1 - XGK[j]); node 10: center;
    // node j > 10: offset half * (1 + XGK[20 - j]).
    for (j, slot) in lf.iter_mut().enumerate() {
        let offset = if j <= 10 {
            half * (1.0 - XGK[j])
        } else {
            half * (1.0 + XGK[20 - j])
        };
        let x = lo + offset;
        let x_c = lo_c - offset;
        let v = ln_f(x, x_c);
        if v.is_nan() || v == f64::INFINITY {
            return Err(QuadratureError::NonFinite { at: x, value: v });
        }
        *slot = v;
    }
    let ln_scale = lf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_pos = 4.0 * f64::EPSILON;
    let center_small = (lo + half).min(lo_c - half);
    let refinable = half > min_pos * center_small && half > 1e-300;
    if ln_scale == f64::NEG_INFINITY {
        return Ok(Panel {
            lo,
            lo_c,
            half,
            ln_scale: 0.0,
            scaled_value: 0.0,
            scaled_error: 0.0,
            refinable,
        });
    }
    let g: Vec<f64> = lf.iter().map(|v| (v - ln_scale).exp()).collect();
    let fc = g[10];
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    for j in 0..10 {
        let pair = g[j] + g[20 - j];
        res_k += WGK[j] * pair;
        res_abs += WGK[j] * (g[j].abs() + g[20 - j].abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * pair;
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((g[j] - mean).abs() + (g[20 - j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    Ok(Panel {
        lo,
        lo_c,
        half,
        ln_scale,
        scaled_value: res_k * half,
        scaled_error: rescale_error(err, res_abs * half, res_asc * half),
        refinable,
    })
}

struct Totals {
    ln_ref: f64,
    value: f64,
    error: f64,
    refinable_error: f64,
}

fn totals(panels: &[Panel], pending: &BinaryHeap<ByError>) -> Totals {
    let all = || panels.iter().chain(pending.iter().map(|p| &p.0));
    let ln_ref = all()
        .filter(|p| p.scaled_value > 0.0 || p.scaled_error > 0.0)
        .map(|p| p.ln_scale)
        .fold(f64::NEG_INFINITY, f64::max);
    if ln_ref == f64::NEG_INFINITY {
        return Totals {
            ln_ref: 0.0,
            value: 0.0,
            error: 0.0,
            refinable_error: 0.0,
        };
    }
    let mut t = Totals {
        ln_ref,
        value: 0.0,
        error: 0.0,
        refinable_error: 0.0,
    };
    for p in all() {
        let w = (p.ln_scale - ln_ref).exp();
        t.value += p.scaled_value * w;
        t.error += p.scaled_error * w;
        if p.refinable {
            t.refinable_error += p.scaled_error * w;
        }
    }
    t
}

/// Core engine on the unit interval; returns totals relative to `ln_ref`.
fn adapt<F>(
    mut ln_f: F,
    spec: &QuadratureSpec,
    relative_only: bool,
) -> Result<(Totals, usize), QuadratureError>
where
    F: FnMut(f64, f64) -> f64,
{
    spec.validate()?;
    let m = spec.initial_panels;
    let width = 1.0 / m as f64;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = 0;
    for i in 0..m {
        let lo = i as f64 * width;
        let lo_c = (m - i) as f64 * width;
        let p = eval_panel(&mut ln_f, lo, lo_c, 0.5 * width)?;
        evaluations += 21;
        heap.push(ByError(p));
    }
    let mut subdivisions = 0;
    loop {
        let t = totals(&frozen, &heap);
        let abs_tol_scaled = if relative_only {
            0.0
        } else {
            (spec.abs_tol.ln() - t.ln_ref).exp()
        };
        let target = abs_tol_scaled.max(spec.rel_tol * t.value.abs());
        if t.error <= target && !(relative_only && t.value == 0.0 && t.error > 0.0) {
            return Ok((t, evaluations));
        }
        // Only roundoff-limited panels left: the estimate is as good as it gets.
        if t.refinable_error <= target || subdivisions >= spec.max_subdivisions {
            let scale = t.ln_ref.exp();
            return Err(QuadratureError::NotConverged {
                estimate: t.value * scale,
                error: t.error * scale,
                subdivisions,
            });
        }
        let Some(ByError(worst)) = heap.pop() else {
            unreachable!("heap holds every refinable panel");
        };
        if !worst.refinable {
            frozen.push(worst);
            continue;
        }
        let h = 0.5 * worst.half;
        let left = eval_panel(&mut ln_f, worst.lo, worst.lo_c, h)?;
        let right = eval_panel(&mut ln_f, worst.lo + worst.half, worst.lo_c - worst.half, h)?;
        evaluations += 42;
        subdivisions += 1;
        heap.push(ByError(left));
        heap.push(ByError(right));
    }
}

/// Integrates `exp(ln_f(p, 1 - p))` over `(0, 1)`.
///
/// ```
/// use gibbs_partitions::quadrature::{integrate_01, QuadratureSpec};
/// // Beta(1, 2) density
/// let est = integrate_01(|_p, q| 2f64.ln() + q.ln(), &QuadratureSpec::default()).unwrap();
/// assert!((est.value - 1.0).abs() < 1e-12);
/// ```
pub fn integrate_01<F>(ln_f: F, spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64, f64) -> f64,
{
    let (t, evaluations) = adapt(ln_f, spec, false)?;
    let scale = t.ln_ref.exp();
    Ok(Estimate {
        value: t.value * scale,
        error: t.error * scale,
        evaluations,
    })
}

/// Log-domain variant of [`integrate_01`]. Convergence is judged on the
/// relative error alone; `spec.abs_tol` is ignored.
pub fn integrate_01_ln<F>(ln_f: F, spec: &QuadratureSpec) -> Result<LogEstimate, QuadratureError>
where
    F: FnMut(f64, f64) -> f64,
{
    let (t, evaluations) = adapt(ln_f, spec, true)?;
    Ok(to_log(t, evaluations))
}

fn to_log(t: Totals, evaluations: usize) -> LogEstimate {
    if t.value <= 0.0 {
        return LogEstimate {
            ln_value: f64::NEG_INFINITY,
            rel_error: 0.0,
            evaluations,
        };
    }
    LogEstimate {
        ln_value: t.value.ln() + t.ln_ref,
        rel_error: t.error / t.value,
        evaluations,
    }
}

fn semi_infinite<F>(mut ln_f: F, scale: f64) -> impl FnMut(f64, f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let ln_scale = scale.ln();
    move |u, u_c| {
        if u_c <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let x = scale * (u / u_c);
        let v = ln_f(x);
        if v == f64::NEG_INFINITY {
            return v;
        }
        // dx/du = s / (1 - u)^2
        v + ln_scale - 2.0 * u_c.ln()
    }
}

/// Integrates `exp(ln_f(x))` over `(0, inf)` after the substitution
/// `x = s * u / (1 - u)` with `s = spec.semi_infinite_scale`.
///
/// ```
/// use gibbs_partitions::quadrature::{integrate_0inf, QuadratureSpec};
/// let est = integrate_0inf(|t| -t, &QuadratureSpec::default()).unwrap();
/// assert!((est.value - 1.0).abs() < 1e-12);
/// ```
pub fn integrate_0inf<F>(ln_f: F, spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    integrate_01(semi_infinite(ln_f, spec.semi_infinite_scale), spec)
}

/// Log-domain variant of [`integrate_0inf`], relative tolerance only.
pub fn integrate_0inf_ln<F>(ln_f: F, spec: &QuadratureSpec) -> Result<LogEstimate, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    integrate_01_ln(semi_infinite(ln_f, spec.semi_infinite_scale), spec)
}

/// Integrates `exp(ln_f(x))` over the finite interval `(a, b)`.
pub fn integrate_interval<F>(
    mut ln_f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    if !(b > a) {
        return Err(QuadratureError::InvalidSpec("interval must satisfy a < b"));
    }
    let ln_w = (b - a).ln();
    integrate_01(move |u, u_c| ln_f(a * u_c + b * u) + ln_w, spec)
}
