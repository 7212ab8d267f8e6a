//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Tolerances and runtime budgets are fixed below.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gibbs_partitions::combinatorics::partition_shapes;
use gibbs_partitions::eppf::{
    consistency_residual, gg_v_weights, mixture_eppf, pd_v_weights, verify_gibbs_recursion, verify_normalization,
    ConditionalStableEppf, Eppf, MixingDensity,
};
use gibbs_partitions::levy::{gamma_model, gamma_model_with_rate, generalized_gamma_model, stable_model, verify_laplace_exponent, LevyModel};
use gibbs_partitions::quadrature::QuadratureSpec;
use gibbs_partitions::samplers::{crp_sample, fisher_sample, gibbs_predictive_sample, shape_histogram, RandomSource};
use gibbs_partitions::structural::{
    default_grid, gamma_structural_ln_density, half_stable_structural_ln_density, structural_density, verify_tilt_invariance,
};
use gibbs_partitions::verification::max_standardized_deviation;
use gibbs_partitions::Result;
use statrs::distribution::{Continuous, Gamma};

type Outcome = Result<(bool, String)>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const PD_ALPHAS: [f64; 5] = [-1.0, 0.0, 0.3, 0.5, 0.9];
const PD_THETAS: [f64; 3] = [0.5, 1.0, 5.0];
const MC_DRAWS: usize = 1_000_000;
const SIGMAS: f64 = 4.0;

// alpha < 0 needs theta = m |alpha| for a positive integer m
fn valid_pd_pairs() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for a in PD_ALPHAS {
        for t in PD_THETAS {
            let ok = if a < 0.0 { (t / -a).fract() == 0.0 } else { t > -a };
            if ok {
                out.push((a, t));
            }
        }
    }
    out
}

fn pd_normalization() -> Outcome {
    let pairs = valid_pd_pairs();
    let mut worst: f64 = 0.0;
    for &(a, t) in &pairs {
        let m = pd_v_weights(a, t, 8)?;
        for n in 2..=8 {
            worst = worst.max(verify_normalization(&m, n)?);
        }
    }
    Ok((worst < 1e-10, format!("{} pairs, n = 2..8, max |sum - 1| = {worst:.2e} (tol 1e-10)", pairs.len())))
}

fn gibbs_recursion() -> Outcome {
    let mut pd: f64 = 0.0;
    for (a, t) in valid_pd_pairs() {
        pd = pd.max(verify_gibbs_recursion(&pd_v_weights(a, t, 20)?, 19)?);
    }
    let spec = QuadratureSpec::default();
    let mut gg: f64 = 0.0;
    for (d, z) in [(1.0, 1.0), (2.0, 0.5)] {
        // rows up to N + 1 so the recursion is checked through N
        let m = gg_v_weights(0.5, d, z, 9, &spec)?;
        gg = gg.max(verify_gibbs_recursion(&m, 8)?);
    }
    Ok((pd < 1e-12 && gg < 1e-6, format!("PD N=20 residual {pd:.2e} (tol 1e-12), GG N=8 residual {gg:.2e} (tol 1e-6)")))
}

fn tilt_invariance() -> Outcome {
    let grid = default_grid();
    let mut models: Vec<LevyModel> = vec![gamma_model(0.5)?, gamma_model(2.0)?];
    for d in [0.5, 1.0, 2.0] {
        models.push(stable_model(0.5, d)?);
    }
    let mut worst: f64 = 0.0;
    for m in &models {
        for l in [0.1, 1.0, 10.0] {
            worst = worst.max(verify_tilt_invariance(m, l, &grid)?);
        }
    }
    Ok((worst < 1e-10, format!("{} models x 3 tilts on {} points, max rel diff {worst:.2e} (tol 1e-10)", models.len(), grid.len())))
}

fn mixture_matches_gg() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut worst_match: f64 = 0.0;
    let mut worst_gamma = f64::INFINITY;
    for zeta in [0.5, 2.0] {
        let gg = gg_v_weights(0.5, 1.0, zeta, 6, &spec)?;
        let tilted = MixingDensity::tilted_stable(0.5, 1.0, zeta)?;
        let gamma = MixingDensity::truncated_gamma(2.0, 1.0, 10.0)?;
        let mut gamma_gap: f64 = 0.0;
        for n in 1..=6 {
            for s in partition_shapes(n) {
                let target = gg.eppf(&s)?;
                let mixed = mixture_eppf(0.5, 1.0, &tilted, &s, &spec)?;
                worst_match = worst_match.max((mixed - target).abs() / target);
                let wrong = mixture_eppf(0.5, 1.0, &gamma, &s, &spec)?;
                gamma_gap = gamma_gap.max((wrong - target).abs() / target);
            }
        }
        worst_gamma = worst_gamma.min(gamma_gap);
    }
    Ok((
        worst_match < 1e-6 && worst_gamma > 1e-3,
        format!("tilted stable vs GG max rel diff {worst_match:.2e} (tol 1e-6), truncated Gamma gap {worst_gamma:.2e} (must exceed 1e-3)"),
    ))
}

fn inverse_gaussian_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for (d, z) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)] {
        let generic = structural_density(&generalized_gamma_model(0.5, d, z)?)?;
        for i in 1..20 {
            let p = i as f64 / 20.0;
            for t in [0.1, 0.5, 1.0, 2.0, 10.0] {
                let a = generic.evaluate(p, t)?;
                let b = half_stable_structural_ln_density(d, p, 1.0 - p, t).exp();
                worst = worst.max((a - b).abs() / b);
                points += 1;
            }
        }
    }
    Ok((worst < 1e-10, format!("{points} points, max rel diff {worst:.2e} (tol 1e-10)")))
}

fn gamma_structural() -> Outcome {
    let mut t_var: f64 = 0.0;
    let mut closed: f64 = 0.0;
    for theta in [0.5, 1.0, 2.0, 5.0] {
        let s = structural_density(&gamma_model(theta)?)?;
        for i in 1..20 {
            let p = i as f64 / 20.0;
            let vals = [0.1, 0.5, 1.0, 2.0, 10.0].map(|t| s.evaluate(p, t));
            let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
            let exact = gamma_structural_ln_density(theta, 1.0 - p).exp();
            let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
            t_var = t_var.max((hi - lo) / exact);
            closed = closed.max(vals.iter().map(|v| (v - exact).abs() / exact).fold(0.0, f64::max));
        }
    }
    let mut tilt: f64 = 0.0;
    for theta in [0.5, 2.0] {
        for l in [0.1, 1.0, 10.0] {
            let tilted = gamma_model(theta)?.tilt(l)?;
            let rated = gamma_model_with_rate(theta, 1.0 + l)?;
            let oracle = Gamma::new(theta, 1.0 + l).expect("valid gamma");
            for t in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
                let want = oracle.pdf(t);
                tilt = tilt.max((tilted.density(t)? - want).abs() / want);
                tilt = tilt.max((rated.density(t)? - want).abs() / want);
            }
        }
    }
    Ok((
        t_var < 1e-12 && closed < 1e-12 && tilt < 1e-12,
        format!("t-variation {t_var:.2e}, vs theta(1-p)^(theta-1) {closed:.2e}, tilted Gamma density {tilt:.2e} (tol 1e-12)"),
    ))
}

fn laplace_exponent() -> Outcome {
    let spec = QuadratureSpec::default().with_rel_tol(1e-11);
    let mut models = vec![gamma_model(0.5)?, gamma_model(2.0)?, stable_model(0.5, 1.0)?];
    for base in models.clone() {
        for l in [0.1, 1.0, 10.0] {
            models.push(base.tilt(l)?);
        }
    }
    let mut worst: f64 = 0.0;
    for m in &models {
        for b in [0.1, 1.0, 10.0] {
            worst = worst.max(verify_laplace_exponent(m, b, &spec)?);
        }
    }
    Ok((worst < 1e-8, format!("{} models x 3 arguments, max residual {worst:.2e} (tol 1e-8)", models.len())))
}

fn monte_carlo() -> Outcome {
    const N: usize = 5;
    let root = RandomSource::new(20_240_501);
    let mut stream = 0;
    let mut next = || {
        stream += 1;
        root.substream(stream)
    };
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (a, t) in [(0.5, 0.5), (0.0, 1.0)] {
        let model = pd_v_weights(a, t, N)?;
        let hist = shape_histogram(MC_DRAWS, &mut next(), |r| crp_sample(a, t, N, r))?;
        let z = max_standardized_deviation(&hist, MC_DRAWS, &model, N)?;
        lines.push(format!("crp PD({a},{t}) {z:.2}"));
        worst = worst.max(z);
        let hist = shape_histogram(MC_DRAWS, &mut next(), |r| gibbs_predictive_sample(&model, N, r))?;
        let z = max_standardized_deviation(&hist, MC_DRAWS, &model, N)?;
        lines.push(format!("predictive PD({a},{t}) {z:.2}"));
        worst = worst.max(z);
    }
    let gg = gg_v_weights(0.5, 1.0, 1.0, N, &QuadratureSpec::default())?;
    let hist = shape_histogram(MC_DRAWS, &mut next(), |r| gibbs_predictive_sample(&gg, N, r))?;
    let z = max_standardized_deviation(&hist, MC_DRAWS, &gg, N)?;
    lines.push(format!("predictive gg(1/2,1,1) {z:.2}"));
    worst = worst.max(z);
    Ok((worst < SIGMAS, format!("max |z| per shape: {} (bound 4)", lines.join(", "))))
}

fn conditional_stable() -> Outcome {
    let c = ConditionalStableEppf::new(0.5, 1.0, &QuadratureSpec::default())?;
    let mut norm: f64 = 0.0;
    let mut cons: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        let e = c.at(t)?;
        for n in 1..=5 {
            norm = norm.max(verify_normalization(&e, n)?);
        }
        for n in 1..=4 {
            for s in partition_shapes(n) {
                cons = cons.max(consistency_residual(&e, &s)?.abs());
            }
        }
    }
    Ok((
        norm < 1e-6 && cons < 1e-6,
        format!("kappa {:.13}, normalization {norm:.2e}, addition rule {cons:.2e} (tol 1e-6)", c.correction_factor()),
    ))
}

fn fisher() -> Outcome {
    const N: usize = 3;
    let model = pd_v_weights(-1.0, 2.0, N)?;
    let mut src = RandomSource::new(7).substream(10);
    let mut max_k = 0;
    let hist = shape_histogram(MC_DRAWS, &mut src, |r| {
        let p = fisher_sample(-1.0, 2, N, r)?;
        max_k = max_k.max(p.num_blocks());
        Ok(p)
    })?;
    // at n = 3 a third block is possible in principle, so the bound is tested here
    let z = max_standardized_deviation(&hist, MC_DRAWS, &model, N)?;
    Ok((max_k <= 2 && z < SIGMAS, format!("max blocks {max_k} (bound 2), max |z| {z:.2} (bound 4)")))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "PD normalization", budget: Duration::from_secs(10), run: pd_normalization },
        Criterion { id: 2, name: "Gibbs recursion", budget: Duration::from_secs(60), run: gibbs_recursion },
        Criterion { id: 3, name: "structural tilt invariance", budget: Duration::from_secs(5), run: tilt_invariance },
        Criterion { id: 4, name: "mixture equals generalized Gamma", budget: Duration::from_secs(300), run: mixture_matches_gg },
        Criterion { id: 5, name: "inverse Gaussian structural closed form", budget: Duration::from_secs(1), run: inverse_gaussian_closed_form },
        Criterion { id: 6, name: "Gamma structural and tilted Gamma", budget: Duration::from_secs(1), run: gamma_structural },
        Criterion { id: 7, name: "Laplace exponent identity", budget: Duration::from_secs(5), run: laplace_exponent },
        Criterion { id: 8, name: "Monte Carlo shape frequencies", budget: Duration::from_secs(180), run: monte_carlo },
        Criterion { id: 9, name: "conditional stable EPPF", budget: Duration::from_secs(120), run: conditional_stable },
        Criterion { id: 10, name: "Fisher sampler", budget: Duration::from_secs(60), run: fisher },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok((ok, d)) => (ok && took <= c.budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} | {} | {:.2} s of {} s",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            detail,
            took.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!("acceptance: {} failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
