use anyhow::{bail, Result};
use levyx_core::algebra::{self, reverse_at};
use levyx_core::char_exponent;
use levyx_core::math::normal_cdf;
use levyx_core::stats::{correlation, energy_test, MeanAcc};
use num_complex::Complex64;

use super::{agree, ks, stream, Ctx, Est};
use crate::functional::{eval_all, FunctionalSpec};
use crate::report::{CheckResult, SeedRun, Statistic};

/// Empirical E[e^{iλX_t}] against e^{−tψ(λ)}, tolerance 4/√n per λ.
pub fn simulator_cf(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let t = ctx.cfg.t_or(1.0);
    let lambdas = ctx.cfg.levels_or(&[0.25, 0.5, 1.0, 2.0, 4.0]);
    let n = ctx.n();
    let h = ctx.h().min(t);
    let ends = ctx.runner.map(n, |i| ctx.sim.path(0.0, t, h, stream(seed, 1, i)).map(|p| p.end_value()));
    let ends: Vec<f64> = ends.into_iter().collect::<Result<_, _>>()?;
    let mut run = SeedRun::new(seed, vec![h]);
    run.size("paths", n);
    for &lam in &lambdas {
        let mc: Complex64 = ends.iter().map(|&x| Complex64::new(0.0, lam * x).exp()).sum::<Complex64>() / n as f64;
        let exact = (-t * char_exponent(&ctx.triplet, lam)?).exp();
        run.check(CheckResult::new(
            format!("cf_lambda_{lam}"),
            Statistic::Residual { value: (mc - exact).norm(), se: 0.0, tolerance: 4.0 / (n as f64).sqrt(), k: 0.0 },
        ));
    }
    run.dump("endpoint", &["x_t"], ends.iter().map(|&x| vec![x]).collect());
    Ok(run)
}

/// Functionals of X reversed at t against the same functionals of fresh paths.
pub fn duality(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let t = ctx.cfg.t_or(1.0);
    let specs =
        ctx.cfg.functionals_or(&[FunctionalSpec::EndpointValue, FunctionalSpec::SupValue, FunctionalSpec::InfTime]);
    let n = ctx.n();
    let h = ctx.h();
    let rows = ctx.runner.map(n, |i| -> Result<(Vec<f64>, Vec<f64>)> {
        let p = ctx.sim.path(0.0, t, h, stream(seed, 1, i))?;
        let q = ctx.sim.path(0.0, t, h, stream(seed, 2, i))?;
        Ok((eval_all(&specs, &reverse_at(&p, t)?), eval_all(&specs, &q)))
    });
    let rows: Vec<(Vec<f64>, Vec<f64>)> = rows.into_iter().collect::<Result<_>>()?;
    let mut run = SeedRun::new(seed, vec![h]);
    run.size("reversed", n);
    run.size("fresh", n);
    for (k, f) in specs.iter().enumerate() {
        let a: Vec<f64> = rows.iter().map(|r| r.0[k]).collect();
        let b: Vec<f64> = rows.iter().map(|r| r.1[k]).collect();
        run.check(ks(&format!("ks_{}", f.name()), &a, &b));
    }
    if specs.len() >= 2 {
        // Energy test on the first two functionals, on a subsample.
        let m = n.min(400);
        let pair = |side: usize| -> Vec<[f64; 2]> {
            rows[..m].iter().map(|r| if side == 0 { [r.0[0], r.0[1]] } else { [r.1[0], r.1[1]] }).collect()
        };
        let mut rng = stream(seed, 3, 0).rng();
        let o = energy_test(&pair(0), &pair(1), 199, &mut rng);
        run.check(CheckResult::new(
            format!("energy_{}_{}", specs[0].name(), specs[1].name()),
            Statistic::Energy { statistic: o.statistic, p_value: o.p_value, n_a: m, n_b: m, min_p: super::MIN_P },
        ));
    }
    let names: Vec<String> = specs.iter().map(|f| f.name()).collect();
    let cols: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    run.dump("reversed", &cols, rows.iter().map(|r| r.0.clone()).collect());
    run.dump("fresh", &cols, rows.iter().map(|r| r.1.clone()).collect());
    Ok(run)
}

/// Brownian P(τ_x ≤ t) at each grid step in `levels` (coarse to fine) against
/// 2(1 − Φ(x/√(2bt))).
pub fn first_passage(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    if ctx.triplet.jump_rate() > 0.0 || ctx.triplet.path_velocity()? != 0.0 {
        bail!("first_passage needs a driftless Brownian triplet");
    }
    let (x, t) = (ctx.cfg.x_or(1.0), ctx.cfg.t_or(1.0));
    let grids = ctx.cfg.levels_or(&[1e-2, 1e-3, ctx.h()]);
    let oracle = 2.0 * (1.0 - normal_cdf(x / (2.0 * ctx.triplet.gaussian_b() * t).sqrt()));
    let n = ctx.n();
    let mut run = SeedRun::new(seed, grids.clone());
    let mut errors = Vec::new();
    for (g, &h) in grids.iter().enumerate() {
        let hits = ctx.runner.map(n, |i| -> Result<bool> {
            let (p, _) = ctx.sim.path_until(0.0, h, t, stream(seed, 1 + g as u16, i), |q| q.value > x)?;
            Ok(algebra::first_passage_up(&p, x).is_some_and(|c| c.time <= t))
        });
        let hits: Vec<bool> = hits.into_iter().collect::<Result<_>>()?;
        let est = MeanAcc::from_iter(hits.iter().map(|&b| if b { 1.0 } else { 0.0 }));
        run.estimate(&format!("p_hat_grid_{h}"), est.mean());
        run.estimate(&format!("se_grid_{h}"), est.se());
        errors.push((est.mean() - oracle).abs());
    }
    run.estimate("oracle", oracle);
    run.size("paths_per_grid", n);
    let finest = *errors.last().expect("at least one grid");
    run.check(CheckResult::new(
        "finest_grid_within_0.015",
        Statistic::Residual { value: finest, se: 0.0, tolerance: 0.015, k: 0.0 },
    ));
    if errors.len() >= 2 {
        // Error shrinks from the coarsest to the finest grid.
        run.check(CheckResult::new("refinement_trend", Statistic::Increasing { values: vec![-errors[0], -finest] }));
    }
    Ok(run)
}

/// E[e^{iβS_T}]·E[e^{iβI_T}] against α/(α + ψ(β)), T ~ Exp(α), plus the split of
/// [0, T] at the infimum: independence of the two parts and consistency across rates.
pub fn wiener_hopf(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let alpha = ctx.cfg.alpha_or(1.0);
    let betas = ctx.cfg.levels_or(&[0.5, 1.0, 2.0]);
    let tolerance = if ctx.triplet.jump_rate() > 0.0 { 0.03 } else { 0.02 };
    let n = ctx.n();
    let h = ctx.h();
    // Per path: S_T, I_T, ĝ_T (last time of the infimum), T − ĝ_T and X_T − I_T.
    let split = |rate: f64, tag: u16| -> Result<Vec<[f64; 5]>> {
        let rows = ctx.runner.map(n, |i| -> Result<[f64; 5]> {
            let p = ctx.sim.path_exp(rate, h, stream(seed, tag, i))?;
            let t = p.lifetime();
            let (g, _) = algebra::extremum_times(&p, t)?;
            Ok([p.sup(), p.inf(), g, t - g, p.end_value() - p.inf()])
        });
        rows.into_iter().collect()
    };
    let rows = split(alpha, 1)?;
    let ext: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let mut run = SeedRun::new(seed, vec![h]);
    run.size("paths", n);
    let mut worst: f64 = 0.0;
    for &beta in &betas {
        let es: Vec<Complex64> = ext.iter().map(|&(s, _)| Complex64::new(0.0, beta * s).exp()).collect();
        let ei: Vec<Complex64> = ext.iter().map(|&(_, i)| Complex64::new(0.0, beta * i).exp()).collect();
        let a = es.iter().sum::<Complex64>() / n as f64;
        let b = ei.iter().sum::<Complex64>() / n as f64;
        let target = alpha / (alpha + char_exponent(&ctx.triplet, beta)?);
        let residual = (a * b - target).norm();
        // Influence of each path on the product.
        let var = es.iter().zip(&ei).map(|(&x, &y)| (b * (x - a) + a * (y - b)).norm_sqr()).sum::<f64>() / n as f64;
        let se = (var / n as f64).sqrt();
        worst = worst.max(residual);
        run.check(CheckResult::new(
            format!("residual_beta_{beta}"),
            Statistic::Residual { value: residual, se, tolerance, k: 3.0 },
        ));
    }
    run.estimate("max_residual", worst);

    // At an independent exponential time the pre- and post-infimum parts are independent,
    // and the post-infimum law at rate α, tilted by e^{−αL} with L = T − ĝ_T, is the law at
    // rate 2α times E_α[e^{−αL}]: E_α[e^{−αL} G] = E_α[e^{−αL}] E_2α[G].
    let col = |v: &[[f64; 5]], k: usize, f: &dyn Fn(f64) -> f64| v.iter().map(|r| f(r[k])).collect::<Vec<f64>>();
    let bound = 3.0 / (n as f64).sqrt();
    let down = |v: f64| (-v.abs()).exp();
    for (name, a, b) in
        [("independence_infimum_vs_post_endpoint", 1, 4), ("independence_infimum_time_vs_post_lifetime", 2, 3)]
    {
        let value = correlation(&col(&rows, a, &down), &col(&rows, b, &down));
        run.check(CheckResult::new(name, Statistic::Correlation { value, n, bound }));
    }
    let doubled = split(2.0 * alpha, 2)?;
    let tilt = col(&rows, 3, &|l| (-alpha * l).exp());
    let g = col(&rows, 4, &down);
    let lhs = Est::mean(tilt.iter().zip(&g).map(|(t, g)| t * g));
    // Both sides use the rate-α paths; treating them as independent overstates the
    // standard error of the difference.
    let rhs = Est::combine(&[(Est::mean(tilt.iter().copied()), 1), (Est::mean(col(&doubled, 4, &down)), 1)]);
    run.check(agree("post_infimum_two_rates", lhs, rhs));
    if ctx.triplet.jump_rate() == 0.0 && ctx.triplet.path_velocity()? == 0.0 {
        // κ(α, 0) ∝ √α for Brownian motion, so E_α[e^{−αL}] = √(α/2α).
        let exact = Est { value: 0.5f64.sqrt(), se: 0.0 };
        run.check(agree("post_infimum_lifetime_transform", Est::mean(tilt.iter().copied()), exact));
    }
    run.dump(
        "extrema",
        &["sup", "inf", "inf_time", "post_lifetime", "post_endpoint"],
        rows.iter().map(|r| r.to_vec()).collect(),
    );
    Ok(run)
}
