use anyhow::Result;
use levyx_core::algebra::split_at_infimum;
use levyx_core::conditioned::{build_conditioned, occupation_reached, Direction, LocalTimeAtZero};
use levyx_core::math::bessel3_cdf;

use super::{fraction, ks, ks_cdf, stream, Ctx};
use crate::functional::{eval_all, FunctionalSpec};
use crate::report::SeedRun;

/// Brownian triplets: X↑ at occupation times `levels` against the Bessel(3) law.
/// All triplets: the post-infimum path of X on [0, t] against X↑ built from an
/// independent path on [0, t] (which stops it at A⁺_t).
pub fn conditioned_up(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let h = ctx.h();
    let n = ctx.n();
    let mut run = SeedRun::new(seed, vec![h]);
    let brownian = ctx.triplet.jump_rate() == 0.0 && ctx.triplet.path_velocity()? == 0.0;
    if brownian {
        let times = ctx.cfg.levels_or(&[0.25, 1.0]);
        let target = times.iter().cloned().fold(0.0, f64::max);
        let cap = ctx.cfg.cap_or(2000.0);
        let scale = (2.0 * ctx.triplet.gaussian_b()).sqrt();
        let rows = ctx.runner.map(n, |i| -> Result<Option<Vec<f64>>> {
            let (p, fired) =
                ctx.sim.path_until(0.0, h, cap, stream(seed, 1, i), occupation_reached(target, Direction::Up))?;
            if !fired {
                return Ok(None);
            }
            let cp = build_conditioned(&p, LocalTimeAtZero::Tanaka, Direction::Up);
            Ok((cp.base.lifetime() >= target).then(|| times.iter().map(|&s| cp.base.value_at(s)).collect()))
        });
        let rows: Vec<Option<Vec<f64>>> = rows.into_iter().collect::<Result<_>>()?;
        let kept: Vec<&Vec<f64>> = rows.iter().flatten().collect();
        let excluded = fraction(n - kept.len(), n);
        run.exclusion("occupation_cap", excluded);
        run.size("marginal_paths", kept.len());
        for (k, &s) in times.iter().enumerate() {
            let xs: Vec<f64> = kept.iter().map(|r| r[k]).collect();
            run.check(
                ks_cdf(&format!("bessel3_marginal_{s}"), &xs, |v| bessel3_cdf(v / scale, s))
                    .inconclusive_if(excluded >= 0.05, "occupation cap reached on 5% of paths or more"),
            );
        }
        let cols: Vec<String> = times.iter().map(|s| format!("x_up_at_{s}")).collect();
        let cols: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
        run.dump("x_up_marginals", &cols, kept.iter().map(|r| r.to_vec()).collect());
    }
    let t = ctx.cfg.t_or(1.0);
    let specs =
        ctx.cfg.functionals_or(&[FunctionalSpec::EndpointValue, FunctionalSpec::SupValue, FunctionalSpec::Lifetime]);
    let pairs = ctx.runner.map(n, |i| -> Result<(Vec<f64>, Vec<f64>)> {
        let p = ctx.sim.path(0.0, t, h, stream(seed, 2, i))?;
        let post = split_at_infimum(&p, t)?.post;
        let q = ctx.sim.path(0.0, t, h, stream(seed, 3, i))?;
        let cp = build_conditioned(&q, LocalTimeAtZero::Tanaka, Direction::Up);
        Ok((eval_all(&specs, &post), eval_all(&specs, &cp.base)))
    });
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = pairs.into_iter().collect::<Result<_>>()?;
    run.size("post_infimum", n);
    run.size("x_up_stopped", n);
    for (k, f) in specs.iter().enumerate() {
        let a: Vec<f64> = pairs.iter().map(|r| r.0[k]).collect();
        let b: Vec<f64> = pairs.iter().map(|r| r.1[k]).collect();
        run.check(ks(&format!("post_infimum_{}", f.name()), &a, &b));
    }
    let names: Vec<String> = specs.iter().map(|f| f.name()).collect();
    let cols: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    run.dump("post_infimum", &cols, pairs.iter().map(|r| r.0.clone()).collect());
    run.dump("x_up_stopped", &cols, pairs.iter().map(|r| r.1.clone()).collect());
    Ok(run)
}
