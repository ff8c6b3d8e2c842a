use anyhow::{bail, Result};
use levyx_core::algebra::reverse_at;
use levyx_core::fluctuation::{excursions_above_infimum, excursions_below_supremum, ExcursionRecord};

use super::{fraction, ks, stream, CreepTracker, Ctx};
use crate::functional::{eval_all, FunctionalSpec};
use crate::report::{CheckResult, SeedRun, Statistic};

fn creeping(e: &ExcursionRecord, budget: f64) -> bool {
    e.complete && e.terminal_jump == 0.0 && e.local_time_coord < budget
}

/// Creeping excursions below the supremum, reversed at ζ, against creeping excursions
/// above the infimum, both conditioned on ζ > `delta`; plus the counts of creeping
/// excursions below the supremum with ζ > ε over the ε in `levels`.
///
/// Excursions are collected while the creeped supremum (resp. infimum) is below the
/// budget `horizon`, and each path runs until both budgets are spent, so every collected
/// excursion is complete.
pub fn revexc_continuous(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    if ctx.triplet.gaussian_b() <= 0.0 {
        bail!("revexc_continuous needs a Gaussian component");
    }
    let budget = ctx.cfg.horizon_or(0.2);
    let cap = ctx.cfg.cap_or(100.0);
    let min_life = ctx.cfg.delta_or(0.1);
    let mut eps = ctx.cfg.levels_or(&[0.1, 0.01, 0.001]);
    eps.sort_by(|a, b| b.total_cmp(a));
    let specs = ctx.cfg.functionals_or(&[
        FunctionalSpec::Lifetime,
        FunctionalSpec::SupValue,
        FunctionalSpec::ValueAtFraction(0.25),
    ]);
    let (h, n) = (ctx.h(), ctx.n());

    type Rows = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<usize>);
    let per_path = ctx.runner.map(n, |i| -> Result<Option<Rows>> {
        let mut up = CreepTracker::new(0.0, true);
        let mut down = CreepTracker::new(0.0, false);
        let (p, fired) = ctx.sim.path_until(0.0, h, cap, stream(seed, 1, i), |q| {
            let a = up.push(q);
            let b = down.push(q);
            a >= budget && b >= budget
        })?;
        if !fired {
            return Ok(None);
        }
        let mut below = Vec::new();
        let mut counts = vec![0usize; eps.len()];
        for e in excursions_below_supremum(&p).iter().filter(|e| creeping(e, budget)) {
            for (c, &ep) in counts.iter_mut().zip(&eps) {
                if e.lifetime > ep {
                    *c += 1;
                }
            }
            if e.lifetime > min_life {
                below.push(eval_all(&specs, &reverse_at(&e.segment, e.lifetime)?));
            }
        }
        let above = excursions_above_infimum(&p)
            .iter()
            .filter(|e| creeping(e, budget) && e.lifetime > min_life)
            .map(|e| eval_all(&specs, &e.segment))
            .collect();
        Ok(Some((below, above, counts)))
    });
    let per_path: Vec<Option<Rows>> = per_path.into_iter().collect::<Result<_>>()?;
    let excluded = fraction(per_path.iter().filter(|r| r.is_none()).count(), n);
    let kept: Vec<Rows> = per_path.into_iter().flatten().collect();
    let below: Vec<Vec<f64>> = kept.iter().flat_map(|r| r.0.iter().cloned()).collect();
    let above: Vec<Vec<f64>> = kept.iter().flat_map(|r| r.1.iter().cloned()).collect();
    let counts: Vec<f64> = (0..eps.len()).map(|c| kept.iter().map(|r| r.2[c]).sum::<usize>() as f64).collect();

    let mut run = SeedRun::new(seed, vec![h]);
    run.exclusion("cap_before_budget", excluded);
    run.size("paths", kept.len());
    run.size("reversed_below_sup", below.len());
    run.size("above_inf", above.len());
    let few = below.len().min(above.len()) < 500;
    for (k, f) in specs.iter().enumerate() {
        let a: Vec<f64> = below.iter().map(|r| r[k]).collect();
        let b: Vec<f64> = above.iter().map(|r| r[k]).collect();
        run.check(
            ks(&format!("ks_{}", f.name()), &a, &b)
                .inconclusive_if(few, "fewer than 500 creeping excursions")
                .inconclusive_if(excluded >= 0.05, "cap reached on 5% of paths or more"),
        );
    }
    for (&e, &c) in eps.iter().zip(&counts) {
        run.estimate(&format!("creeping_count_life_above_{e}"), c);
    }
    run.check(CheckResult::new("truncated_counts_increase", Statistic::Increasing { values: counts }));
    let names: Vec<String> = specs.iter().map(|f| f.name()).collect();
    let cols: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    run.dump("reversed_below_sup", &cols, below);
    run.dump("above_inf", &cols, above);
    Ok(run)
}
