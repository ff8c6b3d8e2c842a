use anyhow::{bail, Result};
use levyx_core::algebra::{
    first_passage_up, last_passage, reverse_at, reverse_just_before, running_extrema, stop_before,
};
use levyx_core::fluctuation::{excursions_below_supremum, local_time_at_infimum, LocalTimeMethod};
use levyx_core::quad::integrate;
use levyx_core::stats::effective_sample_size;
use levyx_core::{JumpSpec, Path};
use rand::Rng;

use super::{agree, fraction, ks, ks_cdf, stream, CreepTracker, Ctx, Est};
use crate::config::{JumpsConfig, LawConfig};
use crate::functional::{eval_all, FunctionalSpec};
use crate::lambda::estimate_lambda;
use crate::report::SeedRun;

fn require_positive_jumps(ctx: &Ctx) -> Result<f64> {
    let m = ctx.triplet.positive_jump_mass();
    if m <= 0.0 {
        bail!("{} needs a Lévy measure charging (0, ∞)", ctx.cfg.experiment_name);
    }
    Ok(m)
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

/// Mass and functional matches: `lhs[i] = (1{event}, F_1, …)` with F zero off the event,
/// `rhs[j] = (w, w F_1, …)`. `rhs_extra_se` is added in quadrature to each RHS entry.
fn mass_and_functionals(
    run: &mut SeedRun,
    specs: &[FunctionalSpec],
    lhs: &[Vec<f64>],
    rhs: &[Vec<f64>],
    rhs_extra_se: &[f64],
) {
    for k in 0..=specs.len() {
        let name = if k == 0 { "mass".to_string() } else { format!("functional_{}", specs[k - 1].name()) };
        let l = Est::mean(column(lhs, k));
        let mut r = Est::mean(column(rhs, k));
        r.se = (r.se * r.se + rhs_extra_se[k] * rhs_extra_se[k]).sqrt();
        run.estimate(&format!("lhs_{name}"), l.value);
        run.estimate(&format!("rhs_{name}"), r.value);
        run.check(agree(&name, l, r));
    }
}

/// E[F(X̂^σ); X_σ > x] with σ the last passage at or below x before t, against
/// ∫π(dr)∫_0^t du E_r[F(X_{·∧u}) Λ(t−u, X_u − x); x < X_u ≤ x + r], with r drawn from
/// the normalized positive jump law and u uniform on (0, t).
pub fn reversal_at_sigma(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let mass = require_positive_jumps(ctx)?;
    let (x, t) = (ctx.cfg.x_or(0.5), ctx.cfg.t_or(1.0));
    let specs = ctx.cfg.functionals_or(&[FunctionalSpec::EndpointValue, FunctionalSpec::Lifetime]);
    let (h, n) = (ctx.h(), ctx.n());
    let s_grid: Vec<f64> = (0..=100).map(|k| t * k as f64 / 100.0).collect();
    let a_grid: Vec<f64> = (0..=800).map(|k| k as f64 * 0.01).collect();
    let table = estimate_lambda(&ctx.triplet, &s_grid, &a_grid, n, seed, h, ctx.runner)?;

    // Also returns (stopped just before σ, reversed just before σ) for the conditional test.
    let lhs = ctx.runner.map(n, |i| -> Result<(Vec<f64>, Option<[f64; 4]>)> {
        let p = ctx.sim.path(0.0, t, h, stream(seed, 1, i))?;
        let mut row = vec![0.0; specs.len() + 1];
        let Some(c) = last_passage(&p, x, t)? else { return Ok((row, None)) };
        if !(c.value > x && c.by_jump()) {
            return Ok((row, None));
        }
        row[0] = 1.0;
        row[1..].copy_from_slice(&eval_all(&specs, &reverse_at(&p, c.time)?));
        let pre = stop_before(&p, c.time)?;
        let rev = reverse_just_before(&p, c.time)?;
        let half = FunctionalSpec::ValueAtFraction(0.5);
        Ok((row, Some([pre.sup(), half.eval(&pre), rev.sup(), half.eval(&rev)])))
    });
    let lhs: Vec<(Vec<f64>, Option<[f64; 4]>)> = lhs.into_iter().collect::<Result<_>>()?;
    let accepted = lhs.iter().filter(|r| r.0[0] > 0.0).count();
    if fraction(accepted, n) < 1e-3 {
        bail!("LHS acceptance {} below 1e-3; level x = {x} too extreme", fraction(accepted, n));
    }

    let rhs = ctx.runner.map(n, |j| -> Result<(Vec<f64>, f64)> {
        let mut rng = stream(seed, 2, j).rng();
        let r = ctx.triplet.sample_positive_jump(&mut rng).expect("positive jumps");
        let u: f64 = t * (1.0 - rng.random::<f64>());
        let q = ctx.sim.path(r, u, h.min(u), stream(seed, 3, j))?;
        let xu = q.end_value();
        let mut row = vec![0.0; specs.len() + 1];
        if !(x < xu && xu <= x + r) {
            return Ok((row, 0.0));
        }
        let w = mass * t * table.value(t - u, xu - x);
        row[0] = w;
        for (k, f) in eval_all(&specs, &q).into_iter().enumerate() {
            row[k + 1] = w * f;
        }
        Ok((row, mass * t * table.se_at(t - u, xu - x)))
    });
    let rhs: Vec<(Vec<f64>, f64)> = rhs.into_iter().collect::<Result<_>>()?;

    let mut run = SeedRun::new(seed, vec![h]);
    run.size("lhs_paths", n);
    run.size("lhs_accepted", accepted);
    run.size("rhs_samples", n);
    run.size("lambda_table_paths", n);
    let lhs_rows: Vec<Vec<f64>> = lhs.iter().map(|r| r.0.clone()).collect();
    let rhs_rows: Vec<Vec<f64>> = rhs.iter().map(|r| r.0.clone()).collect();
    // The table error is common to all RHS samples; bound its effect by the mean of
    // |weight ratio| times the table standard error.
    let extra: Vec<f64> = (0..=specs.len())
        .map(|k| {
            rhs.iter().map(|(row, se)| if row[0] > 0.0 { (row[k] / row[0]).abs() * se } else { 0.0 }).sum::<f64>()
                / n as f64
        })
        .collect();
    mass_and_functionals(&mut run, &specs, &lhs_rows, &rhs_rows, &extra);

    // X_{·∧σ−} and X̂^{σ−} on the event, from disjoint halves of the accepted paths.
    let pairs: Vec<[f64; 4]> = lhs.iter().filter_map(|r| r.1).collect();
    let (even, odd): (Vec<_>, Vec<_>) = pairs.iter().enumerate().partition(|(k, _)| k % 2 == 0);
    let side = |v: &[(usize, &[f64; 4])], c: usize| v.iter().map(|(_, r)| r[c]).collect::<Vec<f64>>();
    run.check(ks("conditional_pre_vs_reversed_sup", &side(&even, 0), &side(&odd, 2)));
    run.check(ks("conditional_pre_vs_reversed_value_at_0.5", &side(&even, 1), &side(&odd, 3)));

    let names: Vec<String> = std::iter::once("weight".to_string()).chain(specs.iter().map(|f| f.name())).collect();
    let cols: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    run.dump("lhs", &cols, lhs_rows);
    run.dump("rhs", &cols, rhs_rows);
    Ok(run)
}

/// E[F(X̂^τ); τ ≤ H; X_τ > x] against ∫π(dr)∫_0^H du E_r[F(X_{·∧u}); x < X_u ≤ x + I_u],
/// u drawn from an exponential proposal truncated to (0, H].
pub fn reversal_at_tau(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let mass = require_positive_jumps(ctx)?;
    let x = ctx.cfg.x_or(0.5);
    let cap = ctx.cfg.cap_or(20.0);
    let specs = ctx.cfg.functionals_or(&[FunctionalSpec::EndpointValue, FunctionalSpec::Lifetime]);
    let (h, n) = (ctx.h(), ctx.n());
    let beta = 2.0 / cap;
    let norm = 1.0 - (-beta * cap).exp();

    let lhs = ctx.runner.map(n, |i| -> Result<Vec<f64>> {
        let (p, _) = ctx.sim.path_until(0.0, h, cap, stream(seed, 1, i), |q| q.value > x)?;
        let mut row = vec![0.0; specs.len() + 1];
        if let Some(c) = first_passage_up(&p, x) {
            if c.time <= cap && c.by_jump() && c.value > x {
                row[0] = 1.0;
                row[1..].copy_from_slice(&eval_all(&specs, &reverse_at(&p, c.time)?));
            }
        }
        Ok(row)
    });
    let lhs: Vec<Vec<f64>> = lhs.into_iter().collect::<Result<_>>()?;
    let accepted = lhs.iter().filter(|r| r[0] > 0.0).count();
    if fraction(accepted, n) < 1e-3 {
        bail!("LHS acceptance {} below 1e-3; level x = {x} too extreme", fraction(accepted, n));
    }

    let rhs = ctx.runner.map(n, |j| -> Result<Vec<f64>> {
        let mut rng = stream(seed, 2, j).rng();
        let r = ctx.triplet.sample_positive_jump(&mut rng).expect("positive jumps");
        let v: f64 = rng.random();
        let u = -(1.0 - v * norm).ln() / beta;
        let mut row = vec![0.0; specs.len() + 1];
        // The indicator needs I_u > X_u − x > 0, so the path may stop once it reaches 0.
        let (q, hit_zero) =
            ctx.sim.path_until(r, h.min(u), u, stream(seed, 3, j), |p| p.value <= 0.0 || p.left() <= 0.0)?;
        if hit_zero {
            return Ok(row);
        }
        let xu = q.end_value();
        if !(x < xu && xu <= x + q.inf()) {
            return Ok(row);
        }
        let w = mass * norm / (beta * (-beta * u).exp());
        row[0] = w;
        for (k, f) in eval_all(&specs, &q).into_iter().enumerate() {
            row[k + 1] = w * f;
        }
        Ok(row)
    });
    let rhs: Vec<Vec<f64>> = rhs.into_iter().collect::<Result<_>>()?;
    let weights: Vec<f64> = rhs.iter().map(|r| r[0]).filter(|&w| w > 0.0).collect();
    let ess = effective_sample_size(&weights);

    let mut run = SeedRun::new(seed, vec![h]);
    run.size("lhs_paths", n);
    run.size("lhs_accepted", accepted);
    run.size("rhs_samples", n);
    run.size("rhs_nonzero", weights.len());
    run.estimate("rhs_effective_sample_size", ess);
    mass_and_functionals(&mut run, &specs, &lhs, &rhs, &vec![0.0; specs.len() + 1]);
    if ess < 100.0 {
        for c in &mut run.checks {
            c.outcome = crate::report::Verdict::Inconclusive;
            c.inconclusive = Some("effective sample size below 100".into());
        }
    }
    if is_compound_poisson_subordinator(ctx)? {
        subordinator_remark(ctx, seed, x, cap, &mut run)?;
    }
    let names: Vec<String> = std::iter::once("weight".to_string()).chain(specs.iter().map(|f| f.name())).collect();
    let cols: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    run.dump("lhs", &cols, lhs);
    run.dump("rhs", &cols, rhs);
    Ok(run)
}

fn is_compound_poisson_subordinator(ctx: &Ctx) -> Result<bool> {
    Ok(ctx.triplet.gaussian_b() == 0.0
        && matches!(ctx.triplet.jumps(), JumpSpec::CompoundPoisson { .. })
        && !ctx.triplet.has_negative_jumps()
        && ctx.triplet.path_velocity()? >= 0.0)
}

/// For a subordinator, E[f(X_τ−, X_τ); X_τ > x] = ∫_[0,x] V(da) ∫_(x−a,∞) π(dr) f(a, a + r)
/// with V the potential measure, so the right side is E[∫_0^τ h(X_t) dt]. Checked for
/// f = 1, f = X_τ− and f = X_τ − x, on independent paths.
fn subordinator_remark(ctx: &Ctx, seed: u64, x: f64, cap: f64, run: &mut SeedRun) -> Result<()> {
    let (h, n) = (ctx.h(), ctx.n());
    let tail = |r: f64| ctx.triplet.positive_tail(r);
    // ∫_y^∞ π((s, ∞)) ds on a table over y ∈ [0, x].
    let mut far = x.max(1.0);
    while tail(far) > 1e-12 * tail(0.0).max(1.0) {
        far *= 2.0;
    }
    let nodes = 2000;
    let beyond = integrate(tail, x, far, 1e-12).map_err(|e| anyhow::anyhow!("{e:?}"))?;
    let mut table = vec![beyond; nodes + 1];
    for k in (0..nodes).rev() {
        let (a, b) = (x * k as f64 / nodes as f64, x * (k + 1) as f64 / nodes as f64);
        table[k] = table[k + 1] + integrate(tail, a, b, 1e-13).map_err(|e| anyhow::anyhow!("{e:?}"))?;
    }
    let over = |y: f64| {
        let u = (y / x * nodes as f64).clamp(0.0, nodes as f64);
        let k = (u as usize).min(nodes - 1);
        table[k] + (u - k as f64) * (table[k + 1] - table[k])
    };
    let integrand = |a: f64| {
        let y = (x - a).max(0.0);
        [tail(y), a * tail(y), over(y)]
    };

    let lhs = ctx.runner.map(n, |i| -> Result<[f64; 3]> {
        let (p, _) = ctx.sim.path_until(0.0, h, cap, stream(seed, 5, i), |q| q.value > x)?;
        Ok(match first_passage_up(&p, x) {
            Some(c) if c.by_jump() && c.value > x => [1.0, c.left, c.value - x],
            _ => [0.0; 3],
        })
    });
    let lhs: Vec<[f64; 3]> = lhs.into_iter().collect::<Result<_>>()?;
    let rhs = ctx.runner.map(n, |i| -> Result<[f64; 3]> {
        let (p, _) = ctx.sim.path_until(0.0, h, cap, stream(seed, 6, i), |q| q.value > x)?;
        let end = first_passage_up(&p, x).map_or(p.lifetime(), |c| c.time);
        let q = stop_before(&p, end)?;
        let mut acc = [0.0; 3];
        // Simpson on each linear piece of X before τ.
        for w in q.points().windows(2) {
            let (a, b) = (w[0].value, (w[1].value - w[1].jump).min(x));
            let dt = w[1].time - w[0].time;
            let (fa, fm, fb) = (integrand(a), integrand(0.5 * (a + b)), integrand(b));
            for k in 0..3 {
                acc[k] += dt * (fa[k] + 4.0 * fm[k] + fb[k]) / 6.0;
            }
        }
        Ok(acc)
    });
    let rhs: Vec<[f64; 3]> = rhs.into_iter().collect::<Result<_>>()?;
    let col = |v: &[[f64; 3]], k: usize| Est::mean(v.iter().map(|r| r[k]));
    for (k, name) in ["subordinator_mass", "subordinator_undershoot", "subordinator_overshoot"].into_iter().enumerate()
    {
        run.check(agree(name, col(&lhs, k), col(&rhs, k)));
    }
    run.dump(
        "subordinator",
        &["lhs_jump", "lhs_undershoot", "lhs_overshoot", "rhs_mass", "rhs_undershoot", "rhs_overshoot"],
        lhs.iter().zip(&rhs).map(|(l, r)| l.iter().chain(r).copied().collect()).collect(),
    );
    Ok(())
}

/// Distance X − I above which a path from r is treated as gone for good.
const ESCAPE: f64 = 8.0;

/// Local time at the infimum (creeping part) along `q`, and for each increase the
/// functionals of the path stopped there: lifetime, value (the infimum), running sup.
fn infimum_local_time(ctx: &Ctx, q: &Path) -> Result<Vec<(f64, f64, f64, f64)>> {
    let lt = local_time_at_infimum(q, &ctx.triplet, LocalTimeMethod::CreepingInfimum)?;
    let (sup, inf) = running_extrema(q);
    let pts = q.points();
    Ok((1..pts.len())
        .filter_map(|k| {
            let dl = lt.values[k] - lt.values[k - 1];
            (dl > 0.0).then_some((dl, pts[k].time, inf[k], sup[k]))
        })
        .collect())
}

fn stopped_functional(f: &FunctionalSpec, time: f64, inf: f64, sup: f64) -> Result<f64> {
    Ok(match f {
        FunctionalSpec::Lifetime => time,
        FunctionalSpec::EndpointValue | FunctionalSpec::InfValue => inf,
        FunctionalSpec::SupValue => sup,
        other => bail!("excursion_reversal supports Lifetime, EndpointValue, InfValue and SupValue, not {other:?}"),
    })
}

/// N*(F(ω̂^ζ); ω_ζ > 0) against ∫π(dr) E_r[∫_0^{L_∞} dv F(X_{·∧L⁻¹_v}) 1{X_{L⁻¹_v} > 0}],
/// in forms free of the local-time normalizations: the mass relative to
/// N*(ζ) = E[L_∞], and conditional means of each functional.
pub fn excursion_reversal(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let mass = require_positive_jumps(ctx)?;
    if ctx.triplet.gaussian_b() <= 0.0 {
        bail!("excursion_reversal needs a Gaussian component");
    }
    let budget = ctx.cfg.horizon_or(1.0);
    let cap = ctx.cfg.cap_or(200.0);
    let specs = ctx.cfg.functionals_or(&[FunctionalSpec::Lifetime, FunctionalSpec::EndpointValue]);
    for f in &specs {
        stopped_functional(f, 0.0, 0.0, 0.0)?;
    }
    let (h, n) = (ctx.h(), ctx.n());
    let k = specs.len();

    // LHS: excursions below the supremum starting before the creeped supremum reaches
    // `budget`; all of them are complete when it does. Row: (#jump-ended, Σζ, ΣF…), and
    // ω_ζ− of each jump-ended excursion.
    let lhs = ctx.runner.map(n, |i| -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let mut tracker = CreepTracker::new(0.0, true);
        let (p, fired) = ctx.sim.path_until(0.0, h, cap, stream(seed, 1, i), |q| tracker.push(q) >= budget)?;
        if !fired {
            return Ok(None);
        }
        let mut row = vec![0.0; k + 2];
        let mut pre_jump = Vec::new();
        for e in excursions_below_supremum(&p) {
            if !e.complete || e.local_time_coord >= budget {
                continue;
            }
            row[1] += e.lifetime;
            if e.end_value > 0.0 {
                row[0] += 1.0;
                pre_jump.push(e.end_value - e.terminal_jump);
                let rev = reverse_at(&e.segment, e.lifetime)?;
                for (c, f) in specs.iter().enumerate() {
                    row[c + 2] += f.eval(&rev);
                }
            }
        }
        Ok(Some((row, pre_jump)))
    });
    let lhs: Vec<Option<(Vec<f64>, Vec<f64>)>> = lhs.into_iter().collect::<Result<_>>()?;
    let lhs_excluded = fraction(lhs.iter().filter(|r| r.is_none()).count(), n);
    let (lhs, pre_jump): (Vec<Vec<f64>>, Vec<Vec<f64>>) = lhs.into_iter().flatten().unzip();
    let pre_jump: Vec<f64> = pre_jump.concat();
    let jump_ended: f64 = lhs.iter().map(|r| r[0]).sum();

    // RHS: paths from r, integrated against dL while the infimum is positive.
    let rhs = ctx.runner.map(n, |j| -> Result<Option<Vec<f64>>> {
        let mut rng = stream(seed, 2, j).rng();
        let r = ctx.triplet.sample_positive_jump(&mut rng).expect("positive jumps");
        let mut inf = r;
        let (q, fired) = ctx.sim.path_until(r, h, cap, stream(seed, 3, j), |p| {
            inf = inf.min(p.left()).min(p.value);
            inf <= 0.0 || p.value - inf > ESCAPE
        })?;
        if !fired {
            return Ok(None);
        }
        let mut row = vec![0.0; k + 1];
        for (dl, time, i_val, s_val) in infimum_local_time(ctx, &q)? {
            if i_val <= 0.0 {
                break;
            }
            row[0] += mass * dl;
            for (c, f) in specs.iter().enumerate() {
                row[c + 1] += mass * dl * stopped_functional(f, time, i_val, s_val)?;
            }
        }
        Ok(Some(row))
    });
    let rhs: Vec<Option<Vec<f64>>> = rhs.into_iter().collect::<Result<_>>()?;
    let rhs_excluded = fraction(rhs.iter().filter(|r| r.is_none()).count(), n);
    let rhs: Vec<Vec<f64>> = rhs.into_iter().flatten().collect();

    // E[L_∞] from 0, the normalizer of N*(ζ).
    let total_lt = ctx.runner.map(n, |j| -> Result<Option<f64>> {
        let mut inf: f64 = 0.0;
        let (q, fired) = ctx.sim.path_until(0.0, h, cap, stream(seed, 4, j), |p| {
            inf = inf.min(p.left()).min(p.value);
            p.value - inf > ESCAPE
        })?;
        fired.then(|| infimum_local_time(ctx, &q).map(|v| v.iter().map(|e| e.0).sum::<f64>())).transpose()
    });
    let total_lt: Vec<Option<f64>> = total_lt.into_iter().collect::<Result<_>>()?;
    let lt_excluded = fraction(total_lt.iter().filter(|r| r.is_none()).count(), n);
    let total_lt: Vec<f64> = total_lt.into_iter().flatten().collect();

    let mut run = SeedRun::new(seed, vec![h]);
    run.exclusion("lhs_cap", lhs_excluded);
    run.exclusion("rhs_cap", rhs_excluded);
    run.exclusion("local_time_cap", lt_excluded);
    run.size("lhs_paths", lhs.len());
    run.size("lhs_jump_ended_excursions", jump_ended as usize);
    run.size("rhs_samples", rhs.len());
    run.size("local_time_paths", total_lt.len());
    let excluded = lhs_excluded.max(rhs_excluded).max(lt_excluded) >= 0.05;
    let few = jump_ended < 500.0;
    let flag = |c: crate::report::CheckResult| {
        c.inconclusive_if(few, "fewer than 500 jump-ended excursions")
            .inconclusive_if(excluded, "cap reached on 5% of paths or more")
    };

    let lhs_mass = Est::ratio(&column(&lhs, 0), &column(&lhs, 1));
    let rhs_mass = Est::combine(&[(Est::mean(column(&rhs, 0)), 1), (Est::mean(total_lt.iter().copied()), -1)]);
    run.estimate("lhs_mass_ratio", lhs_mass.value);
    run.estimate("rhs_mass_ratio", rhs_mass.value);
    run.check(flag(agree("mass_relative_to_n_star_zeta", lhs_mass, rhs_mass)));
    for (c, f) in specs.iter().enumerate() {
        let l = Est::ratio(&column(&lhs, c + 2), &column(&lhs, 0));
        let r = Est::ratio(&column(&rhs, c + 1), &column(&rhs, 0));
        run.estimate(&format!("lhs_mean_{}", f.name()), l.value);
        run.estimate(&format!("rhs_mean_{}", f.name()), r.value);
        run.check(flag(agree(&format!("conditional_mean_{}", f.name()), l, r)));
    }
    // Spectrally positive, drifting up, exponential jumps of rate λ: ω_ζ− has density
    // ∝ P(I_∞ < y)·π((−y, ∞)) = e^{Φy}·e^{λy} on y < 0, where −I_∞ is exponential
    // with rate Φ, the positive root of the Laplace exponent of −X.
    if let Some((phi, lambda)) = spectrally_positive_exponential(ctx)? {
        let k = phi + lambda;
        run.estimate("minus_infimum_rate", phi);
        run.check(flag(ks_cdf("pre_jump_value_law", &pre_jump, |y| (k * y.min(0.0)).exp())));
    }
    run.dump("pre_jump_values", &["value"], pre_jump.iter().map(|&v| vec![v]).collect());
    let names: Vec<String> = specs.iter().map(|f| format!("sum_{}", f.name())).collect();
    let mut cols = vec!["jump_ended", "time_below_sup"];
    cols.extend(names.iter().map(|s| s.as_str()));
    run.dump("lhs", &cols, lhs);
    let mut cols = vec!["weighted_local_time"];
    cols.extend(names.iter().map(|s| s.as_str()));
    run.dump("rhs", &cols, rhs);
    Ok(run)
}

/// (Φ, λ) when the jumps are exponential of rate λ and upward only and X drifts to +∞;
/// Φ > 0 solves −vθ + bθ² + c(λ/(λ + θ) − 1) = 0, the Laplace exponent of −X.
fn spectrally_positive_exponential(ctx: &Ctx) -> Result<Option<(f64, f64)>> {
    let JumpsConfig::CompoundPoisson { rate, law: LawConfig::DoubleExponential { p_up, rate_up, .. } } =
        ctx.cfg.triplet.jumps
    else {
        return Ok(None);
    };
    let (v, b) = (ctx.triplet.path_velocity()?, ctx.triplet.gaussian_b());
    if p_up < 1.0 || v + rate / rate_up <= 0.0 {
        return Ok(None);
    }
    let g = |t: f64| -v * t + b * t * t + rate * (rate_up / (rate_up + t) - 1.0);
    let mut hi = 1.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 && mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((0.5 * (lo + hi), rate_up)))
}
