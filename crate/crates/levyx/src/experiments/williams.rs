use anyhow::{bail, Result};
use levyx_core::algebra::{
    concat, extremum_times, first_passage_down, first_passage_up, reverse_at, shift, split_at_infimum, stop_at,
    stop_before,
};
use levyx_core::conditioned::{
    bessel3_to_first_passage, bessel3_to_last_passage, build_conditioned, passage_functionals, Direction,
    LocalTimeAtZero,
};
use levyx_core::math::{bessel3_hitting_cdf, brownian_strip_exit_below};
use levyx_core::stats::{correlation, ks_two_sample};
use levyx_core::{Path, Point};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{agree, fraction, ks, ks_cdf, stream, Ctx, Est};
use crate::functional::FunctionalSpec;
use crate::report::{CheckResult, SeedRun, Statistic};

fn scaled(p: &Path, s: f64) -> Path {
    let pts = p.points().iter().map(|q| Point { time: q.time, value: s * q.value, jump: s * q.jump }).collect();
    Path::from_points(p.grid_step(), pts)
}

fn column(rows: &[[f64; 2]], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

/// Brownian triplets: X reversed at τ_x against Bessel(3) up to its last passage at x,
/// both with lifetime at most `cap`. Triplets with positive jumps: the creeping
/// probabilities of X at τ_x and of X↑ at σ↑_x, and the creep and jump branches of the
/// reversal at σ↑_x.
pub fn williams1(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    if ctx.triplet.jump_rate() == 0.0 {
        williams1_brownian(ctx, seed)
    } else {
        williams1_jumps(ctx, seed)
    }
}

fn williams1_brownian(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    if ctx.triplet.path_velocity()? != 0.0 {
        bail!("williams1 without jumps needs a driftless Brownian triplet");
    }
    let x = ctx.cfg.x_or(1.0);
    let cap = ctx.cfg.cap_or(10.0);
    let (h, n) = (ctx.h(), ctx.n());
    let s = (2.0 * ctx.triplet.gaussian_b()).sqrt();
    let half = FunctionalSpec::ValueAtFraction(0.5);
    let lhs = ctx.runner.map(n, |i| -> Result<Option<[f64; 2]>> {
        let (p, _) = ctx.sim.path_until(0.0, h, cap, stream(seed, 1, i), |q| q.value > x)?;
        let Some(c) = first_passage_up(&p, x) else { return Ok(None) };
        if c.time > cap {
            return Ok(None);
        }
        let rev = reverse_at(&p, c.time)?;
        Ok(Some([half.eval(&rev), rev.lifetime()]))
    });
    let lhs: Vec<Option<[f64; 2]>> = lhs.into_iter().collect::<Result<_>>()?;
    let rhs = ctx.runner.map(n, |i| {
        bessel3_to_last_passage(x / s, h, cap, stream(seed, 2, i)).map(|p| {
            let p = scaled(&p, s);
            [half.eval(&p), p.lifetime()]
        })
    });
    let mut run = SeedRun::new(seed, vec![h]);
    let (l, r): (Vec<[f64; 2]>, Vec<[f64; 2]>) =
        (lhs.into_iter().flatten().collect(), rhs.into_iter().flatten().collect());
    // Lifetimes above the cap are conditioned away on both sides.
    run.estimate("lhs_lifetime_above_cap", fraction(n - l.len(), n));
    run.estimate("rhs_lifetime_above_cap", fraction(n - r.len(), n));
    run.size("reversed_at_tau", l.len());
    run.size("bessel3_to_last_passage", r.len());
    run.check(ks("ks_value_at_0.5", &column(&l, 0), &column(&r, 0)));
    run.check(ks("ks_lifetime", &column(&l, 1), &column(&r, 1)));
    run.dump("reversed_at_tau", &["value_at_0.5", "lifetime"], l.iter().map(|v| v.to_vec()).collect());
    run.dump("bessel3_last_passage", &["value_at_0.5", "lifetime"], r.iter().map(|v| v.to_vec()).collect());
    Ok(run)
}

/// X↑ must end this far above x before σ↑_x is taken as known.
const RESOLVE_MARGIN: f64 = 8.0;

/// Branch at σ↑, X↑ at 0.5, and on a jump [σ↑, lifetime of ←Y, →Y at 0.5].
type UpDraw = Option<(Branch, f64, Option<[f64; 3]>)>;

#[derive(Clone, Copy)]
enum Branch {
    Creep([f64; 2]),
    Jump([f64; 2]),
}

fn williams1_jumps(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let x = ctx.cfg.x_or(0.5);
    let cap = ctx.cfg.cap_or(200.0);
    let (h, n) = (ctx.h(), ctx.n());
    let half = FunctionalSpec::ValueAtFraction(0.5);
    let top = x + RESOLVE_MARGIN + 0.5;
    // X↑ side: (X↑ stopped at σ↑ on creep) or (σ↑, X↑_σ↑) on a jump. Also X↑ at 0.5 and,
    // on a jump, [σ↑, lifetime of ←Y, →Y at 0.5] for Y = X↑∘θ_σ↑.
    let up = ctx.runner.map(n, |i| -> Result<UpDraw> {
        let (p, fired) = ctx.sim.path_until(0.0, h, cap, stream(seed, 1, i), |q| q.value > top)?;
        if !fired {
            return Ok(None);
        }
        let cp = build_conditioned(&p, LocalTimeAtZero::Tanaka, Direction::Up);
        let pf = passage_functionals(&cp, x, RESOLVE_MARGIN);
        let Some(sigma) = pf.sigma_up else { return Ok(None) };
        let at_half = cp.base.value_at(0.5);
        Ok(Some(if sigma.by_jump() {
            let y = shift(&cp.base, sigma.time)?;
            let sp = split_at_infimum(&y, y.lifetime())?;
            let post = sp.post.value_at(sp.post.lifetime().min(0.5));
            (Branch::Jump([sigma.time, sigma.value]), at_half, Some([sigma.time, sp.split_time, post]))
        } else {
            let stopped = stop_at(&cp.base, sigma.time)?;
            (Branch::Creep([stopped.lifetime(), half.eval(&stopped)]), at_half, None)
        }))
    });
    let up: Vec<UpDraw> = up.into_iter().collect::<Result<_>>()?;
    let x_up_half: Vec<f64> = up.iter().flatten().map(|u| u.1).collect();
    let y_split: Vec<[f64; 3]> = up.iter().flatten().filter_map(|u| u.2).collect();
    let up: Vec<Option<Branch>> = up.iter().map(|u| u.map(|u| u.0)).collect();
    // X side: X̂^τ on creep, or (ḡ_τ, ΔX_τ + S_τ−) on a jump.
    let direct = ctx.runner.map(n, |i| -> Result<Option<Branch>> {
        let (p, _) = ctx.sim.path_until(0.0, h, cap, stream(seed, 2, i), |q| q.value > x)?;
        let Some(c) = first_passage_up(&p, x) else { return Ok(None) };
        Ok(Some(if c.by_jump() {
            let (_, g) = extremum_times(&p, c.time)?;
            Branch::Jump([g, c.jump() + stop_before(&p, c.time)?.sup()])
        } else {
            let rev = reverse_at(&p, c.time)?;
            Branch::Creep([rev.lifetime(), half.eval(&rev)])
        }))
    });
    let direct: Vec<Option<Branch>> = direct.into_iter().collect::<Result<_>>()?;

    let split = |v: &[Option<Branch>]| {
        let (mut creep, mut jump) = (Vec::new(), Vec::new());
        for b in v.iter().flatten() {
            match b {
                Branch::Creep(r) => creep.push(*r),
                Branch::Jump(r) => jump.push(*r),
            }
        }
        (creep, jump)
    };
    let (up_creep, up_jump) = split(&up);
    let (x_creep, x_jump) = split(&direct);
    let up_excluded = fraction(up.iter().filter(|b| b.is_none()).count(), n);
    let x_excluded = fraction(direct.iter().filter(|b| b.is_none()).count(), n);
    let mut run = SeedRun::new(seed, vec![h]);
    run.exclusion("unresolved_sigma_up", up_excluded);
    run.exclusion("no_passage_before_cap", x_excluded);
    run.size("x_up_creep", up_creep.len());
    run.size("x_up_jump", up_jump.len());
    run.size("x_creep", x_creep.len());
    run.size("x_jump", x_jump.len());
    let bad = up_excluded.max(x_excluded) >= 0.05;
    let reason = "unresolved on 5% of paths or more";
    let p = |c: usize, j: usize| Est::mean((0..c + j).map(|k| if k < c { 1.0 } else { 0.0 }));
    run.check(
        agree("creep_probability", p(up_creep.len(), up_jump.len()), p(x_creep.len(), x_jump.len()))
            .inconclusive_if(bad, reason),
    );
    run.check(ks("creep_branch_lifetime", &column(&up_creep, 0), &column(&x_creep, 0)).inconclusive_if(bad, reason));
    run.check(
        ks("creep_branch_value_at_0.5", &column(&up_creep, 1), &column(&x_creep, 1)).inconclusive_if(bad, reason),
    );
    run.check(ks("jump_branch_lifetime", &column(&up_jump, 0), &column(&x_jump, 0)).inconclusive_if(bad, reason));
    run.check(ks("jump_branch_endpoint", &column(&up_jump, 1), &column(&x_jump, 1)).inconclusive_if(bad, reason));
    // On a jump at σ↑, the post-infimum part of Y is a copy of X↑ independent of the
    // path up to σ↑ and of the pre-infimum part of Y.
    let ycol = |k: usize| y_split.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let bounded = |k: usize| ycol(k).iter().map(|v| 1.0 - (-v).exp()).collect::<Vec<f64>>();
    run.size("y_post_infimum", y_split.len());
    run.check(ks("y_post_infimum_value_at_0.5", &ycol(2), &x_up_half).inconclusive_if(bad, reason));
    let bound = 3.0 / (y_split.len() as f64).sqrt();
    for (name, k) in [("independence_y_post_vs_sigma", 0), ("independence_y_post_vs_y_pre", 1)] {
        let value = correlation(&bounded(2), &bounded(k));
        run.check(
            CheckResult::new(name, Statistic::Correlation { value, n: y_split.len(), bound })
                .inconclusive_if(bad, reason),
        );
    }
    run.dump("x_up_creep", &["lifetime", "value_at_0.5"], up_creep.iter().map(|v| v.to_vec()).collect());
    run.dump("x_creep", &["lifetime", "value_at_0.5"], x_creep.iter().map(|v| v.to_vec()).collect());
    run.dump("x_up_jump", &["lifetime", "endpoint"], up_jump.iter().map(|v| v.to_vec()).collect());
    run.dump("x_jump", &["lifetime", "endpoint"], x_jump.iter().map(|v| v.to_vec()).collect());
    Ok(run)
}

/// Shortest lifetime for which the excursion reweighting is exact.
const MIN_LIFETIME: f64 = 0.25;

/// Brownian excursions with maximum in [x, x + δ], sampled from the post-infimum path at
/// an exponential time, completed to their end and reweighted by 1/(1 − e^{−αζ}) through
/// rejection. The pre-maximum part is tested against Bessel(3) run to its first passage
/// at a level drawn from the law of the maximum in the band, and for independence from
/// the post-maximum part. Also Z, Bessel(3) started at x: its infimum is uniform on
/// [0, x], and it splits there into Brownian motion run down to the infimum and an
/// independent copy of X↑.
pub fn williams2(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    if ctx.triplet.jump_rate() > 0.0 || ctx.triplet.path_velocity()? != 0.0 {
        bail!("williams2 is implemented for driftless Brownian triplets");
    }
    let alpha = ctx.cfg.alpha_or(1.0);
    let x = ctx.cfg.x_or(1.0);
    let delta = ctx.cfg.delta_or(0.05);
    let cap = ctx.cfg.cap_or(50.0);
    let top = x + delta;
    let (h, n) = (ctx.h(), ctx.n());
    let s = (2.0 * ctx.triplet.gaussian_b()).sqrt();
    let w_max = 1.0 / (1.0 - (-alpha * MIN_LIFETIME).exp());
    let half = FunctionalSpec::ValueAtFraction(0.5);

    enum Draw {
        Outside,
        Capped,
        Rejected,
        Kept([f64; 5], bool),
    }
    let draws = ctx.runner.map(n, |i| -> Result<Draw> {
        let p = ctx.sim.path_exp(alpha, h, stream(seed, 1, i))?;
        let t = p.lifetime();
        let head = split_at_infimum(&p, t)?.post;
        let e = head.end_value();
        if head.sup() > top || e <= 0.0 {
            return Ok(Draw::Outside);
        }
        let (q, fired) = ctx.sim.path_until(e, h, cap, stream(seed, 2, i), |r| r.value <= 0.0 || r.value > top)?;
        if !fired {
            return Ok(Draw::Capped);
        }
        let Some(c) = first_passage_down(&q, 0.0) else { return Ok(Draw::Outside) };
        let q0 = stop_at(&q, c.time)?;
        if q0.sup() > top {
            return Ok(Draw::Outside);
        }
        let omega = concat(&head, &q0.offset(-e));
        let m = omega.sup();
        if m < x {
            return Ok(Draw::Outside);
        }
        let zeta = omega.lifetime();
        let w = 1.0 / (1.0 - (-alpha * zeta).exp());
        let u: f64 = stream(seed, 3, i).rng().random();
        if u * w_max > w {
            return Ok(Draw::Rejected);
        }
        let (_, g) = extremum_times(&omega, zeta)?;
        let pre = stop_at(&omega, g)?;
        let post = stop_at(&shift(&omega, g)?, zeta - g)?;
        Ok(Draw::Kept([half.eval(&pre), g, half.eval(&post), zeta - g, m], zeta < MIN_LIFETIME))
    });
    let draws: Vec<Draw> = draws.into_iter().collect::<Result<_>>()?;
    let mut kept = Vec::new();
    let (mut capped, mut rejected, mut short) = (0usize, 0usize, 0usize);
    for d in &draws {
        match d {
            Draw::Kept(r, sh) => {
                kept.push(*r);
                short += *sh as usize;
            }
            Draw::Capped => capped += 1,
            Draw::Rejected => rejected += 1,
            Draw::Outside => {}
        }
    }
    let in_band = kept.len() + rejected;
    if fraction(in_band, n) < 1e-3 {
        bail!("band acceptance {} below 1e-3", fraction(in_band, n));
    }

    // Oracle: Bessel(3) to its first passage at y, y with density ∝ y⁻² on [x, hi].
    let bessel = |hi: f64, size: usize, tag: u16| -> Vec<[f64; 2]> {
        let paths = ctx.runner.map(size, |i| {
            let v: f64 = stream(seed, tag, i).rng().random();
            let y = 1.0 / (1.0 / x - v * (1.0 / x - 1.0 / hi));
            bessel3_to_first_passage(y / s, h, cap, stream(seed, tag + 1, i)).map(|p| {
                let p = scaled(&p, s);
                [half.eval(&p), p.lifetime()]
            })
        });
        paths.into_iter().flatten().collect()
    };
    let oracle = bessel(top, kept.len().max(500), 4);

    let mut run = SeedRun::new(seed, vec![h]);
    run.exclusion("continuation_cap", fraction(capped, in_band + capped));
    run.size("excursion_draws", n);
    run.size("in_band", in_band);
    run.size("kept_after_reweighting", kept.len());
    run.size("shorter_than_min_lifetime", short);
    run.size("bessel3_reference", oracle.len());
    let col = |k: usize| kept.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let few = kept.len() < 200;
    run.check(
        ks("pre_max_value_at_0.5", &col(0), &oracle.iter().map(|r| r[0]).collect::<Vec<_>>())
            .inconclusive_if(few, "fewer than 200 excursions in the band"),
    );
    run.check(
        ks("pre_max_lifetime", &col(1), &oracle.iter().map(|r| r[1]).collect::<Vec<_>>())
            .inconclusive_if(few, "fewer than 200 excursions in the band"),
    );
    let bound = 3.0 / (kept.len() as f64).sqrt();
    for (name, a, b) in [("independence_lifetimes", 1, 3), ("independence_midvalues", 0, 2)] {
        run.check(
            CheckResult::new(
                name,
                Statistic::Correlation { value: correlation(&col(a), &col(b)), n: kept.len(), bound },
            )
            .inconclusive_if(few, "fewer than 200 excursions in the band"),
        );
    }

    // The same statistic on the half-width band, to see whether δ is small enough.
    let narrow: Vec<f64> = kept.iter().filter(|r| r[4] < x + delta / 2.0).map(|r| r[0]).collect();
    let narrow_oracle: Vec<f64> = bessel(x + delta / 2.0, narrow.len().max(500), 8).iter().map(|r| r[0]).collect();
    run.size("kept_half_delta", narrow.len());
    run.estimate(
        "ks_distance_value_at_0.5_delta",
        ks_two_sample(&col(0), &oracle.iter().map(|r| r[0]).collect::<Vec<_>>()).statistic,
    );
    run.estimate("ks_distance_value_at_0.5_half_delta", ks_two_sample(&narrow, &narrow_oracle).statistic);

    // Z, Bessel(3) from x: 3-d Brownian motion from (x/s, 0, 0) with steps of 5e-3·r in
    // each coordinate until the radius exceeds R = 4x/s. From radius R the future
    // infimum is R·U with U uniform, since P(hit y before ∞) = y/R. When R·U is above the
    // infimum so far, the split at the infimum is already known: the pre-infimum time and
    // the time the post-infimum part takes to climb x are recorded.
    let n_inf = (n / 50).clamp(500, 4000);
    let zs = ctx.runner.map(n_inf, |i| {
        let mut rng = stream(seed, 6, i).rng();
        let mut v = [x / s, 0.0, 0.0];
        let (mut t, mut r) = (0.0, x / s);
        let mut walk = vec![(t, r)];
        while r < 4.0 * x / s {
            let sd = 5e-3 * r;
            for c in &mut v {
                let z: f64 = StandardNormal.sample(&mut rng);
                *c += sd * z;
            }
            t += sd * sd;
            r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            walk.push((t, r));
        }
        let k = walk.iter().enumerate().fold(0, |k, (j, w)| if w.1 <= walk[k].1 { j } else { k });
        let (g, m) = walk[k];
        let u: f64 = rng.random();
        let inf = s * m.min(r * u);
        let split = (r * u >= m).then(|| {
            let climb = walk[k..].iter().find(|w| w.1 >= m + x / s).map_or(t, |w| w.0) - g;
            [s * m, g, climb]
        });
        (inf, split)
    });
    let infs: Vec<f64> = zs.iter().map(|z| z.0).collect();
    let splits: Vec<[f64; 3]> = zs.iter().filter_map(|z| z.1).collect();
    run.size("bessel3_infimum_paths", n_inf);
    run.check(ks_cdf("bessel3_from_x_infimum_uniform", &infs, |y| (y / x).clamp(0.0, 1.0)));
    run.estimate("z_infimum_beyond_radius", fraction(n_inf - splits.len(), n_inf));
    // Pre-infimum part: Brownian motion from x run to its first passage at m. Keeping only
    // splits known by radius R conditions it to reach m before R, so each pre-infimum
    // time is mapped through the CDF of that strip exit, which should leave it uniform.
    let big = 4.0 * x / s;
    let pit: Vec<f64> = splits
        .iter()
        .map(|z| {
            let (a, width) = ((x - z[0]) / s, big - z[0] / s);
            brownian_strip_exit_below(a, width, z[1]) / (1.0 - a / width)
        })
        .collect();
    let zcol = |k: usize| splits.iter().map(|z| z[k]).collect::<Vec<f64>>();
    run.check(ks_cdf("z_pre_infimum_lifetime", &pit, |u| u.clamp(0.0, 1.0)));
    // Post-infimum part: X↑ from 0, whose passage time at x has the Bessel(3) law.
    run.check(ks_cdf("z_post_infimum_climb_time", &zcol(2), |t| bessel3_hitting_cdf(x / s, t)));
    let bounded = |k: usize| zcol(k).iter().map(|t| 1.0 - (-t).exp()).collect::<Vec<f64>>();
    run.check(CheckResult::new(
        "z_independence_pre_post",
        Statistic::Correlation {
            value: correlation(&bounded(1), &bounded(2)),
            n: splits.len(),
            bound: 3.0 / (splits.len() as f64).sqrt(),
        },
    ));

    run.dump(
        "excursions",
        &["pre_value_at_0.5", "pre_lifetime", "post_value_at_0.5", "post_lifetime", "max"],
        kept.iter().map(|r| r.to_vec()).collect(),
    );
    run.dump("bessel3_first_passage", &["value_at_0.5", "lifetime"], oracle.iter().map(|r| r.to_vec()).collect());
    Ok(run)
}
