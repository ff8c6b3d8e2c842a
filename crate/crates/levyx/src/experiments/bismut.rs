use anyhow::{bail, Result};
use levyx_core::algebra::{first_passage_down, first_passage_up, running_extrema, split_at_infimum};
use levyx_core::fluctuation::{local_time_at_supremum, LocalTimeMethod};
use levyx_core::Path;

use super::{agree, fraction, stream, Ctx, Est};
use crate::report::SeedRun;

/// A (G, D) pair: G of the part before the uniform time, D of the part after it.
#[derive(Clone, Copy)]
struct Pair {
    name: &'static str,
    g: fn(&Path) -> f64,
    d: fn(f64) -> f64,
    /// D ≡ 1, so no continuation is needed.
    unit_d: bool,
}

const PAIRS: [Pair; 2] = [
    Pair { name: "unit", g: |_| 1.0, d: |_| 1.0, unit_d: true },
    Pair { name: "lifetime_weighted", g: |p| 1.0 / (1.0 + p.lifetime()), d: |z| (-z).exp(), unit_d: false },
];

/// Paths killed before the lower level get D = e^{−ζ} ≤ e^{−cap}, taken as 0.
const CONTINUATION_CAP: f64 = 20.0;

/// Lifetime of X started at `start` until it first goes below `level`, if before the cap.
fn time_below(ctx: &Ctx, start: f64, level: f64, s: levyx_core::RngStream) -> Result<Option<f64>> {
    let (p, fired) = ctx.sim.path_until(start, ctx.h(), CONTINUATION_CAP, s, |q| q.value < level)?;
    Ok(if fired { first_passage_down(&p, level).map(|c| c.time) } else { None })
}

/// Ratio form of the disintegration of the excursion measure away from the infimum at a
/// uniform time, for levels x₁ = `levels[0]`, x₂ = `levels[1]` and windows of width `delta`.
///
/// Left: the excursion up to an independent exponential time is the post-infimum path
/// at that time, and the part after is X run from its end value until it goes below 0.
/// Right: û*(x)·E[G(X̂^{τx}) e^{−ατx} | creep]·E[D(X up to τ₋ₓ)], with û* from the mass of
/// the local time at the supremum while the supremum is in the window.
pub fn bismut(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    let levels = ctx.cfg.levels_or(&[0.5, 1.0]);
    if levels.len() != 2 || !(levels[0] > 0.0 && levels[1] > 0.0) {
        bail!("bismut needs two positive levels");
    }
    let delta = ctx.cfg.delta_or(0.05);
    let alpha = ctx.cfg.alpha_or(0.5);
    let cap = ctx.cfg.cap_or(30.0);
    let (h, n) = (ctx.h(), ctx.n());
    let windows = [(levels[0], levels[0] + delta), (levels[1], levels[1] + delta)];
    let mids = [levels[0] + delta / 2.0, levels[1] + delta / 2.0];
    let in_window = |v: f64, j: usize| v >= windows[j].0 && v < windows[j].1;

    // Left side: per path, G·D·1{end in window j} for each pair and window.
    let lhs = ctx.runner.map(n, |i| -> Result<Vec<[f64; 2]>> {
        let p = ctx.sim.path_exp(alpha, h, stream(seed, 1, i))?;
        let post = split_at_infimum(&p, p.lifetime())?.post;
        let e = post.end_value();
        let hit = (0..2).find(|&j| in_window(e, j));
        let mut out = vec![[0.0; 2]; PAIRS.len()];
        let Some(j) = hit else { return Ok(out) };
        let zeta = if PAIRS.iter().all(|q| q.unit_d) { None } else { time_below(ctx, e, 0.0, stream(seed, 2, i))? };
        for (k, pair) in PAIRS.iter().enumerate() {
            let d = if pair.unit_d { 1.0 } else { zeta.map_or(0.0, pair.d) };
            out[k][j] = (pair.g)(&post) * d;
        }
        Ok(out)
    });
    let lhs: Vec<Vec<[f64; 2]>> = lhs.into_iter().collect::<Result<_>>()?;

    // û*(x₁)/û*(x₂) from the local time at the supremum spent in each window.
    let top = windows[1].1.max(windows[0].1);
    let method = if ctx.triplet.has_positive_jumps() {
        LocalTimeMethod::EpsOccupation(delta / 2.0)
    } else {
        LocalTimeMethod::MinusInfimum
    };
    let ladder = ctx.runner.map(n, |i| -> Result<Option<[f64; 2]>> {
        let (p, fired) = ctx.sim.path_until(0.0, h, 100.0, stream(seed, 3, i), |q| q.value > top)?;
        if !fired {
            return Ok(None);
        }
        let lt = local_time_at_supremum(&p, &ctx.triplet, method)?;
        let (sup, _) = running_extrema(&p);
        let mut acc = [0.0; 2];
        for k in 1..lt.values.len() {
            let dl = lt.values[k] - lt.values[k - 1];
            for (j, a) in acc.iter_mut().enumerate() {
                if in_window(sup[k - 1], j) {
                    *a += dl;
                }
            }
        }
        Ok(Some(acc))
    });
    let ladder: Vec<Option<[f64; 2]>> = ladder.into_iter().collect::<Result<_>>()?;
    let ladder_excluded = fraction(ladder.iter().filter(|r| r.is_none()).count(), n);
    let ladder: Vec<[f64; 2]> = ladder.into_iter().flatten().collect();
    let u_ratio =
        Est::ratio(&ladder.iter().map(|r| r[0]).collect::<Vec<_>>(), &ladder.iter().map(|r| r[1]).collect::<Vec<_>>());

    // Creeping passages at the window midpoints: e^{−ατ}·G(X̂^τ)·1{creep}, and 1{creep}.
    let mut creep_excluded = 0.0f64;
    let mut c_est = vec![[Est { value: 1.0, se: 0.0 }; 2]; PAIRS.len()];
    let mut d_est = vec![[Est { value: 1.0, se: 0.0 }; 2]; PAIRS.len()];
    for (j, &x) in mids.iter().enumerate() {
        let tag = 4 + j as u16;
        let rows = ctx.runner.map(n, |i| -> Result<Option<(f64, bool, Path)>> {
            let (p, fired) = ctx.sim.path_until(0.0, h, cap, stream(seed, tag, i), |q| q.value > x)?;
            if !fired {
                return Ok(None);
            }
            let Some(c) = first_passage_up(&p, x) else { return Ok(None) };
            let rev = levyx_core::algebra::reverse_at(&p, c.time)?;
            Ok(Some((c.time, !c.by_jump(), rev)))
        });
        let rows: Vec<Option<(f64, bool, Path)>> = rows.into_iter().collect::<Result<_>>()?;
        creep_excluded = creep_excluded.max(fraction(rows.iter().filter(|r| r.is_none()).count(), n));
        // Capped paths have e^{−ατ} below e^{−α·cap} and count as 0 in the numerator;
        // the creeping probability is taken over resolved paths.
        let p_creep = Est::mean(rows.iter().flatten().map(|r| if r.1 { 1.0 } else { 0.0 }));
        for (k, pair) in PAIRS.iter().enumerate() {
            let num = Est::mean(rows.iter().map(|r| match r {
                Some((t, true, rev)) => (-alpha * t).exp() * (pair.g)(rev),
                _ => 0.0,
            }));
            c_est[k][j] = Est::combine(&[(num, 1), (p_creep, -1)]);
        }
        let dtag = 6 + j as u16;
        let times = ctx.runner.map(n, |i| time_below(ctx, 0.0, -x, stream(seed, dtag, i)));
        let times: Vec<Option<f64>> = times.into_iter().collect::<Result<_>>()?;
        for (k, pair) in PAIRS.iter().enumerate() {
            if !pair.unit_d {
                d_est[k][j] = Est::mean(times.iter().map(|t| t.map_or(0.0, pair.d)));
            }
        }
    }

    let mut run = SeedRun::new(seed, vec![h]);
    run.exclusion("ladder_cap", ladder_excluded);
    run.exclusion("passage_cap", creep_excluded);
    run.size("post_infimum_paths", n);
    run.size("ladder_paths", ladder.len());
    run.estimate("u_star_ratio", u_ratio.value);
    let mut rows = Vec::new();
    for (k, pair) in PAIRS.iter().enumerate() {
        let a: Vec<f64> = lhs.iter().map(|r| r[k][0]).collect();
        let b: Vec<f64> = lhs.iter().map(|r| r[k][1]).collect();
        let hits = a.iter().filter(|v| **v != 0.0).count().min(b.iter().filter(|v| **v != 0.0).count());
        let left = Est::ratio(&a, &b);
        let mut parts = vec![(u_ratio, 1), (c_est[k][0], 1), (c_est[k][1], -1)];
        if !pair.unit_d {
            parts.extend([(d_est[k][0], 1), (d_est[k][1], -1)]);
        }
        let right = Est::combine(&parts);
        run.estimate(&format!("lhs_ratio_{}", pair.name), left.value);
        run.estimate(&format!("rhs_ratio_{}", pair.name), right.value);
        rows.push(vec![left.value, left.se, right.value, right.se]);
        run.check(
            agree(&format!("ratio_{}", pair.name), left, right)
                .inconclusive_if(hits < 100, "fewer than 100 endpoints in a window")
                .inconclusive_if(
                    ladder_excluded.max(creep_excluded) >= 0.05 && ctx.triplet.jump_rate() > 0.0,
                    "cap reached on 5% of paths or more",
                ),
        );
    }
    run.dump("ratios", &["lhs", "lhs_se", "rhs", "rhs_se"], rows);
    Ok(run)
}
