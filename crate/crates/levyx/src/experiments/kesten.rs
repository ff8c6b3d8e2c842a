use anyhow::{bail, Result};
use levyx_core::algebra::running_extrema;
use levyx_core::fluctuation::{creeped_levels, creeps_at, local_time_at_supremum, LocalTimeMethod};
use levyx_core::stats::MeanAcc;

use super::{agree, fraction, stream, Ctx, Est};
use crate::report::{CheckResult, SeedRun, Statistic};

/// Per-path pieces of the ladder estimates.
struct LadderPieces {
    creep: f64,
    local_time: f64,
    /// L* accumulated while the supremum lies in each window.
    windows: Vec<f64>,
}

/// L* = (b/ε)·Leb{S − X < ε}, d̂* = Σ creeped length / Σ L*, û* by windows of L*
/// mass. The product d̂*·û*(x) does not depend on the normalization of L*.
fn ladder_pieces(ctx: &Ctx, path: &levyx_core::Path, eps: f64, windows: &[(f64, f64)]) -> Result<LadderPieces> {
    let lt = local_time_at_supremum(path, &ctx.triplet, LocalTimeMethod::EpsOccupation(eps))?;
    let (sup, _) = running_extrema(path);
    let mut acc = vec![0.0; windows.len()];
    for k in 1..lt.values.len() {
        let dl = lt.values[k] - lt.values[k - 1];
        if dl > 0.0 {
            for (a, &(lo, hi)) in acc.iter_mut().zip(windows) {
                if sup[k - 1] >= lo && sup[k - 1] < hi {
                    *a += dl;
                }
            }
        }
    }
    let creep = creeped_levels(path).iter().map(|(a, b)| b - a).sum();
    Ok(LadderPieces { creep, local_time: lt.total(), windows: acc })
}

/// (d̂*·û*) on each window, with delta-method standard errors.
fn product_estimates(pieces: &[LadderPieces], width: &[f64]) -> Vec<Est> {
    let n = pieces.len() as f64;
    let mc = pieces.iter().map(|p| p.creep).sum::<f64>() / n;
    let ml = pieces.iter().map(|p| p.local_time).sum::<f64>() / n;
    let r = mc / ml;
    (0..width.len())
        .map(|j| {
            let ma = pieces.iter().map(|p| p.windows[j]).sum::<f64>() / n / width[j];
            let infl: MeanAcc = pieces
                .iter()
                .map(|p| ma * (p.creep - r * p.local_time) / ml + r * (p.windows[j] / width[j] - ma))
                .collect();
            Est { value: r * ma, se: infl.se() }
        })
        .collect()
}

/// −ζ(1/2)/√(2π): mean lag of a grid-monitored Brownian maximum, in units of σ√h.
const MONITORING_LAG: f64 = 0.5826;

pub fn kesten(ctx: &Ctx, seed: u64) -> Result<SeedRun> {
    if ctx.triplet.gaussian_b() <= 0.0 {
        bail!("kesten needs a Gaussian component");
    }
    let levels = ctx.cfg.levels_or(&[0.5, 1.0]);
    let w = ctx.cfg.delta_or(0.1);
    let eps = w / 2.0;
    let top = levels.iter().cloned().fold(0.0, f64::max) + 0.5;
    let cap = ctx.cfg.cap_or(100.0);
    let h = ctx.h();
    let n = ctx.n();
    let mut windows: Vec<(f64, f64)> = vec![(0.0, w / 2.0)];
    windows.extend(levels.iter().map(|&x| (x - w / 2.0, x + w / 2.0)));
    let mut widths: Vec<f64> = windows.iter().map(|(a, b)| b - a).collect();
    // The grid supremum sits at exactly 0 until the path first exceeds 0 on the grid,
    // so the first window also holds the levels [0, lag) of the continuous supremum.
    // Interior windows are only shifted by the lag.
    widths[0] += MONITORING_LAG * (2.0 * ctx.triplet.effective_gaussian_b() * h).sqrt();
    let rows = ctx.runner.map(n, |i| -> Result<Option<(LadderPieces, Vec<bool>)>> {
        let (p, fired) = ctx.sim.path_until(0.0, h, cap, stream(seed, 1, i), |q| q.value > top)?;
        if !fired {
            return Ok(None);
        }
        let creeps = levels.iter().map(|&x| creeps_at(&p, x, 0.0).unwrap_or(false)).collect();
        Ok(Some((ladder_pieces(ctx, &p, eps, &windows)?, creeps)))
    });
    let rows: Vec<Option<(LadderPieces, Vec<bool>)>> = rows.into_iter().collect::<Result<_>>()?;
    let kept: Vec<(LadderPieces, Vec<bool>)> = rows.into_iter().flatten().collect();
    let excluded = fraction(n - kept.len(), n);
    let mut run = SeedRun::new(seed, vec![h]);
    run.exclusion("cap_before_top_level", excluded);
    run.size("paths", kept.len());
    let inconclusive = excluded >= 0.05;
    let (pieces, creeps): (Vec<LadderPieces>, Vec<Vec<bool>>) = kept.into_iter().unzip();
    let products = product_estimates(&pieces, &widths);
    let total_creep: f64 = pieces.iter().map(|p| p.creep).sum();
    let total_lt: f64 = pieces.iter().map(|p| p.local_time).sum();
    run.estimate("d_star_hat", total_creep / total_lt);
    for (j, &x) in levels.iter().enumerate() {
        let p = Est::mean(creeps.iter().map(|c| if c[j] { 1.0 } else { 0.0 }));
        run.estimate(&format!("creep_probability_{x}"), p.value);
        run.estimate(&format!("d_u_star_{x}"), products[j + 1].value);
        run.check(
            agree(&format!("kesten_x_{x}"), p, products[j + 1])
                .inconclusive_if(inconclusive, "cap reached on 5% of paths or more"),
        );
    }
    run.estimate("d_u_star_0", products[0].value);
    run.check(
        CheckResult::new("u_star_0_times_d_star", Statistic::Interval { value: products[0].value, lo: 0.9, hi: 1.1 })
            .inconclusive_if(inconclusive, "cap reached on 5% of paths or more"),
    );
    let mut cols = vec!["creep_length".to_string(), "local_time".to_string()];
    cols.extend(windows.iter().map(|(a, b)| format!("lt_sup_in_{a}_{b}")));
    cols.extend(levels.iter().map(|x| format!("creeps_{x}")));
    let cols: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
    let rows = pieces
        .iter()
        .zip(&creeps)
        .map(|(p, c)| {
            let mut r = vec![p.creep, p.local_time];
            r.extend(&p.windows);
            r.extend(c.iter().map(|&b| if b { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    run.dump("ladder", &cols, rows);
    Ok(run)
}
