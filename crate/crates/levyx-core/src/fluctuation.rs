//! Excursions away from the running extrema, local times, ladder processes and the
//! estimators built on them.

use alloc::vec::Vec;

use crate::algebra;
use crate::levy::LevyTriplet;
use crate::path::{Path, Point};
use crate::stats::MeanAcc;

#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionRecord {
    /// g_i.
    pub start_time: f64,
    /// Local time at g_i (continuous part of the decrease of the running extremum).
    pub local_time_coord: f64,
    /// ω^i, re-anchored at the extremum it leaves from.
    pub segment: Path,
    pub lifetime: f64,
    /// Δω(ζ), 0 when the excursion ends continuously.
    pub terminal_jump: f64,
    /// ω_ζ.
    pub end_value: f64,
    pub sup: f64,
    pub inf: f64,
    /// False for the excursion still in progress at the end of the path.
    pub complete: bool,
}

struct Open {
    start: f64,
    anchor: f64,
    lt: f64,
    points: Vec<Point>,
    sup: f64,
    inf: f64,
}

impl Open {
    fn push(&mut self, p: Point, keep: bool) {
        self.sup = self.sup.max(p.value).max(p.left());
        self.inf = self.inf.min(p.value).min(p.left());
        if !keep && self.points.len() > 1 {
            self.points.truncate(1);
        }
        let n = self.points.len();
        let last = &mut self.points[n - 1];
        if last.time >= p.time {
            last.value = p.value;
            if n > 1 {
                last.jump += p.jump;
            }
        } else {
            self.points.push(p);
        }
    }

    fn close(self, grid_step: f64, end: f64, complete: bool) -> ExcursionRecord {
        let last = *self.points.last().expect("open excursion has a start point");
        let points = self.points;
        ExcursionRecord {
            start_time: self.start,
            local_time_coord: self.lt,
            segment: Path::from_points(grid_step, points),
            lifetime: end - self.start,
            terminal_jump: if complete { last.jump } else { 0.0 },
            end_value: last.value,
            sup: self.sup,
            inf: self.inf,
            complete,
        }
    }
}

/// Excursions of X − I. Segments are kept when `keep_segments`; otherwise each record
/// holds a two-point stand-in with the right end value.
pub fn excursion_records(path: &Path, keep_segments: bool) -> Vec<ExcursionRecord> {
    let pts = path.points();
    let h = path.grid_step();
    let mut out = Vec::new();
    let mut inf = pts[0].value;
    let mut creep = 0.0;
    let mut open: Option<Open> = None;
    let start_at = |t: f64, anchor: f64, lt: f64| Open {
        start: t,
        anchor,
        lt,
        points: alloc::vec![Point { time: 0.0, value: 0.0, jump: 0.0 }],
        sup: 0.0,
        inf: 0.0,
    };
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (t0, t1, a, b) = (p.time, q.time, p.value, q.left());
        if open.is_none() {
            if b > a {
                open = Some(start_at(t0, inf, creep));
            } else {
                creep += inf - b.min(inf);
                inf = inf.min(b);
            }
        }
        if let Some(mut e) = open.take() {
            if b > e.anchor {
                e.push(Point { time: t1 - e.start, value: q.value - e.anchor, jump: q.jump }, keep_segments);
                if q.value < e.anchor {
                    out.push(e.close(h, t1, true));
                    inf = q.value;
                } else {
                    open = Some(e);
                }
                continue;
            }
            // Continuous return to the infimum inside the piece.
            let tc = (t0 + (e.anchor - a) / (b - a) * (t1 - t0)).clamp(t0, t1);
            e.push(Point { time: tc - e.start, value: 0.0, jump: 0.0 }, keep_segments);
            out.push(e.close(h, tc, true));
            creep += inf - b;
            inf = b;
        }
        // Jump at q while sitting at the infimum.
        if q.jump < 0.0 {
            inf = inf.min(q.value);
        } else if q.jump > 0.0 {
            let mut e = start_at(t1, inf, creep);
            e.points[0].value = q.value - inf;
            e.sup = q.value - inf;
            open = Some(e);
        }
    }
    if let Some(e) = open {
        out.push(e.close(h, path.lifetime(), false));
    }
    out
}

/// Excursions of X − I with their segments.
pub fn excursions_above_infimum(path: &Path) -> Vec<ExcursionRecord> {
    excursion_records(path, true)
}

/// Excursions of S − X: ω^j(s) = X_{(g+s)∧d} − X_g, ending either continuously at 0 or
/// with a positive overshoot jump.
pub fn excursions_below_supremum(path: &Path) -> Vec<ExcursionRecord> {
    excursion_records(&path.negate(), true).into_iter().map(negate_record).collect()
}

pub(crate) fn negate_record(r: ExcursionRecord) -> ExcursionRecord {
    ExcursionRecord {
        segment: r.segment.negate(),
        terminal_jump: -r.terminal_jump,
        end_value: -r.end_value,
        sup: -r.inf,
        inf: -r.sup,
        ..r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalTimeMethod {
    /// L = −I; valid without negative jumps.
    MinusInfimum,
    /// Continuous part of the decrease of I; needs a Gaussian component.
    CreepingInfimum,
    /// c(ε) · #{completed excursions with lifetime > ε}, c(ε) = √(π b ε).
    EpsExcursionCount(f64),
    /// (b/ε) · Leb{s ≤ t : X_s − I_s < ε}.
    EpsOccupation(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeEstimate {
    pub method: LocalTimeMethod,
    /// Values at the points of the path.
    pub values: Vec<f64>,
    pub normalization_constant: f64,
}

impl LocalTimeEstimate {
    pub fn total(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LocalTimeError {
    #[error("L = -I needs a process without jumps towards the extremum")]
    JumpsTowardExtremum,
    #[error("this estimator needs a Gaussian component")]
    NoGaussian,
    #[error("epsilon must be positive")]
    Epsilon,
}

/// Local time at the infimum. `b` is the Gaussian coefficient of the simulated process
/// and `down_jumps` whether it jumps downwards.
fn local_time_min(
    path: &Path,
    b: f64,
    down_jumps: bool,
    method: LocalTimeMethod,
) -> Result<LocalTimeEstimate, LocalTimeError> {
    let pts = path.points();
    let needs_gauss = !matches!(method, LocalTimeMethod::MinusInfimum);
    if needs_gauss && b <= 0.0 {
        return Err(LocalTimeError::NoGaussian);
    }
    let (values, c) = match method {
        LocalTimeMethod::MinusInfimum => {
            if down_jumps {
                return Err(LocalTimeError::JumpsTowardExtremum);
            }
            let (_, inf) = algebra::running_extrema(path);
            (inf.iter().map(|i| pts[0].value - i).collect(), 1.0)
        }
        LocalTimeMethod::CreepingInfimum => (creeping_infimum(path), 1.0),
        LocalTimeMethod::EpsOccupation(eps) => {
            if !(eps > 0.0) {
                return Err(LocalTimeError::Epsilon);
            }
            let c = b / eps;
            (occupation_near_infimum(path, eps).into_iter().map(|v| c * v).collect(), c)
        }
        LocalTimeMethod::EpsExcursionCount(eps) => {
            if !(eps > 0.0) {
                return Err(LocalTimeError::Epsilon);
            }
            let c = libm::sqrt(core::f64::consts::PI * b * eps);
            let mut ends: Vec<f64> = excursion_records(path, false)
                .iter()
                .filter(|e| e.complete && e.lifetime > eps)
                .map(|e| e.start_time + e.lifetime)
                .collect();
            ends.sort_by(f64::total_cmp);
            let values = pts.iter().map(|p| c * ends.partition_point(|&d| d <= p.time) as f64).collect();
            (values, c)
        }
    };
    Ok(LocalTimeEstimate { method, values, normalization_constant: c })
}

fn creeping_infimum(path: &Path) -> Vec<f64> {
    let pts = path.points();
    let mut inf = pts[0].value;
    let mut creep = 0.0;
    let mut out = Vec::with_capacity(pts.len());
    out.push(0.0);
    for q in &pts[1..] {
        let l = q.left();
        if l < inf {
            creep += inf - l;
            inf = l;
        }
        inf = inf.min(q.value);
        out.push(creep);
    }
    out
}

/// Cumulative Leb{s ≤ t_k : X_s − I_s < ε}, exact on the skeleton.
fn occupation_near_infimum(path: &Path, eps: f64) -> Vec<f64> {
    let pts = path.points();
    let mut inf = pts[0].value;
    let mut occ = 0.0;
    let mut out = Vec::with_capacity(pts.len());
    out.push(0.0);
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (a, b, dt) = (p.value, q.left(), q.time - p.time);
        let level = inf + eps;
        if b >= a {
            // Infimum constant on a rising piece.
            occ += dt * fraction_below(a, b, level);
        } else {
            // Falling piece: once below inf + ε it stays within ε of the (moving) infimum.
            occ += dt * fraction_below(a, b, level);
            inf = inf.min(b);
        }
        inf = inf.min(q.value);
        out.push(occ);
    }
    out
}

/// Fraction of a linear piece from a to b spent below `level`.
fn fraction_below(a: f64, b: f64, level: f64) -> f64 {
    if a == b {
        return if a < level { 1.0 } else { 0.0 };
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((level - lo) / (hi - lo)).clamp(0.0, 1.0)
}

pub fn local_time_at_infimum(
    path: &Path,
    triplet: &LevyTriplet,
    method: LocalTimeMethod,
) -> Result<LocalTimeEstimate, LocalTimeError> {
    local_time_min(path, triplet.effective_gaussian_b(), triplet.has_negative_jumps(), method)
}

/// Local time at the supremum, computed as the local time at the infimum of −X.
pub fn local_time_at_supremum(
    path: &Path,
    triplet: &LevyTriplet,
    method: LocalTimeMethod,
) -> Result<LocalTimeEstimate, LocalTimeError> {
    local_time_min(&path.negate(), triplet.effective_gaussian_b(), triplet.has_positive_jumps(), method)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderSample {
    pub which: Extremum,
    /// Local-time grid step; entry j corresponds to local time j·dv.
    pub dv: f64,
    pub inverse_lt: Vec<f64>,
    pub heights: Vec<f64>,
    /// No new extremum during the last `kill_fraction` of the horizon.
    pub killed: bool,
    /// Total local time accumulated over the path.
    pub kill_coord: f64,
}

impl LadderSample {
    /// Index of local time v on the grid, if the ladder got that far.
    pub fn index_of(&self, v: f64) -> Option<usize> {
        let j = libm::round(v / self.dv) as usize;
        (j < self.inverse_lt.len()).then_some(j)
    }
}

/// (L⁻¹, U) on the local-time grid {0, dv, 2dv, …} below the total local time.
/// Heights are read from the running extremum at L⁻¹, which equals −X_{L⁻¹}
/// (resp. X_{L*⁻¹}) in the continuum and keeps them monotone on the skeleton.
/// With L = −I the heights are exactly the local-time grid.
pub fn ladder_process(
    path: &Path,
    lt: &LocalTimeEstimate,
    which: Extremum,
    dv: f64,
    kill_fraction: f64,
) -> LadderSample {
    let pts = path.points();
    let (sup, inf) = algebra::running_extrema(path);
    let total = lt.total();
    let mut inverse_lt = Vec::new();
    let mut heights = Vec::new();
    let mut k = 0usize;
    let mut j = 0usize;
    loop {
        let v = j as f64 * dv;
        if v >= total {
            break;
        }
        while lt.values[k] <= v {
            k += 1;
        }
        // L crosses v inside (t_{k-1}, t_k]; the extremum moves in proportion. A jump at
        // t_k only shows from the next grid value of L on.
        let (l0, l1) = (lt.values[k - 1], lt.values[k]);
        let f = (v - l0) / (l1 - l0);
        let (t0, t1) = (pts[k - 1].time, pts[k].time);
        let left = pts[k].left();
        let (h_left, h_right) = match which {
            Extremum::Min => (pts[0].value - inf[k - 1], pts[0].value - inf[k - 1].min(left)),
            Extremum::Max => (sup[k - 1] - pts[0].value, sup[k - 1].max(left) - pts[0].value),
        };
        let h = h_left + f * (h_right - h_left);
        // Time at which the linear piece reaches that extremum, if it moves there.
        let (a, z) = match which {
            Extremum::Min => (pts[0].value - pts[k - 1].value, pts[0].value - pts[k].left()),
            Extremum::Max => (pts[k - 1].value - pts[0].value, pts[k].left() - pts[0].value),
        };
        let s = if h_right > h_left && z > a && h <= z {
            t0 + (h - a).max(0.0) / (z - a) * (t1 - t0)
        } else {
            t0 + f * (t1 - t0)
        };
        inverse_lt.push(s);
        heights.push(h.max(heights.last().copied().unwrap_or(0.0)));
        j += 1;
    }
    let last_extremum = match which {
        Extremum::Min => algebra::extremum_times(path, path.lifetime()).map(|g| g.0),
        Extremum::Max => algebra::extremum_times(path, path.lifetime()).map(|g| g.1),
    }
    .unwrap_or(0.0);
    let killed = path.lifetime() - last_extremum >= kill_fraction * path.lifetime() && path.lifetime() > 0.0;
    LadderSample { which, dv, inverse_lt, heights, killed, kill_coord: total }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no ladder sample reached local time 1")]
pub struct NoSamples;

/// κ(α, β) = −log E[exp(−α L⁻¹₁ − β U₁)], killed ladders contributing 0 and
/// truncated (unkilled) ladders that stop before local time 1 excluded.
pub fn estimate_kappa(samples: &[LadderSample], alpha: f64, beta: f64) -> Result<Estimate, NoSamples> {
    let mut acc = MeanAcc::default();
    let mut reached = 0;
    for s in samples {
        match s.index_of(1.0) {
            Some(j) if s.kill_coord > 1.0 => {
                reached += 1;
                acc.push(libm::exp(-alpha * s.inverse_lt[j] - beta * s.heights[j]));
            }
            _ if s.killed => acc.push(0.0),
            _ => {}
        }
    }
    if reached == 0 {
        return Err(NoSamples);
    }
    let m = acc.mean();
    Ok(Estimate { value: -libm::log(m), se: acc.se() / m, n: acc.count() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCell {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
    pub se: f64,
    /// No sample visited the cell.
    pub empty: bool,
}

/// Histogram estimate of the potential density of the ladder heights,
/// E[∫₀^{L_∞} 1{U_u ∈ cell} du] / width, over the cells delimited by `edges`.
pub fn estimate_potential_density(samples: &[LadderSample], edges: &[f64]) -> Vec<DensityCell> {
    let cells = edges.len().saturating_sub(1);
    let mut accs: Vec<MeanAcc> = (0..cells).map(|_| MeanAcc::default()).collect();
    let mut per = alloc::vec![0.0; cells];
    for s in samples {
        per.iter_mut().for_each(|v| *v = 0.0);
        for &h in &s.heights {
            let c = edges.partition_point(|&e| e <= h);
            if c >= 1 && c <= cells {
                per[c - 1] += s.dv;
            }
        }
        for (acc, v) in accs.iter_mut().zip(&per) {
            acc.push(*v);
        }
    }
    (0..cells)
        .map(|c| {
            let width = edges[c + 1] - edges[c];
            let acc = &accs[c];
            DensityCell {
                lo: edges[c],
                hi: edges[c + 1],
                density: acc.mean() / width,
                se: acc.se() / width,
                empty: acc.sum() == 0.0,
            }
        })
        .collect()
}

/// Whether the first passage above x is a creeping one (overshoot ≤ tol);
/// `None` when the path never passes above x.
pub fn creeps_at(path: &Path, x: f64, tol: f64) -> Option<bool> {
    algebra::first_passage_up(path, x).map(|c| c.value - x <= tol)
}

/// Levels creeped by the running supremum, as disjoint intervals (lo, hi).
pub fn creeped_levels(path: &Path) -> Vec<(f64, f64)> {
    let pts = path.points();
    let mut sup = pts[0].value;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for q in &pts[1..] {
        let l = q.left();
        if l > sup {
            match out.last_mut() {
                Some(last) if last.1 == sup => last.1 = l,
                _ => out.push((sup, l)),
            }
            sup = l;
        }
        sup = sup.max(q.value);
    }
    out
}

/// Fraction of `n` simulated paths creeping over x, among those passing x before
/// `horizon`; classification uses [`creeps_at`] with tolerance `tol`.
pub fn estimate_creeping(
    triplet: &LevyTriplet,
    x: f64,
    n: usize,
    grid_step: f64,
    horizon: f64,
    tol: f64,
    seed: u64,
) -> Result<Estimate, crate::simulate::SimError> {
    let sim = crate::simulate::Simulator::new(triplet)?;
    let mut acc = MeanAcc::default();
    for i in 0..n {
        let stream = crate::rng::RngStream::new(seed, i as u64);
        let (path, _) = sim.path_until(0.0, grid_step, horizon, stream, |p| p.value > x)?;
        if let Some(c) = creeps_at(&path, x, tol) {
            acc.push(if c { 1.0 } else { 0.0 });
        }
    }
    Ok(Estimate { value: acc.mean(), se: acc.se(), n: acc.count() })
}
