//! Deterministic path operators: stopping, shifting, reversal, running extrema,
//! passage times, extremum times and splits.
//!
//! Everything is exact on the piecewise-linear skeleton; no operator ever finite
//! differences grid values to recover a jump.

use alloc::vec::Vec;

use crate::path::{interpolate, Path, Point, Time};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("time {t} outside the lifetime [0, {lifetime}]")]
pub struct OutOfRange {
    pub t: f64,
    pub lifetime: f64,
}

fn check(path: &Path, t: f64) -> Result<(), OutOfRange> {
    if t >= 0.0 && t <= path.lifetime() {
        Ok(())
    } else {
        Err(OutOfRange { t, lifetime: path.lifetime() })
    }
}

/// A passage through a level: the time, ω at that time and ω just before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    pub value: f64,
    pub left: f64,
}

impl Crossing {
    pub fn jump(&self) -> f64 {
        self.value - self.left
    }

    pub fn by_jump(&self) -> bool {
        self.value != self.left
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub pre: Path,
    pub post: Path,
    pub split_time: f64,
}

/// ω(·∧t) as a path of lifetime t (the jump at t, if any, is kept).
pub fn stop_at(path: &Path, t: f64) -> Result<Path, OutOfRange> {
    check(path, t)?;
    let pts = path.points();
    let k = path.index_at(t);
    let mut out: Vec<Point> = pts[..=k].to_vec();
    if pts[k].time < t {
        out.push(Point { time: t, value: path.value_at(t), jump: 0.0 });
    }
    Ok(Path::from_points(path.grid_step(), out))
}

/// ω on [0, t) continued by ω(t−) at t.
pub fn stop_before(path: &Path, t: f64) -> Result<Path, OutOfRange> {
    let mut pts = stop_at(path, t)?.into_points();
    let last = pts.len() - 1;
    if last > 0 {
        pts[last].value = pts[last].left();
        pts[last].jump = 0.0;
    }
    Ok(Path::from_points(path.grid_step(), pts))
}

/// ω∘θ_t = (ω(s + t) − ω(t); 0 ≤ s ≤ ζ − t).
pub fn shift(path: &Path, t: f64) -> Result<Path, OutOfRange> {
    check(path, t)?;
    let base = path.value_at(t);
    let mut out = alloc::vec![Point { time: 0.0, value: 0.0, jump: 0.0 }];
    for p in path.points().iter().filter(|p| p.time > t) {
        out.push(Point { time: p.time - t, value: p.value - base, jump: p.jump });
    }
    Ok(Path::from_points(path.grid_step(), out))
}

/// ω̂^t(s) = ω(t) − ω((t − s)−) on [0, t].
///
/// When ω jumps at t the reversed path starts from Δω(t).
pub fn reverse_at(path: &Path, t: f64) -> Result<Path, OutOfRange> {
    let stopped = stop_at(path, t)?;
    let pts = stopped.points();
    let top = stopped.end_value();
    let m = pts.len() - 1;
    let mut out = Vec::with_capacity(pts.len());
    out.push(Point { time: 0.0, value: top - pts[m].left(), jump: 0.0 });
    for k in (0..m).rev() {
        let p = pts[k];
        out.push(Point { time: t - p.time, value: top - p.left(), jump: p.jump });
    }
    if m > 0 {
        // t − 0 is exactly t, but keep the last time bit-identical to the lifetime.
        out[m].time = t;
    }
    Ok(Path::from_points(path.grid_step(), out))
}

/// ω̂^{t−} = ω̂^t − Δω(t).
pub fn reverse_just_before(path: &Path, t: f64) -> Result<Path, OutOfRange> {
    let dj = path.jump_at(t);
    Ok(reverse_at(path, t)?.offset(-dj))
}

/// Running supremum and infimum at each point (over left and right values up to and
/// including that point).
pub fn running_extrema(path: &Path) -> (Vec<f64>, Vec<f64>) {
    let mut s = f64::NEG_INFINITY;
    let mut i = f64::INFINITY;
    let mut sup = Vec::with_capacity(path.len());
    let mut inf = Vec::with_capacity(path.len());
    for p in path.points() {
        s = s.max(p.left()).max(p.value);
        i = i.min(p.left()).min(p.value);
        sup.push(s);
        inf.push(i);
    }
    (sup, inf)
}

/// sup over [0, t].
pub fn sup_until(path: &Path, t: f64) -> Result<f64, OutOfRange> {
    Ok(stop_at(path, t)?.sup())
}

/// inf over [0, t].
pub fn inf_until(path: &Path, t: f64) -> Result<f64, OutOfRange> {
    Ok(stop_at(path, t)?.inf())
}

/// τ_x = inf{s > 0 : ω(s) > x}; `None` stands for +∞.
pub fn first_passage_up(path: &Path, x: f64) -> Option<Crossing> {
    let pts = path.points();
    if pts[0].value > x {
        return Some(Crossing { time: 0.0, value: pts[0].value, left: pts[0].value });
    }
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let l = q.left();
        if l > x {
            // p.value ≤ x here, so the linear piece crosses x.
            let time = interpolate(p.value, p.time, l, q.time, x);
            return Some(Crossing { time: time.clamp(p.time, q.time), value: x, left: x });
        }
        if q.value > x {
            return Some(Crossing { time: q.time, value: q.value, left: l });
        }
    }
    None
}

/// τ_level = inf{s > 0 : ω(s) < level} (call with level = −x).
pub fn first_passage_down(path: &Path, level: f64) -> Option<Crossing> {
    first_passage_up(&path.negate(), -level).map(|c| Crossing { time: c.time, value: -c.value, left: -c.left })
}

/// First passage as a time with the +∞ sentinel.
pub fn first_passage_time(path: &Path, x: f64) -> Time {
    first_passage_up(path, x).map_or(Time::Infinite, |c| Time::Finite(c.time))
}

/// σ_x(t) = sup{0 ≤ s ≤ t : ω(s) ≤ x} together with ω(σ) and ω(σ−); `None` stands for
/// the convention sup ∅ = +∞.
pub fn last_passage(path: &Path, x: f64, t: f64) -> Result<Option<Crossing>, OutOfRange> {
    let stopped = stop_at(path, t)?;
    let pts = stopped.points();
    let m = pts.len() - 1;
    if pts[m].value <= x {
        return Ok(Some(Crossing { time: t, value: pts[m].value, left: pts[m].left() }));
    }
    for k in (0..m).rev() {
        let (p, q) = (pts[k], pts[k + 1]);
        let l = q.left();
        if l <= x {
            // The path sits at or below x just before q and jumps above.
            return Ok(Some(Crossing { time: q.time, value: q.value, left: l }));
        }
        if p.value <= x {
            let time = interpolate(p.value, p.time, l, q.time, x);
            return Ok(Some(Crossing { time: time.clamp(p.time, q.time), value: x, left: x }));
        }
    }
    Ok(None)
}

/// σ_x(t) as a time with the +∞ sentinel.
pub fn last_passage_time(path: &Path, x: f64, t: f64) -> Result<Time, OutOfRange> {
    Ok(last_passage(path, x, t)?.map_or(Time::Infinite, |c| Time::Finite(c.time)))
}

fn last_attaining(pts: &[Point], t: f64, better: impl Fn(f64, f64) -> bool) -> f64 {
    let m = pts.len() - 1;
    let mut best = pts[m].left();
    for p in &pts[..m] {
        for v in [p.left(), p.value] {
            if better(v, best) {
                best = v;
            }
        }
    }
    if pts[m].left() == best {
        return t;
    }
    for k in (0..m).rev() {
        if pts[k].value == best || pts[k].left() == best {
            return pts[k].time;
        }
    }
    0.0
}

/// (ĝ_t, ḡ_t): the last times in [0, t) at which the infimum (supremum) over [0, t) is
/// attained by ω(s) or ω(s−). Extrema only approached as s → t give t.
pub fn extremum_times(path: &Path, t: f64) -> Result<(f64, f64), OutOfRange> {
    let stopped = stop_at(path, t)?;
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let pts = stopped.points();
    Ok((last_attaining(pts, t, |v, b| v < b), last_attaining(pts, t, |v, b| v > b)))
}

fn split(path: &Path, t: f64, g: f64) -> Result<SplitPair, OutOfRange> {
    let pre = stop_at(path, g)?;
    let post = stop_at(&shift(path, g)?, t - g)?;
    Ok(SplitPair { pre, post, split_time: g })
}

/// Pre-infimum path ω(·∧ĝ_t) and post-infimum path (ω∘θ_ĝ)(·∧(t − ĝ)).
pub fn split_at_infimum(path: &Path, t: f64) -> Result<SplitPair, OutOfRange> {
    let (g, _) = extremum_times(path, t)?;
    split(path, t, g)
}

/// Pre-supremum and post-supremum paths.
pub fn split_at_supremum(path: &Path, t: f64) -> Result<SplitPair, OutOfRange> {
    let (_, g) = extremum_times(path, t)?;
    split(path, t, g)
}

/// Concatenates `head` and `tail` (tail re-anchored at the end value of `head`).
pub fn concat(head: &Path, tail: &Path) -> Path {
    let mut pts = head.points().to_vec();
    let t0 = head.lifetime();
    let v0 = head.end_value();
    for p in &tail.points()[1..] {
        pts.push(Point { time: t0 + p.time, value: v0 + p.value, jump: p.jump });
    }
    Path::from_points(head.grid_step(), pts)
}
