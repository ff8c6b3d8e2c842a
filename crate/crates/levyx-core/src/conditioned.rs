//! Pathwise construction of the process conditioned to stay positive (negative),
//!
//! X↑_t = X_{α⁺_t} + ½ℓ_{α⁺_t} + Σ_{s ≤ α⁺_t} [1{X_s ≤ 0}(X_{s−})⁺ + 1{X_s > 0}(X_{s−})⁻],
//!
//! where α⁺ is the right inverse of the time spent in (0, ∞) and ℓ the semimartingale
//! local time of X at 0. Also the future infimum J and the Bessel(3) oracles.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{self, Crossing};
use crate::path::{Path, Point};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    Up,
    Down,
}

/// Estimator of ½ℓ on each linear piece of the skeleton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalTimeAtZero {
    /// Discrete Tanaka increment X_{k+1}⁺ − X_k⁺ − 1{X_k > 0}(X_{k+1} − X_k).
    Tanaka,
    /// (b/ε) · Leb{0 ≤ X < ε}, `b` the Gaussian coefficient.
    Occupation { eps: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedPath {
    /// X↑ (or X↓) on its own time axis, the occupation time of the half-line.
    pub base: Path,
    pub direction: Direction,
    pub source_horizon: f64,
    pub occupation_used: f64,
    /// The source path never entered the half-line.
    pub empty: bool,
}

struct Builder {
    points: Vec<Point>,
}

impl Builder {
    fn emit(&mut self, time: f64, value: f64) {
        let n = self.points.len();
        if n == 0 {
            self.points.push(Point { time: 0.0, value, jump: 0.0 });
            return;
        }
        let last = &mut self.points[n - 1];
        if last.time >= time {
            if n > 1 {
                let jump = last.jump + value - last.value;
                // Continuous pieces meeting at a time only differ by rounding.
                last.jump = if jump.abs() <= 1e-12 * (1.0 + value.abs()) { 0.0 } else { jump };
            }
            last.value = value;
            return;
        }
        // A jump only ever shows up as a second value at an existing time.
        self.points.push(Point { time, value, jump: 0.0 });
    }
}

fn build_up(path: &Path, lt0: LocalTimeAtZero) -> (Vec<Point>, f64) {
    let pts = path.points();
    let mut b = Builder { points: Vec::new() };
    let mut occ = 0.0;
    let mut half_ell = 0.0;
    let mut straddle = 0.0;
    if pts[0].value > 0.0 {
        b.emit(0.0, pts[0].value);
    }
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (a, z, dt) = (p.value, q.left(), q.time - p.time);
        let dl = match lt0 {
            LocalTimeAtZero::Tanaka => z.max(0.0) - a.max(0.0) - if a > 0.0 { z - a } else { 0.0 },
            LocalTimeAtZero::Occupation { eps, b } => {
                let lo = a.min(z);
                let hi = a.max(z);
                let frac = if hi == lo {
                    if (0.0..eps).contains(&lo) {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ((hi.min(eps) - lo.max(0.0)) / (hi - lo)).max(0.0)
                };
                b / eps * frac * dt
            }
        };
        // Positive part of the piece as fractions (f0, f1) of [p.time, q.time].
        let cross = if a != z { (0.0 - a) / (z - a) } else { 0.0 };
        let part = match (a > 0.0, z > 0.0) {
            (true, true) => Some((0.0, 1.0)),
            (true, false) => Some((0.0, cross)),
            (false, true) => Some((cross, 1.0)),
            (false, false) => None,
        };
        if let Some((f0, f1)) = part {
            let d_occ = (f1 - f0) * dt;
            let x0 = a + f0 * (z - a);
            let x1 = a + f1 * (z - a);
            b.emit(occ, x0.max(0.0) + half_ell + straddle);
            if d_occ > 0.0 {
                occ += d_occ;
                b.emit(occ, x1.max(0.0) + half_ell + dl + straddle);
            }
        }
        half_ell += dl;
        if q.jump != 0.0 {
            let l = z;
            if q.value <= 0.0 {
                straddle += l.max(0.0);
            } else {
                straddle += (-l).max(0.0);
                b.emit(occ, q.value + half_ell + straddle);
            }
        }
    }
    (b.points, occ)
}

/// Builds X↑ (`Up`) or X↓ (`Down`) from a path started at 0.
pub fn build_conditioned(path: &Path, lt0: LocalTimeAtZero, direction: Direction) -> ConditionedPath {
    let source = match direction {
        Direction::Up => path.clone(),
        Direction::Down => path.negate(),
    };
    let (points, occ) = build_up(&source, lt0);
    let empty = points.is_empty();
    let mut base =
        if empty { Path::constant(path.grid_step(), 0.0) } else { Path::from_points(path.grid_step(), points) };
    if direction == Direction::Down {
        base = base.negate();
    }
    ConditionedPath { base, direction, source_horizon: path.lifetime(), occupation_used: occ, empty }
}

/// Stopping rule for [`Simulator::path_until`](crate::Simulator::path_until) that fires
/// once the path has spent `target` time units strictly above (`Up`) or below (`Down`)
/// zero. The path must start at 0.
pub fn occupation_reached(target: f64, direction: Direction) -> impl FnMut(&Point) -> bool {
    let sign = if direction == Direction::Up { 1.0 } else { -1.0 };
    let (mut t, mut v, mut occ) = (0.0, 0.0, 0.0);
    move |p: &Point| {
        let (a, z) = (sign * v, sign * p.left());
        let dt = p.time - t;
        occ += dt
            * match (a > 0.0, z > 0.0) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                (true, false) => a / (a - z),
                (false, true) => z / (z - a),
            };
        t = p.time;
        v = p.value;
        occ >= target
    }
}

/// J at each point of an `Up` conditioned path: the infimum of the path from that
/// point to the end of the available lifetime.
pub fn future_infimum(cp: &ConditionedPath) -> Vec<f64> {
    let pts = cp.base.points();
    let mut out = alloc::vec![0.0; pts.len()];
    let mut m = f64::INFINITY;
    for k in (0..pts.len()).rev() {
        m = m.min(pts[k].value);
        out[k] = m;
        m = m.min(pts[k].left());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageFunctionals {
    /// τ↑_x, `None` if the path stays at or below x.
    pub tau_up: Option<Crossing>,
    /// σ↑_x, `None` when unresolved.
    pub sigma_up: Option<Crossing>,
    /// The available path ends above x + margin, so σ↑_x is taken as known.
    pub resolved: bool,
}

/// τ↑_x and σ↑_x on the available lifetime. σ↑_x is reported only when the final value
/// (the last value of J) exceeds x + `margin`.
pub fn passage_functionals(cp: &ConditionedPath, x: f64, margin: f64) -> PassageFunctionals {
    let tau_up = algebra::first_passage_up(&cp.base, x);
    let resolved = !cp.empty && cp.base.end_value() > x + margin;
    let sigma_up = if resolved { algebra::last_passage(&cp.base, x, cp.base.lifetime()).ok().flatten() } else { None };
    PassageFunctionals { tau_up, sigma_up, resolved }
}

/// Bessel(3) skeleton |B| of a 3-d Brownian motion with unit variance per unit time.
pub fn bessel3_path(horizon: f64, grid_step: f64, stream: RngStream) -> Path {
    let cells = libm::ceil(horizon / grid_step - 1e-9).max(1.0) as usize;
    let step = horizon / cells as f64;
    let sd = libm::sqrt(step);
    let mut rng = stream.rng();
    let mut v = [0.0f64; 3];
    let mut values = Vec::with_capacity(cells + 1);
    values.push(0.0);
    for _ in 0..cells {
        for c in &mut v {
            let z: f64 = StandardNormal.sample(&mut rng);
            *c += sd * z;
        }
        values.push(libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    }
    let mut p = Path::from_grid(step, &values);
    if let Some(last) = values.last() {
        let mut pts = p.into_points();
        let n = pts.len() - 1;
        pts[n].time = horizon;
        pts[n].value = *last;
        p = Path::from_points(grid_step, pts);
    }
    p
}

/// `n` Bessel(3) skeletons on streams `(seed, 0..n)`.
pub fn bessel3_reference(n: usize, horizon: f64, grid_step: f64, seed: u64) -> Vec<Path> {
    (0..n).map(|i| bessel3_path(horizon, grid_step, RngStream::new(seed, i as u64))).collect()
}

/// Bessel(3) from 0 run until it first exceeds `level`.
pub fn bessel3_to_first_passage(level: f64, grid_step: f64, cap: f64, stream: RngStream) -> Option<Path> {
    let mut rng = stream.rng();
    let sd = libm::sqrt(grid_step);
    let mut v = [0.0f64; 3];
    let mut points = alloc::vec![Point { time: 0.0, value: 0.0, jump: 0.0 }];
    let mut k = 0usize;
    loop {
        k += 1;
        let t = k as f64 * grid_step;
        if t > cap {
            return None;
        }
        for c in &mut v {
            let z: f64 = StandardNormal.sample(&mut rng);
            *c += sd * z;
        }
        let r = libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        points.push(Point { time: t, value: r, jump: 0.0 });
        if r > level {
            let path = Path::from_points(grid_step, points);
            let c = algebra::first_passage_up(&path, level)?;
            return algebra::stop_at(&path, c.time).ok();
        }
    }
}

/// Bessel(3) from 0 stopped at its last passage at `level`.
///
/// The future after the simulated stretch is handled exactly: once the process is above
/// `2·level` at radius R it returns to `level` with probability level/R, and when it
/// does, it moves as a Brownian motion until hitting `level`. Returns `None` when the
/// required stretch exceeds `cap` time units.
pub fn bessel3_to_last_passage(level: f64, grid_step: f64, cap: f64, stream: RngStream) -> Option<Path> {
    use rand::Rng;
    let mut rng = stream.rng();
    let sd = libm::sqrt(grid_step);
    let mut v = [0.0f64; 3];
    let mut points = alloc::vec![Point { time: 0.0, value: 0.0, jump: 0.0 }];
    let mut t = 0.0;
    let push = |points: &mut Vec<Point>, t: f64, r: f64| points.push(Point { time: t, value: r, jump: 0.0 });
    loop {
        // Radial part until above 2·level.
        loop {
            t += grid_step;
            if t > cap {
                return None;
            }
            for c in &mut v {
                let z: f64 = StandardNormal.sample(&mut rng);
                *c += sd * z;
            }
            let r = libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            push(&mut points, t, r);
            if r > 2.0 * level {
                break;
            }
        }
        let r = points[points.len() - 1].value;
        let u: f64 = rng.random();
        if u >= level / r {
            break;
        }
        // Returns: Brownian motion down to the level.
        let mut x = r;
        while x > level {
            t += grid_step;
            if t > cap {
                return None;
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            x += sd * z;
            push(&mut points, t, x);
        }
        v = [x, 0.0, 0.0];
    }
    let path = Path::from_points(grid_step, points);
    let sigma = algebra::last_passage(&path, level, path.lifetime()).ok()??;
    let mut pts = algebra::stop_at(&path, sigma.time).ok()?.into_points();
    // Interpolating at large times loses the last few bits of the level.
    let n = pts.len() - 1;
    pts[n].value = sigma.value;
    Some(Path::from_points(grid_step, pts))
}
