//! Finite-lifetime càdlàg path skeletons.
//!
//! A path is a strictly increasing list of points. Between two consecutive points the
//! path is linear; at a point it may jump, `value` being the right value and
//! `value - jump` the left limit. Fresh samples have a point at every grid time and
//! at every jump time.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub time: f64,
    /// Right value ω(t).
    pub value: f64,
    /// Δω(t); the left limit is `value - jump`.
    pub jump: f64,
}

impl Point {
    pub fn left(&self) -> f64 {
        self.value - self.jump
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    grid_step: f64,
    points: Vec<Point>,
}

/// Time with the +∞ sentinel of the inf ∅ / sup ∅ conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Time {
    Finite(f64),
    Infinite,
}

impl Time {
    pub fn finite(self) -> Option<f64> {
        match self {
            Time::Finite(t) => Some(t),
            Time::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Time::Infinite)
    }
}

impl Path {
    /// Builds a path from points. The first point must be at time 0 without a jump and
    /// times must be strictly increasing.
    ///
    /// # Panics
    /// On violated invariants.
    pub fn from_points(grid_step: f64, points: Vec<Point>) -> Self {
        assert!(grid_step > 0.0, "grid step must be positive");
        assert!(!points.is_empty(), "a path has at least its starting point");
        assert!(points[0].time == 0.0 && points[0].jump == 0.0, "path must start at time 0 without a jump");
        debug_assert!(points.windows(2).all(|w| w[1].time > w[0].time), "times must increase strictly");
        Path { grid_step, points }
    }

    /// Path through `values` at times `k * grid_step`, without jumps.
    pub fn from_grid(grid_step: f64, values: &[f64]) -> Self {
        let points = values
            .iter()
            .enumerate()
            .map(|(k, &v)| Point { time: k as f64 * grid_step, value: v, jump: 0.0 })
            .collect();
        Self::from_points(grid_step, points)
    }

    /// Zero-lifetime path sitting at `value`.
    pub fn constant(grid_step: f64, value: f64) -> Self {
        Self::from_points(grid_step, alloc::vec![Point { time: 0.0, value, jump: 0.0 }])
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lifetime(&self) -> f64 {
        self.points[self.points.len() - 1].time
    }

    pub fn start(&self) -> f64 {
        self.points[0].value
    }

    pub fn end_value(&self) -> f64 {
        self.points[self.points.len() - 1].value
    }

    /// Jump at the end of the lifetime.
    pub fn terminal_jump(&self) -> f64 {
        self.points[self.points.len() - 1].jump
    }

    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().filter(|p| p.jump != 0.0).map(|p| (p.time, p.jump))
    }

    pub fn jump_count(&self) -> usize {
        self.points.iter().filter(|p| p.jump != 0.0).count()
    }

    /// Index of the last point with time ≤ t (t clamped into the lifetime).
    pub fn index_at(&self, t: f64) -> usize {
        self.points.partition_point(|p| p.time <= t).saturating_sub(1)
    }

    /// ω(t) with the right-continuous convention; constant after the lifetime.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.points[0].value;
        }
        let k = self.index_at(t);
        let p = self.points[k];
        if p.time == t || k + 1 == self.points.len() {
            return p.value;
        }
        let q = self.points[k + 1];
        interpolate(p.time, p.value, q.time, q.left(), t)
    }

    /// ω(t−), with ω(0−) = ω(0).
    pub fn left_limit(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.points[0].value;
        }
        let k = self.index_at(t);
        let p = self.points[k];
        if p.time == t {
            return p.left();
        }
        if k + 1 == self.points.len() {
            return p.value;
        }
        let q = self.points[k + 1];
        interpolate(p.time, p.value, q.time, q.left(), t)
    }

    /// Jump Δω(t) (0 off the recorded jump times).
    pub fn jump_at(&self, t: f64) -> f64 {
        let k = self.index_at(t);
        if self.points[k].time == t {
            self.points[k].jump
        } else {
            0.0
        }
    }

    /// Values at the times `k * step`, `k = 0..=lifetime/step`.
    pub fn sample_values(&self, step: f64) -> Vec<f64> {
        let n = libm::floor(self.lifetime() / step + 1e-9) as usize;
        (0..=n).map(|k| self.value_at(k as f64 * step)).collect()
    }

    /// The path plus a constant.
    pub fn offset(&self, c: f64) -> Path {
        let points = self.points.iter().map(|p| Point { value: p.value + c, ..*p }).collect();
        Path { grid_step: self.grid_step, points }
    }

    /// The path −ω.
    pub fn negate(&self) -> Path {
        let points = self.points.iter().map(|p| Point { time: p.time, value: -p.value, jump: -p.jump }).collect();
        Path { grid_step: self.grid_step, points }
    }

    pub fn sup(&self) -> f64 {
        self.points.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.value).max(p.left()))
    }

    pub fn inf(&self) -> f64 {
        self.points.iter().fold(f64::INFINITY, |m, p| m.min(p.value).min(p.left()))
    }
}

pub(crate) fn interpolate(t0: f64, v0: f64, t1: f64, v1: f64, t: f64) -> f64 {
    let w = (t - t0) / (t1 - t0);
    v0 + w * (v1 - v0)
}
