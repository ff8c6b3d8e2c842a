//! Path sampling on deterministic, exponential and stopping-rule horizons.
//!
//! Each grid cell gets an exact Gaussian increment. Jump times come from exponential
//! inter-arrival gaps, so the jump stream is the same whatever the grid; the
//! continuous part at a jump time is drawn from the Brownian bridge of its cell.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::levy::{LevyError, LevyTriplet};
use crate::path::{Path, Point};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("grid step {grid_step} must be positive and at most the horizon {horizon}")]
    Grid { grid_step: f64, horizon: f64 },
    #[error("exponential rate must be positive, got {0}")]
    Rate(f64),
    #[error(transparent)]
    Model(#[from] LevyError),
}

/// Sampling parameters derived once from a triplet.
#[derive(Debug, Clone, Copy)]
pub struct Simulator {
    triplet: LevyTriplet,
    velocity: f64,
    diffusion: f64,
    jump_rate: f64,
}

impl Simulator {
    pub fn new(triplet: &LevyTriplet) -> Result<Self, LevyError> {
        Ok(Simulator {
            triplet: *triplet,
            velocity: triplet.path_velocity()?,
            diffusion: 2.0 * triplet.effective_gaussian_b(),
            jump_rate: triplet.jump_rate(),
        })
    }

    pub fn triplet(&self) -> &LevyTriplet {
        &self.triplet
    }

    /// X on [0, horizon] started at `start`. The step actually used is
    /// `horizon / ceil(horizon / grid_step)`, so the lifetime is exactly `horizon`.
    pub fn path(&self, start: f64, horizon: f64, grid_step: f64, stream: RngStream) -> Result<Path, SimError> {
        if !(grid_step > 0.0 && grid_step <= horizon && horizon.is_finite()) {
            return Err(SimError::Grid { grid_step, horizon });
        }
        let mut rng = stream.rng();
        Ok(self.run(&mut rng, start, horizon, grid_step, |_| false).0)
    }

    /// X on [0, T] with T ~ Exponential(alpha) drawn first from the stream.
    pub fn path_exp(&self, alpha: f64, grid_step: f64, stream: RngStream) -> Result<Path, SimError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SimError::Rate(alpha));
        }
        if !(grid_step > 0.0) {
            return Err(SimError::Grid { grid_step, horizon: f64::NAN });
        }
        let mut rng = stream.rng();
        let e: f64 = Exp1.sample(&mut rng);
        let horizon = e / alpha;
        Ok(self.run(&mut rng, 0.0, horizon, grid_step, |_| false).0)
    }

    /// X from `start` until `stop` returns true on a newly generated point, or until
    /// `cap`. Returns the path and whether the stopping rule fired.
    ///
    /// The rule sees points in time order; the cell in progress is completed before
    /// returning, so the path may extend past the stopping point by less than one cell.
    pub fn path_until<F>(
        &self,
        start: f64,
        grid_step: f64,
        cap: f64,
        stream: RngStream,
        stop: F,
    ) -> Result<(Path, bool), SimError>
    where
        F: FnMut(&Point) -> bool,
    {
        if !(grid_step > 0.0 && grid_step <= cap) {
            return Err(SimError::Grid { grid_step, horizon: cap });
        }
        let mut rng = stream.rng();
        Ok(self.run(&mut rng, start, cap, grid_step, stop))
    }

    fn run<F>(&self, rng: &mut ChaCha8Rng, start: f64, horizon: f64, grid_step: f64, mut stop: F) -> (Path, bool)
    where
        F: FnMut(&Point) -> bool,
    {
        let cells = libm::ceil(horizon / grid_step - 1e-9).max(1.0) as usize;
        let step = horizon / cells as f64;
        let sd = libm::sqrt(self.diffusion * step);
        let mut next_jump = self.next_gap(rng);
        let expected_jumps = (self.jump_rate * horizon) as usize;
        let mut points = Vec::with_capacity(cells.min(1 << 16) + 1 + expected_jumps.min(1 << 16));
        points.push(Point { time: 0.0, value: start, jump: 0.0 });
        let mut cont = start;
        let mut jump_sum = 0.0;
        let mut stopped = false;
        let mut pending: Vec<(f64, f64)> = Vec::new();
        for k in 0..cells {
            let t0 = k as f64 * step;
            let t1 = if k + 1 == cells { horizon } else { (k + 1) as f64 * step };
            let z: f64 = StandardNormal.sample(rng);
            let c1 = cont + self.velocity * (t1 - t0) + sd * z;
            pending.clear();
            while next_jump <= t1 {
                pending.push((next_jump, self.triplet.sample_jump(rng)));
                next_jump += self.next_gap(rng);
            }
            let (mut tp, mut cp) = (t0, cont);
            for &(s, size) in &pending {
                // Brownian bridge from (tp, cp) to (t1, c1), drift cancels.
                let w = (s - tp) / (t1 - tp);
                let var = self.diffusion * (s - tp) * (t1 - s) / (t1 - tp);
                let zb: f64 = StandardNormal.sample(rng);
                let cs = cp + w * (c1 - cp) + libm::sqrt(var.max(0.0)) * zb;
                jump_sum += size;
                let p = Point { time: s, value: cs + jump_sum, jump: size };
                if s > tp {
                    points.push(p);
                    stopped |= stop(&p);
                } else if let Some(last) = points.last_mut() {
                    // Simultaneous jumps (a null event) are merged.
                    last.value += size;
                    last.jump += size;
                }
                tp = s;
                cp = cs;
            }
            let p = Point { time: t1, value: c1 + jump_sum, jump: 0.0 };
            if t1 > tp {
                points.push(p);
                stopped |= stop(&p);
            }
            cont = c1;
            if stopped {
                break;
            }
        }
        (Path::from_points(grid_step, points), stopped)
    }

    fn next_gap(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.jump_rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / self.jump_rate
        } else {
            f64::INFINITY
        }
    }
}

pub fn sample_path(triplet: &LevyTriplet, horizon: f64, grid_step: f64, stream: RngStream) -> Result<Path, SimError> {
    Simulator::new(triplet)?.path(0.0, horizon, grid_step, stream)
}

pub fn sample_path_from(
    triplet: &LevyTriplet,
    start: f64,
    horizon: f64,
    grid_step: f64,
    stream: RngStream,
) -> Result<Path, SimError> {
    Simulator::new(triplet)?.path(start, horizon, grid_step, stream)
}

pub fn sample_path_exp_horizon(
    triplet: &LevyTriplet,
    alpha: f64,
    grid_step: f64,
    stream: RngStream,
) -> Result<Path, SimError> {
    Simulator::new(triplet)?.path_exp(alpha, grid_step, stream)
}
