//! Λ(s, a) = P(I_s ≥ −a) on an (s, a) grid.

use anyhow::{bail, Result};
use levyx_core::math::normal_cdf;
use levyx_core::{LevyTriplet, RngStream, Simulator};
use serde::{Deserialize, Serialize};

use crate::runner::Runner;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    ClosedForm,
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    pub s_grid: Vec<f64>,
    pub a_grid: Vec<f64>,
    /// Row-major in s.
    pub values: Vec<f64>,
    pub se: Vec<f64>,
    pub provenance: Provenance,
}

fn check_grid(g: &[f64], name: &str) -> Result<()> {
    if g.len() < 2 || g[0] != 0.0 || g.windows(2).any(|w| w[1] <= w[0]) {
        bail!("{name} grid must start at 0 and increase strictly");
    }
    Ok(())
}

/// Closed form for a driftless Brownian triplet, Monte Carlo otherwise. Monte Carlo
/// paths use `grid_step`, so the table carries the same discrete monitoring as the
/// paths it is combined with.
pub fn estimate_lambda(
    triplet: &LevyTriplet,
    s_grid: &[f64],
    a_grid: &[f64],
    n: usize,
    seed: u64,
    grid_step: f64,
    runner: &Runner,
) -> Result<LambdaTable> {
    check_grid(s_grid, "s")?;
    check_grid(a_grid, "a")?;
    let (ns, na) = (s_grid.len(), a_grid.len());
    let brownian = triplet.jump_rate() == 0.0 && triplet.path_velocity()? == 0.0 && triplet.gaussian_b() > 0.0;
    if brownian {
        let sd = (2.0 * triplet.gaussian_b()).sqrt();
        let mut values = Vec::with_capacity(ns * na);
        for &s in s_grid {
            for &a in a_grid {
                values.push(if s == 0.0 { 1.0 } else { 1.0 - 2.0 * normal_cdf(-a / (sd * s.sqrt())) });
            }
        }
        return Ok(LambdaTable {
            s_grid: s_grid.to_vec(),
            a_grid: a_grid.to_vec(),
            se: vec![0.0; values.len()],
            values,
            provenance: Provenance::ClosedForm,
        });
    }
    let sim = Simulator::new(triplet)?;
    let horizon = s_grid[ns - 1];
    // Running infimum of each path at the s nodes.
    let infs: Vec<Vec<f64>> = runner.map(n, |i| {
        let path = sim.path(0.0, horizon, grid_step, RngStream::tagged(seed, 0x1a, i as u64)).expect("valid grid");
        let pts = path.points();
        let mut out = Vec::with_capacity(ns);
        let (mut k, mut inf) = (0usize, 0.0f64);
        for &s in s_grid {
            while k < pts.len() && pts[k].time <= s {
                inf = inf.min(pts[k].left()).min(pts[k].value);
                k += 1;
            }
            out.push(inf);
        }
        out
    });
    let mut values = Vec::with_capacity(ns * na);
    let mut se = Vec::with_capacity(ns * na);
    let mut col = vec![0.0; n];
    for j in 0..ns {
        for (c, row) in col.iter_mut().zip(&infs) {
            *c = row[j];
        }
        col.sort_by(f64::total_cmp);
        for &a in a_grid {
            let below = col.partition_point(|&v| v < -a);
            let p = 1.0 - below as f64 / n as f64;
            values.push(p);
            se.push((p * (1.0 - p) / n as f64).sqrt());
        }
    }
    Ok(LambdaTable {
        s_grid: s_grid.to_vec(),
        a_grid: a_grid.to_vec(),
        values,
        se,
        provenance: Provenance::MonteCarlo { n, seed },
    })
}

fn bracket(g: &[f64], v: f64) -> (usize, f64) {
    let v = v.clamp(g[0], g[g.len() - 1]);
    let k = g.partition_point(|&x| x <= v).clamp(1, g.len() - 1);
    let w = (v - g[k - 1]) / (g[k] - g[k - 1]);
    (k - 1, w)
}

impl LambdaTable {
    fn bilinear(&self, table: &[f64], s: f64, a: f64) -> f64 {
        let na = self.a_grid.len();
        let (i, ws) = bracket(&self.s_grid, s);
        let (j, wa) = bracket(&self.a_grid, a);
        let at = |i: usize, j: usize| table[i * na + j];
        let lo = at(i, j) * (1.0 - wa) + at(i, j + 1) * wa;
        let hi = at(i + 1, j) * (1.0 - wa) + at(i + 1, j + 1) * wa;
        lo * (1.0 - ws) + hi * ws
    }

    /// Bilinear interpolation, clamped to the grid.
    pub fn value(&self, s: f64, a: f64) -> f64 {
        if a <= 0.0 {
            return if s <= 0.0 { 1.0 } else { 0.0 };
        }
        self.bilinear(&self.values, s, a)
    }

    pub fn se_at(&self, s: f64, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        self.bilinear(&self.se, s, a)
    }

    pub fn is_monotone(&self) -> bool {
        let na = self.a_grid.len();
        let v = |i: usize, j: usize| self.values[i * na + j];
        (0..self.s_grid.len()).all(|i| (1..na).all(|j| v(i, j) >= v(i, j - 1)))
            && (1..self.s_grid.len()).all(|i| (0..na).all(|j| v(i, j) <= v(i - 1, j)))
    }
}
