//! Estimators and two-sample tests used by the tests and the harness.

use alloc::vec::Vec;

use rand::Rng;

use crate::math::kolmogorov_sf;

/// Running mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAcc {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl MeanAcc {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &MeanAcc) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn se(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            libm::sqrt(self.variance() / self.n as f64)
        }
    }
}

impl FromIterator<f64> for MeanAcc {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MeanAcc::default();
        iter.into_iter().for_each(|x| acc.push(x));
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value (Stephens' small-sample
/// correction).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestOutcome {
    if a.is_empty() || b.is_empty() {
        return TestOutcome { statistic: f64::NAN, p_value: f64::NAN };
    }
    let (x, y) = (sorted(a), sorted(b));
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = libm::sqrt(n * m / (n + m));
    let p = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
    TestOutcome { statistic: d, p_value: p }
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> TestOutcome {
    if xs.is_empty() {
        return TestOutcome { statistic: f64::NAN, p_value: f64::NAN };
    }
    let x = sorted(xs);
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (k, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - k as f64 / n).max((k + 1) as f64 / n - f);
    }
    let ne = libm::sqrt(n);
    TestOutcome { statistic: d, p_value: kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d) }
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

fn energy_statistic(z: &[[f64; 2]], split: usize, d: &[f64]) -> f64 {
    let n = z.len();
    let (nx, ny) = (split as f64, (n - split) as f64);
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let v = d[i * n + j];
            match (i < split, j < split) {
                (true, true) => xx += v,
                (false, false) => yy += v,
                _ => xy += v,
            }
        }
    }
    // xy counts both orders.
    xy / (nx * ny) - xx / (nx * nx) - yy / (ny * ny)
}

/// Permutation test on the energy distance between two bivariate samples.
/// The p-value is (1 + #{permuted ≥ observed}) / (1 + permutations).
pub fn energy_test<R: Rng + ?Sized>(x: &[[f64; 2]], y: &[[f64; 2]], permutations: usize, rng: &mut R) -> TestOutcome {
    let mut z: Vec<[f64; 2]> = x.iter().chain(y).copied().collect();
    let n = z.len();
    let split = x.len();
    if split == 0 || split == n {
        return TestOutcome { statistic: f64::NAN, p_value: f64::NAN };
    }
    // Standardize each coordinate so both contribute.
    for c in 0..2 {
        let acc: MeanAcc = z.iter().map(|p| p[c]).collect();
        let sd = libm::sqrt(acc.variance()).max(1e-300);
        z.iter_mut().for_each(|p| p[c] = (p[c] - acc.mean()) / sd);
    }
    let mut d = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = dist(&z[i], &z[j]);
        }
    }
    let observed = energy_statistic(&z, split, &d);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut at_least = 0usize;
    let mut dp = alloc::vec![0.0; n * n];
    let mut zp = z.clone();
    for _ in 0..permutations {
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            idx.swap(i, j);
        }
        for i in 0..n {
            zp[i] = z[idx[i]];
            for j in 0..n {
                dp[i * n + j] = d[idx[i] * n + idx[j]];
            }
        }
        if energy_statistic(&zp, split, &dp) >= observed {
            at_least += 1;
        }
    }
    TestOutcome { statistic: observed, p_value: (1 + at_least) as f64 / (1 + permutations) as f64 }
}

/// Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (a, b) = (x[i] - mx, y[i] - my);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    sxy / libm::sqrt(sxx * syy)
}

/// Effective sample size (Σw)² / Σw² of importance weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}
