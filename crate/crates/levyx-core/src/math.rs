//! Special functions used by the model, the oracles and the tests.

use core::f64::consts::{PI, SQRT_2};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI)
}

/// Survival function of the Kolmogorov distribution, P(K > x).
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // Small-x form of the same series, converges where the alternating one does not.
        let mut s = 0.0;
        for k in 1..=50 {
            let kk = (2 * k - 1) as f64;
            s += libm::exp(-kk * kk * PI * PI / (8.0 * x * x));
        }
        return (1.0 - libm::sqrt(2.0 * PI) / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * x * x);
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// CDF of the arcsine law on [0, 1].
pub fn arcsine_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        2.0 / PI * libm::asin(libm::sqrt(x))
    }
}

/// CDF of √t·|N₃(0, I)|, the Bessel(3) marginal at time t started from 0.
pub fn bessel3_cdf(x: f64, t: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let z = x / libm::sqrt(t);
    // Maxwell distribution with unit scale.
    2.0 * normal_cdf(z) - 1.0 - 2.0 * z * normal_pdf(z)
}

/// P(τ_0 ≤ t, τ_0 < τ_L) for standard Brownian motion from a ∈ (0, L), by the method of
/// images: Σ_k sign(a + 2kL)·2(1 − Φ(|a + 2kL|/√t)).
pub fn brownian_strip_exit_below(a: f64, width: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let st = libm::sqrt(t);
    let terms = 10 + (6.0 * st / width) as i64;
    let mut s = 0.0;
    for k in -terms..=terms {
        let y = a + 2.0 * k as f64 * width;
        s += y.signum() * 2.0 * normal_cdf(-y.abs() / st);
    }
    s.clamp(0.0, 1.0 - a / width)
}

/// CDF of the first passage time at `level` of the standard Bessel(3) process from 0:
/// 1 + 2 Σ_{k≥1} (−1)^k e^{−k²π²u/2} with u = t/level².
pub fn bessel3_hitting_cdf(level: f64, t: f64) -> f64 {
    let u = t / (level * level);
    if u < 1e-3 {
        return 0.0;
    }
    let terms = libm::ceil(libm::sqrt(80.0 / (PI * PI * u))) as i32 + 1;
    let mut s = 1.0;
    for k in 1..=terms {
        let a = (k as f64) * (k as f64) * PI * PI * u;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += 2.0 * sign * libm::exp(-a / 2.0);
    }
    s.clamp(0.0, 1.0)
}
