//! Adaptive Gauss–Kronrod quadrature.

use alloc::vec::Vec;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFailure {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by interval bisection.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadFailure> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    stack.push((a, b, v, e));
    let mut total = 0.0;
    let mut evaluations = 0usize;
    while let Some((lo, hi, v, e)) = stack.pop() {
        let width_share = tol * (hi - lo).abs() / (b - a).abs();
        if e <= width_share.max(1e-15 * v.abs()) {
            total += v;
            continue;
        }
        evaluations += 1;
        let mid = 0.5 * (lo + hi);
        if evaluations > 20_000 || mid == lo || mid == hi {
            return Err(QuadFailure { lo, hi, estimate: v, error: e });
        }
        let left = gk15(&mut f, lo, mid);
        let right = gk15(&mut f, mid, hi);
        stack.push((lo, mid, left.0, left.1));
        stack.push((mid, hi, right.0, right.1));
    }
    Ok(total)
}
