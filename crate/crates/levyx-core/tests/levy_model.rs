use approx::assert_abs_diff_eq;
use levyx_core::levy::{char_exponent, drift_classification, regularity_check};
use levyx_core::{DriftClass, JumpLaw, JumpSpec, LevyTriplet, Regularity};
use num_complex::Complex64;
use proptest::prelude::*;

fn cp(rate: f64, law: JumpLaw) -> JumpSpec {
    JumpSpec::CompoundPoisson { rate, law }
}

/// Closed-form exponent of a compound Poisson triplet: the compensator integral is
/// taken from the law's own truncated mean, computed here by brute-force midpoint sums.
fn cp_oracle(a: f64, b: f64, rate: f64, law: JumpLaw, lam: f64, small_mean: f64) -> Complex64 {
    let i = Complex64::i();
    i * a * lam + b * lam * lam + rate * (1.0 - law.char_fn(lam) + i * lam * small_mean)
}

fn midpoint_small_mean(law: JumpLaw) -> f64 {
    if let JumpLaw::Dirac { at } = law {
        return if at.abs() < 1.0 { at } else { 0.0 };
    }
    // E[J 1{|J|<1}] by a fine midpoint rule on the density implied by the CDF.
    let n = 200_000;
    let h = 2.0 / n as f64;
    (0..n)
        .map(|k| {
            let lo = -1.0 + k as f64 * h;
            let p = law.tail_above(lo) - law.tail_above(lo + h);
            (lo + 0.5 * h) * p
        })
        .sum()
}

#[test]
fn brownian_exponent_is_b_lambda_squared() {
    let t = LevyTriplet::brownian(0.5);
    assert_eq!(char_exponent(&t, 2.0).unwrap(), Complex64::new(2.0, 0.0));
    for lam in [0.1, 1.0, 3.7] {
        assert_abs_diff_eq!(char_exponent(&t, lam).unwrap().re, lam * lam / 2.0, epsilon = 1e-10);
    }
}

#[test]
fn pure_drift_exponent() {
    let t = LevyTriplet::new(1.0, 0.0, JumpSpec::None).unwrap();
    assert_eq!(char_exponent(&t, 1.0).unwrap(), Complex64::new(0.0, 1.0));
}

#[test]
fn unit_atom_has_no_compensator() {
    let t = LevyTriplet::new(0.0, 0.0, cp(1.0, JumpLaw::Dirac { at: 1.0 })).unwrap();
    let psi = char_exponent(&t, std::f64::consts::PI).unwrap();
    assert_abs_diff_eq!(psi.re, 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(psi.im, 0.0, epsilon = 1e-12);
}

#[test]
fn compound_poisson_matches_closed_form_char_fn() {
    let laws = [
        JumpLaw::Normal { mean: 0.3, sd: 0.7 },
        JumpLaw::DoubleExponential { p_up: 0.4, rate_up: 2.0, rate_down: 3.0 },
        JumpLaw::Uniform { low: -1.5, high: 0.5 },
        JumpLaw::Dirac { at: 0.4 },
    ];
    for law in laws {
        let small = midpoint_small_mean(law);
        let t = LevyTriplet::new(0.2, 0.3, cp(1.7, law)).unwrap();
        for lam in [-3.0, -0.5, 0.25, 1.0, 4.0, 11.0] {
            let got = char_exponent(&t, lam).unwrap();
            let want = cp_oracle(0.2, 0.3, 1.7, law, lam, small);
            assert!((got - want).norm() < 1e-6, "{law:?} λ={lam}: {got} vs {want}");
        }
    }
}

/// Truncated stable exponent against direct (slow, non-adaptive) summation on a long
/// log-spaced grid plus the Gaussian substitute.
#[test]
fn truncated_stable_matches_brute_force() {
    let (alpha, skew, eps) = (1.5, 0.4, 1e-2);
    let t = LevyTriplet::new(0.1, 0.05, JumpSpec::TruncatedStable { alpha, skew, eps }).unwrap();
    for lam in [0.7, 2.0, 5.0] {
        let n = 2_000_000;
        let (lo, hi) = (eps.ln(), (2e4f64).ln());
        let h = (hi - lo) / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let r = (lo + (k as f64 + 0.5) * h).exp();
            let w = r * h * r.powf(-1.0 - alpha);
            let comp = if r < 1.0 { lam * r } else { 0.0 };
            let plus = Complex64::new(1.0 - (lam * r).cos(), comp - (lam * r).sin());
            acc += w * (0.5 * (1.0 + skew) * plus + 0.5 * (1.0 - skew) * plus.conj());
        }
        let var_small = eps.powf(2.0 - alpha) / (2.0 - alpha);
        let want = Complex64::new((0.05 + 0.5 * var_small) * lam * lam, 0.1 * lam) + acc;
        let got = char_exponent(&t, lam).unwrap();
        // The brute-force sum is truncated at 2e4 where the tail is ~1e-7 relative.
        assert!((got - want).norm() < 2e-4, "λ={lam}: {got} vs {want}");
    }
}

#[test]
fn regularity_policy() {
    assert_eq!(regularity_check(&LevyTriplet::brownian(0.5)), Regularity::SatisfiesA);
    let cp1 = LevyTriplet::new(0.0, 0.0, cp(1.0, JumpLaw::Dirac { at: 1.0 })).unwrap();
    assert_eq!(regularity_check(&cp1), Regularity::FailsA);
    let ts = LevyTriplet::new(0.0, 0.0, JumpSpec::TruncatedStable { alpha: 1.5, skew: 0.0, eps: 1e-3 }).unwrap();
    assert_eq!(regularity_check(&ts), Regularity::Undetermined);
}

#[test]
fn drift_classes() {
    assert_eq!(drift_classification(&LevyTriplet::brownian(0.5)), DriftClass::Oscillates);
    let up = LevyTriplet::new(1.0, 0.5, JumpSpec::None).unwrap();
    // a = 1 means E[X_1] = -1 under the printed sign convention.
    assert_eq!(drift_classification(&up), DriftClass::DriftsDown);
    let up = LevyTriplet::new(-1.0, 0.5, JumpSpec::None).unwrap();
    assert_eq!(drift_classification(&up), DriftClass::DriftsUp);
    let ts = LevyTriplet::new(0.0, 0.0, JumpSpec::TruncatedStable { alpha: 0.8, skew: 0.0, eps: 1e-3 }).unwrap();
    assert_eq!(drift_classification(&ts), DriftClass::Unknown);
}

#[test]
fn compound_poisson_mean_minus_point_three() {
    // Jumps N(-0.3, 0.5): E[X_1] = -a + E[J 1{|J|>=1}], choose a to make it -0.3.
    let law = JumpLaw::Normal { mean: -0.3, sd: 0.5 };
    let small = midpoint_small_mean(law);
    let a = -small;
    let t = LevyTriplet::new(a, 0.0, cp(1.0, law)).unwrap();
    let m = t.mean().unwrap().unwrap();
    assert_abs_diff_eq!(m, -0.3, epsilon = 1e-6);
    assert_eq!(drift_classification(&t), DriftClass::DriftsDown);
    // Cross-check against the sample mean of simulated X_1.
    let sim = levyx_core::Simulator::new(&t).unwrap();
    let n = 100_000;
    let mean: f64 =
        (0..n).map(|i| sim.path(0.0, 1.0, 1.0, levyx_core::RngStream::new(3, i)).unwrap().end_value()).sum::<f64>()
            / n as f64;
    // sd of X_1 is about 0.58; 5 standard errors.
    assert!((mean + 0.3).abs() < 5.0 * 0.6 / (n as f64).sqrt(), "sample mean {mean}");
}

#[test]
fn rejects_invalid_triplets() {
    assert!(LevyTriplet::new(0.0, -1.0, JumpSpec::None).is_err());
    assert!(LevyTriplet::new(0.0, 1.0, cp(0.0, JumpLaw::Dirac { at: 1.0 })).is_err());
    assert!(LevyTriplet::new(0.0, 1.0, cp(1.0, JumpLaw::Dirac { at: 0.0 })).is_err());
    assert!(LevyTriplet::new(0.0, 1.0, JumpSpec::TruncatedStable { alpha: 2.0, skew: 0.0, eps: 0.1 }).is_err());
}

fn any_triplet() -> impl Strategy<Value = LevyTriplet> {
    let law = prop_oneof![
        (-2.0..2.0f64, 0.05..2.0f64).prop_map(|(mean, sd)| JumpLaw::Normal { mean, sd }),
        (0.0..1.0f64, 0.3..5.0f64, 0.3..5.0f64).prop_map(|(p_up, rate_up, rate_down)| JumpLaw::DoubleExponential {
            p_up,
            rate_up,
            rate_down
        }),
        (-2.0..0.0f64, 0.1..2.0f64).prop_map(|(low, w)| JumpLaw::Uniform { low, high: low + w }),
    ];
    let jumps = prop_oneof![
        Just(JumpSpec::None),
        (0.1..5.0f64, law).prop_map(|(rate, law)| JumpSpec::CompoundPoisson { rate, law }),
        (0.2..1.9f64, -1.0..1.0f64, 0.005..0.5f64).prop_map(|(alpha, skew, eps)| JumpSpec::TruncatedStable {
            alpha,
            skew,
            eps
        }),
    ];
    (-2.0..2.0f64, 0.0..2.0f64, jumps).prop_map(|(a, b, j)| LevyTriplet::new(a, b, j).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_zero_at_origin(t in any_triplet()) {
        prop_assert_eq!(char_exponent(&t, 0.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn psi_hermitian_and_nonnegative_real_part(t in any_triplet(), lam in 0.01..20.0f64) {
        let p = char_exponent(&t, lam).unwrap();
        let m = char_exponent(&t, -lam).unwrap();
        prop_assert!((p - m.conj()).norm() < 1e-8 * (1.0 + p.norm()));
        prop_assert!(p.re >= -1e-9);
    }
}
