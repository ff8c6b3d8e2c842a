use levyx_core::levy::char_exponent;
use levyx_core::math::{arcsine_cdf, normal_cdf};
use levyx_core::stats::{ks_one_sample, MeanAcc};
use levyx_core::{algebra, JumpLaw, JumpSpec, LevyTriplet, RngStream, SimError, Simulator};
use num_complex::Complex64;

fn jump_diffusion() -> LevyTriplet {
    let law = JumpLaw::DoubleExponential { p_up: 0.5, rate_up: 2.0, rate_down: 2.0 };
    LevyTriplet::new(0.0, 0.5, JumpSpec::CompoundPoisson { rate: 1.0, law }).unwrap()
}

#[test]
fn same_stream_same_path() {
    let sim = Simulator::new(&jump_diffusion()).unwrap();
    let a = sim.path(0.0, 2.0, 1e-2, RngStream::new(7, 3)).unwrap();
    let b = sim.path(0.0, 2.0, 1e-2, RngStream::new(7, 3)).unwrap();
    let c = sim.path(0.0, 2.0, 1e-2, RngStream::new(7, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lifetime(), 2.0);
    assert!(a.points().windows(2).all(|w| w[1].time > w[0].time));
}

#[test]
fn rejects_bad_grids() {
    let sim = Simulator::new(&LevyTriplet::brownian(0.5)).unwrap();
    assert!(matches!(sim.path(0.0, 1.0, 0.0, RngStream::new(0, 0)), Err(SimError::Grid { .. })));
    assert!(matches!(sim.path(0.0, 1.0, 2.0, RngStream::new(0, 0)), Err(SimError::Grid { .. })));
    assert!(matches!(sim.path_exp(-1.0, 0.1, RngStream::new(0, 0)), Err(SimError::Rate(_))));
}

#[test]
fn poisson_jump_count() {
    // Rate 3, horizon 2: the count is Poisson(6).
    let t =
        LevyTriplet::new(0.0, 0.0, JumpSpec::CompoundPoisson { rate: 3.0, law: JumpLaw::Dirac { at: 1.0 } }).unwrap();
    let sim = Simulator::new(&t).unwrap();
    let n = 100_000;
    let acc: MeanAcc =
        (0..n).map(|i| sim.path(0.0, 2.0, 0.5, RngStream::new(11, i)).unwrap().jump_count() as f64).collect();
    assert!((5.94..=6.06).contains(&acc.mean()), "mean count {}", acc.mean());
    assert!((acc.variance() - 6.0).abs() < 0.2);
}

#[test]
fn brownian_variance_and_start() {
    let sim = Simulator::new(&LevyTriplet::brownian(0.5)).unwrap();
    let n = 40_000;
    let acc: MeanAcc = (0..n).map(|i| sim.path(1.5, 1.0, 0.25, RngStream::new(5, i)).unwrap().end_value()).collect();
    assert!((acc.mean() - 1.5).abs() < 4.0 / (n as f64).sqrt());
    assert!((acc.variance() - 1.0).abs() < 0.03);
}

#[test]
fn char_function_matches_exponent() {
    let triplets = [
        LevyTriplet::brownian(0.5),
        jump_diffusion(),
        LevyTriplet::new(0.2, 0.1, JumpSpec::TruncatedStable { alpha: 1.5, skew: 0.3, eps: 1e-2 }).unwrap(),
    ];
    let n = 20_000;
    let tol = 4.0 / (n as f64).sqrt();
    for t in &triplets {
        let sim = Simulator::new(t).unwrap();
        let ends: Vec<f64> =
            (0..n).map(|i| sim.path(0.0, 1.0, 0.1, RngStream::new(21, i)).unwrap().end_value()).collect();
        for lam in [0.3, 0.7, 1.0, 1.5, 2.5] {
            let mc: Complex64 = ends.iter().map(|x| Complex64::new(0.0, lam * x).exp()).sum::<Complex64>() / n as f64;
            let exact = (-char_exponent(t, lam).unwrap()).exp();
            assert!((mc - exact).norm() < tol, "{t:?} λ={lam}: {mc} vs {exact}");
        }
    }
}

#[test]
fn exponential_horizon() {
    let sim = Simulator::new(&LevyTriplet::brownian(0.5)).unwrap();
    let n = 40_000;
    let mut life = MeanAcc::default();
    let mut cf = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let p = sim.path_exp(2.0, 0.05, RngStream::new(9, i)).unwrap();
        life.push(p.lifetime());
        cf += Complex64::new(0.0, p.end_value()).exp();
    }
    cf /= n as f64;
    assert!((life.mean() - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt());
    // E[e^{iX_T}] = α/(α + ψ(1)) = 2/2.5.
    assert!((cf - Complex64::new(0.8, 0.0)).norm() < 4.0 / (n as f64).sqrt());

    let p = sim.path_exp(1e6, 1e-3, RngStream::new(9, 0)).unwrap();
    assert!(p.len() <= 4);
}

#[test]
fn path_until_stops_near_the_rule() {
    let sim = Simulator::new(&jump_diffusion()).unwrap();
    for i in 0..200 {
        let (p, hit) = sim.path_until(0.0, 1e-2, 50.0, RngStream::new(2, i), |q| q.value > 1.0).unwrap();
        if hit {
            let c = algebra::first_passage_up(&p, 1.0).unwrap();
            assert!(p.lifetime() - c.time <= 1e-2 + 1e-12);
        } else {
            assert_eq!(p.lifetime(), 50.0);
            assert!(p.sup() <= 1.0);
        }
    }
}

#[test]
fn argmin_follows_arcsine_law() {
    // A random walk with N steps puts mass about 1/√(πN) on each endpoint; at N = 10⁴
    // that is well below the KS resolution of 10⁴ samples.
    let sim = Simulator::new(&LevyTriplet::brownian(0.5)).unwrap();
    let g: Vec<f64> = (0..10_000)
        .map(|i| {
            algebra::split_at_infimum(&sim.path(0.0, 1.0, 1e-4, RngStream::new(4, i)).unwrap(), 1.0).unwrap().split_time
        })
        .collect();
    let out = ks_one_sample(&g, arcsine_cdf);
    assert!(out.p_value >= 0.01, "{out:?}");
}

#[test]
fn first_passage_probability_refines_toward_reflection_value() {
    // P(τ₁ ≤ 1) = 2(1 − Φ(1)) for standard Brownian motion.
    let exact = 2.0 * (1.0 - normal_cdf(1.0));
    let sim = Simulator::new(&LevyTriplet::brownian(0.5)).unwrap();
    let n = 20_000;
    let frac = |h: f64| {
        (0..n).filter(|&i| sim.path_until(0.0, h, 1.0, RngStream::new(8, i), |q| q.value > 1.0).unwrap().1).count()
            as f64
            / n as f64
    };
    let coarse = frac(1e-2);
    let fine = frac(1e-3);
    assert!(coarse < fine + 0.005, "coarse {coarse}, fine {fine}");
    assert!((fine - exact).abs() < 0.02, "fine {fine} vs {exact}");
}
