use levyx::functional::{eval_all, FunctionalSpec};
use levyx_core::{Path, Point};

fn pt(time: f64, value: f64, jump: f64) -> Point {
    Point { time, value, jump }
}

/// Up to 2 on [0, 1], down to −1 on [1, 2], jump +0.5 at 3 after rising to 0.
fn sample() -> Path {
    Path::from_points(1.0, vec![pt(0.0, 0.0, 0.0), pt(1.0, 2.0, 0.0), pt(2.0, -1.0, 0.0), pt(3.0, 0.5, 0.5)])
}

#[test]
fn functionals_by_hand() {
    use FunctionalSpec::*;
    let p = sample();
    let specs = [
        EndpointValue,
        SupValue,
        InfValue,
        Lifetime,
        InfTime,
        ValueAtFraction(0.5),
        OvershootValue,
        ClippedOccupation(1.0),
    ];
    let got = eval_all(&specs, &p);
    // Above 1 on [0.5, 1] and [1, 4/3].
    let want = [0.5, 2.0, -1.0, 3.0, 2.0, 0.5, 0.5, 0.5 + 1.0 / 3.0];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{got:?}");
    }
}

#[test]
fn names_are_stable() {
    assert_eq!(FunctionalSpec::ValueAtFraction(0.25).name(), "value_at_0.25");
    assert_eq!(FunctionalSpec::InfTime.name(), "inf_time");
    assert!(FunctionalSpec::ValueAtFraction(0.0).validate().is_err());
    assert!(FunctionalSpec::ClippedOccupation(f64::NAN).validate().is_err());
}
