use levyx_core::algebra::*;
use levyx_core::{Path, Point, Time};
use proptest::prelude::*;

fn pt(time: f64, value: f64, jump: f64) -> Point {
    Point { time, value, jump }
}

/// 0 → 1 linearly on [0, 1], jump +2 at t = 1 (to 3), linear down to 2 at t = 2,
/// jump −3 at t = 3 (from 1.5 to −1.5), flat to t = 4.
fn sample() -> Path {
    Path::from_points(
        1.0,
        vec![pt(0.0, 0.0, 0.0), pt(1.0, 3.0, 2.0), pt(2.0, 2.0, 0.0), pt(3.0, -1.5, -3.0), pt(4.0, -1.5, 0.0)],
    )
}

#[test]
fn evaluation_is_cadlag() {
    let p = sample();
    assert_eq!(p.value_at(0.5), 0.5);
    assert_eq!(p.value_at(1.0), 3.0);
    assert_eq!(p.left_limit(1.0), 1.0);
    assert_eq!(p.value_at(2.5), 1.75);
    assert_eq!(p.left_limit(3.0), 1.5);
    assert_eq!(p.jump_at(3.0), -3.0);
    assert_eq!(p.jump_at(2.5), 0.0);
    assert_eq!(p.sup(), 3.0);
    assert_eq!(p.inf(), -1.5);
    assert_eq!(p.jump_count(), 2);
}

#[test]
fn stop_and_shift() {
    let p = sample();
    let s = stop_at(&p, 1.0).unwrap();
    assert_eq!(s.lifetime(), 1.0);
    assert_eq!(s.end_value(), 3.0);
    let b = stop_before(&p, 1.0).unwrap();
    assert_eq!(b.end_value(), 1.0);
    assert_eq!(b.terminal_jump(), 0.0);
    let h = shift(&p, 0.5).unwrap();
    assert_eq!(h.lifetime(), 3.5);
    assert_eq!(h.value_at(0.5), 2.5);
    assert_eq!(h.jump_at(0.5), 2.0);
    assert!(stop_at(&p, 4.5).is_err());
    assert!(shift(&p, -0.1).is_err());
}

#[test]
fn reversal_by_hand() {
    let p = sample();
    // ω̂^4(s) = ω(4) − ω((4 − s)−).
    let r = reverse_at(&p, 4.0).unwrap();
    assert_eq!(r.lifetime(), 4.0);
    assert_eq!(r.start(), 0.0);
    for (s, want) in [(0.5, 0.0), (1.0, -3.0), (1.5, -3.25), (2.0, -3.5), (3.0, -2.5), (3.5, -2.0), (4.0, -1.5)] {
        let direct = p.value_at(4.0) - p.left_limit(4.0 - s);
        assert_eq!(direct, want, "oracle at {s}");
        assert!((r.value_at(s) - want).abs() < 1e-12, "s={s}: {}", r.value_at(s));
    }
    // Reversal at a jump time starts from the jump.
    let r3 = reverse_at(&p, 3.0).unwrap();
    assert_eq!(r3.start(), -3.0);
    assert_eq!(reverse_just_before(&p, 3.0).unwrap().start(), 0.0);
}

#[test]
fn passages_by_hand() {
    let p = sample();
    let c = first_passage_up(&p, 0.5).unwrap();
    assert_eq!((c.time, c.value, c.left), (0.5, 0.5, 0.5));
    assert!(!c.by_jump());
    let c = first_passage_up(&p, 2.0).unwrap();
    assert_eq!((c.time, c.value, c.left), (1.0, 3.0, 1.0));
    assert_eq!(c.jump(), 2.0);
    assert_eq!(first_passage_time(&p, 3.0), Time::Infinite);
    let d = first_passage_down(&p, 0.0).unwrap();
    assert_eq!((d.time, d.value), (3.0, -1.5));

    // σ_x(t) = sup{s ≤ t : ω(s) ≤ x}.
    let l = last_passage(&p, 1.5, 2.5).unwrap().unwrap();
    assert_eq!((l.time, l.value, l.left), (1.0, 3.0, 1.0));
    let l = last_passage(&p, 0.5, 2.5).unwrap().unwrap();
    assert_eq!((l.time, l.value), (0.5, 0.5));
    let l = last_passage(&p, 0.0, 4.0).unwrap().unwrap();
    assert_eq!(l.time, 4.0);
    let l = last_passage(&p, 2.5, 2.5).unwrap().unwrap();
    assert!((l.time - 2.0).abs() < 1e-12 || l.time == 2.5);
    assert_eq!(last_passage_time(&p, -1.0, 2.0).unwrap(), Time::Infinite);
}

#[test]
fn extremum_times_and_splits() {
    let p = sample();
    let (gi, gs) = extremum_times(&p, 4.0).unwrap();
    assert_eq!(gs, 1.0);
    // The infimum is held on [3, 4) and never attained at a last time before 4.
    assert_eq!(gi, 4.0);
    let (gi, _) = extremum_times(&p, 2.5).unwrap();
    assert_eq!(gi, 0.0);
    let sp = split_at_supremum(&p, 4.0).unwrap();
    assert_eq!(sp.split_time, 1.0);
    assert_eq!(sp.pre.end_value(), 3.0);
    assert_eq!(sp.post.lifetime(), 3.0);
    assert_eq!(sp.post.sup(), 0.0);
    let (s, i) = running_extrema(&p);
    assert_eq!(s, vec![0.0, 3.0, 3.0, 3.0, 3.0]);
    assert_eq!(i, vec![0.0, 0.0, 0.0, -1.5, -1.5]);
}

fn arb_path() -> impl Strategy<Value = Path> {
    prop::collection::vec((0.01..1.0f64, -2.0..2.0f64, prop::bool::weighted(0.3), -3.0..3.0f64), 1..40).prop_map(
        |cells| {
            let mut pts = vec![pt(0.0, 0.0, 0.0)];
            let (mut t, mut v) = (0.0, 0.0);
            for (dt, dv, j, size) in cells {
                t += dt;
                v += dv;
                let jump = if j { size } else { 0.0 };
                v += jump;
                pts.push(pt(t, v, jump));
            }
            Path::from_points(0.1, pts)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reversal_keeps_lifetime_and_jumps(p in arb_path(), f in 0.0..1.0f64) {
        let t = f * p.lifetime();
        let r = reverse_at(&p, t).unwrap();
        prop_assert_eq!(r.lifetime(), t);
        let mut a: Vec<f64> = stop_at(&p, t).unwrap().jumps().map(|(_, j)| j).collect();
        let mut b: Vec<f64> = r.jumps().map(|(_, j)| j).collect();
        // The jump at t itself becomes the starting value of the reversed path.
        let at_t = p.jump_at(t);
        if at_t != 0.0 {
            let k = a.iter().rposition(|&j| j == at_t).unwrap();
            a.remove(k);
            prop_assert_eq!(r.start(), at_t);
        }
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reversal_matches_definition(p in arb_path(), f in 0.0..1.0f64, g in 0.0..1.0f64) {
        let t = f * p.lifetime();
        let s = g * t;
        let r = reverse_at(&p, t).unwrap();
        let want = p.value_at(t) - p.left_limit(t - s);
        prop_assert!((r.value_at(s) - want).abs() < 1e-9 * (1.0 + want.abs()));
    }

    #[test]
    fn reversal_exchanges_extrema(p in arb_path()) {
        let t = p.lifetime();
        let r = reverse_at(&p, t).unwrap();
        let end = p.end_value();
        // sup of ω̂ equals ω(t) − inf ω over [0, t).
        let open = stop_before(&p, t).unwrap();
        prop_assert!((r.sup() - (end - open.inf())).abs() < 1e-9);
        prop_assert!((r.inf() - (end - open.sup())).abs() < 1e-9);
    }

    #[test]
    fn shift_and_stop_concatenate(p in arb_path(), f in 0.0..1.0f64) {
        let t = f * p.lifetime();
        let whole = concat(&stop_at(&p, t).unwrap(), &shift(&p, t).unwrap());
        // Off the point times: re-anchoring rounds times by an ulp, which matters at a jump.
        prop_assert!((whole.end_value() - p.end_value()).abs() < 1e-9);
        for k in 0..20 {
            let s = p.lifetime() * (k as f64 + 0.5) / 20.0;
            prop_assert!((whole.value_at(s) - p.value_at(s)).abs() < 1e-9);
        }
        prop_assert!((whole.lifetime() - p.lifetime()).abs() < 1e-12);
    }

    #[test]
    fn first_passage_is_monotone(p in arb_path(), x in -1.0..3.0f64, dx in 0.0..2.0f64) {
        let a = first_passage_time(&p, x);
        let b = first_passage_time(&p, x + dx);
        match (a, b) {
            (Time::Finite(a), Time::Finite(b)) => prop_assert!(a <= b),
            (Time::Infinite, Time::Finite(_)) => prop_assert!(false),
            _ => {}
        }
        if let Some(c) = first_passage_up(&p, x) {
            prop_assert!(c.value >= x);
            prop_assert!(p.sup() >= x);
            // Before the passage the path stays at or below x.
            if c.time > 0.0 {
                prop_assert!(stop_before(&p, c.time).unwrap().sup() <= x + 1e-9);
            }
        } else {
            prop_assert!(p.sup() <= x);
        }
    }

    #[test]
    fn last_passage_is_last(p in arb_path(), x in -2.0..2.0f64) {
        let t = p.lifetime();
        match last_passage(&p, x, t).unwrap() {
            Some(c) => {
                prop_assert!(c.left.min(c.value) <= x + 1e-9);
                if c.time < t {
                    prop_assert!(shift(&p, c.time).unwrap().offset(c.value).points()[1..].iter().all(|q| q.value > x - 1e-9 && q.left() > x - 1e-9));
                }
            }
            None => prop_assert!(p.inf() > x),
        }
    }

    #[test]
    fn split_at_infimum_rejoins(p in arb_path()) {
        let t = p.lifetime();
        let sp = split_at_infimum(&p, t).unwrap();
        // Re-anchored at ω(ĝ), which sits above the infimum when ω jumps up at ĝ.
        let post = sp.post.offset(p.value_at(sp.split_time));
        let inf = stop_before(&p, t).unwrap().inf();
        if post.lifetime() > 0.0 {
            prop_assert!(stop_before(&post, post.lifetime()).unwrap().inf() >= inf - 1e-9);
        }
        prop_assert!(stop_before(&sp.pre, sp.split_time).unwrap().inf() >= inf - 1e-9);
        let back = concat(&sp.pre, &sp.post);
        prop_assert!((back.end_value() - p.end_value()).abs() < 1e-9);
    }
}
