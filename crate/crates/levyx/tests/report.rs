use levyx::config::ExperimentConfig;
use levyx::report::{
    assemble, check_verdict, policy_seeds, settled, CheckResult, SeedRun, Statistic, TestReport, Verdict,
};

fn cfg() -> ExperimentConfig {
    ExperimentConfig::from_toml(
        "experiment_name = \"duality\"\nn_paths = 100\ngrid_step = 0.01\nseed = 5\n[triplet]\ndrift = 0.0\ngaussian = 0.5\n",
    )
    .unwrap()
}

fn ks(p: f64) -> Statistic {
    Statistic::Ks { statistic: 0.1, p_value: p, n_a: 100, n_b: 100, min_p: 0.01 }
}

fn run(seed: u64, ps: &[f64]) -> SeedRun {
    let mut r = SeedRun::new(seed, vec![0.01]);
    for (k, &p) in ps.iter().enumerate() {
        r.check(CheckResult::new(format!("c{k}"), ks(p)));
    }
    r
}

use Verdict::*;

#[test]
fn two_of_three() {
    assert_eq!(check_verdict(&[Pass, Pass]), Pass);
    assert_eq!(check_verdict(&[Pass, Fail, Pass]), Pass);
    assert_eq!(check_verdict(&[Fail, Pass, Fail]), Fail);
    assert_eq!(check_verdict(&[Pass, Fail, Inconclusive]), Inconclusive);
    assert_eq!(check_verdict(&[Inconclusive, Inconclusive, Pass]), Inconclusive);
}

#[test]
fn seeds_are_fixed_and_distinct() {
    let s = policy_seeds(5);
    assert_eq!(s[0], 5);
    assert_eq!(s, policy_seeds(5));
    assert!(s[0] != s[1] && s[1] != s[2]);
}

#[test]
fn third_seed_only_when_unsettled() {
    assert!(settled(&[run(1, &[0.5, 0.001]), run(2, &[0.5, 0.001])]));
    assert!(!settled(&[run(1, &[0.5, 0.001]), run(2, &[0.5, 0.5])]));
}

#[test]
fn experiment_verdict() {
    let c = cfg();
    assert_eq!(assemble(&c, vec![run(1, &[0.5, 0.2]), run(2, &[0.3, 0.9])]).verdict, Pass);
    assert_eq!(assemble(&c, vec![run(1, &[0.5, 0.001]), run(2, &[0.3, 0.002])]).verdict, Fail);
    let r = assemble(&c, vec![run(1, &[0.5, 0.001]), run(2, &[0.3, 0.5]), run(3, &[0.3, 0.0])]);
    assert_eq!(r.verdict, Fail);
    let mut inc = run(2, &[0.5]);
    inc.checks[0] = inc.checks[0].clone().inconclusive_if(true, "too few samples");
    let r = assemble(&c, vec![run(1, &[0.5]), inc, run(3, &[0.001])]);
    assert_eq!(r.verdict, Inconclusive);
}

#[test]
fn statistics_carry_their_thresholds() {
    assert!(Statistic::Agreement { lhs: 1.0, rhs: 1.2, se: 0.1, k: 3.0 }.passes());
    assert!(!Statistic::Agreement { lhs: 1.0, rhs: 1.4, se: 0.1, k: 3.0 }.passes());
    assert!(Statistic::Residual { value: 0.025, se: 0.002, tolerance: 0.02, k: 3.0 }.passes());
    assert!(!Statistic::Residual { value: 0.03, se: 0.002, tolerance: 0.02, k: 3.0 }.passes());
    assert!(Statistic::Interval { value: 1.0, lo: 0.9, hi: 1.1 }.passes());
    assert!(!Statistic::Correlation { value: -0.2, n: 100, bound: 0.15 }.passes());
    assert!(Statistic::Increasing { values: vec![1.0, 2.0, 5.0] }.passes());
    assert!(!Statistic::Increasing { values: vec![1.0, 1.0, 5.0] }.passes());
}

#[test]
fn report_is_self_contained() {
    let r = assemble(&cfg(), vec![run(1, &[0.5, 0.001]), run(2, &[0.3, 0.5]), run(3, &[0.3, 0.0])]);
    let json = r.to_json();
    let back: TestReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.rederive(), r.verdict);
    assert!(json.contains("\"policy\""));
    assert!(json.contains("\"p_value\""));

    // Editing a recorded statistic changes the derived verdict.
    let mut edited = back.clone();
    for run in &mut edited.runs {
        for c in &mut run.checks {
            c.statistic = ks(0.5);
        }
    }
    assert_eq!(edited.rederive(), Pass);
}
