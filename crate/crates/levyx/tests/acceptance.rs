//! One line per acceptance criterion, run on the shipped configs.
//!
//! `cargo test -p levyx --test acceptance`; the run takes several minutes on one core.

use std::path::{Path as FsPath, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use levyx::config::ExperimentConfig;
use levyx::experiments::run_experiment;
use levyx::report::{TestReport, Verdict};
use levyx::runner::Runner;
use levyx_core::algebra::*;
use levyx_core::{Path, Point, Time};

fn configs() -> PathBuf {
    FsPath::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(stem: &str, runner: &Runner) -> TestReport {
    let cfg = ExperimentConfig::load(&configs().join(format!("{stem}.toml"))).unwrap();
    run_experiment(&cfg, runner).unwrap_or_else(|e| panic!("{stem}: {e:#}"))
}

fn failed_checks(r: &TestReport) -> String {
    let bad: Vec<String> =
        r.checks.iter().filter(|c| c.verdict != Verdict::Pass).map(|c| format!("{}={:?}", c.name, c.verdict)).collect();
    bad.join(",")
}

/// Pass iff every listed experiment passes; the detail names each run and its failures.
fn experiments(stems: &[&str], runner: &Runner) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for stem in stems {
        let r = run(stem, runner);
        ok &= r.verdict == Verdict::Pass;
        let extra = if r.verdict == Verdict::Pass { String::new() } else { format!(" [{}]", failed_checks(&r)) };
        detail.push(format!("{stem}={:?}{extra}", r.verdict));
    }
    (ok, detail.join(" "))
}

fn pt(time: f64, value: f64, jump: f64) -> Point {
    Point { time, value, jump }
}

/// Hand-computed cases on a path with one up-jump and one down-jump.
fn path_algebra() -> (bool, String) {
    // 0 → 1 on [0, 1], jump +2 at 1, down to 2 at 2, jump −3 at 3 (from 1.5), flat to 4.
    let p = Path::from_points(
        1.0,
        vec![pt(0.0, 0.0, 0.0), pt(1.0, 3.0, 2.0), pt(2.0, 2.0, 0.0), pt(3.0, -1.5, -3.0), pt(4.0, -1.5, 0.0)],
    );
    let rev = reverse_at(&p, 4.0).unwrap();
    let sup_split = split_at_supremum(&p, 4.0).unwrap();
    let inf_split = split_at_infimum(&p, 2.5).unwrap();
    let empty = Path::from_points(1.0, vec![pt(0.0, 0.0, 0.0), pt(1.0, -1.0, 0.0)]);
    let cases: Vec<(&str, bool)> = vec![
        ("value_at", p.value_at(2.5) == 1.75),
        ("left_limit", p.left_limit(3.0) == 1.5),
        ("reverse_0.5", rev.value_at(0.5) == 0.0),
        ("reverse_1", rev.value_at(1.0) == -3.0),
        ("reverse_1.5", (rev.value_at(1.5) + 3.25).abs() < 1e-12),
        ("reverse_3", (rev.value_at(3.0) + 2.5).abs() < 1e-12),
        ("reverse_end", (rev.end_value() + 1.5).abs() < 1e-12),
        ("reverse_at_jump", reverse_at(&p, 3.0).unwrap().start() == -3.0),
        ("reverse_just_before", reverse_just_before(&p, 3.0).unwrap().start() == 0.0),
        ("shift", shift(&p, 0.5).unwrap().value_at(0.5) == 2.5),
        ("stop_at", stop_at(&p, 1.0).unwrap().end_value() == 3.0),
        ("stop_before", stop_before(&p, 1.0).unwrap().end_value() == 1.0),
        ("tau_creep", first_passage_up(&p, 0.5).map(|c| (c.time, c.by_jump())) == Some((0.5, false))),
        ("tau_jump", first_passage_up(&p, 2.0).map(|c| (c.time, c.value, c.left)) == Some((1.0, 3.0, 1.0))),
        ("tau_inf_empty", first_passage_time(&p, 3.0) == Time::Infinite),
        ("sigma_jump", last_passage(&p, 1.5, 2.5).unwrap().map(|c| (c.time, c.left)) == Some((1.0, 1.0))),
        ("sigma_creep", last_passage(&p, 0.5, 2.5).unwrap().map(|c| c.time) == Some(0.5)),
        ("sigma_sup_empty", last_passage_time(&p, -1.0, 2.0).unwrap() == Time::Infinite),
        ("g_sup", extremum_times(&p, 4.0).unwrap().1 == 1.0),
        ("g_inf", extremum_times(&p, 2.5).unwrap().0 == 0.0),
        ("g_inf_held", extremum_times(&p, 4.0).unwrap().0 == 4.0),
        ("tau_down", first_passage_down(&p, 0.0).map(|c| (c.time, c.value)) == Some((3.0, -1.5))),
        ("split_sup", sup_split.split_time == 1.0 && sup_split.post.sup() == 0.0 && sup_split.pre.end_value() == 3.0),
        ("split_inf", inf_split.split_time == 0.0 && inf_split.post.lifetime() == 2.5),
        ("never_above", first_passage_up(&empty, 0.5).is_none()),
    ];
    let bad: Vec<&str> = cases.iter().filter(|c| !c.1).map(|c| c.0).collect();
    (
        bad.is_empty(),
        format!(
            "{}/{} exact{}",
            cases.len() - bad.len(),
            cases.len(),
            if bad.is_empty() { String::new() } else { format!(" failing: {}", bad.join(",")) }
        ),
    )
}

/// Runs the CLI with one and two worker threads and compares report bytes.
fn reproducibility() -> (bool, String) {
    let tmp = tempfile::tempdir().unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, stem) in
        [("duality", "duality_jd"), ("wiener_hopf", "wiener_hopf_jd"), ("reversal_at_tau", "reversal_at_tau_jd")]
    {
        let mut bytes = Vec::new();
        for threads in ["1", "2"] {
            let out = tmp.path().join(format!("{stem}_{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_levyx"))
                .args(["run", name, "--config"])
                .arg(configs().join(format!("{stem}.toml")))
                .arg("--out")
                .arg(&out)
                .env("LEVYX_THREADS", threads)
                .output()
                .unwrap()
                .status;
            assert!(status.code().is_some_and(|c| c != 1), "{stem} errored");
            let file = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("report_"))
                .unwrap();
            bytes.push(std::fs::read(file).unwrap());
        }
        let same = bytes[0] == bytes[1];
        ok &= same;
        detail.push(format!("{stem}={}", if same { "identical" } else { "differs" }));
    }
    (ok, detail.join(" "))
}

fn main() -> ExitCode {
    let runner = Runner::from_env().unwrap();
    type Criterion<'a> = (&'a str, Box<dyn Fn() -> (bool, String) + 'a>);
    let r = &runner;
    let criteria: Vec<Criterion> = vec![
        ("path algebra hand cases", Box::new(path_algebra)),
        (
            "characteristic function within 4/sqrt(n), 3 triplets",
            Box::new(move || experiments(&["simulator_cf_brownian", "simulator_cf_jd", "simulator_cf_stable"], r)),
        ),
        ("duality KS p >= 0.01", Box::new(move || experiments(&["duality_brownian", "duality_jd"], r))),
        (
            "Wiener-Hopf residual <= 0.02 / 0.03",
            Box::new(move || experiments(&["wiener_hopf_brownian", "wiener_hopf_jd"], r)),
        ),
        (
            "first passage within 0.015 at grid 1e-4, refinement trend",
            Box::new(move || experiments(&["first_passage_brownian"], r)),
        ),
        (
            "X-up Bessel(3) marginals and post-infimum law",
            Box::new(move || experiments(&["conditioned_up_brownian", "conditioned_up_jd"], r)),
        ),
        ("Kesten creeping identity, u*(0+) d* in [0.9, 1.1]", Box::new(move || experiments(&["kesten_jd_up"], r))),
        (
            "reversal identities, no inconclusive",
            Box::new(move || {
                experiments(
                    &[
                        "reversal_at_sigma_jd",
                        "reversal_at_tau_jd",
                        "excursion_reversal_jd_up",
                        "reversal_at_tau_subordinator",
                        "excursion_reversal_spos_up",
                    ],
                    r,
                )
            }),
        ),
        (
            "Williams I: Bessel(3) last passage, creeping probability",
            Box::new(move || experiments(&["williams1_brownian", "williams1_jd_up"], r)),
        ),
        (
            "Bismut ratios, Williams II, creeping excursion counts",
            Box::new(move || {
                experiments(&["bismut_brownian", "bismut_jd_up", "williams2_brownian", "revexc_continuous_brownian"], r)
            }),
        ),
        ("byte-identical reports across LEVYX_THREADS", Box::new(reproducibility)),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f();
        failures += !ok as usize;
        println!(
            "criterion {:>2} {}: {name} ({detail}) [{:.0} s]",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
