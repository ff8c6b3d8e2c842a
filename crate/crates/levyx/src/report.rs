//! Check results, the multi-seed policy, and the JSON report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// A test statistic together with the threshold it is judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    /// Two-sample (or one-sample when `n_b` is 0) Kolmogorov–Smirnov; passes when
    /// `p_value ≥ min_p`.
    Ks { statistic: f64, p_value: f64, n_a: usize, n_b: usize, min_p: f64 },
    /// Permutation energy-distance test on a pair of functionals.
    Energy { statistic: f64, p_value: f64, n_a: usize, n_b: usize, min_p: f64 },
    /// |lhs − rhs| ≤ k · se.
    Agreement { lhs: f64, rhs: f64, se: f64, k: f64 },
    /// value ≤ tolerance + k · se.
    Residual { value: f64, se: f64, tolerance: f64, k: f64 },
    /// lo ≤ value ≤ hi.
    Interval { value: f64, lo: f64, hi: f64 },
    /// |value| ≤ bound.
    Correlation { value: f64, n: usize, bound: f64 },
    /// Strictly increasing sequence.
    Increasing { values: Vec<f64> },
}

impl Statistic {
    pub fn passes(&self) -> bool {
        match self {
            Statistic::Ks { p_value, min_p, .. } | Statistic::Energy { p_value, min_p, .. } => *p_value >= *min_p,
            Statistic::Agreement { lhs, rhs, se, k } => (lhs - rhs).abs() <= k * se,
            Statistic::Residual { value, se, tolerance, k } => *value <= tolerance + k * se,
            Statistic::Interval { value, lo, hi } => lo <= value && value <= hi,
            Statistic::Correlation { value, bound, .. } => value.abs() <= *bound,
            Statistic::Increasing { values } => values.windows(2).all(|w| w[1] > w[0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub statistic: Statistic,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inconclusive: Option<String>,
    pub outcome: Verdict,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, statistic: Statistic) -> Self {
        let outcome = if statistic.passes() { Verdict::Pass } else { Verdict::Fail };
        CheckResult { name: name.into(), statistic, inconclusive: None, outcome }
    }

    /// Marks the check inconclusive when `cond` holds, whatever the statistic says.
    pub fn inconclusive_if(mut self, cond: bool, reason: impl Into<String>) -> Self {
        if cond {
            self.inconclusive = Some(reason.into());
            self.outcome = Verdict::Inconclusive;
        }
        self
    }
}

/// A sample dump, written as `samples_<side>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub side: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Everything one seed of an experiment produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub sample_sizes: BTreeMap<String, usize>,
    pub exclusion_rates: BTreeMap<String, f64>,
    /// Auxiliary estimates reported for information; no verdict depends on them.
    pub estimates: BTreeMap<String, f64>,
    pub grid_steps: Vec<f64>,
    #[serde(skip)]
    pub samples: Vec<SampleTable>,
}

impl SeedRun {
    pub fn new(seed: u64, grid_steps: Vec<f64>) -> Self {
        SeedRun {
            seed,
            checks: Vec::new(),
            sample_sizes: BTreeMap::new(),
            exclusion_rates: BTreeMap::new(),
            estimates: BTreeMap::new(),
            grid_steps,
            samples: Vec::new(),
        }
    }

    pub fn check(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    pub fn size(&mut self, name: &str, n: usize) {
        self.sample_sizes.insert(name.to_string(), n);
    }

    pub fn exclusion(&mut self, name: &str, rate: f64) {
        self.exclusion_rates.insert(name.to_string(), rate);
    }

    pub fn estimate(&mut self, name: &str, v: f64) {
        self.estimates.insert(name.to_string(), v);
    }

    pub fn dump(&mut self, side: &str, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.samples.push(SampleTable {
            side: side.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub name: String,
    pub outcomes: Vec<Verdict>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub experiment_name: String,
    pub config: ExperimentConfig,
    pub policy: String,
    pub seeds: Vec<u64>,
    pub runs: Vec<SeedRun>,
    pub checks: Vec<CheckVerdict>,
    pub verdict: Verdict,
}

pub const POLICY: &str = "each check must pass on at least 2 of 3 fixed seeds (seed, mix(seed), mix(mix(seed))); \
the third seed runs only when the first two disagree or are inconclusive; a check failing on 2 seeds fails the \
experiment; otherwise any check without 2 passes makes it inconclusive";

/// The three seeds used for a configured seed.
pub fn policy_seeds(seed: u64) -> [u64; 3] {
    let s1 = levyx_core::rng::mix_seed(seed);
    [seed, s1, levyx_core::rng::mix_seed(s1)]
}

fn count(outcomes: &[Verdict], v: Verdict) -> usize {
    outcomes.iter().filter(|&&o| o == v).count()
}

/// Per-check outcomes across seeds, by check name in first-seed order.
pub fn collect_outcomes(runs: &[SeedRun]) -> Vec<(String, Vec<Verdict>)> {
    let Some(first) = runs.first() else { return Vec::new() };
    first
        .checks
        .iter()
        .map(|c| {
            let outcomes = runs
                .iter()
                .map(|r| r.checks.iter().find(|d| d.name == c.name).map_or(Verdict::Inconclusive, |d| d.outcome))
                .collect();
            (c.name.clone(), outcomes)
        })
        .collect()
}

/// Whether two seeds already settle every check.
pub fn settled(runs: &[SeedRun]) -> bool {
    collect_outcomes(runs).iter().all(|(_, o)| count(o, Verdict::Pass) >= 2 || count(o, Verdict::Fail) >= 2)
}

pub fn check_verdict(outcomes: &[Verdict]) -> Verdict {
    if count(outcomes, Verdict::Pass) >= 2 {
        Verdict::Pass
    } else if count(outcomes, Verdict::Fail) >= 2 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

pub fn assemble(config: &ExperimentConfig, runs: Vec<SeedRun>) -> TestReport {
    let checks: Vec<CheckVerdict> = collect_outcomes(&runs)
        .into_iter()
        .map(|(name, outcomes)| {
            let verdict = check_verdict(&outcomes);
            CheckVerdict { name, outcomes, verdict }
        })
        .collect();
    let verdict = if checks.iter().any(|c| c.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if checks.iter().all(|c| c.verdict == Verdict::Pass) && !checks.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    TestReport {
        experiment_name: config.experiment_name.clone(),
        config: config.clone(),
        policy: POLICY.to_string(),
        seeds: runs.iter().map(|r| r.seed).collect(),
        runs,
        checks,
        verdict,
    }
}

impl TestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Recomputes every outcome from the recorded statistics.
    pub fn rederive(&self) -> Verdict {
        let runs: Vec<SeedRun> = self
            .runs
            .iter()
            .map(|r| {
                let mut r = r.clone();
                for c in &mut r.checks {
                    let fresh = CheckResult::new(c.name.clone(), c.statistic.clone());
                    c.outcome = if c.inconclusive.is_some() { Verdict::Inconclusive } else { fresh.outcome };
                }
                r
            })
            .collect();
        assemble(&self.config, runs).verdict
    }
}
