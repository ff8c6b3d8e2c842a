//! Bounded path functionals used as test statistics.

use anyhow::{bail, Result};
use levyx_core::algebra;
use levyx_core::Path;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FunctionalSpec {
    EndpointValue,
    SupValue,
    InfValue,
    Lifetime,
    /// Time at which the infimum is attained.
    InfTime,
    /// ω(q ζ) for q in (0, 1).
    ValueAtFraction(f64),
    /// The terminal jump ω(ζ) − ω(ζ−).
    OvershootValue,
    /// Time spent strictly above `level`.
    ClippedOccupation(f64),
}

impl FunctionalSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctionalSpec::ValueAtFraction(q) if !(q > 0.0 && q < 1.0) => {
                bail!("ValueAtFraction needs q in (0, 1), got {q}")
            }
            FunctionalSpec::ClippedOccupation(l) if !l.is_finite() => bail!("ClippedOccupation needs a finite level"),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            FunctionalSpec::EndpointValue => "endpoint".into(),
            FunctionalSpec::SupValue => "sup".into(),
            FunctionalSpec::InfValue => "inf".into(),
            FunctionalSpec::Lifetime => "lifetime".into(),
            FunctionalSpec::InfTime => "inf_time".into(),
            FunctionalSpec::ValueAtFraction(q) => format!("value_at_{q}"),
            FunctionalSpec::OvershootValue => "overshoot".into(),
            FunctionalSpec::ClippedOccupation(l) => format!("occupation_above_{l}"),
        }
    }

    pub fn eval(&self, path: &Path) -> f64 {
        match *self {
            FunctionalSpec::EndpointValue => path.end_value(),
            FunctionalSpec::SupValue => path.sup(),
            FunctionalSpec::InfValue => path.inf(),
            FunctionalSpec::Lifetime => path.lifetime(),
            FunctionalSpec::InfTime => algebra::extremum_times(path, path.lifetime()).map(|(g, _)| g).unwrap_or(0.0),
            FunctionalSpec::ValueAtFraction(q) => path.value_at(q * path.lifetime()),
            FunctionalSpec::OvershootValue => path.terminal_jump(),
            FunctionalSpec::ClippedOccupation(level) => occupation_above(path, level),
        }
    }
}

fn occupation_above(path: &Path, level: f64) -> f64 {
    path.points()
        .windows(2)
        .map(|w| {
            let (a, b, dt) = (w[0].value - level, w[1].left() - level, w[1].time - w[0].time);
            dt * match (a > 0.0, b > 0.0) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                (true, false) => a / (a - b),
                (false, true) => b / (b - a),
            }
        })
        .sum()
}

pub fn eval_all(specs: &[FunctionalSpec], path: &Path) -> Vec<f64> {
    specs.iter().map(|f| f.eval(path)).collect()
}
