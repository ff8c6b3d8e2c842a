//! Report and CSV writers.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use anyhow::{Context, Result};
use levyx_core::fluctuation::{excursions_above_infimum, excursions_below_supremum};
use levyx_core::Simulator;

use crate::config::ExperimentConfig;
use crate::report::{SampleTable, TestReport};
use crate::runner::Runner;

pub fn report_file_name(report: &TestReport) -> String {
    format!("report_{}_{}.json", report.experiment_name, report.config.seed)
}

/// Writes the report and the sample dumps of the first seed; returns the report path.
pub fn write_report(dir: &FsPath, report: &TestReport) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(report_file_name(report));
    fs::write(&path, report.to_json()).with_context(|| format!("cannot write {}", path.display()))?;
    if let Some(run) = report.runs.first() {
        for table in &run.samples {
            write_table(&dir.join(format!("samples_{}.csv", table.side)), table)?;
        }
    }
    Ok(path)
}

pub fn write_table(path: &FsPath, table: &SampleTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Raw dumps for `levyx simulate`: `paths.csv` with every skeleton point and
/// `excursions.csv` with the completed excursions of each path.
pub fn simulate(cfg: &ExperimentConfig, dir: &FsPath, runner: &Runner) -> Result<()> {
    let triplet = cfg.triplet.to_triplet()?;
    let sim = Simulator::new(&triplet)?;
    let horizon = cfg.horizon_or(1.0);
    let paths = runner.map(cfg.n_paths, |i| {
        sim.path(0.0, horizon, cfg.grid_step, levyx_core::RngStream::tagged(cfg.seed, 0x51, i as u64))
    });
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut pw = csv::Writer::from_path(dir.join("paths.csv"))?;
    pw.write_record(["path_id", "time", "value", "jump"])?;
    let mut ew = csv::Writer::from_path(dir.join("excursions.csv"))?;
    ew.write_record(["path_id", "kind", "start_time", "lifetime", "end_value", "terminal_jump", "sup", "inf"])?;
    for (i, p) in paths.into_iter().enumerate() {
        let p = p?;
        for q in p.points() {
            pw.write_record([i.to_string(), q.time.to_string(), q.value.to_string(), q.jump.to_string()])?;
        }
        let kinds =
            [("above_infimum", excursions_above_infimum(&p)), ("below_supremum", excursions_below_supremum(&p))];
        for (kind, list) in kinds {
            for e in list.iter().filter(|e| e.complete) {
                ew.write_record([
                    i.to_string(),
                    kind.to_string(),
                    e.start_time.to_string(),
                    e.lifetime.to_string(),
                    e.end_value.to_string(),
                    e.terminal_jump.to_string(),
                    e.sup.to_string(),
                    e.inf.to_string(),
                ])?;
            }
        }
    }
    pw.flush()?;
    ew.flush()?;
    Ok(())
}
