//! Scenario runner: reads a TOML scenario, runs one pipeline and writes a
//! JSON report plus CSV dumps.

pub mod pipelines;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

use anyhow::Result;
use potentia::uniqueness::Verdict;

use pipelines::{CalibrationFailure, Outcome, StudyOutput};
use report::OutputDir;
use scenario::{Pipeline, Scenario, ScenarioError};

/// Result of one invocation.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: Outcome,
    pub files: Vec<PathBuf>,
}

impl RunResult {
    pub fn verdict(&self) -> Option<Verdict> {
        self.outcome.verdict
    }
}

/// Applies command-line overrides.
pub fn with_overrides(mut s: Scenario, grid: Option<usize>) -> Result<Scenario, ScenarioError> {
    if let Some(cells) = grid {
        s.grid.cells = cells;
        s.check()?;
    }
    Ok(s)
}

pub fn run(s: &Scenario, out: &Path) -> Result<RunResult> {
    let mut dir = OutputDir::create(out)?;
    let outcome = match s.pipeline {
        Pipeline::Verdict => pipelines::run_verdict(s, &mut dir)?,
        Pipeline::PoissonJensen => pipelines::run_poisson_jensen(s, &mut dir)?,
        Pipeline::Duality => pipelines::run_duality(s, &mut dir)?,
        Pipeline::Balayage => pipelines::run_balayage(s, &mut dir)?,
        Pipeline::Gluing => pipelines::run_gluing(s, &mut dir)?,
        Pipeline::Continuation => pipelines::run_continuation(s, &mut dir)?,
        Pipeline::ConvergenceStudy => pipelines::run_study_pipeline(s, &mut dir)?,
    };
    Ok(RunResult { outcome, files: dir.written().to_vec() })
}

pub fn study(s: &Scenario, levels: &[usize], out: &Path) -> Result<StudyOutput> {
    let mut dir = OutputDir::create(out)?;
    pipelines::convergence_study(s, levels, &mut dir)
}

/// Exit status for an error: 2 for scenario problems, 1 for everything
/// else (hypothesis failures, numerical breakdown, I/O).
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ScenarioError>().is_some() {
        2
    } else {
        1
    }
}

/// Exit status for a completed run.
pub fn outcome_code(r: &RunResult) -> u8 {
    match r.verdict() {
        Some(Verdict::HypothesisFailed(_)) => 1,
        _ => 0,
    }
}

#[doc(hidden)]
pub fn is_calibration_failure(e: &anyhow::Error) -> bool {
    e.downcast_ref::<CalibrationFailure>().is_some()
}
