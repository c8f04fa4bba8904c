//! Random instances, property suites, experiments and reports.

pub mod config;
pub mod experiments;
pub mod instances;
pub mod report;
pub mod suites;

use std::path::Path;

pub use config::ExperimentConfig;
pub use report::{ReportRow, Status};

use crate::error::Result;

/// Which parts of the run to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Verify,
    Dilation,
    Bmo,
    Lipschitz,
    Logn,
    Vector,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Verify,
        Stage::Dilation,
        Stage::Bmo,
        Stage::Lipschitz,
        Stage::Logn,
        Stage::Vector,
    ];

    pub fn run(self, cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
        match self {
            Stage::Verify => {
                let mut rows = suites::matcore_doi_suite(cfg)?;
                rows.extend(suites::car_suite(cfg)?);
                rows.extend(suites::markov_suite(cfg)?);
                rows.extend(suites::transference_suite(cfg)?);
                rows.extend(suites::quadrature_suite(cfg)?);
                Ok(rows)
            }
            Stage::Dilation => suites::dilation_suite(cfg),
            Stage::Bmo => experiments::exp_commutator_bmo(cfg),
            Stage::Lipschitz => experiments::exp_lipschitz_p(cfg),
            Stage::Logn => experiments::exp_logn(cfg),
            Stage::Vector => experiments::exp_vector(cfg),
        }
    }
}

/// Outcome of a run: all rows and whether every assertion held.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub rows: Vec<ReportRow>,
    pub passed: bool,
}

impl SuiteOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Runs the selected stages in order and collects their rows.
pub fn run_stages(cfg: &ExperimentConfig, stages: &[Stage]) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for stage in stages {
        rows.extend(stage.run(cfg)?);
    }
    let passed = rows.iter().all(|r| !r.is_failure());
    Ok(SuiteOutcome { rows, passed })
}

/// Property suites then experiments, with reports written to `out`.
pub fn run_suite(cfg: &ExperimentConfig, out: &Path) -> Result<SuiteOutcome> {
    let outcome = run_stages(cfg, &Stage::ALL)?;
    report::write_reports(out, &outcome.rows)?;
    Ok(outcome)
}
