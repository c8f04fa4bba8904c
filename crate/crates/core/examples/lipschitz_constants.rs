//! Runs the Schatten-p Lipschitz and log n experiments on a reduced
//! configuration and prints the worst normalized constants.

use ncbmo::harness::{report, run_stages, ExperimentConfig, Stage};

fn main() -> ncbmo::Result<()> {
    let mut cfg = ExperimentConfig {
        trials: 10,
        ..ExperimentConfig::default()
    };
    cfg.lipschitz.sizes = vec![4, 8, 16];
    cfg.logn.sizes = vec![4, 8, 16, 32];
    cfg.logn.trials = Some(5);
    let outcome = run_stages(&cfg, &[Stage::Lipschitz, Stage::Logn])?;
    let summary = report::summarize(&outcome.rows);
    for (name, s) in &summary.experiments {
        if let Some(max) = s.max_asserted {
            println!("{name:<24} max {max:.4} over {} rows", s.rows);
        }
    }
    println!("passed: {}", outcome.passed);
    Ok(())
}
