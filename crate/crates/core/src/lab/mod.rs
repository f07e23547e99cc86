//! Experiment configuration, drivers, CSV reports and SVG plots.

pub mod config;
mod experiments;
pub mod plot;
pub mod report;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub use config::{ExperimentConfig, ExperimentKind, Operator, PhaseConfig, TestFamily};
pub use experiments::{
    convergence, embedding, flow_lemma, knapp_sharpness, mean_oracle, tube_bound,
    upper_bound_sweep,
};
pub use plot::render_svg;
pub use report::{fit_slope, Check, Comparison, DataRow, Report, SlopeFit, Statistic, Target, Verdict};

/// Validates the configuration and runs the experiment it names.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Report>> {
    cfg.validate()?;
    match cfg.kind()? {
        ExperimentKind::UpperBoundSweep => upper_bound_sweep(cfg),
        ExperimentKind::KnappSharpness => knapp_sharpness(cfg),
        ExperimentKind::Embedding => embedding(cfg),
        ExperimentKind::FlowLemma => flow_lemma(cfg),
        ExperimentKind::TubeBound => tube_bound(cfg),
        ExperimentKind::Convergence => convergence(cfg),
        ExperimentKind::MeanOracle => mean_oracle(cfg),
    }
}

/// Writes `<stem>.csv` and `<stem>.svg` per report. The plot is rendered from
/// the re-parsed CSV, so it can be regenerated from the CSV alone.
pub fn write_reports(reports: &[Report], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut seen = HashSet::new();
    let mut written = Vec::new();
    for r in reports {
        let stem = r.file_stem();
        if !seen.insert(stem.clone()) {
            return Err(Error::Config(format!("two reports share the file name {stem}")));
        }
        let csv = r.to_csv()?;
        let svg = render_svg(&Report::from_csv(&csv)?);
        let csv_path = dir.join(format!("{stem}.csv"));
        fs::write(&csv_path, csv)?;
        fs::write(dir.join(format!("{stem}.svg")), svg)?;
        written.push(csv_path);
    }
    Ok(written)
}
