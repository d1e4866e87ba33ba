//! Experiment runners. Each returns a typed report carrying its contracts;
//! [`run_experiment`] and [`run_all`] also write the reports to disk.

pub mod concentration;
pub mod hierarchy;
pub mod invariance;
pub mod pog;
pub mod sample_complexity;
pub mod selectivity;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::Result;
use crate::report::{self, Contract};

pub use concentration::{run_concentration, ConcentrationSummary};
pub use hierarchy::{run_hierarchy, HierarchyReport};
pub use invariance::{run_invariance_suite, InvarianceReport};
pub use pog::{run_pog, PogReport};
pub use sample_complexity::{run_sample_complexity, SampleComplexityReport};
pub use selectivity::{run_selectivity_suite, SelectivityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Invariance,
    Selectivity,
    Concentration,
    Pog,
    Hierarchy,
    SampleComplexity,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Invariance,
        Experiment::Selectivity,
        Experiment::Concentration,
        Experiment::Pog,
        Experiment::Hierarchy,
        Experiment::SampleComplexity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Invariance => "invariance",
            Experiment::Selectivity => "selectivity",
            Experiment::Concentration => "concentration",
            Experiment::Pog => "pog",
            Experiment::Hierarchy => "hierarchy",
            Experiment::SampleComplexity => "sample_complexity",
        }
    }

    pub fn report_file(self) -> String {
        format!("{}.json", self.name())
    }
}

/// Outcome of one experiment as listed in the summary index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub experiment: String,
    pub passed: bool,
    pub failures: Vec<String>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub seed: u64,
    pub passed: bool,
    pub experiments: Vec<ExperimentOutcome>,
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Common header of every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: u32,
    pub experiment: String,
    pub seed: u64,
}

impl Header {
    pub(crate) fn new(experiment: Experiment, seed: u64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            experiment: experiment.name().into(),
            seed,
        }
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn outcome(
    experiment: Experiment,
    contracts: &[Contract],
    files: Vec<PathBuf>,
) -> ExperimentOutcome {
    ExperimentOutcome {
        experiment: experiment.name().into(),
        passed: report::all_passed(contracts),
        failures: report::failures(contracts),
        files: files.iter().map(|p| file_name(p)).collect(),
    }
}

/// Runs one experiment and writes its report (plus CSV tables) into `out`.
pub fn run_experiment(
    experiment: Experiment,
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<ExperimentOutcome> {
    report::ensure_dir(out)?;
    let file = experiment.report_file();
    Ok(match experiment {
        Experiment::Invariance => {
            let r = run_invariance_suite(cfg)?;
            outcome(
                experiment,
                &r.contracts,
                vec![report::write_json(out, &file, &r)?],
            )
        }
        Experiment::Selectivity => {
            let r = run_selectivity_suite(cfg)?;
            outcome(
                experiment,
                &r.contracts,
                vec![report::write_json(out, &file, &r)?],
            )
        }
        Experiment::Concentration => {
            let r = run_concentration(cfg)?;
            let mut files = vec![report::write_json(out, &file, &r)?];
            files.push(r.write_pairs_csv(out)?);
            outcome(experiment, &r.contracts, files)
        }
        Experiment::Pog => {
            let r = run_pog(cfg)?;
            let mut files = vec![report::write_json(out, &file, &r)?];
            files.extend(r.write_tensor_csvs(out)?);
            outcome(experiment, &r.contracts, files)
        }
        Experiment::Hierarchy => {
            let r = run_hierarchy(cfg)?;
            outcome(
                experiment,
                &r.contracts,
                vec![report::write_json(out, &file, &r)?],
            )
        }
        Experiment::SampleComplexity => {
            let r = run_sample_complexity(cfg)?;
            let mut files = vec![report::write_json(out, &file, &r)?];
            files.push(r.write_curves_csv(out)?);
            outcome(experiment, &r.contracts, files)
        }
    })
}

/// Runs every experiment in order and writes `summary.json`.
pub fn run_all(cfg: &ExperimentConfig, out: &Path) -> Result<Summary> {
    let experiments = Experiment::ALL
        .iter()
        .map(|&e| run_experiment(e, cfg, out))
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary {
        schema: SCHEMA_VERSION,
        seed: cfg.seed,
        passed: experiments.iter().all(|e| e.passed),
        experiments,
    };
    report::write_json(out, SUMMARY_FILE, &summary)?;
    Ok(summary)
}
