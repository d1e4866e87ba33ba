use std::path::{Path, PathBuf};

use irep_core::metrics::{concentration_experiment, ConcentrationConfig, PairDeviation};
use serde::{Deserialize, Serialize};

use super::{Experiment, Header};
use crate::config::{ExperimentConfig, Section};
use crate::error::Result;
use crate::report::{self, Cell, Contract};

pub const PAIRS_FILE: &str = "concentration_pairs.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    #[serde(flatten)]
    pub header: Header,
    pub group: String,
    pub n: usize,
    pub k: usize,
    pub k_ref: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub c: f64,
    pub bound_k: usize,
    pub pairs: usize,
    pub violations: usize,
    pub violation_fraction: f64,
    pub max_deviation: f64,
    pub rms_deviation: f64,
    pub contracts: Vec<Contract>,
    /// Written to the CSV table rather than the JSON report.
    #[serde(skip)]
    pub pair_deviations: Vec<PairDeviation>,
}

impl ConcentrationSummary {
    /// `pair, a, b, d, d_hat, deviation` with `d` the reference distance.
    pub fn write_pairs_csv(&self, dir: &Path) -> Result<PathBuf> {
        let rows: Vec<Vec<Cell>> = self
            .pair_deviations
            .iter()
            .enumerate()
            .map(|(i, p)| {
                vec![
                    i.into(),
                    p.a.into(),
                    p.b.into(),
                    p.reference.into(),
                    p.estimate.into(),
                    p.deviation.into(),
                ]
            })
            .collect();
        report::write_csv(
            dir,
            PAIRS_FILE,
            &["pair", "a", "b", "d", "d_hat", "deviation"],
            &rows,
        )
    }
}

/// Sliced-distance estimates with `k` templates against a `K_ref` reference.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<ConcentrationSummary> {
    let sec = &cfg.concentration;
    let seed = cfg.section_seed(Section::Concentration);
    let action = sec.group.build(cfg.max_group_order)?;
    let core_cfg = ConcentrationConfig {
        n: sec.signals,
        k: sec.k,
        epsilon: sec.epsilon,
        delta: sec.delta,
        c: sec.c,
        k_ref: Some(sec.k_ref),
        seed,
        normalize: sec.normalize,
        chunk: sec.chunk,
    };
    let r = concentration_experiment(&action, &core_cfg)?;
    let limit = sec
        .max_violation_fraction
        .unwrap_or(sec.delta * sec.delta + 0.02);
    let contracts = vec![Contract::at_most(
        "violation fraction",
        r.violation_fraction,
        limit,
    )];
    Ok(ConcentrationSummary {
        header: Header::new(Experiment::Concentration, seed),
        group: sec.group.label(),
        n: r.n,
        k: r.k,
        k_ref: r.k_ref,
        epsilon: r.epsilon,
        delta: r.delta,
        c: r.c,
        bound_k: r.bound_k,
        pairs: r.pairs,
        violations: r.violations,
        violation_fraction: r.violation_fraction,
        max_deviation: r.max_deviation,
        rms_deviation: r.rms_deviation,
        contracts,
        pair_deviations: r.pair_deviations,
    })
}
