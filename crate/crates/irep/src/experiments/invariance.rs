use irep_core::random::{gaussian_signal, seeded, substream};
use irep_core::representations::{represent, sample_templates, RepresentationConfig};
use serde::{Deserialize, Serialize};

use super::{Experiment, Header};
use crate::config::{ExperimentConfig, PoolingSpec, Section};
use crate::error::Result;
use crate::report::Contract;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolingDeviation {
    pub group: String,
    pub order: usize,
    pub pooling: String,
    /// `max |μ(g·I) − μ(I)|` over signals, elements and entries.
    pub max_deviation: f64,
    pub comparisons: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    #[serde(flatten)]
    pub header: Header,
    pub signals: usize,
    pub templates: usize,
    pub results: Vec<PoolingDeviation>,
    pub contracts: Vec<Contract>,
}

impl InvarianceReport {
    pub fn max_deviation(&self, group: &str, pooling: &str) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.group == group && r.pooling == pooling)
            .map(|r| r.max_deviation)
    }
}

/// Compares the representation of every signal with that of each of its
/// group translates.
pub fn run_invariance_suite(cfg: &ExperimentConfig) -> Result<InvarianceReport> {
    let sec = &cfg.invariance;
    let seed = cfg.section_seed(Section::Invariance);
    let mut results = Vec::new();
    let mut contracts = Vec::new();
    for (gi, spec) in sec.groups.iter().enumerate() {
        let action = spec.build(cfg.max_group_order)?;
        let bank = sample_templates(&action, sec.templates, substream(seed, 2 * gi as u64))?;
        let mut rng = seeded(substream(seed, 2 * gi as u64 + 1));
        let signals = (0..sec.signals)
            .map(|_| gaussian_signal(&mut rng, action.dim()))
            .collect::<std::result::Result<Vec<_>, irep_core::Error>>()?;
        for pooling in &sec.poolings {
            let rc = RepresentationConfig {
                pooling: pooling.build()?,
                normalize: sec.normalize,
            };
            let mut worst: f64 = 0.0;
            for x in &signals {
                let base = represent(x, &bank, &rc)?;
                for g in 0..action.order() {
                    worst =
                        worst.max(base.max_abs_diff(&represent(&action.act(g, x)?, &bank, &rc)?));
                }
            }
            let tol = match pooling {
                PoolingSpec::Sigmoid { .. } => sec.smooth_tol,
                _ => sec.exact_tol,
            };
            contracts.push(Contract::at_most(
                format!("{} {} max deviation", spec.label(), pooling.kind()),
                worst,
                tol,
            ));
            results.push(PoolingDeviation {
                group: spec.label(),
                order: action.order(),
                pooling: pooling.kind().into(),
                max_deviation: worst,
                comparisons: signals.len() * action.order(),
            });
        }
    }
    Ok(InvarianceReport {
        header: Header::new(Experiment::Invariance, seed),
        signals: sec.signals,
        templates: sec.templates,
        results,
        contracts,
    })
}
