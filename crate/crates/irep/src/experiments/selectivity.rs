use irep_core::groups::GroupAction;
use irep_core::random::{gaussian_signal, seeded, substream, SeededRng};
use irep_core::representations::{
    orbit_equivalent, represent, sample_templates, Pooling, RepresentationConfig, TemplateBank,
};
use irep_core::signal::Signal;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Experiment, Header};
use crate::config::{ExperimentConfig, Section, SelectivitySection};
use crate::error::{Error, Result};
use crate::report::Contract;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// `(I, g·I)`.
    Translate,
    /// Independent draw.
    Random,
    /// Coordinates in reverse order.
    Reversed,
    /// Random coordinate permutation.
    Permuted,
    /// `I` plus a large Gaussian perturbation.
    Perturbed,
}

impl PairKind {
    /// Half the pairs are translates; the rest cycle through the negatives.
    fn for_index(j: usize) -> Self {
        match j % 8 {
            0..=3 => PairKind::Translate,
            4 => PairKind::Random,
            5 => PairKind::Reversed,
            6 => PairKind::Permuted,
            _ => PairKind::Perturbed,
        }
    }
}

/// A pair whose representation verdict disagrees with the orbit oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub group: String,
    pub pair: usize,
    pub kind: PairKind,
    pub representation: String,
    pub oracle_equivalent: bool,
    pub distance: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSelectivity {
    pub group: String,
    pub dim: usize,
    pub order: usize,
    pub templates: usize,
    pub bins: usize,
    pub moments: usize,
    pub pairs: usize,
    pub equivalent_pairs: usize,
    pub cdf_confusions: usize,
    pub moment_confusions: usize,
    /// Largest representation distance over oracle-equivalent pairs.
    pub cdf_max_equivalent_distance: f64,
    /// Smallest representation distance over non-equivalent pairs.
    pub cdf_min_separated_distance: f64,
    pub moment_max_equivalent_distance: f64,
    pub moment_min_separated_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectivityReport {
    #[serde(flatten)]
    pub header: Header,
    pub groups: Vec<GroupSelectivity>,
    pub confusions: Vec<Confusion>,
    pub contracts: Vec<Contract>,
}

fn make_pair(
    kind: PairKind,
    action: &GroupAction,
    rng: &mut SeededRng,
    scale: f64,
) -> Result<(Signal, Signal)> {
    let d = action.dim();
    let x = gaussian_signal(rng, d)?;
    let y = match kind {
        PairKind::Translate => action.act(rng.random_range(0..action.order()), &x)?,
        PairKind::Random => gaussian_signal(rng, d)?,
        PairKind::Reversed => Signal::new(x.as_slice().iter().rev().copied().collect())?,
        PairKind::Permuted => {
            let mut idx: Vec<usize> = (0..d).collect();
            idx.shuffle(rng);
            Signal::new(idx.iter().map(|&i| x.as_slice()[i]).collect())?
        }
        PairKind::Perturbed => {
            let noise = gaussian_signal(rng, d)?;
            Signal::new(
                x.as_slice()
                    .iter()
                    .zip(noise.as_slice())
                    .map(|(a, n)| a + scale * n)
                    .collect(),
            )?
        }
    };
    Ok((x, y))
}

struct Verdicts {
    confusions: usize,
    max_equivalent: f64,
    min_separated: f64,
}

impl Verdicts {
    fn new() -> Self {
        Self {
            confusions: 0,
            max_equivalent: 0.0,
            min_separated: f64::MAX,
        }
    }
}

/// Classifies random pairs by representation distance and compares the
/// verdicts with the brute-force orbit oracle.
pub fn run_selectivity_suite(cfg: &ExperimentConfig) -> Result<SelectivityReport> {
    let sec = &cfg.selectivity;
    let seed = cfg.section_seed(Section::Selectivity);
    let mut groups = Vec::new();
    let mut confusions = Vec::new();
    let mut contracts = Vec::new();
    for (gi, spec) in sec.groups.iter().enumerate() {
        if spec.order() > sec.max_oracle_order {
            return Err(Error::config(format!(
                "selectivity oracle refuses {} (order {} > max_oracle_order {})",
                spec.label(),
                spec.order(),
                sec.max_oracle_order
            )));
        }
        let action = spec.build(cfg.max_group_order)?;
        let k = sec.templates.unwrap_or(4 * action.dim());
        let bank = sample_templates(&action, k, substream(seed, 2 * gi as u64))?;
        let cdf = RepresentationConfig {
            pooling: sec.pooling.build()?,
            normalize: sec.normalize,
        };
        let moments = RepresentationConfig {
            pooling: Pooling::Moments { order: sec.moments },
            normalize: sec.normalize,
        };
        let mut rng = seeded(substream(seed, 2 * gi as u64 + 1));
        let (mut c, mut m) = (Verdicts::new(), Verdicts::new());
        let mut equivalent_pairs = 0;
        for j in 0..sec.pairs {
            let kind = PairKind::for_index(j);
            let (x, y) = make_pair(kind, &action, &mut rng, 1.0)?;
            let equivalent = oracle(&x, &y, &action, sec)?;
            equivalent_pairs += equivalent as usize;
            for (rc, verdicts, name) in [
                (&cdf, &mut c, sec.pooling.kind()),
                (&moments, &mut m, "moments"),
            ] {
                let distance = distance(&x, &y, &bank, rc)?;
                if equivalent {
                    verdicts.max_equivalent = verdicts.max_equivalent.max(distance);
                } else {
                    verdicts.min_separated = verdicts.min_separated.min(distance);
                }
                if equivalent != (distance <= sec.rep_tol) {
                    verdicts.confusions += 1;
                    confusions.push(Confusion {
                        group: spec.label(),
                        pair: j,
                        kind,
                        representation: name.into(),
                        oracle_equivalent: equivalent,
                        distance,
                        a: x.as_slice().to_vec(),
                        b: y.as_slice().to_vec(),
                    });
                }
            }
        }
        contracts.push(Contract::at_most(
            format!("{} {} confusions", spec.label(), sec.pooling.kind()),
            c.confusions as f64,
            sec.max_confusions as f64,
        ));
        contracts.push(Contract::at_most(
            format!("{} moments confusions", spec.label()),
            m.confusions as f64,
            sec.max_moment_confusions as f64,
        ));
        groups.push(GroupSelectivity {
            group: spec.label(),
            dim: action.dim(),
            order: action.order(),
            templates: k,
            bins: sec.pooling.build()?.width(),
            moments: sec.moments,
            pairs: sec.pairs,
            equivalent_pairs,
            cdf_confusions: c.confusions,
            moment_confusions: m.confusions,
            cdf_max_equivalent_distance: c.max_equivalent,
            cdf_min_separated_distance: finite_or_zero(c.min_separated),
            moment_max_equivalent_distance: m.max_equivalent,
            moment_min_separated_distance: finite_or_zero(m.min_separated),
        });
    }
    Ok(SelectivityReport {
        header: Header::new(Experiment::Selectivity, seed),
        groups,
        confusions,
        contracts,
    })
}

fn finite_or_zero(v: f64) -> f64 {
    if v == f64::MAX {
        0.0
    } else {
        v
    }
}

fn oracle(x: &Signal, y: &Signal, action: &GroupAction, sec: &SelectivitySection) -> Result<bool> {
    Ok(if sec.normalize {
        orbit_equivalent(&x.normalized(), &y.normalized(), action, sec.oracle_tol)?
    } else {
        orbit_equivalent(x, y, action, sec.oracle_tol)?
    })
}

fn distance(x: &Signal, y: &Signal, bank: &TemplateBank, rc: &RepresentationConfig) -> Result<f64> {
    Ok(represent(x, bank, rc)?.max_abs_diff(&represent(y, bank, rc)?))
}
