use std::path::{Path, PathBuf};

use irep_core::groups::GroupAction;
use irep_core::pog::{
    local_invariance_check, localization_check, max_covariance_error, pog_represent,
    shifted_symmetric_difference, PogTensor,
};
use irep_core::pooling::Nonlinearity;
use irep_core::random::{
    gaussian_signal, gaussian_vector, seeded, substream, unit_vector, SeededRng,
};
use irep_core::representations::{sample_templates, RepresentationConfig};
use irep_core::signal::Signal;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Experiment, Header};
use crate::config::{ExperimentConfig, GroupSpec, Section, WindowSpec};
use crate::error::Result;
use crate::report::{self, Cell, Contract};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceResult {
    pub group: String,
    pub window: WindowSpec,
    pub window_size: usize,
    pub signals: usize,
    /// Number of `(I, g̃)` tensor comparisons.
    pub checks: usize,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedTriple {
    pub group: String,
    pub window: WindowSpec,
    pub shift: usize,
    pub eta: Nonlinearity,
    /// Size of the symmetric difference the condition is checked on.
    pub checked: usize,
    pub localized: bool,
    pub max_violation: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PogReport {
    #[serde(flatten)]
    pub header: Header,
    pub covariance: Vec<CovarianceResult>,
    pub localized: Vec<LocalizedTriple>,
    pub max_local_difference: f64,
    pub contracts: Vec<Contract>,
    /// First-signal tensor per case, written as CSV.
    #[serde(skip)]
    pub tensors: Vec<(String, PogTensor)>,
}

impl PogReport {
    /// One `pog_tensor_<group>.csv` per case with columns `g, i, j, value`.
    pub fn write_tensor_csvs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        self.tensors
            .iter()
            .map(|(label, t)| {
                let mut rows = Vec::with_capacity(t.values.len());
                for g in 0..t.order {
                    for i in 0..t.templates {
                        for (j, v) in t.cell(g, i).iter().enumerate() {
                            rows.push(vec![Cell::from(g), i.into(), j.into(), (*v).into()]);
                        }
                    }
                }
                report::write_csv(
                    dir,
                    &format!("pog_tensor_{label}.csv"),
                    &["g", "i", "j", "value"],
                    &rows,
                )
            })
            .collect()
    }
}

pub fn run_pog(cfg: &ExperimentConfig) -> Result<PogReport> {
    let sec = &cfg.pog;
    let seed = cfg.section_seed(Section::Pog);
    let rc = RepresentationConfig {
        pooling: sec.pooling.build()?,
        normalize: sec.normalize,
    };
    let mut covariance = Vec::new();
    let mut tensors = Vec::new();
    let mut contracts = Vec::new();
    for (ci, case) in sec.cases.iter().enumerate() {
        let action = case.group.build(cfg.max_group_order)?;
        let window = case.window.build(&action)?;
        let bank = sample_templates(&action, sec.templates, substream(seed, 2 * ci as u64))?;
        let mut rng = seeded(substream(seed, 2 * ci as u64 + 1));
        let mut worst: f64 = 0.0;
        for s in 0..sec.signals {
            let x = gaussian_signal(&mut rng, action.dim())?;
            let base = pog_represent(&x, &bank, &action, &window, &rc)?;
            for shift in 0..action.order() {
                let moved = pog_represent(&action.act(shift, &x)?, &bank, &action, &window, &rc)?;
                worst = worst.max(max_covariance_error(&base, &moved, action.group(), shift));
            }
            if s == 0 {
                tensors.push((case.group.label(), base));
            }
        }
        contracts.push(Contract::at_most(
            format!("{} covariance max error", case.group.label()),
            worst,
            sec.covariance_tol,
        ));
        covariance.push(CovarianceResult {
            group: case.group.label(),
            window: case.window.clone(),
            window_size: window.size(),
            signals: sec.signals,
            checks: sec.signals * action.order(),
            max_error: worst,
        });
    }

    let mut rng = seeded(substream(seed, u64::MAX));
    let mut localized = Vec::with_capacity(sec.localized_triples);
    for t in 0..sec.localized_triples {
        let spec = sec.localized_groups[t % sec.localized_groups.len()];
        let eta = sec.localized_etas[t % sec.localized_etas.len()];
        localized.push(localized_triple(spec, eta, cfg, &mut rng)?);
    }
    let max_local_difference = localized.iter().map(|l| l.difference).fold(0.0, f64::max);
    if !localized.is_empty() {
        let unlocalized = localized.iter().filter(|l| !l.localized).count();
        contracts.push(Contract::at_most(
            "triples violating localization",
            unlocalized as f64,
            0.0,
        ));
        contracts.push(Contract::at_most(
            "localized max |psi(I) - psi(gI)|",
            max_local_difference,
            sec.local_invariance_tol,
        ));
    }
    Ok(PogReport {
        header: Header::new(Experiment::Pog, seed),
        covariance,
        localized,
        max_local_difference,
        contracts,
        tensors,
    })
}

/// Draws a window, a non-identity shift and a template, then builds a
/// signal orthogonal to `g·t` on the shifted symmetric difference so that
/// `η(⟨I, g·t⟩) ≈ η(0)` there.
fn localized_triple(
    spec: GroupSpec,
    eta: Nonlinearity,
    cfg: &ExperimentConfig,
    rng: &mut SeededRng,
) -> Result<LocalizedTriple> {
    let sec = &cfg.pog;
    let action = spec.build(cfg.max_group_order)?;
    let (d, n) = (action.dim(), action.order());
    let window_spec = random_window(spec, d, rng);
    let window = window_spec.build(&action)?;
    let shift = rng.random_range(1..n);
    let template = unit_vector(rng, d)?;
    let support = shifted_symmetric_difference(action.group(), &window, shift);
    let signal = orthogonal_signal(&action, &template, &support, rng)?;
    let loc = localization_check(
        &signal,
        &template,
        &action,
        &window,
        shift,
        eta,
        sec.localization_tol,
    )?;
    let inv = local_invariance_check(
        &signal,
        &template,
        &action,
        &window,
        shift,
        eta,
        sec.local_invariance_tol,
    )?;
    Ok(LocalizedTriple {
        group: spec.label(),
        window: window_spec,
        shift,
        eta,
        checked: loc.checked,
        localized: loc.satisfied,
        max_violation: loc.max_violation,
        difference: inv.difference,
    })
}

/// Window with `2·|G₀| < d`, so the symmetric difference leaves room for a
/// nonzero orthogonal signal.
fn random_window(spec: GroupSpec, d: usize, rng: &mut SeededRng) -> WindowSpec {
    let cap = (d - 1) / 2;
    match spec {
        GroupSpec::Cyclic { .. } => WindowSpec::Shifts {
            len: rng.random_range(1..=cap),
        },
        GroupSpec::Torus { p } => loop {
            let (rows, cols) = (rng.random_range(1..=p), rng.random_range(1..=p));
            if rows * cols <= cap {
                break WindowSpec::Rectangle { rows, cols };
            }
        },
    }
}

fn orthogonal_signal(
    action: &GroupAction,
    template: &Signal,
    support: &[usize],
    rng: &mut SeededRng,
) -> Result<Signal> {
    let d = action.dim();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut moved = vec![0.0; d];
    for &g in support {
        action.act_into(g, template.as_slice(), &mut moved);
        let mut v = moved.clone();
        project_out(&mut v, &basis);
        project_out(&mut v, &basis);
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-10 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    let mut x = gaussian_vector(rng, d);
    project_out(&mut x, &basis);
    project_out(&mut x, &basis);
    Ok(Signal::new(x)?)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}
