use irep_core::groups::GroupAction;
use irep_core::hierarchy::{
    embed_layer1, make_layer2_templates, second_layer_from_embedding, DistributionKernel,
};
use irep_core::linalg::min_eigenvalue;
use irep_core::pooling::{BinGrid, Nonlinearity};
use irep_core::random::{gaussian_signal, seeded, substream, unit_vector, SeededRng};
use irep_core::representations::{project_signal_orbit, sample_templates, RepresentationConfig};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Experiment, Header};
use crate::config::{ExperimentConfig, Section};
use crate::error::{Error, Result};
use crate::report::Contract;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer2Result {
    pub eta: Nonlinearity,
    pub max_error: f64,
    pub mean_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelResult {
    pub kernel: String,
    pub laws: usize,
    pub min_eigenvalue_jacobi: f64,
    pub min_eigenvalue_nalgebra: f64,
    pub triples: usize,
    /// `max(d(p,q) − d(p,r) − d(r,q))` over all orderings of each triple.
    pub max_triangle_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    #[serde(flatten)]
    pub header: Header,
    pub group: String,
    pub layer1_window_size: usize,
    pub layer2_window_size: usize,
    pub signals: usize,
    pub taus: usize,
    pub layer1_covariance_max_error: f64,
    pub layer2: Vec<Layer2Result>,
    pub kernels: Vec<KernelResult>,
    pub contracts: Vec<Contract>,
}

impl HierarchyReport {
    pub fn layer2_max_error(&self) -> f64 {
        self.layer2.iter().map(|l| l.max_error).fold(0.0, f64::max)
    }
}

/// Smallest eigenvalue of a row-major symmetric matrix via nalgebra.
pub fn nalgebra_min_eigenvalue(a: &[f64], n: usize) -> Result<f64> {
    if a.len() != n * n || n == 0 {
        return Err(Error::Numeric(format!(
            "expected a nonempty {n}x{n} matrix, got {} entries",
            a.len()
        )));
    }
    let m = DMatrix::from_row_slice(n, n, a);
    Ok(m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

pub fn run_hierarchy(cfg: &ExperimentConfig) -> Result<HierarchyReport> {
    let sec = &cfg.hierarchy;
    let seed = cfg.section_seed(Section::Hierarchy);
    let action = sec.group.build(cfg.max_group_order)?;
    let group = action.group();
    let w1 = sec.layer1_window.build(&action)?;
    let w2 = sec.layer2_window.build(&action)?;
    let rc = RepresentationConfig {
        pooling: sec.pooling.build()?,
        normalize: sec.normalize,
    };
    let bank = sample_templates(&action, sec.templates, substream(seed, 0))?;

    let mut rng = seeded(substream(seed, 1));
    let samples = (0..sec.tau_samples)
        .map(|_| gaussian_signal(&mut rng, action.dim()))
        .collect::<std::result::Result<Vec<_>, irep_core::Error>>()?;
    let taus = make_layer2_templates(
        substream(seed, 2),
        sec.taus,
        &bank,
        &action,
        &w1,
        &rc,
        &samples,
    )?;

    let mut rng = seeded(substream(seed, 3));
    let mut covariance: f64 = 0.0;
    let mut layer2: Vec<Layer2Result> = sec
        .etas
        .iter()
        .map(|&eta| Layer2Result {
            eta,
            max_error: 0.0,
            mean_value: 0.0,
        })
        .collect();
    for _ in 0..sec.signals {
        let x = gaussian_signal(&mut rng, action.dim())?;
        let q = embed_layer1(&x, &bank, &action, &w1, &rc)?;
        let base: Vec<Vec<f64>> = layer2
            .iter()
            .map(|l| {
                taus.iter()
                    .map(|tau| second_layer_from_embedding(&q, tau, group, &w2, l.eta))
                    .collect()
            })
            .collect::<std::result::Result<_, irep_core::Error>>()?;
        for (l, b) in layer2.iter_mut().zip(&base) {
            l.mean_value += b.iter().sum::<f64>();
        }
        for shift in 0..action.order() {
            let moved = embed_layer1(&action.act(shift, &x)?, &bank, &action, &w1, &rc)?;
            covariance = covariance.max(moved.max_abs_diff(&q.act(group, group.inverse(shift))?));
            for (l, b) in layer2.iter_mut().zip(&base) {
                for (tau, v) in taus.iter().zip(b) {
                    let v2 = second_layer_from_embedding(&moved, tau, group, &w2, l.eta)?;
                    l.max_error = l.max_error.max((v2 - v).abs());
                }
            }
        }
    }
    for l in &mut layer2 {
        l.mean_value /= (sec.signals * taus.len()) as f64;
    }

    let mut contracts = vec![Contract::at_most(
        "layer-1 covariance max error",
        covariance,
        sec.covariance_tol,
    )];
    if w2.size() == action.order() {
        for l in &layer2 {
            let tol = match l.eta {
                Nonlinearity::Sigmoid { .. } => sec.smooth_invariance_tol,
                _ => sec.invariance_tol,
            };
            contracts.push(Contract::at_most(
                format!("layer-2 invariance {}", eta_name(&l.eta)),
                l.max_error,
                tol,
            ));
        }
    }

    let kernels = kernel_checks(cfg, &action, substream(seed, 4))?;
    for k in &kernels {
        contracts.push(Contract::at_least(
            format!("{} gram min eigenvalue", k.kernel),
            k.min_eigenvalue_jacobi,
            -sec.psd_tol,
        ));
        contracts.push(Contract::at_most(
            format!("{} eigenvalue cross-check", k.kernel),
            (k.min_eigenvalue_jacobi - k.min_eigenvalue_nalgebra).abs(),
            sec.psd_tol,
        ));
        contracts.push(Contract::at_most(
            format!("{} triangle excess", k.kernel),
            k.max_triangle_excess,
            sec.triangle_tol,
        ));
    }

    Ok(HierarchyReport {
        header: Header::new(Experiment::Hierarchy, seed),
        group: sec.group.label(),
        layer1_window_size: w1.size(),
        layer2_window_size: w2.size(),
        signals: sec.signals,
        taus: taus.len(),
        layer1_covariance_max_error: covariance,
        layer2,
        kernels,
        contracts,
    })
}

fn eta_name(eta: &Nonlinearity) -> &'static str {
    match eta {
        Nonlinearity::Threshold { .. } => "threshold",
        Nonlinearity::Sigmoid { .. } => "sigmoid",
        Nonlinearity::AbsPower { .. } => "abs_power",
        Nonlinearity::Identity => "identity",
    }
}

/// A random one-dimensional projection law: the orbit projections of a
/// random unit signal onto a random unit template.
fn random_law(action: &GroupAction, rng: &mut SeededRng) -> Result<Vec<f64>> {
    let x = unit_vector(rng, action.dim())?;
    let t = unit_vector(rng, action.dim())?;
    Ok(project_signal_orbit(&x, action, &t)?.values().to_vec())
}

fn kernel_checks(
    cfg: &ExperimentConfig,
    action: &GroupAction,
    seed: u64,
) -> Result<Vec<KernelResult>> {
    let sec = &cfg.hierarchy;
    let grid = BinGrid::uniform(sec.hellinger_bins, sec.hellinger_range)?;
    let kernels = [
        ("hellinger", DistributionKernel::Hellinger(grid)),
        (
            "mean_embedding",
            DistributionKernel::MeanEmbedding { sigma: sec.sigma },
        ),
    ];
    let mut rng = seeded(seed);
    let laws = (0..sec.laws)
        .map(|_| random_law(action, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let triples = (0..sec.triples)
        .map(|_| {
            Ok([
                random_law(action, &mut rng)?,
                random_law(action, &mut rng)?,
                random_law(action, &mut rng)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    kernels
        .into_iter()
        .map(|(name, kernel)| {
            let gram = kernel.gram(&laws)?;
            let mut excess = f64::NEG_INFINITY;
            for [a, b, c] in &triples {
                let (ab, ac, bc) = (
                    kernel.pseudometric(a, b)?,
                    kernel.pseudometric(a, c)?,
                    kernel.pseudometric(b, c)?,
                );
                excess = excess.max(ab - ac - bc).max(ac - ab - bc).max(bc - ab - ac);
            }
            Ok(KernelResult {
                kernel: name.into(),
                laws: laws.len(),
                min_eigenvalue_jacobi: min_eigenvalue(&gram, laws.len())?,
                min_eigenvalue_nalgebra: nalgebra_min_eigenvalue(&gram, laws.len())?,
                triples: triples.len(),
                max_triangle_excess: if triples.is_empty() { 0.0 } else { excess },
            })
        })
        .collect()
}
