//! Orbit metrics: the exact Kolmogorov–Smirnov distance between projection
//! laws, its template average (the sliced distance) and the finite-template
//! concentration experiment.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::groups::GroupAction;
use crate::random::{gaussian_signal, seeded, substream};
use crate::representations::{
    orbit_equivalent, project_orbit, sample_unit_vectors, OrbitProjection, TemplateBank,
};
use crate::signal::Signal;

/// Sup-norm distance between the empirical CDFs of two ascending-sorted
/// samples, found by merging (no binning). Uses exact integer arithmetic on
/// the step heights, so the result is symmetric bit-for-bit.
pub fn ks_sorted(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("projection set"));
    }
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: u128 = 0;
    while i < n && j < m {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        let gap = (i as u128 * m as u128).abs_diff(j as u128 * n as u128);
        best = best.max(gap);
    }
    // Once one sample is exhausted the gap only shrinks.
    Ok(best as f64 / (n as f64 * m as f64))
}

pub fn ks_distance(p: &OrbitProjection, q: &OrbitProjection) -> Result<f64> {
    ks_sorted(p.values(), q.values())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlicedDistanceReport {
    pub d_hat: f64,
    pub per_template: Vec<f64>,
    pub k: usize,
    pub reference: Option<f64>,
}

fn prepare(signal: &Signal, normalize: bool) -> Signal {
    if normalize {
        signal.normalized()
    } else {
        signal.clone()
    }
}

/// `d̂(I, I') = (1/k) Σ_i KS(ρ_I^{t_i}, ρ_{I'}^{t_i})` over the bank.
pub fn sliced_distance(
    a: &Signal,
    b: &Signal,
    bank: &TemplateBank,
    normalize: bool,
) -> Result<SlicedDistanceReport> {
    let (a, b) = (prepare(a, normalize), prepare(b, normalize));
    let per_template = (0..bank.len())
        .map(|i| ks_distance(&project_orbit(&a, bank, i)?, &project_orbit(&b, bank, i)?))
        .collect::<Result<Vec<_>>>()?;
    let d_hat = per_template.iter().sum::<f64>() / per_template.len() as f64;
    Ok(SlicedDistanceReport {
        d_hat,
        k: per_template.len(),
        per_template,
        reference: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PseudoMetricReport {
    pub signals: usize,
    pub pairs: usize,
    pub triples: usize,
    pub symmetry_violations: usize,
    /// Unordered triples where any of the three triangle inequalities fails
    /// by more than [`TRIANGLE_TOL`].
    pub triangle_violations: usize,
    /// Pairs where `d̂ ≤ zero_tol` disagrees with the orbit oracle.
    pub zero_equivalence_mismatches: usize,
    /// Row-major `n × n` distance matrix.
    pub distances: Vec<f64>,
}

pub const TRIANGLE_TOL: f64 = 1e-12;

/// Checks symmetry, the triangle inequality and `d̂ = 0 ⇔ I ∼ I'` over all
/// pairs and triples of `signals`.
pub fn pseudo_metric_check(
    signals: &[Signal],
    bank: &TemplateBank,
    action: &GroupAction,
    normalize: bool,
    oracle_tol: f64,
    zero_tol: f64,
) -> Result<PseudoMetricReport> {
    let n = signals.len();
    if n < 3 {
        return Err(Error::InvalidParameter(
            "pseudo-metric check needs at least 3 signals".into(),
        ));
    }
    let prepared: Vec<Signal> = signals.iter().map(|s| prepare(s, normalize)).collect();
    let projections = prepared
        .iter()
        .map(|s| {
            (0..bank.len())
                .map(|i| project_orbit(s, bank, i))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut distances = alloc::vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let sum: f64 = (0..bank.len())
                .map(|i| ks_distance(&projections[a][i], &projections[b][i]))
                .sum::<Result<f64>>()?;
            distances[a * n + b] = sum / bank.len() as f64;
        }
    }
    let d = |a: usize, b: usize| distances[a * n + b];
    let mut report = PseudoMetricReport {
        signals: n,
        pairs: n * (n - 1) / 2,
        triples: n * (n - 1) * (n - 2) / 6,
        symmetry_violations: 0,
        triangle_violations: 0,
        zero_equivalence_mismatches: 0,
        distances: Vec::new(),
    };
    for a in 0..n {
        for b in a + 1..n {
            if d(a, b) != d(b, a) {
                report.symmetry_violations += 1;
            }
            let equivalent = orbit_equivalent(&prepared[a], &prepared[b], action, oracle_tol)?;
            if (d(a, b) <= zero_tol) != equivalent {
                report.zero_equivalence_mismatches += 1;
            }
            for c in b + 1..n {
                let (ab, bc, ac) = (d(a, b), d(b, c), d(a, c));
                if ab > ac + bc + TRIANGLE_TOL
                    || bc > ab + ac + TRIANGLE_TOL
                    || ac > ab + bc + TRIANGLE_TOL
                {
                    report.triangle_violations += 1;
                }
            }
        }
    }
    report.distances = distances;
    Ok(report)
}

/// Parameters of the finite-template concentration experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationConfig {
    pub n: usize,
    /// Estimator template count; `None` uses [`concentration_bound`].
    pub k: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
    /// Constant `c` in the template bound.
    pub c: f64,
    /// Reference bank size; `None` means `50·k`.
    pub k_ref: Option<usize>,
    pub seed: u64,
    pub normalize: bool,
    /// Reference templates processed per batch.
    pub chunk: usize,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            n: 20,
            k: None,
            epsilon: 0.1,
            delta: 0.1,
            c: 1.0,
            k_ref: None,
            seed: 3,
            normalize: true,
            chunk: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairDeviation {
    pub a: usize,
    pub b: usize,
    pub reference: f64,
    pub estimate: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationReport {
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
    pub pair_deviations: Vec<PairDeviation>,
}

/// `⌈(2 / (c ε²)) · ln(n / δ)⌉`, at least 1.
pub fn concentration_bound(n: usize, epsilon: f64, delta: f64, c: f64) -> Result<usize> {
    if !(epsilon > 0.0 && delta > 0.0 && delta < 1.0 && c > 0.0) || n < 2 {
        return Err(Error::Config(
            "bound requires n ≥ 2, ε > 0, 0 < δ < 1, c > 0".into(),
        ));
    }
    let k = libm::ceil(2.0 / (c * epsilon * epsilon) * libm::log(n as f64 / delta));
    Ok((k as usize).max(1))
}

/// Per-pair sum of KS distances over one batch of templates.
fn accumulate_pairs(signals: &[Signal], bank: &TemplateBank, sums: &mut [f64]) -> Result<()> {
    let n = signals.len();
    for i in 0..bank.len() {
        let proj = signals
            .iter()
            .map(|s| project_orbit(s, bank, i))
            .collect::<Result<Vec<_>>>()?;
        let mut p = 0;
        for a in 0..n {
            for b in a + 1..n {
                sums[p] += ks_distance(&proj[a], &proj[b])?;
                p += 1;
            }
        }
    }
    Ok(())
}

/// Mean per-pair sliced distance over `count` fresh templates drawn from
/// `seed`, generated and consumed in batches of `chunk`.
pub fn pairwise_sliced_distances(
    signals: &[Signal],
    action: &GroupAction,
    count: usize,
    seed: u64,
    chunk: usize,
) -> Result<Vec<f64>> {
    let n = signals.len();
    let mut sums = alloc::vec![0.0; n * (n - 1) / 2];
    let chunk = chunk.max(1);
    let mut done = 0;
    let mut batch = 0u64;
    while done < count {
        let size = chunk.min(count - done);
        let templates = sample_unit_vectors(action.dim(), size, substream(seed, batch))?;
        accumulate_pairs(signals, &TemplateBank::new(action, templates)?, &mut sums)?;
        done += size;
        batch += 1;
    }
    Ok(sums.into_iter().map(|s| s / count as f64).collect())
}

/// Draws `cfg.n` Gaussian signals and runs [`concentration_on`].
pub fn concentration_experiment(
    action: &GroupAction,
    cfg: &ConcentrationConfig,
) -> Result<ConcentrationReport> {
    let mut rng = seeded(substream(cfg.seed, 0));
    let signals = (0..cfg.n)
        .map(|_| gaussian_signal(&mut rng, action.dim()))
        .collect::<Result<Vec<_>>>()?;
    concentration_on(&signals, action, cfg)
}

/// Compares the `k`-template estimate `d̂` against a `k_ref`-template
/// reference for every pair of `signals` and counts pairs with
/// `|d − d̂| > ε`.
pub fn concentration_on(
    signals: &[Signal],
    action: &GroupAction,
    cfg: &ConcentrationConfig,
) -> Result<ConcentrationReport> {
    let n = signals.len();
    if n < 2 {
        return Err(Error::Config(
            "concentration experiment needs n ≥ 2 signals".into(),
        ));
    }
    let bound_k = concentration_bound(n, cfg.epsilon, cfg.delta, cfg.c)?;
    let k = cfg.k.unwrap_or(bound_k);
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    let k_ref = cfg.k_ref.unwrap_or(50 * k);
    if k_ref <= k {
        return Err(Error::Config(alloc::format!(
            "reference bank size {k_ref} must exceed k = {k}"
        )));
    }
    let prepared: Vec<Signal> = signals.iter().map(|s| prepare(s, cfg.normalize)).collect();
    let estimate =
        pairwise_sliced_distances(&prepared, action, k, substream(cfg.seed, 1), cfg.chunk)?;
    let reference =
        pairwise_sliced_distances(&prepared, action, k_ref, substream(cfg.seed, 2), cfg.chunk)?;

    let mut pair_deviations = Vec::with_capacity(estimate.len());
    let mut p = 0;
    for a in 0..n {
        for b in a + 1..n {
            let deviation = libm::fabs(reference[p] - estimate[p]);
            pair_deviations.push(PairDeviation {
                a,
                b,
                reference: reference[p],
                estimate: estimate[p],
                deviation,
            });
            p += 1;
        }
    }
    let pairs = pair_deviations.len();
    let violations = pair_deviations
        .iter()
        .filter(|d| d.deviation > cfg.epsilon)
        .count();
    let max_deviation = pair_deviations
        .iter()
        .map(|d| d.deviation)
        .fold(0.0, f64::max);
    let rms_deviation = libm::sqrt(
        pair_deviations
            .iter()
            .map(|d| d.deviation * d.deviation)
            .sum::<f64>()
            / pairs as f64,
    );
    Ok(ConcentrationReport {
        n,
        k,
        k_ref,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        c: cfg.c,
        bound_k,
        pairs,
        violations,
        violation_fraction: violations as f64 / pairs as f64,
        max_deviation,
        rms_deviation,
        pair_deviations,
    })
}
