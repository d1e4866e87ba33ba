//! Kernels on probability laws and the two-layer construction.
//!
//! The first layer maps a signal to its POG tensor of local CDFs, read as an
//! element `Q̄(I)` of `L²(G × T, H)` where `H = R^B` holds the binned-CDF
//! embedding of each local projection law. The inner product is
//! `(1/(N·k)) Σ_{g,t} ⟨h(g,t), h'(g,t)⟩`, and `g̃` acts on the base-point
//! index: `(g̃·h)(g, t) = h(g̃∘g, t)`. A second-layer measurement pools
//! `η(⟨Q̄(I), g·τ⟩)` over a window of group elements.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupAction};
use crate::linalg::min_eigenvalue;
use crate::pog::{pog_represent, PogTensor, PogWindow};
use crate::pooling::{cdf_vector_sorted, BinGrid, Nonlinearity};
use crate::random::{gaussian_vector, seeded};
use crate::representations::{RepresentationConfig, TemplateBank};
use crate::signal::{exact_dot, Signal};

/// Default Gaussian bandwidth for the mean-embedding kernel.
pub const DEFAULT_SIGMA: f64 = 0.2;

/// Probability mass on the `B + 1` cells cut by a grid:
/// `(−∞, b_1], (b_1, b_2], …, (b_B, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    grid: BinGrid,
    mass: Vec<f64>,
}

impl Histogram {
    pub fn new(grid: BinGrid, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != grid.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: grid.len() + 1,
                got: mass.len(),
            });
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidParameter(
                "histogram mass must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if libm::fabs(total - 1.0) > 1e-9 {
            return Err(Error::InvalidParameter(alloc::format!(
                "histogram mass sums to {total}"
            )));
        }
        Ok(Self { grid, mass })
    }

    /// Bins a sample; differences of its empirical CDF on `grid`.
    pub fn from_samples(values: &[f64], grid: &BinGrid) -> Result<Self> {
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let cdf = cdf_vector_sorted(&sorted, grid)?;
        let mut mass = Vec::with_capacity(cdf.len() + 1);
        let mut prev = 0.0;
        for c in cdf {
            mass.push(c - prev);
            prev = c;
        }
        mass.push(1.0 - prev);
        Ok(Self {
            grid: grid.clone(),
            mass,
        })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }
}

/// Bhattacharyya affinity `Σ_x √(p_x q_x)`, the kernel behind the Hellinger
/// distance.
pub fn hellinger_affinity(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.grid != q.grid {
        return Err(Error::GridMismatch);
    }
    Ok(p.mass
        .iter()
        .zip(&q.mass)
        .map(|(a, b)| libm::sqrt(a * b))
        .sum())
}

/// `d_K = √max(0, K(p,p) + K(q,q) − 2K(p,q))` for histogram inputs.
pub fn histogram_pseudometric(p: &Histogram, q: &Histogram) -> Result<f64> {
    let k = hellinger_affinity(p, q)?;
    let (kp, kq) = (hellinger_affinity(p, p)?, hellinger_affinity(q, q)?);
    Ok(libm::sqrt((kp + kq - 2.0 * k).max(0.0)))
}

/// Positive definite kernels on one-dimensional laws given as samples.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKernel {
    /// Hellinger affinity of the histograms on a shared grid.
    Hellinger(BinGrid),
    /// `(1/(N·M)) Σ_{a,b} exp(−(v_a − w_b)² / (2σ²))`.
    MeanEmbedding { sigma: f64 },
}

impl DistributionKernel {
    pub fn eval(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        if p.is_empty() || q.is_empty() {
            return Err(Error::Empty("projection set"));
        }
        match self {
            DistributionKernel::Hellinger(grid) => hellinger_affinity(
                &Histogram::from_samples(p, grid)?,
                &Histogram::from_samples(q, grid)?,
            ),
            DistributionKernel::MeanEmbedding { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "bandwidth must be positive, got {sigma}"
                    )));
                }
                let denom = 2.0 * sigma * sigma;
                let sum: f64 = p
                    .iter()
                    .map(|a| {
                        q.iter()
                            .map(|b| libm::exp(-(a - b) * (a - b) / denom))
                            .sum::<f64>()
                    })
                    .sum();
                Ok(sum / (p.len() * q.len()) as f64)
            }
        }
    }

    pub fn pseudometric(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        let k = self.eval(p, q)?;
        let (kp, kq) = (self.eval(p, p)?, self.eval(q, q)?);
        Ok(libm::sqrt((kp + kq - 2.0 * k).max(0.0)))
    }

    /// Row-major Gram matrix over `laws`.
    pub fn gram<S: AsRef<[f64]>>(&self, laws: &[S]) -> Result<Vec<f64>> {
        let n = laws.len();
        let mut out = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.eval(laws[i].as_ref(), laws[j].as_ref())?;
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(out)
    }

    pub fn gram_min_eigenvalue<S: AsRef<[f64]>>(&self, laws: &[S]) -> Result<f64> {
        min_eigenvalue(&self.gram(laws)?, laws.len())
    }
}

pub fn kernel_eval(kernel: &DistributionKernel, p: &[f64], q: &[f64]) -> Result<f64> {
    kernel.eval(p, q)
}

pub fn kernel_pseudometric(kernel: &DistributionKernel, p: &[f64], q: &[f64]) -> Result<f64> {
    kernel.pseudometric(p, q)
}

/// An element of `L²(G × T, R^B)`, stored `N × k × B` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedRep {
    pub order: usize,
    pub templates: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl EmbeddedRep {
    pub fn new(order: usize, templates: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if order == 0 || templates == 0 || width == 0 {
            return Err(Error::Empty("embedded representation"));
        }
        if values.len() != order * templates * width {
            return Err(Error::DimensionMismatch {
                expected: order * templates * width,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self {
            order,
            templates,
            width,
            values,
        })
    }

    pub fn from_tensor(t: PogTensor) -> Result<Self> {
        Self::new(t.order, t.templates, t.width, t.values)
    }

    fn block(&self) -> usize {
        self.templates * self.width
    }

    pub fn slice(&self, g: usize) -> &[f64] {
        &self.values[g * self.block()..(g + 1) * self.block()]
    }

    pub fn same_shape(&self, other: &EmbeddedRep) -> bool {
        (self.order, self.templates, self.width) == (other.order, other.templates, other.width)
    }

    /// `(1/(N·k)) Σ_{g,t} ⟨h(g,t), h'(g,t)⟩`; order-independent summation.
    pub fn inner(&self, other: &EmbeddedRep) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(exact_dot(&self.values, &other.values) / (self.order * self.templates) as f64)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(exact_dot(&self.values, &self.values) / (self.order * self.templates) as f64)
    }

    /// `(g̃·h)(g, t) = h(g̃∘g, t)`.
    pub fn act(&self, group: &FiniteGroup, shift: usize) -> Result<EmbeddedRep> {
        if group.order() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: group.order(),
            });
        }
        if shift >= self.order {
            return Err(Error::ElementOutOfRange {
                index: shift,
                order: self.order,
            });
        }
        let mut values = alloc::vec![0.0; self.values.len()];
        let b = self.block();
        for g in 0..self.order {
            let src = group.compose(shift, g);
            values[g * b..(g + 1) * b].copy_from_slice(self.slice(src));
        }
        Ok(EmbeddedRep { values, ..*self })
    }

    pub fn max_abs_diff(&self, other: &EmbeddedRep) -> f64 {
        if !self.same_shape(other) {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }
}

/// First-layer embedding `Q̄(I)`: the POG tensor of local CDFs.
pub fn embed_layer1(
    signal: &Signal,
    bank: &TemplateBank,
    action: &GroupAction,
    window: &PogWindow,
    cfg: &RepresentationConfig,
) -> Result<EmbeddedRep> {
    EmbeddedRep::from_tensor(pog_represent(signal, bank, action, window, cfg)?)
}

/// Unit-norm second-layer template `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondLayerTemplate {
    rep: EmbeddedRep,
}

pub const TEMPLATE_NORM_TOL: f64 = 1e-12;

impl SecondLayerTemplate {
    /// Accepts `rep` only if it already has unit norm.
    pub fn new(rep: EmbeddedRep) -> Result<Self> {
        let n = rep.norm();
        if libm::fabs(n - 1.0) > TEMPLATE_NORM_TOL {
            return Err(Error::NotUnitNorm(n));
        }
        Ok(Self { rep })
    }

    /// `rep / ‖rep‖`.
    pub fn normalized(rep: EmbeddedRep) -> Result<Self> {
        let n = rep.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero embedding".into(),
            ));
        }
        let values = rep.values.iter().map(|v| v / n).collect();
        Self::new(EmbeddedRep { values, ..rep })
    }

    /// Gaussian direction of the given shape, normalized.
    pub fn random(order: usize, templates: usize, width: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        Self::normalized(EmbeddedRep::new(
            order,
            templates,
            width,
            gaussian_vector(&mut rng, order * templates * width),
        )?)
    }

    pub fn rep(&self) -> &EmbeddedRep {
        &self.rep
    }
}

/// Pools `η(⟨Q, g·τ⟩)` over `g ∈ window`. The pooled values are summed in
/// sorted order.
pub fn second_layer_from_embedding(
    q: &EmbeddedRep,
    tau: &SecondLayerTemplate,
    group: &FiniteGroup,
    window: &PogWindow,
    eta: Nonlinearity,
) -> Result<f64> {
    if !q.same_shape(&tau.rep) {
        return Err(Error::DimensionMismatch {
            expected: q.values.len(),
            got: tau.rep.values.len(),
        });
    }
    let mut pooled = window
        .members()
        .iter()
        .map(|&g| Ok(eta.apply(q.inner(&tau.rep.act(group, g)?)?)))
        .collect::<Result<Vec<f64>>>()?;
    pooled.sort_unstable_by(f64::total_cmp);
    Ok(pooled.iter().sum::<f64>() / pooled.len() as f64)
}

/// `v(I) = (1/|w₂|) Σ_{g ∈ w₂} η(⟨Q̄(I), g·τ⟩)` with `Q̄` built on window `w₁`.
#[allow(clippy::too_many_arguments)]
pub fn second_layer_measurement(
    signal: &Signal,
    bank: &TemplateBank,
    action: &GroupAction,
    layer1_window: &PogWindow,
    layer2_window: &PogWindow,
    tau: &SecondLayerTemplate,
    eta: Nonlinearity,
    cfg: &RepresentationConfig,
) -> Result<f64> {
    let q = embed_layer1(signal, bank, action, layer1_window, cfg)?;
    second_layer_from_embedding(&q, tau, action.group(), layer2_window, eta)
}

/// Layer-2 templates from embedded layer-1 outputs of `samples`; the seed
/// picks which samples are used.
pub fn make_layer2_templates(
    seed: u64,
    count: usize,
    bank: &TemplateBank,
    action: &GroupAction,
    window: &PogWindow,
    cfg: &RepresentationConfig,
    samples: &[Signal],
) -> Result<Vec<SecondLayerTemplate>> {
    if samples.is_empty() {
        return Err(Error::Empty("sample signals"));
    }
    if count > samples.len() {
        return Err(Error::InvalidParameter(alloc::format!(
            "requested {count} templates from {} samples",
            samples.len()
        )));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut seeded(seed));
    order
        .into_iter()
        .take(count)
        .map(|i| {
            SecondLayerTemplate::normalized(embed_layer1(&samples[i], bank, action, window, cfg)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::make_cyclic_group;
    use crate::random::gaussian_signal;
    use crate::representations::{represent, sample_templates};
    use alloc::vec;

    #[test]
    fn hellinger_self_affinity_is_one() {
        let grid = BinGrid::uniform(8, 1.0).unwrap();
        let h = Histogram::from_samples(&[-0.3, 0.1, 0.1, 0.9, 2.0], &grid).unwrap();
        assert!((hellinger_affinity(&h, &h).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hellinger_disjoint_is_sqrt2() {
        let grid = BinGrid::new(vec![0.0]).unwrap();
        let p = Histogram::new(grid.clone(), vec![1.0, 0.0]).unwrap();
        let q = Histogram::new(grid, vec![0.0, 1.0]).unwrap();
        assert_eq!(hellinger_affinity(&p, &q).unwrap(), 0.0);
        assert_eq!(histogram_pseudometric(&p, &q).unwrap(), libm::sqrt(2.0));
    }

    #[test]
    fn hellinger_grid_mismatch() {
        let p = Histogram::from_samples(&[0.0], &BinGrid::uniform(4, 1.0).unwrap()).unwrap();
        let q = Histogram::from_samples(&[0.0], &BinGrid::uniform(5, 1.0).unwrap()).unwrap();
        assert_eq!(hellinger_affinity(&p, &q), Err(Error::GridMismatch));
    }

    #[test]
    fn mean_embedding_examples() {
        let k = DistributionKernel::MeanEmbedding { sigma: 1.0 };
        assert_eq!(k.eval(&[0.0], &[0.0]).unwrap(), 1.0);
        assert!((k.eval(&[0.0], &[1.0]).unwrap() - libm::exp(-0.5)).abs() < 1e-15);
        assert!(DistributionKernel::MeanEmbedding { sigma: 0.0 }
            .eval(&[0.0], &[0.0])
            .is_err());
        assert_eq!(k.pseudometric(&[0.2, 0.4], &[0.2, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn histogram_validation() {
        let grid = BinGrid::new(vec![0.0]).unwrap();
        assert!(Histogram::new(grid.clone(), vec![0.5]).is_err());
        assert!(Histogram::new(grid.clone(), vec![0.7, 0.7]).is_err());
        assert!(Histogram::new(grid, vec![-0.5, 1.5]).is_err());
    }

    #[test]
    fn layer1_full_window_rows_identical() {
        let act = make_cyclic_group(6).unwrap();
        let bank = sample_templates(&act, 3, 2).unwrap();
        let mut rng = seeded(3);
        let x = gaussian_signal(&mut rng, 6).unwrap();
        let q = embed_layer1(
            &x,
            &bank,
            &act,
            &PogWindow::full(act.group()),
            &RepresentationConfig::default(),
        )
        .unwrap();
        for g in 1..6 {
            assert_eq!(q.slice(g), q.slice(0));
        }
    }

    #[test]
    fn layer1_trivial_group_single_template() {
        let act = make_cyclic_group(1).unwrap();
        let bank = TemplateBank::new(&act, vec![Signal::new(vec![1.0]).unwrap()]).unwrap();
        let grid = BinGrid::uniform(5, 1.0).unwrap();
        let cfg = RepresentationConfig {
            pooling: crate::representations::Pooling::Cdf(grid.clone()),
            normalize: false,
        };
        let q = embed_layer1(
            &Signal::new(vec![0.1]).unwrap(),
            &bank,
            &act,
            &PogWindow::full(act.group()),
            &cfg,
        )
        .unwrap();
        assert_eq!(q.values, crate::pooling::cdf_vector(&[0.1], &grid).unwrap());
    }

    #[test]
    fn template_norms_and_errors() {
        let t = SecondLayerTemplate::random(4, 2, 3, 1).unwrap();
        assert!((t.rep().norm() - 1.0).abs() <= 1e-12);
        let bad = EmbeddedRep::new(1, 1, 2, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            SecondLayerTemplate::new(bad),
            Err(Error::NotUnitNorm(_))
        ));
        let zero = EmbeddedRep::new(1, 1, 2, vec![0.0, 0.0]).unwrap();
        assert!(SecondLayerTemplate::normalized(zero).is_err());
    }

    #[test]
    fn second_layer_full_window_invariance() {
        let act = make_cyclic_group(8).unwrap();
        let bank = sample_templates(&act, 3, 4).unwrap();
        let cfg = RepresentationConfig {
            pooling: crate::representations::Pooling::Cdf(BinGrid::uniform(8, 1.0).unwrap()),
            normalize: true,
        };
        let w1 = PogWindow::shifts(&act, 3).unwrap();
        let w2 = PogWindow::full(act.group());
        let tau = SecondLayerTemplate::random(8, 3, 8, 9).unwrap();
        let eta = Nonlinearity::Sigmoid { b: 0.2, slope: 4.0 };
        let mut rng = seeded(40);
        let x = gaussian_signal(&mut rng, 8).unwrap();
        let v = second_layer_measurement(&x, &bank, &act, &w1, &w2, &tau, eta, &cfg).unwrap();
        for g in 0..8 {
            let moved = act.act(g, &x).unwrap();
            let vg =
                second_layer_measurement(&moved, &bank, &act, &w1, &w2, &tau, eta, &cfg).unwrap();
            assert!((v - vg).abs() <= 1e-12);
        }
    }

    #[test]
    fn composition_reduces_to_single_layer() {
        let act = make_cyclic_group(1).unwrap();
        let templates = crate::representations::sample_unit_vectors(1, 2, 5).unwrap();
        let bank = TemplateBank::new(&act, templates).unwrap();
        let cfg = RepresentationConfig::default();
        let full = PogWindow::full(act.group());
        let x = Signal::new(vec![-0.8]).unwrap();
        let tau = SecondLayerTemplate::random(1, 2, cfg.pooling.width(), 3).unwrap();
        let eta = Nonlinearity::Sigmoid { b: 0.0, slope: 3.0 };
        let v = second_layer_measurement(&x, &bank, &act, &full, &full, &tau, eta, &cfg).unwrap();
        let rep = represent(&x, &bank, &cfg).unwrap();
        let dot: f64 = rep
            .values
            .iter()
            .zip(&tau.rep().values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / 2.0;
        assert!((v - eta.apply(dot)).abs() <= 1e-12);
    }

    #[test]
    fn layer2_templates_are_deterministic_and_distinct() {
        let act = make_cyclic_group(6).unwrap();
        let bank = sample_templates(&act, 2, 1).unwrap();
        let w = PogWindow::shifts(&act, 2).unwrap();
        let cfg = RepresentationConfig::default();
        let mut rng = seeded(2);
        let samples: Vec<Signal> = (0..5)
            .map(|_| gaussian_signal(&mut rng, 6).unwrap())
            .collect();
        let a = make_layer2_templates(7, 3, &bank, &act, &w, &cfg, &samples).unwrap();
        let b = make_layer2_templates(7, 3, &bank, &act, &w, &cfg, &samples).unwrap();
        assert_eq!(a, b);
        for t in &a {
            assert!((t.rep().norm() - 1.0).abs() <= 1e-12);
        }
        assert!(a[0] != a[1] && a[1] != a[2] && a[0] != a[2]);
        assert!(make_layer2_templates(7, 6, &bank, &act, &w, &cfg, &samples).is_err());
        assert!(make_layer2_templates(7, 1, &bank, &act, &w, &cfg, &[]).is_err());
    }
}
