//! Orbit projections onto template banks and the invariant CDF / moment
//! representations computed from them.
//!
//! A template bank stores, for every template `t`, its full orbit
//! `{g·t : g ∈ G}`. Projecting a signal `I` onto that orbit gives the
//! multiset `{⟨I, g·t⟩}_g`, the empirical law of the one-dimensional
//! projection of the orbit of `I` along `t`. Any statistic of that multiset
//! is invariant to `I ↦ g·I`; the CDF sampled on a grid and the truncated
//! absolute moments are the two statistics provided here.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::groups::{GroupAction, GroupKind};
use crate::pooling::{cdf_vector_sorted, moment_vector, sigmoid_vector, BinGrid, MomentVector};
use crate::random::{seeded, unit_vector};
use crate::signal::{exact_dot, exact_dot_with_max, max_abs, Signal};

/// Tolerance on template norms.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// `k` unit-norm templates together with their orbits under a group action.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    dim: usize,
    order: usize,
    kind: GroupKind,
    templates: Vec<Signal>,
    /// `k × N × d`, `expanded[i][g] = g·t_i`.
    expanded: Vec<f64>,
}

impl TemplateBank {
    pub fn new(action: &GroupAction, templates: Vec<Signal>) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::Empty("template bank"));
        }
        let (dim, order) = (action.dim(), action.order());
        let mut expanded = alloc::vec![0.0; templates.len() * order * dim];
        for (i, t) in templates.iter().enumerate() {
            t.check_dim(dim)?;
            let norm = t.norm();
            if libm::fabs(norm - 1.0) > UNIT_NORM_TOL {
                return Err(Error::NotUnitNorm(norm));
            }
            for g in 0..order {
                let start = (i * order + g) * dim;
                action.act_into(g, t.as_slice(), &mut expanded[start..start + dim]);
            }
        }
        Ok(Self {
            dim,
            order,
            kind: action.kind(),
            templates,
            expanded,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Group order `N` the bank was expanded with.
    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn group_kind(&self) -> GroupKind {
        self.kind
    }

    pub fn templates(&self) -> &[Signal] {
        &self.templates
    }

    pub fn template(&self, i: usize) -> Result<&Signal> {
        self.templates.get(i).ok_or(Error::TemplateOutOfRange {
            index: i,
            count: self.len(),
        })
    }

    /// `g·t_i` as a slice.
    #[inline]
    pub fn transformed(&self, i: usize, g: usize) -> &[f64] {
        let start = (i * self.order + g) * self.dim;
        &self.expanded[start..start + self.dim]
    }

    fn check(&self, signal: &Signal, i: usize) -> Result<()> {
        signal.check_dim(self.dim)?;
        if i >= self.len() {
            return Err(Error::TemplateOutOfRange {
                index: i,
                count: self.len(),
            });
        }
        Ok(())
    }

    /// `[⟨I, g·t_i⟩ for g in 0..N]`, indexed by group element.
    pub fn responses(&self, signal: &Signal, i: usize) -> Result<Vec<f64>> {
        self.check(signal, i)?;
        let x = signal.as_slice();
        let (mx, mt) = (max_abs(x), max_abs(self.transformed(i, 0)));
        Ok((0..self.order)
            .map(|g| exact_dot_with_max(x, self.transformed(i, g), mx, mt))
            .collect())
    }
}

/// `k` i.i.d. uniform unit vectors in `R^d`, deterministic per seed.
pub fn sample_unit_vectors(dim: usize, count: usize, seed: u64) -> Result<Vec<Signal>> {
    if dim == 0 || count == 0 {
        return Err(Error::InvalidParameter(
            "template dimension and count must be positive".into(),
        ));
    }
    let mut rng = seeded(seed);
    (0..count).map(|_| unit_vector(&mut rng, dim)).collect()
}

/// Random template bank for `action`.
pub fn sample_templates(action: &GroupAction, count: usize, seed: u64) -> Result<TemplateBank> {
    TemplateBank::new(action, sample_unit_vectors(action.dim(), count, seed)?)
}

/// Sorted multiset `{⟨I, g·t_i⟩ : g ∈ G}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitProjection {
    template: usize,
    values: Vec<f64>,
}

impl OrbitProjection {
    /// Sorts `values` ascending.
    pub fn from_values(template: usize, mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("projection set"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { template, values })
    }

    pub fn template(&self) -> usize {
        self.template
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cdf(&self, grid: &BinGrid) -> Vec<f64> {
        cdf_vector_sorted(&self.values, grid).expect("projection is nonempty")
    }

    pub fn moments(&self, order: usize) -> Result<MomentVector> {
        moment_vector(&self.values, order)
    }
}

pub fn project_orbit(signal: &Signal, bank: &TemplateBank, i: usize) -> Result<OrbitProjection> {
    OrbitProjection::from_values(i, bank.responses(signal, i)?)
}

/// The same multiset computed from the signal side, `{⟨g·I, t⟩ : g ∈ G}`.
/// Equals [`project_orbit`] for unitary actions.
pub fn project_signal_orbit(
    signal: &Signal,
    action: &GroupAction,
    template: &Signal,
) -> Result<OrbitProjection> {
    signal.check_dim(action.dim())?;
    template.check_dim(action.dim())?;
    let mut moved = alloc::vec![0.0; action.dim()];
    let values = (0..action.order())
        .map(|g| {
            action.act_into(g, signal.as_slice(), &mut moved);
            exact_dot(&moved, template.as_slice())
        })
        .collect();
    OrbitProjection::from_values(0, values)
}

/// How each projection law is summarized.
#[derive(Debug, Clone, PartialEq)]
pub enum Pooling {
    /// Threshold pooling: the CDF sampled on the grid.
    Cdf(BinGrid),
    /// Sigmoid surrogate of the threshold at every grid point.
    Sigmoid { grid: BinGrid, slope: f64 },
    /// Truncated absolute moments of order `1..=order`.
    Moments { order: usize },
}

impl Pooling {
    /// Number of features produced per template.
    pub fn width(&self) -> usize {
        match self {
            Pooling::Cdf(grid) | Pooling::Sigmoid { grid, .. } => grid.len(),
            Pooling::Moments { order } => *order,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pooling::Cdf(_) => "cdf",
            Pooling::Sigmoid { .. } => "sigmoid",
            Pooling::Moments { .. } => "moments",
        }
    }

    pub fn grid(&self) -> Option<&BinGrid> {
        match self {
            Pooling::Cdf(grid) | Pooling::Sigmoid { grid, .. } => Some(grid),
            Pooling::Moments { .. } => None,
        }
    }

    /// Pools a sorted projection multiset.
    pub fn pool_sorted(&self, sorted: &[f64]) -> Result<Vec<f64>> {
        match self {
            Pooling::Cdf(grid) => cdf_vector_sorted(sorted, grid),
            Pooling::Sigmoid { grid, slope } => sigmoid_vector(sorted, grid, *slope),
            Pooling::Moments { order } => moment_vector(sorted, *order).map(|m| m.0),
        }
    }

    /// Pools an arbitrary-order slice (sums follow the slice order).
    pub fn pool(&self, values: &[f64]) -> Result<Vec<f64>> {
        match self {
            Pooling::Cdf(grid) => crate::pooling::cdf_vector(values, grid),
            _ => self.pool_sorted(values),
        }
    }
}

impl Default for Pooling {
    fn default() -> Self {
        Pooling::Cdf(BinGrid::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationConfig {
    pub pooling: Pooling,
    /// Scale signals to unit norm before projecting (zero stays zero).
    pub normalize: bool,
}

impl Default for RepresentationConfig {
    fn default() -> Self {
        Self {
            pooling: Pooling::default(),
            normalize: true,
        }
    }
}

impl RepresentationConfig {
    pub fn prepare(&self, signal: &Signal) -> Signal {
        if self.normalize {
            signal.normalized()
        } else {
            signal.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RepMeta {
    pub group: GroupKind,
    pub group_order: usize,
    pub pooling: String,
    /// Grid thresholds for CDF / sigmoid pooling.
    pub grid: Option<Vec<f64>>,
    pub slope: Option<f64>,
    pub normalize: bool,
}

/// `k × width` matrix of pooled projection statistics, row-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RepMatrix {
    pub meta: RepMeta,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl RepMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// `max |a − b|` entrywise; `∞` on shape mismatch.
    pub fn max_abs_diff(&self, other: &RepMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| {
                let d = libm::fabs(a - b);
                if d > m {
                    d
                } else {
                    m
                }
            })
    }
}

/// Invariant representation of `signal`: row `i` pools the orbit projection
/// onto template `i`.
pub fn represent(
    signal: &Signal,
    bank: &TemplateBank,
    cfg: &RepresentationConfig,
) -> Result<RepMatrix> {
    signal.check_dim(bank.dim())?;
    let x = cfg.prepare(signal);
    let cols = cfg.pooling.width();
    let mut values = Vec::with_capacity(bank.len() * cols);
    for i in 0..bank.len() {
        let proj = project_orbit(&x, bank, i)?;
        values.extend(cfg.pooling.pool_sorted(proj.values())?);
    }
    let (grid, slope) = match &cfg.pooling {
        Pooling::Cdf(g) => (Some(g.thresholds().to_vec()), None),
        Pooling::Sigmoid { grid, slope } => (Some(grid.thresholds().to_vec()), Some(*slope)),
        Pooling::Moments { .. } => (None, None),
    };
    Ok(RepMatrix {
        meta: RepMeta {
            group: bank.group_kind(),
            group_order: bank.order(),
            pooling: cfg.pooling.name().into(),
            grid,
            slope,
            normalize: cfg.normalize,
        },
        rows: bank.len(),
        cols,
        values,
    })
}

/// Brute-force orbit oracle: `min_g ‖g·I − I'‖₂ ≤ tol`.
pub fn orbit_equivalent(a: &Signal, b: &Signal, action: &GroupAction, tol: f64) -> Result<bool> {
    Ok(orbit_distance(a, b, action)? <= tol)
}

/// `min_g ‖g·I − I'‖₂`.
pub fn orbit_distance(a: &Signal, b: &Signal, action: &GroupAction) -> Result<f64> {
    a.check_dim(action.dim())?;
    b.check_dim(action.dim())?;
    let mut moved = alloc::vec![0.0; action.dim()];
    let mut best = f64::INFINITY;
    for g in 0..action.order() {
        action.act_into(g, a.as_slice(), &mut moved);
        let sq: f64 = moved
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        let d = libm::sqrt(sq);
        if d < best {
            best = d;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::make_cyclic_group;
    use crate::random::gaussian_signal;
    use alloc::vec;

    fn sig(v: &[f64]) -> Signal {
        Signal::new(v.to_vec()).unwrap()
    }

    #[test]
    fn templates_are_unit_and_deterministic() {
        let a = sample_unit_vectors(7, 20, 3).unwrap();
        let b = sample_unit_vectors(7, 20, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|t| t.is_unit(1e-12)));
        assert_ne!(a, sample_unit_vectors(7, 20, 4).unwrap());
    }

    #[test]
    fn bad_template_parameters() {
        assert!(sample_unit_vectors(0, 3, 1).is_err());
        assert!(sample_unit_vectors(3, 0, 1).is_err());
        let act = make_cyclic_group(2).unwrap();
        assert!(matches!(
            TemplateBank::new(&act, vec![sig(&[1.0, 1.0])]),
            Err(Error::NotUnitNorm(_))
        ));
        assert!(matches!(
            TemplateBank::new(&act, vec![]),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn expanded_orbit_matches_action() {
        let act = make_cyclic_group(5).unwrap();
        let bank = sample_templates(&act, 3, 9).unwrap();
        for i in 0..3 {
            for g in 0..5 {
                let expected = act.act(g, bank.template(i).unwrap()).unwrap();
                assert_eq!(bank.transformed(i, g), expected.as_slice());
            }
        }
    }

    #[test]
    fn self_projection_trivial_group() {
        let act = make_cyclic_group(1).unwrap();
        let bank = TemplateBank::new(&act, vec![sig(&[1.0])]).unwrap();
        assert_eq!(
            project_orbit(&sig(&[1.0]), &bank, 0).unwrap().values(),
            &[1.0]
        );
    }

    #[test]
    fn orthogonal_projection_is_zero() {
        let act = make_cyclic_group(1).unwrap();
        let mut t = vec![0.0; 4];
        t[0] = 1.0;
        let act4 = crate::groups::GroupAction::new(
            act.group().clone(),
            4,
            vec![vec![0, 1, 2, 3]],
            GroupKind::Custom,
        )
        .unwrap();
        let bank = TemplateBank::new(&act4, vec![sig(&t)]).unwrap();
        let p = project_orbit(&sig(&[0.0, 2.0, -1.0, 3.0]), &bank, 0).unwrap();
        assert_eq!(p.values(), &[0.0]);
    }

    #[test]
    fn z4_one_hot_projection() {
        let act = make_cyclic_group(4).unwrap();
        let e0 = Signal::basis(4, 0).unwrap();
        let bank = TemplateBank::new(&act, vec![e0.clone()]).unwrap();
        assert_eq!(
            project_orbit(&e0, &bank, 0).unwrap().values(),
            &[0.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn projection_errors() {
        let act = make_cyclic_group(4).unwrap();
        let bank = sample_templates(&act, 2, 1).unwrap();
        assert!(matches!(
            project_orbit(&sig(&[1.0; 3]), &bank, 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            project_orbit(&sig(&[1.0; 4]), &bank, 2),
            Err(Error::TemplateOutOfRange { .. })
        ));
    }

    #[test]
    fn constant_signal_gives_single_steps() {
        let act = make_cyclic_group(6).unwrap();
        let bank = sample_templates(&act, 4, 2).unwrap();
        let rep = represent(&sig(&[0.3; 6]), &bank, &RepresentationConfig::default()).unwrap();
        for i in 0..4 {
            let row = rep.row(i);
            // every g·t has the same inner product with a constant
            assert!(row.iter().all(|&v| v == 0.0 || v == 1.0));
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*row.last().unwrap(), 1.0);
        }
    }

    #[test]
    fn represent_is_exactly_invariant() {
        let act = make_cyclic_group(8).unwrap();
        let bank = sample_templates(&act, 5, 11).unwrap();
        let mut rng = seeded(5);
        let x = gaussian_signal(&mut rng, 8).unwrap();
        for pooling in [
            Pooling::default(),
            Pooling::Sigmoid {
                grid: BinGrid::default(),
                slope: 20.0,
            },
            Pooling::Moments { order: 6 },
        ] {
            let cfg = RepresentationConfig {
                pooling,
                normalize: true,
            };
            let base = represent(&x, &bank, &cfg).unwrap();
            for g in 0..8 {
                let moved = represent(&act.act(g, &x).unwrap(), &bank, &cfg).unwrap();
                assert_eq!(base, moved);
            }
        }
    }

    #[test]
    fn distinct_orbits_distinct_representations() {
        let act = make_cyclic_group(8).unwrap();
        let bank = sample_templates(&act, 16, 1).unwrap();
        let mut rng = seeded(77);
        let a = gaussian_signal(&mut rng, 8).unwrap();
        let b = gaussian_signal(&mut rng, 8).unwrap();
        assert!(!orbit_equivalent(&a, &b, &act, 1e-9).unwrap());
        let cfg = RepresentationConfig::default();
        assert!(
            represent(&a, &bank, &cfg)
                .unwrap()
                .max_abs_diff(&represent(&b, &bank, &cfg).unwrap())
                > 0.0
        );
    }

    #[test]
    fn orbit_oracle_examples() {
        let act = make_cyclic_group(4).unwrap();
        let x = sig(&[1., 2., 3., 4.]);
        assert!(orbit_equivalent(&x, &x, &act, 0.0).unwrap());
        assert!(orbit_equivalent(&x, &sig(&[3., 4., 1., 2.]), &act, 0.0).unwrap());
        assert!(!orbit_equivalent(&x, &sig(&[1.0 + 1e-6, 2., 3., 4.]), &act, 1e-9).unwrap());
        assert!(orbit_equivalent(&x, &sig(&[1.0; 3]), &act, 0.0).is_err());
    }

    #[test]
    fn template_form_equivalence() {
        let act = make_cyclic_group(9).unwrap();
        let bank = sample_templates(&act, 3, 8).unwrap();
        let mut rng = seeded(1);
        let x = gaussian_signal(&mut rng, 9).unwrap();
        for i in 0..3 {
            let a = project_orbit(&x, &bank, i).unwrap();
            let b = project_signal_orbit(&x, &act, bank.template(i).unwrap()).unwrap();
            assert_eq!(a.values(), b.values());
        }
    }
}
