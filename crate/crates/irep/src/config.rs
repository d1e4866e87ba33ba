//! Experiment configuration: a versioned JSON document with one section per
//! experiment. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use irep_core::groups::{
    make_cyclic_group_with_max, make_torus_group_with_max, GroupAction, DEFAULT_MAX_ORDER,
};
use irep_core::pog::PogWindow;
use irep_core::pooling::{BinGrid, Nonlinearity};
use irep_core::random::substream;
use irep_core::representations::Pooling;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    /// Base seed; sections without their own seed derive one from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_max_order")]
    pub max_group_order: usize,
    #[serde(default)]
    pub invariance: InvarianceSection,
    #[serde(default)]
    pub selectivity: SelectivitySection,
    #[serde(default)]
    pub concentration: ConcentrationSection,
    #[serde(default)]
    pub pog: PogSection,
    #[serde(default)]
    pub hierarchy: HierarchySection,
    #[serde(default)]
    pub sample_complexity: SampleComplexitySection,
    #[serde(default)]
    pub output: OutputSection,
}

pub const DEFAULT_SEED: u64 = 20_240_917;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_max_order() -> usize {
    DEFAULT_MAX_ORDER
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            seed: DEFAULT_SEED,
            max_group_order: DEFAULT_MAX_ORDER,
            invariance: InvarianceSection::default(),
            selectivity: SelectivitySection::default(),
            concentration: ConcentrationSection::default(),
            pog: PogSection::default(),
            hierarchy: HierarchySection::default(),
            sample_complexity: SampleComplexitySection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic { p: usize },
    Torus { p: usize },
}

impl GroupSpec {
    pub fn build(&self, max_order: usize) -> Result<GroupAction> {
        match *self {
            GroupSpec::Cyclic { p } => make_cyclic_group_with_max(p, max_order),
            GroupSpec::Torus { p } => make_torus_group_with_max(p, max_order),
        }
        .map_err(|e| Error::config(format!("group {}: {e}", self.label())))
    }

    pub fn label(&self) -> String {
        match self {
            GroupSpec::Cyclic { p } => format!("Z{p}"),
            GroupSpec::Torus { p } => format!("torus{p}"),
        }
    }

    pub fn order(&self) -> usize {
        match *self {
            GroupSpec::Cyclic { p } => p,
            GroupSpec::Torus { p } => p * p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PoolingSpec {
    #[serde(alias = "cdf")]
    Threshold {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_range")]
        range: f64,
    },
    Sigmoid {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_range")]
        range: f64,
        slope: f64,
    },
    Moments {
        #[serde(default = "default_moments")]
        moments: usize,
    },
}

fn default_bins() -> usize {
    BinGrid::DEFAULT_BINS
}

fn default_range() -> f64 {
    1.0
}

fn default_moments() -> usize {
    irep_core::pooling::MomentVector::DEFAULT_ORDER
}

impl PoolingSpec {
    pub fn build(&self) -> Result<Pooling> {
        let grid = |bins, range| {
            BinGrid::uniform(bins, range).map_err(|e| Error::config(format!("pooling grid: {e}")))
        };
        Ok(match *self {
            PoolingSpec::Threshold { bins, range } => Pooling::Cdf(grid(bins, range)?),
            PoolingSpec::Sigmoid { bins, range, slope } => {
                if !(slope > 0.0 && slope.is_finite()) {
                    return Err(Error::config(format!(
                        "sigmoid slope must be positive, got {slope}"
                    )));
                }
                Pooling::Sigmoid {
                    grid: grid(bins, range)?,
                    slope,
                }
            }
            PoolingSpec::Moments { moments } => {
                if moments == 0 {
                    return Err(Error::config("moment order must be positive"));
                }
                Pooling::Moments { order: moments }
            }
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PoolingSpec::Threshold { .. } => "threshold",
            PoolingSpec::Sigmoid { .. } => "sigmoid",
            PoolingSpec::Moments { .. } => "moments",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WindowSpec {
    Full,
    Shifts { len: usize },
    Rectangle { rows: usize, cols: usize },
    Members { members: Vec<usize> },
}

impl WindowSpec {
    pub fn build(&self, action: &GroupAction) -> Result<PogWindow> {
        let w = match self {
            WindowSpec::Full => Ok(PogWindow::full(action.group())),
            WindowSpec::Shifts { len } => PogWindow::shifts(action, *len),
            WindowSpec::Rectangle { rows, cols } => PogWindow::rectangle(action, *rows, *cols),
            WindowSpec::Members { members } => PogWindow::from_members(action.group(), members),
        };
        w.map_err(|e| Error::config(format!("window {self:?}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvarianceSection {
    pub seed: Option<u64>,
    pub groups: Vec<GroupSpec>,
    pub signals: usize,
    pub templates: usize,
    pub poolings: Vec<PoolingSpec>,
    pub normalize: bool,
    /// Allowed deviation for threshold and moment pooling.
    pub exact_tol: f64,
    /// Allowed deviation for sigmoid pooling.
    pub smooth_tol: f64,
}

impl Default for InvarianceSection {
    fn default() -> Self {
        Self {
            seed: None,
            groups: vec![GroupSpec::Cyclic { p: 16 }, GroupSpec::Torus { p: 4 }],
            signals: 100,
            templates: 32,
            poolings: vec![
                PoolingSpec::Threshold {
                    bins: 32,
                    range: 1.0,
                },
                PoolingSpec::Sigmoid {
                    bins: 32,
                    range: 1.0,
                    slope: 30.0,
                },
                PoolingSpec::Moments { moments: 6 },
            ],
            normalize: true,
            exact_tol: 0.0,
            smooth_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectivitySection {
    pub seed: Option<u64>,
    pub groups: Vec<GroupSpec>,
    /// Templates per group; `None` uses `4·d`.
    pub templates: Option<usize>,
    pub pairs: usize,
    pub pooling: PoolingSpec,
    /// Order of the truncated moment representation compared on the same pairs.
    pub moments: usize,
    pub normalize: bool,
    pub oracle_tol: f64,
    pub rep_tol: f64,
    /// Largest group order for which the brute-force oracle is run.
    pub max_oracle_order: usize,
    pub max_confusions: usize,
    pub max_moment_confusions: usize,
}

impl Default for SelectivitySection {
    fn default() -> Self {
        Self {
            seed: None,
            groups: vec![GroupSpec::Cyclic { p: 16 }, GroupSpec::Torus { p: 4 }],
            templates: None,
            pairs: 200,
            pooling: PoolingSpec::Threshold {
                bins: 64,
                range: 1.0,
            },
            moments: 6,
            normalize: true,
            oracle_tol: 1e-9,
            rep_tol: 1e-9,
            max_oracle_order: 64,
            max_confusions: 0,
            max_moment_confusions: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationSection {
    pub seed: Option<u64>,
    pub group: GroupSpec,
    pub signals: usize,
    /// Template count; `None` uses the bound.
    pub k: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
    pub c: f64,
    pub k_ref: usize,
    pub normalize: bool,
    pub chunk: usize,
    /// `None` uses `δ² + 0.02`.
    pub max_violation_fraction: Option<f64>,
}

impl Default for ConcentrationSection {
    fn default() -> Self {
        Self {
            seed: Some(3),
            group: GroupSpec::Cyclic { p: 16 },
            signals: 20,
            k: None,
            epsilon: 0.1,
            delta: 0.1,
            c: 1.0,
            k_ref: 50_000,
            normalize: true,
            chunk: 1024,
            max_violation_fraction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PogCase {
    pub group: GroupSpec,
    pub window: WindowSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PogSection {
    pub seed: Option<u64>,
    pub cases: Vec<PogCase>,
    pub templates: usize,
    pub signals: usize,
    pub pooling: PoolingSpec,
    pub normalize: bool,
    pub covariance_tol: f64,
    /// Groups the localized triples are drawn from.
    pub localized_groups: Vec<GroupSpec>,
    pub localized_triples: usize,
    pub localized_etas: Vec<Nonlinearity>,
    pub localization_tol: f64,
    pub local_invariance_tol: f64,
}

impl Default for PogSection {
    fn default() -> Self {
        Self {
            seed: None,
            cases: vec![
                PogCase {
                    group: GroupSpec::Cyclic { p: 8 },
                    window: WindowSpec::Shifts { len: 3 },
                },
                PogCase {
                    group: GroupSpec::Torus { p: 4 },
                    window: WindowSpec::Rectangle { rows: 2, cols: 2 },
                },
            ],
            templates: 4,
            signals: 5,
            pooling: PoolingSpec::Threshold {
                bins: 16,
                range: 1.0,
            },
            normalize: true,
            covariance_tol: 1e-12,
            localized_groups: vec![
                GroupSpec::Cyclic { p: 8 },
                GroupSpec::Cyclic { p: 16 },
                GroupSpec::Torus { p: 4 },
            ],
            localized_triples: 50,
            localized_etas: vec![
                Nonlinearity::Threshold { b: -0.25 },
                Nonlinearity::AbsPower { r: 1 },
            ],
            localization_tol: 1e-12,
            local_invariance_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierarchySection {
    pub seed: Option<u64>,
    pub group: GroupSpec,
    pub layer1_window: WindowSpec,
    pub layer2_window: WindowSpec,
    pub templates: usize,
    pub pooling: PoolingSpec,
    pub normalize: bool,
    pub signals: usize,
    pub taus: usize,
    /// Sample signals the layer-2 templates are picked from.
    pub tau_samples: usize,
    pub etas: Vec<Nonlinearity>,
    pub covariance_tol: f64,
    /// Tolerance for threshold and identity `η`.
    pub invariance_tol: f64,
    /// Tolerance for sigmoid `η`.
    pub smooth_invariance_tol: f64,
    pub laws: usize,
    pub triples: usize,
    pub hellinger_bins: usize,
    pub hellinger_range: f64,
    pub sigma: f64,
    pub psd_tol: f64,
    pub triangle_tol: f64,
}

impl Default for HierarchySection {
    fn default() -> Self {
        Self {
            seed: None,
            group: GroupSpec::Cyclic { p: 8 },
            layer1_window: WindowSpec::Shifts { len: 3 },
            layer2_window: WindowSpec::Full,
            templates: 4,
            pooling: PoolingSpec::Threshold {
                bins: 16,
                range: 1.0,
            },
            normalize: true,
            signals: 20,
            taus: 5,
            tau_samples: 10,
            etas: vec![
                Nonlinearity::Threshold { b: 1.5 },
                Nonlinearity::Sigmoid { b: 1.5, slope: 5.0 },
                Nonlinearity::Identity,
            ],
            covariance_tol: 1e-12,
            invariance_tol: 1e-12,
            smooth_invariance_tol: 1e-9,
            laws: 30,
            triples: 50,
            hellinger_bins: 32,
            hellinger_range: 1.0,
            sigma: irep_core::hierarchy::DEFAULT_SIGMA,
            psd_tol: 1e-9,
            triangle_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleComplexitySection {
    pub seed: Option<u64>,
    /// Image side; images live on the `p × p` torus.
    pub p: usize,
    /// Side of the square object patch.
    pub patch: usize,
    /// Two explicit `patch × patch` class patches (row-major); drawn as
    /// standard normal pixels when absent.
    pub patches: Option<Vec<Vec<f64>>>,
    pub noise: f64,
    pub trials: usize,
    /// Training-set sizes; each must be even (classes are balanced).
    pub grid: Vec<usize>,
    pub test_size: usize,
    pub lambda: f64,
    pub target_accuracy: f64,
    pub templates: usize,
    /// Side of the square window the templates are drawn on; `None` draws
    /// them over the whole image.
    pub template_support: Option<usize>,
    pub pooling: PoolingSpec,
    pub normalize: bool,
    pub min_ratio: f64,
    pub max_invariant_over_oracle: f64,
}

impl Default for SampleComplexitySection {
    fn default() -> Self {
        Self {
            seed: Some(11),
            p: 16,
            patch: 4,
            patches: None,
            noise: 0.1,
            trials: 20,
            grid: vec![
                2, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512,
            ],
            test_size: 400,
            lambda: 1e-3,
            target_accuracy: 0.9,
            templates: 8,
            template_support: None,
            pooling: PoolingSpec::Threshold {
                bins: 32,
                range: 0.25,
            },
            normalize: true,
            min_ratio: 4.0,
            max_invariant_over_oracle: 2.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Used when no `--out` directory is given.
    pub dir: Option<PathBuf>,
}

/// Section indices used to derive per-section seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Invariance = 0,
    Selectivity = 1,
    Concentration = 2,
    Pog = 3,
    Hierarchy = 4,
    SampleComplexity = 5,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The seed a section runs with: its own if given, else derived from the base seed.
    pub fn section_seed(&self, section: Section) -> u64 {
        let own = match section {
            Section::Invariance => self.invariance.seed,
            Section::Selectivity => self.selectivity.seed,
            Section::Concentration => self.concentration.seed,
            Section::Pog => self.pog.seed,
            Section::Hierarchy => self.hierarchy.seed,
            Section::SampleComplexity => self.sample_complexity.seed,
        };
        own.unwrap_or_else(|| substream(self.seed, section as u64))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        positive("max_group_order", self.max_group_order)?;

        let inv = &self.invariance;
        self.groups("invariance.groups", &inv.groups)?;
        positive("invariance.signals", inv.signals)?;
        positive("invariance.templates", inv.templates)?;
        nonempty("invariance.poolings", &inv.poolings)?;
        for p in &inv.poolings {
            p.build()?;
        }
        tolerance("invariance.exact_tol", inv.exact_tol)?;
        tolerance("invariance.smooth_tol", inv.smooth_tol)?;

        let sel = &self.selectivity;
        self.groups("selectivity.groups", &sel.groups)?;
        if let Some(k) = sel.templates {
            positive("selectivity.templates", k)?;
        }
        positive("selectivity.pairs", sel.pairs)?;
        sel.pooling.build()?;
        positive("selectivity.moments", sel.moments)?;
        tolerance("selectivity.oracle_tol", sel.oracle_tol)?;
        tolerance("selectivity.rep_tol", sel.rep_tol)?;

        let con = &self.concentration;
        self.groups("concentration.group", &[con.group])?;
        if con.signals < 2 {
            return Err(Error::config("concentration.signals must be at least 2"));
        }
        if let Some(k) = con.k {
            positive("concentration.k", k)?;
        }
        unit_interval("concentration.epsilon", con.epsilon)?;
        unit_interval("concentration.delta", con.delta)?;
        if !(con.c > 0.0 && con.c.is_finite()) {
            return Err(Error::config("concentration.c must be positive"));
        }
        positive("concentration.k_ref", con.k_ref)?;
        positive("concentration.chunk", con.chunk)?;
        if let Some(f) = con.max_violation_fraction {
            unit_interval("concentration.max_violation_fraction", f)?;
        }

        let pog = &self.pog;
        nonempty("pog.cases", &pog.cases)?;
        for case in &pog.cases {
            case.window
                .build(&case.group.build(self.max_group_order)?)?;
        }
        positive("pog.templates", pog.templates)?;
        positive("pog.signals", pog.signals)?;
        pog.pooling.build()?;
        tolerance("pog.covariance_tol", pog.covariance_tol)?;
        self.groups("pog.localized_groups", &pog.localized_groups)?;
        if pog.localized_triples > 0 {
            nonempty("pog.localized_etas", &pog.localized_etas)?;
            for g in &pog.localized_groups {
                if g.order() < 3 {
                    return Err(Error::config("pog.localized_groups need order at least 3"));
                }
            }
        }
        tolerance("pog.localization_tol", pog.localization_tol)?;
        tolerance("pog.local_invariance_tol", pog.local_invariance_tol)?;

        let h = &self.hierarchy;
        let action = h.group.build(self.max_group_order)?;
        h.layer1_window.build(&action)?;
        h.layer2_window.build(&action)?;
        positive("hierarchy.templates", h.templates)?;
        if matches!(h.pooling, PoolingSpec::Moments { .. }) {
            return Err(Error::config(
                "hierarchy.pooling must be threshold or sigmoid",
            ));
        }
        h.pooling.build()?;
        positive("hierarchy.signals", h.signals)?;
        positive("hierarchy.taus", h.taus)?;
        if h.tau_samples < h.taus {
            return Err(Error::config(
                "hierarchy.tau_samples must be at least hierarchy.taus",
            ));
        }
        nonempty("hierarchy.etas", &h.etas)?;
        tolerance("hierarchy.covariance_tol", h.covariance_tol)?;
        tolerance("hierarchy.invariance_tol", h.invariance_tol)?;
        tolerance("hierarchy.smooth_invariance_tol", h.smooth_invariance_tol)?;
        if h.laws < 2 {
            return Err(Error::config("hierarchy.laws must be at least 2"));
        }
        BinGrid::uniform(h.hellinger_bins, h.hellinger_range)
            .map_err(|e| Error::config(format!("hierarchy hellinger grid: {e}")))?;
        if !(h.sigma > 0.0 && h.sigma.is_finite()) {
            return Err(Error::config("hierarchy.sigma must be positive"));
        }
        tolerance("hierarchy.psd_tol", h.psd_tol)?;
        tolerance("hierarchy.triangle_tol", h.triangle_tol)?;

        let sc = &self.sample_complexity;
        positive("sample_complexity.p", sc.p)?;
        positive("sample_complexity.patch", sc.patch)?;
        if sc.patch > sc.p {
            return Err(Error::config("sample_complexity.patch must not exceed p"));
        }
        GroupSpec::Torus { p: sc.p }.build(self.max_group_order)?;
        if let Some(patches) = &sc.patches {
            if patches.len() != 2 || patches.iter().any(|q| q.len() != sc.patch * sc.patch) {
                return Err(Error::config(
                    "sample_complexity.patches must hold two patch*patch arrays",
                ));
            }
            if patches[0] == patches[1] {
                return Err(Error::config(
                    "sample_complexity.patches are identical (degenerate classes)",
                ));
            }
        }
        if !(sc.noise >= 0.0 && sc.noise.is_finite()) {
            return Err(Error::config(
                "sample_complexity.noise must be non-negative",
            ));
        }
        positive("sample_complexity.trials", sc.trials)?;
        nonempty("sample_complexity.grid", &sc.grid)?;
        if sc.grid.iter().any(|&n| n < 2 || n % 2 != 0) {
            return Err(Error::config(
                "sample_complexity.grid entries must be even and at least 2",
            ));
        }
        if sc.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "sample_complexity.grid must be strictly increasing",
            ));
        }
        positive("sample_complexity.test_size", sc.test_size)?;
        if !(sc.lambda > 0.0 && sc.lambda.is_finite()) {
            return Err(Error::config("sample_complexity.lambda must be positive"));
        }
        unit_interval("sample_complexity.target_accuracy", sc.target_accuracy)?;
        positive("sample_complexity.templates", sc.templates)?;
        if let Some(s) = sc.template_support {
            positive("sample_complexity.template_support", s)?;
            if s > sc.p {
                return Err(Error::config(
                    "sample_complexity.template_support must not exceed p",
                ));
            }
        }
        sc.pooling.build()?;
        Ok(())
    }

    fn groups(&self, name: &str, groups: &[GroupSpec]) -> Result<()> {
        nonempty(name, groups)?;
        for g in groups {
            g.build(self.max_group_order)
                .map_err(|e| Error::config(format!("{name}: {e}")))?;
        }
        Ok(())
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::config(format!("{name} must be positive")));
    }
    Ok(())
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::config(format!("{name} must not be empty")));
    }
    Ok(())
}

fn tolerance(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::config(format!(
            "{name} must be a finite non-negative number"
        )));
    }
    Ok(())
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::config(format!("{name} must lie in (0, 1], got {v}")));
    }
    Ok(())
}
