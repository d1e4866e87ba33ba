//! Partially observable group (POG) averages: pooling over a window
//! `G₀ ⊂ G` of transformations instead of the whole group.
//!
//! All measurements transform the template, `⟨I, g·t⟩`. Under this
//! convention transforming the input by `g̃` moves the window to
//! `g̃⁻¹G₀`, so
//!
//! * local invariance needs `η(⟨I, g·t⟩) = 0` on `g̃⁻¹G₀ Δ G₀`, and
//! * the POG tensor is covariant as `P(g̃·I)[ḡ] = P(I)[g̃⁻¹∘ḡ]`.
//!
//! Window averages are normalized by `1/|G₀|`, so every slice is a valid
//! CDF and the full window reduces to the global representation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupAction, GroupKind};
use crate::pooling::Nonlinearity;
use crate::representations::{RepresentationConfig, TemplateBank};
use crate::signal::{exact_dot, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum WindowDescriptor {
    Full,
    /// Cyclic shifts `{0, …, len−1}`.
    Shifts {
        len: usize,
    },
    /// Torus shifts `[0, rows) × [0, cols)`.
    Rectangle {
        rows: usize,
        cols: usize,
    },
    Custom,
}

/// A nonempty subset `G₀` of group elements (the receptive field).
#[derive(Debug, Clone, PartialEq)]
pub struct PogWindow {
    members: Vec<usize>,
    mask: Vec<bool>,
    descriptor: WindowDescriptor,
}

impl PogWindow {
    /// Arbitrary subset; duplicates are dropped, order of first occurrence
    /// is kept.
    pub fn from_members(group: &FiniteGroup, members: &[usize]) -> Result<Self> {
        Self::build(group, members, WindowDescriptor::Custom)
    }

    fn build(group: &FiniteGroup, members: &[usize], descriptor: WindowDescriptor) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Empty("window"));
        }
        let mut mask = alloc::vec![false; group.order()];
        let mut kept = Vec::with_capacity(members.len());
        for &g in members {
            if g >= group.order() {
                return Err(Error::ElementOutOfRange {
                    index: g,
                    order: group.order(),
                });
            }
            if !mask[g] {
                mask[g] = true;
                kept.push(g);
            }
        }
        Ok(Self {
            members: kept,
            mask,
            descriptor,
        })
    }

    pub fn full(group: &FiniteGroup) -> Self {
        let members: Vec<usize> = (0..group.order()).collect();
        Self::build(group, &members, WindowDescriptor::Full).expect("group is nonempty")
    }

    /// Contiguous shifts `{0, …, len−1}` of a cyclic group.
    pub fn shifts(action: &GroupAction, len: usize) -> Result<Self> {
        if !matches!(action.kind(), GroupKind::Cyclic { .. }) {
            return Err(Error::InvalidParameter(
                "shift windows need a cyclic group".into(),
            ));
        }
        if len == 0 || len > action.order() {
            return Err(Error::InvalidParameter(alloc::format!(
                "shift window length {len} out of range"
            )));
        }
        let members: Vec<usize> = (0..len).collect();
        Self::build(action.group(), &members, WindowDescriptor::Shifts { len })
    }

    /// Rectangle of torus shifts `[0, rows) × [0, cols)`.
    pub fn rectangle(action: &GroupAction, rows: usize, cols: usize) -> Result<Self> {
        let GroupKind::Torus { p } = action.kind() else {
            return Err(Error::InvalidParameter(
                "rectangle windows need a torus group".into(),
            ));
        };
        if rows == 0 || cols == 0 || rows > p || cols > p {
            return Err(Error::InvalidParameter(alloc::format!(
                "rectangle {rows}×{cols} out of range"
            )));
        }
        let group = action.group();
        let members: Vec<usize> = (0..rows)
            .flat_map(|a| (0..cols).map(move |b| (a, b)))
            .map(|(a, b)| group.element(&[a, b]))
            .collect();
        Self::build(group, &members, WindowDescriptor::Rectangle { rows, cols })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    #[inline]
    pub fn contains(&self, g: usize) -> bool {
        self.mask.get(g).copied().unwrap_or(false)
    }

    pub fn descriptor(&self) -> WindowDescriptor {
        self.descriptor
    }

    fn check_group(&self, group: &FiniteGroup) -> Result<()> {
        if self.mask.len() != group.order() {
            return Err(Error::InvalidParameter(
                "window belongs to a different group".into(),
            ));
        }
        Ok(())
    }

    /// `ḡG₀ = {ḡ∘g' : g' ∈ G₀}`, in member order.
    pub fn translate(&self, group: &FiniteGroup, base: usize) -> Vec<usize> {
        self.members
            .iter()
            .map(|&g| group.compose(base, g))
            .collect()
    }
}

/// `[⟨I, g·t⟩ for g in 0..N]`.
fn template_responses(
    signal: &Signal,
    template: &Signal,
    action: &GroupAction,
) -> Result<Vec<f64>> {
    signal.check_dim(action.dim())?;
    template.check_dim(action.dim())?;
    let mut moved = alloc::vec![0.0; action.dim()];
    Ok((0..action.order())
        .map(|g| {
            action.act_into(g, template.as_slice(), &mut moved);
            exact_dot(signal.as_slice(), &moved)
        })
        .collect())
}

fn check_base(action: &GroupAction, g: usize) -> Result<()> {
    if g >= action.order() {
        return Err(Error::ElementOutOfRange {
            index: g,
            order: action.order(),
        });
    }
    Ok(())
}

/// `(1/|G₀|) Σ_{g ∈ ḡG₀} η(⟨I, g·t⟩)`.
pub fn pog_measurement(
    signal: &Signal,
    template: &Signal,
    action: &GroupAction,
    window: &PogWindow,
    eta: Nonlinearity,
    base: usize,
) -> Result<f64> {
    window.check_group(action.group())?;
    check_base(action, base)?;
    let responses = template_responses(signal, template, action)?;
    let sum: f64 = window
        .translate(action.group(), base)
        .iter()
        .map(|&g| eta.apply(responses[g]))
        .sum();
    Ok(sum / window.size() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalizationReport {
    pub satisfied: bool,
    /// `max |η(⟨I, g·t⟩)|` over the symmetric difference (0 when empty).
    pub max_violation: f64,
    /// Size of the symmetric difference.
    pub checked: usize,
}

/// Elements of `g̃⁻¹G₀ Δ G₀`, ascending.
pub fn shifted_symmetric_difference(
    group: &FiniteGroup,
    window: &PogWindow,
    shift: usize,
) -> Vec<usize> {
    let moved = PogWindow::from_members(group, &window.translate(group, group.inverse(shift)))
        .expect("translate of a nonempty window is nonempty");
    (0..group.order())
        .filter(|&g| moved.contains(g) != window.contains(g))
        .collect()
}

/// Evaluates the weakened localization condition: `η(⟨I, g·t⟩)` must vanish
/// (within `tol`) on `g̃⁻¹G₀ Δ G₀`.
pub fn localization_check(
    signal: &Signal,
    template: &Signal,
    action: &GroupAction,
    window: &PogWindow,
    shift: usize,
    eta: Nonlinearity,
    tol: f64,
) -> Result<LocalizationReport> {
    window.check_group(action.group())?;
    check_base(action, shift)?;
    let responses = template_responses(signal, template, action)?;
    let diff = shifted_symmetric_difference(action.group(), window, shift);
    let max_violation = diff
        .iter()
        .map(|&g| libm::fabs(eta.apply(responses[g])))
        .fold(0.0, f64::max);
    Ok(LocalizationReport {
        satisfied: max_violation <= tol,
        max_violation,
        checked: diff.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalInvarianceCheck {
    pub localization: LocalizationReport,
    /// `|ψ(I) − ψ(g̃·I)|` for the window based at the identity.
    pub difference: f64,
    /// `localized ⇒ difference ≤ tol`.
    pub implication_holds: bool,
}

/// Runtime form of the local invariance theorem: when the localization
/// condition holds, the POG measurement must not change under `g̃`.
/// A violated condition makes the implication vacuously true.
pub fn local_invariance_check(
    signal: &Signal,
    template: &Signal,
    action: &GroupAction,
    window: &PogWindow,
    shift: usize,
    eta: Nonlinearity,
    tol: f64,
) -> Result<LocalInvarianceCheck> {
    let localization = localization_check(signal, template, action, window, shift, eta, tol)?;
    let e = action.group().identity();
    let before = pog_measurement(signal, template, action, window, eta, e)?;
    let after = pog_measurement(
        &action.act(shift, signal)?,
        template,
        action,
        window,
        eta,
        e,
    )?;
    let difference = libm::fabs(before - after);
    Ok(LocalInvarianceCheck {
        localization,
        difference,
        implication_holds: !localization.satisfied || difference <= tol,
    })
}

/// `N × k × width` tensor; entry `(ḡ, i, j)` pools `{⟨I, g·t_i⟩ : g ∈ ḡG₀}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PogTensor {
    pub order: usize,
    pub templates: usize,
    pub width: usize,
    pub window: WindowDescriptor,
    pub window_size: usize,
    pub pooling: alloc::string::String,
    pub values: Vec<f64>,
}

impl PogTensor {
    #[inline]
    pub fn entry(&self, base: usize, template: usize, j: usize) -> f64 {
        self.values[(base * self.templates + template) * self.width + j]
    }

    /// The `k × width` block at base point `ḡ`.
    pub fn slice(&self, base: usize) -> &[f64] {
        let stride = self.templates * self.width;
        &self.values[base * stride..(base + 1) * stride]
    }

    pub fn cell(&self, base: usize, template: usize) -> &[f64] {
        let start = (base * self.templates + template) * self.width;
        &self.values[start..start + self.width]
    }
}

/// Local (windowed) representation at every base point.
pub fn pog_represent(
    signal: &Signal,
    bank: &TemplateBank,
    action: &GroupAction,
    window: &PogWindow,
    cfg: &RepresentationConfig,
) -> Result<PogTensor> {
    window.check_group(action.group())?;
    if bank.order() != action.order() || bank.dim() != action.dim() {
        return Err(Error::InvalidParameter(
            "template bank was built for a different action".into(),
        ));
    }
    let x = cfg.prepare(signal);
    let (n, k, width) = (action.order(), bank.len(), cfg.pooling.width());
    let windows: Vec<Vec<usize>> = (0..n)
        .map(|base| window.translate(action.group(), base))
        .collect();
    let mut values = alloc::vec![0.0; n * k * width];
    let mut local = alloc::vec![0.0; window.size()];
    for i in 0..k {
        let responses = bank.responses(&x, i)?;
        for (base, members) in windows.iter().enumerate() {
            for (slot, &g) in local.iter_mut().zip(members) {
                *slot = responses[g];
            }
            let pooled = cfg.pooling.pool(&local)?;
            let start = (base * k + i) * width;
            values[start..start + width].copy_from_slice(&pooled);
        }
    }
    Ok(PogTensor {
        order: n,
        templates: k,
        width,
        window: window.descriptor(),
        window_size: window.size(),
        pooling: cfg.pooling.name().into(),
        values,
    })
}

/// `max_{ḡ} |P(g̃·I)[ḡ] − P(I)[g̃⁻¹∘ḡ]|` over all entries.
pub fn covariance_check(
    signal: &Signal,
    shift: usize,
    bank: &TemplateBank,
    action: &GroupAction,
    window: &PogWindow,
    cfg: &RepresentationConfig,
) -> Result<f64> {
    check_base(action, shift)?;
    let base = pog_represent(signal, bank, action, window, cfg)?;
    let moved = pog_represent(&action.act(shift, signal)?, bank, action, window, cfg)?;
    Ok(max_covariance_error(&base, &moved, action.group(), shift))
}

/// Entrywise mismatch of `moved[ḡ]` against `base[g̃⁻¹∘ḡ]`.
pub fn max_covariance_error(
    base: &PogTensor,
    moved: &PogTensor,
    group: &FiniteGroup,
    shift: usize,
) -> f64 {
    let inv = group.inverse(shift);
    let mut worst: f64 = 0.0;
    for g in 0..base.order {
        let src = group.compose(inv, g);
        for (a, b) in moved.slice(g).iter().zip(base.slice(src)) {
            worst = worst.max(libm::fabs(a - b));
        }
    }
    worst
}
