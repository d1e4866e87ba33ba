//! Finite Abelian groups with unitary permutation actions on signal
//! coordinates. The Haar measure is the uniform counting measure `1/N`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Default cap on the group order `N`.
pub const DEFAULT_MAX_ORDER: usize = 65_536;

/// Largest order for which exhaustive axiom scans are run at construction.
pub const EXHAUSTIVE_CHECK_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Law {
    /// Direct product `Z_{m_0} × … × Z_{m_{r-1}}`, elements in mixed radix
    /// (last factor fastest).
    Product(Vec<usize>),
    /// Explicit row-major Cayley table.
    Table(Vec<u32>),
}

/// A finite commutative group on dense element indices `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    law: Law,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// `Z_{m_0} × … × Z_{m_{r-1}}`.
    pub fn product(moduli: &[usize], max_order: usize) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::InvalidOrder(0));
        }
        let order = moduli
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .ok_or(Error::Capacity {
                order: usize::MAX,
                max: max_order,
            })?;
        if order > max_order {
            return Err(Error::Capacity {
                order,
                max: max_order,
            });
        }
        let mut group = Self {
            order,
            law: Law::Product(moduli.to_vec()),
            inverse: Vec::new(),
            identity: 0,
        };
        group.inverse = (0..order)
            .map(|g| {
                let coords: Vec<usize> = group
                    .coords(g)
                    .iter()
                    .zip(moduli)
                    .map(|(c, m)| (m - c) % m)
                    .collect();
                group.element(&coords)
            })
            .collect();
        Ok(group)
    }

    /// Builds a group from an explicit `N×N` Cayley table (row-major,
    /// `table[a*N + b] = a∘b`). Identity and inverses are derived; the group
    /// axioms and commutativity are verified exhaustively.
    pub fn from_cayley(order: usize, table: Vec<usize>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if table.len() != order * order {
            return Err(Error::GroupAxioms(format!(
                "table has {} entries, expected {}",
                table.len(),
                order * order
            )));
        }
        if let Some(bad) = table.iter().find(|&&v| v >= order) {
            return Err(Error::GroupAxioms(format!(
                "closure fails: entry {bad} is not an element"
            )));
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| table[e * order + g] == g && table[g * order + e] == g))
            .ok_or_else(|| Error::GroupAxioms("no identity element".into()))?;
        let inverse = (0..order)
            .map(|g| {
                (0..order)
                    .find(|&h| table[g * order + h] == identity)
                    .ok_or_else(|| Error::GroupAxioms(format!("element {g} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        let group = Self {
            order,
            law: Law::Table(table.iter().map(|&v| v as u32).collect()),
            inverse,
            identity,
        };
        group.verify_axioms()?;
        Ok(group)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Haar weight of a single element.
    #[inline]
    pub fn weight(&self) -> f64 {
        1.0 / self.order as f64
    }

    #[inline]
    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    /// Group law `a ∘ b`.
    pub fn compose(&self, a: usize, b: usize) -> usize {
        match &self.law {
            Law::Table(t) => t[a * self.order + b] as usize,
            Law::Product(moduli) => {
                let (mut a, mut b) = (a, b);
                let mut out = 0;
                let mut stride = 1;
                for &m in moduli.iter().rev() {
                    out += ((a % m + b % m) % m) * stride;
                    a /= m;
                    b /= m;
                    stride *= m;
                }
                out
            }
        }
    }

    /// Mixed-radix coordinates of `g` for product groups; `[g]` otherwise.
    pub fn coords(&self, g: usize) -> Vec<usize> {
        match &self.law {
            Law::Table(_) => alloc::vec![g],
            Law::Product(moduli) => {
                let mut rest = g;
                let mut out = alloc::vec![0; moduli.len()];
                for (slot, &m) in out.iter_mut().zip(moduli).rev() {
                    *slot = rest % m;
                    rest /= m;
                }
                out
            }
        }
    }

    /// Inverse of [`coords`](Self::coords); coordinates are reduced modulo
    /// their factor.
    pub fn element(&self, coords: &[usize]) -> usize {
        match &self.law {
            Law::Table(_) => coords[0] % self.order,
            Law::Product(moduli) => coords
                .iter()
                .zip(moduli)
                .fold(0, |acc, (c, m)| acc * m + c % m),
        }
    }

    /// Materializes the Cayley table.
    pub fn cayley_table(&self) -> Vec<usize> {
        let n = self.order;
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                out.push(self.compose(a, b));
            }
        }
        out
    }

    /// Exhaustive scan of closure, identity, inverses, associativity and
    /// commutativity. `O(N³)`.
    pub fn verify_axioms(&self) -> Result<()> {
        let n = self.order;
        let e = self.identity;
        for a in 0..n {
            if self.compose(a, e) != a || self.compose(e, a) != a {
                return Err(Error::GroupAxioms(format!("identity fails at {a}")));
            }
            if self.compose(a, self.inverse[a]) != e || self.compose(self.inverse[a], a) != e {
                return Err(Error::GroupAxioms(format!("inverse fails at {a}")));
            }
            for b in 0..n {
                let ab = self.compose(a, b);
                if ab >= n {
                    return Err(Error::GroupAxioms(format!("closure fails at ({a}, {b})")));
                }
                if ab != self.compose(b, a) {
                    return Err(Error::GroupAxioms(format!("not commutative at ({a}, {b})")));
                }
                for c in 0..n {
                    if self.compose(ab, c) != self.compose(a, self.compose(b, c)) {
                        return Err(Error::GroupAxioms(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Descriptor of how an action was built; carried into report metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum GroupKind {
    /// `Z_p` acting by circular shifts on `R^p`.
    Cyclic {
        p: usize,
    },
    /// `Z_p × Z_p` acting by 2D circular shifts on row-major `R^{p·p}`.
    Torus {
        p: usize,
    },
    Custom,
}

/// A unitary permutation representation of a finite group on `R^d`.
///
/// `perm(g)[j]` is the destination of coordinate `j`, i.e.
/// `(g·I)[perm(g)[j]] = I[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    group: FiniteGroup,
    dim: usize,
    perms: Vec<u32>,
    kind: GroupKind,
}

impl GroupAction {
    /// Validates that every `perms[g]` is a bijection, that the identity acts
    /// trivially and (for `N ≤ 512`) that `perm(g∘h) = perm(g)·perm(h)`.
    pub fn new(
        group: FiniteGroup,
        dim: usize,
        perms: Vec<Vec<usize>>,
        kind: GroupKind,
    ) -> Result<Self> {
        let n = group.order();
        if dim == 0 {
            return Err(Error::InvalidAction("dimension must be positive".into()));
        }
        if perms.len() != n {
            return Err(Error::InvalidAction(format!(
                "{} permutations for group of order {n}",
                perms.len()
            )));
        }
        let mut flat = Vec::with_capacity(n * dim);
        let mut seen = alloc::vec![false; dim];
        for (g, p) in perms.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            seen.iter_mut().for_each(|s| *s = false);
            for &dst in p {
                if dst >= dim || seen[dst] {
                    return Err(Error::InvalidAction(format!(
                        "permutation of element {g} is not a bijection"
                    )));
                }
                seen[dst] = true;
            }
            flat.extend(p.iter().map(|&v| v as u32));
        }
        let action = Self {
            group,
            dim,
            perms: flat,
            kind,
        };
        let e = action.group.identity();
        if action
            .perm(e)
            .iter()
            .enumerate()
            .any(|(j, &d)| d as usize != j)
        {
            return Err(Error::InvalidAction(
                "identity does not act trivially".into(),
            ));
        }
        if n <= EXHAUSTIVE_CHECK_LIMIT {
            action.verify_homomorphism()?;
        }
        Ok(action)
    }

    pub fn verify_homomorphism(&self) -> Result<()> {
        let n = self.group.order();
        for a in 0..n {
            for b in 0..n {
                let ab = self.perm(self.group.compose(a, b));
                let (pa, pb) = (self.perm(a), self.perm(b));
                if (0..self.dim).any(|j| ab[j] != pa[pb[j] as usize]) {
                    return Err(Error::InvalidAction(format!(
                        "homomorphism fails at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.group.order()
    }

    #[inline]
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Destination map of element `g`.
    #[inline]
    pub fn perm(&self, g: usize) -> &[u32] {
        &self.perms[g * self.dim..(g + 1) * self.dim]
    }

    fn check_element(&self, g: usize) -> Result<()> {
        if g >= self.order() {
            return Err(Error::ElementOutOfRange {
                index: g,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Writes `g·x` into `out`. Both slices must have length `dim`.
    pub fn act_into(&self, g: usize, x: &[f64], out: &mut [f64]) {
        for (&dst, &v) in self.perm(g).iter().zip(x) {
            out[dst as usize] = v;
        }
    }

    /// `g·I`.
    pub fn act(&self, g: usize, signal: &Signal) -> Result<Signal> {
        self.check_element(g)?;
        signal.check_dim(self.dim)?;
        let mut out = alloc::vec![0.0; self.dim];
        self.act_into(g, signal.as_slice(), &mut out);
        Signal::new(out)
    }

    /// `[g·I for g in 0..N]` in element-index order.
    pub fn orbit(&self, signal: &Signal) -> Result<Vec<Signal>> {
        signal.check_dim(self.dim)?;
        (0..self.order()).map(|g| self.act(g, signal)).collect()
    }
}

/// `Z_p` acting on `R^p` by circular shifts: element `s` sends coordinate
/// `j` to `(j + s) mod p`.
pub fn make_cyclic_group(p: usize) -> Result<GroupAction> {
    make_cyclic_group_with_max(p, DEFAULT_MAX_ORDER)
}

pub fn make_cyclic_group_with_max(p: usize, max_order: usize) -> Result<GroupAction> {
    if p == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let group = FiniteGroup::product(&[p], max_order)?;
    let perms = (0..p)
        .map(|s| (0..p).map(|j| (j + s) % p).collect())
        .collect();
    GroupAction::new(group, p, perms, GroupKind::Cyclic { p })
}

/// `Z_p × Z_p` acting on row-major `p×p` images by 2D circular shifts:
/// element `(a, b)` (index `a·p + b`) moves pixel `(r, c)` to
/// `((r + a) mod p, (c + b) mod p)`.
pub fn make_torus_group(p: usize) -> Result<GroupAction> {
    make_torus_group_with_max(p, DEFAULT_MAX_ORDER)
}

pub fn make_torus_group_with_max(p: usize, max_order: usize) -> Result<GroupAction> {
    if p == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let order = p.checked_mul(p).ok_or(Error::Capacity {
        order: usize::MAX,
        max: max_order,
    })?;
    if order > max_order {
        return Err(Error::Capacity {
            order,
            max: max_order,
        });
    }
    let group = FiniteGroup::product(&[p, p], max_order)?;
    let perms = (0..order)
        .map(|g| {
            let (a, b) = (g / p, g % p);
            (0..order)
                .map(|pix| {
                    let (r, c) = (pix / p, pix % p);
                    ((r + a) % p) * p + (c + b) % p
                })
                .collect()
        })
        .collect();
    GroupAction::new(group, order, perms, GroupKind::Torus { p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sig(v: &[f64]) -> Signal {
        Signal::new(v.to_vec()).unwrap()
    }

    #[test]
    fn trivial_group() {
        let a = make_cyclic_group(1).unwrap();
        assert_eq!(a.order(), 1);
        let x = sig(&[2.5]);
        assert_eq!(a.act(0, &x).unwrap(), x);
    }

    #[test]
    fn zero_order_rejected() {
        assert_eq!(make_cyclic_group(0).unwrap_err(), Error::InvalidOrder(0));
        assert_eq!(make_torus_group(0).unwrap_err(), Error::InvalidOrder(0));
    }

    #[test]
    fn z4_inverse_pair() {
        let a = make_cyclic_group(4).unwrap();
        assert_eq!(a.group().compose(1, 3), a.group().identity());
        assert_eq!(a.group().inverse(1), 3);
    }

    #[test]
    fn z6_cayley_is_addition_mod_6() {
        let a = make_cyclic_group(6).unwrap();
        let table = a.group().cayley_table();
        for x in 0..6 {
            for y in 0..6 {
                assert_eq!(table[x * 6 + y], (x + y) % 6);
            }
        }
        a.group().verify_axioms().unwrap();
    }

    #[test]
    fn z4_shift_example() {
        let a = make_cyclic_group(4).unwrap();
        assert_eq!(
            a.act(1, &sig(&[1., 2., 3., 4.])).unwrap(),
            sig(&[4., 1., 2., 3.])
        );
    }

    #[test]
    fn torus_order_two_element() {
        let a = make_torus_group(2).unwrap();
        assert_eq!(a.order(), 4);
        let img = sig(&[1., 2., 3., 4.]);
        let g = a.group().element(&[1, 1]);
        let twice = a.act(g, &a.act(g, &img).unwrap()).unwrap();
        assert_eq!(twice, img);
        assert_ne!(a.act(g, &img).unwrap(), img);
    }

    #[test]
    fn torus_one_hot_moves_down_a_row() {
        let a = make_torus_group(3).unwrap();
        let g = a.group().element(&[1, 0]);
        let moved = a.act(g, &Signal::basis(9, 0).unwrap()).unwrap();
        assert_eq!(moved, Signal::basis(9, 3).unwrap());
    }

    #[test]
    fn torus_homomorphism_all_81_pairs() {
        let a = make_torus_group(3).unwrap();
        a.verify_homomorphism().unwrap();
        a.group().verify_axioms().unwrap();
    }

    #[test]
    fn torus_capacity() {
        assert_eq!(
            make_torus_group_with_max(5, 24).unwrap_err(),
            Error::Capacity { order: 25, max: 24 }
        );
        assert!(make_torus_group_with_max(5, 25).is_ok());
    }

    #[test]
    fn act_errors() {
        let a = make_cyclic_group(4).unwrap();
        assert!(matches!(
            a.act(4, &sig(&[0.; 4])),
            Err(Error::ElementOutOfRange { .. })
        ));
        assert!(matches!(
            a.act(0, &sig(&[0.; 3])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            a.orbit(&sig(&[0.; 3])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn z3_orbit_of_one_hot() {
        let a = make_cyclic_group(3).unwrap();
        let orbit = a.orbit(&sig(&[1., 0., 0.])).unwrap();
        assert_eq!(
            orbit,
            vec![sig(&[1., 0., 0.]), sig(&[0., 1., 0.]), sig(&[0., 0., 1.])]
        );
    }

    #[test]
    fn constant_signal_is_fixed() {
        let a = make_torus_group(3).unwrap();
        let c = sig(&[0.7; 9]);
        assert!(a.orbit(&c).unwrap().iter().all(|s| *s == c));
    }

    #[test]
    fn cayley_constructor_round_trip() {
        let z5 = make_cyclic_group(5).unwrap();
        let g = FiniteGroup::from_cayley(5, z5.group().cayley_table()).unwrap();
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inverse(2), 3);
        assert_eq!(g.cayley_table(), z5.group().cayley_table());
    }

    #[test]
    fn cayley_constructor_rejects_non_groups() {
        // x∘y = x: no two-sided identity.
        let table: Vec<usize> = (0..9).map(|i| i / 3).collect();
        assert!(matches!(
            FiniteGroup::from_cayley(3, table),
            Err(Error::GroupAxioms(_))
        ));
        assert!(matches!(
            FiniteGroup::from_cayley(2, vec![0, 1, 1, 5]),
            Err(Error::GroupAxioms(_))
        ));
    }

    #[test]
    fn action_rejects_non_bijection() {
        let g = FiniteGroup::product(&[2], DEFAULT_MAX_ORDER).unwrap();
        let err =
            GroupAction::new(g, 2, vec![vec![0, 1], vec![0, 0]], GroupKind::Custom).unwrap_err();
        assert!(matches!(err, Error::InvalidAction(_)));
    }

    #[test]
    fn action_rejects_non_homomorphism() {
        // Z_3 sending element 1 to a transposition is not a homomorphism.
        let g = FiniteGroup::product(&[3], DEFAULT_MAX_ORDER).unwrap();
        let perms = vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 0, 1]];
        assert!(matches!(
            GroupAction::new(g, 3, perms, GroupKind::Custom),
            Err(Error::InvalidAction(_))
        ));
    }
}
