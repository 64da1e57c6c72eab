//! Multi-indices, monotone sets, margins and bulk selection.

use super::SparsePolyError;
use crate::real::Real;
use std::collections::HashMap;
use std::fmt;

/// A multi-index in `N^m`; component `i` is the polynomial degree in `ξ_i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Box<[u8]>);

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, d) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

impl MultiIndex {
    pub fn new(degrees: &[u8]) -> Self {
        Self(degrees.into())
    }

    pub fn zero(m: usize) -> Self {
        Self(vec![0; m].into())
    }

    pub fn unit(m: usize, i: usize) -> Self {
        let mut d = vec![0u8; m];
        d[i] = 1;
        Self(d.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn deg(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn degrees(&self) -> &[u8] {
        &self.0
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().map(|&d| d as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn plus(&self, i: usize) -> MultiIndex {
        let mut d = self.0.to_vec();
        d[i] += 1;
        MultiIndex(d.into())
    }

    pub fn minus(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut d = self.0.to_vec();
        d[i] -= 1;
        Some(MultiIndex(d.into()))
    }

    /// Dimensions with nonzero degree.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, _)| i)
    }
}

/// An ordered, duplicate-free collection of multi-indices.
///
/// The stored order is the construction order, which keeps coefficient
/// matrices aligned; set algebra (unions) returns lexicographically sorted
/// results so that combined objects are reproducible.
#[derive(Debug, Clone)]
pub struct MultiIndexSet {
    m: usize,
    indices: Vec<MultiIndex>,
    pos: HashMap<MultiIndex, usize>,
}

impl MultiIndexSet {
    pub fn empty(m: usize) -> Self {
        Self { m, indices: Vec::new(), pos: HashMap::new() }
    }

    /// The set `{0}`, the starting point of every adaptive fit.
    pub fn zero(m: usize) -> Self {
        let mut s = Self::empty(m);
        s.push(MultiIndex::zero(m)).unwrap();
        s
    }

    pub fn from_indices(
        m: usize,
        indices: impl IntoIterator<Item = MultiIndex>,
    ) -> Result<Self, SparsePolyError> {
        let mut s = Self::empty(m);
        for mi in indices {
            s.push(mi)?;
        }
        Ok(s)
    }

    /// All indices of total degree at most `p` in lexicographic order.
    pub fn total_degree(m: usize, p: usize) -> Self {
        fn rec(m: usize, p: usize, prefix: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            if prefix.len() == m {
                out.push(MultiIndex::new(prefix));
                return;
            }
            let used: usize = prefix.iter().map(|&d| d as usize).sum();
            for d in 0..=(p - used) {
                prefix.push(d as u8);
                rec(m, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(m, p, &mut Vec::new(), &mut out);
        out.sort();
        Self::from_indices(m, out).unwrap()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, k: usize) -> &MultiIndex {
        &self.indices[k]
    }

    pub fn contains(&self, mi: &MultiIndex) -> bool {
        self.pos.contains_key(mi)
    }

    pub fn position(&self, mi: &MultiIndex) -> Option<usize> {
        self.pos.get(mi).copied()
    }

    pub fn push(&mut self, mi: MultiIndex) -> Result<usize, SparsePolyError> {
        if mi.dim() != self.m {
            return Err(SparsePolyError::DimensionMismatch { got: mi.dim(), want: self.m });
        }
        if self.pos.contains_key(&mi) {
            return Err(SparsePolyError::DuplicateIndex);
        }
        let k = self.indices.len();
        self.pos.insert(mi.clone(), k);
        self.indices.push(mi);
        Ok(k)
    }

    /// Monotone (downward closed): every `α ≤ β ∈ A` is in `A`.
    pub fn is_monotone(&self) -> bool {
        self.indices.iter().all(|mi| {
            (0..self.m).all(|i| match mi.minus(i) {
                Some(lower) => self.contains(&lower),
                None => true,
            })
        })
    }

    /// Margin of a monotone set: indices outside `A` with some backward
    /// neighbor inside.
    pub fn margin(&self) -> Result<Vec<MultiIndex>, SparsePolyError> {
        self.require_monotone()?;
        let mut out: Vec<MultiIndex> = self
            .indices
            .iter()
            .flat_map(|mi| (0..self.m).map(move |i| mi.plus(i)))
            .filter(|c| !self.contains(c))
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Reduced margin: indices outside `A` with all backward neighbors inside.
    /// Adding any subset keeps the set monotone.
    pub fn reduced_margin(&self) -> Result<Vec<MultiIndex>, SparsePolyError> {
        let mut out = self.margin()?;
        out.retain(|c| {
            (0..self.m).all(|i| match c.minus(i) {
                Some(lower) => self.contains(&lower),
                None => true,
            })
        });
        Ok(out)
    }

    fn require_monotone(&self) -> Result<(), SparsePolyError> {
        if self.indices.is_empty() {
            return Err(SparsePolyError::EmptySet);
        }
        if !self.is_monotone() {
            return Err(SparsePolyError::NotMonotone);
        }
        Ok(())
    }

    /// Union with another set over the same dimension, sorted
    /// lexicographically.
    pub fn union(&self, other: &MultiIndexSet) -> MultiIndexSet {
        assert_eq!(self.m, other.m);
        let mut all: Vec<MultiIndex> =
            self.indices.iter().chain(other.indices.iter()).cloned().collect();
        all.sort();
        all.dedup();
        MultiIndexSet::from_indices(self.m, all).unwrap()
    }

    /// Largest degree in variable `i` over the set.
    pub fn partial_degree(&self, i: usize) -> usize {
        self.indices.iter().map(|mi| mi.deg(i)).max().unwrap_or(0)
    }
}

/// Monotone envelope of per-index values on a monotone set:
/// `𝔳_α = max over β ∈ A, β ≥ α of value_β`.
pub fn monotone_envelope<T: Real>(
    values: &[T],
    set: &MultiIndexSet,
) -> Result<Vec<T>, SparsePolyError> {
    if values.len() != set.len() {
        return Err(SparsePolyError::DimensionMismatch { got: values.len(), want: set.len() });
    }
    set.require_monotone()?;
    let n = set.len();
    let mut env = values.to_vec();
    // sort positions by descending total degree so each index only needs its
    // immediate forward neighbors
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        set.get(b)
            .total_degree()
            .cmp(&set.get(a).total_degree())
            .then_with(|| set.get(a).cmp(set.get(b)))
    });
    for &k in &order {
        let mi = set.get(k);
        for i in 0..set.m() {
            let up = mi.plus(i);
            if let Some(p) = set.position(&up) {
                if env[p] > env[k] {
                    env[k] = env[p];
                }
            }
        }
    }
    Ok(env)
}

/// Smallest subset of a (reduced) margin carrying at least a `θ` fraction of
/// the squared coefficient energy: sort by descending norm and take a prefix.
/// Ties break on lexicographic index order; all-zero norms return the
/// lexicographically smallest single index so the adaptation can progress.
pub fn select_bulk<T: Real>(
    margin: &[MultiIndex],
    norms_sq: &[T],
    theta: T,
) -> Vec<MultiIndex> {
    assert_eq!(margin.len(), norms_sq.len());
    assert!(theta >= T::zero() && theta <= T::one(), "theta must be in [0, 1]");
    if margin.is_empty() {
        return Vec::new();
    }
    let total: T = norms_sq.iter().copied().sum();
    if total <= T::zero() {
        let smallest = margin.iter().min().unwrap();
        return vec![smallest.clone()];
    }
    let mut order: Vec<usize> = (0..margin.len()).collect();
    order.sort_by(|&a, &b| {
        norms_sq[b].partial_cmp(&norms_sq[a]).unwrap().then_with(|| margin[a].cmp(&margin[b]))
    });
    let target = theta * total;
    let mut out = Vec::new();
    let mut acc = T::zero();
    for &k in &order {
        if acc >= target && !out.is_empty() {
            break;
        }
        if norms_sq[k] == T::zero() {
            break;
        }
        out.push(margin[k].clone());
        acc = acc + norms_sq[k];
    }
    if out.is_empty() {
        out.push(margin[order[0]].clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(d: &[u8]) -> MultiIndex {
        MultiIndex::new(d)
    }

    /// Brute-force margin by scanning a lattice box two degrees wider than
    /// the set.
    fn brute_margin(set: &MultiIndexSet, reduced: bool) -> Vec<MultiIndex> {
        let m = set.m();
        let mut max_deg = vec![0usize; m];
        for idx in set.iter() {
            for i in 0..m {
                max_deg[i] = max_deg[i].max(idx.deg(i));
            }
        }
        let mut out = Vec::new();
        let mut cur = vec![0u8; m];
        loop {
            let cand = MultiIndex::new(&cur);
            if !set.contains(&cand) {
                let check = |i: usize| match cand.minus(i) {
                    Some(lower) => set.contains(&lower),
                    None => true,
                };
                let in_margin = if reduced {
                    (0..m).all(check) && !cand.is_zero()
                } else {
                    (0..m).any(|i| cand.deg(i) > 0 && set.contains(&cand.minus(i).unwrap()))
                };
                if in_margin {
                    out.push(cand);
                }
            }
            // odometer over the box [0, max_deg+2]^m
            let mut carry = true;
            for i in 0..m {
                if carry {
                    if (cur[i] as usize) < max_deg[i] + 2 {
                        cur[i] += 1;
                        carry = false;
                    } else {
                        cur[i] = 0;
                    }
                }
            }
            if carry {
                break;
            }
        }
        out.sort();
        out
    }

    #[test]
    fn singleton_margins_are_unit_vectors() {
        let a = MultiIndexSet::zero(2);
        let m = a.margin().unwrap();
        assert_eq!(m, vec![mi(&[0, 1]), mi(&[1, 0])]);
        assert_eq!(a.reduced_margin().unwrap(), m);
    }

    #[test]
    fn two_element_set_margins() {
        let a = MultiIndexSet::from_indices(2, [mi(&[0, 0]), mi(&[1, 0])]).unwrap();
        let margin = a.margin().unwrap();
        assert_eq!(margin, vec![mi(&[0, 1]), mi(&[1, 1]), mi(&[2, 0])]);
        let reduced = a.reduced_margin().unwrap();
        assert_eq!(reduced, vec![mi(&[0, 1]), mi(&[2, 0])]);
        assert_eq!(margin, brute_margin(&a, false));
        assert_eq!(reduced, brute_margin(&a, true));
    }

    #[test]
    fn random_monotone_sets_match_brute_force() {
        // grow random monotone sets in m = 4 by repeatedly adding reduced
        // margin elements, checking against the lattice scan
        let mut state = 42u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..25 {
            let mut a = MultiIndexSet::zero(4);
            let grow = next() % 12;
            for _ in 0..grow {
                let rm = a.reduced_margin().unwrap();
                let pick = rm[next() % rm.len()].clone();
                if pick.total_degree() <= 3 {
                    a.push(pick).unwrap();
                }
            }
            assert!(a.is_monotone());
            assert_eq!(a.margin().unwrap(), brute_margin(&a, false));
            assert_eq!(a.reduced_margin().unwrap(), brute_margin(&a, true));
        }
    }

    #[test]
    fn non_monotone_rejected() {
        let a = MultiIndexSet::from_indices(2, [mi(&[0, 0]), mi(&[2, 0])]).unwrap();
        assert!(!a.is_monotone());
        assert!(matches!(a.margin(), Err(SparsePolyError::NotMonotone)));
    }

    #[test]
    fn envelope_cases() {
        // antitone values are their own envelope
        let a = MultiIndexSet::from_indices(1, [mi(&[0]), mi(&[1]), mi(&[2])]).unwrap();
        let v = vec![5.0, 3.0, 1.0];
        assert_eq!(monotone_envelope(&v, &a).unwrap(), v);
        // spec example: values (0, 5, 1) -> envelope (5, 5, 1)
        let v = vec![0.0, 5.0, 1.0];
        assert_eq!(monotone_envelope(&v, &a).unwrap(), vec![5.0, 5.0, 1.0]);
        // constant values stay constant
        let v = vec![2.5, 2.5, 2.5];
        assert_eq!(monotone_envelope(&v, &a).unwrap(), v);
        // 2D cross-check against direct max
        let b = MultiIndexSet::from_indices(
            2,
            [mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1]), mi(&[1, 1])],
        )
        .unwrap();
        let vals = vec![1.0, 0.5, 0.25, 4.0];
        let env = monotone_envelope(&vals, &b).unwrap();
        for (k, alpha) in b.iter().enumerate() {
            let direct = b
                .iter()
                .zip(&vals)
                .filter(|(beta, _)| alpha.le(beta))
                .map(|(_, v)| *v)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(env[k], direct);
        }
    }

    #[test]
    fn bulk_selection_prefixes() {
        let margin = vec![mi(&[1, 0]), mi(&[0, 1]), mi(&[1, 1])];
        // norms² (9, 4, 1), θ = 0.5: top-1 suffices (9 ≥ 7)
        let sel = select_bulk(&margin, &[9.0, 4.0, 1.0], 0.5);
        assert_eq!(sel, vec![mi(&[1, 0])]);
        // θ = 1: all nonzero norms
        let sel = select_bulk(&margin, &[9.0, 0.0, 1.0], 1.0);
        assert_eq!(sel, vec![mi(&[1, 0]), mi(&[1, 1])]);
        // θ = 0: single argmax
        let sel = select_bulk(&margin, &[1.0, 4.0, 2.0], 0.0);
        assert_eq!(sel, vec![mi(&[0, 1])]);
        // all-zero norms: lexicographically smallest single index
        let sel = select_bulk(&margin, &[0.0, 0.0, 0.0], 0.5);
        assert_eq!(sel, vec![mi(&[0, 1])]);
    }

    #[test]
    fn union_is_sorted_and_monotone_sets_stay_monotone() {
        let a = MultiIndexSet::from_indices(2, [mi(&[0, 0]), mi(&[1, 0])]).unwrap();
        let b = MultiIndexSet::from_indices(2, [mi(&[0, 0]), mi(&[0, 1])]).unwrap();
        let u = a.union(&b);
        assert_eq!(u.indices(), &[mi(&[0, 0]), mi(&[0, 1]), mi(&[1, 0])]);
        assert!(u.is_monotone());
    }

    #[test]
    fn total_degree_set_count() {
        let s = MultiIndexSet::total_degree(3, 4);
        // C(3+4, 4) = 35
        assert_eq!(s.len(), 35);
        assert!(s.is_monotone());
    }
}
