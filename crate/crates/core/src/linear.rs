//! Sparse linear combinations and exact row reduction over the cyclotomic field.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use crate::cyclotomic::CycScalar;

/// A finitely supported map `K → k` with no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinComb<K: Ord> {
    terms: BTreeMap<K, CycScalar>,
}

impl<K: Ord> Default for LinComb<K> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> LinComb<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(key: K, coeff: CycScalar) -> Self {
        let mut out = Self::zero();
        out.add_term(key, coeff);
        out
    }

    pub fn basis(key: K) -> Self {
        Self::term(key, CycScalar::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&K, &CycScalar)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl DoubleEndedIterator<Item = &K> {
        self.terms.keys()
    }

    pub fn coeff(&self, key: &K) -> CycScalar {
        self.terms.get(key).cloned().unwrap_or_else(CycScalar::zero)
    }

    pub fn get(&self, key: &K) -> Option<&CycScalar> {
        self.terms.get(key)
    }

    /// Largest key with its coefficient.
    pub fn leading(&self) -> Option<(&K, &CycScalar)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, key: K, coeff: CycScalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn remove(&mut self, key: &K) -> Option<CycScalar> {
        self.terms.remove(key)
    }

    pub fn pop_leading(&mut self) -> Option<(K, CycScalar)> {
        self.terms.pop_last()
    }

    /// `self += c·other`.
    pub fn add_scaled(&mut self, other: &LinComb<K>, c: &CycScalar) {
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v * c);
        }
    }

    pub fn scaled(&self, c: &CycScalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LinComb { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn map_keys<J: Ord + Clone>(&self, mut f: impl FnMut(&K) -> J) -> LinComb<J> {
        let mut out = LinComb::zero();
        for (k, v) in &self.terms {
            out.add_term(f(k), v.clone());
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<(K, CycScalar)> for LinComb<K> {
    fn from_iter<I: IntoIterator<Item = (K, CycScalar)>>(iter: I) -> Self {
        let mut out = Self::zero();
        for (k, v) in iter {
            out.add_term(k, v);
        }
        out
    }
}

impl<K: Ord + Clone> IntoIterator for LinComb<K> {
    type Item = (K, CycScalar);
    type IntoIter = std::collections::btree_map::IntoIter<K, CycScalar>;
    fn into_iter(self) -> Self::IntoIter {
        self.terms.into_iter()
    }
}

impl<K: Ord + Clone> Add<&LinComb<K>> for &LinComb<K> {
    type Output = LinComb<K>;
    fn add(self, rhs: &LinComb<K>) -> LinComb<K> {
        let mut out = self.clone();
        out.add_scaled(rhs, &CycScalar::one());
        out
    }
}

impl<K: Ord + Clone> Sub<&LinComb<K>> for &LinComb<K> {
    type Output = LinComb<K>;
    fn sub(self, rhs: &LinComb<K>) -> LinComb<K> {
        let mut out = self.clone();
        out.add_scaled(rhs, &CycScalar::from_int(-1));
        out
    }
}

impl<K: Ord + Clone> Neg for &LinComb<K> {
    type Output = LinComb<K>;
    fn neg(self) -> LinComb<K> {
        LinComb { terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect() }
    }
}

/// A sparse row or column vector indexed by position.
pub type SparseVec = LinComb<usize>;

/// Incremental reduced row echelon form.
///
/// Every stored row has pivot coefficient one and zeros in all other pivot
/// columns, so reducing a vector needs a single pass.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut out = v.clone();
        for (col, c) in v.iter() {
            if let Some(row) = self.rows.get(col) {
                out.add_scaled(row, &-c);
            }
        }
        out
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Add a row; returns `false` when it was already in the span.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let r = self.reduce(v);
        let Some((&pivot, lead)) = r.iter().next() else {
            return false;
        };
        let inv = lead.inv().expect("nonzero pivot");
        let r = r.scaled(&inv);
        for row in self.rows.values_mut() {
            let c = row.coeff(&pivot);
            if !c.is_zero() {
                row.add_scaled(&r, &-c);
            }
        }
        self.rows.insert(pivot, r);
        true
    }

    pub fn row(&self, pivot: usize) -> Option<&SparseVec> {
        self.rows.get(&pivot)
    }

    /// Basis of `{x : A x = 0}` for the rows inserted so far, over `ncols` columns.
    pub fn kernel(&self, ncols: usize) -> Vec<SparseVec> {
        (0..ncols)
            .filter(|c| !self.rows.contains_key(c))
            .map(|free| {
                let mut v = SparseVec::basis(free);
                for (&p, row) in &self.rows {
                    let c = row.coeff(&free);
                    if !c.is_zero() {
                        v.add_term(p, -c);
                    }
                }
                v
            })
            .collect()
    }
}

/// A basis of the null space of the matrix with the given rows.
pub fn kernel(rows: &[SparseVec], ncols: usize) -> Vec<SparseVec> {
    let mut ech = Echelon::new();
    for r in rows {
        ech.insert(r);
    }
    ech.kernel(ncols)
}

/// Some solution of `A x = b` (free variables set to zero), or `None`.
pub fn solve(rows: &[SparseVec], rhs: &[CycScalar], ncols: usize) -> Option<SparseVec> {
    assert_eq!(rows.len(), rhs.len());
    let mut ech = Echelon::new();
    for (r, b) in rows.iter().zip(rhs) {
        let mut aug = r.clone();
        aug.add_term(ncols, b.clone());
        ech.insert(&aug);
    }
    if ech.rows.contains_key(&ncols) {
        return None;
    }
    Some(
        ech.rows
            .iter()
            .map(|(&p, row)| (p, row.coeff(&ncols)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[(usize, i64)]) -> SparseVec {
        entries.iter().map(|&(k, c)| (k, CycScalar::from_int(c))).collect()
    }

    fn apply(rows: &[SparseVec], x: &SparseVec) -> Vec<CycScalar> {
        rows.iter()
            .map(|r| {
                r.iter().fold(CycScalar::zero(), |acc, (k, c)| acc + c * &x.coeff(k))
            })
            .collect()
    }

    #[test]
    fn lincomb_cancels() {
        let a = v(&[(0, 1), (1, 2)]);
        let b = v(&[(1, 2)]);
        assert_eq!(&a - &b, v(&[(0, 1)]));
        assert!((&a - &a).is_zero());
        assert_eq!(a.leading().map(|(k, _)| *k), Some(1));
    }

    #[test]
    fn kernel_of_rank_one() {
        let rows = vec![v(&[(0, 1), (1, 1), (2, 1)]), v(&[(0, 2), (1, 2), (2, 2)])];
        let ker = kernel(&rows, 3);
        assert_eq!(ker.len(), 2);
        for k in &ker {
            assert!(apply(&rows, k).iter().all(CycScalar::is_zero));
        }
    }

    #[test]
    fn solve_consistent_and_not() {
        let rows = vec![v(&[(0, 1), (1, 1)]), v(&[(0, 1), (1, -1)])];
        let x = solve(&rows, &[CycScalar::from_int(3), CycScalar::from_int(1)], 2).unwrap();
        assert_eq!(x.coeff(&0), CycScalar::from_int(2));
        assert_eq!(x.coeff(&1), CycScalar::from_int(1));
        let rows = vec![v(&[(0, 1)]), v(&[(0, 2)])];
        assert!(solve(&rows, &[CycScalar::from_int(1), CycScalar::from_int(1)], 1).is_none());
    }

    #[test]
    fn cyclotomic_pivots() {
        let z = CycScalar::root_of_unity(3, 1);
        let rows = vec![[(0, z.clone()), (1, CycScalar::one())].into_iter().collect::<SparseVec>()];
        let ker = kernel(&rows, 2);
        assert_eq!(ker.len(), 1);
        assert!(apply(&rows, &ker[0]).iter().all(CycScalar::is_zero));
        let mut ech = Echelon::new();
        assert!(ech.insert(&rows[0]));
        assert!(!ech.insert(&rows[0].scaled(&z)));
    }
}
