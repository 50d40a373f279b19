use std::fmt;

use crate::error::{Error, Result};

/// A permutation of `{1, …, n}` in one-line notation, stored zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// From zero-based images; rejects non-bijections.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::ShapeMismatch(format!(
                    "{images:?} is not a permutation of 0..{n}"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// From the usual one-based one-line notation, e.g. `[2, 1, 3]`.
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::ShapeMismatch("one-line notation is one-based".into()));
        }
        Self::from_images(images.iter().map(|i| i - 1).collect())
    }

    /// The cycle `(i … 1)` of S_n sending `1 ↦ i`, `k ↦ k-1` for `2 <= k <= i`
    /// and fixing the rest (`i` is one-based).
    pub fn cycle_to_front(n: usize, i: usize) -> Self {
        assert!(1 <= i && i <= n);
        let mut images: Vec<usize> = (0..n).collect();
        images[0] = i - 1;
        for (k, img) in images.iter_mut().enumerate().take(i).skip(1) {
            *img = k - 1;
        }
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Zero-based image of a zero-based point.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len());
        Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    /// Pairs `(i, j)` with `i < j` and `σ(i) > σ(j)`, zero-based.
    pub fn inversions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| {
            ((i + 1)..n).filter_map(move |j| (self.images[i] > self.images[j]).then_some((i, j)))
        })
    }

    pub fn sign(&self) -> i64 {
        if self.inversions().count().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// `(x_{σ(1)}, …, x_{σ(n)})`.
    pub fn permute<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.images.iter().map(|&i| items[i].clone()).collect()
    }

    /// All of S_n in lexicographic order of one-line notation.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation { images: current.clone() });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot exists");
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.images.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_symmetric_group() {
        assert_eq!(Permutation::all(0).len(), 1);
        assert_eq!(Permutation::all(4).len(), 24);
        let s3 = Permutation::all(3);
        assert_eq!(s3[0], Permutation::identity(3));
        assert_eq!(s3.iter().filter(|p| p.sign() == -1).count(), 3);
    }

    #[test]
    fn composition_and_inverse() {
        let a = Permutation::from_one_line(&[2, 3, 1]).unwrap();
        let b = Permutation::from_one_line(&[2, 1, 3]).unwrap();
        assert_eq!(a.compose(&b).images(), &[2, 1, 0]);
        assert_eq!(a.compose(&a.inverse()), Permutation::identity(3));
        assert!(Permutation::from_one_line(&[1, 1]).is_err());
    }

    #[test]
    fn front_cycle() {
        let c = Permutation::cycle_to_front(4, 3);
        assert_eq!(c.to_string(), "[3,1,2,4]");
        assert_eq!(c.permute(&['a', 'b', 'c', 'd']), vec!['c', 'a', 'b', 'd']);
        assert_eq!(Permutation::cycle_to_front(3, 1), Permutation::identity(3));
    }
}
