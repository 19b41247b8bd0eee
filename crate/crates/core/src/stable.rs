//! Stable (mutually nondominated) sets and the set relations between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::ObjectiveVector;

/// A finite set of mutually nondominated vectors, kept in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StableSet {
    dim: usize,
    points: Vec<ObjectiveVector>,
}

impl StableSet {
    /// Validates `points` (any order) and returns them as a canonical stable set.
    pub fn new(dim: usize, mut points: Vec<ObjectiveVector>) -> Result<Self> {
        for y in &points {
            if y.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: y.dim(),
                });
            }
        }
        points.sort_unstable();
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(Error::NotStable(format!("duplicate vector {}", w[0])));
            }
        }
        // A dominator is lexicographically smaller, so only earlier points need checking.
        for (i, y) in points.iter().enumerate() {
            if let Some(d) = points[..i].iter().find(|a| a.dominates(y)) {
                return Err(Error::NotStable(format!("{d} dominates {y}")));
            }
        }
        Ok(StableSet { dim, points })
    }

    pub fn empty(dim: usize) -> Self {
        StableSet {
            dim,
            points: Vec::new(),
        }
    }

    /// Caller guarantees `points` are sorted, unique and mutually nondominated.
    pub(crate) fn from_canonical(dim: usize, points: Vec<ObjectiveVector>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        StableSet { dim, points }
    }

    pub fn singleton(y: ObjectiveVector) -> Self {
        StableSet {
            dim: y.dim(),
            points: vec![y],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ObjectiveVector] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ObjectiveVector> {
        self.points.iter()
    }

    pub fn get(&self, i: usize) -> Option<&ObjectiveVector> {
        self.points.get(i)
    }

    /// Position of `y` in canonical order.
    pub fn index_of(&self, y: &ObjectiveVector) -> Option<usize> {
        self.points.binary_search(y).ok()
    }

    pub fn contains(&self, y: &ObjectiveVector) -> bool {
        self.index_of(y).is_some()
    }

    pub fn into_points(self) -> Vec<ObjectiveVector> {
        self.points
    }

    /// Subset by canonical indices (kept sorted, so still canonical).
    pub fn subset(&self, indices: &[usize]) -> StableSet {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        StableSet::from_canonical(self.dim, idx.into_iter().map(|i| self.points[i].clone()).collect())
    }

    /// `self ⊕ {z}`. Translation preserves both order and stability.
    pub fn shift(&self, z: &ObjectiveVector) -> Result<StableSet> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.dim(),
            });
        }
        let points = self
            .points
            .iter()
            .map(|y| y.checked_add(z))
            .collect::<Result<Vec<_>>>()?;
        Ok(StableSet::from_canonical(self.dim, points))
    }

    fn check_same_dim(&self, other: &StableSet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a StableSet {
    type Item = &'a ObjectiveVector;
    type IntoIter = std::slice::Iter<'a, ObjectiveVector>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// `A ≦ B`: every `b` is weakly dominated by some `a`.
pub fn set_leqq(a: &StableSet, b: &StableSet) -> Result<bool> {
    a.check_same_dim(b)?;
    Ok(b.iter().all(|y| a.iter().any(|x| x.weakly_dominates(y))))
}

/// `A ≤ B`: `A ≦ B` and `A ≠ B`.
pub fn set_leq(a: &StableSet, b: &StableSet) -> Result<bool> {
    Ok(set_leqq(a, b)? && a != b)
}

/// `A < B`: every `b` is dominated (`≤`) by some `a`.
pub fn set_lt(a: &StableSet, b: &StableSet) -> Result<bool> {
    a.check_same_dim(b)?;
    Ok(b.iter().all(|y| a.iter().any(|x| x.dominates(y))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(points: &[&[i64]]) -> StableSet {
        let p = points[0].len();
        StableSet::new(p, points.iter().map(|c| ObjectiveVector::new(c.iter().copied())).collect())
            .unwrap()
    }

    #[test]
    fn construction_rejects_dominated_and_duplicates() {
        let dup = vec![ObjectiveVector::from([1, 2]), ObjectiveVector::from([1, 2])];
        assert!(matches!(StableSet::new(2, dup), Err(Error::NotStable(_))));
        let dom = vec![ObjectiveVector::from([2, 2]), ObjectiveVector::from([1, 2])];
        assert!(matches!(StableSet::new(2, dom), Err(Error::NotStable(_))));
        let bad_dim = vec![ObjectiveVector::from([1, 2, 3])];
        assert!(matches!(
            StableSet::new(2, bad_dim),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let s = set(&[&[2, 0], &[0, 2], &[1, 1]]);
        assert_eq!(s.points()[0], ObjectiveVector::from([0, 2]));
        assert_eq!(s.points()[2], ObjectiveVector::from([2, 0]));
        let t = set(&[&[1, 1], &[2, 0], &[0, 2]]);
        assert_eq!(s, t);
    }

    #[test]
    fn set_relation_examples() {
        assert!(set_lt(&set(&[&[0, 0]]), &set(&[&[1, 1]])).unwrap());
        let a = set(&[&[0, 1], &[1, 0]]);
        assert!(set_leqq(&a, &a).unwrap());
        assert!(!set_leq(&a, &a).unwrap());
        assert!(!set_lt(&a, &a).unwrap());
        // (1,1) is weakly dominated by neither (0,2) nor (2,0)
        assert!(!set_leqq(&set(&[&[0, 2], &[2, 0]]), &set(&[&[1, 1]])).unwrap());
    }

    #[test]
    fn shift_examples() {
        let a = set(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            a.shift(&ObjectiveVector::from([5, 5])).unwrap(),
            set(&[&[5, 6], &[6, 5]])
        );
        assert_eq!(a.shift(&ObjectiveVector::zeros(2)).unwrap(), a);
        assert_eq!(
            a.shift(&ObjectiveVector::from([i64::MAX, 0])),
            Err(Error::Overflow)
        );
    }

    fn stable2() -> impl Strategy<Value = StableSet> {
        proptest::collection::vec((0i64..20, 0i64..20), 1..12).prop_map(|pts| {
            let pts: Vec<_> = pts.into_iter().map(|(a, b)| ObjectiveVector::from([a, b])).collect();
            crate::ndfilter::filter_naive(2, &pts)
        })
    }

    proptest! {
        #[test]
        fn leqq_is_reflexive_and_transitive(a in stable2(), b in stable2(), c in stable2()) {
            prop_assert!(set_leqq(&a, &a).unwrap());
            if set_leqq(&a, &b).unwrap() && set_leqq(&b, &c).unwrap() {
                prop_assert!(set_leqq(&a, &c).unwrap());
            }
        }
    }
}
