//! Objective vectors and the binary dominance relations between them.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Inline capacity; generated instances never exceed five objectives.
type Coords = SmallVec<[i64; 5]>;

/// A point in integer objective space. Ordered lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Coords);

impl ObjectiveVector {
    pub fn new(coords: impl IntoIterator<Item = i64>) -> Self {
        ObjectiveVector(coords.into_iter().collect())
    }

    pub fn zeros(p: usize) -> Self {
        ObjectiveVector(SmallVec::from_elem(0, p))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Componentwise sum, failing on 64-bit overflow.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        let mut out = Coords::with_capacity(self.dim());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            out.push(a.checked_add(*b).ok_or(Error::Overflow)?);
        }
        Ok(ObjectiveVector(out))
    }

    /// Componentwise difference, failing on 64-bit overflow.
    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        let mut out = Coords::with_capacity(self.dim());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            out.push(a.checked_sub(*b).ok_or(Error::Overflow)?);
        }
        Ok(ObjectiveVector(out))
    }

    /// Sum of all coordinates, widened so it cannot overflow.
    pub fn coord_sum(&self) -> i128 {
        self.0.iter().map(|&c| c as i128).sum()
    }

    /// `self ≦ other`: no coordinate larger.
    #[inline]
    pub fn weakly_dominates(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `self ≤ other`: weakly dominates and differs.
    #[inline]
    pub fn dominates(&self, other: &Self) -> bool {
        self.weakly_dominates(other) && self != other
    }

    /// `self < other`: every coordinate strictly smaller.
    #[inline]
    pub fn strictly_dominates(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a < b)
    }
}

impl From<Vec<i64>> for ObjectiveVector {
    fn from(v: Vec<i64>) -> Self {
        ObjectiveVector(Coords::from_vec(v))
    }
}

impl<const N: usize> From<[i64; N]> for ObjectiveVector {
    fn from(v: [i64; N]) -> Self {
        ObjectiveVector::new(v)
    }
}

impl fmt::Debug for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Outcome of comparing an ordered pair `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dominance {
    Equal,
    /// `a < b` in every coordinate.
    StrictlyDominates,
    /// `a ≤ b` with at least one tie.
    Dominates,
    /// `b < a` in every coordinate.
    StrictlyDominated,
    /// `b ≤ a` with at least one tie.
    Dominated,
    Incomparable,
}

impl Dominance {
    /// True when `a ≤ b` (strict or not).
    pub fn a_dominates(self) -> bool {
        matches!(self, Dominance::StrictlyDominates | Dominance::Dominates)
    }

    /// True when `a ≦ b`.
    pub fn a_weakly_dominates(self) -> bool {
        self == Dominance::Equal || self.a_dominates()
    }

    pub fn reversed(self) -> Self {
        match self {
            Dominance::StrictlyDominates => Dominance::StrictlyDominated,
            Dominance::Dominates => Dominance::Dominated,
            Dominance::StrictlyDominated => Dominance::StrictlyDominates,
            Dominance::Dominated => Dominance::Dominates,
            other => other,
        }
    }
}

pub(crate) fn check_dims(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Classifies the ordered pair `(a, b)` under the three dominance relations.
pub fn compare(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<Dominance> {
    check_dims(a, b)?;
    let (mut less, mut greater, mut equal) = (0usize, 0usize, 0usize);
    for (x, y) in a.coords().iter().zip(b.coords()) {
        match x.cmp(y) {
            std::cmp::Ordering::Less => less += 1,
            std::cmp::Ordering::Greater => greater += 1,
            std::cmp::Ordering::Equal => equal += 1,
        }
    }
    let p = a.dim();
    Ok(match (less, greater) {
        (0, 0) => Dominance::Equal,
        (l, 0) if l == p => Dominance::StrictlyDominates,
        (_, 0) => Dominance::Dominates,
        (0, g) if g == p => Dominance::StrictlyDominated,
        (0, _) => Dominance::Dominated,
        _ => {
            debug_assert!(less > 0 && greater > 0 && less + greater + equal == p);
            Dominance::Incomparable
        }
    })
}
