use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable::StableSet;
use crate::vector::ObjectiveVector;

/// A Minkowski sum problem: `S` nonempty local stable sets of common dimension `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MspInstance {
    dim: usize,
    local_sets: Vec<StableSet>,
}

impl MspInstance {
    pub fn new(local_sets: Vec<StableSet>) -> Result<Self> {
        let first = local_sets
            .first()
            .ok_or_else(|| Error::InvalidInput("an instance needs at least one local set".into()))?;
        let dim = first.dim();
        for (s, set) in local_sets.iter().enumerate() {
            if set.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: set.dim(),
                });
            }
            if set.is_empty() {
                return Err(Error::InvalidInput(format!("local set {s} is empty")));
            }
        }
        Ok(MspInstance { dim, local_sets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_sets(&self) -> usize {
        self.local_sets.len()
    }

    pub fn local_sets(&self) -> &[StableSet] {
        &self.local_sets
    }

    pub fn local(&self, s: usize) -> &StableSet {
        &self.local_sets[s]
    }

    pub fn max_local_len(&self) -> usize {
        self.local_sets.iter().map(StableSet::len).max().unwrap_or(0)
    }

    /// `Π_s |Y^s|`, saturating.
    pub fn combination_count(&self) -> u128 {
        self.local_sets
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }

    /// Vector sum of one point per local set, selected by canonical index.
    pub fn vector_sum(&self, indices: &[usize]) -> Result<ObjectiveVector> {
        if indices.len() != self.num_sets() {
            return Err(Error::InvalidInput(format!(
                "combination has {} entries, instance has {} local sets",
                indices.len(),
                self.num_sets()
            )));
        }
        let mut acc = ObjectiveVector::zeros(self.dim);
        for (s, &i) in indices.iter().enumerate() {
            let y = self.local_sets[s]
                .get(i)
                .ok_or_else(|| Error::InvalidInput(format!("index {i} out of range for set {s}")))?;
            acc = acc.checked_add(y)?;
        }
        Ok(acc)
    }

    /// Replaces local set `s`, keeping everything else.
    pub fn with_local(&self, s: usize, set: StableSet) -> Result<MspInstance> {
        let mut sets = self.local_sets.clone();
        sets[s] = set;
        MspInstance::new(sets)
    }

    /// Shifts each local set by its own offset.
    pub fn shifted(&self, offsets: &[ObjectiveVector]) -> Result<MspInstance> {
        if offsets.len() != self.num_sets() {
            return Err(Error::InvalidInput("one offset per local set required".into()));
        }
        let sets = self
            .local_sets
            .iter()
            .zip(offsets)
            .map(|(set, z)| set.shift(z))
            .collect::<Result<Vec<_>>>()?;
        MspInstance::new(sets)
    }
}
