//! Sets of feature indices.
//!
//! Indices are 0-based inside the crate. Everything user-facing (files, CLI
//! records, the oracle wire protocol, `Display`, serde) is 1-based; the
//! conversion happens only in [`FeatureSet::from_one_based`] and
//! [`FeatureSet::to_one_based`].

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureSet {
    members: Vec<usize>,
}

impl FeatureSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{0, .., m-1}`.
    pub fn full(m: usize) -> Self {
        Self {
            members: (0..m).collect(),
        }
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = indices.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    /// Builds a set from 1-based indices, checking bounds against `m`.
    pub fn from_one_based(indices: &[usize], m: usize) -> Result<Self> {
        for &i in indices {
            if i == 0 || i > m {
                return Err(Error::Usage(format!("feature index {i} out of range 1..={m}")));
            }
        }
        Ok(Self::from_indices(indices.iter().map(|i| i - 1)))
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            members: mask.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect(),
        }
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.members.iter().map(|i| i + 1).collect()
    }

    pub fn to_mask(&self, m: usize) -> Vec<bool> {
        let mut mask = vec![false; m];
        for &i in &self.members {
            mask[i] = true;
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn insert(&mut self, i: usize) -> bool {
        match self.members.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.members.insert(pos, i);
                true
            }
        }
    }

    pub fn remove(&mut self, i: usize) -> bool {
        match self.members.binary_search(&i) {
            Ok(pos) => {
                self.members.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn without(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.remove(i);
        s
    }

    pub fn union(&self, other: &FeatureSet) -> Self {
        Self::from_indices(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &FeatureSet) -> Self {
        Self {
            members: self.iter().filter(|&i| !other.contains(i)).collect(),
        }
    }

    pub fn intersects(&self, other: &FeatureSet) -> bool {
        self.iter().any(|i| other.contains(i))
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// `{0..m} \ self`.
    pub fn complement(&self, m: usize) -> Self {
        Self {
            members: (0..m).filter(|&i| !self.contains(i)).collect(),
        }
    }

    /// Largest member plus one, i.e. the smallest universe containing the set.
    pub fn bound(&self) -> usize {
        self.members.last().map_or(0, |i| i + 1)
    }
}

impl FromIterator<usize> for FeatureSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_indices(iter)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.members.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

impl Serialize for FeatureSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FeatureSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(deserializer)?;
        if raw.contains(&0) {
            return Err(serde::de::Error::custom("feature indices are 1-based"));
        }
        Ok(Self::from_indices(raw.into_iter().map(|i| i - 1)))
    }
}
