//! Principal-curvature profiles: distinct values with multiplicities.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::linalg;

/// Two principal curvatures closer than this are counted as one.
pub const MERGE_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalProfile {
    /// `(lambda, multiplicity)` in ascending order of `lambda`.
    pub entries: Vec<(f64, usize)>,
    /// Lengths `(b1, b2)` of the projections of the Hopf vector onto the two
    /// principal spaces it meets, when there are exactly two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopf: Option<[f64; 2]>,
}

impl PrincipalProfile {
    /// Builds a profile from unsorted eigenvalues, merging within [`MERGE_GAP`].
    pub fn from_eigenvalues(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            entries: linalg::cluster(&sorted, MERGE_GAP),
            hopf: None,
        }
    }

    pub fn new(entries: Vec<(f64, usize)>, hopf: Option<[f64; 2]>) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        if entries.iter().any(|(l, m)| *m == 0 || !l.is_finite()) {
            return Err(GeoError::InvalidInput("multiplicities must be positive and values finite".into()));
        }
        if entries.windows(2).any(|w| w[1].0 - w[0].0 < MERGE_GAP) {
            return Err(GeoError::CoincidentEigenvalues(format!("{entries:?}")));
        }
        Ok(Self { entries, hopf })
    }

    /// Number `g` of distinct principal curvatures.
    pub fn g(&self) -> usize {
        self.entries.len()
    }

    pub fn total_dim(&self) -> usize {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    pub fn multiplicity_of(&self, lambda: f64, tol: f64) -> Option<usize> {
        self.entries
            .iter()
            .find(|(l, _)| (l - lambda).abs() <= tol)
            .map(|(_, m)| *m)
    }

    /// Largest distance between matching entries of two profiles with the same
    /// multiplicity pattern, or `None` when the patterns differ.
    pub fn distance(&self, other: &Self) -> Option<f64> {
        if self.entries.len() != other.entries.len() {
            return None;
        }
        let mut worst = 0.0_f64;
        for ((a, ma), (b, mb)) in self.entries.iter().zip(&other.entries) {
            if ma != mb {
                return None;
            }
            worst = worst.max((a - b).abs());
        }
        Some(worst)
    }
}
