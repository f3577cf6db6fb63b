use serde::{Deserialize, Serialize};

use super::PolarError;
use crate::channel::BmsChannel;

/// Bhattacharyya upper bounds for all `2^n` synthetic channels, in decoding
/// order. Each split maps `z` to `(2z - z^2, z^2)`; exact for the BEC.
pub fn evolve_bhattacharyya(ch: &BmsChannel, n: u32) -> Vec<f64> {
    evolve_from(ch.bhattacharyya(), n)
}

pub(crate) fn evolve_from(z0: f64, n: u32) -> Vec<f64> {
    let mut z = vec![z0];
    for _ in 0..n {
        z = z
            .iter()
            .flat_map(|&v| [(2.0 * v - v * v).clamp(0.0, 1.0), v * v])
            .collect();
    }
    z
}

/// A polar code designed for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarCodeSpec {
    pub n: u32,
    pub z: Vec<f64>,
    /// Sorted information indices.
    pub good_set: Vec<usize>,
    pub channel_label: String,
}

impl PolarCodeSpec {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Sum of `z` over the good set; bounds the SC block error probability.
    pub fn bound(&self) -> f64 {
        self.good_set.iter().map(|&i| self.z[i]).sum()
    }

    pub fn rate(&self) -> f64 {
        self.good_set.len() as f64 / self.len() as f64
    }

    pub fn info_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.len()];
        for &i in &self.good_set {
            m[i] = true;
        }
        m
    }
}

/// Picks the `floor(R N)` indices with the smallest `z` (smaller index wins ties).
pub fn build_spec(ch: &BmsChannel, n: u32, rate: f64) -> Result<PolarCodeSpec, PolarError> {
    let z = evolve_bhattacharyya(ch, n);
    spec_from_z(z, n, rate, ch.label())
}

pub(crate) fn spec_from_z(z: Vec<f64>, n: u32, rate: f64, label: &str) -> Result<PolarCodeSpec, PolarError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(PolarError::Rate(rate));
    }
    let size = (rate * z.len() as f64 + 1e-9).floor() as usize;
    Ok(PolarCodeSpec {
        n,
        good_set: best_indices(&z, size),
        z,
        channel_label: label.to_string(),
    })
}

/// The `count` indices of smallest `z`, ties to the smaller index, sorted.
pub(crate) fn best_indices(z: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    idx.truncate(count);
    idx.sort_unstable();
    idx
}
