//! Chained and aligned polar codes for a finite set of channels.
//!
//! Both constructions start from the per-channel good sets of one polar
//! block and recover the indices that are good for one channel but not the
//! other. A chain repeats such indices across consecutive blocks and decodes
//! in the direction that suits the channel. Alignment instead polarizes a
//! `(1, 0)` index of one block with a `(0, 1)` index of another, creating a
//! `(0, 0)` and a `(1, 1)` index, and recurses until the mismatch is small.

mod aligned;
mod chain;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kv::KvError;
use crate::polar::{PolarCodeSpec, PolarError};

pub use aligned::{
    align, build_universal_block, AlignedBlockSpec, StageReport, UniversalBlock, DEFAULT_MAX_DEPTH,
};
pub use chain::{ChainSpec, Direction};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Scheme2Error {
    #[error("good sets have different block lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} channels, got {got}")]
    TooFewChannels { needed: usize, got: usize },
    #[error("expected {expected} bits, got {got}")]
    InfoLength { expected: usize, got: usize },
    #[error("blocks disagree on the channel count ({0} vs {1})")]
    ChannelCount(usize, usize),
    #[error("invalid chain: {0}")]
    Chain(String),
    #[error("stage {stage}: mismatch {mismatch:.4} still above {target:.4} after {depth} alignments")]
    DepthExceeded {
        stage: usize,
        depth: usize,
        mismatch: f64,
        target: f64,
    },
    #[error("invalid description: {0}")]
    Format(String),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Kv(#[from] KvError),
}

/// Membership of one index in each channel's good set; bit `j` is channel `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IndexType(pub u32);

impl IndexType {
    pub fn has(self, channel: usize) -> bool {
        self.0 >> channel & 1 == 1
    }

    /// True iff every channel in `0 .. t` has the index in its good set.
    pub fn all(self, t: usize) -> bool {
        let full = full_mask(t);
        self.0 & full == full
    }
}

pub(crate) fn full_mask(t: usize) -> u32 {
    if t >= 32 {
        u32::MAX
    } else {
        (1u32 << t) - 1
    }
}

/// Per-index membership across the good sets of `specs`.
pub fn classify_indices(specs: &[PolarCodeSpec]) -> Result<Vec<IndexType>, Scheme2Error> {
    let first = specs.first().ok_or(Scheme2Error::TooFewChannels { needed: 1, got: 0 })?;
    let len = first.len();
    let mut types = vec![IndexType(0); len];
    for (j, s) in specs.iter().enumerate() {
        if s.len() != len {
            return Err(Scheme2Error::LengthMismatch(len, s.len()));
        }
        for &i in &s.good_set {
            types[i].0 |= 1 << j;
        }
    }
    Ok(types)
}

/// Finite-length gap `min_j |A_j| / N - |A_1 ∩ ... ∩ A_t| / N`, with the good
/// set sizes read off the type vector.
pub fn compound_gap(types: &[IndexType], t: usize) -> f64 {
    if types.is_empty() || t == 0 {
        return 0.0;
    }
    let len = types.len() as f64;
    let min_size = (0..t)
        .map(|j| types.iter().filter(|ty| ty.has(j)).count())
        .min()
        .unwrap_or(0);
    let joint = types.iter().filter(|ty| ty.all(t)).count();
    (min_size - joint.min(min_size)) as f64 / len
}

/// Sorted indices good for every channel.
pub fn intersection(types: &[IndexType], t: usize) -> Vec<usize> {
    (0..types.len()).filter(|&i| types[i].all(t)).collect()
}

/// Counts of each type value, indexed by mask.
pub fn type_counts(types: &[IndexType], t: usize) -> Vec<usize> {
    let mut counts = vec![0; 1 << t];
    for ty in types {
        counts[(ty.0 & full_mask(t)) as usize] += 1;
    }
    counts
}
