use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{h2, h2_inv, quantize, Atom, BmsChannel, ChannelError, GridDensity};

/// Largest grid resolution accepted by default.
pub const DEFAULT_MAX_RESOLUTION: u64 = 10_000_000;

/// Largest number of grid densities `members` will enumerate.
const ENUMERATION_LIMIT: f64 = 2e6;

/// A finite set of channels, all of capacity at least `target_capacity`
/// minus whatever slack the producer states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFamily {
    pub members: Vec<BmsChannel>,
    pub target_capacity: f64,
}

/// Grid-based dominating set for `BMS(C)` at slack `eps`.
///
/// Every channel is first quantized to the grid with resolution `T`, then
/// each atom is lowered by `shift = 3 sqrt(delta)` with `delta = 2 / T`. The
/// lowered representative is degraded with respect to the original channel
/// and loses at most `h2(1.5 sqrt(delta)) <= eps` capacity. Representatives
/// are produced on demand; full enumeration is available for tiny grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominatingSet {
    pub capacity: f64,
    pub eps: f64,
    /// `h2^{-1}(eps)`.
    pub h: f64,
    /// `ceil(9 / (8 h^2))`.
    pub a: u64,
    /// Grid resolution, `ceil(9 / (2 h^2))` unless overridden.
    pub t: u64,
    pub delta: f64,
    pub shift: f64,
}

impl DominatingSet {
    pub fn new(capacity: f64, eps: f64) -> Result<Self, ChannelError> {
        Self::with_limit(capacity, eps, DEFAULT_MAX_RESOLUTION)
    }

    pub fn with_limit(capacity: f64, eps: f64, max_t: u64) -> Result<Self, ChannelError> {
        check_unit("capacity", capacity)?;
        check_unit("eps", eps)?;
        let h = h2_inv(eps);
        let a = (9.0 / (8.0 * h * h)).ceil();
        let t = (9.0 / (2.0 * h * h)).ceil();
        if !t.is_finite() || t > max_t as f64 {
            return Err(ChannelError::ResolutionLimit {
                t: if t.is_finite() { t as u64 } else { u64::MAX },
                limit: max_t,
            });
        }
        Ok(Self::build(capacity, eps, h, a as u64, t as u64))
    }

    /// Same construction with an explicit grid resolution, for experiments
    /// with grids small enough to enumerate.
    pub fn with_resolution(capacity: f64, eps: f64, t: u64) -> Result<Self, ChannelError> {
        check_unit("capacity", capacity)?;
        check_unit("eps", eps)?;
        if t == 0 {
            return Err(ChannelError::Parameter {
                kind: "dominating set",
                value: 0.0,
                expected: "T >= 1",
            });
        }
        let h = h2_inv(eps);
        let a = (9.0 / (8.0 * h * h)).ceil() as u64;
        Ok(Self::build(capacity, eps, h, a, t))
    }

    fn build(capacity: f64, eps: f64, h: f64, a: u64, t: u64) -> Self {
        let delta = 2.0 / t as f64;
        DominatingSet {
            capacity,
            eps,
            h,
            a,
            t,
            delta,
            shift: 3.0 * delta.sqrt(),
        }
    }

    /// Upper bound on the capacity lost by the shift, `h2(1.5 sqrt(delta))`.
    pub fn shift_capacity_loss_bound(&self) -> f64 {
        h2((1.5 * self.delta.sqrt()).min(0.5))
    }

    /// `log2 binom(2A, A)`, the size bound on the family.
    pub fn log2_size_bound(&self) -> f64 {
        log2_binomial(2 * self.a, self.a)
    }

    /// Lowers every atom of a grid density by the shift.
    pub fn shifted(&self, grid: &GridDensity) -> BmsChannel {
        let atoms = grid
            .to_channel()
            .atoms()
            .iter()
            .map(|a| Atom {
                x: (a.x - self.shift).max(0.0),
                p: a.p,
            })
            .collect();
        BmsChannel::from_atoms(atoms, format!("dom:T={}:{:?}", self.t, grid.counts()))
            .expect("shift keeps a valid density")
    }

    pub fn member_capacity_ok(&self, ch: &BmsChannel) -> bool {
        ch.capacity() >= self.capacity - self.eps
    }

    /// The member assigned to `ch`, or `None` when the shifted grid point
    /// falls below the capacity threshold and is therefore not in the set.
    pub fn representative_for(&self, ch: &BmsChannel) -> Option<(GridDensity, BmsChannel)> {
        let grid = quantize(ch, self.t);
        let rep = self.shifted(&grid);
        self.member_capacity_ok(&rep).then_some((grid, rep))
    }

    /// Members materialized for a list of channels, without duplicates.
    pub fn cover<'a>(&self, channels: impl IntoIterator<Item = &'a BmsChannel>) -> ChannelFamily {
        let mut seen = HashSet::new();
        let mut members = Vec::new();
        for ch in channels {
            if let Some((grid, rep)) = self.representative_for(ch) {
                if seen.insert(grid) {
                    members.push(rep);
                }
            }
        }
        ChannelFamily {
            members,
            target_capacity: self.capacity,
        }
    }

    /// Every member, by enumerating all grid densities. Only feasible for
    /// tiny `T`; larger grids return a resolution-limit error.
    pub fn members(&self) -> Result<ChannelFamily, ChannelError> {
        let count = log2_binomial(2 * self.t, self.t).exp2();
        if count > ENUMERATION_LIMIT {
            return Err(ChannelError::ResolutionLimit {
                t: self.t,
                limit: max_enumerable_t(),
            });
        }
        let mut members = Vec::new();
        let mut counts = vec![0u64; self.t as usize + 1];
        compositions(self.t, 0, &mut counts, &mut |c| {
            let rep = self.shifted(&GridDensity::new(self.t, c.to_vec()));
            if self.member_capacity_ok(&rep) {
                members.push(rep);
            }
        });
        Ok(ChannelFamily {
            members,
            target_capacity: self.capacity,
        })
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<(), ChannelError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ChannelError::Parameter {
            kind: name,
            value: v,
            expected: "strictly between 0 and 1",
        })
    }
}

fn max_enumerable_t() -> u64 {
    (1..).take_while(|&t| log2_binomial(2 * t, t).exp2() <= ENUMERATION_LIMIT).last().unwrap_or(1)
}

fn compositions(left: u64, at: usize, counts: &mut [u64], f: &mut impl FnMut(&[u64])) {
    if at + 1 == counts.len() {
        counts[at] = left;
        f(counts);
        return;
    }
    for c in 0..=left {
        counts[at] = c;
        compositions(left - c, at + 1, counts, f);
    }
    counts[at] = 0;
}

pub(crate) fn log2_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).log2()).sum()
}
