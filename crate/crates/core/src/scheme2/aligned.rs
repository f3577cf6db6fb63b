use serde::{Deserialize, Serialize};

use super::chain::trim_worst;
use super::{classify_indices, compound_gap, full_mask, IndexType, Scheme2Error};
use crate::channel::BmsChannel;
use crate::kv::{self, KvMap};
use crate::polar::{best_indices, build_spec, decide, evolve_bhattacharyya, Kernel, PolarGraph};

/// Alignment levels tried per stage before giving up.
pub const DEFAULT_MAX_DEPTH: usize = 16;

/// One block of a (possibly multi-level) aligned code.
///
/// `z[j][label]` bounds the synthetic channel at `label` under channel `j`
/// and `types[label]` records which channels treat it as good. Information
/// goes on the labels good for all `t` channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedBlockSpec {
    pub t: usize,
    pub base_n: u32,
    pub graph: PolarGraph,
    pub z: Vec<Vec<f64>>,
    pub types: Vec<IndexType>,
    /// Alignment levels applied by each stage.
    pub kappa: Vec<usize>,
}

/// How one stage of [`build_universal_block`] went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub initial_mismatch: f64,
    pub final_mismatch: f64,
    pub kappa: usize,
    pub length: usize,
}

impl AlignedBlockSpec {
    /// One base block of length `2^n`; every channel's good set is its
    /// `floor(R N)` most reliable indices.
    pub fn base(channels: &[BmsChannel], n: u32, rate: f64) -> Result<Self, Scheme2Error> {
        if channels.is_empty() {
            return Err(Scheme2Error::TooFewChannels { needed: 1, got: 0 });
        }
        let specs = channels
            .iter()
            .map(|c| build_spec(c, n, rate))
            .collect::<Result<Vec<_>, _>>()?;
        let types = classify_indices(&specs)?;
        Ok(AlignedBlockSpec {
            t: channels.len(),
            base_n: n,
            graph: PolarGraph::base(n),
            z: specs.into_iter().map(|s| s.z).collect(),
            types,
            kappa: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn info_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.types[i].all(self.t)).collect()
    }

    /// Information labels in the order the decoder reaches them.
    pub fn info_order(&self) -> Vec<usize> {
        let full = full_mask(self.t);
        self.graph
            .order()
            .into_iter()
            .filter(|&i| self.types[i].0 & full == full)
            .collect()
    }

    pub fn info_len(&self) -> usize {
        self.info_set().len()
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.len() as f64
    }

    /// Labels carrying every bit of `joint` but not `bit`, and the reverse.
    pub fn mismatch_sets(&self, joint: u32, bit: u32) -> (Vec<usize>, Vec<usize>) {
        let mut only_joint = Vec::new();
        let mut only_bit = Vec::new();
        for (i, ty) in self.types.iter().enumerate() {
            let a = ty.0 & joint == joint;
            let b = ty.0 & bit == bit;
            match (a, b) {
                (true, false) => only_joint.push(i),
                (false, true) => only_bit.push(i),
                _ => {}
            }
        }
        (only_joint, only_bit)
    }

    /// Fraction of labels good for the joint channels but not for `bit`.
    pub fn mismatch(&self, joint: u32, bit: u32) -> f64 {
        self.mismatch_sets(joint, bit).0.len() as f64 / self.len() as f64
    }

    /// Sum of channel `j`'s `z` over the information labels.
    pub fn union_bound(&self, channel: usize) -> f64 {
        self.info_set().iter().map(|&i| self.z[channel][i]).sum()
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, Scheme2Error> {
        let order = self.info_order();
        if info.len() != order.len() {
            return Err(Scheme2Error::InfoLength {
                expected: order.len(),
                got: info.len(),
            });
        }
        let mut u = vec![0u8; self.len()];
        for (&label, &b) in order.iter().zip(info) {
            u[label] = b & 1;
        }
        Ok(self.graph.encode(&u)?)
    }

    /// SC decoding along the graph's processing order. Information bits come
    /// back in the order [`encode`](Self::encode) consumed them.
    pub fn decode(&self, llrs: &[f64], kernel: Kernel) -> Result<Vec<u8>, Scheme2Error> {
        if llrs.len() != self.len() {
            return Err(Scheme2Error::InfoLength {
                expected: self.len(),
                got: llrs.len(),
            });
        }
        let full = full_mask(self.t);
        let mut dec = self.graph.decoder(kernel);
        dec.reset(llrs);
        let mut info = Vec::with_capacity(self.info_len());
        for label in self.graph.order() {
            let llr = dec.prepare(label);
            let bit = if self.types[label].0 & full == full {
                let b = decide(llr);
                info.push(b);
                b
            } else {
                0
            };
            dec.commit(label, bit);
        }
        Ok(info)
    }

    pub fn to_kv(&self) -> KvMap {
        let mut m = KvMap::new();
        m.set("code", "aligned");
        m.set("t", self.t);
        m.set("base_n", self.base_n);
        m.set("graph", &self.graph);
        m.set("types", kv::join(&self.types.iter().map(|t| t.0).collect::<Vec<_>>()));
        m.set("kappa", kv::join(&self.kappa));
        for (j, z) in self.z.iter().enumerate() {
            m.set(&format!("z{j}"), kv::join(z));
        }
        m.set("blocklength", self.len());
        m.set("info_bits", self.info_len());
        m
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, Scheme2Error> {
        if m.get("code") != Some("aligned") {
            return Err(Scheme2Error::Format("not an aligned description".into()));
        }
        let t: usize = m.parse_value("t")?;
        let graph: PolarGraph = m.parse_value("graph")?;
        let types: Vec<IndexType> = m.parse_list::<u32>("types")?.into_iter().map(IndexType).collect();
        let z = (0..t)
            .map(|j| m.parse_list::<f64>(&format!("z{j}")))
            .collect::<Result<Vec<_>, _>>()?;
        let len = graph.len();
        if types.len() != len || z.iter().any(|v| v.len() != len) {
            return Err(Scheme2Error::Format(format!("label count differs from graph length {len}")));
        }
        Ok(AlignedBlockSpec {
            t,
            base_n: m.parse_value("base_n")?,
            graph,
            z,
            types,
            kappa: m.parse_list("kappa")?,
        })
    }
}

/// Aligns two blocks. Labels of `b1` good for every channel in `joint` but
/// not for `bit` are paired, in processing order, with labels of `b2` good for
/// `bit` but not for all of `joint`. The worse output of a pair keeps the
/// intersection of the two types and the better one their union. If the
/// sets differ in size, the larger loses its least reliable members, which
/// become frozen.
pub fn align(b1: &AlignedBlockSpec, b2: &AlignedBlockSpec, joint: u32, bit: u32) -> Result<AlignedBlockSpec, Scheme2Error> {
    if b1.t != b2.t {
        return Err(Scheme2Error::ChannelCount(b1.t, b2.t));
    }
    let (mut ones, _) = b1.mismatch_sets(joint, bit);
    let (_, mut twos) = b2.mismatch_sets(joint, bit);
    let bit_channel = bit.trailing_zeros() as usize;
    let joint_z: Vec<f64> = (0..b1.len())
        .map(|i| {
            (0..b1.t)
                .filter(|&j| joint >> j & 1 == 1)
                .map(|j| b1.z[j][i])
                .fold(0.0, f64::max)
        })
        .collect();
    let s = ones.len().min(twos.len());
    let mut types1 = b1.types.clone();
    let mut types2 = b2.types.clone();
    let dropped1 = trimmed(&mut ones, &joint_z, s);
    let dropped2 = trimmed(&mut twos, &b2.z[bit_channel], s);
    for i in dropped1 {
        types1[i] = IndexType(0);
    }
    for i in dropped2 {
        types2[i] = IndexType(0);
    }

    let by_rank = |g: &PolarGraph, set: &mut Vec<usize>| {
        let order = g.order();
        let mut rank = vec![0usize; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        set.sort_by_key(|&i| rank[i]);
    };
    by_rank(&b1.graph, &mut ones);
    by_rank(&b2.graph, &mut twos);
    let pairs: Vec<(usize, usize)> = ones.into_iter().zip(twos).collect();

    let graph = PolarGraph::aligned(b1.graph.clone(), b2.graph.clone(), pairs.clone())?;
    let node = match &graph {
        PolarGraph::Aligned(node) => node,
        PolarGraph::Base { .. } => unreachable!("aligned() builds a node"),
    };
    let z = (0..b1.t).map(|j| node.combine_z(&b1.z[j], &b2.z[j])).collect();
    let len1 = b1.len();
    let mut types: Vec<IndexType> = types1.iter().chain(&types2).copied().collect();
    for &(a, b) in &pairs {
        let (f1, f2) = (types1[a].0, types2[b].0);
        types[a] = IndexType(f1 & f2);
        types[len1 + b] = IndexType(f1 | f2);
    }
    Ok(AlignedBlockSpec {
        t: b1.t,
        base_n: b1.base_n,
        graph,
        z,
        types,
        kappa: b1.kappa.clone(),
    })
}

fn trimmed(set: &mut Vec<usize>, z: &[f64], keep: usize) -> Vec<usize> {
    let before = set.clone();
    trim_worst(set, z, keep);
    before.into_iter().filter(|i| set.binary_search(i).is_err()).collect()
}

/// Result of [`build_universal_block`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalBlock {
    pub spec: AlignedBlockSpec,
    pub stages: Vec<StageReport>,
    /// Gap of the base block, before any alignment.
    pub initial_gap: f64,
    /// `max(1, 2 gap t / eps)^(t - 1) 2^n`.
    pub length_bound: f64,
}

impl UniversalBlock {
    pub fn within_length_bound(&self) -> bool {
        self.spec.len() as f64 <= self.length_bound * (1.0 + 1e-12)
    }
}

/// Builds a block whose information set is good for every channel.
///
/// Stage `j` starts from the labels good for channels `0 .. j` and marks as
/// good for channel `j` the same number of labels with the smallest `z` under
/// channel `j`. The block is then aligned with a copy of itself until the
/// fraction of labels good for `0 .. j` but not for `j` is at most `eps / t`.
/// Labels that do not end up good for `0 ..= j` are frozen.
pub fn build_universal_block(
    channels: &[BmsChannel],
    n: u32,
    rate: f64,
    eps: f64,
    max_depth: usize,
) -> Result<UniversalBlock, Scheme2Error> {
    let t = channels.len();
    if t == 0 {
        return Err(Scheme2Error::TooFewChannels { needed: 1, got: 0 });
    }
    let full = AlignedBlockSpec::base(channels, n, rate)?;
    let initial_gap = compound_gap(&full.types, t);
    let z: Vec<Vec<f64>> = channels.iter().map(|c| evolve_bhattacharyya(c, n)).collect();
    let mut spec = AlignedBlockSpec {
        t,
        base_n: n,
        graph: PolarGraph::base(n),
        types: full.types.iter().map(|ty| IndexType(ty.0 & 1)).collect(),
        z,
        kappa: vec![0],
    };
    let target = eps / t as f64;
    let mut stages = Vec::with_capacity(t);
    stages.push(StageReport {
        stage: 0,
        initial_mismatch: 0.0,
        final_mismatch: 0.0,
        kappa: 0,
        length: spec.len(),
    });
    for j in 1..t {
        let joint = full_mask(j);
        let bit = 1u32 << j;
        let joint_count = spec.types.iter().filter(|ty| ty.0 & joint == joint).count();
        for ty in spec.types.iter_mut() {
            ty.0 &= !bit;
        }
        for i in best_indices(&spec.z[j], joint_count) {
            spec.types[i].0 |= bit;
        }
        let initial_mismatch = spec.mismatch(joint, bit);
        let mut kappa = 0;
        while spec.mismatch(joint, bit) > target {
            if kappa == max_depth {
                return Err(Scheme2Error::DepthExceeded {
                    stage: j,
                    depth: kappa,
                    mismatch: spec.mismatch(joint, bit),
                    target,
                });
            }
            spec = align(&spec, &spec, joint, bit)?;
            kappa += 1;
        }
        let final_mismatch = spec.mismatch(joint, bit);
        let keep = full_mask(j + 1);
        for ty in spec.types.iter_mut() {
            if ty.0 & keep != keep {
                ty.0 = 0;
            }
        }
        spec.kappa.push(kappa);
        stages.push(StageReport {
            stage: j,
            initial_mismatch,
            final_mismatch,
            kappa,
            length: spec.len(),
        });
    }
    let factor = (2.0 * initial_gap * t as f64 / eps).max(1.0);
    let length_bound = factor.powi(t as i32 - 1) * (1u64 << n) as f64;
    Ok(UniversalBlock {
        spec,
        stages,
        initial_gap,
        length_bound,
    })
}
