use serde::{Deserialize, Serialize};

use super::{classify_indices, Scheme2Error};
use crate::kv::{self, KvMap};
use crate::polar::{sc_decode, polar_transform_in_place, Kernel, Pin, PolarCodeSpec, ProcessingOrder};

/// Which of the two design channels the receiver is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Good set `A`: decode blocks left to right.
    First,
    /// Good set `B`: decode blocks right to left.
    Second,
}

/// `k` polar blocks of length `N` linked through the one-sided good sets.
///
/// Every block carries fresh bits on `A ∩ B`. Block `i < k - 1` carries fresh
/// bits on `A \ B`, and block `i + 1` repeats them on `B \ A`, matching the
/// `j`-th smallest index of one set with the `j`-th smallest of the other.
/// The first block's `B \ A` and the last block's `A \ B` are frozen to zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: u32,
    pub k: usize,
    pub common: Vec<usize>,
    pub first_only: Vec<usize>,
    pub second_only: Vec<usize>,
}

impl ChainSpec {
    /// Builds the chain from the two channels' designs. If the one-sided sets
    /// differ in size, the larger loses its largest-`z` members.
    pub fn from_specs(a: &PolarCodeSpec, b: &PolarCodeSpec, k: usize) -> Result<Self, Scheme2Error> {
        let types = classify_indices(&[a.clone(), b.clone()])?;
        let pick = |mask: u32| -> Vec<usize> { (0..types.len()).filter(|&i| types[i].0 == mask).collect() };
        let (common, mut first_only, mut second_only) = (pick(3), pick(1), pick(2));
        let s = first_only.len().min(second_only.len());
        trim_worst(&mut first_only, &a.z, s);
        trim_worst(&mut second_only, &b.z, s);
        Self::new(a.n, k, common, first_only, second_only)
    }

    pub fn new(
        n: u32,
        k: usize,
        common: Vec<usize>,
        first_only: Vec<usize>,
        second_only: Vec<usize>,
    ) -> Result<Self, Scheme2Error> {
        let len = 1usize << n;
        if k == 0 {
            return Err(Scheme2Error::Chain("k must be at least 1".into()));
        }
        if first_only.len() != second_only.len() {
            return Err(Scheme2Error::Chain(format!(
                "|A\\B| = {} but |B\\A| = {}",
                first_only.len(),
                second_only.len()
            )));
        }
        let mut seen = vec![false; len];
        for &i in common.iter().chain(&first_only).chain(&second_only) {
            if i >= len || std::mem::replace(&mut seen[i], true) {
                return Err(Scheme2Error::Chain(format!("index {i} out of range or reused")));
            }
        }
        let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&common) || !sorted(&first_only) || !sorted(&second_only) {
            return Err(Scheme2Error::Chain("index lists must be strictly increasing".into()));
        }
        Ok(ChainSpec {
            n,
            k,
            common,
            first_only,
            second_only,
        })
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    pub fn mismatch(&self) -> usize {
        self.first_only.len()
    }

    pub fn info_len(&self) -> usize {
        self.k * self.common.len() + (self.k - 1) * self.mismatch()
    }

    pub fn blocklength(&self) -> usize {
        self.k * self.block_len()
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.blocklength() as f64
    }

    /// The same chain seen from the other channel: sets swapped.
    pub fn mirrored(&self) -> Self {
        ChainSpec {
            n: self.n,
            k: self.k,
            common: self.common.clone(),
            first_only: self.second_only.clone(),
            second_only: self.first_only.clone(),
        }
    }

    /// Input vectors `u` of every block, before the transform.
    pub fn layout(&self, info: &[u8]) -> Result<Vec<Vec<u8>>, Scheme2Error> {
        if info.len() != self.info_len() {
            return Err(Scheme2Error::InfoLength {
                expected: self.info_len(),
                got: info.len(),
            });
        }
        let mut blocks = vec![vec![0u8; self.block_len()]; self.k];
        let mut it = info.iter().map(|b| b & 1);
        for i in 0..self.k {
            for &p in &self.common {
                blocks[i][p] = it.next().expect("length checked");
            }
            if i + 1 < self.k {
                for (j, &p) in self.first_only.iter().enumerate() {
                    let v = it.next().expect("length checked");
                    blocks[i][p] = v;
                    blocks[i + 1][self.second_only[j]] = v;
                }
            }
        }
        Ok(blocks)
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, Scheme2Error> {
        let mut out = Vec::with_capacity(self.blocklength());
        for mut u in self.layout(info)? {
            polar_transform_in_place(&mut u)?;
            out.extend(u);
        }
        Ok(out)
    }

    /// SC decisions for every block's input vector.
    pub fn decode_blocks(&self, llrs: &[f64], dir: Direction, kernel: Kernel) -> Result<Vec<Vec<u8>>, Scheme2Error> {
        let big_n = self.block_len();
        if llrs.len() != self.blocklength() {
            return Err(Scheme2Error::InfoLength {
                expected: self.blocklength(),
                got: llrs.len(),
            });
        }
        // Orient the chain so that decoding runs from block 0 upwards:
        // `info_set` is decoded, `carried` is pinned from the previous block.
        let (info_set, carried) = match dir {
            Direction::First => (&self.first_only, &self.second_only),
            Direction::Second => (&self.second_only, &self.first_only),
        };
        let order: Vec<usize> = match dir {
            Direction::First => (0..self.k).collect(),
            Direction::Second => (0..self.k).rev().collect(),
        };
        let mut blocks = vec![Vec::new(); self.k];
        let mut prev: Option<Vec<u8>> = None;
        for (step, &blk) in order.iter().enumerate() {
            let last = step + 1 == self.k;
            let mut pins = vec![Pin::Frozen(0); big_n];
            for &p in &self.common {
                pins[p] = Pin::Info;
            }
            if !last {
                for &p in info_set {
                    pins[p] = Pin::Info;
                }
            }
            if let Some(u) = &prev {
                for (j, &p) in carried.iter().enumerate() {
                    pins[p] = Pin::Frozen(u[info_set[j]]);
                }
            }
            let out = sc_decode(
                &llrs[blk * big_n..(blk + 1) * big_n],
                &pins,
                &ProcessingOrder::Natural,
                kernel,
            )?;
            prev = Some(out.bits.clone());
            blocks[blk] = out.bits;
        }
        Ok(blocks)
    }

    /// Decodes and reassembles the information bits.
    pub fn decode(&self, llrs: &[f64], dir: Direction) -> Result<Vec<u8>, Scheme2Error> {
        let blocks = self.decode_blocks(llrs, dir, Kernel::Exact)?;
        Ok(self.extract(&blocks))
    }

    /// Information bits from block inputs; the `A \ B` content of block `i`
    /// is read from block `i + 1`'s `B \ A` when decoding right to left,
    /// which is where the second channel actually recovered it.
    fn extract(&self, blocks: &[Vec<u8>]) -> Vec<u8> {
        let mut info = Vec::with_capacity(self.info_len());
        for i in 0..self.k {
            info.extend(self.common.iter().map(|&p| blocks[i][p]));
            if i + 1 < self.k {
                info.extend(self.first_only.iter().map(|&p| blocks[i][p]));
            }
        }
        info
    }

    pub fn to_kv(&self) -> KvMap {
        let mut m = KvMap::new();
        m.set("code", "chain");
        m.set("n", self.n);
        m.set("k", self.k);
        m.set("common", kv::join(&self.common));
        m.set("first_only", kv::join(&self.first_only));
        m.set("second_only", kv::join(&self.second_only));
        m.set("info_bits", self.info_len());
        m
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, Scheme2Error> {
        if m.get("code") != Some("chain") {
            return Err(Scheme2Error::Format("not a chain description".into()));
        }
        Self::new(
            m.parse_value("n")?,
            m.parse_value("k")?,
            m.parse_list("common")?,
            m.parse_list("first_only")?,
            m.parse_list("second_only")?,
        )
    }
}

/// Keeps the `keep` members of `set` with the smallest `z`.
pub(crate) fn trim_worst(set: &mut Vec<usize>, z: &[f64], keep: usize) {
    if set.len() <= keep {
        return;
    }
    set.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    set.truncate(keep);
    set.sort_unstable();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::channel::BmsChannel;
    use crate::polar::build_spec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noiseless(x: &[u8]) -> Vec<f64> {
        x.iter().map(|&b| if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY }).collect()
    }

    fn pair(n: u32, rate: f64) -> (PolarCodeSpec, PolarCodeSpec) {
        (
            build_spec(&BmsChannel::bec(0.5).unwrap(), n, rate).unwrap(),
            build_spec(&BmsChannel::bsc(0.11).unwrap(), n, rate).unwrap(),
        )
    }

    #[test]
    fn rate_example() {
        let c = ChainSpec::new(3, 3, vec![3, 5, 6, 7], vec![1, 2], vec![0, 4]).unwrap();
        assert_eq!(c.info_len(), 16);
        assert!((c.rate() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.rate() - (4.0 + 2.0 / 3.0 * 2.0) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_chain_is_independent_blocks() {
        let c = ChainSpec::new(3, 4, vec![5, 6, 7], vec![], vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let info = random_bits(&mut rng, c.info_len());
        let x = c.encode(&info).unwrap();
        for (i, block) in x.chunks(8).enumerate() {
            let mut u = vec![0u8; 8];
            for (j, &p) in [5, 6, 7].iter().enumerate() {
                u[p] = info[3 * i + j];
            }
            polar_transform_in_place(&mut u).unwrap();
            assert_eq!(block, &u[..]);
        }
    }

    #[test]
    fn invalid_chains() {
        assert!(ChainSpec::new(3, 2, vec![1], vec![2], vec![]).is_err());
        assert!(ChainSpec::new(3, 2, vec![1], vec![1], vec![2]).is_err());
        assert!(ChainSpec::new(3, 0, vec![1], vec![], vec![]).is_err());
        assert!(ChainSpec::new(3, 2, vec![9], vec![], vec![]).is_err());
    }

    #[test]
    fn noiseless_round_trip_both_directions() {
        let (a, b) = pair(8, 0.3);
        let c = ChainSpec::from_specs(&a, &b, 4).unwrap();
        assert!(c.mismatch() > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let info = random_bits(&mut rng, c.info_len());
        let y = noiseless(&c.encode(&info).unwrap());
        assert_eq!(c.decode(&y, Direction::First).unwrap(), info);
        assert_eq!(c.decode(&y, Direction::Second).unwrap(), info);
        let back = ChainSpec::from_kv(&KvMap::parse(&c.to_kv().to_text()).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn repeated_bits_sit_in_next_block() {
        let c = ChainSpec::new(3, 3, vec![7], vec![3, 5], vec![4, 6]).unwrap();
        let info: Vec<u8> = vec![1, 1, 0, 0, 0, 1, 1];
        let blocks = c.layout(&info).unwrap();
        assert_eq!((blocks[0][3], blocks[0][5]), (1, 0));
        assert_eq!((blocks[1][4], blocks[1][6]), (1, 0));
        assert_eq!((blocks[1][3], blocks[1][5]), (0, 1));
        assert_eq!((blocks[2][4], blocks[2][6]), (0, 1));
        assert_eq!((blocks[0][4], blocks[0][6], blocks[2][3], blocks[2][5]), (0, 0, 0, 0));
    }

    #[test]
    fn mirrored_chain_decodes_identically() {
        let (a, b) = pair(6, 0.35);
        let c = ChainSpec::from_specs(&a, &b, 3).unwrap();
        let m = c.mirrored();
        let ch = BmsChannel::bsc(0.06).unwrap();
        let s = ch.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let big_n = c.block_len();
        for _ in 0..200 {
            let llr: Vec<f64> = (0..c.blocklength())
                .map(|_| s.llr(rng.random_range(0..2), &mut rng))
                .collect();
            let reversed: Vec<f64> = llr.chunks(big_n).rev().flatten().copied().collect();
            let second = c.decode_blocks(&llr, Direction::Second, Kernel::Exact).unwrap();
            let mut first = m.decode_blocks(&reversed, Direction::First, Kernel::Exact).unwrap();
            first.reverse();
            assert_eq!(second, first);
        }
    }

    #[test]
    fn randomized_rate_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let n = rng.random_range(2..=8);
            let len = 1usize << n;
            let k = rng.random_range(1..=6);
            let mut idx: Vec<usize> = (0..len).collect();
            for i in (1..len).rev() {
                idx.swap(i, rng.random_range(0..=i));
            }
            let s = rng.random_range(0..=len / 3);
            let common_n = rng.random_range(0..=len - 2 * s);
            let mut common = idx[..common_n].to_vec();
            let mut a = idx[common_n..common_n + s].to_vec();
            let mut b = idx[common_n + s..common_n + 2 * s].to_vec();
            common.sort_unstable();
            a.sort_unstable();
            b.sort_unstable();
            let c = ChainSpec::new(n, k, common, a, b).unwrap();
            let info = random_bits(&mut rng, c.info_len());
            let blocks = c.layout(&info).unwrap();
            // Count positions that carry fresh information.
            let fresh: usize = (0..k)
                .map(|i| c.common.len() + if i + 1 < k { c.first_only.len() } else { 0 })
                .sum();
            assert_eq!(fresh, k * c.common.len() + (k - 1) * s);
            assert_eq!(c.info_len(), fresh);
            assert_eq!(blocks.len(), k);
            let expect = (c.common.len() as f64 + (k as f64 - 1.0) / k as f64 * s as f64) / len as f64;
            assert!((c.rate() - expect).abs() < 1e-12);
        }
    }
}
