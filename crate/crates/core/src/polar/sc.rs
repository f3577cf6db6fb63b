use serde::{Deserialize, Serialize};

use super::{log2_len, PolarError};

/// Check-node rule used by the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Kernel {
    /// `2 atanh(tanh(a/2) tanh(b/2))`, evaluated in a stable log form.
    #[default]
    Exact,
    /// `sign(a) sign(b) min(|a|, |b|)`.
    MinSum,
}

/// LLR of the XOR of two bits with LLRs `a` and `b`.
#[inline]
pub fn boxplus(a: f64, b: f64, kernel: Kernel) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let (ma, mb) = (a.abs(), b.abs());
    let min = ma.min(mb);
    if min.is_nan() {
        return 0.0;
    }
    if kernel == Kernel::MinSum || ma.is_infinite() || mb.is_infinite() {
        return sign * min;
    }
    let v = sign * min + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
    if v.is_nan() {
        0.0
    } else {
        v
    }
}

/// LLR of the second input once the XOR partner `u` is known.
#[inline]
pub fn g_update(a: f64, b: f64, u: u8) -> f64 {
    let v = if u == 0 { b + a } else { b - a };
    if v.is_nan() {
        0.0
    } else {
        v
    }
}

/// Hard decision; a zero LLR decides 0.
#[inline]
pub fn decide(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

/// Status of one synthetic channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pin {
    Info,
    /// Known to the receiver; the value need not be zero.
    Frozen(u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ProcessingOrder {
    #[default]
    Natural,
    Custom(Vec<usize>),
}

/// Step-by-step successive-cancellation decoder for one `2^n` block.
///
/// Call `prepare(i)` to get the LLR of `u_i` and `commit(i, bit)` to fix it,
/// for `i = 0, 1, ..., N - 1` in order. Only the nodes on the path to the
/// current leaf are recomputed, so a full pass costs `O(N log N)`.
#[derive(Debug, Clone)]
pub struct BaseSc {
    n: usize,
    kernel: Kernel,
    /// `alpha[l]` holds the LLRs of the active node at depth `l` (length `N >> l`).
    alpha: Vec<Vec<f64>>,
    /// `left[l]` is the re-encoded left sibling of the active node at depth `l`.
    left: Vec<Vec<u8>>,
    /// `enc[l]` is the re-encoded output of the most recently finished node.
    enc: Vec<Vec<u8>>,
    next: usize,
    prepared: bool,
}

impl BaseSc {
    pub fn new(n: u32, kernel: Kernel) -> Self {
        let n = n as usize;
        let sizes: Vec<usize> = (0..=n).map(|l| 1usize << (n - l)).collect();
        BaseSc {
            n,
            kernel,
            alpha: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            left: sizes.iter().map(|&s| vec![0; s]).collect(),
            enc: sizes.iter().map(|&s| vec![0; s]).collect(),
            next: 0,
            prepared: false,
        }
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index the decoder expects next.
    pub fn position(&self) -> usize {
        self.next
    }

    /// Loads channel LLRs and rewinds to index 0.
    pub fn reset(&mut self, llrs: &[f64]) {
        assert_eq!(llrs.len(), self.len(), "observation length");
        self.alpha[0].copy_from_slice(llrs);
        self.next = 0;
        self.prepared = false;
    }

    /// LLR of `u_i` given the committed `u_0 .. u_{i-1}`.
    pub fn prepare(&mut self, i: usize) -> f64 {
        assert!(
            i == self.next && i < self.len(),
            "SC decoder expected index {}, got {i}",
            self.next
        );
        if !self.prepared {
            let start = if i == 0 {
                0
            } else {
                let flip = i ^ (i - 1);
                self.n - 1 - (usize::BITS - 1 - flip.leading_zeros()) as usize
            };
            for l in start..self.n {
                let bit = (i >> (self.n - 1 - l)) & 1;
                let half = 1usize << (self.n - 1 - l);
                let (up, down) = self.alpha.split_at_mut(l + 1);
                let (parent, child) = (&up[l], &mut down[0]);
                if bit == 0 {
                    for j in 0..half {
                        child[j] = boxplus(parent[j], parent[j + half], self.kernel);
                    }
                } else {
                    let u = &self.left[l + 1];
                    for j in 0..half {
                        child[j] = g_update(parent[j], parent[j + half], u[j]);
                    }
                }
            }
            self.prepared = true;
        }
        self.alpha[self.n][0]
    }

    /// Fixes `u_i = bit` and propagates partial sums.
    pub fn commit(&mut self, i: usize, bit: u8) {
        assert!(self.prepared && i == self.next, "commit({i}) without prepare");
        self.enc[self.n][0] = bit & 1;
        let mut l = self.n;
        while l > 0 {
            let right = (i >> (self.n - l)) & 1;
            if right == 0 {
                let (e, lf) = (&self.enc[l], &mut self.left[l]);
                lf.copy_from_slice(e);
                break;
            }
            let half = 1usize << (self.n - l);
            let (up, down) = self.enc.split_at_mut(l);
            let (parent, child) = (&mut up[l - 1], &down[0]);
            let sib = &self.left[l];
            for j in 0..half {
                parent[j] = sib[j] ^ child[j];
                parent[j + half] = child[j];
            }
            l -= 1;
        }
        self.next += 1;
        self.prepared = false;
    }

    /// Re-encoded codeword once every index has been committed.
    pub fn codeword(&self) -> &[u8] {
        assert_eq!(self.next, self.len(), "block not finished");
        &self.enc[0]
    }
}

/// Decisions and their LLRs, indexed by synthetic channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScOutput {
    pub bits: Vec<u8>,
    pub llrs: Vec<f64>,
}

/// Decodes one block. Frozen indices output their pinned value; information
/// indices take the hard decision. A single block has one causal order, the
/// natural one; any other `Custom` order is rejected.
pub fn sc_decode(
    llrs: &[f64],
    pins: &[Pin],
    order: &ProcessingOrder,
    kernel: Kernel,
) -> Result<ScOutput, PolarError> {
    let n = log2_len(llrs.len())?;
    if pins.len() != llrs.len() {
        return Err(PolarError::LengthMismatch {
            expected: llrs.len(),
            got: pins.len(),
        });
    }
    if let ProcessingOrder::Custom(o) = order {
        if o.len() != llrs.len() {
            return Err(PolarError::LengthMismatch {
                expected: llrs.len(),
                got: o.len(),
            });
        }
        if let Some(pos) = o.iter().enumerate().position(|(k, &i)| k != i) {
            return Err(PolarError::InvalidOrder(format!(
                "index {} at step {pos} depends on an earlier index not yet decoded",
                o[pos]
            )));
        }
    }
    let mut dec = BaseSc::new(n, kernel);
    dec.reset(llrs);
    let mut bits = Vec::with_capacity(llrs.len());
    let mut out_llrs = Vec::with_capacity(llrs.len());
    for (i, pin) in pins.iter().enumerate() {
        let l = dec.prepare(i);
        let b = match pin {
            Pin::Info => decide(l),
            Pin::Frozen(v) => *v & 1,
        };
        dec.commit(i, b);
        bits.push(b);
        out_llrs.push(l);
    }
    Ok(ScOutput {
        bits,
        llrs: out_llrs,
    })
}
