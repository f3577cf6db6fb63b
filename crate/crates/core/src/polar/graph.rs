use std::fmt;

use serde::{Deserialize, Serialize};

use super::sc::{boxplus, g_update, BaseSc, Kernel};
use super::{polar_transform_in_place, PolarError};

/// A polar factor graph built from base blocks and alignment layers.
///
/// An `Aligned` node owns two child graphs and a list of pairs `(a, b)`. The
/// node's labels are `0 .. len1` for the first child and `len1 .. len` for the
/// second. A pair contributes an extra `G2` stage on `(v1[a], v2[b])`:
/// `v1[a] = w1 ^ w2` and `v2[b] = w2`, where `w1` (the worse output) sits at
/// label `a` and `w2` (the better one) at label `len1 + b`. All other labels
/// pass through unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolarGraph {
    Base { n: u32 },
    Aligned(Box<AlignedNode>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedNode {
    pub first: PolarGraph,
    pub second: PolarGraph,
    /// `(a, b)`, sorted by the position of `a` in the first child's order.
    pub pairs: Vec<(usize, usize)>,
}

/// What a label of an aligned node stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    First(usize),
    Second(usize),
    /// Worse output of pair `k`.
    Minus(usize),
    /// Better output of pair `k`.
    Plus(usize),
}

impl PolarGraph {
    pub fn base(n: u32) -> Self {
        PolarGraph::Base { n }
    }

    /// Joins two graphs with the given pairs. Pairs must be listed in the
    /// order both children reach them (checked here).
    pub fn aligned(first: PolarGraph, second: PolarGraph, pairs: Vec<(usize, usize)>) -> Result<Self, PolarError> {
        let (len1, len2) = (first.len(), second.len());
        let (o1, o2) = (first.order(), second.order());
        let rank = |o: &[usize]| {
            let mut r = vec![0usize; o.len()];
            for (k, &i) in o.iter().enumerate() {
                r[i] = k;
            }
            r
        };
        let (r1, r2) = (rank(&o1), rank(&o2));
        let mut used1 = vec![false; len1];
        let mut used2 = vec![false; len2];
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if a >= len1 || b >= len2 {
                return Err(PolarError::InvalidOrder(format!("pair ({a}, {b}) out of range")));
            }
            if std::mem::replace(&mut used1[a], true) || std::mem::replace(&mut used2[b], true) {
                return Err(PolarError::InvalidOrder(format!("index reused in pair ({a}, {b})")));
            }
            if k > 0 {
                let (pa, pb) = pairs[k - 1];
                if r1[pa] >= r1[a] || r2[pb] >= r2[b] {
                    return Err(PolarError::InvalidOrder(format!(
                        "pair ({a}, {b}) is out of processing order"
                    )));
                }
            }
        }
        Ok(PolarGraph::Aligned(Box::new(AlignedNode { first, second, pairs })))
    }

    pub fn len(&self) -> usize {
        match self {
            PolarGraph::Base { n } => 1 << n,
            PolarGraph::Aligned(a) => a.first.len() + a.second.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of alignment layers on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            PolarGraph::Base { .. } => 0,
            PolarGraph::Aligned(a) => 1 + a.first.depth().max(a.second.depth()),
        }
    }

    pub fn roles(&self) -> Vec<Role> {
        match self {
            PolarGraph::Base { .. } => (0..self.len()).map(Role::First).collect(),
            PolarGraph::Aligned(a) => a.roles(),
        }
    }

    /// The processing order the decoder follows.
    ///
    /// For an aligned node, with pairs `(a_k, b_k)`: first-child labels up to
    /// `a_1`, then second-child labels up to `b_1`, then `a_1` immediately
    /// followed by `len1 + b_1`, and so on; the remaining labels of the first
    /// child come next and those of the second child last.
    pub fn order(&self) -> Vec<usize> {
        match self {
            PolarGraph::Base { .. } => (0..self.len()).collect(),
            PolarGraph::Aligned(a) => {
                let len1 = a.first.len();
                let (o1, o2) = (a.first.order(), a.second.order());
                let mut out = Vec::with_capacity(self.len());
                let (mut p1, mut p2) = (0, 0);
                for &(pa, pb) in &a.pairs {
                    while o1[p1] != pa {
                        out.push(o1[p1]);
                        p1 += 1;
                    }
                    while o2[p2] != pb {
                        out.push(len1 + o2[p2]);
                        p2 += 1;
                    }
                    out.push(pa);
                    out.push(len1 + pb);
                    p1 += 1;
                    p2 += 1;
                }
                out.extend(&o1[p1..]);
                out.extend(o2[p2..].iter().map(|&i| len1 + i));
                out
            }
        }
    }

    /// True iff the decoder can process labels in `order`: each child sees
    /// a valid order of its own, and each pair's two outputs are adjacent
    /// with the worse one first.
    pub fn is_valid_order(&self, order: &[usize]) -> bool {
        if order.len() != self.len() {
            return false;
        }
        let mut seen = vec![false; self.len()];
        if !order.iter().all(|&i| i < self.len() && !std::mem::replace(&mut seen[i], true)) {
            return false;
        }
        match self {
            PolarGraph::Base { .. } => order.iter().enumerate().all(|(k, &i)| k == i),
            PolarGraph::Aligned(a) => {
                let roles = a.roles();
                let len1 = a.first.len();
                let mut c1 = Vec::with_capacity(len1);
                let mut c2 = Vec::with_capacity(a.second.len());
                let mut k = 0;
                while k < order.len() {
                    match roles[order[k]] {
                        Role::First(i) => c1.push(i),
                        Role::Second(i) => c2.push(i),
                        Role::Minus(p) => {
                            if order.get(k + 1).map(|&l| roles[l]) != Some(Role::Plus(p)) {
                                return false;
                            }
                            let (pa, pb) = a.pairs[p];
                            c1.push(pa);
                            c2.push(pb);
                            k += 1;
                        }
                        Role::Plus(_) => return false,
                    }
                    k += 1;
                }
                a.first.is_valid_order(&c1) && a.second.is_valid_order(&c2)
            }
        }
    }

    /// Maps input bits `u` (indexed by label) to the codeword.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>, PolarError> {
        if u.len() != self.len() {
            return Err(PolarError::LengthMismatch {
                expected: self.len(),
                got: u.len(),
            });
        }
        match self {
            PolarGraph::Base { .. } => {
                let mut x = u.to_vec();
                polar_transform_in_place(&mut x)?;
                Ok(x)
            }
            PolarGraph::Aligned(a) => {
                let len1 = a.first.len();
                let mut v1 = u[..len1].to_vec();
                let v2 = &u[len1..];
                for &(pa, pb) in &a.pairs {
                    v1[pa] = u[pa] ^ u[len1 + pb];
                }
                let mut x = a.first.encode(&v1)?;
                x.extend(a.second.encode(v2)?);
                Ok(x)
            }
        }
    }

    /// Bhattacharyya bounds per label from the per-position channel bound `z0`.
    pub fn evolve(&self, z0: f64) -> Vec<f64> {
        match self {
            PolarGraph::Base { n } => super::construct::evolve_from(z0, *n),
            PolarGraph::Aligned(a) => a.combine_z(&a.first.evolve(z0), &a.second.evolve(z0)),
        }
    }

    pub fn decoder(&self, kernel: Kernel) -> GraphDecoder {
        match self {
            PolarGraph::Base { n } => GraphDecoder::Base(BaseSc::new(*n, kernel)),
            PolarGraph::Aligned(a) => GraphDecoder::Aligned(Box::new(AlignedDecoder {
                roles: a.roles(),
                pairs: a.pairs.clone(),
                first: a.first.decoder(kernel),
                second: a.second.decoder(kernel),
                kernel,
                pending: (0.0, 0.0, 0),
            })),
        }
    }
}

impl AlignedNode {
    fn roles(&self) -> Vec<Role> {
        let len1 = self.first.len();
        let mut r: Vec<Role> = (0..len1)
            .map(Role::First)
            .chain((0..self.second.len()).map(Role::Second))
            .collect();
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            r[a] = Role::Minus(k);
            r[len1 + b] = Role::Plus(k);
        }
        r
    }

    /// Per-label values from the children's: pair outputs become
    /// `z1 + z2 - z1 z2` and `z1 z2`.
    pub fn combine_z(&self, z1: &[f64], z2: &[f64]) -> Vec<f64> {
        let len1 = z1.len();
        let mut z: Vec<f64> = z1.iter().chain(z2).copied().collect();
        for &(a, b) in &self.pairs {
            let (x, y) = (z1[a], z2[b]);
            z[a] = (x + y - x * y).min(1.0);
            z[len1 + b] = x * y;
        }
        z
    }
}

/// Compact prefix notation: `B<n>` or `A[a:b,...](<first>)(<second>)`.
impl fmt::Display for PolarGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolarGraph::Base { n } => write!(f, "B{n}"),
            PolarGraph::Aligned(a) => {
                f.write_str("A[")?;
                for (k, (x, y)) in a.pairs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}:{y}")?;
                }
                write!(f, "]({})({})", a.first, a.second)
            }
        }
    }
}

impl std::str::FromStr for PolarGraph {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (g, rest) = parse_graph(s.trim())?;
        if rest.is_empty() {
            Ok(g)
        } else {
            Err(bad_graph(s))
        }
    }
}

fn bad_graph(s: &str) -> PolarError {
    PolarError::InvalidOrder(format!("malformed graph description near {:?}", &s[..s.len().min(24)]))
}

fn parse_graph(s: &str) -> Result<(PolarGraph, &str), PolarError> {
    if let Some(rest) = s.strip_prefix('B') {
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let n = rest[..end].parse().map_err(|_| bad_graph(s))?;
        return Ok((PolarGraph::base(n), &rest[end..]));
    }
    let rest = s.strip_prefix("A[").ok_or_else(|| bad_graph(s))?;
    let close = rest.find(']').ok_or_else(|| bad_graph(s))?;
    let mut pairs = Vec::new();
    for item in rest[..close].split(',').filter(|t| !t.is_empty()) {
        let (a, b) = item.split_once(':').ok_or_else(|| bad_graph(s))?;
        pairs.push((
            a.parse().map_err(|_| bad_graph(s))?,
            b.parse().map_err(|_| bad_graph(s))?,
        ));
    }
    let rest = rest[close + 1..].strip_prefix('(').ok_or_else(|| bad_graph(s))?;
    let (first, rest) = parse_graph(rest)?;
    let rest = rest.strip_prefix(")(").ok_or_else(|| bad_graph(s))?;
    let (second, rest) = parse_graph(rest)?;
    let rest = rest.strip_prefix(')').ok_or_else(|| bad_graph(s))?;
    Ok((PolarGraph::aligned(first, second, pairs)?, rest))
}

/// Stepping SC decoder over a composite graph; same protocol as [`BaseSc`]
/// but labels must arrive in a valid order of the graph.
#[derive(Debug, Clone)]
pub enum GraphDecoder {
    Base(BaseSc),
    Aligned(Box<AlignedDecoder>),
}

#[derive(Debug, Clone)]
pub struct AlignedDecoder {
    roles: Vec<Role>,
    pairs: Vec<(usize, usize)>,
    first: GraphDecoder,
    second: GraphDecoder,
    kernel: Kernel,
    /// LLRs of `v1[a]`, `v2[b]` and the decided `w1` of the open pair.
    pending: (f64, f64, u8),
}

impl GraphDecoder {
    pub fn len(&self) -> usize {
        match self {
            GraphDecoder::Base(b) => b.len(),
            GraphDecoder::Aligned(a) => a.roles.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn reset(&mut self, llrs: &[f64]) {
        match self {
            GraphDecoder::Base(b) => b.reset(llrs),
            GraphDecoder::Aligned(a) => {
                assert_eq!(llrs.len(), a.roles.len(), "observation length");
                let split = a.first.len();
                a.first.reset(&llrs[..split]);
                a.second.reset(&llrs[split..]);
            }
        }
    }

    pub fn prepare(&mut self, label: usize) -> f64 {
        match self {
            GraphDecoder::Base(b) => b.prepare(label),
            GraphDecoder::Aligned(a) => match a.roles[label] {
                Role::First(i) => a.first.prepare(i),
                Role::Second(i) => a.second.prepare(i),
                Role::Minus(p) => {
                    let (pa, pb) = a.pairs[p];
                    let l1 = a.first.prepare(pa);
                    let l2 = a.second.prepare(pb);
                    a.pending = (l1, l2, 0);
                    boxplus(l1, l2, a.kernel)
                }
                Role::Plus(_) => {
                    let (l1, l2, w1) = a.pending;
                    g_update(l1, l2, w1)
                }
            },
        }
    }

    pub fn commit(&mut self, label: usize, bit: u8) {
        match self {
            GraphDecoder::Base(b) => b.commit(label, bit),
            GraphDecoder::Aligned(a) => match a.roles[label] {
                Role::First(i) => a.first.commit(i, bit),
                Role::Second(i) => a.second.commit(i, bit),
                Role::Minus(_) => a.pending.2 = bit & 1,
                Role::Plus(p) => {
                    let (pa, pb) = a.pairs[p];
                    let w1 = a.pending.2;
                    a.first.commit(pa, w1 ^ (bit & 1));
                    a.second.commit(pb, bit & 1);
                }
            },
        }
    }
}
