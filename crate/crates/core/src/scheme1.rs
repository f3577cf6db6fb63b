//! Staircase code with Reed-Solomon columns.
//!
//! Geometry (0-based): there are `n` stacked extended staircases, one per bit
//! of a GF(2^n) symbol. Each has `N = 2^n` rows; row `r` holds `k` polar
//! blocks of length `N` placed contiguously from column `r`, so row `r`
//! occupies columns `r ..= r + kN - 1` and the whole staircase spans
//! `(k + 1) N - 1` columns. At column `c`, row `r` sits at block
//! `(c - r) / N`, position `(c - r) % N`.
//!
//! Columns `N - 1 ..= kN - 1` have full height and their `N` positions are a
//! permutation of `0 .. N`. Each full column carries one RS codeword of
//! length `N` over GF(2^n): the symbol at RS position `r` lives in row `r`,
//! with bit `s` in staircase `s`. The partial columns at both ends follow the
//! [`BoundaryPolicy`].
//!
//! The decoder advances all `nN` row decoders column by column. On a full
//! column it trusts the rows whose current position is good for the actual
//! channel (and whose LLRs are non-zero), plus any row whose LLRs are all
//! infinite, i.e. certain. It RS-decodes the column from those symbols and
//! feeds the filled column back to every row as known bits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::BmsChannel;
use crate::gf::{GfElement, GfError, GfField};
use crate::kv::{self, KvError, KvMap};
use crate::polar::{
    blocklength_helper, build_spec, decide, polar_transform_in_place, BaseSc, Kernel, PolarCodeSpec,
    PolarError,
};
use crate::rs::{RsCode, RsError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Scheme1Error {
    #[error("invalid staircase parameters: {0}")]
    Params(String),
    #[error("column {column} out of range 0..{columns}")]
    Column { column: usize, columns: usize },
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("column {column}: only {available} of {needed} symbols recovered")]
    ColumnFailure {
        column: usize,
        available: usize,
        needed: usize,
    },
    #[error("column {column}: decoded symbol at row {row} contradicts the RS fill")]
    Inconsistent { column: usize, row: usize },
    #[error(transparent)]
    Rs(#[from] RsError),
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Kv(#[from] KvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaircaseParams {
    /// Exponent: `N = 2^n` rows per staircase and `n` staircases.
    pub n: u32,
    /// Polar blocks per row.
    pub k: usize,
    /// RS dimension per full column, in symbols.
    pub rs_dimension: usize,
}

impl StaircaseParams {
    pub fn new(n: u32, k: usize, rs_dimension: usize) -> Result<Self, Scheme1Error> {
        if !(1..=16).contains(&n) {
            return Err(Scheme1Error::Params(format!("n = {n} must be in 1..=16")));
        }
        if k == 0 {
            return Err(Scheme1Error::Params("k must be at least 1".into()));
        }
        if rs_dimension > 1 << n {
            return Err(Scheme1Error::Params(format!(
                "RS dimension {rs_dimension} exceeds N = {}",
                1usize << n
            )));
        }
        Ok(StaircaseParams { n, k, rs_dimension })
    }

    pub fn rows(&self) -> usize {
        1 << self.n
    }

    pub fn staircases(&self) -> usize {
        self.n as usize
    }

    pub fn columns(&self) -> usize {
        (self.k + 1) * self.rows() - 1
    }

    pub fn blocklength(&self) -> usize {
        self.staircases() * self.k * self.rows() * self.rows()
    }

    pub fn polar_blocks(&self) -> usize {
        self.staircases() * self.rows() * self.k
    }

    pub fn is_full_height(&self, column: usize) -> bool {
        let big_n = self.rows();
        column + 1 >= big_n && column < self.k * big_n
    }

    pub fn full_columns(&self) -> usize {
        (self.k - 1) * self.rows() + 1
    }

    /// Rows present at `column`, with their position inside the current
    /// polar block.
    pub fn column_occupancy(&self, column: usize) -> Result<Vec<(usize, usize)>, Scheme1Error> {
        if column >= self.columns() {
            return Err(Scheme1Error::Column {
                column,
                columns: self.columns(),
            });
        }
        Ok(self.rows_at(column).map(|r| (r, (column - r) % self.rows())).collect())
    }

    fn rows_at(&self, column: usize) -> std::ops::RangeInclusive<usize> {
        let span = self.k * self.rows();
        let lo = (column + 1).saturating_sub(span);
        let hi = column.min(self.rows() - 1);
        lo..=hi
    }

    /// Offset of bit `(staircase, row, block, position)` in the codeword.
    pub fn bit_index(&self, staircase: usize, row: usize, block: usize, pos: usize) -> usize {
        ((staircase * self.rows() + row) * self.k + block) * self.rows() + pos
    }
}

/// What the partial columns at both ends of a staircase carry.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoundaryPolicy {
    /// Everything frozen to zero.
    #[default]
    FreezeAll,
    /// Uncoded information on these block positions (assumed good for every
    /// channel in the family), zeros elsewhere.
    CompoundSubset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseCode {
    params: StaircaseParams,
    rs: RsCode,
    policy: BoundaryPolicy,
    boundary_mask: Vec<bool>,
    kernel: Kernel,
}

impl StaircaseCode {
    pub fn new(params: StaircaseParams, policy: BoundaryPolicy) -> Result<Self, Scheme1Error> {
        let field = GfField::new(params.n)?;
        Self::with_field(params, policy, field)
    }

    /// Uses a caller-chosen reduction polynomial for GF(2^n).
    pub fn with_field(params: StaircaseParams, policy: BoundaryPolicy, field: GfField) -> Result<Self, Scheme1Error> {
        if field.degree() != params.n {
            return Err(Scheme1Error::Params(format!(
                "field degree {} differs from n = {}",
                field.degree(),
                params.n
            )));
        }
        let rs = RsCode::new(field, params.rs_dimension)?;
        let mut boundary_mask = vec![false; params.rows()];
        if let BoundaryPolicy::CompoundSubset(set) = &policy {
            for &i in set {
                if i >= params.rows() {
                    return Err(Scheme1Error::Params(format!("boundary index {i} out of range")));
                }
                boundary_mask[i] = true;
            }
        }
        Ok(StaircaseCode {
            params,
            rs,
            policy,
            boundary_mask,
            kernel: Kernel::Exact,
        })
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn params(&self) -> &StaircaseParams {
        &self.params
    }

    pub fn policy(&self) -> &BoundaryPolicy {
        &self.policy
    }

    pub fn rs(&self) -> &RsCode {
        &self.rs
    }

    /// Uncoded boundary bits carried by one staircase.
    fn boundary_info_per_staircase(&self) -> usize {
        let p = &self.params;
        (0..p.columns())
            .filter(|&c| !p.is_full_height(c))
            .map(|c| {
                p.rows_at(c)
                    .filter(|&r| self.boundary_mask[(c - r) % p.rows()])
                    .count()
            })
            .sum()
    }

    pub fn info_len(&self) -> usize {
        let p = &self.params;
        p.full_columns() * p.rs_dimension * p.staircases() + p.staircases() * self.boundary_info_per_staircase()
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.params.blocklength() as f64
    }

    /// Design used by the receiver: the `rs_dimension` best positions for
    /// the channel it actually sees.
    pub fn receiver_spec(&self, actual: &BmsChannel) -> Result<PolarCodeSpec, Scheme1Error> {
        let p = &self.params;
        Ok(build_spec(actual, p.n, p.rs_dimension as f64 / p.rows() as f64)?)
    }

    /// `(number of blocks) * (sum of z over the receiver's good set)`.
    pub fn union_bound(&self, actual: &BmsChannel) -> Result<f64, Scheme1Error> {
        Ok(self.params.polar_blocks() as f64 * self.receiver_spec(actual)?.bound())
    }

    fn symbol(&self, v: u16) -> GfElement {
        self.rs.field().element(v as u32).expect("symbol built from n bits")
    }

    /// Codeword bits ordered by staircase, row, block and position.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, Scheme1Error> {
        let expected = self.info_len();
        if info.len() != expected {
            return Err(Scheme1Error::Length {
                expected,
                got: info.len(),
            });
        }
        let p = &self.params;
        let (big_n, stairs) = (p.rows(), p.staircases());
        let mut u = vec![0u8; p.blocklength()];
        let mut cursor = 0;
        for c in 0..p.columns() {
            if p.is_full_height(c) {
                let message: Vec<GfElement> = (0..p.rs_dimension)
                    .map(|j| {
                        let bits = &info[cursor + j * stairs..cursor + (j + 1) * stairs];
                        self.symbol(bits.iter().enumerate().fold(0u16, |v, (s, &b)| v | (((b & 1) as u16) << s)))
                    })
                    .collect();
                cursor += p.rs_dimension * stairs;
                let codeword = self.rs.encode(&message)?;
                for r in 0..big_n {
                    let (block, pos) = ((c - r) / big_n, (c - r) % big_n);
                    let v = codeword[r].value();
                    for s in 0..stairs {
                        u[p.bit_index(s, r, block, pos)] = ((v >> s) & 1) as u8;
                    }
                }
            } else {
                for s in 0..stairs {
                    for r in p.rows_at(c) {
                        let (block, pos) = ((c - r) / big_n, (c - r) % big_n);
                        if self.boundary_mask[pos] {
                            u[p.bit_index(s, r, block, pos)] = info[cursor] & 1;
                            cursor += 1;
                        }
                    }
                }
            }
        }
        debug_assert_eq!(cursor, expected);
        for block in u.chunks_mut(big_n) {
            polar_transform_in_place(block)?;
        }
        Ok(u)
    }

    /// Decodes channel LLRs (same layout as the codeword) received over
    /// `actual`.
    pub fn decode(&self, llrs: &[f64], actual: &BmsChannel) -> Result<Vec<u8>, Scheme1Error> {
        let good = self.receiver_spec(actual)?.info_mask();
        self.decode_with_good_set(llrs, &good)
    }

    /// Same as [`decode`](Self::decode) with an explicit per-position trust mask.
    pub fn decode_with_good_set(&self, llrs: &[f64], good: &[bool]) -> Result<Vec<u8>, Scheme1Error> {
        let p = &self.params;
        let (big_n, stairs) = (p.rows(), p.staircases());
        if llrs.len() != p.blocklength() {
            return Err(Scheme1Error::Length {
                expected: p.blocklength(),
                got: llrs.len(),
            });
        }
        assert_eq!(good.len(), big_n, "trust mask length");
        // One decoder per (staircase, row), reloaded at each block start.
        let mut rows: Vec<BaseSc> = (0..stairs * big_n).map(|_| BaseSc::new(p.n, self.kernel)).collect();
        let mut out = Vec::with_capacity(self.info_len());
        let mut soft = vec![0.0f64; stairs * big_n];
        for c in 0..p.columns() {
            let present = p.rows_at(c);
            let (lo, hi) = (*present.start(), *present.end());
            // Advance every present row by one step; rows are independent here.
            rows[..]
                .par_chunks_mut(big_n)
                .zip(soft.par_chunks_mut(big_n))
                .enumerate()
                .for_each(|(s, (decs, llr_out))| {
                    for r in lo..=hi {
                        let (block, pos) = ((c - r) / big_n, (c - r) % big_n);
                        if pos == 0 {
                            let start = p.bit_index(s, r, block, 0);
                            decs[r].reset(&llrs[start..start + big_n]);
                        }
                        llr_out[r] = decs[r].prepare(pos);
                    }
                });
            let bits_at = |s: usize, r: usize| -> u8 { decide(soft[s * big_n + r]) };
            if p.is_full_height(c) {
                let received: Vec<Option<GfElement>> = (0..big_n)
                    .map(|r| {
                        let pos = (c - r) % big_n;
                        let llr = |s: usize| soft[s * big_n + r];
                        let trusted = (good[pos] && (0..stairs).all(|s| llr(s) != 0.0))
                            || (0..stairs).all(|s| llr(s).is_infinite());
                        trusted.then(|| {
                            self.symbol((0..stairs).fold(0u16, |v, s| v | ((bits_at(s, r) as u16) << s)))
                        })
                    })
                    .collect();
                let filled = self.rs.erasure_decode(&received).map_err(|e| match e {
                    RsError::UnrecoverableErasure { available, needed } => Scheme1Error::ColumnFailure {
                        column: c,
                        available,
                        needed,
                    },
                    RsError::Inconsistent { position } => Scheme1Error::Inconsistent { column: c, row: position },
                    other => Scheme1Error::Rs(other),
                })?;
                for sym in &filled.message {
                    let v = sym.value();
                    out.extend((0..stairs).map(|s| ((v >> s) & 1) as u8));
                }
                for r in 0..big_n {
                    let pos = (c - r) % big_n;
                    let v = filled.codeword[r].value();
                    for s in 0..stairs {
                        rows[s * big_n + r].commit(pos, ((v >> s) & 1) as u8);
                    }
                }
            } else {
                for s in 0..stairs {
                    for r in lo..=hi {
                        let pos = (c - r) % big_n;
                        let bit = if self.boundary_mask[pos] {
                            let b = bits_at(s, r);
                            out.push(b);
                            b
                        } else {
                            0
                        };
                        rows[s * big_n + r].commit(pos, bit);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn to_kv(&self) -> KvMap {
        let mut m = KvMap::new();
        m.set("code", "staircase");
        m.set("n", self.params.n);
        m.set("k", self.params.k);
        m.set("rs_dimension", self.params.rs_dimension);
        m.set("field_poly", format!("{:#x}", self.rs.field().poly()));
        match &self.policy {
            BoundaryPolicy::FreezeAll => m.set("boundary", "freeze_all"),
            BoundaryPolicy::CompoundSubset(set) => {
                m.set("boundary", "compound_subset");
                m.set("boundary_set", kv::join(set));
            }
        }
        m.set("info_bits", self.info_len());
        m.set("blocklength", self.params.blocklength());
        m
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, Scheme1Error> {
        if m.get("code") != Some("staircase") {
            return Err(Scheme1Error::Params("not a staircase code description".into()));
        }
        let params = StaircaseParams::new(m.parse_value("n")?, m.parse_value("k")?, m.parse_value("rs_dimension")?)?;
        let policy = match m.require("boundary")? {
            "freeze_all" => BoundaryPolicy::FreezeAll,
            "compound_subset" => BoundaryPolicy::CompoundSubset(m.parse_list("boundary_set")?),
            other => return Err(Scheme1Error::Params(format!("unknown boundary policy {other:?}"))),
        };
        let field = match m.get("field_poly") {
            Some(text) => {
                let poly = u32::from_str_radix(text.trim_start_matches("0x"), 16)
                    .map_err(|e| Scheme1Error::Params(format!("field_poly {text:?}: {e}")))?;
                GfField::with_poly(params.n, poly)?
            }
            None => GfField::new(params.n)?,
        };
        Self::with_field(params, policy, field)
    }
}

/// Parameters chosen for a target capacity, gap and error probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenParams {
    pub params: StaircaseParams,
    pub rate: f64,
    pub blocklength: usize,
    /// Union bound implied by the blocklength formula: every one of the
    /// `n k N` blocks fails with probability at most `(P eps / 2) / N^2`.
    pub error_bound: f64,
}

/// `k = ceil(2 / eps)`, `n = blocklength_helper(C, eps / 2, P eps / 2, c)` and
/// RS dimension `floor((C - eps / 2) N)`, with FreezeAll boundaries.
pub fn choose_params(capacity: f64, eps: f64, error: f64, c: f64) -> Result<ChosenParams, Scheme1Error> {
    if !(eps > 0.0 && eps < 1.0) || !(error > 0.0 && error < 1.0) || !(capacity > 0.0 && capacity < 1.0) {
        return Err(Scheme1Error::Params("need 0 < C, eps, P < 1".into()));
    }
    let k = (2.0 / eps - 1e-12).ceil() as usize;
    let n = blocklength_helper(capacity, eps / 2.0, error * eps / 2.0, c);
    params_for(capacity, eps, error, n, k)
}

/// Same as [`choose_params`] but with `n` fixed by the caller.
pub fn params_for(capacity: f64, eps: f64, error: f64, n: u32, k: usize) -> Result<ChosenParams, Scheme1Error> {
    let big_n = 1usize << n.min(16);
    let rs = ((capacity - eps / 2.0) * big_n as f64 + 1e-9).floor().max(0.0) as usize;
    let params = StaircaseParams::new(n, k, rs)?;
    let code = StaircaseCode::new(params, BoundaryPolicy::FreezeAll)?;
    let per_block = error * eps / 2.0 / (big_n * big_n) as f64;
    Ok(ChosenParams {
        params,
        rate: code.rate(),
        blocklength: params.blocklength(),
        error_bound: params.polar_blocks() as f64 * per_block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noiseless(x: &[u8]) -> Vec<f64> {
        x.iter().map(|&b| if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY }).collect()
    }

    #[test]
    fn occupancy_examples() {
        let p = StaircaseParams::new(4, 3, 4).unwrap();
        assert_eq!(p.columns(), 63);
        assert_eq!(p.column_occupancy(0).unwrap(), vec![(0, 0)]);
        let col = p.column_occupancy(19).unwrap();
        assert_eq!(col.iter().find(|(r, _)| *r == 2).unwrap().1, 1);
        for c in 15..=47 {
            assert!(p.is_full_height(c));
            let mut pos: Vec<usize> = p.column_occupancy(c).unwrap().into_iter().map(|(_, q)| q).collect();
            pos.sort_unstable();
            assert_eq!(pos, (0..16).collect::<Vec<_>>());
        }
        assert!(!p.is_full_height(14) && !p.is_full_height(48));
        assert!(p.column_occupancy(63).is_err());
    }

    #[test]
    fn geometry_invariants() {
        for n in 1..=6 {
            for k in 1..=4 {
                let p = StaircaseParams::new(n, k, 1).unwrap();
                let big_n = p.rows();
                let mut boundary = 0;
                let mut total = 0;
                for c in 0..p.columns() {
                    let occ = p.column_occupancy(c).unwrap();
                    total += occ.len();
                    if p.is_full_height(c) {
                        let mut seen = vec![false; big_n];
                        for (_, q) in occ {
                            assert!(!std::mem::replace(&mut seen[q], true));
                        }
                    } else {
                        boundary += occ.len();
                    }
                }
                assert_eq!(total, k * big_n * big_n);
                assert_eq!(boundary, big_n * (big_n - 1));
                assert_eq!(p.full_columns() * big_n + boundary, total);
            }
        }
    }

    #[test]
    fn parameter_choice() {
        let chosen = choose_params(0.5, 0.5, 0.1, 0.0).unwrap();
        assert_eq!(chosen.params.k, 4);
        let at16 = params_for(0.5, 0.5, 0.1, 4, 4).unwrap();
        assert_eq!(at16.blocklength, 16 * 16 * 4 * 4);
        assert_eq!(at16.params.rs_dimension, 4);
        assert!(at16.rate >= 0.5 - 0.5);
    }

    #[test]
    fn zero_info_gives_zero_codeword() {
        let code = StaircaseCode::new(StaircaseParams::new(4, 4, 4).unwrap(), BoundaryPolicy::FreezeAll).unwrap();
        assert_eq!(code.encode(&vec![0; code.info_len()]).unwrap(), vec![0; 4096]);
        assert!(code.encode(&[0; 3]).is_err());
    }

    #[test]
    fn single_symbol_is_column_local_before_transform() {
        let p = StaircaseParams::new(3, 2, 3).unwrap();
        let code = StaircaseCode::new(p, BoundaryPolicy::FreezeAll).unwrap();
        let mut info = vec![0; code.info_len()];
        // Second full column, first symbol, lowest bit.
        info[p.rs_dimension * p.staircases()] = 1;
        let x = code.encode(&info).unwrap();
        // Undo the row transforms to look at the pre-transform array.
        let mut u = x.clone();
        for b in u.chunks_mut(p.rows()) {
            polar_transform_in_place(b).unwrap();
        }
        let c = p.rows(); // full columns start at N - 1
        for s in 0..p.staircases() {
            for r in 0..p.rows() {
                for block in 0..p.k {
                    for pos in 0..p.rows() {
                        let col = r + block * p.rows() + pos;
                        if u[p.bit_index(s, r, block, pos)] != 0 {
                            assert_eq!(col, c);
                        }
                    }
                }
            }
        }
        assert!(u.iter().any(|&b| b != 0));
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = BmsChannel::bec(0.5).unwrap();
        for (n, k, rs) in [(4, 4, 4), (3, 2, 5), (2, 3, 1), (5, 2, 12)] {
            let code = StaircaseCode::new(StaircaseParams::new(n, k, rs).unwrap(), BoundaryPolicy::FreezeAll).unwrap();
            let info = random_bits(&mut rng, code.info_len());
            let x = code.encode(&info).unwrap();
            assert_eq!(code.decode(&noiseless(&x), &ch).unwrap(), info);
        }
        let code = StaircaseCode::new(
            StaircaseParams::new(4, 3, 6).unwrap(),
            BoundaryPolicy::CompoundSubset(vec![7, 11, 13, 14, 15]),
        )
        .unwrap();
        assert!(code.info_len() > code.params().full_columns() * 6 * 4);
        let info = random_bits(&mut rng, code.info_len());
        let x = code.encode(&info).unwrap();
        assert_eq!(code.decode(&noiseless(&x), &ch).unwrap(), info);
    }

    #[test]
    fn kv_round_trip() {
        let code = StaircaseCode::new(
            StaircaseParams::new(4, 3, 6).unwrap(),
            BoundaryPolicy::CompoundSubset(vec![14, 15]),
        )
        .unwrap();
        let text = code.to_kv().to_text();
        let back = StaircaseCode::from_kv(&KvMap::parse(&text).unwrap()).unwrap();
        assert_eq!(back, code);
    }

    #[test]
    fn bec_decodes_when_every_column_has_enough_good_symbols() {
        // Designed for BEC(0.5) with RS dimension floor(0.4 N), sent over
        // BEC(0.45). A genie counts recoverable symbols per column using the
        // true bits; decoding must succeed exactly when all counts suffice.
        // With k = 4 the all-columns event is rare at N = 16, so k = 1 is
        // run as well.
        let ch = BmsChannel::bec(0.45).unwrap();
        let sampler = ch.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (mut enough_seen, mut short_seen) = (0, 0);
        for k in [1, 4] {
            let code = StaircaseCode::new(StaircaseParams::new(4, k, 6).unwrap(), BoundaryPolicy::FreezeAll).unwrap();
            for _ in 0..200 {
                let info = random_bits(&mut rng, code.info_len());
                let x = code.encode(&info).unwrap();
                let llr = sampler.transmit(&x, &mut rng);
                let result = code.decode(&llr, &ch);
                if genie_enough(&code, &x, &llr) {
                    enough_seen += 1;
                    assert_eq!(result.unwrap(), info);
                } else {
                    short_seen += 1;
                    assert!(matches!(result, Err(Scheme1Error::ColumnFailure { .. })));
                }
            }
        }
        assert!(enough_seen > 0 && short_seen > 0);
    }

    /// Genie: runs each row decoder with the true bits committed and checks
    /// that every full column has at least `rs_dimension` non-erased rows.
    fn genie_enough(code: &StaircaseCode, x: &[u8], llr: &[f64]) -> bool {
        let p = code.params();
        let big_n = p.rows();
        let mut u = x.to_vec();
        for b in u.chunks_mut(big_n) {
            polar_transform_in_place(b).unwrap();
        }
        let mut erased = vec![false; p.blocklength()];
        for (blk, chunk) in llr.chunks(big_n).enumerate() {
            let mut dec = BaseSc::new(p.n, Kernel::Exact);
            dec.reset(chunk);
            for pos in 0..big_n {
                erased[blk * big_n + pos] = dec.prepare(pos) == 0.0;
                dec.commit(pos, u[blk * big_n + pos]);
            }
        }
        (0..p.columns()).filter(|&c| p.is_full_height(c)).all(|c| {
            let trusted = (0..big_n)
                .filter(|&r| {
                    let (block, pos) = ((c - r) / big_n, (c - r) % big_n);
                    // On the BEC every non-erased LLR is infinite, hence trusted.
                    (0..p.staircases()).all(|s| !erased[p.bit_index(s, r, block, pos)])
                })
                .count();
            trusted >= p.rs_dimension
        })
    }

    #[test]
    fn bsc_error_rate_within_union_bound() {
        // BSC with capacity about 0.55, same code as above.
        let p = StaircaseParams::new(4, 4, 6).unwrap();
        let code = StaircaseCode::new(p, BoundaryPolicy::FreezeAll).unwrap();
        let ch = BmsChannel::bsc(0.0935).unwrap();
        assert!((ch.capacity() - 0.552).abs() < 0.01);
        let bound = code.union_bound(&ch).unwrap();
        let sampler = ch.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 200;
        let mut errors = 0;
        for _ in 0..trials {
            let info = random_bits(&mut rng, code.info_len());
            let x = code.encode(&info).unwrap();
            let llr = sampler.transmit(&x, &mut rng);
            if code.decode(&llr, &ch).map_or(true, |d| d != info) {
                errors += 1;
            }
        }
        let rate = errors as f64 / trials as f64;
        assert!(rate <= bound.min(1.0) + 3.0 * (0.25 / trials as f64).sqrt(), "{rate} vs {bound}");
    }
}
