//! Monte Carlo simulation of the code constructions over the design channels.
//!
//! Every trial draws its own information bits and channel noise from a
//! ChaCha8 stream selected by `(seed, channel, trial)`, so results do not
//! depend on thread scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::random_bits;
use crate::channel::{parse_descriptor, BmsChannel, ChannelError, DEFAULT_BAWGNC_ATOMS};
use crate::kv::{self, KvError, KvMap};
use crate::polar::{build_spec, sc_decode, Kernel, Pin, PolarError, ProcessingOrder};
use crate::polar::polar_transform_in_place;
use crate::scheme1::{params_for, BoundaryPolicy, Scheme1Error, StaircaseCode, StaircaseParams};
use crate::scheme2::{
    align, build_universal_block, classify_indices, compound_gap, intersection, AlignedBlockSpec, ChainSpec, Direction,
    Scheme2Error, DEFAULT_MAX_DEPTH,
};

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Scheme1(#[from] Scheme1Error),
    #[error(transparent)]
    Scheme2(#[from] Scheme2Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    /// One polar block carrying information on the intersection of good sets.
    Intersection,
    Scheme1,
    Chain,
    Aligned,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Intersection => "intersection",
            SchemeKind::Scheme1 => "scheme1",
            SchemeKind::Chain => "chain",
            SchemeKind::Aligned => "aligned",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intersection" => Ok(SchemeKind::Intersection),
            "scheme1" | "staircase" => Ok(SchemeKind::Scheme1),
            "chain" | "scheme2-chain" => Ok(SchemeKind::Chain),
            "aligned" | "scheme2-aligned" => Ok(SchemeKind::Aligned),
            other => Err(HarnessError::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

/// A simulation run. Unset optional fields fall back to the scheme's own
/// choices, documented on [`RunConfig::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub channels: Vec<String>,
    pub n: u32,
    pub rate: f64,
    pub eps: Option<f64>,
    pub k: usize,
    pub rs_dim: Option<usize>,
    pub kappa: usize,
    pub p: f64,
    pub c: f64,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub bawgnc_atoms: usize,
}

pub const CONFIG_KEYS: &[&str] = &[
    "scheme",
    "channels",
    "n",
    "rate",
    "eps",
    "k",
    "rs_dim",
    "kappa",
    "p",
    "c",
    "trials",
    "seed",
    "out",
    "bawgnc_atoms",
];

impl RunConfig {
    pub fn from_kv(m: &KvMap) -> Result<Self, HarnessError> {
        if let Some(k) = m.keys().find(|k| !CONFIG_KEYS.contains(k)) {
            return Err(HarnessError::Config(format!("unknown key {k:?}")));
        }
        let cfg = RunConfig {
            scheme: m.require("scheme")?.parse()?,
            channels: m.parse_list("channels")?,
            n: m.parse_value("n")?,
            rate: m.parse_opt("rate")?.unwrap_or(0.0),
            eps: m.parse_opt("eps")?,
            k: m.parse_opt("k")?.unwrap_or(4),
            rs_dim: m.parse_opt("rs_dim")?,
            kappa: m.parse_opt("kappa")?.unwrap_or(1),
            p: m.parse_opt("p")?.unwrap_or(0.01),
            c: m.parse_opt("c")?.unwrap_or(1.0),
            trials: m.parse_value("trials")?,
            seed: m.parse_opt("seed")?.unwrap_or(0),
            out: m.get("out").filter(|s| !s.is_empty()).map(PathBuf::from),
            bawgnc_atoms: m.parse_opt("bawgnc_atoms")?.unwrap_or(DEFAULT_BAWGNC_ATOMS),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        Self::from_kv(&KvMap::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if self.channels.is_empty() {
            return bad("at least one channel is required");
        }
        if !(1..=16).contains(&self.n) {
            return bad("n must be in 1..=16");
        }
        if !(0.0..=1.0).contains(&self.rate) {
            return bad("rate must be in [0, 1]");
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e < 1.0) {
                return bad("eps must be in (0, 1)");
            }
        }
        if self.k == 0 {
            return bad("k must be positive");
        }
        if self.scheme == SchemeKind::Chain && self.channels.len() != 2 {
            return bad("the chain scheme needs exactly two channels");
        }
        Ok(())
    }

    pub fn load_channels(&self) -> Result<Vec<BmsChannel>, HarnessError> {
        self.channels
            .iter()
            .map(|d| load_channel(d, self.bawgnc_atoms))
            .collect()
    }

    /// Builds the code.
    ///
    /// * intersection: one block of length `2^n`, rate-`rate` good sets.
    /// * scheme1: `rs_dim` if given, else `floor((C - eps/2) N)` when `eps`
    ///   is set, else `floor(rate N)`; `C` is the smallest capacity.
    /// * chain: `k` blocks, rate-`rate` good sets.
    /// * aligned: with `eps`, the universal block; otherwise `kappa`
    ///   self-alignments of a two-channel base block.
    pub fn build(&self, channels: &[BmsChannel]) -> Result<BuiltCode, HarnessError> {
        let big_n = 1usize << self.n;
        match self.scheme {
            SchemeKind::Intersection => {
                let specs = channels
                    .iter()
                    .map(|c| build_spec(c, self.n, self.rate))
                    .collect::<Result<Vec<_>, _>>()?;
                let types = classify_indices(&specs)?;
                let info = intersection(&types, channels.len());
                Ok(BuiltCode::Intersection {
                    n: self.n,
                    info,
                    z: specs.into_iter().map(|s| s.z).collect(),
                })
            }
            SchemeKind::Scheme1 => {
                let cap = channels.iter().map(BmsChannel::capacity).fold(f64::INFINITY, f64::min);
                let rs = match (self.rs_dim, self.eps) {
                    (Some(r), _) => r,
                    (None, Some(eps)) => params_for(cap, eps, self.p, self.n, self.k)?.params.rs_dimension,
                    (None, None) => (self.rate * big_n as f64 + 1e-9).floor() as usize,
                };
                let params = StaircaseParams::new(self.n, self.k, rs)?;
                Ok(BuiltCode::Scheme1(StaircaseCode::new(params, BoundaryPolicy::FreezeAll)?))
            }
            SchemeKind::Chain => {
                let a = build_spec(&channels[0], self.n, self.rate)?;
                let b = build_spec(&channels[1], self.n, self.rate)?;
                Ok(BuiltCode::Chain {
                    spec: ChainSpec::from_specs(&a, &b, self.k)?,
                    z: vec![a.z, b.z],
                })
            }
            SchemeKind::Aligned => match self.eps {
                Some(eps) => {
                    let u = build_universal_block(channels, self.n, self.rate, eps, DEFAULT_MAX_DEPTH)?;
                    Ok(BuiltCode::Aligned(u.spec))
                }
                None => {
                    if channels.len() != 2 {
                        return Err(HarnessError::Config(
                            "aligned runs without eps need exactly two channels".into(),
                        ));
                    }
                    let mut spec = AlignedBlockSpec::base(channels, self.n, self.rate)?;
                    for _ in 0..self.kappa {
                        spec = align(&spec, &spec, 1, 2)?;
                    }
                    spec.kappa = vec![0, self.kappa];
                    Ok(BuiltCode::Aligned(spec))
                }
            },
        }
    }
}

/// Parses a channel descriptor, honouring the BAWGNC resolution.
pub fn load_channel(desc: &str, bawgnc_atoms: usize) -> Result<BmsChannel, HarnessError> {
    if let Some((kind, arg)) = desc.trim().split_once(':') {
        if matches!(kind.to_ascii_lowercase().as_str(), "bawgnc" | "awgn") && bawgnc_atoms != DEFAULT_BAWGNC_ATOMS {
            let sigma: f64 = arg
                .trim()
                .parse()
                .map_err(|_| ChannelError::Descriptor(desc.to_string()))?;
            return Ok(BmsChannel::bawgnc_with_resolution(sigma, bawgnc_atoms)?);
        }
    }
    Ok(parse_descriptor(desc)?)
}

/// A constructed code ready for simulation.
#[derive(Debug, Clone)]
pub enum BuiltCode {
    Intersection { n: u32, info: Vec<usize>, z: Vec<Vec<f64>> },
    Scheme1(StaircaseCode),
    Chain { spec: ChainSpec, z: Vec<Vec<f64>> },
    Aligned(AlignedBlockSpec),
}

impl BuiltCode {
    pub fn info_len(&self) -> usize {
        match self {
            BuiltCode::Intersection { info, .. } => info.len(),
            BuiltCode::Scheme1(c) => c.info_len(),
            BuiltCode::Chain { spec, .. } => spec.info_len(),
            BuiltCode::Aligned(s) => s.info_len(),
        }
    }

    pub fn blocklength(&self) -> usize {
        match self {
            BuiltCode::Intersection { n, .. } => 1 << n,
            BuiltCode::Scheme1(c) => c.params().blocklength(),
            BuiltCode::Chain { spec, .. } => spec.blocklength(),
            BuiltCode::Aligned(s) => s.len(),
        }
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.blocklength() as f64
    }

    /// Union bound on the block error probability over design channel `j`.
    pub fn bound(&self, j: usize, ch: &BmsChannel) -> Result<f64, HarnessError> {
        Ok(match self {
            BuiltCode::Intersection { info, z, .. } => info.iter().map(|&i| z[j][i]).sum(),
            BuiltCode::Scheme1(c) => c.union_bound(ch)?,
            BuiltCode::Chain { spec, z } => {
                let own = if j == 0 { &spec.first_only } else { &spec.second_only };
                let per_block: f64 = spec.common.iter().chain(own).map(|&i| z[j][i]).sum();
                spec.k as f64 * per_block
            }
            BuiltCode::Aligned(s) => s.union_bound(j),
        })
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, HarnessError> {
        match self {
            BuiltCode::Intersection { n, info: set, .. } => {
                if info.len() != set.len() {
                    return Err(Scheme2Error::InfoLength {
                        expected: set.len(),
                        got: info.len(),
                    }
                    .into());
                }
                let mut u = vec![0u8; 1 << n];
                for (&i, &b) in set.iter().zip(info) {
                    u[i] = b & 1;
                }
                polar_transform_in_place(&mut u)?;
                Ok(u)
            }
            BuiltCode::Scheme1(c) => Ok(c.encode(info)?),
            BuiltCode::Chain { spec, .. } => Ok(spec.encode(info)?),
            BuiltCode::Aligned(s) => Ok(s.encode(info)?),
        }
    }

    /// Decodes as a receiver on design channel `j`.
    pub fn decode(&self, llrs: &[f64], j: usize, ch: &BmsChannel) -> Result<Vec<u8>, HarnessError> {
        match self {
            BuiltCode::Intersection { n, info, .. } => {
                let mut pins = vec![Pin::Frozen(0); 1 << n];
                for &i in info {
                    pins[i] = Pin::Info;
                }
                let out = sc_decode(llrs, &pins, &ProcessingOrder::Natural, Kernel::Exact)?;
                Ok(info.iter().map(|&i| out.bits[i]).collect())
            }
            BuiltCode::Scheme1(c) => Ok(c.decode(llrs, ch)?),
            BuiltCode::Chain { spec, .. } => {
                let dir = if j == 0 { Direction::First } else { Direction::Second };
                Ok(spec.decode(llrs, dir)?)
            }
            BuiltCode::Aligned(s) => Ok(s.decode(llrs, Kernel::Exact)?),
        }
    }
}

impl BuiltCode {
    /// Key-value description; per-channel `z` lists are kept so bounds can be
    /// recomputed after loading.
    pub fn to_kv(&self) -> KvMap {
        let with_z = |mut m: KvMap, z: &[Vec<f64>]| {
            for (j, v) in z.iter().enumerate() {
                m.set(&format!("z{j}"), kv::join(v));
            }
            m
        };
        match self {
            BuiltCode::Intersection { n, info, z } => {
                let mut m = KvMap::new();
                m.set("code", "intersection");
                m.set("n", n);
                m.set("t", z.len());
                m.set("info", kv::join(info));
                m.set("info_bits", info.len());
                with_z(m, z)
            }
            BuiltCode::Scheme1(c) => c.to_kv(),
            BuiltCode::Chain { spec, z } => with_z(spec.to_kv(), z),
            BuiltCode::Aligned(s) => s.to_kv(),
        }
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, HarnessError> {
        let z_lists = |t: usize| -> Result<Vec<Vec<f64>>, KvError> {
            (0..t).map(|j| m.parse_list(&format!("z{j}"))).collect()
        };
        match m.require("code")? {
            "intersection" => {
                let n: u32 = m.parse_value("n")?;
                let info: Vec<usize> = m.parse_list("info")?;
                if info.iter().any(|&i| i >= 1 << n) {
                    return Err(HarnessError::Config("information index out of range".into()));
                }
                Ok(BuiltCode::Intersection {
                    n,
                    info,
                    z: z_lists(m.parse_value("t")?)?,
                })
            }
            "staircase" => Ok(BuiltCode::Scheme1(StaircaseCode::from_kv(m)?)),
            "chain" => Ok(BuiltCode::Chain {
                spec: ChainSpec::from_kv(m)?,
                z: z_lists(2)?,
            }),
            "aligned" => Ok(BuiltCode::Aligned(AlignedBlockSpec::from_kv(m)?)),
            other => Err(HarnessError::Config(format!("unknown code type {other:?}"))),
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub channel: String,
    pub n: u32,
    pub rate: f64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
}

pub const CSV_HEADER: &str = "scheme,channel,n,rate,trials,errors,error_rate,ci_low,ci_high,bound";

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.6},{},{},{:.6e},{:.6e},{:.6e},{:.6e}",
            self.scheme,
            self.channel,
            self.n,
            self.rate,
            self.trials,
            self.errors,
            self.error_rate,
            self.ci_low,
            self.ci_high,
            self.bound
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub blocklength: usize,
    pub info_bits: usize,
    /// Gap of one rate-`rate` block of length `2^n` over the channel set.
    pub compound_gap: f64,
    /// Code description without the per-label `z` lists.
    pub construction: BTreeMap<String, String>,
    pub rows: Vec<ResultRow>,
}

impl RunReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    /// Writes `path` (CSV) and `path` with a `.json` extension.
    pub fn write(&self, path: &Path) -> Result<PathBuf, HarnessError> {
        let io = |p: &Path| {
            let p = p.display().to_string();
            move |source| HarnessError::Io { path: p, source }
        };
        fs::write(path, self.to_csv()).map_err(io(path))?;
        let json = path.with_extension("json");
        fs::write(&json, serde_json::to_string_pretty(self)?).map_err(io(&json))?;
        Ok(json)
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// RNG for `trial` on channel `j`: a per-channel seed, one stream per trial.
pub fn trial_rng(seed: u64, channel: usize, trial: u64) -> ChaCha8Rng {
    let mixed = seed ^ (channel as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    rng.set_stream(trial);
    rng
}

/// Block errors in `trials` transmissions over `ch`, seen by receiver `j`.
pub fn count_errors(
    code: &BuiltCode,
    j: usize,
    ch: &BmsChannel,
    trials: u64,
    seed: u64,
) -> Result<u64, HarnessError> {
    let sampler = ch.sampler();
    (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64, HarnessError> {
            let mut rng = trial_rng(seed, j, trial);
            let info = random_bits(&mut rng, code.info_len());
            let x = code.encode(&info)?;
            let y = sampler.transmit(&x, &mut rng);
            let decoded = match code.decode(&y, j, ch) {
                Ok(d) => d,
                // A staircase column without enough trusted rows is a block error.
                Err(HarnessError::Scheme1(Scheme1Error::ColumnFailure { .. })) => return Ok(1),
                Err(e) => return Err(e),
            };
            Ok(u64::from(decoded != info))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn is_z_key(k: &str) -> bool {
    k.strip_prefix('z').is_some_and(|rest| rest.parse::<usize>().is_ok())
}

/// `min_j |A_j| / N - |A_1 ∩ ... ∩ A_t| / N` for rate-`rate` designs at `n`.
pub fn measured_gap(channels: &[BmsChannel], n: u32, rate: f64) -> Result<f64, HarnessError> {
    let specs = channels
        .iter()
        .map(|c| build_spec(c, n, rate))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(compound_gap(&classify_indices(&specs)?, channels.len()))
}

pub fn run(cfg: &RunConfig) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let channels = cfg.load_channels()?;
    let code = cfg.build(&channels)?;
    let mut rows = Vec::with_capacity(channels.len());
    for (j, ch) in channels.iter().enumerate() {
        let errors = count_errors(&code, j, ch, cfg.trials, cfg.seed)?;
        let (ci_low, ci_high) = wilson_interval(errors, cfg.trials);
        rows.push(ResultRow {
            scheme: cfg.scheme.to_string(),
            channel: cfg.channels[j].clone(),
            n: cfg.n,
            rate: code.rate(),
            trials: cfg.trials,
            errors,
            error_rate: errors as f64 / cfg.trials as f64,
            ci_low,
            ci_high,
            bound: code.bound(j, ch)?,
        });
    }
    let desc = code.to_kv();
    let construction = desc
        .keys()
        .filter(|k| !is_z_key(k))
        .map(|k| (k.to_string(), desc.get(k).unwrap_or_default().to_string()))
        .collect();
    let report = RunReport {
        config: cfg.clone(),
        blocklength: code.blocklength(),
        info_bits: code.info_len(),
        compound_gap: measured_gap(&channels, cfg.n, cfg.rate)?,
        construction,
        rows,
    };
    if let Some(out) = &cfg.out {
        report.write(out)?;
    }
    Ok(report)
}
