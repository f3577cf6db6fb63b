//! Binary-input memoryless output-symmetric (BMS) channels.
//!
//! Every BMS channel is a mixture of binary symmetric channels. We store that
//! mixture as its D-representation: a finite list of atoms `(x, p)` on
//! `[0, 1]`, where an atom at `x` with mass `p` stands for using a
//! BSC with crossover `(1 - x) / 2` with probability `p`. `x = 0` is an
//! erasure and `x = 1` a noiseless use.
//!
//! Everything downstream (capacity, Bhattacharyya, Wasserstein distance,
//! degradation, LLR simulation) works on this representation.

mod degrade;
mod dominating;
mod wasserstein;

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

pub use degrade::{degradation_check, DEGRADATION_TOLERANCE};
pub use dominating::{ChannelFamily, DominatingSet, DEFAULT_MAX_RESOLUTION};
pub use wasserstein::{quantize, wasserstein, GridDensity};

/// Tolerance on the total mass of a channel description.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Default number of atoms used to discretize the BAWGN channel.
pub const DEFAULT_BAWGNC_ATOMS: usize = 2048;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ChannelError {
    #[error("{kind} parameter {value} out of range ({expected})")]
    Parameter {
        kind: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("atom location {0} outside [0, 1]")]
    Location(f64),
    #[error("negative or non-finite atom mass {0}")]
    Mass(f64),
    #[error("atom masses sum to {0}, expected 1")]
    TotalMass(f64),
    #[error("channel has no atoms")]
    Empty,
    #[error("cannot parse channel descriptor {0:?}; expected bec:<e>, bsc:<p>, bawgnc:<sigma> or mix:<path>")]
    Descriptor(String),
    #[error("reading mixture file {path}: {message}")]
    MixtureFile { path: String, message: String },
    #[error("resolution T = {t} exceeds the configured limit {limit}; use a larger eps or raise the limit")]
    ResolutionLimit { t: u64, limit: u64 },
}

/// One BSC component of the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub p: f64,
}

impl Atom {
    /// Crossover probability of the BSC this atom stands for.
    pub fn crossover(&self) -> f64 {
        (1.0 - self.x) / 2.0
    }

    /// Magnitude of the log-likelihood ratio produced by this component.
    pub fn llr_magnitude(&self) -> f64 {
        if self.x >= 1.0 {
            f64::INFINITY
        } else {
            ((1.0 + self.x) / (1.0 - self.x)).ln()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    Bec,
    Bsc,
    Bawgnc,
}

/// A BMS channel as a finite D-representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmsChannel {
    atoms: Vec<Atom>,
    label: String,
}

impl fmt::Display for BmsChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl BmsChannel {
    /// Builds a channel from arbitrary atoms. Atoms are sorted, coincident
    /// locations merged and zero-mass atoms dropped.
    pub fn from_atoms(atoms: Vec<Atom>, label: impl Into<String>) -> Result<Self, ChannelError> {
        let mut total = 0.0;
        for a in &atoms {
            if !(0.0..=1.0).contains(&a.x) || !a.x.is_finite() {
                return Err(ChannelError::Location(a.x));
            }
            if a.p < 0.0 || !a.p.is_finite() {
                return Err(ChannelError::Mass(a.p));
            }
            total += a.p;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE * (atoms.len().max(1) as f64).sqrt().max(1.0) {
            return Err(ChannelError::TotalMass(total));
        }
        let mut sorted: Vec<Atom> = atoms.into_iter().filter(|a| a.p > 0.0).collect();
        if sorted.is_empty() {
            return Err(ChannelError::Empty);
        }
        sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(sorted.len());
        for a in sorted {
            match merged.last_mut() {
                Some(last) if last.x == a.x => last.p += a.p,
                _ => merged.push(a),
            }
        }
        Ok(BmsChannel {
            atoms: merged,
            label: label.into(),
        })
    }

    pub fn bec(erasure: f64) -> Result<Self, ChannelError> {
        if !(0.0..=1.0).contains(&erasure) {
            return Err(ChannelError::Parameter {
                kind: "BEC",
                value: erasure,
                expected: "0 <= e <= 1",
            });
        }
        Self::from_atoms(
            vec![Atom { x: 0.0, p: erasure }, Atom { x: 1.0, p: 1.0 - erasure }],
            format!("bec:{erasure}"),
        )
    }

    pub fn bsc(crossover: f64) -> Result<Self, ChannelError> {
        if !(0.0..=0.5).contains(&crossover) {
            return Err(ChannelError::Parameter {
                kind: "BSC",
                value: crossover,
                expected: "0 <= p <= 1/2",
            });
        }
        Self::from_atoms(
            vec![Atom { x: 1.0 - 2.0 * crossover, p: 1.0 }],
            format!("bsc:{crossover}"),
        )
    }

    pub fn bawgnc(sigma: f64) -> Result<Self, ChannelError> {
        Self::bawgnc_with_resolution(sigma, DEFAULT_BAWGNC_ATOMS)
    }

    /// BPSK over AWGN with noise standard deviation `sigma`, discretized into
    /// `bins` equal-width bins of the D-value `|tanh(L/2)|`. Each bin's exact
    /// probability mass is placed at the bin midpoint.
    pub fn bawgnc_with_resolution(sigma: f64, bins: usize) -> Result<Self, ChannelError> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(ChannelError::Parameter {
                kind: "BAWGNC",
                value: sigma,
                expected: "sigma > 0",
            });
        }
        if bins == 0 {
            return Err(ChannelError::Parameter {
                kind: "BAWGNC",
                value: 0.0,
                expected: "at least one bin",
            });
        }
        let std = Normal::new(0.0, 1.0).expect("unit normal");
        // LLR given input +1 is N(2/s^2, 4/s^2).
        let mean = 2.0 / (sigma * sigma);
        let sd = 2.0 / sigma;
        let tail = |t: f64| -> f64 {
            if t >= 1.0 {
                return 0.0;
            }
            let l = 2.0 * t.atanh();
            std.sf((l - mean) / sd) + std.cdf((-l - mean) / sd)
        };
        let mut atoms = Vec::with_capacity(bins);
        let mut upper = tail(0.0);
        for j in 0..bins {
            let hi = (j + 1) as f64 / bins as f64;
            let next = tail(hi);
            atoms.push(Atom {
                x: (j as f64 + 0.5) / bins as f64,
                p: (upper - next).max(0.0),
            });
            upper = next;
        }
        let total: f64 = atoms.iter().map(|a| a.p).sum();
        for a in &mut atoms {
            a.p /= total;
        }
        Self::from_atoms(atoms, format!("bawgnc:{sigma}"))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `1 - sum p_i h2((1 - x_i) / 2)`.
    pub fn capacity(&self) -> f64 {
        1.0 - self.atoms.iter().map(|a| a.p * h2(a.crossover())).sum::<f64>()
    }

    /// `sum p_i sqrt(1 - x_i^2)`.
    pub fn bhattacharyya(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.p * (1.0 - a.x * a.x).max(0.0).sqrt())
            .sum()
    }

    pub fn sampler(&self) -> ChannelSampler {
        let mut cumulative = Vec::with_capacity(self.atoms.len());
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.p;
            cumulative.push(acc);
        }
        ChannelSampler {
            cumulative,
            magnitude: self.atoms.iter().map(Atom::llr_magnitude).collect(),
            crossover: self.atoms.iter().map(Atom::crossover).collect(),
        }
    }
}

pub fn make_channel(kind: ChannelKind, param: f64) -> Result<BmsChannel, ChannelError> {
    match kind {
        ChannelKind::Bec => BmsChannel::bec(param),
        ChannelKind::Bsc => BmsChannel::bsc(param),
        ChannelKind::Bawgnc => BmsChannel::bawgnc(param),
    }
}

/// Parses `bec:0.5`, `bsc:0.11`, `bawgnc:0.97865` or `mix:<path>`. A mixture
/// file holds one `x,p` pair per line; `#` starts a comment.
pub fn parse_descriptor(desc: &str) -> Result<BmsChannel, ChannelError> {
    let bad = || ChannelError::Descriptor(desc.to_string());
    let (kind, arg) = desc.trim().split_once(':').ok_or_else(bad)?;
    match kind.to_ascii_lowercase().as_str() {
        "mix" => read_mixture(Path::new(arg)),
        k => {
            let v: f64 = arg.trim().parse().map_err(|_| bad())?;
            let kind = match k {
                "bec" => ChannelKind::Bec,
                "bsc" => ChannelKind::Bsc,
                "bawgnc" | "awgn" => ChannelKind::Bawgnc,
                _ => return Err(bad()),
            };
            make_channel(kind, v)
        }
    }
}

fn read_mixture(path: &Path) -> Result<BmsChannel, ChannelError> {
    let err = |message: String| ChannelError::MixtureFile {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut atoms = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (x, p) = line
            .split_once(',')
            .ok_or_else(|| err(format!("line {}: expected x,p", lineno + 1)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| err(format!("line {}: {e}", lineno + 1)))
        };
        atoms.push(Atom { x: parse(x)?, p: parse(p)? });
    }
    BmsChannel::from_atoms(atoms, format!("mix:{}", path.display()))
}

/// Draws channel outputs as log-likelihood ratios, `ln P(y|0) / P(y|1)`.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    cumulative: Vec<f64>,
    magnitude: Vec<f64>,
    crossover: Vec<f64>,
}

impl ChannelSampler {
    /// One channel use with input `bit`: pick a BSC component, then pass
    /// the bit through it.
    pub fn llr<R: Rng + ?Sized>(&self, bit: u8, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().expect("non-empty channel");
        let u: f64 = rng.random::<f64>() * total;
        let i = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1);
        let mag = self.magnitude[i];
        if mag == 0.0 {
            return 0.0;
        }
        let flipped = rng.random::<f64>() < self.crossover[i];
        let received = bit ^ flipped as u8;
        if received == 0 {
            mag
        } else {
            -mag
        }
    }

    pub fn transmit<R: Rng + ?Sized>(&self, codeword: &[u8], rng: &mut R) -> Vec<f64> {
        codeword.iter().map(|&b| self.llr(b, rng)).collect()
    }
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Inverse of `h2` on `[0, 1/2]`, by bisection to 1e-12.
pub fn h2_inv(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bec_atoms() {
        let ch = BmsChannel::bec(0.5).unwrap();
        assert_eq!(ch.atoms(), &[Atom { x: 0.0, p: 0.5 }, Atom { x: 1.0, p: 0.5 }]);
        assert!((BmsChannel::bec(0.3).unwrap().capacity() - 0.7).abs() < 1e-15);
        assert!((BmsChannel::bec(0.3).unwrap().bhattacharyya() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn bsc_atom_and_functionals() {
        let ch = BmsChannel::bsc(0.11).unwrap();
        assert_eq!(ch.atoms().len(), 1);
        assert!((ch.atoms()[0].x - 0.78).abs() < 1e-15);
        // 1 - h2(0.11) with h2(0.11) = -0.11 log2 0.11 - 0.89 log2 0.89
        let direct = 1.0 + 0.11 * 0.11f64.log2() + 0.89 * 0.89f64.log2();
        assert!((ch.capacity() - direct).abs() < 1e-14);
        assert!((ch.capacity() - 0.50007).abs() < 2e-5);
        assert!((ch.bhattacharyya() - 2.0 * (0.11f64 * 0.89).sqrt()).abs() < 1e-14);
        assert!((ch.bhattacharyya() - 0.62578).abs() < 1e-5);
    }

    #[test]
    fn perfect_channel() {
        let ch = BmsChannel::bsc(0.0).unwrap();
        assert_eq!(ch.capacity(), 1.0);
        assert_eq!(ch.bhattacharyya(), 0.0);
    }

    #[test]
    fn parameter_ranges() {
        assert!(BmsChannel::bec(1.2).is_err());
        assert!(BmsChannel::bsc(0.6).is_err());
        assert!(BmsChannel::bawgnc(0.0).is_err());
        assert!(BmsChannel::bawgnc(-1.0).is_err());
        assert!(matches!(
            BmsChannel::from_atoms(vec![Atom { x: 0.5, p: 0.9 }], "x"),
            Err(ChannelError::TotalMass(_))
        ));
        assert!(matches!(
            BmsChannel::from_atoms(vec![Atom { x: 1.5, p: 1.0 }], "x"),
            Err(ChannelError::Location(_))
        ));
    }

    #[test]
    fn atoms_sorted_and_merged() {
        let ch = BmsChannel::from_atoms(
            vec![Atom { x: 0.7, p: 0.25 }, Atom { x: 0.2, p: 0.5 }, Atom { x: 0.7, p: 0.25 }],
            "m",
        )
        .unwrap();
        assert_eq!(ch.atoms(), &[Atom { x: 0.2, p: 0.5 }, Atom { x: 0.7, p: 0.5 }]);
    }

    #[test]
    fn descriptors() {
        assert_eq!(parse_descriptor("bec:0.5").unwrap(), BmsChannel::bec(0.5).unwrap());
        assert_eq!(parse_descriptor("bsc:0.11").unwrap(), BmsChannel::bsc(0.11).unwrap());
        assert!(parse_descriptor("bawgnc:0.97865").is_ok());
        assert!(parse_descriptor("foo:1").is_err());
        assert!(parse_descriptor("bec").is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "# x,p\n0.0,0.25\n0.5, 0.25\n1.0,0.5\n").unwrap();
        let ch = parse_descriptor(&format!("mix:{}", path.display())).unwrap();
        assert_eq!(ch.atoms().len(), 3);
        assert!(parse_descriptor("mix:/nonexistent/file.csv").is_err());
    }

    #[test]
    fn h2_inverse() {
        let h = h2_inv(0.5);
        assert!((h - 0.110028).abs() < 1e-6);
        assert!((h2(h) - 0.5).abs() < 1e-11);
        assert_eq!(h2_inv(0.0), 0.0);
    }

    #[test]
    fn sampler_statistics_match_model() {
        let ch = BmsChannel::bsc(0.2).unwrap();
        let s = ch.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 200_000;
        let flips = (0..trials).filter(|_| s.llr(0, &mut rng) < 0.0).count();
        let rate = flips as f64 / trials as f64;
        assert!((rate - 0.2).abs() < 4.0 * (0.16f64 / trials as f64).sqrt());
        let bec = BmsChannel::bec(0.4).unwrap().sampler();
        let erased = (0..trials).filter(|_| bec.llr(1, &mut rng) == 0.0).count();
        assert!((erased as f64 / trials as f64 - 0.4).abs() < 0.005);
        assert!((0..1000).all(|_| bec.llr(1, &mut rng) <= 0.0));
    }

    /// `1 - E[log2(1 + exp(-L))]` with `L ~ N(2/s^2, 4/s^2)`, by Simpson's rule.
    fn awgn_capacity_oracle(sigma: f64) -> f64 {
        let mean = 2.0 / (sigma * sigma);
        let sd = 2.0 / sigma;
        let (lo, hi) = (mean - 14.0 * sd, mean + 14.0 * sd);
        let steps = 20_000;
        let h = (hi - lo) / steps as f64;
        let f = |l: f64| {
            let z = (l - mean) / sd;
            let pdf = (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
            let loss = if l > -30.0 { (-l).exp().ln_1p() } else { -l } / std::f64::consts::LN_2;
            pdf * loss
        };
        let mut acc = f(lo) + f(hi);
        for i in 1..steps {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
        }
        1.0 - acc * h / 3.0
    }

    #[test]
    fn bawgnc_capacity_against_integration() {
        let (mut lo, mut hi) = (0.5, 2.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if awgn_capacity_oracle(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 0.97865).abs() < 2e-4, "sigma at capacity 1/2: {lo}");
        let ch = BmsChannel::bawgnc(0.97865).unwrap();
        assert_eq!(ch.atoms().len(), DEFAULT_BAWGNC_ATOMS);
        assert!((ch.capacity() - 0.5).abs() < 1e-3);
        for sigma in [0.5, 0.8, 1.2, 2.0] {
            let ch = BmsChannel::bawgnc(sigma).unwrap();
            assert!((ch.capacity() - awgn_capacity_oracle(sigma)).abs() < 1e-3, "sigma {sigma}");
        }
    }

    #[test]
    fn bms_sandwich_on_random_mixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let k = rng.random_range(1..8);
            let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            let atoms = w.iter().map(|p| Atom { x: rng.random(), p: p / s }).collect();
            let ch = BmsChannel::from_atoms(atoms, "r").unwrap();
            let (c, z) = (ch.capacity(), ch.bhattacharyya());
            assert!(z >= 1.0 - c - 1e-9);
            assert!(z * z <= 1.0 - c * c + 1e-9);
        }
    }
}
