use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use unipolar::channel::{DominatingSet, DEFAULT_BAWGNC_ATOMS};
use unipolar::harness::{load_channel, run, BuiltCode, RunConfig, CSV_HEADER};
use unipolar::kv::KvMap;
use unipolar::polar::build_spec;
use unipolar::scheme1::choose_params;
use unipolar::scheme2::{classify_indices, compound_gap, type_counts};

#[derive(Parser)]
#[command(name = "unipolar", version, about = "Polar codes that work over every channel in a set of BMS channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code and print its description.
    Construct(ConstructArgs),
    /// Encode bits read as 0/1 characters.
    Encode(CodeIo),
    /// Decode whitespace-separated LLRs.
    Decode(DecodeArgs),
    /// Monte Carlo block error rates.
    Simulate(SimulateArgs),
    /// Parameters of the finite dominating set for a capacity and gap.
    Dominate(DominateArgs),
    /// Good-set overlap of several channels at one rate, per block length.
    Gap(GapArgs),
}

#[derive(Args, Default)]
struct CodeOptions {
    #[arg(long)]
    scheme: Option<String>,
    /// Comma-separated descriptors: bec:0.5, bsc:0.11, bawgnc:0.97865, mix:<file>.
    #[arg(long)]
    channels: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "rs-dim")]
    rs_dim: Option<usize>,
    #[arg(long)]
    kappa: Option<usize>,
    /// Target error probability used when choosing staircase parameters.
    #[arg(long)]
    p: Option<f64>,
    /// Constant in the blocklength formula.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "bawgnc-atoms")]
    bawgnc_atoms: Option<usize>,
}

impl CodeOptions {
    fn apply(&self, m: &mut KvMap) {
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.set(k, v);
            }
        };
        set("scheme", self.scheme.clone());
        set("channels", self.channels.clone());
        set("n", self.n.map(|v| v.to_string()));
        set("rate", self.rate.map(|v| v.to_string()));
        set("eps", self.eps.map(|v| v.to_string()));
        set("k", self.k.map(|v| v.to_string()));
        set("rs_dim", self.rs_dim.map(|v| v.to_string()));
        set("kappa", self.kappa.map(|v| v.to_string()));
        set("p", self.p.map(|v| v.to_string()));
        set("c", self.c.map(|v| v.to_string()));
        set("bawgnc_atoms", self.bawgnc_atoms.map(|v| v.to_string()));
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    code: CodeOptions,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CodeIo {
    /// Code description written by `construct`.
    #[arg(long)]
    code: PathBuf,
    /// Input file; `-` reads standard input.
    #[arg(long, default_value = "-")]
    input: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    io: CodeIo,
    /// Channel the observations came through.
    #[arg(long)]
    channel: String,
    /// Which design channel the receiver is on (chain codes decode
    /// left to right for 0 and right to left otherwise).
    #[arg(long, default_value_t = 0)]
    receiver: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// Key-value run configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    code: CodeOptions,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output; a JSON summary is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DominateArgs {
    #[arg(long)]
    capacity: f64,
    #[arg(long)]
    eps: f64,
    /// Channels to map onto their dominating representatives.
    #[arg(long, value_delimiter = ',')]
    channel: Vec<String>,
}

#[derive(Args)]
struct GapArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    channels: Vec<String>,
    /// One or more block-length exponents, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u32>,
    #[arg(long)]
    rate: f64,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Construct(a) => construct(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Simulate(a) => simulate(a),
        Command::Dominate(a) => dominate(a),
        Command::Gap(a) => gap(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_input(input: &str) -> Result<String> {
    if input == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(input).with_context(|| format!("reading {input}"))
    }
}

fn load_code(path: &Path) -> Result<BuiltCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(BuiltCode::from_kv(&KvMap::parse(&text)?)?)
}

fn construct(a: ConstructArgs) -> Result<()> {
    let mut m = KvMap::new();
    a.code.apply(&mut m);
    m.set("trials", 1);
    if m.get("n").is_none() {
        // Staircase codes can derive n from the gap and the error target.
        let eps = a.code.eps.context("--n is required unless --scheme scheme1 with --eps")?;
        let probe = KvMap::parse(&format!("{}n = 1\n", m.to_text()))?;
        let cfg = RunConfig::from_kv(&probe)?;
        if cfg.scheme != unipolar::harness::SchemeKind::Scheme1 {
            bail!("--n is required for {}", cfg.scheme);
        }
        let cap = cfg
            .load_channels()?
            .iter()
            .map(|c| c.capacity())
            .fold(f64::INFINITY, f64::min);
        let chosen = choose_params(cap, eps, cfg.p, cfg.c)
            .context("blocklength formula gave an unusable n; pass --n explicitly")?;
        eprintln!(
            "chose n = {}, k = {}, rs_dim = {} (rate {:.4}, error bound {:.3e})",
            chosen.params.n, chosen.params.k, chosen.params.rs_dimension, chosen.rate, chosen.error_bound
        );
        m.set("n", chosen.params.n);
        m.set("k", chosen.params.k);
        m.set("rs_dim", chosen.params.rs_dimension);
    }
    let cfg = RunConfig::from_kv(&m)?;
    let code = cfg.build(&cfg.load_channels()?)?;
    eprintln!(
        "{}: blocklength {}, {} information bits, rate {:.4}",
        cfg.scheme,
        code.blocklength(),
        code.info_len(),
        code.rate()
    );
    emit(a.out.as_deref(), &code.to_kv().to_text())
}

fn encode(a: CodeIo) -> Result<()> {
    let code = load_code(&a.code)?;
    let bits: Vec<u8> = read_input(&a.input)?
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => bail!("unexpected character {other:?} in bit input"),
        })
        .collect::<Result<_>>()?;
    let x = code.encode(&bits)?;
    let mut s: String = x.iter().map(|&b| char::from(b'0' + b)).collect();
    s.push('\n');
    emit(a.out.as_deref(), &s)
}

fn decode(a: DecodeArgs) -> Result<()> {
    let code = load_code(&a.io.code)?;
    let ch = load_channel(&a.channel, DEFAULT_BAWGNC_ATOMS)?;
    let llrs: Vec<f64> = read_input(&a.io.input)?
        .split_whitespace()
        .map(|t| t.parse::<f64>().with_context(|| format!("bad LLR {t:?}")))
        .collect::<Result<_>>()?;
    let bits = code.decode(&llrs, a.receiver, &ch)?;
    let mut s: String = bits.iter().map(|&b| char::from(b'0' + b)).collect();
    s.push('\n');
    emit(a.io.out.as_deref(), &s)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut m = match &a.config {
        Some(p) => KvMap::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => KvMap::new(),
    };
    a.code.apply(&mut m);
    if let Some(t) = a.trials {
        m.set("trials", t);
    }
    if let Some(s) = a.seed {
        m.set("seed", s);
    }
    if let Some(o) = &a.out {
        m.set("out", o.display());
    }
    let cfg = RunConfig::from_kv(&m)?;
    let report = run(&cfg)?;
    println!("{CSV_HEADER}");
    for r in &report.rows {
        println!("{}", r.csv_line());
    }
    Ok(())
}

fn dominate(a: DominateArgs) -> Result<()> {
    let d = DominatingSet::new(a.capacity, a.eps)?;
    println!("capacity = {}", d.capacity);
    println!("eps = {}", d.eps);
    println!("h = {:.6}", d.h);
    println!("A = {}", d.a);
    println!("T = {}", d.t);
    println!("delta = {:.6}", d.delta);
    println!("shift = {:.6}", d.shift);
    println!("log2_size_bound = {:.3}", d.log2_size_bound());
    match d.members() {
        Ok(family) => {
            println!("members = {}", family.members.len());
            for m in &family.members {
                let atoms: Vec<String> = m.atoms().iter().map(|t| format!("{:.6}:{:.6}", t.x, t.p)).collect();
                println!("member capacity {:.6} atoms {}", m.capacity(), atoms.join(" "));
            }
        }
        Err(e) => println!("members = not enumerated ({e})"),
    }
    for desc in &a.channel {
        let ch = load_channel(desc, DEFAULT_BAWGNC_ATOMS)?;
        match d.representative_for(&ch) {
            Some((_, rep)) => println!(
                "{desc}: capacity {:.6}, representative capacity {:.6}",
                ch.capacity(),
                rep.capacity()
            ),
            None => println!("{desc}: capacity {:.6} below C - eps, not covered", ch.capacity()),
        }
    }
    Ok(())
}

fn gap(a: GapArgs) -> Result<()> {
    let mut channels = Vec::with_capacity(a.channels.len());
    for desc in &a.channels {
        channels.push(load_channel(desc, DEFAULT_BAWGNC_ATOMS)?);
    }
    let t = channels.len();
    let mut header = vec!["n".to_string(), "N".to_string()];
    header.extend((0..t).map(|j| format!("A{j}")));
    header.extend(["intersection".into(), "surrogate".into(), "gap".into()]);
    println!("{}", header.join(","));
    for &n in &a.n {
        let specs = channels
            .iter()
            .map(|c| build_spec(c, n, a.rate))
            .collect::<Result<Vec<_>, _>>()?;
        let types = classify_indices(&specs)?;
        let counts = type_counts(&types, t);
        let joint = counts[counts.len() - 1];
        let big_n = types.len();
        let mut row = vec![n.to_string(), big_n.to_string()];
        row.extend(specs.iter().map(|s| s.good_set.len().to_string()));
        row.push(joint.to_string());
        row.push(format!("{:.6}", a.rate - joint as f64 / big_n as f64));
        row.push(format!("{:.6}", compound_gap(&types, t)));
        println!("{}", row.join(","));
    }
    Ok(())
}
