//! Circuit compilation, single-shot encoding operations and TCF utilities.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use dpoq_core::barrington::{barrington_compile, weighted_depth, DEFAULT_MAX_DEPTH};
use dpoq_core::bp::{anf_to_bp, Mod2Bp};
use dpoq_core::circuits::Circuit;
use dpoq_core::randenc::EncodedFunction;
use dpoq_core::tcf::{TcfKey, TcfTrapdoor};
use dpoq_core::BitVec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{read, FamilyArg};

/// Programs larger than this are compiled and reported but not encoded:
/// the encoding has on the order of `l^4` monomials.
pub const MAX_ENCODE_SIZE: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// Width-5 permutation programs.
    Barrington,
    /// One program per algebraic normal form.
    Anf,
}

#[derive(Args)]
pub struct Source {
    /// Circuit file (`INPUT`, `g = OP a b`, `OUTPUT` lines).
    #[arg(long, conflicts_with = "bp", required_unless_present = "bp")]
    circuit: Option<PathBuf>,
    /// Branching program in text form (`BP l=.. vars=..` and `EDGE` lines).
    #[arg(long)]
    bp: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Route::Barrington, env = "DPOQ_ROUTE")]
    route: Route,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
}

impl Source {
    fn programs(&self) -> Result<Vec<Mod2Bp>> {
        if let Some(p) = &self.bp {
            return Ok(vec![Mod2Bp::parse(&read(p)?)?]);
        }
        let path = self.circuit.as_ref().expect("clap enforces one source");
        let c = Circuit::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        (0..c.num_outputs()).map(|o| program(&c, o, self.route, self.max_depth)).collect()
    }

    fn function(&self) -> Result<EncodedFunction> {
        let bps = self.programs()?;
        if let Some(big) = bps.iter().find(|b| b.size() > MAX_ENCODE_SIZE) {
            bail!(
                "program with {} vertices exceeds the encoding limit of {MAX_ENCODE_SIZE}; try --route anf",
                big.size()
            );
        }
        Ok(EncodedFunction::new(&bps)?)
    }
}

fn program(c: &Circuit, out: usize, route: Route, max_depth: usize) -> Result<Mod2Bp> {
    Ok(match route {
        Route::Barrington => barrington_compile(c, out, max_depth)?,
        Route::Anf => anf_to_bp(&c.anf(out)?),
    })
}

fn hex_arg(hex: &str, len: usize, what: &str) -> Result<BitVec> {
    BitVec::from_hex(hex, len).with_context(|| format!("--{what} must be {len} bits of hex"))
}

fn print(v: serde_json::Value) -> Result<ExitCode> {
    crate::emit(&serde_json::to_string_pretty(&v)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct CompileArgs {
    /// Circuit file.
    circuit: PathBuf,
    #[arg(long, value_enum, default_value_t = Route::Barrington, env = "DPOQ_ROUTE")]
    route: Route,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    /// Write each output's program to `<dir>/out<k>.bp`.
    #[arg(long)]
    bp_dir: Option<PathBuf>,
}

pub fn compile(args: CompileArgs) -> Result<ExitCode> {
    let c = Circuit::parse(&read(&args.circuit)?).with_context(|| format!("parsing {}", args.circuit.display()))?;
    let bps: Vec<Mod2Bp> = (0..c.num_outputs())
        .map(|o| program(&c, o, args.route, args.max_depth))
        .collect::<Result<_>>()?;
    if let Some(dir) = &args.bp_dir {
        std::fs::create_dir_all(dir)?;
        for (o, bp) in bps.iter().enumerate() {
            std::fs::write(dir.join(format!("out{o}.bp")), bp.to_text())?;
        }
    }
    let programs: Vec<_> = bps
        .iter()
        .enumerate()
        .map(|(o, bp)| {
            let mut v = json!({ "output": o, "size": bp.size(), "edges": bp.edges().len() });
            if args.route == Route::Barrington {
                let d = weighted_depth(&c, o);
                v["weighted_depth"] = json!(d);
                v["length_bound"] = json!(4usize.pow(d as u32));
            }
            v
        })
        .collect();
    let encoding = if bps.iter().all(|b| b.size() <= MAX_ENCODE_SIZE) {
        let f = EncodedFunction::new(&bps)?;
        json!({
            "preimage_bits": f.preimage_len(),
            "output_bits": f.output_len(),
            "locality": f.locality(),
            "width": f.estimate_width(),
        })
    } else {
        json!({ "skipped": format!("a program exceeds {MAX_ENCODE_SIZE} vertices") })
    };
    print(json!({
        "circuit": {
            "inputs": c.num_inputs(),
            "outputs": c.num_outputs(),
            "gates": c.gates().len(),
            "depth": c.analyze().depth,
        },
        "route": format!("{:?}", args.route).to_lowercase(),
        "programs": programs,
        "encoding": encoding,
    }))
}

#[derive(Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    source: Source,
    /// Input bits as hex (little-endian bytes).
    #[arg(long)]
    x: String,
    /// Randomness bits as hex; sampled from `--seed` when absent.
    #[arg(long)]
    rand: Option<String>,
    #[arg(long, default_value_t = 0, env = "DPOQ_SEED")]
    seed: u64,
}

pub fn encode(args: EncodeArgs) -> Result<ExitCode> {
    let f = args.source.function()?;
    let x = hex_arg(&args.x, f.num_inputs(), "x")?;
    let pre = match &args.rand {
        Some(h) => {
            let r = hex_arg(h, f.preimage_len() - f.num_inputs(), "rand")?;
            BitVec::concat(&[&x, &r])
        }
        None => f.random_preimage(&x, &mut ChaCha8Rng::seed_from_u64(args.seed)),
    };
    let y = f.apply_hat(&pre)?;
    print(json!({
        "x": x.to_hex(),
        "rand": pre.slice(f.num_inputs()..pre.len()).to_hex(),
        "rand_bits": f.preimage_len() - f.num_inputs(),
        "y_hat": y.to_hex(),
        "y_hat_bits": y.len(),
    }))
}

#[derive(Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    source: Source,
    /// Encoded output as hex.
    #[arg(long)]
    y: String,
}

pub fn decode(args: DecodeArgs) -> Result<ExitCode> {
    let f = args.source.function()?;
    let y = hex_arg(&args.y, f.output_len(), "y")?;
    let v = f.decode(&y)?;
    print(json!({ "value": v, "bits": BitVec::from_u64(v, f.num_outputs()).to_string() }))
}

#[derive(Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
}

pub fn reconstruct(args: ReconstructArgs) -> Result<ExitCode> {
    let f = args.source.function()?;
    let x = hex_arg(&args.x, f.num_inputs(), "x")?;
    let y = hex_arg(&args.y, f.output_len(), "y")?;
    let pre = f.reconstruct(&x, &y)?;
    print(json!({ "rand": pre.slice(f.num_inputs()..pre.len()).to_hex(), "rand_bits": pre.len() - f.num_inputs() }))
}

#[derive(Subcommand)]
pub enum TcfCommand {
    /// Generate a key and trapdoor.
    Gen {
        #[arg(long, value_enum, default_value_t = FamilyArg::Toy, env = "DPOQ_TCF")]
        family: FamilyArg,
        /// Prime bit length (rabin) or input width (toy).
        #[arg(long, default_value_t = 3, env = "DPOQ_SIZE")]
        size: usize,
        #[arg(long, default_value_t = 0, env = "DPOQ_SEED")]
        seed: u64,
        #[arg(long)]
        key_out: Option<PathBuf>,
        #[arg(long)]
        trapdoor_out: Option<PathBuf>,
    },
    /// Evaluate the function on an input.
    Eval {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        x: u64,
    },
    /// Both preimages of an image.
    Invert {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        trapdoor: PathBuf,
        #[arg(long)]
        y: u64,
    },
}

fn load_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn tcf(cmd: TcfCommand) -> Result<ExitCode> {
    match cmd {
        TcfCommand::Gen { family, size, seed, key_out, trapdoor_out } => {
            let (key, td) = TcfKey::gen(family.into(), size, &mut ChaCha8Rng::seed_from_u64(seed))?;
            if let Some(p) = &key_out {
                std::fs::write(p, serde_json::to_string(&key)?)?;
            }
            if let Some(p) = &trapdoor_out {
                std::fs::write(p, serde_json::to_string(&td)?)?;
            }
            print(json!({
                "key": key,
                "trapdoor": if trapdoor_out.is_some() { json!("written") } else { json!(td) },
                "input_bits": key.input_bits(),
                "output_bits": key.output_bits(),
            }))
        }
        TcfCommand::Eval { key, x } => {
            let key: TcfKey = load_json(&key)?;
            print(json!({ "x": x, "y": key.eval(x)? }))
        }
        TcfCommand::Invert { key, trapdoor, y } => {
            let key: TcfKey = load_json(&key)?;
            let td: TcfTrapdoor = load_json(&trapdoor)?;
            let (x0, x1) = td.invert(&key, y)?;
            print(json!({ "y": y, "x0": x0, "x1": x1 }))
        }
    }
}
